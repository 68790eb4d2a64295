"""Heavy-tailed regression toolkit."""

__version__ = "0.1.0"
