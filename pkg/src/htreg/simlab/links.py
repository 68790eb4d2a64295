"""Link-function batteries for synthetic varying index coefficient models."""

from __future__ import annotations

from typing import Callable, Dict, List

import numpy as np
from numpy.typing import NDArray

from htreg.errors import ParameterError

LinkFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]

_BATTERIES: Dict[str, List[LinkFn]] = {}


def register_battery(name: str) -> Callable[[Callable[[], List[LinkFn]]], Callable[[], List[LinkFn]]]:
    """Decorator registering a factory that returns an ordered list of links."""

    def decorator(factory: Callable[[], List[LinkFn]]) -> Callable[[], List[LinkFn]]:
        _BATTERIES[name] = factory()
        return factory

    return decorator


@register_battery("nonlinear")
def _nonlinear_battery() -> List[LinkFn]:
    return [
        lambda u: 4 * u * np.cos(5 * u) ** 2,
        lambda u: 4 * u * np.sin(5 * u) ** 2,
        lambda u: -5 * u / (2 + np.sin(u)),
        lambda u: 4 * u + np.exp(u) / (1 + np.exp(u)),
        lambda u: 2 * u + np.exp(-(u**2) / 7),
        lambda u: -u + 5 * np.cos(8 * u),
        lambda u: u + 4 * np.sin(7 * u),
        lambda u: -u + np.cos(3 * u**2 / 2),
        lambda u: -2 * u + 4 * np.sin(u**2 / 2),
    ]


@register_battery("linear")
def _linear_battery() -> List[LinkFn]:
    return [lambda u: u]


def available_batteries() -> list[str]:
    return sorted(_BATTERIES)


def links_for(battery: str, d2: int) -> List[LinkFn]:
    """First ``d2`` links of a battery, cycling when it is shorter than d2."""
    links = _BATTERIES.get(battery)
    if links is None:
        raise ParameterError(
            f"unknown link battery '{battery}' (available: {', '.join(available_batteries())})"
        )
    return [links[k % len(links)] for k in range(d2)]
