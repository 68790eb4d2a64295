"""First-order score functions S(x) = -grad p(x) / p(x) for known designs."""

from __future__ import annotations

from typing import Callable, Dict

import numpy as np
from numpy.typing import ArrayLike, NDArray

from htreg.errors import ParameterError

ScoreFn = Callable[..., NDArray[np.float64]]

_SCORES: Dict[str, ScoreFn] = {}


def register_score(name: str) -> Callable[[ScoreFn], ScoreFn]:
    """Decorator to register a score function by name."""

    def decorator(fn: ScoreFn) -> ScoreFn:
        _SCORES[name] = fn
        return fn

    return decorator


def available_scores() -> list[str]:
    return sorted(_SCORES)


@register_score("gaussian")
def gaussian_score(x: NDArray[np.float64], **_: float) -> NDArray[np.float64]:
    """Standard normal design: S(x) = x."""
    return x.copy()


@register_score("student_t")
def student_t_score(x: NDArray[np.float64], nu: float = 5.0, **_: float) -> NDArray[np.float64]:
    """i.i.d. t_nu coordinates: S(x)_j = (nu + 1) x_j / (nu + x_j^2)."""
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    return (nu + 1.0) * x / (nu + x * x)


def score_matrix(x: ArrayLike, kind: str, *, nu: float = 5.0) -> NDArray[np.float64]:
    """Apply the score row-wise to an (n, d1) design (or a single vector)."""
    fn = _SCORES.get(kind)
    if fn is None:
        raise ParameterError(f"unknown score kind '{kind}' (available: {', '.join(available_scores())})")
    return fn(np.asarray(x, dtype=np.float64), nu=nu)


def score(x: ArrayLike, kind: str, *, nu: float = 5.0) -> NDArray[np.float64]:
    """Score vector S(x) of a single design point."""
    return score_matrix(np.asarray(x, dtype=np.float64).ravel(), kind, nu=nu)
