"""Named test functions on the default grid."""
from __future__ import annotations

import numpy as np

from .grid import GridFunction, make_grid


def gauss(x):
    return np.exp(-x * x)


def indicator(x):
    return (np.abs(x) <= 1).astype(float)


def coswin(x):
    return np.cos(x) * np.exp(-(x / 8) ** 2)


def bump(x):
    """Positive, bounded, heavy-tailed: ``1 / (1 + x^2)``."""
    return 1.0 / (1.0 + x * x)


_DECAYING = {"gauss": gauss, "indicator": indicator, "coswin": coswin, "bump": bump}
STANDARD = ("gauss", "indicator", "coswin")
POSITIVE = ("gauss", "indicator", "bump", "one")


def fixture(name: str, half_extent=64.0, spacing=1.0 / 64, shift=0.0) -> GridFunction:
    """Sample a named fixture; ``shift`` translates it, ``f(x - shift)``.

    ``"one"`` is the constant 1 carried as a tail value, ``"cos"`` is
    ``cos x`` on a grid whose half extent is rounded to a multiple of pi so
    that it can be extended with ``boundary="periodic"``.
    """
    if name == "one":
        return make_grid(lambda x: np.ones_like(x), half_extent, spacing, tail_value=1.0)
    if name == "cos":
        L = 16 * np.pi
        return GridFunction.from_callable(lambda x: np.cos(x - shift), L / 2048, L)
    try:
        fn = _DECAYING[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(_DECAYING) + ['one', 'cos']}") from None
    return make_grid(lambda x: fn(x - shift), half_extent, spacing)


def names():
    return sorted(_DECAYING) + ["cos", "one"]


def boundary_for(name: str) -> str:
    return "periodic" if name == "cos" else "decay"
