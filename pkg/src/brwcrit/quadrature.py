"""Adaptive trapezoid rule for smooth periodic integrands.

On a full period the trapezoid rule converges geometrically, so the
estimate is refined by doubling the node count (reusing old nodes) until
two successive estimates agree.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalFailure


def periodic_trapezoid(func, a: float = -math.pi, b: float = math.pi,
                       atol: float = 1e-12, n0: int = 8, max_nodes: int = 1 << 22) -> float:
    """Integrate a ``(b - a)``-periodic vectorized ``func`` over one period."""
    period = b - a
    nodes = n0
    x = a + period * np.arange(nodes) / nodes
    acc = math.fsum(func(x))
    est = period * acc / nodes
    agreed = 0
    while nodes < max_nodes:
        # midpoints of the current grid are the new nodes
        x = a + period * (np.arange(nodes) + 0.5) / nodes
        acc += math.fsum(func(x))
        nodes *= 2
        new = period * acc / nodes
        # two agreements in a row guard against aliasing coincidences
        agreed = agreed + 1 if abs(new - est) <= atol else 0
        est = new
        if agreed == 2:
            return new
    raise NumericalFailure(f"trapezoid did not reach atol={atol} with {max_nodes} nodes")


def cosine_poisson_quadrature(n: int, a: float, b: float, atol: float = 1e-12) -> float:
    """Numerical value of the integral of ``cos(n t) / (a - b cos t)`` over ``[-pi, pi]``."""
    n0 = 8
    while n0 < 4 * abs(n):
        n0 *= 2
    return periodic_trapezoid(lambda t: np.cos(n * t) / (a - b * np.cos(t)), atol=atol, n0=n0)
