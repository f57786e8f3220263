"""Model parameters, offspring law and the truncated evolution operator.

The evolution operator acts on functions on the integer lattice as

    (H f)(x) = kappa/2 (f(x-1) + f(x+1)) - kappa f(x)
               + beta [x = 0] f(x) - b0 [1 <= |x| <= n] f(x)

Restricting it to the window ``[-L, L]`` with zero values outside gives a
symmetric tridiagonal matrix whose top eigenpair is the brute-force oracle
for the closed forms in :mod:`brwcrit.spectral` and
:mod:`brwcrit.criticality`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import NumericalFailure, ValidationError, WindowTooSmallError

_REL_SUM_TOL = 1e-12


@dataclass(frozen=True)
class OffspringLaw:
    """Intensities ``b_k`` of the branching source's generating function.

    ``rates`` holds ``(k, b_k)`` for ``k != 1`` with ``b_k > 0``, sorted by
    ``k``; ``b1`` is the implied negative diagonal intensity.
    """

    rates: tuple[tuple[int, float], ...]
    b1: float
    beta: float
    beta_star: float
    # Finite support satisfies any factorial growth bound on the moments of
    # the law; recorded, not checked.
    moment_growth_assumed: bool = True

    @property
    def death_rate(self) -> float:
        return dict(self.rates).get(0, 0.0)

    @property
    def birth_channels(self) -> tuple[tuple[int, float], ...]:
        """``(k, b_k)`` pairs with ``k >= 2``."""
        return tuple((k, b) for k, b in self.rates if k >= 2)

    def generating_function(self, u: float) -> float:
        return self.b1 * u + sum(b * u**k for k, b in self.rates)


def build_offspring_law(pairs: Iterable[tuple[int, float]], b0: float | None = None) -> OffspringLaw:
    """Build and validate an offspring law from ``(k, b_k)`` pairs.

    If ``b0`` is given and the pairs carry no ``k = 0`` term, ``(0, b0)`` is
    added so that the branching source has the same death intensity as the
    absorbers; if both are given they must agree.
    """
    merged: dict[int, float] = {}
    for k, b in pairs:
        if int(k) != k or k < 0:
            raise ValidationError(f"offspring count must be a nonnegative integer, got {k!r}")
        k = int(k)
        if k == 1:
            raise ValidationError("b_1 is implied by the other rates; do not pass k=1")
        b = float(b)
        if not math.isfinite(b) or b < 0:
            raise ValidationError(f"rate b_{k} must be finite and nonnegative, got {b}")
        if k in merged:
            raise ValidationError(f"duplicate offspring count k={k}")
        merged[k] = b
    if b0 is not None:
        b0 = float(b0)
        if b0 < 0 or not math.isfinite(b0):
            raise ValidationError(f"death rate b0 must be finite and nonnegative, got {b0}")
        if 0 in merged:
            if not math.isclose(merged[0], b0, rel_tol=_REL_SUM_TOL, abs_tol=0.0):
                raise ValidationError(f"pairs give b_0={merged[0]} but b0={b0}")
        elif b0 > 0:
            merged[0] = b0
    rates = tuple(sorted((k, b) for k, b in merged.items() if b > 0))
    beta_star = math.fsum((k - 1) * b for k, b in rates if k >= 2)
    if not beta_star > 0:
        raise ValidationError("offspring law has no reproduction term (beta* = 0)")
    b1 = -math.fsum(b for _, b in rates)
    beta = math.fsum([b1] + [k * b for k, b in rates])
    return OffspringLaw(rates=rates, b1=b1, beta=beta, beta_star=beta_star)


@dataclass(frozen=True)
class ModelParams:
    kappa: float
    b0: float
    n: int
    offspring: OffspringLaw

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValidationError(f"kappa must be positive, got {self.kappa}")
        if int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"n must be a nonnegative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not math.isfinite(self.b0) or self.b0 < 0:
            raise ValidationError(f"b0 must be finite and nonnegative, got {self.b0}")
        if self.n >= 1 and self.b0 == 0:
            raise ValidationError("b0 must be positive when absorbers are present (n >= 1)")

    @property
    def beta(self) -> float:
        return self.offspring.beta

    @classmethod
    def with_beta(cls, kappa: float, b0: float, n: int, beta: float) -> "ModelParams":
        """Params whose source intensity is ``beta``, with binary splitting.

        The branching source dies at rate ``b0`` (as the absorbers do) and
        splits in two at rate ``beta + b0``. When that is not positive, the
        split rate is 1 and the death rate absorbs the difference.
        """
        death = float(b0)
        if beta + death <= 0:
            death = 1.0 - beta
        law = build_offspring_law([(0, death), (2, beta + death)])
        return cls(kappa=float(kappa), b0=float(b0), n=n, offspring=law)

    def potential(self, sites: np.ndarray) -> np.ndarray:
        """Diagonal potential ``beta [x=0] - b0 [1 <= |x| <= n]`` at ``sites``."""
        ax = np.abs(np.asarray(sites))
        return self.beta * (ax == 0) - self.b0 * ((ax >= 1) & (ax <= self.n))


def default_window(n: int) -> int:
    return max(200, 10 * n)


@dataclass(frozen=True)
class TruncatedOperator:
    """Evolution operator restricted to ``[-L, L]`` with Dirichlet boundary."""

    halfwidth: int
    diagonal: np.ndarray = field(repr=False)
    offdiagonal: float

    @property
    def size(self) -> int:
        return 2 * self.halfwidth + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def off_array(self) -> np.ndarray:
        return np.full(self.size - 1, self.offdiagonal)

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diagonal * v
        out[1:] += self.offdiagonal * v[:-1]
        out[:-1] += self.offdiagonal * v[1:]
        return out

    def to_dense(self) -> np.ndarray:
        off = self.off_array()
        return np.diag(self.diagonal) + np.diag(off, 1) + np.diag(off, -1)


def build_truncated_operator(params: ModelParams, L: int | None = None) -> TruncatedOperator:
    if L is None:
        L = default_window(params.n)
    if int(L) != L or L <= params.n:
        raise WindowTooSmallError(f"window halfwidth L={L} must exceed n={params.n}")
    L = int(L)
    sites = np.arange(-L, L + 1)
    diag = -params.kappa + params.potential(sites)
    diag.setflags(write=False)
    return TruncatedOperator(halfwidth=L, diagonal=diag, offdiagonal=params.kappa / 2)


def top_eigenpair(op: TruncatedOperator, tol: float = 1e-12, max_retries: int = 8):
    """Largest eigenvalue and unit eigenvector of the truncated operator.

    The eigenvalue comes from Sturm-sequence bisection to absolute accuracy
    ``tol``; the eigenvector from inverse iteration shifted just above the
    bisection bracket, which keeps the shifted system positive definite.

    Returns
    -------
    (float, ndarray)
        ``lambda_max`` and an eigenvector with unit 2-norm whose largest
        component is positive.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    diag = np.ascontiguousarray(op.diagonal, dtype=np.float64)
    off = op.off_array()
    radius = float(np.max(np.abs(diag))) + 2 * abs(op.offdiagonal)
    tol_eff = max(tol, 8 * np.finfo(float).eps * radius)
    lo = float(np.min(diag)) - 2 * abs(op.offdiagonal)
    hi = float(np.max(diag)) + 2 * abs(op.offdiagonal)
    lo, hi, _ = kernels.largest_eigenvalue(diag, off, lo, hi, tol_eff, 400)
    lam = float(0.5 * (lo + hi))

    shift = hi + tol_eff
    v = np.ones(op.size) / math.sqrt(op.size)
    for _ in range(max_retries):
        y = np.asarray(kernels.solve_shifted(diag, off, shift, v))
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            break
        v = y / norm
        if np.max(np.abs(op.matvec(v) - lam * v)) <= 10 * tol_eff:
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            return lam, v
    raise NumericalFailure(
        f"inverse iteration did not converge after {max_retries} iterations "
        f"(lambda_max={lam:.6g})"
    )
