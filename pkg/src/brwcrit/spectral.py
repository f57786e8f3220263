"""Fourier-side closed forms for the leading eigenvalue.

A positive eigenvalue ``lam`` is traded for ``zeta`` in (0, 1) via

    zeta = (lam + kappa - sqrt(lam (lam + 2 kappa))) / kappa,
    r    = kappa (1 - zeta^2) / (2 zeta),   lam = sqrt(kappa^2 + r^2) - kappa.

Inverting the Fourier transform of the eigenvalue equation expresses the
eigenfunction through its values ``f(0..n)`` on the sources, which must
solve the ``(n+1) x (n+1)`` linear system ``M(zeta) f = 0`` with

    M[l, 0] = 2 beta zeta^(l+1) - kappa (1 - zeta^2) [l = 0]
    M[l, k] = -2 b0 (zeta^(|k-l|+1) + zeta^(k+l+1)) - kappa (1 - zeta^2) [l = k].

``det M`` vanishes to order ``n`` at ``zeta = 1`` (all rows coincide there),
so roots are searched for in the deflated determinant
``det M(zeta) / (zeta - 1)^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .criticality import SUPERCRITICAL, beta_critical, beta_critical_no_absorbers, compute_J, regime_of
from .errors import DomainError, InternalContradictionError
from .linalg import det_partial_pivot
from .model import ModelParams

DEFLATION_EPS = 1e-6
SCAN_POINTS = 10_000


def _r_of_zeta(zeta, kappa):
    return kappa * (1 - zeta) * (1 + zeta) / (2 * zeta)


def zeta_to_lambda(zeta: float, kappa: float) -> float:
    if not 0 < zeta <= 1:
        raise DomainError(f"zeta must lie in (0, 1], got {zeta}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    r = _r_of_zeta(zeta, kappa)
    # sqrt(kappa^2 + r^2) - kappa without cancellation for small r
    return r * r / (math.hypot(kappa, r) + kappa)


def lambda_to_zeta(lam: float, kappa: float) -> float:
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    # rationalized form of (lam + kappa - sqrt(lam (lam + 2 kappa))) / kappa
    return kappa / (lam + kappa + math.sqrt(lam * (lam + 2 * kappa)))


def cosine_poisson_integral(n: int, a: float, b: float) -> float:
    """Closed form of the integral of ``cos(n t) / (a - b cos t)`` over one period."""
    if not (b > 0 and a > b):
        raise DomainError(f"need a > b > 0, got a={a}, b={b}")
    s = math.sqrt((a - b) * (a + b))
    z1 = b / (a + s)  # = (a - s) / b
    return 2 * math.pi * z1 ** abs(n) / s


@dataclass(frozen=True)
class DeltaSystem:
    n: int
    kappa: float
    beta: float
    b0: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "DeltaSystem":
        return cls(n=params.n, kappa=params.kappa, beta=params.beta, b0=params.b0)

    def matrix(self, zeta):
        """``M(zeta)``; a 1-d array of ``zeta`` gives a stack of matrices."""
        z = np.asarray(zeta, dtype=float)[..., np.newaxis, np.newaxis]
        m = self.n + 1
        l = np.arange(m)[:, np.newaxis]
        k = np.arange(m)[np.newaxis, :]
        diag = -self.kappa * (1 - z * z) * (l == k)
        out = -2 * self.b0 * (z ** (np.abs(k - l) + 1) + z ** (k + l + 1)) + diag
        out[..., :, 0] = (2 * self.beta * z ** (l + 1) + diag[..., :, :1])[..., 0]
        return out

    def deflated_matrix(self, zeta):
        """Rows ``1..n`` replaced by ``(row_l - row_{l-1}) / (zeta - 1)``.

        Its determinant equals ``det M(zeta) / (zeta - 1)^n`` for every
        ``zeta != 1``, and the divided differences are written out as
        polynomials, so the matrix stays well conditioned up to ``zeta = 1``.
        """
        z = np.asarray(zeta, dtype=float)[..., np.newaxis, np.newaxis]
        m = self.n + 1
        out = self.matrix(zeta)
        if self.n == 0:
            return out
        l = np.arange(1, m)[:, np.newaxis]
        k = np.arange(1, m)[np.newaxis, :]
        g = np.where(l <= k, -(z ** np.maximum(k - l + 1, 0)), z ** np.maximum(l - k, 0))
        walk = self.kappa * (1 + z) * ((k == l).astype(float) - (k == l - 1))
        out[..., 1:, 1:] = -2 * self.b0 * (g + z ** (k + l)) + walk
        col0 = 2 * self.beta * z ** l - self.kappa * (1 + z) * (l == 1)
        out[..., 1:, 0] = col0[..., 0]
        return out

    def endpoint(self) -> float:
        """Deflated determinant at ``zeta = 1``: ``2^n J_n`` (``2 beta`` if ``n = 0``)."""
        if self.n == 0:
            return 2 * self.beta
        return 2.0**self.n * compute_J(self.n, self.kappa, self.b0, self.beta)


def delta_det(system: DeltaSystem, zeta: float) -> float:
    if not 0 <= zeta <= 1:
        raise DomainError(f"zeta must lie in [0, 1], got {zeta}")
    return det_partial_pivot(system.matrix(zeta))


def delta_deflated(system: DeltaSystem, zeta, eps: float = DEFLATION_EPS):
    """``det M(zeta) / (zeta - 1)^n`` on ``[0, 1 - eps]``.

    Arguments closer than ``eps`` to 1 get the analytic endpoint value
    :meth:`DeltaSystem.endpoint` instead. Accepts a scalar or an array.
    """
    z = np.asarray(zeta, dtype=float)
    if np.any((z < 0) | (z > 1)):
        raise DomainError("zeta must lie in [0, 1]")
    vals = np.asarray(det_partial_pivot(system.deflated_matrix(z)), dtype=float)
    vals = np.where(z > 1 - eps, system.endpoint(), vals)
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True)
class SpectralSolution:
    zeta_root: float
    lam: float
    f_sources: tuple[float, ...]
    decay_ratio: float


def _sign_changes(values) -> list[int]:
    """Indices ``i`` with a sign change between nonzero neighbours ending at ``i``."""
    signs = np.sign(values)
    nz = np.flatnonzero(signs)
    return [int(nz[j + 1]) for j in range(len(nz) - 1) if signs[nz[j]] != signs[nz[j + 1]]]


def scan_deflated(system: DeltaSystem, points: int = SCAN_POINTS, eps: float = DEFLATION_EPS):
    """Grid, values and sign-change indices of the deflated determinant.

    The grid is ``zeta = 0`` followed by ``points`` equispaced values up to
    ``1 - eps``, then the analytic endpoint at ``zeta = 1``.
    """
    grid = np.concatenate([[0.0], (1 - eps) * np.arange(1, points + 1) / points, [1.0]])
    vals = np.empty_like(grid)
    vals[:-1] = det_partial_pivot(system.deflated_matrix(grid[:-1]))
    vals[-1] = system.endpoint()
    return grid, vals, _sign_changes(vals)


def find_spectral_solution(params: ModelParams, tol: float = 1e-15,
                           points: int = SCAN_POINTS) -> Optional[SpectralSolution]:
    """Root ``zeta`` in (0, 1) of the deflated determinant, if there is one.

    Returns ``None`` unless the source intensity is strictly supercritical.
    Raises :class:`InternalContradictionError` if the scan finds more than
    one sign change, or a sign change that disagrees with the threshold.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    system = DeltaSystem.from_params(params)
    grid, vals, changes = scan_deflated(system, points)
    if len(changes) > 1:
        raise InternalContradictionError(
            f"{len(changes)} sign changes of the deflated determinant for {system}; "
            "at most one positive eigenvalue can exist"
        )
    b_crit = beta_critical_no_absorbers() if system.n == 0 else beta_critical(
        system.n, system.kappa, system.b0)
    supercritical = regime_of(system.beta, b_crit) == SUPERCRITICAL
    if not supercritical:
        if changes and changes[0] < len(grid) - 1:
            raise InternalContradictionError(
                f"interior root found but beta={system.beta} <= beta_crit={b_crit}")
        return None
    if not changes:
        raise InternalContradictionError(
            f"beta={system.beta} > beta_crit={b_crit} but no root in (0, 1) for {system}")

    i = changes[0]
    lo, hi = grid[i - 1], grid[i]
    f_lo = vals[i - 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = det_partial_pivot(system.deflated_matrix(mid))
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    zeta = float(0.5 * (lo + hi))
    lam = zeta_to_lambda(zeta, system.kappa)
    return SpectralSolution(
        zeta_root=zeta,
        lam=lam,
        f_sources=tuple(float(v) for v in null_vector(system.matrix(zeta))),
        decay_ratio=zeta,
    )


def null_vector(matrix) -> np.ndarray:
    """Right singular vector of the smallest singular value, scaled to ``f[0] = 1``."""
    _, _, vt = np.linalg.svd(np.asarray(matrix, dtype=float))
    v = vt[-1]
    if v[0] == 0:
        raise InternalContradictionError("null vector vanishes at the branching source")
    return v / v[0]


def eigenfunction_values(sol: SpectralSolution, params: ModelParams, sites) -> np.ndarray:
    """Eigenfunction at integer ``sites``, reconstructed from its source values."""
    ax = np.abs(np.asarray(sites, dtype=np.int64))
    zeta = sol.zeta_root
    r = _r_of_zeta(zeta, params.kappa)
    f = sol.f_sources
    out = params.beta * f[0] * zeta**ax.astype(float)
    for k in range(1, params.n + 1):
        out = out - params.b0 * f[k] * (zeta ** np.abs(k - ax).astype(float) + zeta ** (k + ax).astype(float))
    return out / r


def eigenfunction_extend(sol: SpectralSolution, params: ModelParams, l: int) -> float:
    return float(eigenfunction_values(sol, params, [l])[0])
