"""Critical source intensities for ``2n`` symmetric absorbers.

With ``x = kappa / b0``, the tridiagonal determinants ``I_n`` satisfy

    I_n = (1 + x) I_{n-1} - (x/2)^2 I_{n-2},    I_0 = 1,  I_1 = 1 + x/2,

and solve to ``I_n = c1 lambda1**n + c2 lambda2**n``. A positive isolated
eigenvalue of the evolution operator exists iff ``J_n > 0``, i.e. iff

    beta > kappa - (kappa**2 / (2 b0)) I_{n-1} / I_n,

which tends to ``b0 (sqrt(1 + 2 kappa/b0) - 1)`` as ``n`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, InternalContradictionError
from .model import ModelParams

REGIME_TOL = 1e-12

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


def _check_rates(kappa, b0):
    if not (kappa > 0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be positive, got {kappa}")
    if not (b0 > 0 and math.isfinite(b0)):
        raise DomainError(f"b0 must be positive, got {b0}")


@dataclass(frozen=True)
class RecurrenceBasis:
    x: float
    lambda1: float
    lambda2: float
    c1: float
    c2: float


def recurrence_basis(kappa: float, b0: float) -> RecurrenceBasis:
    _check_rates(kappa, b0)
    x = kappa / b0
    root = math.sqrt(1 + 2 * x)
    lambda1 = ((1 + x) + root) / 2
    # Vieta: lambda1 * lambda2 = x^2 / 4; avoids cancellation for small x
    lambda2 = (x * x / 4) / lambda1
    i1 = 1 + x / 2
    c1 = (i1 - lambda2) / root
    # lambda1 - i1 = (root - 1)/2 = x / (root + 1)
    c2 = (x / (root + 1)) / root
    return RecurrenceBasis(x=x, lambda1=lambda1, lambda2=lambda2, c1=c1, c2=c2)


def recurrence_I(n: int, kappa: float, b0: float) -> float:
    """``I_n`` by forward recurrence from ``I_0 = 1``, ``I_1 = 1 + x/2``."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    _check_rates(kappa, b0)
    x = kappa / b0
    prev, cur = 1.0, 1 + x / 2
    if n == 0:
        return prev
    q = (x / 2) ** 2
    for _ in range(n - 1):
        prev, cur = cur, (1 + x) * cur - q * prev
    return cur


def closed_form_I(n: int, basis: RecurrenceBasis) -> float:
    return basis.c1 * basis.lambda1**n + basis.c2 * basis.lambda2**n


def compute_J(n: int, kappa: float, b0: float, beta: float) -> float:
    """``J_n``, written affinely in ``beta`` so that ``beta <= 0`` is legal.

    ``J_n = 2^(n+1) b0^n ((beta - kappa) I_n + kappa^2/(2 b0) I_{n-1})``.
    """
    if n < 1:
        raise DomainError(f"J_n needs n >= 1, got {n}")
    i_n = recurrence_I(n, kappa, b0)
    i_nm1 = recurrence_I(n - 1, kappa, b0)
    return 2.0 ** (n + 1) * b0**n * ((beta - kappa) * i_n + kappa**2 / (2 * b0) * i_nm1)


def _ratio_prev_over_current(n: int, basis: RecurrenceBasis) -> float:
    """``I_{n-1} / I_n`` without forming ``lambda1**n``."""
    q = basis.lambda2 / basis.lambda1
    rho = basis.c2 / basis.c1
    return (1 + rho * q ** (n - 1)) / (basis.lambda1 * (1 + rho * q**n))


def beta_critical(n: int, kappa: float, b0: float) -> float:
    """Threshold on ``beta`` for ``n >= 1`` absorber pairs."""
    if n == 0:
        raise DomainError("n = 0 has no absorbers; use beta_critical_no_absorbers")
    if n < 0:
        raise DomainError(f"n must be positive, got {n}")
    basis = recurrence_basis(kappa, b0)
    return kappa - kappa**2 / (2 * b0) * _ratio_prev_over_current(n, basis)


def beta_critical_no_absorbers() -> float:
    """With no absorbers any ``beta > 0`` gives ``lambda = sqrt(kappa^2+beta^2) - kappa > 0``."""
    return 0.0


def beta_star_critical_inf(kappa: float, b0: float) -> float:
    """``b0 sqrt(1 + 2 kappa / b0)``, the large-``n`` threshold on ``beta*``."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    if b0 < 0:
        raise DomainError(f"b0 must be nonnegative, got {b0}")
    return math.sqrt(b0 * b0 + 2 * kappa * b0)


def lambda_infinite(kappa: float, beta_star: float, b0: float) -> float:
    """Leading eigenvalue with an absorber at every site (``b0 = 0``: none)."""
    if not beta_star > 0:
        raise DomainError(f"beta_star must be positive, got {beta_star}")
    return math.hypot(kappa, beta_star) - kappa - b0


@dataclass(frozen=True)
class CriticalityReport:
    n: int
    kappa: float
    b0: float
    beta: float
    I_n: float
    I_nm1: Optional[float]
    J_n: float
    beta_crit: float
    beta_star_crit: float
    beta_star_crit_inf: float
    regime: str
    lam: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def regime_of(beta: float, beta_crit: float) -> str:
    slack = REGIME_TOL * max(1.0, abs(beta_crit))
    diff = beta - beta_crit
    if diff > slack:
        return SUPERCRITICAL
    if diff < -slack:
        return SUBCRITICAL
    return CRITICAL


def classify_regime(params: ModelParams, with_spectrum: bool = True) -> CriticalityReport:
    """Fill a :class:`CriticalityReport` for ``params``.

    When ``with_spectrum`` is set, the positive eigenvalue is located by
    :func:`brwcrit.spectral.find_spectral_solution` and must exist exactly
    in the supercritical regime.
    """
    kappa, b0, n, beta = params.kappa, params.b0, params.n, params.beta
    if n == 0:
        i_n, i_nm1 = 1.0, None
        j_n = 2 * beta  # Delta(1) itself; nothing to deflate
        b_crit = beta_critical_no_absorbers()
    else:
        i_n = recurrence_I(n, kappa, b0)
        i_nm1 = recurrence_I(n - 1, kappa, b0)
        j_n = compute_J(n, kappa, b0, beta)
        b_crit = beta_critical(n, kappa, b0)
    regime = regime_of(beta, b_crit)
    lam = None
    if with_spectrum:
        from .spectral import find_spectral_solution

        sol = find_spectral_solution(params)
        if (sol is not None) != (regime == SUPERCRITICAL):
            raise InternalContradictionError(
                f"regime {regime} but spectral solution {'found' if sol else 'absent'} "
                f"for kappa={kappa}, b0={b0}, n={n}, beta={beta}"
            )
        lam = sol.lam if sol is not None else None
    return CriticalityReport(
        n=n,
        kappa=kappa,
        b0=b0,
        beta=beta,
        I_n=i_n,
        I_nm1=i_nm1,
        J_n=j_n,
        beta_crit=b_crit,
        beta_star_crit=b_crit + b0,
        beta_star_crit_inf=beta_star_critical_inf(kappa, b0),
        regime=regime,
        lam=lam,
    )
