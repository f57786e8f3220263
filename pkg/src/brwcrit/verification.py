"""Cross-module consistency suites, shared by ``brwcrit verify`` and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criticality import beta_critical, closed_form_I, compute_J, recurrence_basis, recurrence_I
from .dynamics import integrate_moments, run_replicas
from .model import ModelParams, build_offspring_law, build_truncated_operator, top_eigenpair
from .quadrature import cosine_poisson_quadrature
from .spectral import cosine_poisson_integral, find_spectral_solution


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    worst: float
    failure: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} {self.name}: {self.cases} cases, worst={self.worst:.3g}"
        if self.failure:
            msg += " first failure: " + ", ".join(f"{k}={v!r}" for k, v in self.failure.items())
        return msg


def threshold_consistency(seed: int = 0, cases: int = 8, L: int = 300,
                          offsets=(-0.1, -0.01, 0.01, 0.1)) -> CheckResult:
    """Sign of ``J_n``, existence of a root and sign of the truncated top eigenvalue agree.

    ``kappa`` and ``b0`` are drawn log-uniformly from [0.2, 2]; with larger
    ``kappa`` the eigenfunction at ``beta_crit + 0.01`` decays over more
    sites than an ``L = 300`` window holds.
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    total = 0
    for _ in range(cases):
        kappa, b0 = np.exp(rng.uniform(math.log(0.2), math.log(2.0), 2))
        n = int(rng.integers(1, 9))
        b_crit = beta_critical(n, kappa, b0)
        for off in offsets:
            params = ModelParams.with_beta(kappa, b0, n, b_crit + off)
            j_pos = compute_J(n, kappa, b0, params.beta) > 0
            root = find_spectral_solution(params) is not None
            lam, _ = top_eigenpair(build_truncated_operator(params, L))
            total += 1
            worst = min(worst, abs(lam))
            if not (j_pos == root == (lam > 0)):
                return CheckResult("threshold_consistency", False, total, worst, {
                    "kappa": float(kappa), "b0": float(b0), "n": n, "beta": params.beta,
                    "J_positive": j_pos, "root": root, "lambda_L": lam})
    return CheckResult("threshold_consistency", True, total, worst)


def quadrature_identity(seed: int = 0, triples: int = 200, atol: float = 1e-10) -> CheckResult:
    """Closed-form cosine/Poisson integral against periodic trapezoid quadrature."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(triples):
        n = int(rng.integers(-20, 21))
        b = float(rng.uniform(1.0, 10.0))
        a = b * float(np.exp(rng.uniform(math.log(1.001), math.log(100.0))))
        err = abs(cosine_poisson_integral(n, a, b) - cosine_poisson_quadrature(n, a, b))
        worst = max(worst, err)
        if not err <= atol:
            return CheckResult("quadrature_identity", False, i + 1, worst,
                               {"n": n, "a": a, "b": b, "error": err})
    return CheckResult("quadrature_identity", True, triples, worst)


def recurrence_vs_closed_form(points: int = 50, n_max: int = 60, rtol: float = 1e-9) -> CheckResult:
    worst = 0.0
    count = 0
    for x in np.logspace(-2, 2, points):
        basis = recurrence_basis(float(x), 1.0)
        for n in range(n_max + 1):
            rec = recurrence_I(n, float(x), 1.0)
            err = abs(rec - closed_form_I(n, basis)) / abs(rec)
            worst = max(worst, err)
            count += 1
            if not err <= rtol:
                return CheckResult("recurrence_vs_closed_form", False, count, worst,
                                   {"x": float(x), "n": n, "rel_error": err})
    return CheckResult("recurrence_vs_closed_form", True, count, worst)


def monte_carlo_vs_moments(seed: int = 42, replicas: int = 10_000, T: float = 5.0,
                           workers: int = 1, sigmas: float = 3.0) -> CheckResult:
    """Mean simulated total at ``T`` within ``sigmas`` standard errors of the ODE total.

    Parameters: kappa = b0 = 1, one absorber pair, binary splitting at rate 1.
    """
    params = ModelParams(kappa=1.0, b0=1.0, n=1, offspring=build_offspring_law([(2, 1.0)]))
    ode_total = integrate_moments(params, 0, T, 0.01, sample_times=[T])[-1].total
    summary = run_replicas(params, 0, T, seed, replicas, [T], workers=workers)
    mean = float(summary.mean()[-1])
    se = float(summary.stderr()[-1])
    z = abs(mean - ode_total) / se
    passed = z <= sigmas
    failure = {} if passed else {"seed": seed, "mean": mean, "stderr": se, "ode_total": ode_total}
    return CheckResult("monte_carlo_vs_moments", passed, replicas, z, failure)


def run_suite(suite: str, seed: int = 42, replicas: int = 10_000, workers: int = 1) -> list[CheckResult]:
    if suite not in ("analytic", "stochastic", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    if suite in ("analytic", "all"):
        results.append(threshold_consistency(seed))
        results.append(quadrature_identity(seed))
        results.append(recurrence_vs_closed_form())
    if suite in ("stochastic", "all"):
        results.append(monte_carlo_vs_moments(seed, replicas, workers=workers))
    return results
