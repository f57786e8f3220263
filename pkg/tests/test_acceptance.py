"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each test records a one-line verdict; the lines are printed at the end of a
pytest run (see conftest) or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE, random_supercritical  # noqa: E402

from brwcrit import (  # noqa: E402
    DeltaSystem,
    ModelParams,
    beta_critical,
    build_offspring_law,
    build_truncated_operator,
    closed_form_I,
    cosine_poisson_integral,
    delta_deflated,
    eigenfunction_values,
    find_spectral_solution,
    recurrence_basis,
    recurrence_I,
    top_eigenpair,
)
from brwcrit.dynamics import estimate_growth_rate, integrate_moments, run_replicas  # noqa: E402
from brwcrit.quadrature import cosine_poisson_quadrature  # noqa: E402
from brwcrit.spectral import _sign_changes  # noqa: E402


def _record(number, title, ok, detail, elapsed):
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE[number] = f"[{status}] {number}. {title}: {detail} ({elapsed:.2f} s)"


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_1_threshold_single_pair():
    with _Timer() as clock:
        b_crit = beta_critical(1, 1.0, 1.0)
        signs = {}
        for beta in (0.6, 0.65, 0.68, 0.7):
            lam, _ = top_eigenpair(build_truncated_operator(ModelParams.with_beta(1, 1, 1, beta), 300))
            signs[beta] = (lam > 0) == (beta > 2 / 3)
    ok = abs(b_crit - 2 / 3) <= 1e-12 and all(signs.values()) and clock.elapsed < 1.0
    _record(1, "threshold at n=1", ok,
            f"beta_crit={b_crit!r}, operator signs agree for {sum(signs.values())}/4", clock.elapsed)
    assert abs(b_crit - 2 / 3) <= 1e-12
    assert all(signs.values()), signs
    assert clock.elapsed < 1.0


def test_2_large_n_limit():
    with _Timer() as clock:
        worst = 0.0
        for kappa in (0.5, 1.0, 2.0):
            for b0 in (0.5, 1.0, 2.0):
                gap = abs(beta_critical(200, kappa, b0) + b0 - b0 * math.sqrt(1 + 2 * kappa / b0))
                worst = max(worst, gap)
    ok = worst <= 1e-9 and clock.elapsed < 1.0
    _record(2, "large-n limit", ok, f"worst gap {worst:.2e} over 9 grid points", clock.elapsed)
    assert worst <= 1e-9
    assert clock.elapsed < 1.0


def test_3_spectral_vs_operator():
    with _Timer() as clock:
        cases = random_supercritical(np.random.default_rng(2024), 25)
        diffs = []
        for params, sol in cases:
            lam, _ = top_eigenpair(build_truncated_operator(params, 300))
            diffs.append(abs(lam - sol.lam))
    worst = max(diffs)
    ok = worst <= 1e-8 and clock.elapsed < 30
    _record(3, "spectral vs truncated operator", ok,
            f"worst |difference| {worst:.2e} over 25 sets", clock.elapsed)
    assert worst <= 1e-8
    assert clock.elapsed < 30


def test_4_poisson_identity():
    rng = np.random.default_rng(7)
    with _Timer() as clock:
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(-20, 21))
            b = float(rng.uniform(1.0, 10.0))
            a = b * float(np.exp(rng.uniform(math.log(1.001), math.log(100.0))))
            worst = max(worst, abs(cosine_poisson_integral(n, a, b) - cosine_poisson_quadrature(n, a, b)))
    ok = worst <= 1e-10 and clock.elapsed < 5
    _record(4, "closed-form integral vs quadrature", ok,
            f"worst error {worst:.2e} over 200 triples", clock.elapsed)
    assert worst <= 1e-10
    assert clock.elapsed < 5


def test_5_recurrence_vs_closed_form():
    with _Timer() as clock:
        worst = 0.0
        for x in np.logspace(-2, 2, 50):
            basis = recurrence_basis(float(x), 1.0)
            for n in range(61):
                rec = recurrence_I(n, float(x), 1.0)
                worst = max(worst, abs(rec - closed_form_I(n, basis)) / abs(rec))
    ok = worst <= 1e-9 and clock.elapsed < 1.0
    _record(5, "recurrence vs closed form", ok, f"worst relative error {worst:.2e}", clock.elapsed)
    assert worst <= 1e-9
    assert clock.elapsed < 1.0


def test_6_single_sign_change():
    rng = np.random.default_rng(99)
    grid = (1 - 1e-6) * np.arange(1, 10_001) / 10_000
    with _Timer() as clock:
        most = 0
        violations = []
        for _ in range(100):
            kappa, b0 = np.exp(rng.uniform(math.log(0.1), math.log(10.0), 2))
            beta = float(rng.uniform(-5, 5))
            n = int(rng.integers(1, 9))
            changes = len(_sign_changes(delta_deflated(DeltaSystem(n, kappa, beta, b0), grid)))
            most = max(most, changes)
            if changes > 1:
                violations.append((kappa, b0, beta, n, changes))
    ok = not violations and clock.elapsed < 60
    _record(6, "at most one sign change", ok,
            f"max sign changes {most} over 100 sets", clock.elapsed)
    assert not violations, violations[0]
    assert clock.elapsed < 60


def _stencil_residual(params, sol, radius=50):
    x = np.arange(-radius, radius + 1)
    f = eigenfunction_values(sol, params, np.arange(-radius - 1, radius + 2))
    centre = f[1:-1]
    walk = params.kappa / 2 * (f[:-2] + f[2:]) - params.kappa * centre
    return float(np.max(np.abs(walk + params.potential(x) * centre - sol.lam * centre)))


def test_7_eigenfunction_residual():
    with _Timer() as clock:
        cases = random_supercritical(np.random.default_rng(77), 10)
        residual = ratio_err = 0.0
        for params, sol in cases:
            residual = max(residual, _stencil_residual(params, sol))
            f50, f51 = eigenfunction_values(sol, params, [50, 51])
            ratio_err = max(ratio_err, abs(f51 / f50 - sol.zeta_root))
    ok = residual <= 1e-8 and ratio_err <= 1e-6
    _record(7, "eigenfunction residual", ok,
            f"worst residual {residual:.2e}, worst decay-ratio error {ratio_err:.2e}", clock.elapsed)
    assert residual <= 1e-8
    assert ratio_err <= 1e-6


def _growth_params():
    return ModelParams(kappa=1.0, b0=1.0, n=1, offspring=build_offspring_law([(2, 1.0)]))


def test_8_growth_exponent_and_mean():
    params = _growth_params()
    with _Timer() as clock:
        lam = find_spectral_solution(params).lam
        fields = integrate_moments(params, T=40.0, dt=0.01, sample_times=np.arange(20.0, 41.0))
        fit = estimate_growth_rate([(f.t, f.total) for f in fields], t_min=20.0)
        ode_total = integrate_moments(params, T=5.0, dt=0.01, sample_times=[5.0])[-1].total
        summary = run_replicas(params, T=5.0, master_seed=42, replicas=10_000, sample_times=[5.0])
        mean, se = float(summary.mean()[-1]), float(summary.stderr()[-1])
    z = abs(mean - ode_total) / se
    ok = abs(fit.rate - lam) <= 1e-3 and z <= 3 and clock.elapsed < 300
    _record(8, "growth exponent and Monte Carlo mean", ok,
            f"ODE rate {fit.rate:.6f} vs lambda {lam:.6f}; MC mean {mean:.4f} +- {se:.4f} "
            f"vs ODE {ode_total:.4f} ({z:.2f} SE)", clock.elapsed)
    assert abs(fit.rate - lam) <= 1e-3
    assert z <= 3
    assert clock.elapsed < 300


def test_9_shape_convergence():
    params = _growth_params()
    with _Timer() as clock:
        sol = find_spectral_solution(params)
        field = integrate_moments(params, T=40.0, dt=0.01, sample_times=[40.0])[-1]
        y = np.arange(-30, 31)
        m = np.array([field.at(int(v)) for v in y]) * math.exp(-sol.lam * 40.0)
        psi = eigenfunction_values(sol, params, y)
        cosine = float(m @ psi / (np.linalg.norm(m) * np.linalg.norm(psi)))
    ok = cosine > 0.999
    _record(9, "shape convergence", ok, f"cosine similarity 1 - {1 - cosine:.1e}", clock.elapsed)
    assert cosine > 0.999


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError:
            failed += 1
    for key in sorted(ACCEPTANCE):
        print(ACCEPTANCE[key])
    sys.exit(1 if failed else 0)
