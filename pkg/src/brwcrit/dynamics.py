"""Time-domain checks of exponential growth.

Two independent routes to the growth of particle numbers:

* :func:`integrate_moments` integrates the first-moment equation
  ``dm/dt = H m`` on a truncated lattice with classical RK4.
* :func:`simulate` runs the branching random walk itself with exact
  (event-driven) jumps, aggregating rates per occupied site.

:func:`estimate_growth_rate` fits the exponent of either route.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from . import kernels
from .errors import EstimationError, StepSizeError, ValidationError, WindowTooSmallError
from .model import ModelParams, build_truncated_operator

logger = logging.getLogger(__name__)

NEGATIVE_TOL = 1e-12
DEFAULT_CAP = 10**7
UNIFORM_BLOCK = 4096
_GROW_BY = 64


@dataclass(frozen=True)
class MomentField:
    """``m1(t, x0, y)`` for ``y`` in ``[-L, L]``."""

    halfwidth: int
    values: np.ndarray = field(repr=False)
    t: float
    x0: int = 0

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    @property
    def total(self) -> float:
        return math.fsum(self.values)

    def at(self, y: int) -> float:
        if abs(y) > self.halfwidth:
            return 0.0
        return float(self.values[y + self.halfwidth])


def default_moment_window(params: ModelParams, T: float, x0: int = 0) -> int:
    return params.n + abs(x0) + math.ceil(params.kappa * T) + 50


def max_stable_step(params: ModelParams) -> float:
    return 0.5 / (params.kappa + abs(params.beta) + params.b0)


def integrate_moments(params: ModelParams, x0: int = 0, T: float = 10.0, dt: float = 0.01,
                      L: Optional[int] = None,
                      sample_times: Optional[Sequence[float]] = None) -> list[MomentField]:
    """Integrate ``dm/dt = H m`` from ``m(0) = delta_{x0}`` with RK4.

    Parameters
    ----------
    params : ModelParams
    x0 : int
        Starting site.
    T : float
        Final time.
    dt : float
        Maximum step. Steps are shortened so every sample time is hit exactly.
    L : int, optional
        Window halfwidth; defaults to ``n + |x0| + ceil(kappa T) + 50``.
    sample_times : sequence of float, optional
        Times in ``[0, T]`` at which to record the field. Defaults to
        ``0, 1, 2, ..., T`` (plus ``T``).

    Returns
    -------
    list of MomentField
        One field per sample time, in increasing time order.
    """
    if not T > 0:
        raise ValidationError(f"T must be positive, got {T}")
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    bound = max_stable_step(params)
    if dt > bound:
        raise StepSizeError(f"dt={dt} exceeds the stability bound {bound:.6g}")
    min_window = params.n + abs(x0) + math.ceil(params.kappa * T)
    if L is None:
        L = default_moment_window(params, T, x0)
    elif L < min_window:
        raise WindowTooSmallError(
            f"L={L} is below n + |x0| + ceil(kappa T) = {min_window}")
    if sample_times is None:
        sample_times = sorted(set(np.arange(0.0, T, 1.0).tolist()) | {float(T)})
    times = sorted(float(s) for s in sample_times)
    if times and (times[0] < 0 or times[-1] > T):
        raise ValidationError("sample times must lie in [0, T]")

    op = build_truncated_operator(params, L)
    diag = np.array(op.diagonal)
    off = op.offdiagonal

    def rhs(v):
        out = diag * v
        out[1:] += off * v[:-1]
        out[:-1] += off * v[1:]
        return out

    m = np.zeros(op.size)
    m[x0 + L] = 1.0
    t = 0.0
    fields = []
    for target in times:
        gap = target - t
        steps = math.ceil(gap / dt - 1e-9) if gap > 0 else 0
        h = gap / steps if steps else 0.0
        for _ in range(steps):
            k1 = rhs(m)
            k2 = rhs(m + 0.5 * h * k1)
            k3 = rhs(m + 0.5 * h * k2)
            k4 = rhs(m + h * k3)
            m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            low = m.min()
            if low < 0:
                if low < -NEGATIVE_TOL:
                    logger.warning("moment field dipped to %.3g; clipped to 0", low)
                np.maximum(m, 0.0, out=m)
        t = target
        values = m.copy()
        values.setflags(write=False)
        fields.append(MomentField(halfwidth=L, values=values, t=t, x0=x0))
    return fields


@dataclass(frozen=True)
class ParticleState:
    counts: Mapping[int, int]
    t: float
    total: int
    rng_seed: int
    event_count: int

    @property
    def occupied_sites(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SimulationResult:
    trajectory: tuple[ParticleState, ...]
    truncated: bool
    extinct: bool
    backend: str

    @property
    def final(self) -> ParticleState:
        return self.trajectory[-1]

    def totals(self) -> np.ndarray:
        return np.array([s.total for s in self.trajectory], dtype=float)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.trajectory])


def _snapshot(counts, center, lo, hi, t, seed, events):
    occupied = {i - center: int(counts[i]) for i in range(lo, hi + 1) if counts[i]}
    return ParticleState(counts=MappingProxyType(occupied), t=t, total=sum(occupied.values()),
                         rng_seed=seed, event_count=events)


def simulate(params: ModelParams, x0: int = 0, T: float = 10.0, seed: int = 0,
             sample_times: Optional[Sequence[float]] = None, cap: int = DEFAULT_CAP,
             backend: Optional[str] = None) -> SimulationResult:
    """Exact-jump simulation of the branching random walk from one particle at ``x0``.

    Every particle jumps at rate ``kappa`` to a uniformly chosen neighbour.
    At the origin it additionally dies at the law's ``b_0`` rate or is
    replaced by ``k`` particles at rate ``b_k``; at ``1 <= |x| <= n`` it
    dies at rate ``b0``. The trajectory is sampled at ``sample_times``
    (default: integer times up to ``T``) and is a pure function of the
    arguments.

    If the population exceeds ``cap`` the run stops and the result carries
    ``truncated=True`` with the samples reached so far.
    """
    if not T > 0:
        raise ValidationError(f"T must be positive, got {T}")
    if sample_times is None:
        sample_times = sorted(set(np.arange(0.0, T, 1.0).tolist()) | {float(T)})
    times = sorted(float(s) for s in sample_times)
    if times and (times[0] < 0 or times[-1] > T):
        raise ValidationError("sample times must lie in [0, T]")
    impl = kernels.get_backend(backend)
    seed = int(seed)
    rng = np.random.default_rng(seed)

    law = params.offspring
    births = law.birth_channels
    birth_add = [k - 1 for k, _ in births]
    birth_rate = [b for _, b in births]
    death0 = law.death_rate
    origin_rate = death0 + sum(birth_rate)

    half = max(params.n, abs(x0)) + _GROW_BY
    counts = np.zeros(2 * half + 1, dtype=np.int64)
    center = half
    counts[center + x0] = 1
    lo = hi = center + x0
    t = 0.0
    events = 0
    uniforms = rng.random(UNIFORM_BLOCK)
    upos = 0
    trajectory = []
    truncated = extinct = False

    for stop in times:
        while True:
            status, t, upos, ev, lo, hi = impl.advance(
                counts, center, t, stop, params.kappa, params.n, params.b0, death0,
                origin_rate, birth_add, birth_rate, uniforms, upos, cap, lo, hi)
            events += ev
            if status == kernels.NEED_UNIFORMS:
                uniforms = np.concatenate([uniforms[upos:], rng.random(UNIFORM_BLOCK)])
                upos = 0
            elif status == kernels.GROW:
                counts = np.concatenate([np.zeros(_GROW_BY, np.int64), counts,
                                         np.zeros(_GROW_BY, np.int64)])
                center += _GROW_BY
                lo += _GROW_BY
                hi += _GROW_BY
            elif status == kernels.EXTINCT:
                extinct = True
                t = stop
                break
            elif status == kernels.CAPPED:
                truncated = True
                break
            else:
                break
        if truncated:
            logger.warning("population cap %d exceeded at t=%.6g; trajectory truncated", cap, t)
            break
        trajectory.append(_snapshot(counts, center, lo, hi, t, seed, events))
    return SimulationResult(trajectory=tuple(trajectory), truncated=truncated,
                            extinct=extinct, backend=impl.__name__.rsplit(".", 1)[-1].lstrip("_"))


def replica_seeds(master_seed: int, replicas: int) -> list[int]:
    """Deterministic 64-bit per-replica seeds derived from ``master_seed``."""
    children = np.random.SeedSequence(master_seed).spawn(replicas)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class ReplicaSummary:
    """Totals of ``replicas`` independent runs sampled at common times."""

    times: np.ndarray
    totals: np.ndarray  # shape (replicas, len(times))
    occupied: np.ndarray
    seeds: tuple[int, ...]
    extinct: np.ndarray
    truncated: np.ndarray

    @property
    def replicas(self) -> int:
        return len(self.seeds)

    def mean(self) -> np.ndarray:
        return self.totals.mean(axis=0)

    def stderr(self) -> np.ndarray:
        return self.totals.std(axis=0, ddof=1) / math.sqrt(self.replicas)

    def records(self):
        """``(replica_id, t, total, occupied_sites)`` rows in replica order."""
        for r in range(self.replicas):
            for j, t in enumerate(self.times):
                yield r, float(t), int(self.totals[r, j]), int(self.occupied[r, j])


def _run_one(args):
    params, x0, T, seed, times, cap, backend = args
    res = simulate(params, x0, T, seed, times, cap, backend)
    tot = [s.total for s in res.trajectory]
    occ = [s.occupied_sites for s in res.trajectory]
    # a truncated run keeps its last value; extinct runs stay at 0
    while len(tot) < len(times):
        tot.append(tot[-1] if tot else 0)
        occ.append(occ[-1] if occ else 0)
    return tot, occ, res.extinct, res.truncated


def run_replicas(params: ModelParams, x0: int = 0, T: float = 5.0, master_seed: int = 0,
                 replicas: int = 1000, sample_times: Optional[Sequence[float]] = None,
                 cap: int = DEFAULT_CAP, workers: int = 1,
                 backend: Optional[str] = None) -> ReplicaSummary:
    """Run independent replicas; results do not depend on ``workers``."""
    if replicas < 1:
        raise ValidationError("need at least one replica")
    if sample_times is None:
        sample_times = sorted(set(np.arange(0.0, T, 1.0).tolist()) | {float(T)})
    times = sorted(float(s) for s in sample_times)
    seeds = replica_seeds(master_seed, replicas)
    jobs = [(params, x0, T, s, times, cap, backend) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, replicas // (8 * workers))))
    else:
        results = [_run_one(j) for j in jobs]
    return ReplicaSummary(
        times=np.array(times),
        totals=np.array([r[0] for r in results], dtype=float),
        occupied=np.array([r[1] for r in results], dtype=np.int64),
        seeds=tuple(seeds),
        extinct=np.array([r[2] for r in results]),
        truncated=np.array([r[3] for r in results]),
    )


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    stderr: float
    residual: float  # RMS of log-residuals
    points: int


def estimate_growth_rate(samples: Iterable[tuple[float, float]],
                         t_min: Optional[float] = None) -> GrowthFit:
    """Least-squares slope of ``log(total)`` against ``t`` for ``t >= t_min``.

    ``t_min`` defaults to half the last sample time.
    """
    pts = [(float(t), float(v)) for t, v in samples]
    if not pts:
        raise EstimationError("no samples")
    if t_min is None:
        t_min = max(t for t, _ in pts) / 2
    use = [(t, v) for t, v in pts if t >= t_min and v > 0]
    if not use:
        raise EstimationError("every sample in the fit window is extinct")
    if len(use) < 5:
        raise EstimationError(f"need at least 5 positive samples with t >= {t_min}, got {len(use)}")
    t = np.array([u[0] for u in use])
    y = np.log([u[1] for u in use])
    tc = t - t.mean()
    sxx = float(tc @ tc)
    if sxx == 0:
        raise EstimationError("all samples at the same time")
    slope = float(tc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * tc
    ssr = float(resid @ resid)
    stderr = math.sqrt(ssr / (len(use) - 2) / sxx)
    return GrowthFit(rate=slope, stderr=stderr, residual=math.sqrt(ssr / len(use)), points=len(use))


def moment_growth_rate(fields: Sequence[MomentField], t_min: Optional[float] = None) -> GrowthFit:
    return estimate_growth_rate([(f.t, f.total) for f in fields], t_min)


def survivor_growth_rate(summary: ReplicaSummary, t_min: Optional[float] = None):
    """Growth exponent of the mean total over replicas alive at the last sample.

    Returns ``(fit, survivors, extinct)``. Extinct replicas are excluded
    from the fit but counted.
    """
    alive = summary.totals[:, -1] > 0
    n_alive = int(alive.sum())
    if n_alive == 0:
        raise EstimationError("all replicas went extinct")
    mean = summary.totals[alive].mean(axis=0)
    fit = estimate_growth_rate(zip(summary.times, mean), t_min)
    return fit, n_alive, summary.replicas - n_alive


def write_trajectory_dump(stream: TextIO, summary: ReplicaSummary, header: Sequence[str] = (),
                          delimiter: str = "\t") -> None:
    for line in header:
        stream.write(f"# {line}\n")
    stream.write(delimiter.join(["replica_id", "t", "total", "occupied_sites"]) + "\n")
    for rid, t, total, occ in summary.records():
        stream.write(delimiter.join([str(rid), repr(t), str(total), str(occ)]) + "\n")


def read_trajectory_dump(stream: TextIO, delimiter: str = "\t") -> list[tuple[int, float, int, int]]:
    rows = []
    for line in stream:
        if line.startswith("#") or not line.strip():
            continue
        parts = line.rstrip("\n").split(delimiter)
        if parts[0] == "replica_id":
            continue
        rows.append((int(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])))
    return rows
