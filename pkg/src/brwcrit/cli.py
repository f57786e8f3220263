"""Command-line interface.

Every output starts with commented header lines; the ``# config:`` line is
the fully resolved run configuration as JSON and parses back with
:meth:`RunConfig.from_lines`. Data follows as tab-separated text.

Exit codes: 0 success, 1 usage, 2 numerical failure, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__, kernels
from .criticality import (
    beta_critical,
    beta_critical_no_absorbers,
    beta_star_critical_inf,
    classify_regime,
    recurrence_basis,
)
from .dynamics import (
    integrate_moments,
    moment_growth_rate,
    run_replicas,
    survivor_growth_rate,
    write_trajectory_dump,
)
from .errors import (
    BRWError,
    EstimationError,
    InternalContradictionError,
    NumericalFailure,
    ValidationError,
)
from .model import ModelParams, build_offspring_law, build_truncated_operator, top_eigenpair
from .spectral import eigenfunction_values, find_spectral_solution
from .verification import run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_INVARIANT = 3

OUTPUT_DIR_ENV = "BRWCRIT_OUTPUT_DIR"
COMMANDS = ("critical-beta", "spectrum", "eigenfunction", "sweep", "moments", "simulate", "verify")
DEFAULT_GRID = (0.5, 1.0, 2.0)

logger = logging.getLogger("brwcrit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def header_line(self) -> str:
        return "config: " + json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_lines(cls, lines) -> "RunConfig":
        for line in lines:
            if line.startswith("# config: "):
                data = json.loads(line[len("# config: "):])
                return cls(command=data["command"], options=data["options"])
        raise ValueError("no config header found")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    return values


def _offspring_pairs(text: str) -> list[list[float]]:
    pairs = []
    for item in text.split(","):
        if not item.strip():
            continue
        try:
            k, b = item.split(":")
            pairs.append([int(k), float(b)])
        except ValueError:
            raise argparse.ArgumentTypeError(f"offspring entries look like k:rate, got {item!r}")
    return pairs


def _add_model_args(p, need_law=True):
    p.add_argument("--kappa", type=float, default=1.0, help="walk intensity")
    p.add_argument("--b0", type=float, default=1.0, help="death intensity at absorbers")
    p.add_argument("--n", type=int, default=1, help="number of absorber pairs")
    if need_law:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--beta", type=float, default=None,
                       help="source intensity; binary splitting with death rate b0 (default 1)")
        g.add_argument("--offspring", type=_offspring_pairs, default=None,
                       help="offspring law as k:rate pairs, e.g. 0:1,2:2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brwcrit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-o", "--output", default=None,
                        help=f"output file (default: ${OUTPUT_DIR_ENV}/<command>.tsv or stdout)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("critical-beta", help="critical source intensity for n absorber pairs")
    _add_model_args(p, need_law=False)
    p.add_argument("--beta", type=float, default=None, help="also report J_n and regime at beta")

    p = sub.add_parser("spectrum", help="leading eigenvalue via the zeta root")
    _add_model_args(p)
    p.add_argument("--tol", type=float, default=1e-15, help="zeta bisection width")
    p.add_argument("--check-L", type=int, default=None, help="compare with truncated operator")

    p = sub.add_parser("eigenfunction", help="leading eigenfunction on |x| <= radius")
    _add_model_args(p)
    p.add_argument("--radius", type=int, default=30)

    p = sub.add_parser("sweep", help="beta* threshold as a function of n")
    p.add_argument("--kappa-list", type=_float_list, default=list(DEFAULT_GRID))
    p.add_argument("--b0-list", type=_float_list, default=list(DEFAULT_GRID))
    p.add_argument("--n-max", type=int, default=20)

    p = sub.add_parser("moments", help="integrate the first-moment equation")
    _add_model_args(p)
    p.add_argument("--x0", type=int, default=0)
    p.add_argument("--T", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--sample-dt", type=float, default=1.0)
    p.add_argument("--t-min", type=float, default=None, help="growth fit window start")

    p = sub.add_parser("simulate", help="Monte Carlo replicas of the branching walk")
    _add_model_args(p)
    p.add_argument("--x0", type=int, default=0)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--sample-dt", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=10**7)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify", help="run consistency suites")
    p.add_argument("--suite", choices=("analytic", "stochastic", "all"), default="analytic")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--replicas", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _params(args) -> ModelParams:
    law_pairs = getattr(args, "offspring", None)
    if law_pairs is not None:
        law = build_offspring_law(law_pairs)
        return ModelParams(kappa=args.kappa, b0=args.b0, n=args.n, offspring=law)
    beta = args.beta if getattr(args, "beta", None) is not None else 1.0
    return ModelParams.with_beta(args.kappa, args.b0, args.n, beta)


def _model_options(params: ModelParams) -> dict:
    return {
        "kappa": params.kappa,
        "b0": params.b0,
        "n": params.n,
        "offspring": [[k, b] for k, b in params.offspring.rates],
        "beta": params.beta,
    }


def _times(T, step):
    if not step > 0:
        raise ValidationError("--sample-dt must be positive")
    count = int(math.floor(T / step + 1e-9))
    times = [i * step for i in range(count + 1)]
    if times[-1] < T:
        times.append(T)
    return times


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Output:
    """Header plus tab-separated rows, written by a single writer."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.lines: list[str] = [f"# brwcrit {config.command}", "# " + config.header_line()]

    def comment(self, text: str):
        self.lines.append(f"# {text}")

    def row(self, *values):
        self.lines.append("\t".join(_fmt(v) for v in values))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def cmd_critical_beta(args) -> Output:
    if args.n < 0:
        raise ValidationError("n must be nonnegative")
    if args.n >= 1 and not args.b0 > 0:
        raise ValidationError("b0 must be positive when absorbers are present (n >= 1)")
    if not args.kappa > 0:
        raise ValidationError("kappa must be positive")
    opts = {"kappa": args.kappa, "b0": args.b0, "n": args.n, "beta": args.beta}
    out = Output(RunConfig("critical-beta", opts))
    out.row("key", "value")
    if args.n == 0:
        b_crit = beta_critical_no_absorbers()
    else:
        b_crit = beta_critical(args.n, args.kappa, args.b0)
    out.row("beta_crit", b_crit)
    out.row("beta_star_crit", b_crit + args.b0)
    out.row("beta_star_crit_inf", beta_star_critical_inf(args.kappa, args.b0))
    if args.n >= 1:
        basis = recurrence_basis(args.kappa, args.b0)
        report = classify_regime(ModelParams.with_beta(args.kappa, args.b0, args.n, b_crit),
                                 with_spectrum=False)
        out.row("I_n", report.I_n)
        out.row("I_nm1", report.I_nm1)
        for name in ("lambda1", "lambda2", "c1", "c2"):
            out.row(name, getattr(basis, name))
    if args.beta is not None:
        report = classify_regime(ModelParams.with_beta(args.kappa, args.b0, args.n, args.beta))
        out.row("beta", args.beta)
        out.row("J_n", report.J_n)
        out.row("regime", report.regime)
        out.row("lambda", report.lam)
    return out


def cmd_spectrum(args) -> Output:
    params = _params(args)
    opts = _model_options(params) | {"tol": args.tol, "check_L": args.check_L}
    out = Output(RunConfig("spectrum", opts))
    report = classify_regime(params, with_spectrum=False)
    sol = find_spectral_solution(params, tol=args.tol)
    out.row("key", "value")
    out.row("regime", report.regime)
    out.row("beta", params.beta)
    out.row("beta_crit", report.beta_crit)
    out.row("J_n", report.J_n)
    if sol is None:
        out.row("zeta_root", None)
        out.row("lambda", None)
    else:
        out.row("zeta_root", sol.zeta_root)
        out.row("lambda", sol.lam)
        for i, v in enumerate(sol.f_sources):
            out.row(f"source_value_{i}", v)
    if args.check_L is not None:
        lam_L, _ = top_eigenpair(build_truncated_operator(params, args.check_L))
        out.row("lambda_truncated", lam_L)
        if sol is not None:
            out.row("abs_difference", abs(lam_L - sol.lam))
    return out


def cmd_eigenfunction(args) -> Output:
    params = _params(args)
    opts = _model_options(params) | {"radius": args.radius}
    sol = find_spectral_solution(params)
    if sol is None:
        raise ValidationError("no positive eigenvalue: parameters are not supercritical")
    out = Output(RunConfig("eigenfunction", opts))
    out.comment(f"lambda={sol.lam!r} zeta={sol.zeta_root!r}")
    out.row("site", "eigenfunction")
    sites = np.arange(-args.radius, args.radius + 1)
    for x, v in zip(sites, eigenfunction_values(sol, params, sites)):
        out.row(int(x), float(v))
    return out


def cmd_sweep(args) -> Output:
    if not args.kappa_list or not args.b0_list:
        raise ValidationError("kappa and b0 lists must be non-empty")
    if args.n_max < 1:
        raise ValidationError("--n-max must be at least 1")
    opts = {"kappa_list": args.kappa_list, "b0_list": args.b0_list, "n_max": args.n_max}
    out = Output(RunConfig("sweep", opts))
    out.row("kappa", "b0", "n", "beta_star_crit", "beta_star_crit_inf")
    for kappa in args.kappa_list:
        for b0 in args.b0_list:
            if not (kappa > 0 and b0 > 0):
                raise ValidationError(f"kappa and b0 must be positive, got {kappa}, {b0}")
            limit = beta_star_critical_inf(kappa, b0)
            for n in range(1, args.n_max + 1):
                out.row(kappa, b0, n, beta_critical(n, kappa, b0) + b0, limit)
    return out


def cmd_moments(args) -> Output:
    params = _params(args)
    times = _times(args.T, args.sample_dt)
    fields = integrate_moments(params, args.x0, args.T, args.dt, args.L, times)
    opts = _model_options(params) | {"x0": args.x0, "T": args.T, "dt": args.dt,
                                     "L": fields[0].halfwidth, "sample_dt": args.sample_dt,
                                     "t_min": args.t_min}
    out = Output(RunConfig("moments", opts))
    out.row("t", "total", "m1_at_origin")
    for f in fields:
        out.row(f.t, f.total, f.at(0))
    try:
        fit = moment_growth_rate(fields, args.t_min)
    except EstimationError as exc:
        out.comment(f"growth fit unavailable: {exc}")
    else:
        out.comment(f"growth_rate={fit.rate!r} stderr={fit.stderr!r} "
                    f"residual={fit.residual!r} points={fit.points}")
    return out


def cmd_simulate(args) -> Output:
    params = _params(args)
    times = _times(args.T, args.sample_dt)
    opts = _model_options(params) | {"x0": args.x0, "T": args.T, "seed": args.seed,
                                     "replicas": args.replicas, "sample_dt": args.sample_dt,
                                     "cap": args.cap}
    summary = run_replicas(params, args.x0, args.T, args.seed, args.replicas, times,
                           cap=args.cap, workers=args.workers)
    out = Output(RunConfig("simulate", opts))
    buf = io.StringIO()
    write_trajectory_dump(buf, summary)
    out.lines.extend(buf.getvalue().rstrip("\n").split("\n"))
    out.comment(f"extinct={int(summary.extinct.sum())} truncated={int(summary.truncated.sum())}")
    return out


def cmd_verify(args) -> Output:
    opts = {"suite": args.suite, "seed": args.seed, "replicas": args.replicas}
    out = Output(RunConfig("verify", opts))
    results = run_suite(args.suite, args.seed, args.replicas, args.workers)
    out.row("check", "status", "cases", "worst")
    for r in results:
        out.row(r.name, "pass" if r.passed else "fail", r.cases, r.worst)
    failed = [r for r in results if not r.passed]
    if failed:
        out.comment(failed[0].line())
        out.failed = True
    return out


HANDLERS = {
    "critical-beta": cmd_critical_beta,
    "spectrum": cmd_spectrum,
    "eigenfunction": cmd_eigenfunction,
    "sweep": cmd_sweep,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _destination(args) -> Optional[str]:
    if args.output:
        return args.output
    directory = os.environ.get(OUTPUT_DIR_ENV)
    if directory:
        return os.path.join(directory, f"{args.command}.tsv")
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logger.debug("kernel backend: %s", kernels.BACKEND)
    try:
        out = HANDLERS[args.command](args)
    except (ValidationError, argparse.ArgumentTypeError) as exc:
        print(f"brwcrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalContradictionError as exc:
        print(f"brwcrit {args.command}: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NumericalFailure, EstimationError, BRWError) as exc:
        print(f"brwcrit {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    dest = _destination(args)
    text = out.text()
    if dest is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(dest)), exist_ok=True)
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if getattr(out, "failed", False):
        for line in out.lines:
            if line.startswith("# FAIL"):
                print(line[2:], file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
