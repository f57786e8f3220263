import math
import subprocess
import sys
import time

import pytest

from brwcrit import NumericalFailure, InternalContradictionError, cli
from brwcrit.cli import RunConfig, main
from brwcrit.verification import CheckResult


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return [line.split("\t") for line in text.splitlines() if not line.startswith("#")]


def keyed(text):
    return {row[0]: row[1] for row in table(text)[1:]}


class TestCriticalBeta:
    def test_single_pair(self, capsys):
        code, out, _ = run(["critical-beta", "--kappa", "1", "--b0", "1", "--n", "1"], capsys)
        assert code == 0
        values = keyed(out)
        assert float(values["beta_crit"]) == pytest.approx(0.6666667, abs=1e-7)
        assert float(values["beta_star_crit_inf"]) == pytest.approx(math.sqrt(3))
        assert float(values["I_n"]) == 1.5 and float(values["I_nm1"]) == 1.0

    def test_no_absorbers(self, capsys):
        code, out, _ = run(["critical-beta", "--kappa", "1", "--b0", "1", "--n", "0"], capsys)
        assert code == 0
        assert float(keyed(out)["beta_crit"]) == 0.0

    def test_with_beta_reports_regime(self, capsys):
        _, out, _ = run(["critical-beta", "--n", "1", "--beta", "1"], capsys)
        values = keyed(out)
        assert values["regime"] == "supercritical"
        assert float(values["J_n"]) == pytest.approx(2.0)
        assert float(values["lambda"]) == pytest.approx(0.25)

    def test_zero_absorber_rate(self, capsys):
        code, out, err = run(["critical-beta", "--b0", "0", "--n", "1"], capsys)
        assert code == 1 and out == ""
        assert "b0 must be positive" in err

    def test_bad_number_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["critical-beta", "--kappa", "one"])
        assert exc.value.code == 1


class TestSweep:
    def test_limit(self, capsys):
        code, out, _ = run(["sweep", "--kappa-list", "1", "--b0-list", "1", "--n-max", "20"], capsys)
        rows = table(out)[1:]
        assert code == 0 and len(rows) == 20
        assert abs(float(rows[-1][3]) - math.sqrt(3)) <= 1e-6
        assert float(rows[-1][4]) == pytest.approx(math.sqrt(3))

    def test_first_row_matches_critical_beta(self, capsys):
        _, out, _ = run(["sweep", "--kappa-list", "1.5", "--b0-list", "0.7", "--n-max", "1"], capsys)
        _, single, _ = run(["critical-beta", "--kappa", "1.5", "--b0", "0.7", "--n", "1"], capsys)
        assert table(out)[1][3] == keyed(single)["beta_star_crit"]

    def test_groups(self, capsys):
        _, out, _ = run(["sweep", "--kappa-list", "1,2", "--b0-list", "1,2", "--n-max", "30"], capsys)
        rows = table(out)[1:]
        groups = {(float(r[0]), float(r[1])) for r in rows}
        assert groups == {(1, 1), (1, 2), (2, 1), (2, 2)}
        for kappa, b0 in groups:
            last = [r for r in rows if (float(r[0]), float(r[1])) == (kappa, b0)][-1]
            assert float(last[3]) == pytest.approx(b0 * math.sqrt(1 + 2 * kappa / b0), abs=1e-9)

    def test_default_grid(self, capsys):
        _, out, _ = run(["sweep", "--n-max", "2"], capsys)
        assert len(table(out)) == 1 + 9 * 2

    @pytest.mark.parametrize("argv", [["--kappa-list", ""], ["--b0-list", ","], ["--n-max", "0"]])
    def test_invalid(self, argv, capsys):
        code, _, _ = run(["sweep"] + argv, capsys)
        assert code == 1


class TestOutput:
    def test_header_round_trip(self, capsys):
        _, out, _ = run(["moments", "--n", "2", "--beta", "1.5", "--T", "4"], capsys)
        config = RunConfig.from_lines(out.splitlines())
        assert config == RunConfig("moments", {
            "kappa": 1.0, "b0": 1.0, "n": 2, "beta": 1.5, "offspring": [[0, 1.0], [2, 2.5]],
            "x0": 0, "T": 4.0, "dt": 0.01, "L": 2 + 4 + 50, "sample_dt": 1.0, "t_min": None,
        })

    def test_header_reproduces_run(self, capsys):
        _, first, _ = run(["spectrum", "--kappa", "0.8", "--n", "3", "--beta", "1.7"], capsys)
        opts = RunConfig.from_lines(first.splitlines()).options
        law = ",".join(f"{k}:{b!r}" for k, b in opts["offspring"])
        argv = ["spectrum", "--kappa", repr(opts["kappa"]), "--b0", repr(opts["b0"]), "--n", str(opts["n"]),
                "--offspring", law, "--tol", repr(opts["tol"])]
        _, second, _ = run(argv, capsys)
        assert second == first

    def test_missing_header(self):
        with pytest.raises(ValueError):
            RunConfig.from_lines(["a\tb"])

    def test_byte_identical_files(self, tmp_path, capsys):
        paths = [tmp_path / "a.tsv", tmp_path / "b.tsv"]
        for p in paths:
            assert main(["-o", str(p), "simulate", "--replicas", "20", "--T", "3", "--seed", "5"]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_text().startswith("# brwcrit simulate\n# config: ")

    def test_output_directory_from_environment(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "runs"))
        assert main(["critical-beta"]) == 0
        assert capsys.readouterr().out == ""
        assert (tmp_path / "runs" / "critical-beta.tsv").exists()

    def test_trajectory_columns(self, capsys):
        _, out, _ = run(["simulate", "--replicas", "3", "--T", "2"], capsys)
        rows = table(out)
        assert rows[0] == ["replica_id", "t", "total", "occupied_sites"]
        assert len(rows) == 1 + 3 * 3


class TestCommands:
    def test_eigenfunction(self, capsys):
        code, out, _ = run(["eigenfunction", "--beta", "1", "--radius", "4"], capsys)
        rows = table(out)[1:]
        assert code == 0 and len(rows) == 9
        values = {int(r[0]): float(r[1]) for r in rows}
        assert values[0] == pytest.approx(1.0)
        assert values[4] / values[3] == pytest.approx(0.5, abs=1e-12)

    def test_eigenfunction_needs_supercritical(self, capsys):
        code, _, err = run(["eigenfunction", "--beta", "0.5"], capsys)
        assert code == 1 and "supercritical" in err

    def test_spectrum_with_window_check(self, capsys):
        _, out, _ = run(["spectrum", "--beta", "2", "--check-L", "200"], capsys)
        assert float(keyed(out)["abs_difference"]) <= 1e-8

    def test_spectrum_subcritical(self, capsys):
        _, out, _ = run(["spectrum", "--beta", "0.5"], capsys)
        assert keyed(out)["lambda"] == "nan"

    def test_moments_reports_growth(self, capsys):
        _, out, _ = run(["moments", "--beta", "1", "--T", "40", "--t-min", "20"], capsys)
        line = [l for l in out.splitlines() if l.startswith("# growth_rate=")][0]
        assert float(line.split()[1].split("=")[1]) == pytest.approx(0.25, abs=1e-3)

    def test_offspring_law_flag(self, capsys):
        _, out, _ = run(["spectrum", "--offspring", "0:1,3:0.75"], capsys)
        assert float(keyed(out)["beta"]) == pytest.approx(0.5)

    def test_bad_offspring_law(self, capsys):
        code, _, _ = run(["spectrum", "--offspring", "0:1"], capsys)
        assert code == 1
        with pytest.raises(SystemExit) as exc:
            main(["spectrum", "--offspring", "2-1"])
        assert exc.value.code == 1


class TestVerify:
    def test_analytic_suite_fast(self, capsys):
        start = time.perf_counter()
        code, out, _ = run(["verify", "--suite", "analytic"], capsys)
        assert time.perf_counter() - start < 10
        assert code == 0
        assert [r[1] for r in table(out)[1:]] == ["pass"] * 3

    def test_stochastic_reproducible(self, capsys):
        argv = ["verify", "--suite", "stochastic", "--seed", "42", "--replicas", "500"]
        first = run(argv, capsys)
        assert run(argv, capsys) == first

    def test_failure_exit_and_report(self, monkeypatch, capsys):
        bad = CheckResult("quadrature_identity", False, 3, 1e-3, {"n": 4, "a": 2.0, "b": 1.0})
        monkeypatch.setattr(cli, "run_suite", lambda *a: [bad])
        code, out, err = run(["verify", "--suite", "all"], capsys)
        assert code == 3
        assert "first failure: n=4, a=2.0, b=1.0" in err

    def test_numerical_failure_exit(self, monkeypatch, capsys):
        def boom(args):
            raise NumericalFailure("no convergence")
        monkeypatch.setitem(cli.HANDLERS, "spectrum", boom)
        assert run(["spectrum"], capsys)[0] == 2

    def test_contradiction_exit(self, monkeypatch, capsys):
        def boom(args):
            raise InternalContradictionError("two roots")
        monkeypatch.setitem(cli.HANDLERS, "spectrum", boom)
        assert run(["spectrum"], capsys)[0] == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "brwcrit.cli", "critical-beta", "--n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "beta_crit\t0.6666666666666666" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "brwcrit.cli"], capture_output=True, text=True)
    assert proc.returncode == 1
