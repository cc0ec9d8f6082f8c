import json
import subprocess
import sys
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from psmod1 import parse_real
from psmod1.cli import cli_dispatch
from psmod1.search import hp_dist, run_search


def run_cli(args, capsys):
    code = cli_dispatch(args)
    out = capsys.readouterr().out
    return code, out


def load_schema():
    ref = resources.files("psmod1") / "schemas" / "report.schema.json"
    return json.loads(ref.read_text())


class TestReports:
    def test_params_report(self, capsys):
        code, out = run_cli(["params", "--q", "100", "--gamma", "0.95"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["results"]["H"] == 10
        assert rep["config"]["gamma"] == "0.95"
        jsonschema.validate(rep, load_schema())

    def test_runtime_omitted_by_default(self, capsys):
        _, out = run_cli(["params", "--q", "100", "--gamma", "0.95"], capsys)
        assert json.loads(out)["runtime_seconds"] is None

    def test_runtime_included_with_timings(self, capsys):
        _, out = run_cli(["params", "--q", "100", "--gamma", "0.95",
                          "--timings"], capsys)
        assert json.loads(out)["runtime_seconds"] > 0

    @pytest.mark.parametrize("argv", [
        ["convergents", "--alpha", "golden", "--q-max", "5"],
        ["ps-count", "--X", "2000", "--gamma", "0.95"],
        ["expsum", "--alpha", "sqrt:2", "--X", "2000"],
        ["theta", "--N1", "500", "--N2", "1000", "--alpha", "sqrt:2",
         "--gamma", "0.95"],
        ["vaughan", "--N1", "400", "--N2", "800", "--v", "4",
         "--alpha", "sqrt:2", "--gamma", "0.95"],
        ["lemma-check", "weyl", "--trials", "20"],
        ["lemma-check", "vdc", "--trials", "10"],
        ["lemma-check", "psi", "--trials", "50"],
        ["lemma-check", "fdelta", "--trials", "50"],
        ["lemma-check", "minsum"],
        ["gamma", "--mode", "desk", "--N", "20000", "--gamma", "0.95",
         "--alpha", "sqrt:2", "--delta", "0.05"],
        ["search", "--alpha", "sqrt:2", "--gamma", "0.95",
         "--N-max", "2000"],
    ])
    def test_all_commands_emit_schema_valid_json(self, capsys, argv):
        code, out = run_cli(argv, capsys)
        assert code == 0
        jsonschema.validate(json.loads(out), load_schema())

    def test_gamma_ladder_with_plot_data(self, capsys, tmp_path):
        plot = tmp_path / "trend.csv"
        code, out = run_cli(
            ["gamma", "--mode", "desk", "--ladder", "10000,30000",
             "--gamma", "0.95", "--alpha", "sqrt:2", "--delta", "0.05",
             "--emit-plot-data", str(plot)], capsys)
        assert code == 0
        rep = json.loads(out)
        assert len(rep["results"]["ladder"]) == 2
        assert "trend_nonincreasing" in rep["results"]["audit"]
        lines = plot.read_text().strip().splitlines()
        assert lines[0] == "N,discrepancy_ratio"
        assert len(lines) == 3

    def test_lemma_check_weyl_full_spec_example(self, capsys):
        _, out = run_cli(["lemma-check", "weyl", "--trials", "1000",
                          "--seed", "7"], capsys)
        rep = json.loads(out)
        assert rep["results"]["holds"] == 1000
        assert rep["results"]["violations"] == 0

    def test_convergents_results(self, capsys):
        _, out = run_cli(["convergents", "--alpha", "golden", "--q-max", "5"],
                         capsys)
        rep = json.loads(out)
        assert rep["results"]["convergents"] == [[2, 1], [3, 2], [5, 3], [8, 5]]

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        code, out = run_cli(["params", "--q", "100", "--gamma", "0.95",
                             "--output", str(path)], capsys)
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["results"]["H"] == 10


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["lemma-check", "weyl", "--trials", "50", "--seed", "7"],
        ["gamma", "--mode", "desk", "--N", "20000", "--gamma", "0.95",
         "--alpha", "sqrt:2", "--delta", "0.05"],
        ["search", "--alpha", "sqrt:2", "--gamma", "0.95", "--N-max", "3000"],
        ["theta", "--N1", "500", "--N2", "1000", "--alpha", "sqrt:2",
         "--gamma", "0.95"],
    ])
    def test_byte_identical_reruns(self, capsys, argv):
        _, a = run_cli(argv, capsys)
        _, b = run_cli(argv, capsys)
        assert a == b and a

    def test_worker_count_does_not_change_bytes(self, capsys):
        base = ["gamma", "--mode", "desk", "--N", "30000", "--gamma", "0.95",
                "--alpha", "sqrt:2", "--delta", "0.05", "--segment-bits", "13"]
        _, one = run_cli(base + ["--workers", "1"], capsys)
        _, two = run_cli(base + ["--workers", "2"], capsys)
        a, b = json.loads(one), json.loads(two)
        assert a["results"]["Gamma"] == b["results"]["Gamma"]
        assert a["results"]["Gamma2"] == b["results"]["Gamma2"]


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli_dispatch(["params", "--q", "10", "--gamma", "0.95",
                             "--bogus"]) == 2

    def test_bad_gamma_spec(self, capsys):
        assert cli_dispatch(["params", "--q", "10", "--gamma", "nope"]) == 2

    def test_gamma_out_of_range(self, capsys):
        assert cli_dispatch(["params", "--q", "10", "--gamma", "0.5"]) == 2

    def test_schedule_window_too_wide(self, capsys):
        # schedule-mode Delta exceeds 1/4 at any feasible q
        assert cli_dispatch(["gamma", "--mode", "schedule", "--q", "100",
                             "--gamma", "0.95", "--alpha", "sqrt:2"]) == 2

    def test_desk_needs_n(self, capsys):
        assert cli_dispatch(["gamma", "--mode", "desk", "--gamma", "0.95",
                             "--alpha", "sqrt:2", "--delta", "0.05"]) == 2

    def test_csv_unsupported_elsewhere(self, capsys):
        assert cli_dispatch(["params", "--q", "10", "--gamma", "0.95",
                             "--format", "csv"]) == 2

    def test_entry_point_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "psmod1.cli", "params", "--q", "100",
             "--gamma", "0.95"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["results"]["H"] == 10

    def test_precision_failure_is_exit_3(self, capsys, monkeypatch):
        from psmod1.errors import PrecisionExhausted
        import psmod1.cli as cli_mod

        def boom(args):
            raise PrecisionExhausted("boundary unresolved")

        monkeypatch.setitem(cli_mod._COMMANDS, "params", boom)
        assert cli_dispatch(["params", "--q", "10", "--gamma", "0.95"]) == 3


class TestSearch:
    def test_records_strictly_decreasing(self, capsys):
        _, out = run_cli(["search", "--alpha", "sqrt:2", "--gamma", "0.95",
                          "--N-max", "20000", "--delta", "0.05"], capsys)
        rep = json.loads(out)
        scores = [r["score"] for r in rep["results"]["records"]]
        assert scores == sorted(scores, reverse=True)
        assert all(a > b for a, b in zip(scores, scores[1:]))
        assert rep["results"]["summary"]["verified"]

    def test_csv_format(self, capsys):
        _, out = run_cli(["search", "--alpha", "sqrt:2", "--gamma", "0.95",
                          "--N-max", "5000", "--format", "csv"], capsys)
        lines = out.strip().splitlines()
        assert lines[0] == "p,n,dist,score,is_record"
        first = lines[1].split(",")
        assert first[0] == "2" and first[4] == "1"

    def test_emit_plot_data(self, capsys, tmp_path):
        path = tmp_path / "plot.csv"
        run_cli(["search", "--alpha", "sqrt:2", "--gamma", "0.95",
                 "--N-max", "5000", "--emit-plot-data", str(path)], capsys)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "p,score"
        assert len(lines) > 2

    def test_rational_alpha_degenerate_flag(self, capsys):
        _, out = run_cli(["search", "--alpha", "1/3", "--gamma", "0.95",
                          "--N-max", "5000"], capsys)
        rep = json.loads(out)
        assert rep["results"]["summary"]["degenerate_rational_alpha"]
        # ||p/3|| takes at most two distinct nonzero values
        dists = {round(r["dist"], 25) for r in rep["results"]["records"]}
        assert len(dists) <= 3

    def test_constructed_exact_hit(self, sqrt2):
        # beta = -alpha * p0 for a known PS prime p0 -> terminal record
        g = Fraction(19, 20)
        p0 = 11  # 11^0.95 ~ 9.76 <= 10 < 12^0.95 ~ 10.60
        beta = sqrt2.mul_int(p0).neg()
        result = run_search(sqrt2, beta, g, 2000)
        last = result.records[-1]
        assert last.p == p0
        assert last.dist < 1e-40
        assert last.score < 1e-40

    def test_high_precision_reverification(self):
        # the independent MPFR route agrees with the fixed-point route
        alpha = parse_real("sqrt:2")
        for p in (2, 97, 99991):
            fp = alpha.mul_int(p).dist_nearest_int()
            hp = hp_dist("sqrt:2", "0", p)
            assert abs(fp - hp) < 2.0 ** -100

    def test_million_scale_stream(self):
        g = Fraction(19, 20)
        result = run_search(parse_real("sqrt:2"), parse_real("0"), g,
                            10 ** 6, delta=0.05,
                            verify_specs=("sqrt:2", "0"))
        s = result.summary
        assert s["ps_prime_count"] > 30000
        assert s["record_count"] >= 5
        assert s["min_dist"] < 0.01
        # hit share tracks the window mass 2*delta
        share = s["hits_within_delta"] / s["ps_prime_count"]
        assert abs(share - 0.1) < 0.02

    def test_out_of_theorem_range_tag(self, capsys):
        _, out = run_cli(["ps-count", "--X", "2000", "--gamma", "0.9"], capsys)
        assert json.loads(out)["results"]["out_of_theorem_range"]
        _, out = run_cli(["search", "--alpha", "sqrt:2", "--gamma", "0.9",
                          "--N-max", "2000"], capsys)
        assert json.loads(out)["results"]["summary"]["out_of_theorem_range"]
