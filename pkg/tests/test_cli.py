import json

import numpy as np
import pytest

from plcap import checks
from plcap.cli import main
from plcap.geometry_io import load_graph


def run(tmp_path, *args, out_name=None):
    out = tmp_path / (out_name or "out.txt")
    code = main(list(args) + ["--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


class TestCap:
    def test_path_value(self, tmp_path):
        code, text = run(tmp_path, "cap", "--gen", "path:3", "--p", "2", "--a", "0", "--b", "2")
        assert code == 0
        payload = json.loads(text)
        assert payload["value"] == 0.5
        assert payload["mode"] == "linear-p2"
        assert set(payload) == {"value", "iterations", "kkt_residual", "mode"}

    def test_requires_sets(self, tmp_path, capsys):
        assert main(["cap", "--gen", "path:3", "--p", "2"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_graph_file_source(self, tmp_path):
        code, _ = run(tmp_path, "gen", "--gen", "cycle:4", out_name="g.json")
        assert code == 0
        code, text = run(
            tmp_path, "cap", "--graph", str(tmp_path / "g.json"), "--p", "2", "--a", "0", "--b", "2"
        )
        assert code == 0
        assert json.loads(text)["value"] == pytest.approx(1.0)

    def test_both_sources_rejected(self, tmp_path, capsys):
        assert main(["cap", "--gen", "path:3", "--graph", "x.json", "--p", "2"]) == 1


class TestGen:
    def test_output_loads_back(self, tmp_path):
        code, _ = run(tmp_path, "gen", "--gen", "grid2d:3x3", out_name="g.json")
        assert code == 0
        g = load_graph(tmp_path / "g.json")
        assert g.n == 9 and len(g.boundary) == 8

    def test_random_needs_seed(self, tmp_path, capsys):
        assert main(["gen", "--gen", "random_gnp:6,0.5"]) == 1
        assert "seed" in capsys.readouterr().err

    def test_unknown_family_exit_1(self, tmp_path, capsys):
        assert main(["gen", "--gen", "moebius:3"]) == 1


class TestEig:
    def test_neumann_path(self, tmp_path):
        code, text = run(tmp_path, "eig", "--gen", "path:3", "--p", "2", "--mode", "neumann")
        assert code == 0
        payload = json.loads(text)
        assert payload["value"] == pytest.approx(1.0)
        assert payload["certified"] == "exact"
        assert payload["residual"] < 1e-10

    def test_descent_needs_seed(self, tmp_path, capsys):
        assert main(["eig", "--gen", "path:3", "--p", "3", "--mode", "neumann"]) == 1
        assert "seed" in capsys.readouterr().err


class TestIsocap:
    def test_exact_path(self, tmp_path):
        code, text = run(tmp_path, "isocap", "--gen", "path:3", "--p", "2", "--mode", "neumann")
        assert code == 0
        payload = json.loads(text)
        assert payload["value"] == pytest.approx(0.5)
        assert payload["cert_a"] == [0] and payload["cert_b"] == [2]
        assert payload["mode"] == "exact-enumeration"

    def test_budget_exceeded_exit_1(self, tmp_path, capsys):
        code = main(["isocap", "--gen", "complete:9", "--p", "2", "--mode", "neumann",
                     "--budget", "10"])
        assert code == 1
        assert "heuristic" in capsys.readouterr().err

    def test_heuristic_mode(self, tmp_path):
        code, text = run(tmp_path, "isocap", "--gen", "path:3", "--p", "2", "--mode", "neumann",
                         "--heuristic")
        assert code == 0
        payload = json.loads(text)
        assert payload["mode"] == "level-set-heuristic"
        assert payload["value"] == pytest.approx(0.5)


class TestVerify:
    def test_single_edge_tight_upper(self, tmp_path):
        code, text = run(tmp_path, "verify", "--gen", "edge", "--p", "2", "--alpha", "1",
                         "--mode", "steklov")
        assert code == 0
        payload = json.loads(text)
        assert payload["slack_upper"] == 0.0
        assert payload["lower_ok"] == "certified" and payload["upper_ok"] == "certified"

    def test_violation_exits_2_with_dump(self, tmp_path, monkeypatch):
        report = checks.BoundCheckReport(
            p=2.0, alpha=1.0, mode="steklov", gamma=1.0, gamma_mode="exact-enumeration",
            middle=5.0, middle_cert="exact", lower_const=0.125, upper_const=2.0,
            lower_ok="certified", upper_ok="violated", slack_lower=4.875, slack_upper=-3.0,
        )
        monkeypatch.setattr(checks, "two_sided_bound_check", lambda *a, **k: report)
        out = tmp_path / "rep.json"
        code = main(["verify", "--gen", "edge", "--p", "2", "--mode", "steklov",
                     "--out", str(out)])
        assert code == 2
        payload = json.loads(out.read_text())
        assert payload["upper_ok"] == "violated"
        assert payload["instance"]["n"] == 2
        dump = tmp_path / "rep.json.violation.json"
        assert dump.exists()
        assert json.loads(dump.read_text()) == payload


class TestSweep:
    def test_csv_rows_and_determinism(self, tmp_path):
        args = ["sweep", "--gen", "cycle:4", "--p", "2,3", "--alpha", "1",
                "--mode", "neumann", "--seed", "1"]
        code, text1 = run(tmp_path, *args, out_name="a.csv")
        assert code == 0
        code, text2 = run(tmp_path, *args, out_name="b.csv")
        assert text1 == text2
        lines = text1.strip().split("\n")
        assert lines[0].startswith("p,alpha,mode,gamma,gamma_mode,middle,middle_cert")
        assert len(lines) == 3
        assert "violated" not in text1

    def test_json_format(self, tmp_path):
        code, text = run(tmp_path, "sweep", "--gen", "edge", "--p", "2", "--alpha", "1",
                         "--mode", "steklov", "--format", "json")
        assert code == 0
        rows = json.loads(text)
        assert rows[0]["upper_ok"] == "certified"

    def test_seed_required_for_nonquadratic(self, tmp_path, capsys):
        code = main(["sweep", "--gen", "edge", "--p", "3", "--alpha", "1", "--mode", "steklov"])
        assert code == 1
        assert "seed" in capsys.readouterr().err

    def test_error_cells_recorded(self, tmp_path):
        # steklov sweep on a graph without boundary: rows carry the error
        code, _ = run(tmp_path, "gen", "--gen", "path:4", out_name="g.json")
        data = json.loads((tmp_path / "g.json").read_text())
        data["boundary"] = []
        data["nu"] = {}
        (tmp_path / "nb.json").write_text(json.dumps(data))
        code, text = run(tmp_path, "sweep", "--graph", str(tmp_path / "nb.json"),
                         "--p", "2", "--alpha", "1", "--mode", "steklov")
        assert code == 0
        assert "error" in text


class TestLemma:
    def test_small_suite_runs(self, tmp_path):
        code, text = run(tmp_path, "lemma", "--seed", "3", "--grid", "200",
                         "--trials", "5", "--p", "1.5,2")
        assert code == 0
        payload = json.loads(text)
        assert payload["layer_cake"]["violations"] == 0
        assert payload["hardy"]["violations"] == 0
        assert payload["capacity_levels"]["violations"] == 0
        assert payload["capacity_levels"]["worst_ratio"] <= 1.0
        gaps = [row["gap"] for row in payload["interval_capacity"]]
        assert max(gaps) < 1e-3

    def test_needs_seed(self, capsys):
        assert main(["lemma"]) == 1


class TestUsage:
    def test_unknown_flag_exit_1(self, capsys):
        assert main(["cap", "--nonsense"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err

    def test_unknown_command_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_stdout_output(self, capsys):
        assert main(["cap", "--gen", "edge", "--p", "2", "--a", "0", "--b", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["value"] == 1.0
