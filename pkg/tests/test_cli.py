import csv
import json

import pytest

from nehari_critical import cli
from nehari_critical.config import parse_config

SINGLE = """
[domain]
radius = 1.0
[grid]
n = 512
[system]
lambdas = [-7]
beta = [[1]]
groups = [0, 1]
[solver]
restarts = 3
"""

COMPETITIVE = """
[grid]
n = 512
[system]
lambdas = [-7, -7]
beta = [[1, -1], [-1, 1]]
groups = [0, 1, 2]
[solver]
restarts = 2
[sweep]
mixed = false
"""

LIMIT = """
[system]
lambdas = [-7, -7, -7]
beta = [[1, 3, -0.5], [3, 1, -0.5], [-0.5, -0.5, 1]]
groups = [0, 2, 3]
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def load(out):
    with open(out / "report.json") as fh:
        return json.load(fh)


def strip_timings(path):
    data = json.loads(path.read_text())
    data.pop("timings")
    return json.dumps(data, sort_keys=True)


class TestCommands:
    def test_solve(self, tmp_path):
        out = tmp_path / "solve"
        assert cli.main(["solve", "--config", write(tmp_path, SINGLE), "--out", str(out)]) == 0
        rep = load(out)
        assert rep["schema_version"] == 1 and rep["command"] == "solve"
        assert 0 < rep["results"]["minimizer"]["level"] < 26.319
        with open(out / "profiles.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["r", "u1"] and len(rows) == 513
        assert float(rows[-1][1]) == 0.0

    def test_limit_levels(self, tmp_path):
        out = tmp_path / "lim"
        assert cli.main(["limit-levels", "--config", write(tmp_path, LIMIT), "--out", str(out)]) == 0
        res = load(out)["results"]
        assert res["l_total"] == pytest.approx(39.478, abs=1e-3)
        assert res["marker"] == "not_attained" and res["attained"] is False

    def test_thresholds(self, tmp_path):
        out = tmp_path / "th"
        assert cli.main(["thresholds", "--config", write(tmp_path, COMPETITIVE), "--out", str(out)]) == 0
        th = load(out)["results"]["thresholds"]
        assert th["Lambda"] == min(th["Lambda3"], th["Lambda4"])
        assert th["Lambda3"] == min(th["Lambda1"], th["Lambda2"])

    def test_fmax(self, tmp_path):
        out = tmp_path / "fm"
        assert cli.main(["fmax", "--config", write(tmp_path, LIMIT), "--out", str(out)]) == 0
        groups = load(out)["results"]["groups"]
        assert groups[0]["f_max"] == pytest.approx(2.0) and groups[1]["f_max"] == pytest.approx(1.0)

    def test_verify_writes_sweep(self, tmp_path):
        out = tmp_path / "ver"
        assert cli.main(["verify", "--config", write(tmp_path, COMPETITIVE), "--out", str(out)]) == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0])[:4] == ["eps", "upper_bound", "target", "satisfied"]
        assert any(r["satisfied"] == "true" for r in rows)
        assert load(out)["results"]["verification"]["eps_star"] is not None

    def test_competitor(self, tmp_path):
        out = tmp_path / "comp"
        assert cli.main(["competitor", "--config", write(tmp_path, COMPETITIVE), "--out", str(out)]) == 0
        assert load(out)["results"]["any_satisfied"]
        assert (out / "sweep.csv").exists()

    def test_classify(self, tmp_path):
        text = SINGLE.replace("lambdas = [-7]", "lambdas = [-7, -7]").replace(
            "beta = [[1]]", "beta = [[1, 2], [2, 1]]").replace("groups = [0, 1]", "groups = [0, 2]")
        out = tmp_path / "cls"
        assert cli.main(["classify", "--config", write(tmp_path, text), "--out", str(out)]) == 0
        rep = load(out)["results"]["classification"][0]
        assert rep["direction"] == pytest.approx([2**-0.5, 2**-0.5], abs=1e-2)


class TestExitCodes:
    def test_hypothesis_failure(self, tmp_path):
        out = tmp_path / "bad"
        assert cli.main(["limit-levels", "--config", write(tmp_path, SINGLE), "--out", str(out)]) == 2
        assert load(out)["error"]["type"] == "HypothesisViolated"

    def test_numerical_failure(self, tmp_path):
        text = SINGLE + "max_iter = 2\n"
        out = tmp_path / "nc"
        assert cli.main(["solve", "--config", write(tmp_path, text), "--out", str(out)]) == 3
        rep = load(out)
        assert rep["error"]["type"] == "NotConverged" and rep["partial"]["iterations"] == 2

    def test_config_error(self, tmp_path, capsys):
        assert cli.main(["solve", "--config", write(tmp_path, SINGLE + "bogus = 1\n")]) == 1
        assert "line" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert cli.main(["solve", "--config", str(tmp_path / "nope.cfg")]) == 1

    def test_unknown_command(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli.main(["explode", "--config", write(tmp_path, SINGLE)])
        assert info.value.code == 2


class TestReports:
    def test_config_echo_round_trip(self, tmp_path):
        out = tmp_path / "echo"
        cli.main(["limit-levels", "--config", write(tmp_path, LIMIT), "--out", str(out)])
        rep = load(out)
        assert parse_config(rep["config_text"]) == parse_config(LIMIT)

    def test_seed_override(self, tmp_path):
        out = tmp_path / "seed"
        cli.main(["solve", "--config", write(tmp_path, SINGLE), "--out", str(out), "--seed", "9"])
        rep = load(out)
        assert rep["seed"] == 9 and rep["config"]["solver"]["seed"] == 9
        assert rep["provenance"]["solver.seed"] == "override"

    @pytest.mark.parametrize("command, text", [("solve", SINGLE), ("verify", COMPETITIVE)])
    def test_byte_identical_reruns(self, tmp_path, command, text):
        cfg = write(tmp_path, text)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main([command, "--config", cfg, "--out", str(a), "--seed", "3"]) == 0
        assert cli.main([command, "--config", cfg, "--out", str(b), "--seed", "3"]) == 0
        assert strip_timings(a / "report.json") == strip_timings(b / "report.json")
