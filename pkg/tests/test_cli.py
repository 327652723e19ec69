import json

import pytest

from apfrrt.cli import EXIT_CONFIG, EXIT_IO, EXIT_NO_SOLUTION, EXIT_OK, main
from tests.test_scenario import BASIC, with_line


@pytest.fixture
def scn(tmp_path):
    p = tmp_path / "basic.scn"
    p.write_text(BASIC)
    return str(p)


def read_all(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


class TestPlan:
    def test_writes_record(self, scn, tmp_path):
        out = tmp_path / "run"
        rc = main(["plan", "--scenario", scn, "--profile", "biased", "--seed", "3", "--out", str(out)])
        assert rc == EXIT_OK
        rec = json.loads((out / "record.json").read_text())
        assert rec["profile"] == "biased" and rec["scenario"] == "basic"
        assert rec["solved"] and rec["params"]["rng_seed"] == 3
        assert rec["params"]["potential"]["beta"] == 1.5

    def test_stdout_and_svg(self, scn, tmp_path, capsys):
        svg = tmp_path / "p.svg"
        assert main(["plan", "--scenario", scn, "--svg", str(svg), "--layers", "world,tree,path,quiver"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["profile"] == "plain"
        assert svg.read_text().startswith("<svg")

    def test_no_solution(self, scn):
        assert main(["plan", "--scenario", scn, "--iterations", "3"]) == EXIT_NO_SOLUTION

    def test_config_errors(self, scn, tmp_path):
        assert main(["plan", "--scenario", scn, "--profile", "missing"]) == EXIT_CONFIG
        bad = tmp_path / "bad.scn"
        bad.write_text(with_line(BASIC, "neighbor_radius = 1.5", "neighbor_radius = 9"))
        assert main(["plan", "--scenario", str(bad)]) == EXIT_CONFIG
        assert main(["render", "--scenario", scn]) == EXIT_CONFIG
        assert main(["plan", "--scenario", scn, "--width", "50", "--svg", str(tmp_path / "x.svg")]) == EXIT_CONFIG

    def test_io_error(self, tmp_path):
        assert main(["plan", "--scenario", str(tmp_path / "nope.scn")]) == EXIT_IO

    def test_render(self, scn, tmp_path):
        svg = tmp_path / "r.svg"
        assert main(["render", "--scenario", scn, "--svg", str(svg), "--layers", "world,path"]) == EXIT_OK
        text = svg.read_text()
        assert 'class="path"' in text and 'class="tree"' not in text


class TestBench:
    def test_outputs_and_determinism(self, scn, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["bench", "--scenario", scn, "--out", str(a)]) == EXIT_OK
        assert main(["bench", "--scenario", scn, "--out", str(b), "--workers", "2"]) == EXIT_OK
        fa = read_all(a)
        assert set(fa) == {"records.jsonl", "table.txt", "table.json", "ttests.txt", "experiment.json"}
        assert fa == read_all(b)
        recs = [json.loads(x) for x in fa["records.jsonl"].decode().splitlines()]
        assert len(recs) == 12
        assert [r["params"]["rng_seed"] for r in recs if r["profile"] == "sampled"] == [11, 12, 13, 14]
        assert sum("tree_violations" in r for r in recs) == 2
        assert all(r.get("tree_violations", 0) == 0 for r in recs)
        assert b"biased vs plain @ 800" in fa["ttests.txt"]

    def test_trial_and_profile_overrides(self, scn, tmp_path):
        out = tmp_path / "o"
        assert main(["bench", "--scenario", scn, "--out", str(out), "--trials", "2", "--profiles", "plain"]) == EXIT_OK
        meta = json.loads((out / "experiment.json").read_text())
        assert meta["trials"] == 2 and meta["profiles"] == ["plain"]
        assert main(["bench", "--scenario", scn, "--out", str(out), "--trials", "1"]) == EXIT_CONFIG
        assert main(["bench", "--scenario", scn, "--out", str(out), "--profiles", "zzz"]) == EXIT_CONFIG


def test_validate_scenario(scn, capsys):
    assert main(["validate-scenario", "--scenario", scn, "--smoke", "20"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "basic: point2d, 2 obstacles" in out and "sampled: 20 iterations" in out
