import pytest

from apfrrt.environments import ArmEnv, PointEnv
from apfrrt.planner import NearestNodeBias, NoBias, SampleBias
from apfrrt.scenario import (
    ScenarioError,
    emit_scenario,
    load_shipped,
    parse_scenario,
    shipped_scenarios,
)

BASIC = """\
# a small test scenario
[scenario]
name = basic
kind = point2d

[world]
bounds = 0 0 50 50

[obstacle]
shape = rect
min = 20 0
max = 30 50
permeability = permeable
cost = 40

[obstacle]
shape = circle
center = 10 40
radius = 3
permeability = impermeable

[robot]
start = 5 25
goal = 45 25

[potential]
k_att = 50
d_obs_star = 5

[planner]
max_iterations = 800
delta = 2
neighbor_radius = 1.5

[profile plain]
strategy = none

[profile biased]
strategy = nearest_node_bias
beta = 1.5

[profile sampled]
strategy = sample_bias
step = 0.5
iters = 10
c_perm = 1

[experiment]
trials = 4
base_seed = 11
checkpoints = 400 800
comparisons = biased:plain
validate_trees = 2
"""


def with_line(text, old, new):
    assert old in text
    return text.replace(old, new, 1)


def line_of(text, needle):
    return next(i for i, ln in enumerate(text.splitlines(), start=1) if needle in ln)


class TestParse:
    def test_basic(self):
        s = parse_scenario(BASIC)
        assert s.name == "basic" and s.kind == "point2d"
        assert len(s.obstacles) == 2 and s.obstacles[1].impermeable
        assert [p.name for p in s.profiles] == ["plain", "biased", "sampled"]
        assert isinstance(s.environment(), PointEnv)
        assert isinstance(s.planner_params(s.profile("plain")).strategy, NoBias)
        pb = s.planner_params(s.profile("biased"), seed=4)
        assert isinstance(pb.strategy, NearestNodeBias) and pb.strategy.potential.beta == 1.5
        assert pb.rng_seed == 4 and pb.checkpoints == (400, 800) and pb.neighbor_radius == 1.5
        ps = s.planner_params(s.profile("sampled")).strategy
        assert isinstance(ps, SampleBias) and (ps.step, ps.iters) == (0.5, 10)

    def test_profile_c_perm_overrides_world(self):
        s = parse_scenario(BASIC)
        assert s.environment().world.obstacles[0].permeability.cost == 40
        assert s.environment(s.profile("sampled")).world.obstacles[0].permeability.cost == 1

    def test_experiment_spec(self):
        spec = parse_scenario(BASIC).experiment_spec()
        assert spec.trials == 4 and spec.seed(2) == 13 and spec.validate_trees == 2
        assert [p.label for p in spec.profiles] == ["plain", "biased", "sampled"]
        assert parse_scenario(BASIC).experiment_spec(trials=2, profiles=["biased"]).trials == 2

    def test_round_trip(self):
        s = parse_scenario(BASIC)
        text = emit_scenario(s)
        assert parse_scenario(text) == s
        assert emit_scenario(parse_scenario(text)) == text

    @pytest.mark.parametrize("name", shipped_scenarios())
    def test_shipped_scenarios_parse_and_round_trip(self, name):
        s = load_shipped(name)
        assert parse_scenario(emit_scenario(s)) == s
        assert s.experiment is not None and s.profiles

    def test_shipped_set(self):
        assert {"wall", "arm"} <= set(shipped_scenarios())
        assert isinstance(load_shipped("arm").environment(), ArmEnv)


class TestErrors:
    def check(self, text, needle, match):
        with pytest.raises(ScenarioError, match=match) as ei:
            parse_scenario(text)
        assert ei.value.line == line_of(text, needle)
        assert str(ei.value).startswith(f"line {ei.value.line}:")

    def test_radius_above_delta(self):
        text = with_line(BASIC, "neighbor_radius = 1.5", "neighbor_radius = 2.5")
        self.check(text, "neighbor_radius", "neighbor_radius")

    def test_unknown_key(self):
        text = with_line(BASIC, "k_att = 50", "k_attr = 50")
        self.check(text, "k_attr", "k_attr")

    def test_unknown_section(self):
        text = BASIC + "\n[extras]\nfoo = 1\n"
        self.check(text, "[extras]", "unknown section")

    def test_duplicate_key(self):
        text = with_line(BASIC, "delta = 2", "delta = 2\ndelta = 3")
        with pytest.raises(ScenarioError, match="duplicate") as ei:
            parse_scenario(text)
        assert ei.value.line == line_of(text, "delta = 3")

    def test_bad_value(self):
        self.check(with_line(BASIC, "cost = 40", "cost = lots"), "cost = lots", "cost")

    def test_non_positive_c_perm(self):
        self.check(with_line(BASIC, "c_perm = 1", "c_perm = 0"), "c_perm = 0", "c_perm")

    def test_sample_bias_keys_on_other_strategy(self):
        text = with_line(BASIC, "beta = 1.5", "beta = 1.5\nstep = 0.25")
        self.check(text, "step = 0.25", "sample_bias")

    def test_unknown_comparison_profile(self):
        self.check(with_line(BASIC, "biased:plain", "biased:nobody"), "comparisons", "nobody")

    def test_start_inside_impermeable(self):
        text = with_line(BASIC, "start = 5 25", "start = 10 40")
        self.check(text, "[robot]", "impermeable")

    def test_bad_checkpoints(self):
        self.check(with_line(BASIC, "checkpoints = 400 800", "checkpoints = 800 400"), "checkpoints", "checkpoints")
        self.check(with_line(BASIC, "checkpoints = 400 800", "checkpoints = 400 900"), "checkpoints", "checkpoints")
