"""Scenario files: a sectioned ``key = value`` text format.

Example::

    [scenario]
    name = wall
    kind = point2d

    [world]
    bounds = 0 0 100 100

    [obstacle]
    shape = rect
    min = 35 20
    max = 65 80
    permeability = permeable
    cost = 100

    [robot]
    start = 10 50
    goal = 90 50

    [profile apf_b1]
    strategy = nearest_node_bias
    beta = 1.0

``#`` starts a comment line. Keys are matched exactly; an unknown key, a
repeated key or a bad value is an error that names the offending line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from apfrrt.apf import PotentialParams
from apfrrt.bench import ExperimentSpec, Profile
from apfrrt.environments import ArmEnv, CSpaceEnvironment, PlanarArm, PointEnv
from apfrrt.geometry import IMPERMEABLE, Circle, ObstacleRegion, Permeable, Point2, Rect, World
from apfrrt.planner import NearestNodeBias, NoBias, PlannerParams, SampleBias

KINDS = ("point2d", "planar_arm")
STRATEGIES = ("none", "nearest_node_bias", "sample_bias")
POTENTIAL_KEYS = ("k_att", "k_rep_perm", "k_rep_imp", "d_obs_star", "beta", "d_obs_star_imp", "f_att_max")
PLANNER_KEYS = ("max_iterations", "delta", "neighbor_radius", "goal_radius", "edge_check_resolution")


class ScenarioError(ValueError):
    def __init__(self, line: Optional[int], message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class PlannerSettings:
    max_iterations: int = 5000
    delta: float = 3.0
    neighbor_radius: Optional[float] = None
    goal_radius: Optional[float] = None
    edge_check_resolution: Optional[float] = None


@dataclass(frozen=True)
class ProfileSpec:
    name: str
    strategy: str = "none"
    potential: tuple = ()  # (key, value) overrides of [potential]
    step: Optional[float] = None
    iters: Optional[int] = None
    c_perm: Optional[float] = None


@dataclass(frozen=True)
class ExperimentBlock:
    trials: int = 100
    base_seed: int = 0
    checkpoints: tuple = ()
    comparisons: tuple = ()  # ((a, b), ...)
    validate_trees: int = 0


@dataclass(frozen=True)
class ArmSpec:
    link_lengths: tuple
    base: tuple = (0.0, 0.0)
    joint_limits: Optional[tuple] = None
    samples_per_link: int = 8
    goal_pose: tuple = ()


@dataclass(frozen=True)
class ScenarioFile:
    name: str
    kind: str
    bounds: tuple
    obstacles: tuple
    start: tuple
    goal: tuple
    arm: Optional[ArmSpec] = None
    potential: PotentialParams = field(default_factory=PotentialParams)
    planner: PlannerSettings = field(default_factory=PlannerSettings)
    profiles: tuple = ()
    experiment: Optional[ExperimentBlock] = None

    def profile(self, name: str) -> ProfileSpec:
        for p in self.profiles:
            if p.name == name:
                return p
        raise KeyError(f"no profile {name!r}; have {[p.name for p in self.profiles]}")

    def world(self, c_perm: Optional[float] = None) -> World:
        xmin, ymin, xmax, ymax = self.bounds
        w = World(Rect(Point2(xmin, ymin), Point2(xmax, ymax)), self.obstacles)
        return w if c_perm is None else w.with_permeable_cost(c_perm)

    def environment(self, profile: Optional[ProfileSpec] = None) -> CSpaceEnvironment:
        world = self.world(None if profile is None else profile.c_perm)
        if self.kind == "point2d":
            return PointEnv(world, self.start, self.goal)
        a = self.arm
        arm = PlanarArm(a.link_lengths, Point2(*a.base), a.joint_limits, a.samples_per_link)
        return ArmEnv(arm, world, self.start, a.goal_pose, self.goal)

    def potential_for(self, profile: ProfileSpec) -> PotentialParams:
        return replace(self.potential, **dict(profile.potential))

    def planner_params(self, profile: ProfileSpec, seed: int = 0, checkpoints: tuple = ()) -> PlannerParams:
        if profile.strategy == "none":
            strategy = NoBias()
        elif profile.strategy == "nearest_node_bias":
            strategy = NearestNodeBias(self.potential_for(profile))
        else:
            strategy = SampleBias(self.potential_for(profile), profile.step, profile.iters)
        s = self.planner
        if not checkpoints and self.experiment is not None:
            checkpoints = self.experiment.checkpoints
        return PlannerParams(
            max_iterations=s.max_iterations,
            delta=s.delta,
            neighbor_radius=s.neighbor_radius,
            goal_radius=s.goal_radius,
            edge_check_resolution=s.edge_check_resolution,
            strategy=strategy,
            rng_seed=seed,
            checkpoints=tuple(checkpoints),
        )

    def experiment_spec(self, trials: Optional[int] = None, profiles: Optional[list] = None) -> ExperimentSpec:
        if self.experiment is None:
            raise ScenarioError(None, f"scenario {self.name!r} has no [experiment] section")
        e = self.experiment
        chosen = self.profiles if profiles is None else tuple(self.profile(n) for n in profiles)
        profs = tuple(Profile(p.name, self.environment(p), self.planner_params(p)) for p in chosen)
        return ExperimentSpec(self.name, profs, e.trials if trials is None else trials, e.base_seed, e.validate_trees)


# --- parsing ---------------------------------------------------------------


class _Section:
    def __init__(self, name: str, arg: Optional[str], line: int):
        self.name = name
        self.arg = arg
        self.line = line
        self.items: dict[str, tuple[str, int]] = {}
        self.used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.items

    def line_of(self, key: str) -> int:
        return self.items[key][1] if key in self.items else self.line

    def raw(self, key: str) -> tuple[str, int]:
        if key not in self.items:
            raise ScenarioError(self.line, f"[{self.name}] is missing required key {key!r}")
        self.used.add(key)
        return self.items[key]

    def get(self, key, conv, default=None):
        if key not in self.items:
            return default
        text, line = self.raw(key)
        try:
            return conv(text)
        except (ValueError, TypeError) as exc:
            raise ScenarioError(line, f"bad value for {key!r}: {exc}") from None

    def req(self, key, conv):
        self.raw(key)
        return self.get(key, conv)

    def check_keys(self, allowed) -> None:
        for key, (_, line) in self.items.items():
            if key not in allowed:
                raise ScenarioError(line, f"unknown key {key!r} in [{self.name}]")


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def _int(text: str) -> int:
    return int(text)


def _floats(n: Optional[int] = None):
    def conv(text: str) -> tuple:
        vals = tuple(_float(t) for t in text.split())
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} numbers, got {len(vals)}")
        if not vals:
            raise ValueError("expected numbers")
        return vals

    return conv


def _ints(text: str) -> tuple:
    return tuple(int(t) for t in text.split())


def _pairs(text: str) -> tuple:
    out = []
    for tok in text.split():
        a, sep, b = tok.partition(":")
        if not sep or not a or not b:
            raise ValueError(f"comparison {tok!r} must look like label_a:label_b")
        out.append((a, b))
    return tuple(out)


def _choice(options):
    def conv(text: str) -> str:
        if text not in options:
            raise ValueError(f"{text!r} not one of {', '.join(options)}")
        return text

    return conv


def _split_sections(text: str) -> list[_Section]:
    sections: list[_Section] = []
    current: Optional[_Section] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(lineno, f"malformed section header {line!r}")
            parts = line[1:-1].split()
            if not parts or len(parts) > 2:
                raise ScenarioError(lineno, f"malformed section header {line!r}")
            current = _Section(parts[0], parts[1] if len(parts) == 2 else None, lineno)
            sections.append(current)
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioError(lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise ScenarioError(lineno, "key outside of any section")
        if key in current.items:
            raise ScenarioError(lineno, f"duplicate key {key!r} in [{current.name}]")
        current.items[key] = (value, lineno)
    return sections


def _single(sections, name, required=True) -> Optional[_Section]:
    found = [s for s in sections if s.name == name]
    if len(found) > 1:
        raise ScenarioError(found[1].line, f"section [{name}] appears more than once")
    if not found:
        if required:
            raise ScenarioError(None, f"missing section [{name}]")
        return None
    if found[0].arg is not None:
        raise ScenarioError(found[0].line, f"section [{name}] takes no name")
    return found[0]


def _obstacle(sec: _Section) -> ObstacleRegion:
    sec.check_keys(("shape", "center", "radius", "min", "max", "permeability", "cost"))
    shape = sec.req("shape", _choice(("circle", "rect")))
    try:
        if shape == "circle":
            for k in ("min", "max"):
                if sec.has(k):
                    raise ScenarioError(sec.line_of(k), f"{k!r} does not apply to a circle")
            s = Circle(Point2(*sec.req("center", _floats(2))), sec.req("radius", _float))
        else:
            for k in ("center", "radius"):
                if sec.has(k):
                    raise ScenarioError(sec.line_of(k), f"{k!r} does not apply to a rect")
            s = Rect(Point2(*sec.req("min", _floats(2))), Point2(*sec.req("max", _floats(2))))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(sec.line, str(exc)) from None
    perm = sec.req("permeability", _choice(("permeable", "impermeable")))
    if perm == "impermeable":
        if sec.has("cost"):
            raise ScenarioError(sec.line_of("cost"), "impermeable obstacles take no cost")
        return ObstacleRegion(s, IMPERMEABLE)
    cost = sec.req("cost", _float)
    if not cost > 0:
        raise ScenarioError(sec.line_of("cost"), "permeable cost must be > 0")
    return ObstacleRegion(s, Permeable(cost))


def _potential(sec: Optional[_Section]) -> PotentialParams:
    if sec is None:
        return PotentialParams()
    sec.check_keys(POTENTIAL_KEYS)
    vals = {k: sec.get(k, _float) for k in POTENTIAL_KEYS if sec.has(k)}
    try:
        return PotentialParams(**vals)
    except ValueError as exc:
        raise ScenarioError(sec.line, str(exc)) from None


def _planner(sec: Optional[_Section]) -> PlannerSettings:
    if sec is None:
        return PlannerSettings()
    sec.check_keys(PLANNER_KEYS)
    s = PlannerSettings(
        max_iterations=sec.get("max_iterations", _int, 5000),
        delta=sec.get("delta", _float, 3.0),
        neighbor_radius=sec.get("neighbor_radius", _float),
        goal_radius=sec.get("goal_radius", _float),
        edge_check_resolution=sec.get("edge_check_resolution", _float),
    )
    if s.max_iterations < 1:
        raise ScenarioError(sec.line_of("max_iterations"), "max_iterations must be positive")
    if not s.delta > 0:
        raise ScenarioError(sec.line_of("delta"), "delta must be positive")
    if s.neighbor_radius is not None and not 0 < s.neighbor_radius <= s.delta:
        raise ScenarioError(
            sec.line_of("neighbor_radius"),
            f"neighbor_radius {s.neighbor_radius} must satisfy 0 < r <= delta ({s.delta})",
        )
    for k in ("goal_radius", "edge_check_resolution"):
        v = getattr(s, k)
        if v is not None and not v > 0:
            raise ScenarioError(sec.line_of(k), f"{k} must be positive")
    return s


def _profile(sec: _Section, base: PotentialParams) -> ProfileSpec:
    if not sec.arg:
        raise ScenarioError(sec.line, "profile sections need a name: [profile NAME]")
    allowed = ("strategy", "step", "iters", "c_perm") + POTENTIAL_KEYS
    sec.check_keys(allowed)
    strategy = sec.req("strategy", _choice(STRATEGIES))
    pot = tuple((k, sec.get(k, _float)) for k in sec.items if k in POTENTIAL_KEYS)
    if strategy == "none" and pot:
        raise ScenarioError(sec.line_of(pot[0][0]), "potential keys need a biased strategy")
    step = sec.get("step", _float)
    iters = sec.get("iters", _int)
    if strategy == "sample_bias":
        if step is None or iters is None:
            raise ScenarioError(sec.line, "sample_bias profiles need 'step' and 'iters'")
        if not step > 0:
            raise ScenarioError(sec.line_of("step"), "step must be positive")
        if iters < 0:
            raise ScenarioError(sec.line_of("iters"), "iters must be non-negative")
    else:
        for k in ("step", "iters"):
            if sec.has(k):
                raise ScenarioError(sec.line_of(k), f"{k!r} only applies to sample_bias profiles")
    c_perm = sec.get("c_perm", _float)
    if c_perm is not None and not c_perm > 0:
        raise ScenarioError(sec.line_of("c_perm"), "c_perm must be > 0")
    try:
        replace(base, **dict(pot))
    except ValueError as exc:
        raise ScenarioError(sec.line, str(exc)) from None
    return ProfileSpec(sec.arg, strategy, pot, step, iters, c_perm)


def _experiment(sec: Optional[_Section], planner: PlannerSettings, names: set) -> Optional[ExperimentBlock]:
    if sec is None:
        return None
    sec.check_keys(("trials", "base_seed", "checkpoints", "comparisons", "validate_trees"))
    e = ExperimentBlock(
        trials=sec.get("trials", _int, 100),
        base_seed=sec.get("base_seed", _int, 0),
        checkpoints=sec.get("checkpoints", _ints, (planner.max_iterations,)),
        comparisons=sec.get("comparisons", _pairs, ()),
        validate_trees=sec.get("validate_trees", _int, 0),
    )
    if e.trials < 2:
        raise ScenarioError(sec.line_of("trials"), "trials must be at least 2")
    cps = e.checkpoints
    if not cps or list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > planner.max_iterations:
        raise ScenarioError(sec.line_of("checkpoints"), "checkpoints must increase and stay within max_iterations")
    for a, b in e.comparisons:
        for lab in (a, b):
            if lab not in names:
                raise ScenarioError(sec.line_of("comparisons"), f"comparison names unknown profile {lab!r}")
    if e.validate_trees < 0:
        raise ScenarioError(sec.line_of("validate_trees"), "validate_trees must be non-negative")
    return e


def parse_scenario(text: str) -> ScenarioFile:
    sections = _split_sections(text)
    known = {"scenario", "world", "obstacle", "robot", "arm", "potential", "planner", "profile", "experiment"}
    for s in sections:
        if s.name not in known:
            raise ScenarioError(s.line, f"unknown section [{s.name}]")

    head = _single(sections, "scenario")
    head.check_keys(("name", "kind"))
    name = head.req("name", str)
    kind = head.req("kind", _choice(KINDS))

    wsec = _single(sections, "world")
    wsec.check_keys(("bounds",))
    bounds = wsec.req("bounds", _floats(4))
    if not (bounds[0] < bounds[2] and bounds[1] < bounds[3]):
        raise ScenarioError(wsec.line_of("bounds"), "bounds must be xmin ymin xmax ymax with min < max")

    obstacles = []
    for s in sections:
        if s.name == "obstacle":
            if s.arg is not None:
                raise ScenarioError(s.line, "section [obstacle] takes no name")
            obstacles.append(_obstacle(s))

    arm = None
    if kind == "point2d":
        if _single(sections, "arm", required=False) is not None:
            raise ScenarioError(_single(sections, "arm", False).line, "[arm] only applies to planar_arm scenarios")
        rsec = _single(sections, "robot")
        rsec.check_keys(("start", "goal"))
        start = rsec.req("start", _floats(2))
        goal = rsec.req("goal", _floats(2))
        env_line = rsec.line
    else:
        if _single(sections, "robot", required=False) is not None:
            raise ScenarioError(_single(sections, "robot", False).line, "[robot] only applies to point2d scenarios")
        asec = _single(sections, "arm")
        asec.check_keys(("link_lengths", "base", "joint_limits", "samples_per_link", "start", "goal_config", "goal_pose"))
        links = asec.req("link_lengths", _floats())
        limits = asec.get("joint_limits", _floats(2 * len(links)))
        arm = ArmSpec(
            link_lengths=links,
            base=asec.get("base", _floats(2), (0.0, 0.0)),
            joint_limits=None if limits is None else tuple(zip(limits[0::2], limits[1::2])),
            samples_per_link=asec.get("samples_per_link", _int, 8),
            goal_pose=asec.req("goal_pose", _floats(2)),
        )
        start = asec.req("start", _floats(len(links)))
        goal = asec.req("goal_config", _floats(len(links)))
        env_line = asec.line

    potential = _potential(_single(sections, "potential", required=False))
    planner = _planner(_single(sections, "planner", required=False))

    profiles = []
    for s in sections:
        if s.name == "profile":
            p = _profile(s, potential)
            if any(q.name == p.name for q in profiles):
                raise ScenarioError(s.line, f"duplicate profile {p.name!r}")
            profiles.append(p)
    experiment = _experiment(_single(sections, "experiment", required=False), planner, {p.name for p in profiles})

    scen = ScenarioFile(
        name=name,
        kind=kind,
        bounds=bounds,
        obstacles=tuple(obstacles),
        start=start,
        goal=goal,
        arm=arm,
        potential=potential,
        planner=planner,
        profiles=tuple(profiles),
        experiment=experiment,
    )
    try:
        scen.environment()
    except ValueError as exc:
        raise ScenarioError(env_line, str(exc)) from None
    return scen


def load_scenario(path) -> ScenarioFile:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# --- emission --------------------------------------------------------------


def _num(v) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _nums(vals) -> str:
    return " ".join(_num(v) for v in vals)


def emit_scenario(s: ScenarioFile) -> str:
    """Canonical text for a scenario; ``parse_scenario`` inverts it."""
    out = ["[scenario]", f"name = {s.name}", f"kind = {s.kind}", "", "[world]", f"bounds = {_nums(s.bounds)}"]
    for ob in s.obstacles:
        out += ["", "[obstacle]"]
        sh = ob.shape
        if isinstance(sh, Circle):
            out += ["shape = circle", f"center = {_nums(sh.center)}", f"radius = {_num(sh.radius)}"]
        else:
            out += ["shape = rect", f"min = {_nums(sh.min)}", f"max = {_nums(sh.max)}"]
        if ob.impermeable:
            out.append("permeability = impermeable")
        else:
            out += ["permeability = permeable", f"cost = {_num(ob.permeability.cost)}"]
    out.append("")
    if s.kind == "point2d":
        out += ["[robot]", f"start = {_nums(s.start)}", f"goal = {_nums(s.goal)}"]
    else:
        a = s.arm
        out += ["[arm]", f"link_lengths = {_nums(a.link_lengths)}", f"base = {_nums(a.base)}"]
        if a.joint_limits is not None:
            out.append(f"joint_limits = {_nums(v for pair in a.joint_limits for v in pair)}")
        out += [
            f"samples_per_link = {a.samples_per_link}",
            f"start = {_nums(s.start)}",
            f"goal_config = {_nums(s.goal)}",
            f"goal_pose = {_nums(a.goal_pose)}",
        ]
    p = s.potential
    out += ["", "[potential]"]
    for k in POTENTIAL_KEYS:
        v = getattr(p, k)
        if v is not None:
            out.append(f"{k} = {_num(v)}")
    pl = s.planner
    out += ["", "[planner]"]
    for k in PLANNER_KEYS:
        v = getattr(pl, k)
        if v is not None:
            out.append(f"{k} = {_num(v)}")
    for pr in s.profiles:
        out += ["", f"[profile {pr.name}]", f"strategy = {pr.strategy}"]
        out += [f"{k} = {_num(v)}" for k, v in pr.potential]
        if pr.step is not None:
            out.append(f"step = {_num(pr.step)}")
        if pr.iters is not None:
            out.append(f"iters = {pr.iters}")
        if pr.c_perm is not None:
            out.append(f"c_perm = {_num(pr.c_perm)}")
    e = s.experiment
    if e is not None:
        out += [
            "",
            "[experiment]",
            f"trials = {e.trials}",
            f"base_seed = {e.base_seed}",
            f"checkpoints = {_nums(e.checkpoints)}",
        ]
        if e.comparisons:
            out.append("comparisons = " + " ".join(f"{a}:{b}" for a, b in e.comparisons))
        out.append(f"validate_trees = {e.validate_trees}")
    return "\n".join(out) + "\n"


def shipped_scenarios() -> list[str]:
    root = resources.files("apfrrt") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".scn"))


def shipped_path(name: str) -> Path:
    return Path(str(resources.files("apfrrt") / "scenarios" / f"{name}.scn"))


def load_shipped(name: str) -> ScenarioFile:
    return load_scenario(shipped_path(name))
