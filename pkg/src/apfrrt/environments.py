"""Configuration spaces: a 2-D point robot and a planar N-link arm.

Both share one contract. Each configuration maps to a set of workspace
points (a single point for the point robot, link samples for the arm), and
classification, clearance and edge checks are computed over those points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from apfrrt.geometry import Contact, Point2, Region, World, _contact, _opt

PI = math.pi
TWO_PI = 2.0 * math.pi
MAX_SAMPLE_ATTEMPTS = 100_000


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    while a > PI:
        a -= TWO_PI
    while a <= -PI:
        a += TWO_PI
    return a


class CSpaceEnvironment:
    """Shared behaviour; subclasses provide bounds and ``workspace_points``."""

    world: World
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    wrap: np.ndarray  # uint8 mask of angular coordinates
    start: np.ndarray
    goal: np.ndarray

    def workspace_points(self, Q: np.ndarray) -> np.ndarray:
        """(m, dim) configurations -> (m, npts, 2) workspace points."""
        raise NotImplementedError

    def normalize(self, q) -> np.ndarray:
        """Wrap angular coordinates and clamp into bounds."""
        q = np.array(q, dtype=float)
        for j in range(self.dim):
            if self.wrap[j]:
                q[j] = wrap_angle(q[j])
        return np.minimum(np.maximum(q, self.lower), self.upper)

    def difference(self, a, b) -> np.ndarray:
        """``a - b`` with angular coordinates wrapped to the short way round."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if self._any_wrap:
            for j in range(self.dim):
                if self.wrap[j]:
                    d[j] = wrap_angle(d[j])
        return d

    def distance(self, a, b) -> float:
        d = self.difference(a, b).tolist()
        s = d[0] * d[0]
        for v in d[1:]:
            s += v * v
        return math.sqrt(s)

    def goal_distance(self, q) -> float:
        return self.distance(q, self.goal)

    def interpolate(self, a, b, t: float) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return self.normalize(a + t * self.difference(b, a))

    def sample_free(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform sample over the bounds, rejecting impermeable configurations.

        Consumes exactly ``dim`` doubles from ``rng`` per attempt.
        """
        span = self.upper - self.lower
        for _ in range(MAX_SAMPLE_ATTEMPTS):
            q = self.normalize(self.lower + rng.random(self.dim) * span)
            if self.classify(q).region is not Region.IMPERMEABLE:
                return q
        raise RuntimeError("could not sample a non-impermeable configuration")

    def classify(self, q) -> Contact:
        q = np.asarray(q, dtype=float).reshape(1, self.dim)
        status, cost = self.world.classify_groups(self.workspace_points(q))
        return _contact(int(status[0]), float(cost[0]))

    def clearance_per_class(self, q) -> tuple[Optional[float], Optional[float]]:
        dp, di = self.clearance_batch(np.asarray(q, dtype=float).reshape(1, self.dim))
        return _opt(dp[0]), _opt(di[0])

    def clearance_batch(self, Q: np.ndarray):
        """Per-class clearance arrays for a batch of configurations (inf = empty class)."""
        return self.world.clearance_groups(self.workspace_points(Q))

    def steer(self, q_from, direction, delta: float) -> np.ndarray:
        direction = np.asarray(direction, dtype=float)
        n = math.sqrt(float(direction @ direction))
        if n == 0.0:
            raise ValueError("zero steering direction")
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"steering direction must be a unit vector (norm {n})")
        if not delta > 0:
            raise ValueError("steering step must be positive")
        return self.normalize(np.asarray(q_from, dtype=float) + delta * direction)

    def edge_blocked(self, a, b, resolution: float) -> bool:
        """True if any sample along the edge (spacing <= resolution) is impermeable."""
        if not self.world.has_impermeable:
            return False
        n = max(1, math.ceil(self.distance(a, b) / resolution))
        a = np.asarray(a, dtype=float)
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        Q = a + t * self.difference(b, a)
        status, _ = self.world.classify_groups(self.workspace_points(Q))
        return bool((status == 2).any())

    @property
    def _any_wrap(self) -> bool:
        return bool(self.wrap.any())

    def _check_endpoint(self, q, label: str) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim,) or not np.all(np.isfinite(q)):
            raise ValueError(f"{label} must be a finite vector of length {self.dim}")
        if np.any(q < self.lower) or np.any(q > self.upper):
            raise ValueError(f"{label} {q.tolist()} lies outside the configuration bounds")
        if self.classify(q).region is Region.IMPERMEABLE:
            raise ValueError(f"{label} {q.tolist()} is inside an impermeable obstacle")
        q.setflags(write=False)
        return q


class PointEnv(CSpaceEnvironment):
    """Point robot in the plane; C-space equals the world rectangle."""

    def __init__(self, world: World, start, goal):
        self.world = world
        self.dim = 2
        b = world.bounds
        self.lower = np.array([b.min.x, b.min.y])
        self.upper = np.array([b.max.x, b.max.y])
        self.wrap = np.zeros(2, dtype=np.uint8)
        self.start = self._check_endpoint(start, "start")
        self.goal = self._check_endpoint(goal, "goal")

    def workspace_points(self, Q):
        return np.ascontiguousarray(np.asarray(Q, dtype=float).reshape(-1, 1, 2))

    def normalize(self, q):
        return np.minimum(np.maximum(np.array(q, dtype=float), self.lower), self.upper)

    def difference(self, a, b):
        return np.asarray(a, dtype=float) - np.asarray(b, dtype=float)

    def clearance_gradients(self, q):
        """Nearest distance and its gradient per class, as
        ``(d_perm, grad_perm, d_imp, grad_imp)`` with ``inf`` for an empty class."""
        dp, gpx, gpy, di, gix, giy = self.world.clearance_grad(float(q[0]), float(q[1]))
        return dp, np.array([gpx, gpy]), di, np.array([gix, giy])


def point2d_env(world: World, start, goal) -> PointEnv:
    return PointEnv(world, start, goal)


@dataclass(frozen=True)
class PlanarArm:
    link_lengths: tuple
    base: Point2 = Point2(0.0, 0.0)
    joint_limits: Optional[tuple] = None  # ((lo, hi), ...); None = full turn on every joint
    samples_per_link: int = 8

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.link_lengths)
        if len(lengths) < 2 or any(not (v > 0 and math.isfinite(v)) for v in lengths):
            raise ValueError("an arm needs at least two links of positive length")
        object.__setattr__(self, "link_lengths", lengths)
        object.__setattr__(self, "base", Point2(float(self.base[0]), float(self.base[1])))
        limits = self.joint_limits
        if limits is None:
            limits = tuple((-PI, PI) for _ in lengths)
        limits = tuple((float(lo), float(hi)) for lo, hi in limits)
        if len(limits) != len(lengths):
            raise ValueError("one joint limit pair per link required")
        for lo, hi in limits:
            if not (-PI <= lo < hi <= PI):
                raise ValueError(f"joint limits ({lo}, {hi}) must satisfy -pi <= lo < hi <= pi")
        object.__setattr__(self, "joint_limits", limits)
        if int(self.samples_per_link) < 1:
            raise ValueError("samples_per_link must be positive")

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return sum(self.link_lengths)

    def within_limits(self, q) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(q, self.joint_limits))

    def points_batch(self, Q: np.ndarray) -> np.ndarray:
        """Link sample points for a batch of configurations, shape (m, 1 + n*spl, 2)."""
        Q = np.asarray(Q, dtype=float).reshape(-1, self.n_joints)
        m = Q.shape[0]
        L = np.asarray(self.link_lengths)
        theta = np.cumsum(Q, axis=1)
        dx = L * np.cos(theta)
        dy = L * np.sin(theta)
        jx = self.base.x + np.concatenate([np.zeros((m, 1)), np.cumsum(dx, axis=1)], axis=1)
        jy = self.base.y + np.concatenate([np.zeros((m, 1)), np.cumsum(dy, axis=1)], axis=1)
        spl = self.samples_per_link
        t = np.arange(1, spl + 1) / spl
        px = jx[:, :-1, None] + t * dx[:, :, None]
        py = jy[:, :-1, None] + t * dy[:, :, None]
        # last sample of each link is recomputed from the running sum so joints match exactly
        px[:, :, -1] = jx[:, 1:]
        py[:, :, -1] = jy[:, 1:]
        out = np.empty((m, 1 + self.n_joints * spl, 2))
        out[:, 0, 0] = self.base.x
        out[:, 0, 1] = self.base.y
        out[:, 1:, 0] = px.reshape(m, -1)
        out[:, 1:, 1] = py.reshape(m, -1)
        return out


def forward_kinematics(arm: PlanarArm, q) -> np.ndarray:
    """Sample points along every link, base first and end effector last."""
    q = np.asarray(q, dtype=float)
    if q.shape != (arm.n_joints,):
        raise ValueError(f"expected {arm.n_joints} joint angles")
    if not arm.within_limits(q):
        raise ValueError(f"configuration {q.tolist()} violates the joint limits")
    return arm.points_batch(q[None])[0]


def end_effector(arm: PlanarArm, q) -> Point2:
    p = forward_kinematics(arm, q)[-1]
    return Point2(float(p[0]), float(p[1]))


class ArmEnv(CSpaceEnvironment):
    """Planar arm among obstacles; joint space with wrapped angles."""

    def __init__(self, arm: PlanarArm, world: World, start, goal_pose, goal_config, pose_tol: float = 1e-6):
        self.arm = arm
        self.world = world
        self.dim = arm.n_joints
        self.lower = np.array([lo for lo, _ in arm.joint_limits])
        self.upper = np.array([hi for _, hi in arm.joint_limits])
        # only joints free to turn all the way round wrap; limited joints are plain intervals
        self.wrap = np.array([hi - lo >= TWO_PI for lo, hi in arm.joint_limits], dtype=np.uint8)
        self.start = self._check_endpoint([wrap_angle(v) for v in start], "start")
        self.goal = self._check_endpoint([wrap_angle(v) for v in goal_config], "goal configuration")
        self.goal_pose = Point2(float(goal_pose[0]), float(goal_pose[1]))
        ee = end_effector(arm, self.goal)
        if math.hypot(ee.x - self.goal_pose.x, ee.y - self.goal_pose.y) > pose_tol:
            raise ValueError(f"goal configuration places the end effector at {tuple(ee)}, not at {tuple(self.goal_pose)}")

    def workspace_points(self, Q):
        return self.arm.points_batch(Q)


def arm_env(arm: PlanarArm, world: World, start, goal_pose, goal_config) -> ArmEnv:
    return ArmEnv(arm, world, start, goal_pose, goal_config)


def steer(env: CSpaceEnvironment, q_from, direction, delta: float) -> np.ndarray:
    return env.steer(q_from, direction, delta)


def config_list(q: Sequence[float]) -> list:
    return [float(v) for v in q]
