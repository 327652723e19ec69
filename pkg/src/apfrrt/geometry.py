"""Planar primitives, permeability-tagged obstacles and world queries."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from apfrrt import kernels


class Point2(NamedTuple):
    x: float
    y: float


def _finite_point(p) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite point {p!r}")
    return Point2(x, y)


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _finite_point(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"circle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, closed."""

    min: Point2
    max: Point2

    def __post_init__(self):
        lo, hi = _finite_point(self.min), _finite_point(self.max)
        if not (lo.x < hi.x and lo.y < hi.y):
            raise ValueError(f"degenerate rectangle {lo} .. {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y


Shape = Union[Circle, Rect]


@dataclass(frozen=True)
class Permeable:
    cost: float

    def __post_init__(self):
        if not (math.isfinite(self.cost) and self.cost > 0):
            raise ValueError(f"permeable cost must be > 0, got {self.cost}")


@dataclass(frozen=True)
class Impermeable:
    pass


IMPERMEABLE = Impermeable()


@dataclass(frozen=True)
class ObstacleRegion:
    shape: Shape
    permeability: Union[Permeable, Impermeable]

    @property
    def impermeable(self) -> bool:
        return isinstance(self.permeability, Impermeable)


class Region(enum.IntEnum):
    FREE = 0
    PERMEABLE = 1
    IMPERMEABLE = 2


class Contact(NamedTuple):
    """Classification of a point or configuration; ``cost`` is 0 unless permeable."""

    region: Region
    cost: float = 0.0


FREE = Contact(Region.FREE, 0.0)


def distance_to_shape(s: Shape, p) -> float:
    """Euclidean distance from ``p`` to the closed shape ``s`` (0 inside)."""
    x, y = _finite_point(p)
    if isinstance(s, Circle):
        return max(math.hypot(x - s.center.x, y - s.center.y) - s.radius, 0.0)
    ex = max(s.min.x - x, x - s.max.x, 0.0)
    ey = max(s.min.y - y, y - s.max.y, 0.0)
    return math.hypot(ex, ey)


def contains(s: Shape, p) -> bool:
    x, y = p[0], p[1]
    if isinstance(s, Circle):
        dx, dy = x - s.center.x, y - s.center.y
        return dx * dx + dy * dy <= s.radius * s.radius
    return s.min.x <= x <= s.max.x and s.min.y <= y <= s.max.y


def _intersects(s: Shape, r: Rect) -> bool:
    if isinstance(s, Circle):
        return distance_to_shape(r, s.center) <= s.radius
    return s.min.x <= r.max.x and r.min.x <= s.max.x and s.min.y <= r.max.y and r.min.y <= s.max.y


@dataclass(frozen=True)
class World:
    bounds: Rect
    obstacles: tuple = ()
    # packed obstacle tables for the kernels
    _kind: np.ndarray = field(init=False, repr=False, compare=False)
    _geom: np.ndarray = field(init=False, repr=False, compare=False)
    _imp: np.ndarray = field(init=False, repr=False, compare=False)
    _cost: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        obstacles = tuple(self.obstacles)
        object.__setattr__(self, "obstacles", obstacles)
        for ob in obstacles:
            if not _intersects(ob.shape, self.bounds):
                raise ValueError(f"obstacle {ob} lies outside the world bounds")
        k = len(obstacles)
        kind = np.zeros(k, dtype=np.int8)
        geom = np.zeros((k, 4))
        imp = np.zeros(k, dtype=np.uint8)
        cost = np.zeros(k)
        for i, ob in enumerate(obstacles):
            s = ob.shape
            if isinstance(s, Circle):
                geom[i] = (s.center.x, s.center.y, s.radius, 0.0)
            else:
                kind[i] = 1
                geom[i] = (s.min.x, s.min.y, s.max.x, s.max.y)
            if ob.impermeable:
                imp[i] = 1
            else:
                cost[i] = ob.permeability.cost
        for name, arr in (("_kind", kind), ("_geom", geom), ("_imp", imp), ("_cost", cost)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def has_impermeable(self) -> bool:
        return bool(self._imp.any())

    def classify_groups(self, P: np.ndarray):
        """Batch classification: worst region per group of a (m, npts, 2) array."""
        return kernels.classify_groups(P, self._kind, self._geom, self._imp, self._cost)

    def clearance_groups(self, P: np.ndarray):
        return kernels.clearance_groups(P, self._kind, self._geom, self._imp)

    def clearance_grad(self, x: float, y: float):
        return kernels.clearance_grad(x, y, self._kind, self._geom, self._imp)

    def with_permeable_cost(self, cost: float) -> "World":
        """Copy of this world with every permeable obstacle's cost replaced."""
        obs = tuple(
            ob if ob.impermeable else ObstacleRegion(ob.shape, Permeable(cost)) for ob in self.obstacles
        )
        return World(self.bounds, obs)


def _as_groups(points) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 1, 2))


def classify_point(w: World, p) -> Contact:
    """Impermeable wins over permeable; overlapping permeable regions take the max cost."""
    x, y = _finite_point(p)
    status, cost = w.classify_groups(np.array([[[x, y]]]))
    return _contact(int(status[0]), float(cost[0]))


def _contact(status: int, cost: float) -> Contact:
    if status == 0:
        return FREE
    if status == 2:
        return Contact(Region.IMPERMEABLE, 0.0)
    return Contact(Region.PERMEABLE, cost)


def min_distance_per_class(w: World, p) -> tuple[Optional[float], Optional[float]]:
    """(nearest permeable distance, nearest impermeable distance); None for an empty class."""
    x, y = _finite_point(p)
    dp, di = w.clearance_groups(np.array([[[x, y]]]))
    return _opt(dp[0]), _opt(di[0])


def _opt(d) -> Optional[float]:
    d = float(d)
    return None if math.isinf(d) else d


def segment_samples(a, b, resolution: float) -> np.ndarray:
    """Evenly spaced points on [a, b], endpoints included, spacing <= resolution."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    n = max(1, math.ceil(length / resolution))
    t = np.linspace(0.0, 1.0, n + 1)
    return a + t[:, None] * (b - a)


def segment_hits_impermeable(w: World, a, b, resolution: float) -> bool:
    """Sampled check; a wall thinner than ``resolution`` can be missed."""
    if not w.has_impermeable:
        return False
    pts = segment_samples(a, b, resolution)
    status, _ = w.classify_groups(_as_groups(pts))
    return bool((status == 2).any())


def world_from_obstacles(bounds: Sequence[float], obstacles: Sequence[ObstacleRegion]) -> World:
    xmin, ymin, xmax, ymax = bounds
    return World(Rect(Point2(xmin, ymin), Point2(xmax, ymax)), tuple(obstacles))
