"""Cost-aware RRT* for permeable obstacles, with a potential-field bias on tree growth."""

from apfrrt.apf import PotentialParams
from apfrrt.environments import ArmEnv, PlanarArm, PointEnv
from apfrrt.geometry import IMPERMEABLE, Circle, ObstacleRegion, Permeable, Point2, Rect, World, world_from_obstacles
from apfrrt.kernels import backend_name
from apfrrt.planner import NearestNodeBias, NoBias, PlannerParams, PlanResult, SampleBias, plan, validate_tree

__version__ = "0.1.0"

__all__ = [
    "ArmEnv",
    "Circle",
    "IMPERMEABLE",
    "NearestNodeBias",
    "NoBias",
    "ObstacleRegion",
    "Permeable",
    "PlanResult",
    "PlanarArm",
    "PlannerParams",
    "Point2",
    "PointEnv",
    "PotentialParams",
    "Rect",
    "SampleBias",
    "World",
    "backend_name",
    "plan",
    "validate_tree",
    "world_from_obstacles",
]
