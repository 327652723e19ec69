import math

import numpy as np
import pytest

from apfrrt import _pykernels, kernels
from apfrrt.geometry import IMPERMEABLE, Circle, ObstacleRegion, Permeable, Point2, Rect, world_from_obstacles

needs_c = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="compiled kernels not built")


def world():
    obs = [
        ObstacleRegion(Rect(Point2(20, 10), Point2(40, 60)), Permeable(100)),
        ObstacleRegion(Circle(Point2(70, 70), 8), IMPERMEABLE),
        ObstacleRegion(Circle(Point2(30, 50), 12), Permeable(5)),
        ObstacleRegion(Rect(Point2(60, 0), Point2(62, 30)), IMPERMEABLE),
    ]
    return world_from_obstacles((0, 0, 100, 100), obs)


def same(a, b):
    if isinstance(a, tuple):
        assert len(a) == len(b)
        for x, y in zip(a, b):
            same(x, y)
    elif isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        assert np.array_equal(np.asarray(a), np.asarray(b))
    else:
        assert a == b or (math.isinf(a) and a == b)


def test_fallback_selected_by_name():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@needs_c
class TestBackendsAgree:
    from apfrrt import _ckernels as c

    def test_nearest_and_radius(self):
        rng = np.random.default_rng(0)
        for dim, wrap in ((2, [0, 0]), (3, [1, 1, 1]), (3, [0, 1, 1])):
            X = rng.uniform(-4, 4, (300, dim))
            # integer grid copies make exact ties likely
            X[::3] = np.round(X[::3])
            w = np.array(wrap, dtype=np.uint8)
            for _ in range(100):
                q = np.round(rng.uniform(-4, 4, dim), 1)
                n = int(rng.integers(1, 301))
                assert self.c.nearest(X, n, q, w) == _pykernels.nearest(X, n, q, w)
                same(self.c.within_radius(X, n, q, w, 1.5), _pykernels.within_radius(X, n, q, w, 1.5))

    def test_classify_and_clearance(self):
        w = world()
        rng = np.random.default_rng(1)
        P = rng.uniform(-5, 105, (400, 6, 2))
        args = (w._kind, w._geom, w._imp)
        same(self.c.classify_groups(P, *args, w._cost), _pykernels.classify_groups(P, *args, w._cost))
        same(self.c.clearance_groups(P, *args), _pykernels.clearance_groups(P, *args))
        for x, y in P[:, 0, :]:
            same(self.c.clearance_grad(x, y, *args), _pykernels.clearance_grad(x, y, *args))
