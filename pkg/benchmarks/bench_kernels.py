"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--iterations 2000]

Prints per-kernel timings for both backends and a whole-plan comparison on
a small wall world. Results of the two backends are checked to be equal.
"""

import argparse
import timeit

import numpy as np

from apfrrt import kernels
from apfrrt.environments import PointEnv
from apfrrt.geometry import IMPERMEABLE, Circle, ObstacleRegion, Permeable, Point2, Rect, world_from_obstacles
from apfrrt.planner import NearestNodeBias, PlannerParams, plan


def bench_world():
    obs = [
        ObstacleRegion(Rect(Point2(45, 10), Point2(55, 90)), Permeable(100)),
        ObstacleRegion(Rect(Point2(46, 0), Point2(48, 10)), Permeable(100)),
        ObstacleRegion(Rect(Point2(46, 90), Point2(48, 100)), Permeable(100)),
        ObstacleRegion(Circle(Point2(25, 75), 6), IMPERMEABLE),
        ObstacleRegion(Circle(Point2(75, 25), 4), Permeable(50)),
    ]
    return world_from_obstacles((0, 0, 100, 100), obs)


def kernel_cases(rng):
    w = bench_world()
    X = rng.uniform(0, 100, (5000, 2))
    wrap = np.zeros(2, dtype=np.uint8)
    q = np.array([50.0, 50.0])
    P = rng.uniform(0, 100, (1, 31, 2))  # one edge check at delta / 10
    args = (w._kind, w._geom, w._imp)
    return {
        "nearest (n=5000)": lambda: kernels.nearest(X, 5000, q, wrap),
        "within_radius (n=5000)": lambda: kernels.within_radius(X, 5000, q, wrap, 3.0),
        "classify_groups (31 pts)": lambda: kernels.classify_groups(P, *args, w._cost),
        "clearance_groups (31 pts)": lambda: kernels.clearance_groups(P, *args),
        "clearance_grad": lambda: kernels.clearance_grad(30.0, 60.0, *args),
    }


def time_call(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.Timer(fn).repeat(repeat, n)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=2000, help="planner iterations for the whole-plan timing")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the python backend is available")
    rng = np.random.default_rng(0)
    cases = kernel_cases(rng)
    times = {}
    for b in backends:
        kernels.use_backend(b)
        times[b] = {name: time_call(fn, args.repeat) for name, fn in cases.items()}

    print(f"{'kernel':28s}" + "".join(f"{b:>14s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name in cases:
        row = f"{name:28s}" + "".join(f"{times[b][name] * 1e6:11.2f} us" for b in backends)
        if len(backends) > 1:
            row += f"  {times['python'][name] / times['cython'][name]:9.1f}x"
        print(row)

    env = PointEnv(bench_world(), (10, 50), (90, 50))
    params = PlannerParams(max_iterations=args.iterations, strategy=NearestNodeBias(), rng_seed=1)
    results = {}
    print()
    for b in backends:
        kernels.use_backend(b)
        t = min(timeit.repeat(lambda: results.__setitem__(b, plan(env, params, keep_tree=False)), number=1, repeat=3))
        print(f"plan {args.iterations} iterations, {b:6s}: {t:.3f} s")
    if len(backends) > 1:
        same = results["python"] == results["cython"]
        print(f"backends agree on the plan: {same}")


if __name__ == "__main__":
    main()
