"""Deterministic SVG pictures of a world, a search tree and a path.

Point robots are drawn in the plane directly. Arms are drawn in their
workspace: the links at the start and goal configurations plus the trace of
the end effector along the path (and over tree edges when enabled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apfrrt.apf import PotentialParams, potential_gradient, resolve_for
from apfrrt.environments import ArmEnv, CSpaceEnvironment, PointEnv
from apfrrt.geometry import Circle

LAYERS = ("world", "tree", "path", "quiver")

IMPERMEABLE_FILL = "#333333"
PERMEABLE_FILL = "#b8e0b0"
TREE_STROKE = "#7a9cc6"
PATH_STROKE = "#d62728"
QUIVER_STROKE = "#888888"


@dataclass(frozen=True)
class RenderSpec:
    width: int = 600
    height: int = 600
    layers: frozenset = frozenset(LAYERS)
    quiver_grid: int = 20

    def __post_init__(self):
        if self.width < 100 or self.height < 100:
            raise ValueError("canvas must be at least 100x100 pixels")
        object.__setattr__(self, "layers", frozenset(self.layers))
        unknown = self.layers - set(LAYERS)
        if unknown:
            raise ValueError(f"unknown layers {sorted(unknown)}; choose from {', '.join(LAYERS)}")
        if self.quiver_grid < 2:
            raise ValueError("quiver_grid must be at least 2")


def parse_layers(text: str) -> frozenset:
    names = [t.strip() for t in text.split(",") if t.strip()]
    for n in names:
        if n not in LAYERS:
            raise ValueError(f"unknown layer {n!r}; choose from {', '.join(LAYERS)}")
    return frozenset(names)


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Canvas:
    def __init__(self, bounds, spec: RenderSpec):
        self.xmin, self.ymin, self.xmax, self.ymax = bounds
        self.spec = spec
        pad = 10
        sx = (spec.width - 2 * pad) / (self.xmax - self.xmin)
        sy = (spec.height - 2 * pad) / (self.ymax - self.ymin)
        self.s = min(sx, sy)
        self.ox = pad
        self.oy = spec.height - pad
        self.items: list[str] = []

    def pt(self, x, y) -> tuple[float, float]:
        return self.ox + (x - self.xmin) * self.s, self.oy - (y - self.ymin) * self.s

    def line(self, a, b, stroke, width, extra=""):
        x1, y1 = self.pt(*a)
        x2, y2 = self.pt(*b)
        self.items.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"{extra}/>'
        )

    def polyline(self, pts, stroke, width, cls):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self.pt(*p) for p in pts))
        self.items.append(
            f'<polyline class="{cls}" points="{coords}" fill="none" stroke="{stroke}" stroke-width="{_f(width)}"/>'
        )

    def circle(self, c, r_world, fill, cls, r_px=None):
        x, y = self.pt(*c)
        r = r_px if r_px is not None else r_world * self.s
        self.items.append(f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{fill}"/>')

    def rect(self, lo, hi, fill, cls):
        x, y = self.pt(lo[0], hi[1])
        w = (hi[0] - lo[0]) * self.s
        h = (hi[1] - lo[1]) * self.s
        self.items.append(f'<rect class="{cls}" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>')

    def document(self) -> str:
        w, h = self.spec.width, self.spec.height
        head = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            f'<rect class="background" x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
        ]
        x0, y0 = self.pt(self.xmin, self.ymax)
        x1, y1 = self.pt(self.xmax, self.ymin)
        head.append(
            f'<rect class="bounds" x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
            f'fill="none" stroke="#000000" stroke-width="1.00"/>'
        )
        return "\n".join(head + self.items + ["</svg>"]) + "\n"


def _draw_world(cv: _Canvas, env: CSpaceEnvironment) -> None:
    # permeable first so impermeable shapes stay visible on top
    for imp in (False, True):
        for ob in env.world.obstacles:
            if ob.impermeable != imp:
                continue
            fill = IMPERMEABLE_FILL if imp else PERMEABLE_FILL
            cls = "impermeable" if imp else "permeable"
            sh = ob.shape
            if isinstance(sh, Circle):
                cv.circle(sh.center, sh.radius, fill, cls)
            else:
                cv.rect(sh.min, sh.max, fill, cls)


def _ws(env: CSpaceEnvironment, Q) -> np.ndarray:
    """Workspace point drawn for each configuration: the point itself or the end effector."""
    Q = np.asarray(Q, dtype=float).reshape(-1, env.dim)
    if isinstance(env, PointEnv):
        return Q
    return env.workspace_points(Q)[:, -1, :]


def quiver_field(env: PointEnv, params: PotentialParams, n: int):
    """(point, -grad U) pairs on an n x n grid of cell centres plus the goal."""
    b = env.world.bounds
    xs = [b.min.x + (i + 0.5) * (b.max.x - b.min.x) / n for i in range(n)]
    ys = [b.min.y + (j + 0.5) * (b.max.y - b.min.y) / n for j in range(n)]
    pts = [(x, y) for y in ys for x in xs] + [tuple(float(v) for v in env.goal)]
    return [(p, -potential_gradient(env, params, p)) for p in pts]


def _draw_quiver(cv: _Canvas, env: PointEnv, params: PotentialParams, n: int) -> None:
    b = env.world.bounds
    arrow = 0.4 * min(b.max.x - b.min.x, b.max.y - b.min.y) / n
    for p, f in quiver_field(env, params, n):
        nf = math.hypot(f[0], f[1])
        if nf > 0:
            tip = (p[0] + arrow * f[0] / nf, p[1] + arrow * f[1] / nf)
        else:
            tip = p
        cv.line(p, tip, QUIVER_STROKE, 0.8, ' class="quiver"')


def render_svg(
    env: CSpaceEnvironment,
    tree=None,
    path=None,
    potential: Optional[PotentialParams] = None,
    spec: RenderSpec = RenderSpec(),
) -> str:
    """SVG text for the requested layers. Identical inputs give identical bytes."""
    if "quiver" in spec.layers and potential is not None and not isinstance(env, PointEnv):
        raise ValueError("the quiver layer is only available for point robots")
    b = env.world.bounds
    cv = _Canvas((b.min.x, b.min.y, b.max.x, b.max.y), spec)
    if "world" in spec.layers:
        _draw_world(cv, env)
    if "quiver" in spec.layers and potential is not None:
        _draw_quiver(cv, env, resolve_for(potential, env), spec.quiver_grid)
    if "tree" in spec.layers and tree is not None and len(tree) > 1:
        W = _ws(env, tree.configs[: len(tree)])
        for p, i in tree.edges():
            cv.line(W[p], W[i], TREE_STROKE, 0.5, ' class="tree"')
    if isinstance(env, ArmEnv):
        for q, cls in ((env.start, "arm-start"), (env.goal, "arm-goal")):
            pts = env.workspace_points(np.asarray(q)[None])[0]
            cv.polyline(pts, "#555555", 2.0, cls)
    if "path" in spec.layers and path is not None and len(path) > 1:
        cv.polyline(_ws(env, path), PATH_STROKE, 2.5, "path")
    s, g = _ws(env, [env.start, env.goal])
    cv.circle(s, 0, "#1f77b4", "start", r_px=5)
    cv.circle(g, 0, "#ff7f0e", "goal", r_px=5)
    return cv.document()
