"""Cost-based RRT* over permeable obstacles.

Path cost from the root to a node ``n`` with parent ``p`` is

    c_path(n) = d(n, p) + c_path(p) + c_perm(p)

where ``c_perm`` is the collision cost of the configuration (the permeable
cost it touches, zero in free space). Parent selection, rewiring and the
final goal connection all minimise this quantity. Three extension
strategies share the loop: plain RRT*, nearest-node potential bias, and
random-sample potential bias.

RNG stream: each iteration draws ``dim`` doubles per sampling attempt and
nothing else, so every strategy consumes the same stream for the same
sequence of rejected samples.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from apfrrt import kernels
from apfrrt.apf import PotentialParams, bias_random_sample, biased_extend_direction, resolve_for
from apfrrt.environments import CSpaceEnvironment
from apfrrt.geometry import Region


@dataclass(frozen=True)
class NoBias:
    pass


@dataclass(frozen=True)
class NearestNodeBias:
    potential: PotentialParams = field(default_factory=PotentialParams)


@dataclass(frozen=True)
class SampleBias:
    potential: PotentialParams = field(default_factory=PotentialParams)
    step: float = 0.5
    iters: int = 10

    def __post_init__(self):
        if not self.step > 0 or self.iters < 0:
            raise ValueError("sample bias needs step > 0 and iters >= 0")


Strategy = Union[NoBias, NearestNodeBias, SampleBias]


@dataclass(frozen=True)
class PlannerParams:
    max_iterations: int = 5000
    delta: float = 3.0
    neighbor_radius: Optional[float] = None  # default: delta
    goal_radius: Optional[float] = None  # default: delta
    edge_check_resolution: Optional[float] = None  # default: delta / 10
    strategy: Strategy = NoBias()
    rng_seed: int = 0
    checkpoints: tuple = ()

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.neighbor_radius is None:
            object.__setattr__(self, "neighbor_radius", self.delta)
        if self.goal_radius is None:
            object.__setattr__(self, "goal_radius", self.delta)
        if self.edge_check_resolution is None:
            object.__setattr__(self, "edge_check_resolution", self.delta / 10.0)
        if not 0 < self.neighbor_radius <= self.delta:
            raise ValueError(f"neighbor_radius must satisfy 0 < r <= delta (r={self.neighbor_radius}, delta={self.delta})")
        if not self.goal_radius > 0 or not self.edge_check_resolution > 0:
            raise ValueError("goal_radius and edge_check_resolution must be positive")
        cps = tuple(int(c) for c in self.checkpoints) or (self.max_iterations,)
        if list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.max_iterations:
            raise ValueError("checkpoints must be increasing iteration counts within max_iterations")
        object.__setattr__(self, "checkpoints", cps)


class TreeNode(NamedTuple):
    id: int
    config: np.ndarray
    parent: Optional[int]
    c_path: float
    c_perm: float


class Tree:
    """Array-backed search tree. Node ids are insertion indices."""

    def __init__(self, dim: int, wrap: np.ndarray, capacity: int = 256):
        self.dim = dim
        self.wrap = np.ascontiguousarray(wrap, dtype=np.uint8)
        self.configs = np.empty((capacity, dim))
        self.parent: list[int] = []
        self.c_path: list[float] = []
        self.c_perm: list[float] = []
        self.edge_len: list[float] = []
        self.children: list[list[int]] = []

    @classmethod
    def for_env(cls, env: CSpaceEnvironment, capacity: int = 256) -> "Tree":
        return cls(env.dim, env.wrap, capacity)

    def __len__(self) -> int:
        return len(self.parent)

    def _push(self, config) -> int:
        n = len(self.parent)
        if n == self.configs.shape[0]:
            grown = np.empty((2 * n, self.dim))
            grown[:n] = self.configs[:n]
            self.configs = grown
        self.configs[n] = config
        return n

    def add_root(self, config, c_perm: float = 0.0) -> int:
        if len(self):
            raise ValueError("tree already has a root")
        self._push(config)
        self.parent.append(-1)
        self.c_path.append(0.0)
        self.c_perm.append(float(c_perm))
        self.edge_len.append(0.0)
        self.children.append([])
        return 0

    def add(self, config, parent: int, c_perm: float, edge_len: float) -> int:
        i = self._push(config)
        self.parent.append(parent)
        self.c_path.append(edge_len + self.c_path[parent] + self.c_perm[parent])
        self.c_perm.append(float(c_perm))
        self.edge_len.append(float(edge_len))
        self.children.append([])
        self.children[parent].append(i)
        return i

    def node(self, i: int) -> TreeNode:
        p = self.parent[i]
        return TreeNode(i, self.configs[i], None if p < 0 else p, self.c_path[i], self.c_perm[i])

    def nearest(self, q) -> int:
        return kernels.nearest(self.configs, len(self), np.ascontiguousarray(q, dtype=float), self.wrap)

    def within(self, q, r: float) -> tuple[list[int], list[float]]:
        """Ids (ascending) of nodes within distance ``r`` of ``q`` and their distances."""
        ids, d = kernels.within_radius(self.configs, len(self), np.ascontiguousarray(q, dtype=float), self.wrap, r)
        return ids.tolist(), d.tolist()

    def reparent(self, i: int, new_parent: int, edge_len: float) -> None:
        """Move node ``i`` under ``new_parent`` and refresh the subtree's costs."""
        old = self.parent[i]
        if old >= 0:
            self.children[old].remove(i)
        self.parent[i] = new_parent
        self.children[new_parent].append(i)
        self.edge_len[i] = edge_len
        self.c_path[i] = edge_len + self.c_path[new_parent] + self.c_perm[new_parent]
        self.propagate(i)

    def propagate(self, i: int) -> None:
        stack = list(self.children[i])
        c_path, c_perm, edge, parent, children = self.c_path, self.c_perm, self.edge_len, self.parent, self.children
        while stack:
            j = stack.pop()
            p = parent[j]
            c_path[j] = edge[j] + c_path[p] + c_perm[p]
            stack.extend(children[j])

    def path_to_root(self, i: int) -> list[int]:
        out = []
        while i >= 0:
            out.append(i)
            i = self.parent[i]
        out.reverse()
        return out

    def edges(self):
        for i, p in enumerate(self.parent):
            if p >= 0:
                yield p, i


@dataclass(frozen=True)
class PlanResult:
    path: Optional[tuple]
    path_length: Optional[float]
    n_collision: Optional[int]
    total_cost: Optional[float]
    checkpoint_costs: dict
    tree_size: int
    rng_seed: int
    tree: Optional[Tree] = field(default=None, compare=False, repr=False)
    tree_violations: Optional[int] = None

    @property
    def solved(self) -> bool:
        return self.path is not None

    def without_tree(self) -> "PlanResult":
        return replace(self, tree=None)

    def to_record(self, params: Optional[PlannerParams] = None, **extra) -> dict:
        rec = {
            "rng_seed": self.rng_seed,
            "solved": self.solved,
            "total_cost": self.total_cost,
            "path_length": self.path_length,
            "n_collision": self.n_collision,
            "tree_size": self.tree_size,
            "checkpoint_costs": {str(k): v for k, v in sorted(self.checkpoint_costs.items())},
            "path": None if self.path is None else [list(q) for q in self.path],
        }
        if self.tree_violations is not None:
            rec["tree_violations"] = self.tree_violations
        if params is not None:
            rec["params"] = params_echo(params)
        rec.update(extra)
        return rec


def params_echo(params: PlannerParams) -> dict:
    s = params.strategy
    out = {
        "max_iterations": params.max_iterations,
        "delta": params.delta,
        "neighbor_radius": params.neighbor_radius,
        "goal_radius": params.goal_radius,
        "edge_check_resolution": params.edge_check_resolution,
        "rng_seed": params.rng_seed,
        "checkpoints": list(params.checkpoints),
        "strategy": {NoBias: "none", NearestNodeBias: "nearest_node_bias", SampleBias: "sample_bias"}[type(s)],
    }
    if isinstance(s, (NearestNodeBias, SampleBias)):
        p = s.potential
        out["potential"] = {
            "k_att": p.k_att,
            "k_rep_perm": p.k_rep_perm,
            "k_rep_imp": p.k_rep_imp,
            "d_obs_star": p.d_obs_star,
            "beta": p.beta,
            "f_att_max": p.f_att_max,
        }
    if isinstance(s, SampleBias):
        out["step"] = s.step
        out["iters"] = s.iters
    return out


def nearest_node(tree: Tree, q_rand) -> TreeNode:
    """Closest node by C-space distance; earliest-inserted wins ties."""
    if not len(tree):
        raise ValueError("empty tree")
    return tree.node(tree.nearest(q_rand))


def extend(env: CSpaceEnvironment, params: PlannerParams, q_near, q_rand) -> np.ndarray:
    """Step ``delta`` from ``q_near`` according to the strategy.

    For ``SampleBias`` the sample is assumed already shifted, so this is the
    plain step toward it.
    """
    if isinstance(q_near, TreeNode):
        q_near = q_near.config
    v = env.difference(q_rand, q_near)
    nv = math.sqrt(float(v @ v))
    if nv == 0.0:
        raise ValueError("q_rand coincides with q_near")
    s = params.strategy
    if isinstance(s, NearestNodeBias):
        direction = biased_extend_direction(env, s.potential, q_near, q_rand)
    else:
        direction = v / nv
    return env.steer(q_near, direction, params.delta)


def _ids(nodes) -> list[int]:
    return [n.id if isinstance(n, TreeNode) else int(n) for n in nodes]


def choose_parent(env: CSpaceEnvironment, tree: Tree, q_new, neighbors, resolution: float, dists=None):
    """Neighbour minimising the path cost of ``q_new``; lowest id on ties.

    Candidates whose edge to ``q_new`` crosses an impermeable obstacle are
    skipped. ``dists`` may carry precomputed distances to the neighbours.
    Returns ``(parent_id, c_path, edge_length)``, or None when every
    candidate edge is blocked.
    """
    ids = _ids(neighbors)
    if not ids:
        raise ValueError("choose_parent needs at least one neighbour")
    if dists is None:
        dists = [env.distance(q_new, tree.configs[i]) for i in ids]
    c_path, c_perm = tree.c_path, tree.c_perm
    cands = sorted((d + c_path[i] + c_perm[i], i, d) for i, d in zip(ids, dists))
    for cost, i, d in cands:
        if not env.edge_blocked(tree.configs[i], q_new, resolution):
            return i, cost, d
    return None


def rewire(env: CSpaceEnvironment, tree: Tree, new_id: int, neighbors, resolution: float, dists=None) -> int:
    """Reparent neighbours under ``new_id`` when that strictly lowers their cost.

    Neighbours are visited in ascending id. Ancestors of the new node can
    never improve (costs only grow away from the root), so only the parent
    needs an explicit skip.
    """
    q_new = tree.configs[new_id]
    c_new, p_new = tree.c_path[new_id], tree.c_perm[new_id]
    parent = tree.parent[new_id]
    ids = _ids(neighbors)
    if dists is None:
        dists = [env.distance(tree.configs[i], q_new) for i in ids]
    count = 0
    for i, d in zip(ids, dists):
        if i == new_id or i == parent or tree.parent[i] == new_id:
            continue
        # same summation order as Tree.add, so an unchanged route compares equal
        cand = d + c_new + p_new
        if cand < tree.c_path[i] and not env.edge_blocked(q_new, tree.configs[i], resolution):
            tree.reparent(i, new_id, d)
            count += 1
    return count


class GoalLink(NamedTuple):
    cost: float
    parent: int
    edge: float


def connect_goal(env: CSpaceEnvironment, tree: Tree, goal_radius: float, resolution: float, goal_cost: float = 0.0):
    """Cheapest node within ``goal_radius`` of the goal with a clear edge to it."""
    goal = env.goal
    ids, dists = tree.within(goal, goal_radius)
    cands = sorted((d + tree.c_path[i] + tree.c_perm[i] + goal_cost, i, d) for i, d in zip(ids, dists))
    for cost, i, d in cands:
        if not env.edge_blocked(tree.configs[i], goal, resolution):
            return GoalLink(cost, i, d)
    return None


class Planner:
    """One planning run. Owns its tree and RNG; not shared between threads."""

    def __init__(self, env: CSpaceEnvironment, params: PlannerParams):
        s = params.strategy
        if isinstance(s, (NearestNodeBias, SampleBias)):
            s = replace(s, potential=resolve_for(s.potential, env))
            params = replace(params, strategy=s)
        self.env = env
        self.params = params
        self.rng = np.random.default_rng(params.rng_seed)
        self.tree = Tree.for_env(env, capacity=min(params.max_iterations + 1, 8192))
        root_contact = env.classify(env.start)
        if root_contact.region is Region.IMPERMEABLE:
            raise ValueError("start configuration is impermeable")
        self.tree.add_root(env.start, root_contact.cost)
        self.goal_cost = env.classify(env.goal).cost
        self.iteration = 0

    def step(self) -> Optional[int]:
        """One iteration; returns the new node id or None if nothing was added."""
        env, p, tree = self.env, self.params, self.tree
        self.iteration += 1
        s = p.strategy
        q_rand = env.sample_free(self.rng)
        if isinstance(s, SampleBias):
            q_rand = bias_random_sample(env, s.potential, q_rand, s.step, s.iters)
        i_near = tree.nearest(q_rand)
        q_near = tree.configs[i_near]
        v = env.difference(q_rand, q_near)
        nv = math.sqrt(float(v @ v))
        if nv == 0.0:
            return None
        if isinstance(s, NearestNodeBias):
            direction = biased_extend_direction(env, s.potential, q_near, q_rand)
        else:
            direction = v / nv
        q_new = env.steer(q_near, direction, p.delta)
        contact = env.classify(q_new)
        if contact.region is Region.IMPERMEABLE:
            return None
        nbrs, dists = tree.within(q_new, p.neighbor_radius)
        if i_near not in nbrs:
            # r <= delta, so the node we stepped from can fall just outside
            k = bisect.bisect(nbrs, i_near)
            nbrs.insert(k, i_near)
            dists.insert(k, env.distance(q_new, q_near))
        chosen = choose_parent(env, tree, q_new, nbrs, p.edge_check_resolution, dists)
        if chosen is None:
            return None
        parent, _, edge = chosen
        new_id = tree.add(q_new, parent, contact.cost, edge)
        rewire(env, tree, new_id, nbrs, p.edge_check_resolution, dists)
        return new_id

    def best_solution(self) -> Optional[GoalLink]:
        return connect_goal(self.env, self.tree, self.params.goal_radius, self.params.edge_check_resolution, self.goal_cost)

    def run(self, keep_tree: bool = True) -> PlanResult:
        p = self.params
        checkpoints = set(p.checkpoints)
        history: dict[int, Optional[float]] = {}
        while self.iteration < p.max_iterations:
            self.step()
            if self.iteration in checkpoints:
                link = self.best_solution()
                history[self.iteration] = None if link is None else link.cost
        return self._result(history, keep_tree)

    def _result(self, history, keep_tree) -> PlanResult:
        env, tree = self.env, self.tree
        link = self.best_solution()
        kept = tree if keep_tree else None
        if link is None:
            return PlanResult(None, None, None, None, history, len(tree), self.params.rng_seed, kept)
        ids = tree.path_to_root(link.parent)
        configs = [tuple(float(v) for v in tree.configs[i]) for i in ids]
        configs.append(tuple(float(v) for v in env.goal))
        perms = [tree.c_perm[i] for i in ids] + [self.goal_cost]
        length = 0.0
        for a, b in zip(configs, configs[1:]):
            length += env.distance(a, b)
        return PlanResult(
            path=tuple(configs),
            path_length=length,
            n_collision=sum(1 for c in perms if c > 0),
            total_cost=link.cost,
            checkpoint_costs=history,
            tree_size=len(tree),
            rng_seed=self.params.rng_seed,
            tree=kept,
        )


def plan(env: CSpaceEnvironment, params: PlannerParams, keep_tree: bool = True) -> PlanResult:
    return Planner(env, params).run(keep_tree=keep_tree)


def validate_tree(env: CSpaceEnvironment, tree: Tree, tol: float = 1e-9) -> list[str]:
    """Structural and cost-consistency violations; empty for a healthy tree."""
    problems = []
    n = len(tree)
    roots = [i for i in range(n) if tree.parent[i] < 0]
    if len(roots) != 1:
        problems.append(f"expected exactly one root, found {len(roots)}")
    for i in range(n):
        p = tree.parent[i]
        if p >= n:
            problems.append(f"node {i}: parent {p} does not exist")
    # every parent chain must end at a root; each cycle is reported once
    reaches = [False] * n
    bad = [False] * n
    for i in range(n):
        walk, seen, j = [], set(), i
        while 0 <= j < n and not reaches[j] and not bad[j]:
            if j in seen:
                problems.append(f"node {j}: parent chain contains a cycle")
                break
            seen.add(j)
            walk.append(j)
            j = tree.parent[j]
        ok = j < 0 or (j < n and reaches[j])
        for k in walk:
            reaches[k] = ok
            bad[k] = not ok
    for i in range(n):
        p = tree.parent[i]
        if p < 0:
            if tree.c_path[i] != 0.0:
                problems.append(f"root {i}: c_path {tree.c_path[i]} != 0")
            continue
        if p >= n:
            continue
        expected = env.distance(tree.configs[i], tree.configs[p]) + tree.c_path[p] + tree.c_perm[p]
        if abs(tree.c_path[i] - expected) > tol:
            problems.append(f"node {i}: c_path {tree.c_path[i]!r} inconsistent with parent {p} (expected {expected!r})")
        if i not in tree.children[p]:
            problems.append(f"node {i}: missing from children of {p}")
    if n:
        Q = tree.configs[:n]
        status, cost = env.world.classify_groups(env.workspace_points(Q))
        for i in np.nonzero(status == 2)[0].tolist():
            problems.append(f"node {i}: configuration is impermeable")
        for i in range(n):
            if status[i] != 2 and float(cost[i]) != tree.c_perm[i]:
                problems.append(f"node {i}: c_perm {tree.c_perm[i]} != collision cost {float(cost[i])}")
    return problems
