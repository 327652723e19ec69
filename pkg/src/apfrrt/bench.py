"""Seeded multi-trial experiments, aggregate tables and Welch t-tests."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from apfrrt.environments import CSpaceEnvironment
from apfrrt.planner import PlannerParams, PlanResult, plan, validate_tree

UNDEFINED = "—"


class Profile(NamedTuple):
    label: str
    env: CSpaceEnvironment
    params: PlannerParams


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    profiles: tuple
    trials: int
    base_seed: int = 0
    # number of randomly chosen trials whose final trees are validated
    validate_trees: int = 0

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("at least two trials are needed for a standard error")
        if not self.profiles:
            raise ValueError("no profiles to run")
        labels = [p.label for p in self.profiles]
        if len(set(labels)) != len(labels):
            raise ValueError("profile labels must be unique")
        cps = {p.params.checkpoints for p in self.profiles}
        if len(cps) != 1:
            raise ValueError("all profiles must share the same checkpoints")

    @property
    def checkpoints(self) -> tuple:
        return self.profiles[0].params.checkpoints

    def seed(self, trial: int) -> int:
        return self.base_seed + trial


def _validation_picks(spec: ExperimentSpec) -> set:
    pairs = [(k, t) for k in range(len(spec.profiles)) for t in range(spec.trials)]
    n = min(spec.validate_trees, len(pairs))
    if n <= 0:
        return set()
    rng = np.random.default_rng(spec.base_seed)
    idx = rng.choice(len(pairs), size=n, replace=False)
    return {pairs[i] for i in sorted(idx.tolist())}


def _run_one(job):
    env, params, check = job
    r = plan(env, params, keep_tree=check)
    if check:
        return replace(r, tree=None, tree_violations=len(validate_tree(env, r.tree)))
    return r


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> dict:
    """All trials of all profiles: ``{label: [PlanResult, ...]}`` in trial order.

    Trial ``i`` of every profile uses seed ``base_seed + i``. With
    ``workers > 1`` trials run in separate processes; results are identical.
    """
    picks = _validation_picks(spec)
    jobs = []
    for k, prof in enumerate(spec.profiles):
        for t in range(spec.trials):
            params = replace(prof.params, rng_seed=spec.seed(t))
            jobs.append((prof.env, params, (k, t) in picks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        flat = [_run_one(j) for j in jobs]
    out = {}
    for k, prof in enumerate(spec.profiles):
        out[prof.label] = flat[k * spec.trials:(k + 1) * spec.trials]
    return out


class Cell(NamedTuple):
    mean: Optional[float]
    se: Optional[float]
    n: int
    solve_rate: float


@dataclass(frozen=True)
class AggregateRow:
    label: str
    checkpoints: tuple
    cells: tuple
    trials: int

    def cell(self, checkpoint: int) -> Cell:
        return self.cells[self.checkpoints.index(checkpoint)]


def mean_se(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error (sample sd with n-1, over sqrt n).

    Sums are exactly rounded, so the result does not depend on input order.
    """
    n = len(values)
    if n < 2:
        raise ValueError("need at least two values")
    m = math.fsum(values) / n
    var = math.fsum((v - m) ** 2 for v in values) / (n - 1)
    return m, math.sqrt(var) / math.sqrt(n)


def costs_at(results: Sequence[PlanResult], checkpoint: int) -> list[float]:
    return [r.checkpoint_costs[checkpoint] for r in results if r.checkpoint_costs.get(checkpoint) is not None]


def aggregate(results: dict, checkpoints: Sequence[int]) -> list[AggregateRow]:
    """Per-profile, per-checkpoint mean and standard error over solved trials.

    Unsolved trials only lower the solve rate. Cells with fewer than two
    solved trials have no mean or standard error.
    """
    rows = []
    cps = tuple(checkpoints)
    for label, rs in results.items():
        cells = []
        for c in cps:
            vals = costs_at(rs, c)
            rate = len(vals) / len(rs) if rs else 0.0
            if len(vals) >= 2:
                m, se = mean_se(vals)
                cells.append(Cell(m, se, len(vals), rate))
            else:
                cells.append(Cell(None, None, len(vals), rate))
        rows.append(AggregateRow(label, cps, tuple(cells), len(rs)))
    return rows


class TTestReport(NamedTuple):
    labels: tuple
    checkpoint: Optional[int]
    t: float
    df: float
    p: float


def welch_t_test(a: Sequence[float], b: Sequence[float], labels=("a", "b"), checkpoint=None) -> TTestReport:
    """Unequal-variance two-sample t-test, two-tailed.

    When both samples have zero variance the statistic is 0 (p = 1) for equal
    means and infinite (p = 0) otherwise, with df = n_a + n_b - 2.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least two values")
    ma, mb = math.fsum(a) / na, math.fsum(b) / nb
    va = math.fsum((x - ma) ** 2 for x in a) / (na - 1)
    vb = math.fsum((x - mb) ** 2 for x in b) / (nb - 1)
    sa, sb = va / na, vb / nb
    s = sa + sb
    if s == 0.0:
        if ma == mb:
            return TTestReport(tuple(labels), checkpoint, 0.0, float(na + nb - 2), 1.0)
        return TTestReport(tuple(labels), checkpoint, math.copysign(math.inf, ma - mb), float(na + nb - 2), 0.0)
    t = (ma - mb) / math.sqrt(s)
    # written with variance shares so tiny variances do not underflow
    ra, rb = sa / s, sb / s
    df = 1.0 / (ra * ra / (na - 1) + rb * rb / (nb - 1))
    p = float(2.0 * stats.t.sf(abs(t), df))
    return TTestReport(tuple(labels), checkpoint, t, df, min(1.0, p))


def compare(results: dict, a: str, b: str, checkpoint: int) -> TTestReport:
    return welch_t_test(costs_at(results[a], checkpoint), costs_at(results[b], checkpoint), (a, b), checkpoint)


def format_cell(cell: Cell) -> str:
    if cell.mean is None:
        return UNDEFINED
    return f"{cell.mean:.2f} ({cell.se:.2f})"


def _fmt_p(p: float) -> str:
    return "p < 0.001" if p < 0.001 else f"p = {p:.3f}"


def emit_table(rows: Sequence[AggregateRow], tests: Sequence[TTestReport] = ()) -> tuple[str, str]:
    """Plain-text and JSON renditions of the results table.

    Cells read ``mean (standard error)``; rows keep declaration order.
    """
    if not rows:
        raise ValueError("no rows to emit")
    cps = rows[0].checkpoints
    header = ["Algorithm"] + [f"{c} iterations" for c in cps]
    body = [[r.label] + [format_cell(c) for c in r.cells] for r in rows]
    rates = [[r.label] + [f"{c.solve_rate:.2f}" for c in r.cells] for r in rows]
    widths = [max(len(line[i]) for line in [header] + body + rates) for i in range(len(header))]

    def line(cols):
        return " | ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()

    sep = "-+-".join("-" * w for w in widths)
    out = [line(header), sep] + [line(b) for b in body]
    out += ["", "Solve rate", sep] + [line(r) for r in rates]
    if tests:
        out += ["", "Welch two-tailed t-tests"]
        for t in tests:
            out.append(f"{t.labels[0]} vs {t.labels[1]} @ {t.checkpoint}: t({t.df:.2f}) = {t.t:.2f}, {_fmt_p(t.p)}")
    text = "\n".join(out) + "\n"

    machine = {
        "checkpoints": list(cps),
        "rows": [
            {
                "label": r.label,
                "trials": r.trials,
                "cells": [
                    {"checkpoint": c, "mean": cell.mean, "se": cell.se, "n": cell.n, "solve_rate": cell.solve_rate}
                    for c, cell in zip(cps, r.cells)
                ],
            }
            for r in rows
        ],
        "tests": [
            {"a": t.labels[0], "b": t.labels[1], "checkpoint": t.checkpoint, "t": t.t, "df": t.df, "p": t.p}
            for t in tests
        ],
    }
    return text, json.dumps(machine, indent=2, sort_keys=True) + "\n"
