"""Acceptance suite: the ten headline criteria, each printing a PASS/FAIL line.

The wall and arm experiments run once per session through the ``bench``
command (the full 100-trial experiments take several minutes).
"""

import json
import math
import os
import statistics
import time
from dataclasses import replace

import numpy as np
import pytest

from apfrrt.apf import PotentialParams, lambda_weight, potential_gradient, total_potential
from apfrrt.bench import ExperimentSpec, Profile, run_experiment, welch_t_test
from apfrrt.cli import main
from apfrrt.geometry import Region
from apfrrt.planner import choose_parent, rewire, validate_tree
from apfrrt.scenario import load_shipped
from tests._oracles import brute_choose_parent, brute_rewire, costs_from_scratch, oracle_env, random_frozen_tree
from tests._report import report
from tests.test_apf import clutter_env

WORKERS = max(1, min(4, os.cpu_count() or 1))
WALL_PROFILES = ("rrtstar", "apf_b1", "apf_b15", "apf_b2", "prrtstar")


class BenchRun:
    def __init__(self, out, seconds):
        self.out = out
        self.seconds = seconds
        self.table = json.loads((out / "table.json").read_text())
        self.records = [json.loads(x) for x in (out / "records.jsonl").read_text().splitlines()]

    def mean(self, label, checkpoint):
        row = next(r for r in self.table["rows"] if r["label"] == label)
        return next(c["mean"] for c in row["cells"] if c["checkpoint"] == checkpoint)

    def costs(self, label, checkpoint):
        vals = [r["checkpoint_costs"][str(checkpoint)] for r in self.records if r["profile"] == label]
        return [v for v in vals if v is not None]

    def welch(self, a, b, checkpoint):
        return welch_t_test(self.costs(a, checkpoint), self.costs(b, checkpoint), (a, b), checkpoint)


def bench(tmp_path_factory, scenario, *extra):
    out = tmp_path_factory.mktemp(scenario)
    t0 = time.perf_counter()
    rc = main(["bench", "--scenario", scenario, "--out", str(out), "--workers", str(WORKERS), *extra])
    assert rc == 0
    return BenchRun(out, time.perf_counter() - t0)


@pytest.fixture(scope="module")
def wall(tmp_path_factory):
    return bench(tmp_path_factory, "wall")


@pytest.fixture(scope="module")
def arm(tmp_path_factory):
    return bench(tmp_path_factory, "arm")


def fmt_means(run, labels, checkpoint):
    return ", ".join(f"{lab}={run.mean(lab, checkpoint):.2f}" for lab in labels)


def test_c1_iteration_trend(wall):
    cps = wall.table["checkpoints"]
    assert cps == [1000, 2500, 5000]
    bad = []
    for lab in WALL_PROFILES:
        m = [wall.mean(lab, c) for c in cps]
        if not all(a > b for a, b in zip(m, m[1:])):
            bad.append(f"{lab} {m}")
    ok = not bad and wall.seconds <= 1800
    detail = "; ".join(f"{lab}: " + " > ".join(f"{wall.mean(lab, c):.1f}" for c in cps) for lab in WALL_PROFILES)
    report(1, ok, f"means fall with iterations ({detail}); bench took {wall.seconds / 60:.1f} min")
    assert not bad, bad
    assert wall.seconds <= 1800


def test_c2_potential_bias_benefit(wall):
    worse = [c for c in (1000, 2500, 5000) if not wall.mean("apf_b1", c) < wall.mean("rrtstar", c)]
    t = wall.welch("apf_b1", "rrtstar", 5000)
    ok = not worse and t.p < 0.01
    report(2, ok, f"apf_b1 < rrtstar at every checkpoint; @5000 {fmt_means(wall, ('apf_b1', 'rrtstar'), 5000)}, "
           f"t({t.df:.1f}) = {t.t:.2f}, p = {t.p:.2e}")
    assert not worse and t.p < 0.01


def test_c3_baseline_superiority(wall):
    t = wall.welch("apf_b1", "prrtstar", 5000)
    ok = wall.mean("apf_b1", 5000) < wall.mean("prrtstar", 5000) and t.p < 0.05
    report(3, ok, f"@5000 {fmt_means(wall, ('apf_b1', 'prrtstar'), 5000)}, t({t.df:.1f}) = {t.t:.2f}, p = {t.p:.2e}")
    assert ok


def test_c4_beta_ordering(wall):
    m = {lab: wall.mean(lab, 5000) for lab in WALL_PROFILES}
    ordered = m["apf_b1"] <= min(m["apf_b15"], m["apf_b2"]) and max(m["apf_b15"], m["apf_b2"]) < m["rrtstar"]
    notes = []
    for a, b in (("apf_b1", "apf_b15"), ("apf_b1", "apf_b2"), ("apf_b15", "rrtstar"), ("apf_b2", "rrtstar")):
        t = wall.welch(a, b, 5000)
        tag = "confirmed" if t.p < 0.05 else "environment-sensitive"
        notes.append(f"{a} vs {b}: {m[a]:.2f} vs {m[b]:.2f}, p = {t.p:.2e} ({tag})")
    report(4, ordered, "; ".join(notes))
    assert ordered, m


def test_c5_c_perm_behaviour(wall):
    scen = load_shipped("wall")
    prof = scen.profile("apf_b1")
    cheap = replace(prof, c_perm=1.0)
    spec = ExperimentSpec(
        "wall-c1", (Profile("apf_b1_c1", scen.environment(cheap), scen.planner_params(cheap)),), 50, 0
    )
    low = [r for r in run_experiment(spec, WORKERS)["apf_b1_c1"] if r.solved]
    high = [r for r in wall.records if r["profile"] == "apf_b1" and r["trial"] < 50 and r["solved"]]
    nc_hi = statistics.median(r["n_collision"] for r in high)
    nc_lo = statistics.median(r.n_collision for r in low)
    len_hi = statistics.median(r["path_length"] for r in high)
    len_lo = statistics.median(r.path_length for r in low)
    ok = nc_hi < nc_lo and len_hi > len_lo
    report(5, ok, f"median n_collision {nc_hi} (C_perm=100) vs {nc_lo} (C_perm=1); "
           f"median path_length {len_hi:.2f} vs {len_lo:.2f}; solved {len(high)}/50 and {len(low)}/50")
    assert ok


def test_c6_arm_trend(arm):
    scen = load_shipped("arm")
    assert scen.planner.delta == 0.1 and scen.experiment.checkpoints == (1500,)
    assert all(o.impermeable or o.permeability.cost == 100 for o in scen.obstacles)
    assert scen.potential_for(scen.profile("apf")).beta == 1.0
    pr = scen.profile("prrtstar")
    assert (pr.step, pr.iters) == (0.1, 2)
    t_r = arm.welch("apf", "rrtstar", 1500)
    t_p = arm.welch("apf", "prrtstar", 1500)
    m = {lab: arm.mean(lab, 1500) for lab in ("rrtstar", "apf", "prrtstar")}
    ok = m["apf"] < m["rrtstar"] and m["apf"] < m["prrtstar"] and t_r.p < 0.05 and t_p.p < 0.05
    report(6, ok, f"@1500 {fmt_means(arm, ('rrtstar', 'apf', 'prrtstar'), 1500)}; "
           f"vs rrtstar t({t_r.df:.1f}) = {t_r.t:.2f}, p = {t_r.p:.2e}; "
           f"vs prrtstar t({t_p.df:.1f}) = {t_p.t:.2f}, p = {t_p.p:.2e}")
    assert ok


def test_c7_tree_invariants(wall, arm):
    counts = []
    for run in (wall, arm):
        checked = [r["tree_violations"] for r in run.records if "tree_violations" in r]
        counts.append((len(checked), sum(checked)))
    ok = all(n == 20 and v == 0 for n, v in counts)
    report(7, ok, f"validated trees (count, violations): wall {counts[0]}, arm {counts[1]}")
    assert ok


def test_c8_oracle_equivalence():
    env = oracle_env()
    rng = np.random.default_rng(8)
    trees = 0
    while trees < 1000:
        t = random_frozen_tree(env, rng)
        q = rng.integers(0, 11, 2).astype(float)
        if len(t) < 2 or env.classify(q).region is Region.IMPERMEABLE:
            continue
        r = float(rng.uniform(1, 8))
        ids, _ = t.within(q, r)
        cands = ids or [t.nearest(q)]
        got = choose_parent(env, t, q, cands, 0.05)
        assert (None if got is None else got[:2]) == brute_choose_parent(env, t, q, cands, 0.05)
        new_id = int(rng.integers(1, len(t)))
        nb, _ = t.within(t.configs[new_id], r)
        configs = np.array(t.configs[: len(t)])
        want_parents, want_n = brute_rewire(env, t.parent, t.c_perm, configs, new_id, nb, 0.05)
        assert rewire(env, t, new_id, nb, 0.05) == want_n
        assert t.parent == want_parents
        assert t.c_path == costs_from_scratch(env, t)
        assert validate_tree(env, t) == []
        trees += 1
    report(8, True, f"choose_parent and rewire match brute force on {trees} random trees of <= 20 nodes")


def test_c9_apf_numerics():
    env = clutter_env()
    p = PotentialParams()
    rng = np.random.default_rng(9)
    worst, n = 0.0, 0
    while n < 1000:
        q = rng.uniform(0, 100, 2)
        dp, di = env.clearance_per_class(q)
        if min(dp, di) <= 1e-4 or env.goal_distance(q) < 1e-3:
            continue
        # the repulsion varies on the scale of the clearance, so the step shrinks with it
        h = min(1e-5, 1e-4 * min(dp, di))
        g = potential_gradient(env, p, q)
        fd = np.array([(total_potential(env, p, q + h * e) - total_potential(env, p, q - h * e)) / (2 * h) for e in np.eye(2)])
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
        n += 1
    lam_ok = all(
        lambda_weight(PotentialParams(beta=b, f_att_max=640.0), [640.0, 0.0], [0.0, 0.0]) == 1.0 / (b + 1.0)
        for b in (1.0, 1.5, 2.0)
    )
    lam_ok &= lambda_weight(PotentialParams(f_att_max=640.0), [10.0, 0.0], [-10.0, 0.0]) == 1.0
    lam_ok &= lambda_weight(PotentialParams(f_att_max=640.0), [10.0, 0.0], [-25.0, 4.0]) == 1.0
    ok = worst <= 1e-6 and lam_ok
    report(9, ok, f"worst gradient relative error {worst:.2e} over {n} clear points; lambda identities exact: {lam_ok}")
    assert worst <= 1e-6
    assert lam_ok


def test_c10_determinism(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert main(["bench", "--scenario", "wall", "--out", str(d), "--trials", "3"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    ok = outs[0] == outs[1] and {"table.txt", "table.json", "records.jsonl"} <= set(outs[0])
    report(10, ok, f"two bench invocations gave byte-identical {', '.join(sorted(outs[0]))}")
    assert ok
