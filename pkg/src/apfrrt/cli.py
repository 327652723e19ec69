"""Command-line front end.

Subcommands::

    apfrrt plan --scenario wall --profile apf_b1 --seed 3 --out run/ --svg run/plan.svg
    apfrrt bench --scenario wall --out results/ [--trials 10] [--workers 4]
    apfrrt render --scenario wall --profile apf_b1 --seed 3 --svg wall.svg --layers world,path
    apfrrt validate-scenario --scenario my.scn [--smoke 50]

``--scenario`` takes a file path or the name of a shipped scenario.
Exit codes: 0 success, 2 no solution found, 3 configuration error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from apfrrt import bench
from apfrrt.planner import plan
from apfrrt.render import RenderSpec, parse_layers, render_svg
from apfrrt.scenario import ScenarioError, ScenarioFile, load_scenario, shipped_path, shipped_scenarios

EXIT_OK = 0
EXIT_NO_SOLUTION = 2
EXIT_CONFIG = 3
EXIT_IO = 4


class _ConfigError(Exception):
    pass


def _load(ref: str) -> ScenarioFile:
    p = Path(ref)
    if not p.exists() and ref in shipped_scenarios():
        p = shipped_path(ref)
    return load_scenario(p)


def _profile(scen: ScenarioFile, name):
    if name is None:
        if not scen.profiles:
            raise _ConfigError(f"scenario {scen.name!r} declares no profiles")
        return scen.profiles[0]
    try:
        return scen.profile(name)
    except KeyError as exc:
        raise _ConfigError(exc.args[0]) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _run_plan(args, scen: ScenarioFile):
    prof = _profile(scen, args.profile)
    env = scen.environment(prof)
    params = scen.planner_params(prof, seed=args.seed, checkpoints=())
    if args.iterations is not None:
        params = replace(params, max_iterations=args.iterations, checkpoints=(args.iterations,))
    return prof, env, params, plan(env, params, keep_tree=True)


def _svg(args, scen, prof, env, result) -> str:
    spec = RenderSpec(args.width, args.width, parse_layers(args.layers))
    pot = scen.potential_for(prof) if prof.strategy != "none" else scen.potential
    if scen.kind != "point2d":
        pot = None
    return render_svg(env, result.tree, result.path, pot, spec)


def cmd_plan(args) -> int:
    scen = _load(args.scenario)
    prof, env, params, result = _run_plan(args, scen)
    rec = result.to_record(params, scenario=scen.name, profile=prof.name)
    text = _dump(rec)
    if args.out:
        _write(Path(args.out) / "record.json", text)
    else:
        sys.stdout.write(text)
    if args.svg:
        _write(Path(args.svg), _svg(args, scen, prof, env, result))
    if not result.solved:
        print(f"no solution within {params.max_iterations} iterations", file=sys.stderr)
        return EXIT_NO_SOLUTION
    return EXIT_OK


def cmd_render(args) -> int:
    if not args.svg:
        raise _ConfigError("render needs --svg PATH")
    scen = _load(args.scenario)
    prof, env, params, result = _run_plan(args, scen)
    _write(Path(args.svg), _svg(args, scen, prof, env, result))
    return EXIT_OK if result.solved else EXIT_NO_SOLUTION


def bench_outputs(scen: ScenarioFile, spec: bench.ExperimentSpec, results: dict) -> dict:
    """File name -> text for everything ``bench`` writes. Pure and deterministic."""
    lines = []
    for prof in spec.profiles:
        for t, r in enumerate(results[prof.label]):
            rec = r.to_record(prof.params, scenario=scen.name, profile=prof.label, trial=t)
            rec["params"]["rng_seed"] = spec.seed(t)
            lines.append(json.dumps(rec, sort_keys=True))
    cps = spec.checkpoints
    rows = bench.aggregate(results, cps)
    labels = {p.label for p in spec.profiles}
    tests = []
    for a, b in scen.experiment.comparisons:
        if a not in labels or b not in labels:
            continue
        for c in cps:
            try:
                tests.append(bench.compare(results, a, b, c))
            except ValueError:
                pass  # fewer than two solved trials on one side
    text, machine = bench.emit_table(rows, tests)
    ttests = "".join(f"{t.labels[0]} vs {t.labels[1]} @ {t.checkpoint}: t = {t.t!r}, df = {t.df!r}, p = {t.p!r}\n" for t in tests)
    meta = {
        "scenario": scen.name,
        "trials": spec.trials,
        "base_seed": spec.base_seed,
        "seeding": "paired: trial i of every profile uses seed base_seed + i",
        "profiles": [p.label for p in spec.profiles],
        "checkpoints": list(cps),
    }
    return {
        "records.jsonl": "\n".join(lines) + "\n",
        "table.txt": text,
        "table.json": machine,
        "ttests.txt": ttests,
        "experiment.json": _dump(meta),
    }


def cmd_bench(args) -> int:
    scen = _load(args.scenario)
    profiles = args.profiles.split(",") if args.profiles else None
    try:
        spec = scen.experiment_spec(trials=args.trials, profiles=profiles)
    except KeyError as exc:
        raise _ConfigError(exc.args[0]) from None
    except ValueError as exc:
        raise _ConfigError(str(exc)) from None
    results = bench.run_experiment(spec, workers=args.workers)
    out = Path(args.out)
    files = bench_outputs(scen, spec, results)
    for name, text in files.items():
        _write(out / name, text)
    sys.stdout.write(files["table.txt"])
    bad = [(lab, t) for lab, rs in results.items() for t, r in enumerate(rs) if r.tree_violations]
    if bad:
        print(f"tree validation failed for {bad}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    scen = _load(args.scenario)
    print(f"{scen.name}: {scen.kind}, {len(scen.obstacles)} obstacles, profiles {[p.name for p in scen.profiles]}")
    for prof in scen.profiles:
        scen.environment(prof)
        params = scen.planner_params(prof, checkpoints=())
        if args.smoke:
            params = replace(params, max_iterations=args.smoke, checkpoints=(args.smoke,))
            r = plan(scen.environment(prof), params, keep_tree=False)
            print(f"  {prof.name}: {args.smoke} iterations, tree size {r.tree_size}, solved {r.solved}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="apfrrt", description="Cost-aware RRT* with potential-field bias")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario file or shipped scenario name")

    def planning(p):
        common(p)
        p.add_argument("--profile", help="profile name (default: first declared)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--iterations", type=int, help="override max_iterations")
        p.add_argument("--svg", help="write an SVG picture here")
        p.add_argument("--layers", default="world,tree,path", help="comma list of world,tree,path,quiver")
        p.add_argument("--width", type=int, default=600, help="canvas size in pixels")

    p = sub.add_parser("plan", help="run one plan")
    planning(p)
    p.add_argument("--out", help="directory for record.json (default: print to stdout)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("render", help="plan and draw the result")
    planning(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="run the scenario's experiment")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--profiles", help="comma list of profiles to run (default: all)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate-scenario", help="parse a scenario and optionally smoke-plan it")
    common(p)
    p.add_argument("--smoke", type=int, default=0, metavar="N", help="run N iterations per profile")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, _ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
