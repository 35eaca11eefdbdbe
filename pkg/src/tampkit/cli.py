"""Command-line entry points: plan, bench-scaling, residuals, enumerate.

Every command reads a scenario file, runs the pipeline, and writes plain-text
and CSV artifacts. Outputs are deterministic for a given scenario and seed:
floats are printed with fixed formats and nothing machine-dependent enters
the plan text or trajectory/residual CSVs (benchmark wall-clock columns are
the one documented exception).

Exit status: 0 on success, 2 when no feasible plan exists, 1 on input errors
(missing or malformed files, unknown actions, bad flags). Set the
``TAMPKIT_LOG`` environment variable (debug/info/warning/error) to control
log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
import time

import numpy as np

from . import scenario as scenario_mod
from .errors import NoSolution, ScenarioError, TampkitError
from .fixtures.generators import decoupled_scene, decoupled_symbolic
from .search.search import enumerate_solutions
from .search.solver import ProblemSolution, decompose_problem, robot_entities, \
    solve_problem, subtask_actions
from .symbolic.ground import ground
from .trajopt.admm import AdmmConfig, write_residual_csv
from .trajopt.spec import dump_trajectory_csv

log = logging.getLogger("tampkit.cli")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NO_SOLUTION = 2


def _setup_logging() -> None:
    level = os.environ.get("TAMPKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_problem(scn, count: int | None = None):
    """Scenario -> (domain, problem, scene). Handles generated templates."""
    gen = scn.data.get("generator")
    if gen is None:
        domain, problem = scenario_mod.load_symbolic(scn)
        scene = scenario_mod.build_scene(scn)
        return domain, problem, scene
    if gen.get("name") != "decoupled":
        raise ScenarioError(f"unknown generator {gen.get('name')!r}")
    P = int(count if count is not None else gen.get("count", 3))
    blocked = int(gen.get("blocked_pairs", 0))
    domain, problem = decoupled_symbolic(P, blocked)
    scene = decoupled_scene(P, scenario_mod.build_arm(scn))
    return domain, problem, scene


def plan_lines(sol: ProblemSolution) -> list[str]:
    return [f"{s.action} | {s.j_path:.6f} | {s.j_discrete:.6f} | {s.cumulative:.6f}"
            for s in sol.steps]


def write_plan_artifacts(sol: ProblemSolution, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "plan.txt"), "w") as f:
        for line in plan_lines(sol):
            f.write(line + "\n")
    for i, s in enumerate(sol.steps):
        dump_trajectory_csv(s.bound.spec, s.trajectory,
                            os.path.join(out_dir, f"traj_{i:02d}_{s.action.name}.csv"))
        if s.residuals:
            write_residual_csv(
                s.residuals,
                os.path.join(out_dir, f"residuals_{i:02d}_{s.action.name}.csv"))


def summary_dict(sol: ProblemSolution, name: str, seed: int) -> dict:
    per_subtask = []
    for st, ssol in zip(sol.subtasks, sol.subtask_solutions):
        per_subtask.append({
            "id": st.id,
            "entities": sorted(st.entities),
            "actions": [str(s.action) for s in ssol.steps],
            "cost": round(ssol.cost, 9),
        })
    return {
        "scenario": name,
        "seed": seed,
        "total_cost": round(sol.cost, 9),
        "steps": [
            {"action": str(s.action), "edge_cost": round(s.j_path, 9),
             "discrete_cost": round(s.j_discrete, 9),
             "cumulative": round(s.cumulative, 9)}
            for s in sol.steps
        ],
        "subtasks": per_subtask,
        "stats": {
            "expansions": sol.stats.expansions,
            "ddp_calls": sol.stats.ddp_calls,
            "ik_failures": sol.stats.ik_failures,
            "cache_hits": sol.stats.cache_hits,
            "refinements": sol.stats.refinements,
        },
    }


def cmd_plan(args) -> int:
    scn = scenario_mod.load(args.scenario)
    domain, problem, scene = _load_problem(scn)
    model = scenario_mod.build_base_model(scn)
    config = scenario_mod.build_config(scn, seed=args.seed)
    sol = solve_problem(domain, problem, scene, model, config,
                        decompose=not args.no_decompose)
    write_plan_artifacts(sol, args.out)
    seed = config.seed
    with open(os.path.join(args.out, "summary.json"), "w") as f:
        json.dump(summary_dict(sol, scn.name, seed), f, indent=2, sort_keys=True)
        f.write("\n")
    for line in plan_lines(sol):
        print(line)
    print(f"total cost {sol.cost:.6f}")
    return EXIT_OK


def cmd_bench_scaling(args) -> int:
    scn = scenario_mod.load(args.scenario)
    if "generator" not in scn.data:
        raise ScenarioError(
            f"{args.scenario}: bench-scaling needs a generated scenario template")
    model = scenario_mod.build_base_model(scn)
    rows = []
    for P in range(1, args.p_max + 1):
        domain, problem, scene = _load_problem(scn, count=P)
        row = {"P": P}
        for mode, decompose in (("cg", True), ("flat", False)):
            config = scenario_mod.build_config(scn, seed=args.seed)
            config.refine = False  # stage-1 edge costs only
            t0 = time.perf_counter()
            sol = solve_problem(domain, problem, scene, model, config,
                                decompose=decompose)
            wall_ms = 1000.0 * (time.perf_counter() - t0)
            row[f"expansions_{mode}"] = sol.stats.expansions
            row[f"ddp_calls_{mode}"] = sol.stats.ddp_calls
            row[f"wall_ms_{mode}"] = wall_ms
        rows.append(row)
        log.info("P=%d cg=%d flat=%d", P, row["expansions_cg"], row["expansions_flat"])
    header = ["P", "expansions_cg", "expansions_flat", "ddp_calls_cg",
              "ddp_calls_flat", "wall_ms_cg", "wall_ms_flat"]
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([row["P"], row["expansions_cg"], row["expansions_flat"],
                        row["ddp_calls_cg"], row["ddp_calls_flat"],
                        f"{row['wall_ms_cg']:.3f}", f"{row['wall_ms_flat']:.3f}"])
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def cmd_residuals(args) -> int:
    scn = scenario_mod.load(args.scenario)
    domain, problem, scene = _load_problem(scn)
    model = scenario_mod.build_base_model(scn)
    config = scenario_mod.build_config(scn, seed=args.seed)
    config.refine = False  # stage-1 plan; refinement is run below on one edge
    sol = solve_problem(domain, problem, scene, model, config,
                        decompose=not args.no_decompose)
    step = next((s for s in sol.steps if s.action.name == args.action), None)
    if step is None:
        names = sorted({s.action.name for s in sol.steps})
        raise ScenarioError(
            f"no {args.action!r} edge in the plan (plan uses: {', '.join(names)})")
    from .dynamics.api import ManipulatorDynamics
    from .trajopt.admm import admm_solve
    cfg = config.admm
    if cfg.stage != 2:
        cfg = AdmmConfig(**{**cfg.__dict__, "stage": 2})
    dyn = ManipulatorDynamics(step.bound.spec.model, step.bound.spec.h)
    _, history = admm_solve(step.bound.spec, dyn, step.trajectory, cfg)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_residual_csv(history, args.out)
    last = history[-1]
    print(f"{args.action}: {len(history)} iterations, final residuals "
          f"r_x={last.r_x:.3e} r_u={last.r_u:.3e} r_torque={last.r_torque:.3e} "
          f"r_velocity={last.r_velocity:.3e} r_contact={last.r_contact:.3e}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    if args.k < 1:
        raise ScenarioError("--k must be at least 1")
    scn = scenario_mod.load(args.scenario)
    domain, problem, scene = _load_problem(scn)
    model = scenario_mod.build_base_model(scn)
    config = scenario_mod.build_config(scn, seed=args.seed)
    config.refine = False  # stage-1 costs, matching the cost-study protocol
    grounded = ground(domain, problem)
    if config.allowed_actions is not None:
        grounded = [a for a in grounded if a.name in config.allowed_actions]
    robots = robot_entities(problem)
    if args.no_decompose:
        from .causal.graph import Subtask
        entities = frozenset(n for n in problem.entities if n not in robots)
        subtasks = [Subtask(0, frozenset(), problem.goal, entities)]
    else:
        subtasks = decompose_problem(domain, problem, scene, grounded)

    # Per-subtask alternatives are enumerated from the state reached by the
    # best alternative of every preceding subtask; combined sequences sum
    # member costs (an approximation for sequences that deviate early).
    state = problem.init
    cur_scene = scene
    arm_state = np.concatenate([scene.q_home, np.zeros(scene.arm.n)])
    per_subtask = []
    for st in subtasks:
        actions = subtask_actions(grounded, st, robots)
        sols = enumerate_solutions(actions, state, st.goal_atoms, cur_scene,
                                   arm_state, model, config, args.k)
        if not sols:
            raise NoSolution(f"no feasible plan for subtask {st.id}",
                             subtask_id=st.id)
        per_subtask.append(sols)
        state = sols[0].final_state
        cur_scene = sols[0].final_scene
        arm_state = sols[0].final_arm_state

    combos = sorted(
        itertools.product(*[range(len(s)) for s in per_subtask]),
        key=lambda ix: (sum(per_subtask[j][i].cost for j, i in enumerate(ix)), ix),
    )[:args.k]
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sequences.csv")
    txt_path = os.path.join(args.out, "sequences.txt")
    with open(csv_path, "w", newline="") as fc, open(txt_path, "w") as ft:
        w = csv.writer(fc)
        w.writerow(["seq", "idx", "action", "edge_cost", "discrete_cost",
                    "cumulative"])
        for rank, ix in enumerate(combos):
            cumulative = 0.0
            total = sum(per_subtask[j][i].cost for j, i in enumerate(ix))
            ft.write(f"# sequence {rank} | total {total:.6f}\n")
            idx = 0
            for j, i in enumerate(ix):
                for s in per_subtask[j][i].steps:
                    cumulative += s.j_path + s.j_discrete
                    w.writerow([rank, idx, str(s.action), f"{s.j_path:.6f}",
                                f"{s.j_discrete:.6f}", f"{cumulative:.6f}"])
                    ft.write(f"{s.action} | {s.j_path:.6f} | {s.j_discrete:.6f}"
                             f" | {cumulative:.6f}\n")
                    idx += 1
            ft.write("\n")
    print(f"wrote {len(combos)} sequences to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tampkit",
        description="Task-and-motion planning over a planar arm with contact")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help, out_default=None):
        sp.add_argument("--scenario", required=True, help="scenario YAML path")
        kwargs = {"help": out_help}
        if out_default is None:
            kwargs["required"] = True
        else:
            kwargs["default"] = out_default
        sp.add_argument("--out", **kwargs)
        sp.add_argument("--seed", type=int, default=None,
                        help="override the scenario's solver seed")

    sp = sub.add_parser("plan", help="solve a scenario and write plan artifacts")
    common(sp, "output directory for plan.txt, CSVs, summary.json")
    sp.add_argument("--no-decompose", action="store_true",
                    help="solve the whole goal as one search (no causal split)")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("bench-scaling",
                        help="decomposed-vs-flat search growth benchmark")
    common(sp, "output CSV path")
    sp.add_argument("--p-max", type=int, default=5,
                    help="largest object count (runs P=1..p_max)")
    sp.set_defaults(func=cmd_bench_scaling)

    sp = sub.add_parser("residuals",
                        help="run one plan edge through constraint refinement")
    common(sp, "output residual CSV path")
    sp.add_argument("--action", required=True,
                    help="action schema name to refine (first matching edge)")
    sp.add_argument("--no-decompose", action="store_true")
    sp.set_defaults(func=cmd_residuals)

    sp = sub.add_parser("enumerate",
                        help="list the k cheapest goal-reaching sequences")
    common(sp, "output directory for sequences.txt/.csv")
    sp.add_argument("--k", type=int, default=4, help="number of sequences")
    sp.add_argument("--no-decompose", action="store_true")
    sp.set_defaults(func=cmd_enumerate)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoSolution as exc:
        print(f"error: no feasible plan: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except TampkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
