"""Command-line front end: single solves, gamma sweeps, timing studies,
and oracle cross-checks, with CSV/JSON artifacts.

Artifacts written to --out:

* ``trajectory.csv`` -- per-node t, states, controls, costate, and
  state-constraint multipliers at full precision.
* ``report.json``    -- settings, termination, residual history, objective,
  optimality-condition residuals, wall time (schema_version 1).
* ``sweep.csv``      -- one row per gamma in sweep mode.

Exit status is 0 whenever a solution is produced (hitting the iteration
cap is reported, not treated as failure) and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .duals import detect_junctions, recover_costate, recover_multipliers
from .errors import NoUsableJunction
from .kkt import adjoint_residual, complementarity_residual, control_law_residual
from .model import ProblemSpec, TimeGrid, build_grid
from .oracle import solve_discretized_qp
from .problems import builtin_problem, load_problem_config
from .solver import DrSettings, dr_solve

SCHEMA_VERSION = 1


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drlqc",
        description="Splitting solver for box-constrained linear-quadratic "
        "optimal control",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run a solve, sweep, or timing study")
    solve.add_argument("--problem", choices=("pho", "psm"), help="built-in problem")
    solve.add_argument("--case", type=int, choices=(1, 2), default=1)
    solve.add_argument("--config", type=Path, help="problem-config JSON path")
    solve.add_argument("--n", type=int, required=True, help="number of Euler steps")
    solve.add_argument("--gamma", type=float, help="overrides the preset gamma")
    solve.add_argument("--eps", type=float, default=1e-8)
    solve.add_argument("--max-iter", type=int, default=200)
    solve.add_argument("--out", type=Path, default=Path("."))
    solve.add_argument(
        "--sweep-gamma",
        type=int,
        metavar="POINTS",
        help="sweep this many equally spaced gammas instead of a single solve",
    )
    solve.add_argument(
        "--oracle-check",
        action="store_true",
        help="also solve the transcribed QP and report the distance",
    )
    solve.add_argument(
        "--timing",
        type=int,
        metavar="REPEATS",
        help="measure solve wall time over this many cold repeats",
    )
    return parser


def _resolve_problem(ns) -> tuple[ProblemSpec, float, dict]:
    if (ns.problem is None) == (ns.config is None):
        raise ValueError("exactly one of --problem or --config is required")
    if ns.problem is not None:
        spec, gamma = builtin_problem(ns.problem, ns.case)
        meta = {"name": ns.problem, "case": ns.case}
    else:
        spec = load_problem_config(ns.config.read_text())
        gamma = None
        meta = {"config": str(ns.config)}
    if ns.gamma is not None:
        gamma = ns.gamma
    if gamma is None:
        raise ValueError("--gamma is required with --config (no preset available)")
    return spec, gamma, meta


def gamma_sweep(
    spec: ProblemSpec,
    grid: TimeGrid,
    n_points: int,
    epsilon: float = 1e-8,
    max_iterations: int = 200,
) -> list[dict]:
    """Solve at n_points equally spaced interior gammas i/(n_points+1).

    Per-gamma failures become rows, not aborts. The kkt_residual column is
    the max per-component control-law residual from the recovered costate
    (NaN when recovery is not possible)."""
    if n_points < 2:
        raise ValueError(f"need at least 2 sweep points, got {n_points}")
    rows = []
    for i in range(1, n_points + 1):
        gamma = i / (n_points + 1)
        try:
            solution, lam_dr, report = dr_solve(
                spec, grid, DrSettings(gamma, epsilon, max_iterations)
            )
            try:
                junctions = detect_junctions(solution.u, spec)
                lam, _ = recover_costate(lam_dr, solution, spec, junctions, grid)
                kkt = float(np.max(control_law_residual(solution, lam, spec, grid)))
            except NoUsableJunction:
                kkt = float("nan")
            rows.append(
                {
                    "gamma": gamma,
                    "iterations": report.iterations,
                    "terminated_by": report.terminated_by.value,
                    "kkt_residual": kkt,
                }
            )
        except Exception as exc:  # per-gamma failure -> row
            rows.append(
                {
                    "gamma": gamma,
                    "iterations": 0,
                    "terminated_by": f"Error({type(exc).__name__})",
                    "kkt_residual": float("nan"),
                }
            )
    return rows


def timing_report(
    spec: ProblemSpec,
    grid: TimeGrid,
    gamma: float,
    repeats: int,
    epsilon: float = 1e-8,
    max_iterations: int = 200,
) -> dict:
    """Mean and minimum solve wall time over cold repeats (fresh solver
    state each time; JIT warmed beforehand so only the solve loop counts)."""
    if repeats < 1:
        raise ValueError(f"need at least 1 repeat, got {repeats}")
    settings = DrSettings(gamma, epsilon, max_iterations)
    dr_solve(spec, grid, settings)  # warm the kernels
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        dr_solve(spec, grid, settings)
        times.append(time.perf_counter() - start)
    return {
        "repeats": repeats,
        "mean_seconds": float(np.mean(times)),
        "min_seconds": float(np.min(times)),
    }


def _write_trajectory(path: Path, grid, solution, lam, mu) -> None:
    n = solution.x.shape[1]
    m = solution.u.shape[1]
    header = (
        ["t"]
        + [f"x_{i+1}" for i in range(n)]
        + [f"u_{j+1}" for j in range(m)]
        + [f"lambda_{i+1}" for i in range(n)]
        + [f"mu1_{i+1}" for i in range(n)]
        + [f"mu2_{i+1}" for i in range(n)]
    )
    lines = [",".join(header)]
    for k in range(grid.n_nodes):
        row = (
            [grid.nodes[k]]
            + list(solution.x[k])
            + list(solution.u[k])
            + list(lam.lam[k])
            + list(mu.mu1[k])
            + list(mu.mu2[k])
        )
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_sweep(path: Path, rows) -> None:
    lines = ["gamma,iterations,terminated_by,kkt_residual"]
    for row in rows:
        lines.append(
            f"{_fmt(row['gamma'])},{row['iterations']},"
            f"{row['terminated_by']},{_fmt(row['kkt_residual'])}"
        )
    path.write_text("\n".join(lines) + "\n")


def run_command(argv) -> int:
    """Execute a CLI invocation; returns the process exit status."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        spec, gamma, meta = _resolve_problem(ns)
        grid = build_grid(spec.t0, spec.tf, ns.n)
        out = ns.out
        out.mkdir(parents=True, exist_ok=True)

        if ns.sweep_gamma is not None:
            rows = gamma_sweep(spec, grid, ns.sweep_gamma, ns.eps, ns.max_iter)
            _write_sweep(out / "sweep.csv", rows)
            print(f"wrote {out / 'sweep.csv'} ({len(rows)} gammas)")
            return 0

        settings = DrSettings(gamma, ns.eps, ns.max_iter)
        solution, lam_dr, report = dr_solve(spec, grid, settings)

        junctions = detect_junctions(solution.u, spec, lam_dr=lam_dr, grid=grid)
        recovered = True
        alpha = None
        try:
            lam, alpha = recover_costate(lam_dr, solution, spec, junctions, grid)
        except NoUsableJunction:
            recovered = False
            lam = lam_dr
        mu = recover_multipliers(solution, lam, spec, grid)

        control_law = control_law_residual(solution, lam, spec, grid)
        kkt_block = {
            "control_law": [float(v) for v in control_law],
            "control_law_max": float(np.max(control_law)),
            "complementarity": complementarity_residual(solution, mu, spec),
            "adjoint_all_nodes": adjoint_residual(solution, lam, mu, spec, grid),
            "adjoint_junction_windowed": adjoint_residual(
                solution, lam, mu, spec, grid, junctions=junctions
            ),
        }

        doc = {
            "schema_version": SCHEMA_VERSION,
            "problem": meta,
            "n_steps": grid.n_steps,
            "gamma": gamma,
            "epsilon": ns.eps,
            "max_iterations": ns.max_iter,
            "iterations": report.iterations,
            "terminated_by": report.terminated_by.value,
            "final_residual": {
                "dx": report.residual_history[-1][0],
                "du": report.residual_history[-1][1],
            },
            "objective_value": report.objective_value,
            "wall_time_seconds": report.wall_time,
            "costate": {
                "recovered": recovered,
                "alpha": alpha,
                "junction_count": len(junctions),
            },
            "kkt": kkt_block,
            "residual_history": [list(pair) for pair in report.residual_history],
        }

        if ns.oracle_check:
            baseline = solve_discretized_qp(spec, grid)
            doc["oracle_check"] = {
                "dx": float(np.max(np.abs(solution.x - baseline.x))),
                "du": float(np.max(np.abs(solution.u - baseline.u))),
            }
        if ns.timing is not None:
            doc["timing"] = timing_report(
                spec, grid, gamma, ns.timing, ns.eps, ns.max_iter
            )

        _write_trajectory(out / "trajectory.csv", grid, solution, lam, mu)
        (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(
            f"{report.terminated_by.value} after {report.iterations} iterations; "
            f"objective {report.objective_value:.6g}; wrote "
            f"{out / 'trajectory.csv'} and {out / 'report.json'}"
        )
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
