#!/usr/bin/env python3
"""Desk-scale benchmark protocol for the built-in problems.

For each problem/case this runs the solver at N=1e3 and N=1e4, sweeps the
relaxation parameter at N=200, times repeated solves, and (for the
control-constrained cases) measures self-convergence of the control error
against an N=1e5 reference. Results land as CSV files in --out.

Usage: python scripts/run_benchmarks.py [--out results] [--quick]
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

import drlqc as d
from drlqc.cli import gamma_sweep, timing_report


def solve_case(name, case, n_steps, gamma=None, eps=1e-8, max_iter=200):
    spec, preset = d.builtin_problem(name, case)
    grid = d.build_grid(spec.t0, spec.tf, n_steps)
    settings = d.DrSettings(gamma if gamma is not None else preset, eps, max_iter)
    solution, lam_dr, report = d.dr_solve(spec, grid, settings)
    return spec, grid, solution, lam_dr, report


def control_error(coarse, reference, stride):
    return float(np.max(np.abs(coarse.u - reference.u[::stride])))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument(
        "--quick", action="store_true", help="smaller grids and fewer repeats"
    )
    ns = parser.parse_args(argv)
    ns.out.mkdir(parents=True, exist_ok=True)

    n_main = 1000
    n_fine = 10000 if not ns.quick else 2000
    n_ref = 100000 if not ns.quick else 10000
    repeats = 20 if not ns.quick else 3
    sweep_points = 50 if not ns.quick else 15

    summary_rows = []
    for name in ("pho", "psm"):
        for case in (1, 2):
            t_start = time.perf_counter()
            spec, grid, solution, lam_dr, report = solve_case(name, case, n_main)
            junctions = d.detect_junctions(solution.u, spec, lam_dr=lam_dr, grid=grid)
            try:
                lam, alpha = d.recover_costate(lam_dr, solution, spec, junctions, grid)
            except d.NoUsableJunction:
                lam, alpha = lam_dr, float("nan")
            mu = d.recover_multipliers(solution, lam, spec, grid)
            row = {
                "problem": name,
                "case": case,
                "n_steps": n_main,
                "iterations": report.iterations,
                "terminated_by": report.terminated_by.value,
                "objective": report.objective_value,
                "alpha": alpha,
                "control_law_residual": float(
                    np.max(d.control_law_residual(solution, lam, spec, grid))
                ),
                "adjoint_residual_windowed": d.adjoint_residual(
                    solution, lam, mu, spec, grid, junctions=junctions
                ),
                "max_mu2_first_state": float(np.max(mu.mu2[:, 0])),
                "wall_seconds": time.perf_counter() - t_start,
            }
            summary_rows.append(row)
            print(
                f"{name} case {case}: {report.iterations} iters "
                f"({report.terminated_by.value}), objective "
                f"{report.objective_value:.6g}"
            )

    with (ns.out / "summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary_rows[0]))
        writer.writeheader()
        writer.writerows(summary_rows)

    # gamma sweeps at N=200
    for name in ("pho", "psm"):
        for case in (1, 2):
            spec, _ = d.builtin_problem(name, case)
            grid = d.build_grid(spec.t0, spec.tf, 200)
            rows = gamma_sweep(spec, grid, sweep_points)
            with (ns.out / f"sweep_{name}_case{case}.csv").open("w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
            converged = [r for r in rows if r["terminated_by"] == "ToleranceMet"]
            if converged:
                best = min(converged, key=lambda r: r["iterations"])
                print(
                    f"{name} case {case} sweep: best gamma {best['gamma']:.3f} "
                    f"({best['iterations']} iters)"
                )
            else:
                print(f"{name} case {case} sweep: no gamma converged within the cap")

    # self-convergence of control errors for the control-constrained cases
    conv_rows = []
    for name in ("pho", "psm"):
        spec, preset = d.builtin_problem(name, 1)
        ref_grid = d.build_grid(spec.t0, spec.tf, n_ref)
        reference, _, ref_report = d.dr_solve(spec, ref_grid, d.DrSettings(preset))
        for n_steps in (n_main, n_fine):
            _, _, coarse, _, _ = solve_case(name, 1, n_steps)
            err = control_error(coarse, reference, n_ref // n_steps)
            conv_rows.append(
                {
                    "problem": name,
                    "n_steps": n_steps,
                    "reference_n_steps": n_ref,
                    "control_linf_error": err,
                }
            )
            print(f"{name} case 1 error at N={n_steps}: {err:.3e}")
    with (ns.out / "self_convergence.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(conv_rows[0]))
        writer.writeheader()
        writer.writerows(conv_rows)

    # timing
    timing_rows = []
    for name in ("pho", "psm"):
        spec, preset = d.builtin_problem(name, 1)
        grid = d.build_grid(spec.t0, spec.tf, n_main)
        stats = timing_report(spec, grid, preset, repeats)
        stats.update(problem=name, case=1, n_steps=n_main)
        timing_rows.append(stats)
        print(
            f"{name} case 1 timing: mean {stats['mean_seconds']:.4f}s "
            f"min {stats['min_seconds']:.4f}s over {repeats} repeats"
        )
    with (ns.out / "timing.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(timing_rows[0]))
        writer.writeheader()
        writer.writerows(timing_rows)

    print(f"artifacts in {ns.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
