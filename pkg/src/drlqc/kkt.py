"""Numerical verification of the first-order optimality conditions:
control law, complementarity, and the adjoint equation."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .duals import JunctionPoint, _lambda_dot
from .errors import ShapeMismatch
from .model import (
    CostateTrajectory,
    MultiplierPair,
    ProblemSpec,
    TimeGrid,
    TrajectoryPair,
)


def control_law_residual(
    solution: TrajectoryPair,
    lam: CostateTrajectory,
    spec: ProblemSpec,
    grid: TimeGrid,
) -> np.ndarray:
    """Per-component L-infinity gap between the solved control and the
    clamped costate-driven law clamp(-b_j' lam / r_j, [u_lower_j, u_upper_j])."""
    if solution.u.shape[0] != lam.lam.shape[0]:
        raise ShapeMismatch("solution and costate node counts differ")
    B = spec.b_on(grid)
    r = spec.r_on(grid)
    if B.ndim == 2:
        raw = -(lam.lam @ B) / r
    else:
        raw = -np.einsum("kij,ki->kj", B, lam.lam) / r
    predicted = np.clip(raw, spec.u_lower, spec.u_upper)
    return np.max(np.abs(predicted - solution.u), axis=0)


def complementarity_residual(
    solution: TrajectoryPair,
    mu: MultiplierPair,
    spec: ProblemSpec,
) -> float:
    """Max violation of mu >= 0 and mu * (constraint slack) = 0.

    Slack products are evaluated on finite bounds only; a positive
    multiplier against an infinite bound counts as its own magnitude."""
    if mu.mu1.shape != solution.x.shape:
        raise ShapeMismatch("multipliers and solution have different shapes")
    worst = max(
        0.0, float(np.max(-mu.mu1, initial=0.0)), float(np.max(-mu.mu2, initial=0.0))
    )
    for i in range(spec.n):
        if np.isfinite(spec.x_upper[i]):
            worst = max(
                worst,
                float(np.max(np.abs(mu.mu1[:, i] * (solution.x[:, i] - spec.x_upper[i])))),
            )
        else:
            worst = max(worst, float(np.max(np.abs(mu.mu1[:, i]))))
        if np.isfinite(spec.x_lower[i]):
            worst = max(
                worst,
                float(np.max(np.abs(mu.mu2[:, i] * (spec.x_lower[i] - solution.x[:, i])))),
            )
        else:
            worst = max(worst, float(np.max(np.abs(mu.mu2[:, i]))))
    return worst


def adjoint_residual(
    solution: TrajectoryPair,
    lam: CostateTrajectory,
    mu: MultiplierPair,
    spec: ProblemSpec,
    grid: TimeGrid,
    junctions: Sequence[JunctionPoint] = (),
    window: int = 3,
) -> float:
    """Max over interior nodes of || lam_dot + Q x + A' lam + mu1 - mu2 ||_inf
    with a central-difference lam_dot.

    Nodes within +-window of any supplied junction are excluded; finite
    differencing across the costate kinks there is not meaningful."""
    q = spec.q_on(grid)
    A = spec.a_on(grid)
    lam_dot = _lambda_dot(lam.lam, grid.h)
    if A.ndim == 2:
        at_lam = lam.lam @ A
    else:
        at_lam = np.einsum("kji,kj->ki", A, lam.lam)
    residual = lam_dot + q * solution.x + at_lam + mu.mu1 - mu.mu2
    keep = np.ones(solution.x.shape[0], dtype=bool)
    keep[0] = keep[-1] = False
    for point in junctions:
        lo = max(0, point.node_index - window)
        hi = min(keep.size, point.node_index + window + 1)
        keep[lo:hi] = False
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(residual[keep])))
