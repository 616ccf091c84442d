"""Costate and state-constraint multiplier recovery.

The affine projector's internal costate differs from the costate of the
control problem by a scalar factor. At any junction node (a boundary
between a saturated run and an interior run of some control component) the
solved control value and the projector costate determine that factor:

    alpha = -r_j(tbar) u_j(tbar) / (b_j(tbar)' lam_dr(tbar)).

The junction node is taken on the interior side of the transition, where
the solved control equals its costate-driven formula exactly at a fixed
point, making alpha exact up to the solve tolerance. State-constraint
multipliers then follow from the rearranged adjoint equation with a
finite-difference costate derivative, assigned on the active set only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import NoUsableJunction, ShapeMismatch, UnsupportedActiveSet
from .model import (
    CostateTrajectory,
    MultiplierPair,
    ProblemSpec,
    TimeGrid,
    TrajectoryPair,
)

# saturation tolerance: relative to the bound magnitude plus absolute floor
DEFAULT_ACTIVE_RTOL = 1e-6
DEFAULT_ACTIVE_ATOL = 1e-9
DENOMINATOR_TOL = 1e-9


class JunctionSide(Enum):
    ENTERING_BOUND = "EnteringBound"
    LEAVING_BOUND = "LeavingBound"


@dataclass(frozen=True)
class JunctionPoint:
    """Interior-side node of a saturated/interior transition for one
    control component; denominator is b_j' lam_dr there (None until a
    costate is supplied)."""

    control_index: int
    node_index: int
    side: JunctionSide
    denominator: Optional[float] = None


def _saturation_mask(u: np.ndarray, lower, upper, tol_active) -> np.ndarray:
    mask = np.zeros(u.shape[0], dtype=bool)
    if np.isfinite(lower):
        mask |= np.abs(u - lower) <= tol_active * abs(lower) + DEFAULT_ACTIVE_ATOL
    if np.isfinite(upper):
        mask |= np.abs(u - upper) <= tol_active * abs(upper) + DEFAULT_ACTIVE_ATOL
    return mask


def detect_junctions(
    u: np.ndarray,
    spec: ProblemSpec,
    tol_active: float = DEFAULT_ACTIVE_RTOL,
    lam_dr: Optional[CostateTrajectory] = None,
    grid: Optional[TimeGrid] = None,
) -> list[JunctionPoint]:
    """Scan each control component for saturated/interior transitions.

    Returns one junction per transition, located at the interior-side
    node; empty if no control constraint is ever active. When lam_dr is
    given, denominators b_j' lam_dr are filled in (grid required only for
    time-varying B).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] != spec.m:
        raise ShapeMismatch(f"control matrix has shape {u.shape}, expected (*, {spec.m})")
    junctions = []
    for j in range(spec.m):
        sat = _saturation_mask(u[:, j], spec.u_lower[j], spec.u_upper[j], tol_active)
        for k in range(u.shape[0] - 1):
            if sat[k] and not sat[k + 1]:
                junctions.append(
                    JunctionPoint(j, k + 1, JunctionSide.LEAVING_BOUND)
                )
            elif not sat[k] and sat[k + 1]:
                junctions.append(
                    JunctionPoint(j, k, JunctionSide.ENTERING_BOUND)
                )
    if lam_dr is not None:
        junctions = [
            JunctionPoint(
                p.control_index,
                p.node_index,
                p.side,
                _denominator(p, lam_dr.lam, spec, grid),
            )
            for p in junctions
        ]
    return junctions


def _denominator(point: JunctionPoint, lam: np.ndarray, spec, grid) -> float:
    if callable(spec.B):
        if grid is None:
            raise ValueError("grid required for time-varying B")
        b_col = np.asarray(spec.B(grid.nodes[point.node_index]))[:, point.control_index]
    else:
        b_col = spec.B[:, point.control_index]
    return float(b_col @ lam[point.node_index])


def recover_costate(
    lam_dr: CostateTrajectory,
    solution: TrajectoryPair,
    spec: ProblemSpec,
    junctions: Sequence[JunctionPoint],
    grid: Optional[TimeGrid] = None,
    denominator_tol: float = DENOMINATOR_TOL,
) -> tuple[CostateTrajectory, float]:
    """Rescale the projector costate to the problem costate.

    Among the supplied junctions the one with the largest |denominator| is
    used; raises NoUsableJunction when none exceeds the threshold.
    """
    lam = lam_dr.lam
    if solution.x.shape[0] != lam.shape[0]:
        raise ShapeMismatch("solution and costate node counts differ")
    scale = max(1.0, float(np.max(np.abs(lam))))
    best = None
    for point in junctions:
        den = point.denominator
        if den is None:
            den = _denominator(point, lam, spec, grid)
        if abs(den) <= denominator_tol * scale:
            continue
        if best is None or abs(den) > abs(best[1]):
            best = (point, den)
    if best is None:
        raise NoUsableJunction(
            "no junction with usable costate denominator "
            f"({len(junctions)} junction(s) found)"
        )
    point, den = best
    if callable(spec.r):
        if grid is None:
            raise ValueError("grid required for time-varying r")
        r_j = float(np.asarray(spec.r(grid.nodes[point.node_index]))[point.control_index])
    else:
        r_j = float(spec.r[point.control_index])
    alpha = -r_j * float(solution.u[point.node_index, point.control_index]) / den
    return CostateTrajectory(alpha * lam), alpha


def _lambda_dot(lam: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(lam)
    out[1:-1] = (lam[2:] - lam[:-2]) / (2.0 * h)
    out[0] = (lam[1] - lam[0]) / h
    out[-1] = (lam[-1] - lam[-2]) / h
    return out


def adjoint_rhs_residual(
    solution: TrajectoryPair,
    lam: CostateTrajectory,
    spec: ProblemSpec,
    grid: TimeGrid,
) -> np.ndarray:
    """-Q x - A' lam - lam_dot at every node (central differences inside,
    one-sided first-order at the endpoints)."""
    q = spec.q_on(grid)
    A = spec.a_on(grid)
    lam_dot = _lambda_dot(lam.lam, grid.h)
    if A.ndim == 2:
        at_lam = lam.lam @ A
    else:
        at_lam = np.einsum("kji,kj->ki", A, lam.lam)
    return -q * solution.x - at_lam - lam_dot


def recover_multipliers(
    solution: TrajectoryPair,
    lam: CostateTrajectory,
    spec: ProblemSpec,
    grid: TimeGrid,
    tol_active: float = DEFAULT_ACTIVE_RTOL,
) -> MultiplierPair:
    """State-constraint multipliers from the rearranged adjoint equation.

    On nodes where a state sits at its upper bound, mu1 takes the positive
    part of the adjoint residual and mu2 is zero; at a lower bound the
    roles flip; elsewhere both vanish. Only one state constraint may be
    active at a node."""
    residual = adjoint_rhs_residual(solution, lam, spec, grid)
    n_nodes, n = solution.x.shape
    mu1 = np.zeros((n_nodes, n))
    mu2 = np.zeros((n_nodes, n))
    active_count = np.zeros(n_nodes, dtype=int)
    for i in range(n):
        lower, upper = spec.x_lower[i], spec.x_upper[i]
        at_upper = np.zeros(n_nodes, dtype=bool)
        at_lower = np.zeros(n_nodes, dtype=bool)
        if np.isfinite(upper):
            at_upper = (
                np.abs(solution.x[:, i] - upper)
                <= tol_active * abs(upper) + DEFAULT_ACTIVE_ATOL
            )
            mu1[at_upper, i] = np.maximum(residual[at_upper, i], 0.0)
        if np.isfinite(lower):
            at_lower = (
                np.abs(solution.x[:, i] - lower)
                <= tol_active * abs(lower) + DEFAULT_ACTIVE_ATOL
            )
            mu2[at_lower, i] = np.maximum(-residual[at_lower, i], 0.0)
        active_count += (at_upper | at_lower).astype(int)
    if np.any(active_count > 1):
        k = int(np.argmax(active_count > 1))
        raise UnsupportedActiveSet(
            f"{active_count[k]} state constraints active at node {k}"
        )
    return MultiplierPair(mu1, mu2)
