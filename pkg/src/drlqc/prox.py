"""Closed-form proximal mapping of the box-plus-quadratic term.

For f(x, u) = indicator of the box plus (beta/2)(x'Qx + u'Ru) with diagonal
Q, R, the proximal point is componentwise

    y_i(t) = clamp(x_i(t) / (beta q_i + 1), [x_lower_i, x_upper_i])
    v_j(t) = clamp(u_j(t) / (beta r_j + 1), [u_lower_j, u_upper_j]).

With unit weights the shrink factor 1/(beta+1) equals gamma = 1/(1+beta),
so the mapping reduces to clamping gamma-scaled trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, ValidationError
from .model import ProblemSpec, TimeGrid, TrajectoryPair


@dataclass(frozen=True)
class ProxParameters:
    """Coupled pair (beta, gamma) with gamma = 1/(1+beta), beta = (1-gamma)/gamma."""

    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.beta <= 0.0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if abs(self.beta - (1.0 - self.gamma) / self.gamma) > 1e-14 * max(1.0, self.beta):
            raise ValidationError(
                f"inconsistent pair beta={self.beta}, gamma={self.gamma}"
            )

    @classmethod
    def from_gamma(cls, gamma: float) -> "ProxParameters":
        gamma = float(gamma)
        if not 0.0 < gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
        return cls((1.0 - gamma) / gamma, gamma)

    @classmethod
    def from_beta(cls, beta: float) -> "ProxParameters":
        beta = float(beta)
        if beta <= 0.0:
            raise ValidationError(f"beta must be positive, got {beta}")
        return cls(beta, 1.0 / (1.0 + beta))


def prox_f(
    z: TrajectoryPair,
    params: ProxParameters,
    spec: ProblemSpec,
    grid: TimeGrid,
) -> TrajectoryPair:
    """Proximal point of the quadratic-plus-box term at z; output lies in the box."""
    if z.x.shape != (grid.n_nodes, spec.n) or z.u.shape != (grid.n_nodes, spec.m):
        raise ShapeMismatch(
            f"trajectory shapes {z.x.shape}/{z.u.shape} do not match "
            f"({grid.n_nodes}, {spec.n})/({grid.n_nodes}, {spec.m})"
        )
    q = spec.q_on(grid)
    r = spec.r_on(grid)
    y = np.clip(z.x / (params.beta * q + 1.0), spec.x_lower, spec.x_upper)
    v = np.clip(z.u / (params.beta * r + 1.0), spec.u_lower, spec.u_upper)
    return TrajectoryPair(y, v)
