"""Problem data model: time grids, problem specifications, trajectories.

All container types are immutable after construction (arrays are marked
read-only) and safe to share between concurrent solves. System matrices may
be constant arrays or callables of time; callables are evaluated at the grid
nodes when a grid is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    GridTooCoarse,
    NonIncreasingInterval,
    ShapeMismatch,
    ValidationError,
)

MatrixLike = Union[np.ndarray, Callable[[float], np.ndarray]]


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of [t0, tf] into n_steps Euler steps."""

    t0: float
    tf: float
    n_steps: int
    h: float
    nodes: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1


def build_grid(t0: float, tf: float, n_steps: int) -> TimeGrid:
    """Build a uniform grid with n_steps+1 nodes t_k = t0 + k*h.

    Raises NonIncreasingInterval if tf <= t0 and GridTooCoarse if
    n_steps < 2.
    """
    if not tf > t0:
        raise NonIncreasingInterval(f"need tf > t0, got [{t0}, {tf}]")
    n_steps = int(n_steps)
    if n_steps < 2:
        raise GridTooCoarse(f"need at least 2 steps, got {n_steps}")
    h = (tf - t0) / n_steps
    nodes = _frozen(t0 + h * np.arange(n_steps + 1))
    return TimeGrid(float(t0), float(tf), n_steps, h, nodes)


@dataclass(frozen=True)
class ProblemSpec:
    """Linear-quadratic control problem with box constraints.

    Dynamics xdot = A(t) x + B(t) u on [t0, tf] with x(t0) = x0 and
    x(tf) = xf, quadratic cost weights q (diagonal of Q, >= 0) and r
    (diagonal of R, > 0), and componentwise bounds on states and controls
    (entries may be +-inf).

    A, B may be (n, n) / (n, m) arrays or callables t -> array; q, r may
    be (n,) / (m,) vectors or callables t -> vector.
    """

    n: int
    m: int
    A: MatrixLike
    B: MatrixLike
    q: MatrixLike
    r: MatrixLike
    x0: np.ndarray
    xf: np.ndarray
    t0: float = 0.0
    tf: float = 1.0
    x_lower: np.ndarray = None
    x_upper: np.ndarray = None
    u_lower: np.ndarray = None
    u_upper: np.ndarray = None

    def __post_init__(self):
        n, m = self.n, self.m
        if n < 1 or m < 1:
            raise ValidationError(f"need n, m >= 1, got n={n}, m={m}")
        if not self.tf > self.t0:
            raise NonIncreasingInterval(
                f"need tf > t0, got [{self.t0}, {self.tf}]"
            )
        for name, default_len in (("x0", n), ("xf", n)):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (default_len,):
                raise ValidationError(f"{name} must have shape ({default_len},)")
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, _frozen(v))
        for name, dim, default in (
            ("x_lower", n, -np.inf),
            ("x_upper", n, np.inf),
            ("u_lower", m, -np.inf),
            ("u_upper", m, np.inf),
        ):
            v = getattr(self, name)
            v = np.full(dim, default) if v is None else np.asarray(v, dtype=float)
            if v.shape != (dim,):
                raise ValidationError(f"{name} must have shape ({dim},)")
            object.__setattr__(self, name, _frozen(v))
        if np.any(self.x_lower > self.x_upper):
            raise ValidationError("crossed state bounds: x_lower > x_upper")
        if np.any(self.u_lower > self.u_upper):
            raise ValidationError("crossed control bounds: u_lower > u_upper")
        for name, v in (("x0", self.x0), ("xf", self.xf)):
            if np.any(v < self.x_lower) or np.any(v > self.x_upper):
                raise ValidationError(f"{name} lies outside the state box")
        for name, shape in (("A", (n, n)), ("B", (n, m)), ("q", (n,)), ("r", (m,))):
            v = getattr(self, name)
            if callable(v):
                sample = np.asarray(v(self.t0), dtype=float)
                if sample.shape != shape:
                    raise ValidationError(
                        f"{name}(t0) has shape {sample.shape}, expected {shape}"
                    )
                self._check_weights(name, sample)
            else:
                arr = np.asarray(v, dtype=float)
                if arr.shape != shape:
                    raise ValidationError(
                        f"{name} has shape {arr.shape}, expected {shape}"
                    )
                self._check_weights(name, arr)
                object.__setattr__(self, name, _frozen(arr))

    @staticmethod
    def _check_weights(name, arr):
        if name == "q" and np.any(arr < 0):
            raise ValidationError("q must be nonnegative (Q positive semi-definite)")
        if name == "r" and np.any(arr <= 0):
            raise ValidationError("r must be positive (R positive definite)")

    @property
    def is_time_invariant(self) -> bool:
        return not any(callable(v) for v in (self.A, self.B, self.q, self.r))

    def _on_nodes(self, value, grid: TimeGrid) -> np.ndarray:
        """Constant value as-is, callable stacked over the grid nodes."""
        if not callable(value):
            return value
        stacked = np.stack([np.asarray(value(t), dtype=float) for t in grid.nodes])
        if not np.all(np.isfinite(stacked)):
            raise ValidationError("time-varying matrix evaluated to non-finite values")
        return stacked

    def a_on(self, grid: TimeGrid) -> np.ndarray:
        return self._on_nodes(self.A, grid)

    def b_on(self, grid: TimeGrid) -> np.ndarray:
        return self._on_nodes(self.B, grid)

    def q_on(self, grid: TimeGrid) -> np.ndarray:
        out = self._on_nodes(self.q, grid)
        self._check_weights("q", out)
        return out

    def r_on(self, grid: TimeGrid) -> np.ndarray:
        out = self._on_nodes(self.r, grid)
        self._check_weights("r", out)
        return out

    def check_grid(self, grid: TimeGrid) -> None:
        if abs(grid.t0 - self.t0) > 1e-12 or abs(grid.tf - self.tf) > 1e-12:
            raise ValidationError(
                f"grid interval [{grid.t0}, {grid.tf}] does not match the "
                f"problem horizon [{self.t0}, {self.tf}]"
            )


@dataclass(frozen=True)
class TrajectoryPair:
    """State and control samples at the grid nodes: x is (N+1, n), u is (N+1, m)."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if x.ndim != 2 or u.ndim != 2 or x.shape[0] != u.shape[0]:
            raise ShapeMismatch(f"bad trajectory shapes {x.shape}, {u.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise ValidationError("trajectory entries must be finite")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "u", _frozen(u))

    @property
    def n_nodes(self) -> int:
        return self.x.shape[0]

    @classmethod
    def zeros(cls, spec: ProblemSpec, grid: TimeGrid) -> "TrajectoryPair":
        k = grid.n_nodes
        return cls(np.zeros((k, spec.n)), np.zeros((k, spec.m)))


@dataclass(frozen=True)
class CostateTrajectory:
    """Adjoint samples at the grid nodes, shape (N+1, n)."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 2:
            raise ShapeMismatch(f"costate must be 2-d, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValidationError("costate entries must be finite")
        object.__setattr__(self, "lam", _frozen(lam))


@dataclass(frozen=True)
class MultiplierPair:
    """State-constraint multipliers mu1 (upper bounds), mu2 (lower bounds)."""

    mu1: np.ndarray
    mu2: np.ndarray

    def __post_init__(self):
        mu1 = np.asarray(self.mu1, dtype=float)
        mu2 = np.asarray(self.mu2, dtype=float)
        if mu1.shape != mu2.shape or mu1.ndim != 2:
            raise ShapeMismatch(f"bad multiplier shapes {mu1.shape}, {mu2.shape}")
        if np.any(mu1 < 0) or np.any(mu2 < 0):
            raise ValidationError("multipliers must be nonnegative")
        object.__setattr__(self, "mu1", _frozen(mu1))
        object.__setattr__(self, "mu2", _frozen(mu2))


def linf_distance(a: TrajectoryPair, b: TrajectoryPair) -> tuple[float, float]:
    """Discrete L-infinity distances (dx, du): max over nodes and components."""
    if a.x.shape != b.x.shape or a.u.shape != b.u.shape:
        raise ShapeMismatch(
            f"trajectories have shapes {a.x.shape}/{a.u.shape} vs "
            f"{b.x.shape}/{b.u.shape}"
        )
    dx = float(np.max(np.abs(a.x - b.x)))
    du = float(np.max(np.abs(a.u - b.u)))
    return dx, du


def trapezoid_objective(pair: TrajectoryPair, spec: ProblemSpec, grid: TimeGrid) -> float:
    """Composite trapezoidal value of 1/2 integral (x'Qx + u'Ru) dt."""
    if pair.n_nodes != grid.n_nodes:
        raise ShapeMismatch(
            f"trajectory has {pair.n_nodes} nodes, grid has {grid.n_nodes}"
        )
    q = spec.q_on(grid)
    r = spec.r_on(grid)
    integrand = 0.5 * (np.sum(q * pair.x**2, axis=1) + np.sum(r * pair.u**2, axis=1))
    w = np.full(grid.n_nodes, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return float(w @ integrand)
