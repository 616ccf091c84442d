"""Projection onto the affine set of trajectories satisfying the dynamics
and both boundary conditions.

The projection solves a linear two-point boundary-value problem in the
state and an auxiliary costate,

    d/dt [x; lam] = [[A, -B B'], [-I, -A']] [x; lam] + [[0, B], [I, 0]] [x-; u-],

by single shooting: the terminal near-miss x(tf) - xf is affine in the
unknown initial costate, so one dense linear solve recovers it exactly.
Integration is explicit fixed-step Euler on the grid with the forcing
sampled at the left node of each step; for time-invariant dynamics the
shooting Jacobian depends only on (A, B, grid) and is factorized once per
projector and reused across calls.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numba import njit

from .errors import NonFiniteState, ShapeMismatch, SingularShootingJacobian
from .model import CostateTrajectory, ProblemSpec, TimeGrid, TrajectoryPair

# Relative pivot threshold below which the shooting Jacobian is declared singular.
SINGULARITY_THRESHOLD = 1e-12


@njit(cache=True)
def _euler_const(G, c, y0):
    """y_{k+1} = G y_k + c_k for column block y0 of shape (d, ncol)."""
    n_steps = c.shape[0]
    d = G.shape[0]
    ncol = y0.shape[1]
    out = np.empty((n_steps + 1, d, ncol))
    out[0] = y0
    for s in range(n_steps):
        prev = out[s]
        nxt = out[s + 1]
        for a in range(d):
            ca = c[s, a]
            for b in range(ncol):
                acc = ca
                for e in range(d):
                    acc += G[a, e] * prev[e, b]
                nxt[a, b] = acc
    return out


@njit(cache=True)
def _euler_varying(G, c, y0):
    """Same recursion with a per-step matrix G of shape (n_steps, d, d)."""
    n_steps = c.shape[0]
    d = G.shape[1]
    ncol = y0.shape[1]
    out = np.empty((n_steps + 1, d, ncol))
    out[0] = y0
    for s in range(n_steps):
        prev = out[s]
        nxt = out[s + 1]
        Gs = G[s]
        for a in range(d):
            ca = c[s, a]
            for b in range(ncol):
                acc = ca
                for e in range(d):
                    acc += Gs[a, e] * prev[e, b]
                nxt[a, b] = acc
    return out


@dataclass(frozen=True)
class ShootingWorkspace:
    """Shooting data for one projection: zero-costate terminal state, the
    near-miss Jacobian (columns are terminal responses to unit initial
    costates), and the solved initial costate."""

    z_base: np.ndarray
    jacobian: np.ndarray
    lambda0: np.ndarray


class AffineProjector:
    """Projector onto the affine trajectory set for a fixed (spec, grid).

    Instances are cheap to build and safe to reuse; a projector holds the
    per-node step matrices and, for time-invariant dynamics, the factorized
    shooting Jacobian shared by all subsequent projections.
    """

    def __init__(self, spec: ProblemSpec, grid: TimeGrid):
        spec.check_grid(grid)
        self.spec = spec
        self.grid = grid
        n, m, h = spec.n, spec.m, grid.h
        d = 2 * n
        A = spec.a_on(grid)
        B = spec.b_on(grid)
        self._dynamics_invariant = A.ndim == 2 and B.ndim == 2
        if self._dynamics_invariant:
            M = np.zeros((d, d))
            M[:n, :n] = A
            M[:n, n:] = -B @ B.T
            M[n:, :n] = -np.eye(n)
            M[n:, n:] = -A.T
            self._G = np.eye(d) + h * M
        else:
            An = A if A.ndim == 3 else np.broadcast_to(A, (grid.n_nodes, n, n))
            Bn = B if B.ndim == 3 else np.broadcast_to(B, (grid.n_nodes, n, m))
            G = np.zeros((grid.n_steps, d, d))
            G[:, :n, :n] = h * An[:-1]
            G[:, :n, n:] = -h * np.einsum("kij,klj->kil", Bn[:-1], Bn[:-1])
            G[:, n:, n:] = -h * np.transpose(An[:-1], (0, 2, 1))
            G[:, np.arange(d), np.arange(d)] += 1.0
            G[:, n:, :n] -= h * np.eye(n)
            self._G = np.ascontiguousarray(G)
        self._B = B
        self._n, self._m, self._d = n, m, d
        self._jacobian = None
        self._lu = None

    def _forcing(self, zx: np.ndarray, zu: np.ndarray) -> np.ndarray:
        n, h = self._n, self.grid.h
        c = np.empty((self.grid.n_steps, self._d))
        B = self._B
        if B.ndim == 2:
            c[:, :n] = h * (zu[:-1] @ B.T)
        else:
            c[:, :n] = h * np.einsum("kij,kj->ki", B[:-1], zu[:-1])
        c[:, n:] = h * zx[:-1]
        return c

    def _integrate(self, c: np.ndarray, y0: np.ndarray) -> np.ndarray:
        if self._dynamics_invariant:
            return _euler_const(self._G, c, y0)
        return _euler_varying(self._G, c, y0)

    def _factorize(self, jacobian: np.ndarray):
        try:
            with warnings.catch_warnings():
                # the pivot check below raises our own error for singularity
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(jacobian)
        except np.linalg.LinAlgError as exc:
            raise SingularShootingJacobian(str(exc)) from exc
        pivots = np.abs(np.diag(lu))
        scale = np.max(np.abs(jacobian))
        if scale == 0.0 or np.min(pivots) < SINGULARITY_THRESHOLD * scale:
            raise SingularShootingJacobian(
                f"shooting Jacobian pivot ratio "
                f"{np.min(pivots) / max(scale, 1e-300):.2e} below "
                f"{SINGULARITY_THRESHOLD:.0e}"
            )
        return lu, piv

    def shoot(self, z: TrajectoryPair) -> ShootingWorkspace:
        """Near-miss run, Jacobian assembly, and the initial-costate solve."""
        self._check_shapes(z.x, z.u)
        return self._shoot(self._forcing(z.x, z.u))

    def _shoot(self, c: np.ndarray) -> ShootingWorkspace:
        n = self._n
        if self._lu is None:
            y0 = np.zeros((self._d, n + 1))
            y0[:n, :] = self.spec.x0[:, None]
            y0[n:, 1:] = np.eye(n)
            traj = self._integrate(c, y0)
            terminal = traj[-1, :n, :]
            if not np.all(np.isfinite(terminal)):
                raise NonFiniteState("integration overflowed")
            z_base = terminal[:, 0].copy()
            jacobian = terminal[:, 1:] - z_base[:, None]
            lu = self._factorize(jacobian)
            if self._dynamics_invariant:
                jacobian.flags.writeable = False
                self._jacobian, self._lu = jacobian, lu
        else:
            jacobian, lu = self._jacobian, self._lu
            y0 = np.zeros((self._d, 1))
            y0[:n, 0] = self.spec.x0
            traj = self._integrate(c, y0)
            z_base = traj[-1, :n, 0].copy()
            if not np.all(np.isfinite(z_base)):
                raise NonFiniteState("integration overflowed")
        lambda0 = sla.lu_solve(lu, -(z_base - self.spec.xf))
        return ShootingWorkspace(z_base, jacobian, lambda0)

    def project_arrays(self, zx: np.ndarray, zu: np.ndarray):
        """Projection on raw arrays; returns (x, v, lam) without wrapping."""
        self._check_shapes(zx, zu)
        n = self._n
        c = self._forcing(zx, zu)
        workspace = self._shoot(c)
        y0 = np.zeros((self._d, 1))
        y0[:n, 0] = self.spec.x0
        y0[n:, 0] = workspace.lambda0
        traj = self._integrate(c, y0)[:, :, 0]
        if not np.all(np.isfinite(traj)):
            raise NonFiniteState("integration overflowed")
        x = traj[:, :n]
        lam = traj[:, n:]
        B = self._B
        if B.ndim == 2:
            v = zu - lam @ B
        else:
            v = zu - np.einsum("kij,ki->kj", B, lam)
        return x, v, lam

    def project(self, z: TrajectoryPair) -> tuple[TrajectoryPair, CostateTrajectory]:
        x, v, lam = self.project_arrays(z.x, z.u)
        return TrajectoryPair(x, v), CostateTrajectory(lam)

    def _check_shapes(self, zx, zu):
        expected = (self.grid.n_nodes, self._n), (self.grid.n_nodes, self._m)
        if (zx.shape, zu.shape) != expected:
            raise ShapeMismatch(
                f"trajectory shapes {zx.shape}/{zu.shape}, expected "
                f"{expected[0]}/{expected[1]}"
            )


def integrate_hamiltonian(
    spec: ProblemSpec,
    grid: TimeGrid,
    lambda0: np.ndarray,
    z: TrajectoryPair,
) -> tuple[np.ndarray, CostateTrajectory]:
    """One explicit-Euler pass of the coupled state-costate system.

    Starts from x(t0) = x0, lam(t0) = lambda0 with forcing (x-, u-) taken
    from z at the left node of each step. Returns the state samples and the
    costate trajectory.
    """
    lambda0 = np.asarray(lambda0, dtype=float)
    if lambda0.shape != (spec.n,):
        raise ShapeMismatch(f"lambda0 must have shape ({spec.n},)")
    if not np.all(np.isfinite(lambda0)):
        raise NonFiniteState("lambda0 must be finite")
    proj = AffineProjector(spec, grid)
    proj._check_shapes(z.x, z.u)
    c = proj._forcing(z.x, z.u)
    y0 = np.zeros((2 * spec.n, 1))
    y0[: spec.n, 0] = spec.x0
    y0[spec.n :, 0] = lambda0
    traj = proj._integrate(c, y0)[:, :, 0]
    if not np.all(np.isfinite(traj)):
        raise NonFiniteState("integration overflowed")
    return traj[:, : spec.n].copy(), CostateTrajectory(traj[:, spec.n :])


def project_affine(
    spec: ProblemSpec, grid: TimeGrid, z: TrajectoryPair
) -> tuple[TrajectoryPair, CostateTrajectory]:
    """One-shot projection; use AffineProjector directly to reuse the
    Jacobian factorization across calls."""
    return AffineProjector(spec, grid).project(z)
