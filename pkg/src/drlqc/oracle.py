"""Direct-discretization baseline: the box-constrained quadratic program
obtained by Euler transcription, solved by an interior-point method.

The finite-dimensional problem collects states and controls at all grid
nodes and minimizes sum_k 1/2 (x_k' Q x_k + u_k' R u_k) subject to the
Euler dynamics x_{k+1} = x_k + h (A_k x_k + B_k u_k), both boundary
conditions, and the box bounds. A conic interior-point solve (cvxopt)
is followed by an active-set crossover that re-solves the equality KKT
system on the complementarity-identified free variables, pinning the
dynamics residual to machine precision. When the interior point fails to
reach optimality, an exact reachability LP discriminates a genuinely
infeasible discretization from a solver stall. The method shares no
machinery with the splitting solver it cross-checks.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import linprog

from .errors import InfeasibleDiscretization, IterationLimit, ValidationError
from .model import ProblemSpec, TimeGrid, TrajectoryPair

MAX_VARIABLES = 5000


def _assemble(spec: ProblemSpec, grid: TimeGrid):
    n, m, h = spec.n, spec.m, grid.h
    n_steps = grid.n_steps
    n_nodes = grid.n_nodes
    nx = n_nodes * n
    nv = nx + n_nodes * m

    q = spec.q_on(grid)
    r = spec.r_on(grid)
    hdiag = np.concatenate(
        [
            np.broadcast_to(q, (n_nodes, n)).ravel(),
            np.broadcast_to(r, (n_nodes, m)).ravel(),
        ]
    ).astype(float)
    lo = np.concatenate([np.tile(spec.x_lower, n_nodes), np.tile(spec.u_lower, n_nodes)])
    hi = np.concatenate([np.tile(spec.x_upper, n_nodes), np.tile(spec.u_upper, n_nodes)])

    A = spec.a_on(grid)
    B = spec.b_on(grid)
    An = A if A.ndim == 3 else np.broadcast_to(A, (n_nodes, n, n))
    Bn = B if B.ndim == 3 else np.broadcast_to(B, (n_nodes, n, m))

    rows, cols, vals = [], [], []

    def add_block(r0, c0, block):
        bi, bj = np.nonzero(block)
        rows.extend((r0 + bi).tolist())
        cols.extend((c0 + bj).tolist())
        vals.extend(block[bi, bj].tolist())

    eye = np.eye(n)
    for k in range(n_steps):
        r0 = k * n
        add_block(r0, (k + 1) * n, eye)
        add_block(r0, k * n, -(eye + h * An[k]))
        add_block(r0, nx + k * m, -h * Bn[k])
    add_block(n_steps * n, 0, eye)
    add_block(n_steps * n + n, n_steps * n, eye)
    nc = n_steps * n + 2 * n
    C = sp.csr_matrix((vals, (rows, cols)), shape=(nc, nv))
    d = np.zeros(nc)
    d[n_steps * n : n_steps * n + n] = spec.x0
    d[n_steps * n + n :] = spec.xf
    return hdiag, C, d, lo, hi, nx


def _equality_kkt_solve(hdiag, C, rhs_w, rhs_y):
    nv = hdiag.size
    K = sp.bmat([[sp.diags(hdiag), C.T], [C, None]], format="csc")
    sol = spla.splu(K).solve(np.concatenate([rhs_w, rhs_y]))
    return sol[:nv], sol[nv:]


def _projected_gradient(w, g, lo, hi):
    return float(np.max(np.abs(w - np.clip(w - g, lo, hi))))


def _interior_point(hdiag, C, d, lo, hi, tolerance):
    """cvxopt QP on the transcription; returns (w, y, z_bounds, status)."""
    import cvxopt
    import cvxopt.solvers

    nv = hdiag.size
    has_lo = np.isfinite(lo)
    has_hi = np.isfinite(hi)
    idx_lo = np.where(has_lo)[0]
    idx_hi = np.where(has_hi)[0]
    n_ineq = idx_lo.size + idx_hi.size

    P = cvxopt.spdiag(cvxopt.matrix(hdiag))
    q = cvxopt.matrix(np.zeros(nv))
    g_vals = np.concatenate([-np.ones(idx_lo.size), np.ones(idx_hi.size)])
    g_rows = np.arange(n_ineq)
    g_cols = np.concatenate([idx_lo, idx_hi])
    G = cvxopt.spmatrix(
        g_vals, g_rows.astype(int).tolist(), g_cols.astype(int).tolist(),
        size=(n_ineq, nv),
    )
    h_vec = cvxopt.matrix(np.concatenate([-lo[idx_lo], hi[idx_hi]]))
    Cc = C.tocoo()
    A = cvxopt.spmatrix(
        Cc.data, Cc.row.astype(int).tolist(), Cc.col.astype(int).tolist(),
        size=C.shape,
    )
    b = cvxopt.matrix(d)
    options = {
        "show_progress": False,
        "abstol": min(tolerance, 1e-9),
        "reltol": min(tolerance, 1e-9),
        "feastol": min(tolerance, 1e-9),
        "maxiters": 200,
    }
    solution = cvxopt.solvers.qp(P, q, G, h_vec, A, b, options=options)
    w = np.asarray(solution["x"]).ravel()
    y = np.asarray(solution["y"]).ravel()
    z = np.asarray(solution["z"]).ravel()
    zl = np.zeros(nv)
    zu = np.zeros(nv)
    zl[idx_lo] = z[: idx_lo.size]
    zu[idx_hi] = z[idx_lo.size :]
    return w, y, zl, zu, solution["status"]


def feasibility_gap(spec: ProblemSpec, grid: TimeGrid) -> float:
    """Exact LP value of the smallest max-norm relaxation t >= 0 such that
    some box-feasible control drives the Euler dynamics within t of the
    terminal state while violating the state bounds by at most t. Zero iff
    the transcribed constraint system is consistent."""
    n, m, h = spec.n, spec.m, grid.h
    n_steps = grid.n_steps
    A = spec.a_on(grid)
    B = spec.b_on(grid)
    An = A if A.ndim == 3 else np.broadcast_to(A, (grid.n_nodes, n, n))
    Bn = B if B.ndim == 3 else np.broadcast_to(B, (grid.n_nodes, n, m))
    # x_k = base_k + columns_k @ u, u = (u_0, ..., u_{N-1}) stacked
    base = np.zeros((n_steps + 1, n))
    columns = np.zeros((n_steps + 1, n, n_steps * m))
    base[0] = spec.x0
    for k in range(n_steps):
        step = np.eye(n) + h * An[k]
        base[k + 1] = step @ base[k]
        columns[k + 1] = step @ columns[k]
        columns[k + 1][:, k * m : (k + 1) * m] += h * Bn[k]
    rows = [
        np.hstack([columns[-1], -np.ones((n, 1))]),
        np.hstack([-columns[-1], -np.ones((n, 1))]),
    ]
    rhs = [spec.xf - base[-1], -(spec.xf - base[-1])]
    for i in range(n):
        if np.isfinite(spec.x_lower[i]):
            rows.append(np.hstack([-columns[:, i, :], -np.ones((n_steps + 1, 1))]))
            rhs.append(base[:, i] - spec.x_lower[i])
        if np.isfinite(spec.x_upper[i]):
            rows.append(np.hstack([columns[:, i, :], -np.ones((n_steps + 1, 1))]))
            rhs.append(spec.x_upper[i] - base[:, i])
    cost = np.zeros(n_steps * m + 1)
    cost[-1] = 1.0
    bounds = [
        (spec.u_lower[j % m], spec.u_upper[j % m]) for j in range(n_steps * m)
    ] + [(0.0, None)]
    result = linprog(
        cost,
        A_ub=np.vstack(rows),
        b_ub=np.concatenate(rhs),
        bounds=bounds,
        method="highs",
    )
    if not result.success:
        raise InfeasibleDiscretization(
            f"feasibility check failed: {result.message}"
        )
    return float(result.fun)


def solve_discretized_qp(
    spec: ProblemSpec,
    grid: TimeGrid,
    tolerance: float = 1e-8,
) -> TrajectoryPair:
    """Solve the Euler-transcribed quadratic program to the given KKT
    residual tolerance.

    Raises InfeasibleDiscretization when the equality system is
    inconsistent with the bounds (certified by an exact reachability LP)
    and IterationLimit if the interior point stalls on a feasible
    problem."""
    spec.check_grid(grid)
    if grid.n_steps * (spec.n + spec.m) > MAX_VARIABLES:
        raise ValidationError(
            f"grid too large for the dense oracle: N*(n+m) = "
            f"{grid.n_steps * (spec.n + spec.m)} > {MAX_VARIABLES}"
        )
    hdiag, C, d, lo, hi, nx = _assemble(spec, grid)
    has_lo = np.isfinite(lo)
    has_hi = np.isfinite(hi)

    if not (has_lo.any() or has_hi.any()):
        w, _ = _equality_kkt_solve(hdiag, C, np.zeros(hdiag.size), d)
        return _wrap(w, nx, grid, spec)

    w, y, zl, zu, status = _interior_point(hdiag, C, d, lo, hi, tolerance)
    if status != "optimal":
        gap = feasibility_gap(spec, grid)
        if gap > max(10 * tolerance, 1e-7):
            raise InfeasibleDiscretization(
                f"constraint system inconsistent with the bounds on this "
                f"grid (feasibility gap {gap:.3e})"
            )
        raise IterationLimit(f"interior-point status {status!r}")

    kkt = max(
        float(np.max(np.abs(C @ w - d))),
        _projected_gradient(w, hdiag * w + C.T @ y, lo, hi),
    )
    crossed = _crossover(hdiag, C, d, lo, hi, has_lo, has_hi, w, zl, zu)
    if crossed is not None and crossed[1] <= max(kkt, tolerance):
        return _wrap(np.clip(crossed[0], lo, hi), nx, grid, spec)
    if kkt > tolerance:
        raise IterationLimit(
            f"KKT residual {kkt:.2e} above tolerance {tolerance:.2e}"
        )
    return _wrap(np.clip(w, lo, hi), nx, grid, spec)


def _crossover(hdiag, C, d, lo, hi, has_lo, has_hi, w, zl, zu):
    """Fix the complementarity-identified active bounds and re-solve the
    equality KKT exactly; returns (w, kkt) or None if the guess fails."""
    sl = np.where(has_lo, w - lo, np.inf)
    su = np.where(has_hi, hi - w, np.inf)
    at_lo = has_lo & (sl < zl)
    at_hi = has_hi & (su < zu)
    free = ~(at_lo | at_hi)
    w_fix = np.where(at_lo, lo, 0.0) + np.where(at_hi, hi, 0.0)
    Cf = C[:, free].tocsc()
    nf = int(free.sum())
    K = sp.bmat([[sp.diags(hdiag[free]), Cf.T], [Cf, None]], format="csc")
    rhs = np.concatenate([np.zeros(nf), d - C[:, ~free] @ w_fix[~free]])
    try:
        sol = spla.splu(K).solve(rhs)
    except RuntimeError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    w_c = w_fix.copy()
    w_c[free] = sol[:nf]
    y_c = sol[nf:]
    violation = max(
        float(np.max(np.where(has_lo, lo - w_c, -np.inf), initial=-np.inf)),
        float(np.max(np.where(has_hi, w_c - hi, -np.inf), initial=-np.inf)),
    )
    if violation > 1e-9 * max(1.0, float(np.max(np.abs(w_c)))):
        return None
    g = hdiag * w_c + C.T @ y_c
    kkt = max(
        float(np.max(np.abs(C @ w_c - d))),
        _projected_gradient(np.clip(w_c, lo, hi), g, lo, hi),
    )
    return w_c, kkt


def _wrap(w, nx, grid, spec) -> TrajectoryPair:
    x = w[:nx].reshape(grid.n_nodes, spec.n)
    u = w[nx:].reshape(grid.n_nodes, spec.m)
    return TrajectoryPair(x, u)
