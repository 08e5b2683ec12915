"""Epigraph-form convex program: linear objective, linear inequalities, one
convex quadratic energy constraint.

    minimize    a' r
    subject to  B r <= 0
                r' W'W r <= energy_bound

The margin problems built by the precoder put r = [p, -gamma] with
a = [0, ..., 0, 1], so minimizing a'r maximizes the margin gamma.  The
solver is a primal log-barrier interior-point method; ``oracle_solve`` is a
deliberately independent slow reference (bisection on the margin with a
projected-gradient feasibility check) used only in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class EpigraphProblem:
    """One instance of the program above.

    r = 0 is always feasible (B 0 = 0 and zero energy), so every instance
    has a solution.  ``precomputed_quad`` lets callers that share one
    energy weighting across many problems skip re-forming W'W.
    """

    a: np.ndarray
    b_ineq: np.ndarray
    w: np.ndarray
    energy_bound: float
    precomputed_quad: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.atleast_2d(np.asarray(self.b_ineq, dtype=float))
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b_ineq", b)
        object.__setattr__(self, "w", w)
        n = len(a)
        if b.shape[1] != n or w.shape[1] != n:
            raise ValueError(
                f"inconsistent dimensions: a has {n}, B has {b.shape[1]}, W has {w.shape[1]}"
            )
        if self.precomputed_quad is not None and self.precomputed_quad.shape != (n, n):
            raise ValueError("precomputed_quad shape mismatch")
        if self.energy_bound < 0:
            raise ValueError("energy_bound must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def n_ineq(self) -> int:
        return self.b_ineq.shape[0]

    @cached_property
    def quad(self) -> np.ndarray:
        """W'W, formed once per problem."""
        if self.precomputed_quad is not None:
            return self.precomputed_quad
        return self.w.T @ self.w

    def energy(self, r: np.ndarray) -> float:
        return float(r @ self.quad @ r)


@dataclass
class PrecodeSolution:
    """Solver output: the point, its margin, and certification residuals."""

    r: np.ndarray
    gamma: float
    objective: float
    kkt_residuals: dict[str, float]
    status: str
    iterations: int
    retries: int = 0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL


def check_feasibility(problem: EpigraphProblem, r: np.ndarray) -> tuple[float, float]:
    """Nonnegative violation measures (max inequality, energy excess)."""
    r = np.asarray(r, dtype=float)
    if r.shape != (problem.dim,):
        raise ValueError(f"r has shape {r.shape}, expected ({problem.dim},)")
    ineq = float(max(0.0, np.max(problem.b_ineq @ r, initial=-np.inf)))
    energy = float(max(0.0, problem.energy(r) - problem.energy_bound))
    return ineq, energy


def _strictly_feasible_start(problem: EpigraphProblem) -> np.ndarray | None:
    """Cheap strictly interior point: push the epigraph coordinate so every
    inequality has slack.  Works whenever B's last column has one sign."""
    n = problem.dim
    col = problem.b_ineq[:, -1]
    for sign in (1.0, -1.0):
        if np.all(sign * col < 0):
            r = np.zeros(n)
            scale = 1.0
            q_last = problem.quad[-1, -1]
            if q_last > 0 and problem.energy_bound > 0:
                scale = min(1.0, 0.5 * math.sqrt(problem.energy_bound / q_last))
            r[-1] = sign * scale
            if (
                np.max(problem.b_ineq @ r) < 0
                and problem.energy(r) < problem.energy_bound
            ):
                return r
    return None


def _newton_barrier(
    c: np.ndarray,
    b_rows: np.ndarray,
    quad: np.ndarray,
    bound: float,
    r0: np.ndarray,
    t0: float,
    t_stop: float,
    mu: float,
    max_outer: int,
    stop_when=None,
    final_grad_tol: float | None = None,
):
    """Minimize t*c'r - sum log(-B r) - log(bound - r'Qr) along the central
    path, returning (r, t, newton_steps, failed).

    At the final barrier weight the centering additionally runs until the
    scaled gradient norm drops below ``final_grad_tol * t``, which bounds
    the mapped stationarity residual of the returned point.
    """
    r = r0.copy()
    n = len(r)
    t = t0
    total_steps = 0

    def barrier_terms(r):
        s = -(b_rows @ r)
        e = bound - float(r @ quad @ r)
        return s, e

    s, e = barrier_terms(r)
    if np.min(s) <= 0 or e <= 0:
        return r, t, total_steps, True

    for _ in range(max_outer):
        # center at the current t
        fallbacks = 0
        for _ in range(40):
            s, e = barrier_terms(r)
            inv_s = 1.0 / s
            qr = quad @ r
            grad = t * c + b_rows.T @ inv_s + (2.0 / e) * qr
            centered = float(np.max(np.abs(grad))) <= (
                final_grad_tol * t if final_grad_tol is not None else 0.0
            )
            if centered and t >= t_stop:
                break
            hess = (b_rows * inv_s[:, None] ** 2).T @ b_rows
            hess += (2.0 / e) * quad + (4.0 / e**2) * np.outer(qr, qr)
            # Jacobi-normalize before factorizing so the ridge perturbs
            # every direction relative to its own curvature; the raw
            # Hessian spreads over ~t^2 between active and slack terms.
            d = np.sqrt(np.maximum(np.diag(hess), 1e-150))
            hess_n = hess / d[:, None] / d[None, :]
            ridge = 1e-12
            try:
                chol = np.linalg.cholesky(hess_n + ridge * np.eye(n))
            except np.linalg.LinAlgError:
                chol = np.linalg.cholesky(hess_n + 1e-6 * np.eye(n))
            step = -np.linalg.solve(chol.T, np.linalg.solve(chol, grad / d)) / d
            decrement = float(-grad @ step)
            total_steps += 1
            if not np.isfinite(decrement):
                return r, t, total_steps, True
            if decrement <= 2e-12 * (1.0 + abs(t * float(c @ r))) and (
                t < t_stop or final_grad_tol is None or centered
            ):
                break
            # Backtracking line search keeping strict feasibility.  The
            # barrier value difference is evaluated term by term (inner
            # product of the step, log ratios of slacks) so late-stage
            # decreases far below the absolute barrier magnitude remain
            # resolvable in float64.
            alpha = 1.0
            accepted = False
            fallback = None
            c_step = float(c @ step)
            for _ in range(60):
                r_new = r + alpha * step
                s_new, e_new = barrier_terms(r_new)
                if np.min(s_new) > 0 and e_new > 0:
                    delta_phi = (
                        t * alpha * c_step
                        - float(np.sum(np.log(s_new / s)))
                        - math.log(e_new / e)
                    )
                    if delta_phi <= -0.25 * alpha * decrement:
                        r = r_new
                        accepted = True
                        break
                    if fallback is None and delta_phi <= 0:
                        fallback = r_new
                alpha *= 0.5
            if not accepted:
                fallbacks += 1
                if fallback is not None and fallbacks <= 6:
                    r = fallback
                    continue
                break
        if stop_when is not None and stop_when(r):
            return r, t, total_steps, False
        if t >= t_stop:
            return r, t, total_steps, False
        t = min(t * mu, t_stop)
    return r, t, total_steps, False


def _phase_one(problem: EpigraphProblem, max_outer: int) -> np.ndarray | None:
    """Find a strictly feasible point by minimizing a shared slack u over
    B r <= u, r'Qr <= bound, starting from (r, u) = (0, 1)."""
    n = problem.dim
    m = problem.n_ineq
    c = np.zeros(n + 1)
    c[-1] = 1.0
    b_aug = np.hstack([problem.b_ineq, -np.ones((m, 1))])
    quad_aug = np.zeros((n + 1, n + 1))
    quad_aug[:n, :n] = problem.quad
    r0 = np.zeros(n + 1)
    r0[-1] = 1.0
    bound = problem.energy_bound if problem.energy_bound > 0 else 1.0
    ru, _, _, failed = _newton_barrier(
        c,
        b_aug,
        quad_aug,
        bound,
        r0,
        t0=1.0,
        t_stop=1e6,
        mu=20.0,
        max_outer=max_outer,
        stop_when=lambda ru: ru[-1] < -1e-9,
    )
    if failed or ru[-1] >= 0:
        return None
    return ru[:n]


def solve(
    problem: EpigraphProblem,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> PrecodeSolution:
    """Interior-point solve; deterministic given the problem data.

    ``tol`` bounds the reported KKT residuals at status "optimal";
    ``max_iter`` caps outer barrier updates.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = problem.dim
    m = problem.n_ineq

    if problem.energy_bound <= 0:
        # zero energy budget: the only energy-feasible direction is the
        # epigraph coordinate, and B r <= 0 pins the margin at 0
        r = np.zeros(n)
        residuals = {"stationarity": 0.0, "primal_feasibility": 0.0, "complementarity": 0.0}
        return PrecodeSolution(
            r=r,
            gamma=-r[-1],
            objective=float(problem.a @ r),
            kkt_residuals=residuals,
            status=STATUS_OPTIMAL,
            iterations=0,
        )

    # unit row norms improve Newton conditioning without changing the set
    row_norms = np.linalg.norm(problem.b_ineq, axis=1)
    row_norms[row_norms == 0] = 1.0
    b_scaled = problem.b_ineq / row_norms[:, None]

    r0 = _strictly_feasible_start(problem)
    if r0 is None:
        r0 = _phase_one(problem, max_outer=max_iter)
    if r0 is None:
        return PrecodeSolution(
            r=np.zeros(n),
            gamma=0.0,
            objective=0.0,
            kkt_residuals={"stationarity": np.inf, "primal_feasibility": 0.0, "complementarity": np.inf},
            status=STATUS_NUMERICAL_FAILURE,
            iterations=0,
        )

    # The barrier's duality gap limits the certificate quality; when the
    # fitted residuals miss the tolerance, continue along the central path
    # with a larger final weight and re-certify.
    t0 = 1.0
    t_stop = 2.0 / tol
    total_steps = 0
    r_barrier = r0
    best = None
    for _ in range(2):
        r_barrier, t, steps, failed = _newton_barrier(
            problem.a,
            b_scaled,
            problem.quad,
            problem.energy_bound,
            r_barrier,
            t0=t0,
            t_stop=t_stop,
            mu=20.0,
            max_outer=max_iter,
            final_grad_tol=0.05 * tol,
        )
        total_steps += steps
        if failed or not np.all(np.isfinite(r_barrier)):
            if best is not None:
                break
            return PrecodeSolution(
                r=r_barrier,
                gamma=float(-r_barrier[-1]) if np.all(np.isfinite(r_barrier)) else 0.0,
                objective=float(problem.a @ r_barrier) if np.all(np.isfinite(r_barrier)) else np.inf,
                kkt_residuals={
                    "stationarity": np.inf,
                    "primal_feasibility": np.inf,
                    "complementarity": np.inf,
                },
                status=STATUS_NUMERICAL_FAILURE,
                iterations=total_steps,
            )
        r = _polish(problem, r_barrier)
        residuals = _kkt_certificate(problem, r)
        if best is None or max(residuals.values()) < max(best[1].values()):
            best = (r, residuals)
        if max(residuals.values()) <= tol:
            break
        t0 = t
        t_stop = t_stop * 100.0

    r, residuals = best
    status = STATUS_OPTIMAL if max(residuals.values()) <= tol else STATUS_MAX_ITERATIONS
    return PrecodeSolution(
        r=r,
        gamma=float(-r[-1]),
        objective=float(problem.a @ r),
        kkt_residuals=residuals,
        status=status,
        iterations=total_steps,
    )


def _polish(problem: EpigraphProblem, r_barrier: np.ndarray) -> np.ndarray:
    """Absorb the barrier's interior slack without leaving the feasible set.

    The inequalities form a cone, so when the objective is negative the
    iterate can be scaled onto the energy boundary; for margin-form
    problems the epigraph coordinate is then tightened to the margin the
    iterate actually achieves.  Both moves keep feasibility exactly and
    only improve the objective.
    """
    r = r_barrier
    obj = float(problem.a @ r)
    energy = problem.energy(r)
    if obj < 0 and 0 < energy <= problem.energy_bound:
        r = r * math.sqrt(problem.energy_bound / energy)

    if (
        problem.a[-1] == 1.0
        and not np.any(problem.a[:-1])
        and np.all(problem.b_ineq[:, -1] == -1.0)
        and not np.any(problem.quad[-1, :])
    ):
        achieved = float(np.min(-problem.b_ineq[:, :-1] @ r[:-1]))
        if -achieved <= r[-1]:
            r = r.copy()
            r[-1] = -achieved
    return r


def _kkt_certificate(problem: EpigraphProblem, r: np.ndarray) -> dict[str, float]:
    """KKT residuals of a candidate point with post-fitted duals.

    One nonnegative multiplier vector is fitted by least squares to the
    joint criterion (stationarity residual plus slack-weighted
    complementarity products), then both residuals are reported for that
    same vector.  At a near-optimal point the true duals make both terms
    small simultaneously, so the fit certifies optimality without relying
    on the barrier's analytic duals.
    """
    from scipy.optimize import lsq_linear, nnls

    m = problem.n_ineq
    slacks = -(problem.b_ineq @ r)
    energy_slack = problem.energy_bound - problem.energy(r)
    columns = np.hstack([problem.b_ineq.T, (2.0 * problem.quad @ r)[:, None]])
    comp_block = np.zeros((m + 1, m + 1))
    comp_block[np.arange(m), np.arange(m)] = np.abs(slacks)
    comp_block[m, m] = abs(energy_slack)
    system = np.vstack([columns, comp_block])
    rhs = np.concatenate([-problem.a, np.zeros(m + 1)])
    scales = np.linalg.norm(system, axis=0)
    scales[scales == 0] = 1.0
    try:
        y, _ = nnls(system / scales, rhs, maxiter=30 * (m + 1))
    except RuntimeError:
        y = lsq_linear(system / scales, rhs, bounds=(0.0, np.inf), tol=1e-14).x
    y = y / scales
    stationarity = float(np.max(np.abs(problem.a + columns @ y)))
    complementarity = float(
        max(
            np.max(y[:-1] * np.abs(slacks), initial=0.0),
            y[-1] * abs(energy_slack),
        )
    )
    ineq_viol, energy_viol = check_feasibility(problem, r)
    return {
        "stationarity": stationarity,
        "primal_feasibility": max(ineq_viol, energy_viol),
        "complementarity": complementarity,
    }


# ---------------------------------------------------------------------------
# independent slow reference


def _project_ellipsoid(x: np.ndarray, eigvals: np.ndarray, eigvecs: np.ndarray, bound: float) -> np.ndarray:
    """Euclidean projection onto {p : p'Qp <= bound} with Q = V diag(l) V'.

    The Lagrange multiplier solves sum(l y^2 / (1 + mu l)^2) = bound; a
    safeguarded Newton iteration on that secular equation converges in a
    handful of steps.
    """
    y = eigvecs.T @ x
    if float(np.sum(eigvals * y * y)) <= bound:
        return x
    if bound == 0.0:
        y = np.where(eigvals > 0, 0.0, y)
        return eigvecs @ y

    def quad_at(mu):
        z = 1.0 + mu * eigvals
        return float(np.sum(eigvals * y * y / (z * z)))

    lo, hi = 0.0, 1.0
    while quad_at(hi) > bound and hi < 1e18:
        lo, hi = hi, hi * 2.0
    mu = 0.5 * (lo + hi)
    for _ in range(80):
        z = 1.0 + mu * eigvals
        f = float(np.sum(eigvals * y * y / (z * z))) - bound
        if abs(f) <= 1e-13 * bound:
            break
        if f > 0:
            lo = mu
        else:
            hi = mu
        fprime = -2.0 * float(np.sum(eigvals**2 * y * y / (z * z * z)))
        mu_newton = mu - f / fprime if fprime < 0 else mu
        mu = mu_newton if lo < mu_newton < hi else 0.5 * (lo + hi)
    z = y / (1.0 + mu * eigvals)
    return eigvecs @ z


def _margin_feasible(
    rows: np.ndarray,
    gamma: float,
    eigvals: np.ndarray,
    eigvecs: np.ndarray,
    bound: float,
    p0: np.ndarray,
    iterations: int,
    feas_tol: float,
) -> tuple[bool, np.ndarray]:
    """Decide whether {p : rows p >= gamma, p'Qp <= bound} is nonempty by
    accelerated projected-gradient descent on the squared hinge violation,
    with a stall exit once progress stops."""
    lip = 2.0 * float(np.linalg.norm(rows, 2)) ** 2
    step = 1.0 / max(lip, 1e-12)
    p = _project_ellipsoid(p0, eigvals, eigvecs, bound)
    momentum = np.zeros_like(p)
    theta = 1.0
    best = np.inf
    stalled = 0
    restarts = 0
    for _ in range(iterations):
        q = p + momentum
        viol = gamma - rows @ q
        active = viol > 0
        if not np.any(active):
            return True, q
        grad = -2.0 * rows[active].T @ viol[active]
        p_new = _project_ellipsoid(q - step * grad, eigvals, eigvecs, bound)
        theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        momentum = ((theta - 1.0) / theta_new) * (p_new - p)
        p, theta = p_new, theta_new
        worst = float(np.max(gamma - rows @ p, initial=-np.inf))
        if worst <= 0:
            return True, p
        if worst < best - 1e-14 * max(1.0, abs(best)):
            best = worst
            stalled = 0
        else:
            stalled += 1
            if stalled > 50:
                if restarts < 2:
                    restarts += 1
                    momentum = np.zeros_like(p)
                    theta = 1.0
                    stalled = 0
                    best = worst
                else:
                    break
    viol = gamma - rows @ p
    return bool(np.max(viol) <= feas_tol), p


def margin_feasible(problem: EpigraphProblem, gamma: float, iterations: int = 4000) -> bool:
    """Feasibility of a fixed margin for a margin-form problem; this is the
    oracle's bisection query exposed for bracket certification."""
    rows = -problem.b_ineq[:, :-1]
    quad = problem.quad[:-1, :-1]
    eigvals, eigvecs = np.linalg.eigh(quad)
    eigvals = np.maximum(eigvals, 0.0)
    ok, _ = _margin_feasible(
        rows, gamma, eigvals, eigvecs, problem.energy_bound,
        np.zeros(problem.dim - 1), iterations, 1e-5 * abs(gamma),
    )
    return ok


def _min_norm_in_hull(points: np.ndarray, max_major: int) -> np.ndarray:
    """Minimum-norm point in the convex hull of the rows of ``points``
    (Wolfe's finite active-set algorithm)."""
    m = points.shape[0]
    norms2 = np.einsum("ij,ij->i", points, points)
    scale = float(norms2.max()) if m else 0.0
    if scale == 0.0:
        return np.zeros(points.shape[1])
    active = [int(np.argmin(norms2))]
    weights = np.array([1.0])
    x = points[active[0]].copy()
    for _ in range(max_major):
        scores = points @ x
        j = int(np.argmin(scores))
        if scores[j] >= float(x @ x) - 1e-14 * scale or j in active:
            break
        active.append(j)
        weights = np.append(weights, 0.0)
        for _ in range(2 * m + 10):
            sub = points[active]
            gram = sub @ sub.T
            e = np.ones(len(active))
            try:
                alpha = np.linalg.solve(gram + 1e-14 * scale * np.eye(len(active)), e)
            except np.linalg.LinAlgError:
                alpha = np.linalg.lstsq(gram, e, rcond=None)[0]
            total = float(alpha.sum())
            if abs(total) < 1e-300:
                break
            alpha = alpha / total
            if np.all(alpha > 1e-12):
                weights = alpha
                break
            shrink = alpha <= 1e-12
            ratios = weights[shrink] / (weights[shrink] - alpha[shrink])
            theta = float(min(1.0, np.min(ratios)))
            weights = (1.0 - theta) * weights + theta * alpha
            keep = weights > 1e-14
            if not np.any(keep):
                keep[int(np.argmax(weights))] = True
            active = [a for a, k in zip(active, keep) if k]
            weights = weights[keep]
            weights = weights / weights.sum()
        x = weights @ points[active]
    return x


def oracle_solve(problem: EpigraphProblem, iterations: int = 2000) -> PrecodeSolution:
    """Slow independent reference for margin problems (a = e_last).

    Substituting q = Q^(1/2) p turns the energy ellipsoid into a ball, and
    by minimax duality the max-min margin over a ball equals sqrt(bound)
    times the distance from the origin to the convex hull of the
    transformed margin rows.  That minimum-norm point is computed with
    Wolfe's finite active-set algorithm, so the reference shares no code
    path with the interior-point solver.  Requires a positive-definite
    energy weighting on the non-epigraph block and small dimensions;
    intended for tests.  ``iterations`` caps the active-set cycles.
    """
    n = problem.dim
    a = problem.a
    if abs(a[-1] - 1.0) > 0 or np.any(a[:-1] != 0):
        raise ValueError("oracle_solve expects the margin objective a = [0, ..., 0, 1]")
    if np.any(problem.b_ineq[:, -1] != -1.0):
        raise ValueError("oracle_solve expects B's last column to be -1 (margin form)")
    if np.any(problem.quad[-1, :] != 0) or np.any(problem.quad[:, -1] != 0):
        raise ValueError("oracle_solve expects W's last column to be zero")
    rows = -problem.b_ineq[:, :-1]
    quad = problem.quad[:-1, :-1]
    eigvals, eigvecs = np.linalg.eigh(quad)
    if eigvals.min() <= 1e-12 * max(eigvals.max(), 1.0):
        raise ValueError("oracle_solve requires a positive-definite energy weighting")

    inv_sqrt = eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T
    rows_t = rows @ inv_sqrt

    g = _min_norm_in_hull(rows_t, max_major=iterations)
    norm_g = float(np.linalg.norm(g))
    root_e = math.sqrt(problem.energy_bound)
    gamma = root_e * norm_g
    if norm_g > 0:
        p = inv_sqrt @ (root_e * g / norm_g)
    else:
        p = np.zeros(n - 1)

    r = np.concatenate([p, [-gamma]])
    ineq_viol, energy_viol = check_feasibility(problem, r)
    return PrecodeSolution(
        r=r,
        gamma=gamma,
        objective=float(problem.a @ r),
        kkt_residuals={
            "stationarity": np.nan,
            "primal_feasibility": max(ineq_viol, energy_viol),
            "complementarity": np.nan,
        },
        status=STATUS_OPTIMAL,
        iterations=iterations,
    )
