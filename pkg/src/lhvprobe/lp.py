"""Dense bounded-variable revised simplex.

Solves ``maximize c.x  subject to  A x = b,  0 <= x <= u`` (``u`` may be
infinite). Phase 1 starts from one artificial variable per row and either
reaches a feasible basis or stops with a Farkas dual proving infeasibility.
Dependent rows are tolerated: artificials that survive Phase 1 at level zero
are pinned to [0, 0] and pivoted out when a pivot needs them to move.

Every answer is re-audited with independent arithmetic before it is returned.
"""

from dataclasses import dataclass, field

import numpy as np

from ._jit import kernel

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
OPT_TOL = 1e-9
FARKAS_STRICTNESS = 1e-7
REFACTOR_EVERY = 40

FEASIBLE = "feasible-optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# kernel status codes
_OPTIMAL, _INFEASIBLE, _UNBOUNDED, _ITERATION_LIMIT, _SINGULAR = 0, 1, 2, 3, 4


class LpError(RuntimeError):
    pass


class LpSingularError(LpError):
    pass


class LpIterationLimit(LpError):
    pass


@dataclass
class LpProblem:
    """maximize objective.x  s.t.  constraint_matrix x = rhs,  0 <= x <= upper."""

    constraint_matrix: np.ndarray
    rhs: np.ndarray
    objective: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        m, n = a.shape
        if m < 1 or n < 1:
            raise ValueError("LP needs at least one row and one column")
        b = np.asarray(self.rhs, dtype=float).reshape(m)
        c = np.zeros(n) if self.objective is None else np.asarray(self.objective, dtype=float)
        u = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if c.shape != (n,) or u.shape != (n,):
            raise ValueError("objective and upper bounds must have one entry per column")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        if np.any(u < 0) or np.any(np.isnan(u)):
            raise ValueError("upper bounds must be nonnegative")
        self.constraint_matrix, self.rhs, self.objective, self.upper = a, b, c, u

    @property
    def shape(self):
        return self.constraint_matrix.shape

    def to_dict(self):
        return {
            "constraint_matrix": self.constraint_matrix.tolist(),
            "rhs": self.rhs.tolist(),
            "objective": self.objective.tolist(),
            "upper": [None if not np.isfinite(v) else float(v) for v in self.upper],
        }

    @classmethod
    def from_dict(cls, data):
        upper = data.get("upper")
        if upper is not None:
            upper = [np.inf if v is None else v for v in upper]
        return cls(data["constraint_matrix"], data["rhs"], data.get("objective"), upper)


@dataclass
class LpOutcome:
    status: str
    solution: np.ndarray = None
    objective_value: float = None
    farkas_dual: np.ndarray = None
    residual: float = 0.0
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.status == FEASIBLE

    def to_dict(self):
        out = {"status": self.status, "residual": self.residual, "iterations": self.iterations}
        if self.solution is not None:
            out["solution"] = self.solution.tolist()
            out["objective_value"] = self.objective_value
        if self.farkas_dual is not None:
            out["farkas_dual"] = self.farkas_dual.tolist()
        return out


@kernel
def _simplex_kernel(a, b, cost, upper, max_iter, pivot_tol, feas_tol, opt_tol, refactor_every):
    """Two-phase bounded revised simplex, minimizing ``cost.x``.

    Returns (status, x, objective, phase-1 duals on the original rows, iterations).
    """
    m, n = a.shape
    nt = n + m
    sign = np.ones(m)
    for i in range(m):
        if b[i] < 0.0:
            sign[i] = -1.0
    # column-major copy of [diag(sign) A | I]: tt[j] is column j
    tt = np.zeros((nt, m))
    for i in range(m):
        for j in range(n):
            tt[j, i] = sign[i] * a[i, j]
        tt[n + i, i] = 1.0
    rhs = sign * b
    ub = np.empty(nt)
    ub[:n] = upper
    ub[n:] = np.inf

    basis = np.arange(n, nt)
    in_basis = np.zeros(nt, dtype=np.bool_)
    in_basis[n:] = True
    at_upper = np.zeros(nt, dtype=np.bool_)
    binv = np.eye(m)
    xb = rhs.copy()
    status = _OPTIMAL
    total_iter = 0
    y = np.zeros(m)

    for phase in range(2):
        c = np.zeros(nt)
        if phase == 0:
            c[n:] = 1.0
        else:
            c[:n] = cost
            ub[n:] = 0.0
        bland = False
        best_obj = np.inf
        stall = 0
        since_refactor = 0
        while True:
            if since_refactor >= refactor_every:
                bmat = np.empty((m, m))
                for i in range(m):
                    for k in range(m):
                        bmat[i, k] = tt[basis[k], i]
                binv = np.ascontiguousarray(np.linalg.inv(bmat))
                r = rhs.copy()
                for j in range(nt):
                    if at_upper[j]:
                        r -= ub[j] * tt[j]
                xb = binv @ r
                since_refactor = 0

            cb = np.empty(m)
            for i in range(m):
                cb[i] = c[basis[i]]
            obj = cb @ xb
            for j in range(nt):
                if at_upper[j]:
                    obj += c[j] * ub[j]
            if obj < best_obj - 1e-12:
                best_obj = obj
                stall = 0
            else:
                stall += 1
                if stall > 2 * nt:
                    bland = True

            pi = cb @ binv
            d = c - tt @ pi
            enter = -1
            best = 0.0
            direction = 0
            for j in range(nt):
                if in_basis[j] or ub[j] <= 0.0:
                    continue
                if at_upper[j]:
                    score = d[j]
                    dj = -1
                else:
                    score = -d[j]
                    dj = 1
                if score > opt_tol:
                    if bland:
                        enter = j
                        direction = dj
                        break
                    if score > best:
                        best = score
                        enter = j
                        direction = dj
            if enter < 0:
                if phase == 0:
                    y = sign * pi
                break
            if total_iter >= max_iter:
                status = _ITERATION_LIMIT
                break
            total_iter += 1
            since_refactor += 1

            alpha = binv @ tt[enter]
            # basic variables move by rate[i] per unit step of the entering variable
            rate = -direction * alpha
            step = ub[enter]
            leave = -1
            leave_to_upper = False
            if bland:
                for i in range(m):
                    ri = rate[i]
                    if ri < -pivot_tol:
                        ti = max(xb[i], 0.0) / (-ri)
                        to_up = False
                    elif ri > pivot_tol and ub[basis[i]] < np.inf:
                        ti = max(ub[basis[i]] - xb[i], 0.0) / ri
                        to_up = True
                    else:
                        continue
                    if ti < step or (ti == step and leave >= 0 and basis[i] < basis[leave]):
                        step = ti
                        leave = i
                        leave_to_upper = to_up
            else:
                # Harris two-pass ratio test
                relaxed = ub[enter]
                for i in range(m):
                    ri = rate[i]
                    if ri < -pivot_tol:
                        ti = (xb[i] + feas_tol) / (-ri)
                    elif ri > pivot_tol and ub[basis[i]] < np.inf:
                        ti = (ub[basis[i]] - xb[i] + feas_tol) / ri
                    else:
                        continue
                    if ti < relaxed:
                        relaxed = ti
                biggest = 0.0
                for i in range(m):
                    ri = rate[i]
                    if ri < -pivot_tol:
                        ti = xb[i] / (-ri)
                        to_up = False
                    elif ri > pivot_tol and ub[basis[i]] < np.inf:
                        ti = (ub[basis[i]] - xb[i]) / ri
                        to_up = True
                    else:
                        continue
                    if ti <= relaxed and abs(ri) > biggest:
                        biggest = abs(ri)
                        leave = i
                        leave_to_upper = to_up
                        step = max(ti, 0.0)
                if leave >= 0 and ub[enter] < step:
                    step = ub[enter]
                    leave = -1

            if leave < 0 and step == np.inf:
                status = _UNBOUNDED
                break

            xb += step * rate
            if leave < 0:
                at_upper[enter] = not at_upper[enter]
                continue

            old = basis[leave]
            if direction > 0:
                entering_value = step
            else:
                entering_value = ub[enter] - step
            xb[leave] = entering_value
            at_upper[enter] = False
            at_upper[old] = leave_to_upper and ub[old] > 0.0
            in_basis[old] = False
            in_basis[enter] = True
            basis[leave] = enter
            piv = alpha[leave]
            if abs(piv) < pivot_tol:
                status = _SINGULAR
                break
            row = binv[leave] / piv
            for i in range(m):
                if i != leave and alpha[i] != 0.0:
                    binv[i] -= alpha[i] * row
            binv[leave] = row

        if status != _OPTIMAL:
            break
        if phase == 0:
            infeas = 0.0
            for i in range(m):
                if basis[i] >= n:
                    infeas += max(xb[i], 0.0)
            if infeas > feas_tol:
                status = _INFEASIBLE
                break
            # phase 2 starts from a fresh factorization
            since_refactor = refactor_every

    x = np.zeros(nt)
    for j in range(nt):
        if at_upper[j]:
            x[j] = ub[j]
    if status == _OPTIMAL:
        bmat = np.empty((m, m))
        for i in range(m):
            for k in range(m):
                bmat[i, k] = tt[basis[k], i]
        r = rhs.copy()
        for j in range(nt):
            if at_upper[j]:
                r -= ub[j] * tt[j]
        xb = np.linalg.solve(bmat, r)
    for i in range(m):
        x[basis[i]] = xb[i]
    return status, x[:n], cost @ x[:n], y, total_iter


def farkas_gap(a, b, upper, y):
    """y.b - sum_j u_j max(0, y.A_j): positive means y proves {Ax=b, 0<=x<=u} empty.

    Columns with infinite bounds must satisfy y.A_j <= FEAS_TOL to count; the
    returned tuple is (gap, worst violation on unbounded columns).
    """
    ya = y @ a
    finite = np.isfinite(upper)
    worst = float(np.max(ya[~finite], initial=-np.inf))
    gap = float(y @ b - np.sum(upper[finite] * np.maximum(ya[finite], 0.0)))
    return gap, worst


def solve(problem, max_iter=20000):
    """Solve an :class:`LpProblem`; raises for unbounded-free failures, never guesses.

    Returns an :class:`LpOutcome` with status FEASIBLE (solution attached),
    INFEASIBLE (Farkas dual attached) or UNBOUNDED.
    """
    a, b, u = problem.constraint_matrix, problem.rhs, problem.upper
    status, x, obj, y, iters = _simplex_kernel(
        np.ascontiguousarray(a),
        np.ascontiguousarray(b),
        np.ascontiguousarray(-problem.objective),
        np.ascontiguousarray(u),
        max_iter,
        PIVOT_TOL,
        FEAS_TOL,
        OPT_TOL,
        REFACTOR_EVERY,
    )
    if status == _ITERATION_LIMIT:
        raise LpIterationLimit(f"simplex hit the iteration limit ({max_iter})")
    if status == _SINGULAR:
        raise LpSingularError("pivot element vanished; basis numerically singular")
    if status == _UNBOUNDED:
        return LpOutcome(UNBOUNDED, iterations=iters)
    if status == _INFEASIBLE:
        gap, worst = farkas_gap(a, b, u, y)
        if gap < FARKAS_STRICTNESS and gap > 0:
            # a valid but small witness; rescale while the column test still holds
            scale = 10 * FARKAS_STRICTNESS / gap
            if worst <= 0 or worst * scale <= FEAS_TOL:
                y = y * scale
                gap, worst = farkas_gap(a, b, u, y)
        if gap < FARKAS_STRICTNESS or worst > FEAS_TOL:
            raise LpSingularError(
                f"phase 1 reported infeasibility but the dual is not a strict witness "
                f"(gap {gap:.3e}, column violation {worst:.3e})"
            )
        return LpOutcome(INFEASIBLE, farkas_dual=y, residual=gap, iterations=iters)
    residual = float(np.max(np.abs(a @ x - b)))
    low = float(np.min(x))
    over = float(np.max(x - u))
    if residual > FEAS_TOL or low < -FEAS_TOL or over > FEAS_TOL:
        raise LpSingularError(
            f"returned point fails the audit (residual {residual:.3e}, min {low:.3e})"
        )
    return LpOutcome(
        FEASIBLE,
        solution=x,
        objective_value=float(problem.objective @ x),
        residual=residual,
        iterations=iters,
    )
