"""Dense two-phase primal simplex.

Small and self-contained so that survival verdicts are bit-stable across
platforms: no external solver, deterministic pivoting, Dantzig pricing with
a fallback to Bland's rule once the iteration count suggests cycling.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
OPT_TOL = 1e-9
MAX_ITER = 100_000
REDUNDANT_TOL = 1e-9
MAX_BASIS_COND = 1e12


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class LinearProgram:
    """maximize ``objective @ x`` s.t. ``G x >= h``, ``E x = f``, ``lower <= x <= upper``.

    Missing constraint blocks may be left as ``None``. Bounds default to
    ``x >= 0`` with no upper bound.
    """

    objective: np.ndarray
    ineq_lhs: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq_lhs: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        self.objective = c

        def block(lhs, rhs, name):
            if lhs is None or np.size(lhs) == 0:
                return np.zeros((0, n)), np.zeros(0)
            lhs = np.atleast_2d(np.asarray(lhs, dtype=float))
            rhs = np.asarray(rhs, dtype=float).ravel()
            if lhs.shape[1] != n or lhs.shape[0] != rhs.size:
                raise ValueError(f"{name} block has shape {lhs.shape} vs rhs {rhs.size}, {n} variables")
            return lhs, rhs

        self.ineq_lhs, self.ineq_rhs = block(self.ineq_lhs, self.ineq_rhs, "inequality")
        self.eq_lhs, self.eq_rhs = block(self.eq_lhs, self.eq_rhs, "equality")
        self.lower = np.zeros(n) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (n,)).copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (n,)).copy()
        for arr in (c, self.ineq_lhs, self.ineq_rhs, self.eq_lhs, self.eq_rhs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite LP data")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf) or np.any(self.lower > self.upper):
            raise ValueError("inconsistent variable bounds")

    @property
    def num_vars(self) -> int:
        return self.objective.size


@dataclass
class LPSolution:
    status: Status
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = float("nan")
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


class _Standard:
    """Equality standard form ``A z = b, z >= 0`` with the map back to ``x``."""

    def __init__(self, lp: LinearProgram):
        n = lp.num_vars
        cols = []  # per original variable: list of (std column, coefficient)
        shift = np.zeros(n)
        ub_rows = []  # (std column, width)
        ny = 0
        for j in range(n):
            lo, hi = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                shift[j] = lo
                cols.append([(ny, 1.0)])
                if np.isfinite(hi):
                    ub_rows.append((ny, hi - lo))
                ny += 1
            elif np.isfinite(hi):
                shift[j] = hi
                cols.append([(ny, -1.0)])
                ny += 1
            else:
                cols.append([(ny, 1.0), (ny + 1, -1.0)])
                ny += 2
        T = np.zeros((n, ny))
        for j, entries in enumerate(cols):
            for col, coef in entries:
                T[j, col] = coef
        self.T, self.shift, self.ny = T, shift, ny

        G, h = lp.ineq_lhs @ T, lp.ineq_rhs - lp.ineq_lhs @ shift
        E, f = lp.eq_lhs @ T, lp.eq_rhs - lp.eq_lhs @ shift
        mg, me, mu = G.shape[0], E.shape[0], len(ub_rows)
        m = mg + me + mu
        nslack = mg + mu
        A = np.zeros((m, ny + nslack))
        b = np.zeros(m)
        A[:mg, :ny] = G
        A[:mg, ny:ny + mg] = -np.eye(mg)
        b[:mg] = h
        A[mg:mg + me, :ny] = E
        b[mg:mg + me] = f
        for r, (col, width) in enumerate(ub_rows):
            A[mg + me + r, col] = 1.0
            A[mg + me + r, ny + mg + r] = 1.0
            b[mg + me + r] = width
        neg = b < 0
        A[neg] *= -1
        b[neg] *= -1
        self.A, self.b = A, b

        # a slack column whose coefficient ended up +1 is a ready-made basic variable
        self.start = np.full(m, -1)
        for i in range(mg):
            if neg[i]:
                self.start[i] = ny + i
        for r in range(mu):
            i = mg + me + r
            if not neg[i]:
                self.start[i] = ny + mg + r

    def to_x(self, z: np.ndarray) -> np.ndarray:
        return self.shift + self.T @ z[:self.ny]


def _leaving_row(tab: np.ndarray, basis: np.ndarray, j: int, bland: bool) -> int:
    """Ratio test for entering column ``j``; -1 if the column is unbounded.

    Dantzig mode uses a two-pass (Harris) test: among rows whose ratio is
    within the feasibility tolerance of the minimum it takes the largest
    pivot element, which keeps tiny pivots out of degenerate ties. Bland
    mode takes the exact minimum with the smallest basic index.
    """
    m = basis.size
    col = tab[:m, j]
    rows = np.flatnonzero(col > PIVOT_TOL)
    if rows.size == 0:
        return -1
    rhs = np.maximum(tab[rows, -1], 0.0)
    ratios = rhs / col[rows]
    if bland:
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        return int(ties[np.argmin(basis[ties])])
    theta = ((rhs + FEAS_TOL) / col[rows]).min()
    ok = rows[ratios <= theta]
    return int(ok[np.argmax(col[ok])])


def _run(tab: np.ndarray, basis: np.ndarray, ncols: int, max_iter: int, it0: int):
    """Maximize over a canonical tableau whose last row holds ``-reduced costs``.

    ``tab`` is (m+1) x (ncols+1); the last column is the rhs. Returns the
    termination tag and the iteration counter.
    """
    m = basis.size
    bland_after = 50 * (m + ncols)
    it = it0
    local = 0
    while True:
        if it >= max_iter:
            return "limit", it
        z = tab[m, :ncols]
        bland = local >= bland_after
        if bland:
            cand = np.flatnonzero(z < -OPT_TOL)
            if cand.size == 0:
                return "optimal", it
            j = int(cand[0])
        else:
            j = int(np.argmin(z))
            if z[j] >= -OPT_TOL:
                return "optimal", it
        i = _leaving_row(tab, basis, j, bland)
        if i < 0:
            return "unbounded", it
        _pivot(tab, i, j)
        basis[i] = j
        it += 1
        local += 1


def _reinvert(tab: np.ndarray, basis: np.ndarray, full: np.ndarray, b: np.ndarray, cost: np.ndarray) -> bool:
    """Rebuild the tableau for ``basis`` from the original columns; False if singular."""
    m = basis.size
    Bm = full[:, basis]
    if np.linalg.cond(Bm) > MAX_BASIS_COND:
        return False
    try:
        body = np.linalg.solve(Bm, np.hstack([full, b[:, None]]))
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(body)):
        return False
    ncols = full.shape[1]
    tab[:m] = body
    tab[:m, basis] = np.eye(m)
    tab[:m, -1] = np.maximum(tab[:m, -1], 0.0)
    tab[m, :ncols] = cost[basis] @ tab[:m, :ncols] - cost
    tab[m, basis] = 0.0
    tab[m, -1] = cost[basis] @ tab[:m, -1]
    return True


def _solve_phase(tab, basis, full, b, cost, max_iter, it, rounds: int = 4):
    """``_run`` followed by reinversion and a fresh optimality check, repeated if needed."""
    ncols = full.shape[1]
    for _ in range(rounds):
        tag, it = _run(tab, basis, ncols, max_iter, it)
        if tag != "optimal" or not _reinvert(tab, basis, full, b, cost):
            return tag, it
        if tab[basis.size, :ncols].min(initial=0.0) >= -OPT_TOL:
            return "optimal", it
    return _run(tab, basis, ncols, max_iter, it)


def _pivot(tab: np.ndarray, i: int, j: int) -> None:
    tab[i] /= tab[i, j]
    col = tab[:, j].copy()
    col[i] = 0.0
    tab -= np.outer(col, tab[i])
    tab[:, j] = 0.0
    tab[i, j] = 1.0


class _Tableau:
    """Phase-1-feasible canonical tableau that can be re-optimized for new objectives."""

    def __init__(self, lp: LinearProgram, max_iter: int = MAX_ITER):
        self.lp = lp
        self.std = std = _Standard(lp)
        self.A, self.b = std.A, std.b
        self.max_iter = max_iter
        self.it = 0
        m, nz = self.A.shape
        self.nz = nz
        need_art = np.flatnonzero(std.start < 0)
        nart = need_art.size
        ncols = nz + nart
        tab = np.zeros((m + 1, ncols + 1))
        tab[:m, :nz] = self.A
        tab[:m, -1] = self.b
        basis = std.start.copy()
        for r, i in enumerate(need_art):
            tab[i, nz + r] = 1.0
            basis[i] = nz + r
        self.tab, self.basis = tab, basis
        self.status = None
        if nart:
            self._phase1(need_art, ncols)

    def _phase1(self, need_art, ncols):
        tab, basis, nz = self.tab, self.basis, self.nz
        m = basis.size
        tab[m, :] = -tab[need_art].sum(axis=0)
        tab[m, nz:ncols] = 0.0
        full = tab[:m, :ncols].copy()
        cost = np.r_[np.zeros(nz), -np.ones(ncols - nz)]
        tag, self.it = _solve_phase(tab, basis, full, self.b, cost, self.max_iter, self.it)
        if tag == "limit":
            self.status = Status.NUMERICAL_FAILURE
            return
        if -tab[m, -1] > FEAS_TOL * (1.0 + np.abs(self.b).max()):
            self.status = Status.INFEASIBLE
            return
        keep = np.ones(m, dtype=bool)
        keep_orig = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= nz:
                row = np.abs(tab[i, :nz])
                j = int(np.argmax(row))
                if row[j] > REDUNDANT_TOL:
                    _pivot(tab, i, j)
                    basis[i] = j
                else:
                    # the artificial's own constraint is a combination of the others
                    keep[i] = False
                    keep_orig[need_art[basis[i] - nz]] = False
        tab = np.vstack([tab[:m][keep], tab[m:]])
        self.tab = np.delete(tab, np.s_[nz:ncols], axis=1)
        self.basis = basis[keep]
        self.A, self.b = self.A[keep_orig], self.b[keep_orig]

    def optimize(self, objective: np.ndarray) -> LPSolution:
        """Phase 2 for ``objective`` starting from the current (feasible) basis."""
        if self.status is not None:
            return LPSolution(self.status, iterations=self.it)
        std, tab, basis, nz = self.std, self.tab, self.basis, self.nz
        c = np.concatenate([std.T.T @ objective, np.zeros(nz - std.ny)])
        m = basis.size
        if m == 0:
            if np.any(c > OPT_TOL):
                return LPSolution(Status.UNBOUNDED, iterations=self.it)
            x = std.to_x(np.zeros(nz))
            return LPSolution(Status.OPTIMAL, x, float(objective @ x), self.it)
        tab[m, :] = 0.0
        tab[m, :nz] = -c
        tab[m] += c[basis] @ tab[:m]
        tag, self.it = _solve_phase(tab, basis, self.A, self.b, c, self.max_iter, self.it)
        if tag == "limit":
            return LPSolution(Status.NUMERICAL_FAILURE, iterations=self.it)
        if tag == "unbounded":
            return LPSolution(Status.UNBOUNDED, iterations=self.it)

        # recompute the basic solution from the original data to shed pivot drift
        A, b = self.A, self.b
        z = np.zeros(nz)
        try:
            zb = np.linalg.solve(A[:, basis], b)
        except np.linalg.LinAlgError:
            zb = tab[:m, -1]
        if zb.min(initial=0.0) < -FEAS_TOL * (1.0 + np.abs(b).max()):
            zb = tab[:m, -1]
        z[basis] = np.maximum(zb, 0.0)
        x = std.to_x(z)
        lp = self.lp
        if _residual(lp, x) > FEAS_TOL * (1.0 + _scale(lp)):
            return LPSolution(Status.NUMERICAL_FAILURE, x, float(objective @ x), self.it)
        return LPSolution(Status.OPTIMAL, x, float(objective @ x), self.it)


def solve(lp: LinearProgram, max_iter: int = MAX_ITER) -> LPSolution:
    return _Tableau(lp, max_iter).optimize(lp.objective)


def _scale(lp: LinearProgram) -> float:
    return max(np.abs(lp.ineq_rhs).max(initial=0.0), np.abs(lp.eq_rhs).max(initial=0.0))


def _residual(lp: LinearProgram, x: np.ndarray) -> float:
    """Max primal infeasibility of ``x`` (0 when feasible)."""
    r = 0.0
    if lp.ineq_rhs.size:
        r = max(r, float(np.max(lp.ineq_rhs - lp.ineq_lhs @ x, initial=0.0)))
    if lp.eq_rhs.size:
        r = max(r, float(np.abs(lp.eq_lhs @ x - lp.eq_rhs).max()))
    r = max(r, float(np.max(lp.lower - x, initial=0.0)), float(np.max(x - lp.upper, initial=0.0)))
    return r


def min_l1_nonneg(A, b) -> LPSolution:
    """Minimum ``sum(x)`` over ``{x >= 0 : A x = b}``.

    Returned as a maximization of ``-sum(x)``, so ``objective_value`` is the
    negated size; the basic optimum has at most ``rows(A)`` nonzeros.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    sol = solve(LinearProgram(-np.ones(A.shape[1]), eq_lhs=A, eq_rhs=b))
    if sol.ok:
        sol.objective_value = -sol.objective_value
    return sol


def box_range(A, b, j: int) -> tuple[float, float]:
    """Range of coordinate ``j`` over ``{0 <= x <= 1 : A x = b}``.

    Raises ``InfeasibleError`` if the slice is empty and ``LPFailure`` on a
    numerical breakdown.
    """
    return box_ranges(A, b, [j])[0]


def box_ranges(A, b, coords=None) -> list[tuple[float, float]]:
    """``box_range`` for several coordinates sharing one phase-1 basis.

    Each min/max problem starts from the previous optimum, which stays
    feasible since only the objective changes.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    coords = range(n) if coords is None else coords
    tab = _Tableau(LinearProgram(np.zeros(n), eq_lhs=A, eq_rhs=b, lower=0.0, upper=1.0))
    if tab.status is Status.INFEASIBLE:
        raise InfeasibleError("box-constrained slice is empty")
    out = []
    for j in coords:
        e = np.zeros(n)
        e[j] = 1.0
        ends = []
        for sign in (-1.0, 1.0):
            sol = tab.optimize(sign * e)
            if not sol.ok:
                raise LPFailure(f"box range for coordinate {j}: {sol.status.value}")
            ends.append(float(sol.x[j]))
        out.append((ends[0], ends[1]))
    return out


class LPFailure(RuntimeError):
    pass


class InfeasibleError(LPFailure):
    pass
