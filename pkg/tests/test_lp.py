import itertools

import numpy as np
import pytest

from polyface import lp
from polyface.lp import LinearProgram, Status, box_range, box_ranges, min_l1_nonneg, solve


def test_one_dimensional_bounds():
    sol = solve(LinearProgram([1.0], lower=0.0, upper=1.0))
    assert sol.status is Status.OPTIMAL
    assert sol.x == pytest.approx([1.0])


def test_contradictory_bounds_infeasible():
    sol = solve(LinearProgram([1.0], ineq_lhs=[[1.0]], ineq_rhs=[1.0], lower=-np.inf, upper=0.0))
    assert sol.status is Status.INFEASIBLE


def test_unbounded():
    sol = solve(LinearProgram([1.0, 0.0], ineq_lhs=[[1.0, -1.0]], ineq_rhs=[0.0]))
    assert sol.status is Status.UNBOUNDED


def test_max_margin_quadrant_hand_solution():
    # max t  s.t.  c1 >= t, c2 >= t, |c|_inf <= 1  ->  t = 1 at c = (1, 1)
    G = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0]])
    sol = solve(LinearProgram([0, 0, 1.0], ineq_lhs=G, ineq_rhs=[0, 0],
                              lower=[-1, -1, -np.inf], upper=[1, 1, np.inf]))
    assert sol.ok
    assert sol.objective_value == pytest.approx(1.0)
    assert sol.x[:2] == pytest.approx([1.0, 1.0])


def test_min_l1_identity():
    sol = min_l1_nonneg(np.eye(2), [1.0, 2.0])
    assert sol.ok
    assert sol.x == pytest.approx([1.0, 2.0])
    assert sol.objective_value == pytest.approx(3.0)


def test_min_l1_degenerate_tie_returns_vertex():
    sol = min_l1_nonneg([[1.0, 1.0]], [1.0])
    assert sol.ok
    assert sorted(sol.x.tolist()) == pytest.approx([0.0, 1.0])


def test_min_l1_infeasible_outside_cone():
    sol = min_l1_nonneg([[1.0, 1.0]], [-1.0])
    assert sol.status is Status.INFEASIBLE


def test_box_range_examples():
    assert box_range([[1.0, 0.0]], [0.3], 0) == pytest.approx((0.3, 0.3))
    assert box_range([[1.0, 1.0]], [1.0], 0) == pytest.approx((0.0, 1.0))
    with pytest.raises(lp.InfeasibleError):
        box_range([[1.0, 1.0]], [3.0], 0)


def test_box_ranges_match_single_calls():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 6))
    x0 = rng.uniform(0, 1, 6)
    b = A @ x0
    together = box_ranges(A, b)
    for j in range(6):
        assert together[j] == pytest.approx(box_range(A, b, j), abs=1e-9)
        lo, hi = together[j]
        assert lo - 1e-9 <= x0[j] <= hi + 1e-9


def _brute_force_max(c, G, h, lo, hi):
    """Best objective over all vertices of {G x >= h, lo <= x <= hi} (bounded box)."""
    n = c.size
    rows = [(G[i], h[i]) for i in range(G.shape[0])]
    rows += [(np.eye(n)[j], lo[j]) for j in range(n)]
    rows += [(-np.eye(n)[j], -hi[j]) for j in range(n)]
    best = -np.inf
    for active in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[i][0] for i in active])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, np.array([rows[i][1] for i in active]))
        if np.all(G @ x >= h - 1e-9) and np.all(x >= lo - 1e-9) and np.all(x <= hi + 1e-9):
            best = max(best, float(c @ x))
    return best


def test_optimum_matches_vertex_enumeration():
    rng = np.random.default_rng(2024)
    checked = 0
    for trial in range(100):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        c = rng.standard_normal(n)
        G = rng.standard_normal((m, n))
        x_feas = rng.uniform(-1, 1, n)
        h = G @ x_feas - rng.uniform(0, 1, m)  # x_feas is strictly feasible
        lo, hi = -2 * np.ones(n), 2 * np.ones(n)
        sol = solve(LinearProgram(c, ineq_lhs=G, ineq_rhs=h, lower=lo, upper=hi))
        assert sol.ok, trial
        assert sol.objective_value == pytest.approx(_brute_force_max(c, G, h, lo, hi), abs=1e-7)
        checked += 1
    assert checked == 100


def test_equality_constrained_against_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = 5
        A = rng.standard_normal((2, n))
        x0 = rng.uniform(0.1, 0.9, n)
        c = rng.standard_normal(n)
        sol = solve(LinearProgram(c, eq_lhs=A, eq_rhs=A @ x0, lower=0.0, upper=1.0))
        assert sol.ok
        # vertices of the slice: 3 coordinates at a bound, the other 2 solved for
        best = -np.inf
        for free in itertools.combinations(range(n), 2):
            fixed = [j for j in range(n) if j not in free]
            for vals in itertools.product([0.0, 1.0], repeat=3):
                x = np.zeros(n)
                x[fixed] = vals
                Af = A[:, list(free)]
                if abs(np.linalg.det(Af)) < 1e-12:
                    continue
                x[list(free)] = np.linalg.solve(Af, A @ x0 - A[:, fixed] @ np.array(vals))
                if np.all(x >= -1e-9) and np.all(x <= 1 + 1e-9):
                    best = max(best, float(c @ x))
        assert sol.objective_value == pytest.approx(best, abs=1e-7)


def test_min_l1_solutions_are_basic():
    rng = np.random.default_rng(11)
    for _ in range(20):
        A = rng.standard_normal((4, 10))
        b = A @ rng.uniform(0, 1, 10)
        sol = min_l1_nonneg(A, b)
        assert sol.ok
        assert np.sum(sol.x > 1e-9) <= 4
        assert np.abs(A @ sol.x - b).max() <= 1e-9 * (1 + np.abs(b).max())


def test_deterministic():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((6, 15))
    b = A @ rng.uniform(0, 1, 15)
    s1, s2 = min_l1_nonneg(A, b), min_l1_nonneg(A, b)
    assert s1.iterations == s2.iterations
    assert np.array_equal(s1.x, s2.x)


def test_iteration_cap_reports_numerical_failure():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((5, 12))
    sol = solve(LinearProgram(-np.ones(12), eq_lhs=A, eq_rhs=A @ np.ones(12)), max_iter=1)
    assert sol.status is Status.NUMERICAL_FAILURE


def test_rejects_malformed():
    with pytest.raises(ValueError):
        LinearProgram([1.0, 2.0], ineq_lhs=[[1.0]], ineq_rhs=[0.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], lower=[2.0], upper=[1.0])


def test_degenerate_feasible_systems_never_infeasible():
    # many zero right-hand sides plus free variables: the setting where tiny
    # degenerate pivots used to wreck phase 1
    rng = np.random.default_rng(99)
    for _ in range(300):
        M, m = int(rng.integers(3, 9)), int(rng.integers(2, 6))
        P = rng.standard_normal((M, m))
        g = rng.standard_normal(m)
        lam = rng.uniform(0.05, 1.0, M)
        lam /= lam.sum()
        mu = float(rng.standard_normal())
        P[-1] = (mu * g - lam[:-1] @ P[:-1]) / lam[-1]  # sum(lam_i p_i) = mu g holds exactly
        nv = M + 2
        ineq = np.zeros((M, nv))
        ineq[:, :M] = np.eye(M)
        ineq[:, -1] = -1.0
        eq = np.zeros((m + 1, nv))
        eq[:m, :M] = P.T
        eq[:m, M] = -g
        eq[m, :M] = 1.0
        rhs = np.r_[np.zeros(m), 1.0]
        sol = solve(LinearProgram(np.r_[np.zeros(M + 1), 1.0], ineq_lhs=ineq, ineq_rhs=np.zeros(M),
                                  eq_lhs=eq, eq_rhs=rhs, lower=np.r_[np.zeros(M), -np.inf, -np.inf]))
        assert sol.ok
        assert sol.objective_value >= lam.min() - 1e-9
