import numpy as np
import pytest

from zclink import qcqp


def margin_problem(rows, w, bound):
    """Wrap margin rows and an energy weighting into epigraph form."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    m, n = rows.shape
    b = -np.hstack([rows, np.ones((m, 1))])
    w_full = np.hstack([w, np.zeros((w.shape[0], 1))])
    a = np.zeros(n + 1)
    a[-1] = 1.0
    return qcqp.EpigraphProblem(a=a, b_ineq=b, w=w_full, energy_bound=bound)


def random_margin_problem(rng, nmax=19):
    """Well-posed margin instance: rows share a positive direction, the
    energy weighting has full rank, so the optimum is strictly positive."""
    n = int(rng.integers(2, nmax + 1))
    m = int(rng.integers(3, 2 * n + 3))
    rows = rng.standard_normal((m, n))
    rows[:, 0] = np.abs(rows[:, 0]) + 1.0
    w = rng.standard_normal((n, n)) + 0.5 * np.eye(n)
    return margin_problem(rows, w, float(rng.uniform(0.1, 2.0)))


TOY = margin_problem([[1.0]], [[1.0]], 0.5)


class TestToy:
    def test_solve_matches_closed_form(self):
        sol = qcqp.solve(TOY)
        assert sol.status == qcqp.STATUS_OPTIMAL
        assert sol.gamma == pytest.approx(np.sqrt(0.5), abs=1e-9)
        assert sol.r[0] == pytest.approx(np.sqrt(0.5), abs=1e-9)

    def test_oracle_agrees(self):
        assert qcqp.oracle_solve(TOY).gamma == pytest.approx(np.sqrt(0.5), abs=1e-9)

    def test_zero_energy_budget(self):
        p = margin_problem([[1.0]], [[1.0]], 0.0)
        sol = qcqp.solve(p)
        assert sol.status == qcqp.STATUS_OPTIMAL
        assert np.array_equal(sol.r, np.zeros(2))
        assert sol.gamma == 0.0


class TestSolveVsOracle:
    def test_random_instances_agree(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            p = random_margin_problem(rng)
            s = qcqp.solve(p)
            o = qcqp.oracle_solve(p)
            assert s.status == qcqp.STATUS_OPTIMAL
            scale = max(abs(s.gamma), abs(o.gamma), 1e-4)
            assert abs(s.gamma - o.gamma) / scale < 1e-4
            assert max(s.kkt_residuals.values()) <= 1e-6

    def test_near_degenerate_margin(self):
        # two rows force opposite signs on the same coordinate, pinning the
        # optimum at zero; solver and oracle agree within the tolerance
        rows = [[1.0, 0.3], [-1.0, -0.3], [0.2, 1.0]]
        p = margin_problem(rows, np.eye(2), 1.0)
        tol = 1e-7
        s = qcqp.solve(p, tol=tol)
        o = qcqp.oracle_solve(p)
        assert abs(s.gamma - o.gamma) <= tol
        assert o.gamma == pytest.approx(0.0, abs=1e-9)

    def test_infeasible_margin_probe(self):
        rows = [[1.0, 0.3], [-1.0, -0.3], [0.2, 1.0]]
        p = margin_problem(rows, np.eye(2), 1.0)
        assert not qcqp.margin_feasible(p, 0.5)
        # the toy's optimum brackets correctly too
        assert qcqp.margin_feasible(TOY, 0.5)
        assert not qcqp.margin_feasible(TOY, 0.8)


class TestFeasibilityReport:
    def test_origin_is_clean(self):
        assert qcqp.check_feasibility(TOY, np.zeros(2)) == (0.0, 0.0)

    def test_optimal_point_is_clean(self):
        sol = qcqp.solve(TOY)
        ineq, energy = qcqp.check_feasibility(TOY, sol.r)
        assert ineq <= 1e-7
        assert energy <= 1e-7

    def test_energy_violation_scales_quadratically(self):
        sol = qcqp.solve(TOY)
        _, energy = qcqp.check_feasibility(TOY, 2.0 * sol.r)
        # doubling an energy-tight point leaves 4E - E = 3E excess
        assert energy == pytest.approx(3.0 * TOY.energy_bound, rel=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qcqp.check_feasibility(TOY, np.zeros(3))


class TestConvexStructure:
    def test_midpoints_stay_feasible(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            p = random_margin_problem(rng, nmax=8)
            r1 = qcqp.solve(p).r
            r2 = np.zeros(p.dim)
            mid = 0.5 * (r1 + r2)
            ineq, energy = qcqp.check_feasibility(p, mid)
            assert ineq <= 1e-9
            assert energy <= 1e-9

    def test_gamma_monotone_in_energy_budget(self):
        rng = np.random.default_rng(29)
        rows = rng.standard_normal((6, 4))
        rows[:, 0] = np.abs(rows[:, 0]) + 1.0
        w = np.eye(4)
        gammas = [
            qcqp.solve(margin_problem(rows, w, bound)).gamma
            for bound in (0.1, 0.5, 1.0, 2.0)
        ]
        assert all(g2 >= g1 - 1e-9 for g1, g2 in zip(gammas, gammas[1:]))

    def test_energy_active_at_positive_optimum(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            p = random_margin_problem(rng, nmax=10)
            sol = qcqp.solve(p)
            if sol.gamma > 1e-4:
                assert p.energy(sol.r) == pytest.approx(p.energy_bound, rel=1e-5)

    def test_scaling_covariance(self):
        # scaling W by c and the bound by c^2 leaves the optimum unchanged
        rng = np.random.default_rng(37)
        rows = rng.standard_normal((8, 5))
        rows[:, 0] = np.abs(rows[:, 0]) + 1.0
        w = rng.standard_normal((5, 5)) + 0.5 * np.eye(5)
        c = 3.7
        s1 = qcqp.solve(margin_problem(rows, w, 0.8))
        s2 = qcqp.solve(margin_problem(rows, c * w, c * c * 0.8))
        assert np.allclose(s1.r, s2.r, atol=1e-6)
        assert s1.gamma == pytest.approx(s2.gamma, rel=1e-6)


class TestPhaseOne:
    def test_mixed_sign_epigraph_column(self):
        # no strictly feasible start along the last coordinate exists, so
        # the solver must find one via its auxiliary problem
        b = np.array([[1.0, 1.0], [-1.0, -0.5]])
        a = np.array([0.0, 1.0])
        w = np.array([[1.0, 0.0], [0.0, 1.0]])
        p = qcqp.EpigraphProblem(a=a, b_ineq=b, w=w, energy_bound=1.0)
        sol = qcqp.solve(p)
        ineq, energy = qcqp.check_feasibility(p, sol.r)
        assert ineq <= 1e-7
        assert energy <= 1e-7
        assert sol.status in (qcqp.STATUS_OPTIMAL, qcqp.STATUS_MAX_ITERATIONS)


class TestValidation:
    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            qcqp.EpigraphProblem(a=[0.0, 1.0], b_ineq=[[1.0]], w=[[1.0, 0.0]], energy_bound=1.0)

    def test_negative_bound_rejected(self):
        with pytest.raises(ValueError):
            qcqp.EpigraphProblem(a=[0.0, 1.0], b_ineq=[[1.0, -1.0]], w=[[1.0, 0.0]], energy_bound=-1.0)

    def test_oracle_requires_margin_form(self):
        p = qcqp.EpigraphProblem(
            a=[1.0, 0.0], b_ineq=[[-1.0, -1.0]], w=[[1.0, 0.0]], energy_bound=1.0
        )
        with pytest.raises(ValueError):
            qcqp.oracle_solve(p)

    def test_oracle_requires_positive_definite_weighting(self):
        p = margin_problem([[1.0, 0.0]], [[1.0, 0.0]], 1.0)  # rank-1 weighting
        with pytest.raises(ValueError):
            qcqp.oracle_solve(p)


def test_solutions_deterministic():
    rng = np.random.default_rng(41)
    p = random_margin_problem(rng)
    r1 = qcqp.solve(p).r
    r2 = qcqp.solve(p).r
    assert np.array_equal(r1, r2)
