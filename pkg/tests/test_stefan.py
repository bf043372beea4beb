import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import classical_mu_oracle, mp_wright
from fracstefan.special import gamma_ratio
from fracstefan.stefan import (
    DomainError,
    InvalidProblemError,
    NoRootError,
    StefanProblem,
    big_f,
    build_solution,
    classical_neumann,
    classical_residual,
    eval_front,
    eval_u1,
    eval_u2,
    f1,
    f2,
    flux_at_front,
    root_function,
    solve,
    solve_xi,
)

INV_GAMMA_075 = 0.81604893909826298  # 1 / Gamma(0.75), mpmath


class TestCharacteristicFunctions:
    def test_f1_half_order(self):
        expected = math.exp(-0.25) / math.sqrt(math.pi) / math.erf(0.5)
        assert expected == pytest.approx(0.84417174373582, rel=1e-13)
        assert f1(1.0, 1.0) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_f1_limits(self, alpha):
        assert f1(0.0, alpha) == math.inf
        assert f1(1e-8, alpha) > 1e6
        assert f1(60.0, alpha) < 1e-10
        x = np.linspace(0.05, 6, 200)
        assert np.all(np.diff(f1(x, alpha)) < 0)

    def test_f1_against_oracle(self):
        for alpha, x in [(0.3, 0.4), (0.75, 2.0)]:
            ref = mp_wright(x, alpha, "m") / (1 - mp_wright(x, alpha, 1.0))
            assert f1(x, alpha) == pytest.approx(float(ref), rel=1e-10)

    def test_f2_at_zero(self):
        assert float(1 / mp.gamma(mp.mpf("0.75"))) == pytest.approx(INV_GAMMA_075, rel=1e-15)
        assert f2(0.0, 0.5) == pytest.approx(INV_GAMMA_075, rel=1e-13)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_f2_growth(self, alpha):
        x = np.array([0.0, 1.0, 10.0, 100.0, 1000.0])
        v = f2(x, alpha)
        assert np.all(np.diff(v) > 0)
        p = alpha / (2 - alpha)
        ratio = v[-1] / ((alpha / 2) ** p * x[-1] ** p)
        assert abs(ratio - 1) < 0.05

    def test_f2_against_oracle(self):
        for alpha, x in [(0.3, 0.4), (0.75, 2.0), (0.5, 6.0)]:
            ref = mp_wright(x, alpha, "m", dps=60) / mp_wright(x, alpha, 1.0, dps=60)
            assert f2(x, alpha) == pytest.approx(float(ref), rel=1e-10)

    def test_big_f_limits(self, default_problem):
        assert big_f(1e-9, default_problem) > 1e6
        assert big_f(1e3, default_problem) < -10
        assert root_function(1e-8, default_problem) > 0
        assert root_function(50.0, default_problem) < 0

    def test_big_f_symmetric_parameters(self):
        p = StefanProblem(u0=1.0, um=0.0, ui=-1.0, alpha=0.6)
        x = np.linspace(0.1, 4, 30)
        coef = p.k1 * (p.u0 - p.um) / (p.rho * p.l * p.diffusivities.lambda1**2)
        np.testing.assert_allclose(big_f(x, p), coef * (f1(x, 0.6) - f2(x, 0.6)), rtol=1e-14, atol=1e-15)


class TestSolveXi:
    def test_classical_case_matches_oracle(self, default_problem):
        p = default_problem.with_alpha(1.0)
        two_mu = 2 * classical_mu_oracle(p)
        rep = solve_xi(p)
        assert rep.xi == pytest.approx(two_mu, abs=1e-10)
        assert solve(p).xi == pytest.approx(two_mu, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_residual_contract(self, default_problem, alpha):
        p = default_problem.with_alpha(alpha)
        rep = solve_xi(p)
        gam = gamma_ratio(alpha)
        for r, res in zip(rep.roots, rep.residuals):
            assert abs(res) <= rep.residual_tol * (1 + gam * r)
            assert abs(big_f(r, p) - gam * r) <= 1e-10 * (1 + gam * r)
        assert rep.roots == sorted(rep.roots)
        assert "smallest root" in rep.multiplicity_note

    def test_asymmetric_problem(self, asymmetric_problem):
        rep = solve_xi(asymmetric_problem)
        assert len(rep.roots) >= 1
        assert rep.xi > 0

    def test_one_phase_reduction(self):
        alpha = 0.6
        base = StefanProblem(alpha=alpha)
        lam = base.diffusivities.lambda_ratio
        coef = base.liquid_coeff
        gam = gamma_ratio(alpha)

        def h(x):  # reduced equation in mpmath arithmetic
            return coef * mp_wright(lam * x, alpha, "m", dps=30) / (1 - mp_wright(lam * x, alpha, 1.0, dps=30)) - gam * x

        lo, hi = 0.1, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if h(mid) > 0 else (lo, mid)
        target = 0.5 * (lo + hi)
        gaps = [abs(solve_xi(dataclasses.replace(base, ui=-d)).xi - target) for d in (1e-1, 1e-2, 1e-3, 1e-5)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-4

    def test_no_root_in_small_window(self, default_problem):
        with pytest.raises(NoRootError):
            solve_xi(default_problem, scan_max=0.2)

    def test_argument_validation(self, default_problem):
        with pytest.raises(ValueError):
            solve_xi(default_problem, tol=0.0)
        with pytest.raises(ValueError):
            solve_xi(default_problem, scan_max=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(k2=st.floats(0.2, 5), l=st.floats(0.2, 5), u0=st.floats(0.1, 10), ui=st.floats(-10, -0.1),
           alpha=st.floats(0.1, 0.95))
    def test_root_contract_random_problems(self, k2, l, u0, ui, alpha):
        p = StefanProblem(k2=k2, l=l, u0=u0, ui=ui, alpha=alpha)
        rep = solve_xi(p)
        gam = gamma_ratio(alpha)
        for r in rep.roots:
            assert abs(root_function(r, p)) <= 1e-10 * (1 + gam * r)


class TestSolution:
    def test_coefficients(self, default_solution, default_problem):
        s = default_solution
        assert s.coeff_A == default_problem.u0
        assert s.coeff_B < 0 and s.coeff_D < 0
        assert s.coeff_C + s.coeff_D == pytest.approx(default_problem.ui, abs=1e-15)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_boundary_values(self, default_solution, t):
        s = default_solution
        p = s.problem
        front = eval_front(s, t)
        tol = 1e-10 * abs(p.u0 - p.ui)
        assert eval_u2(s, 0.0, t) == p.u0
        assert abs(eval_u2(s, front, t) - p.um) <= tol
        assert abs(eval_u1(s, front, t) - p.um) <= tol
        assert eval_u1(s, 1e6, t) == pytest.approx(p.ui, abs=1e-12)

    @pytest.mark.parametrize("t", [0.3, 1.0, 7.0])
    def test_profiles_bounded_and_monotone(self, asymmetric_problem, t):
        s = solve(asymmetric_problem)
        p = s.problem
        front = s.front(t)
        xl = np.linspace(0, front, 200)
        xs = np.linspace(front, 6 * front, 200)
        ul, us = s.u2(xl, t), s.u1(xs, t)
        assert np.all(np.diff(ul) < 0) and np.all(np.diff(us) < 0)
        assert np.all((ul[1:-1] > p.um) & (ul[1:-1] < p.u0))
        assert np.all((us[1:] > p.ui) & (us[1:] < p.um))

    @pytest.mark.parametrize("k", [0.5, 2.0, 10.0])
    def test_self_similarity(self, default_solution, k):
        s = default_solution
        a = s.alpha
        t = 1.3
        xl = np.linspace(0, s.front(t), 7)
        xs = np.linspace(s.front(t), 4 * s.front(t), 7)
        atol = 1e-13 * (s.problem.u0 - s.problem.ui)  # um = 0 sits at the front
        np.testing.assert_allclose(s.u2(xl * k ** (a / 2), t * k), s.u2(xl, t), rtol=1e-12, atol=atol)
        np.testing.assert_allclose(s.u1(xs * k ** (a / 2), t * k), s.u1(xs, t), rtol=1e-12, atol=atol)

    def test_front(self, default_solution):
        s = default_solution
        assert s.front(0.0) == 0.0
        t = 0.7
        assert s.front(4 ** (1 / s.alpha) * t) == pytest.approx(2 * s.front(t), rel=1e-14)
        c = classical_neumann(s.problem.with_alpha(1.0))
        assert c.front(4.0) == pytest.approx(2 * c.mu * c.diff.lambda1 * 2.0, rel=1e-14)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_flux_balance(self, asymmetric_problem, t):
        s = solve(asymmetric_problem)
        p = s.problem
        liquid, solid = flux_at_front(s, t)
        assert liquid < 0 and solid < 0
        lhs = p.k1 * solid - p.k2 * liquid
        rhs = p.rho * p.l * gamma_ratio(p.alpha) * s.diff.lambda1 * s.xi * t ** (-p.alpha / 2)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_whole_line_field(self, default_solution):
        s = default_solution
        x = np.linspace(0, 3, 50)
        u = s.temperature(x, 1.0)
        assert np.all(np.diff(u) < 0)
        assert s.temperature(s.front(1.0), 1.0) == pytest.approx(s.problem.um, abs=1e-12)

    def test_domain_errors(self, default_solution):
        s = default_solution
        with pytest.raises(DomainError):
            s.u2(2 * s.front(1.0), 1.0)
        with pytest.raises(DomainError):
            s.u1(0.5 * s.front(1.0), 1.0)
        with pytest.raises(DomainError):
            s.u2(-1.0, 1.0)
        with pytest.raises(ValueError):
            s.u2(0.1, 0.0)
        with pytest.raises(ValueError):
            build_solution(s.problem, -1.0)


class TestClassicalLimit:
    def test_xi_and_profiles_converge(self, default_problem):
        two_mu = 2 * classical_mu_oracle(default_problem)
        classical = classical_neumann(default_problem.with_alpha(1.0))
        x = np.linspace(0, 3 * classical.front(1.0), 20)
        ref = classical.temperature(x, 1.0)
        xi_gaps, u_gaps = [], []
        for a in (0.8, 0.9, 0.95, 0.99):
            s = solve(default_problem.with_alpha(a))
            xi_gaps.append(abs(s.xi - two_mu))
            u_gaps.append(np.max(np.abs(s.temperature(x, 1.0) - ref)))
        assert all(a > b for a, b in zip(xi_gaps, xi_gaps[1:]))
        assert all(a > b for a, b in zip(u_gaps, u_gaps[1:]))

    def test_classical_one_phase_sanity(self):
        p = StefanProblem(u0=2.0, um=0.0, ui=-1e-9, c2=1.5, alpha=1.0)
        ste = p.c2 * (p.u0 - p.um) / p.l
        lo, hi = 1e-6, 5.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            g = ste / math.sqrt(math.pi) * math.exp(-mid * mid) / math.erf(mid) - mid
            lo, hi = (mid, hi) if g > 0 else (lo, mid)
        # with lambda2 != lambda1 the similarity variable of the liquid is lambda * mu
        mu = classical_neumann(p).mu
        lam = p.diffusivities.lambda_ratio
        assert lam * mu == pytest.approx(0.5 * (lo + hi), rel=1e-6)

    def test_classical_residual(self, default_problem):
        p = default_problem.with_alpha(1.0)
        mu = classical_neumann(p).mu
        assert abs(classical_residual(mu, p)) <= 1e-10 * (1 + mu)
        with pytest.raises(ValueError):
            classical_neumann(default_problem)


class TestProblemValidation:
    @pytest.mark.parametrize("kwargs", [
        {"k1": 0.0}, {"rho": -1.0}, {"l": float("nan")}, {"ui": 0.0}, {"u0": -1.0},
        {"alpha": 0.0}, {"alpha": 1.5}, {"u0": float("inf")},
    ])
    def test_rejected(self, kwargs):
        with pytest.raises(InvalidProblemError):
            StefanProblem(**kwargs)

    def test_diffusivities(self):
        p = StefanProblem(k1=4.0, c1=1.0, k2=1.0, c2=4.0)
        d = p.diffusivities
        assert (d.lambda1, d.lambda2, d.lambda_ratio) == (2.0, 0.5, 4.0)
