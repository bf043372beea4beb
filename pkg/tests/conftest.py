import math

import mpmath as mp
import pytest

from fracstefan.stefan import StefanProblem, build_solution, solve_xi


def mp_wright(x, alpha, beta, dps=60, terms=3000):
    """High-precision power series of W(-x, -alpha/2, beta).

    The arguments beta - nu k are formed in mpmath arithmetic; forming them in
    double precision puts them a rounding error away from Gamma poles, which
    wrecks the reference.
    """
    with mp.workdps(dps):
        x = mp.mpf(x)
        nu = mp.mpf(alpha) / 2
        beta = mp.mpf(beta) if not isinstance(beta, str) else 1 - nu
        total = mp.mpf(0)
        term_scale = mp.mpf(0)
        for k in range(terms):
            t = (-x) ** k / mp.factorial(k) * mp.rgamma(beta - nu * k)
            total += t
            term_scale = max(term_scale, abs(t))
            if k > 20 and abs(t) < mp.mpf(10) ** (-dps) * term_scale and abs(t) > 0:
                break
        return total


def mp_kanter_wright(x, alpha, dps=30):
    """W(-x, -alpha/2, 1) by mpmath quadrature of the Kanter integral."""
    with mp.workdps(dps):
        nu = mp.mpf(alpha) / 2
        X = mp.mpf(x) ** (1 / (1 - nu))

        def a(p):
            return mp.sin(nu * p) ** (nu / (1 - nu)) * mp.sin((1 - nu) * p) / mp.sin(p) ** (1 / (1 - nu))

        a0 = (1 - nu) * nu ** (nu / (1 - nu))
        w = 1 / mp.sqrt(X)
        pts = [0] + [w * k for k in (0.5, 1, 2, 4, 8, 16) if w * k < mp.pi] + [mp.pi]
        return mp.exp(-a0 * X) * mp.quad(lambda p: mp.exp(-X * (a(p) - a0)), pts) / mp.pi


def classical_mu_oracle(problem, lo=1e-9, hi=20.0):
    """Bisection of the classical erf/erfc equation using only math.erf and math.erfc."""
    l1 = math.sqrt(problem.k1 / (problem.rho * problem.c1))
    l2 = math.sqrt(problem.k2 / (problem.rho * problem.c2))
    lam = l1 / l2
    a = problem.k2 * (problem.u0 - problem.um) / (problem.rho * problem.l * l1 * l2)
    b = problem.k1 * (problem.um - problem.ui) / (problem.rho * problem.l * l1**2)
    sp = math.sqrt(math.pi)

    def h(mu):
        return (a * math.exp(-(lam * mu) ** 2) / (sp * math.erf(lam * mu))
                - b * math.exp(-mu * mu) / (sp * math.erfc(mu)) - mu)

    assert h(lo) > 0 > h(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture(scope="session")
def default_problem():
    return StefanProblem()


@pytest.fixture(scope="session")
def default_solution(default_problem):
    return build_solution(default_problem, solve_xi(default_problem).xi)


@pytest.fixture(scope="session")
def asymmetric_problem():
    return StefanProblem(k1=2.2, k2=0.6, c1=2.0, c2=4.2, rho=1.0, l=3.3, u0=20.0, um=0.0, ui=-5.0, alpha=0.6)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
