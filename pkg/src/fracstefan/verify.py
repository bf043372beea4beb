"""Numerical checks that the closed-form solution satisfies the free-boundary system.

Nothing here reuses the derivation: time derivatives come from the L1 Caputo
quadrature in :mod:`fracstefan.caputo`, space derivatives from finite
differences of the evaluated profiles.

Residuals are judged against a problem scale
``max(|u0 - ui|, 1) * lambda_j**2 / x_char**2``. For the liquid phase the
Caputo integral runs over ``[0, t]`` on the formula for ``u2`` as written,
including times before the front reached ``x``; the closed form is a global
solution of the diffusion equation in the similarity variable, and that is
the object being checked.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .caputo import TimeGrid, caputo_l1, caputo_power
from .special import check_alpha, frac_erf, frac_erfc
from .stefan import NeumannSolution, StefanProblem, build_solution, classical_neumann, solve_xi

__all__ = [
    "CheckResult",
    "LimitRow",
    "Phase",
    "PdeCheck",
    "QuarterPlaneCheck",
    "QuarterPlaneKind",
    "ResidualReport",
    "StefanCheck",
    "check_pde",
    "check_quarter_plane",
    "check_stefan_condition",
    "default_sample_points",
    "limit_sweep",
    "pde_refinement",
    "run_verification",
]

BOUNDARY_GAP = 3  # sample points must stay this many h_x away from the front


class Phase(str, enum.Enum):
    LIQUID = "liquid"
    SOLID = "solid"


class QuarterPlaneKind(str, enum.Enum):
    STEP_INITIAL = "step_initial"
    BOUNDARY_SIGNAL = "boundary_signal"


@dataclass
class PdeCheck:
    phase: str
    points: list[tuple[float, float]]
    caputo: np.ndarray
    diffusion: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray
    n_steps: int
    h_x: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def max_scaled(self) -> float:
        return float(np.max(self.residuals / self.scales))


def _second_difference(fn, x: np.ndarray, t: np.ndarray, h: float) -> np.ndarray:
    return (fn(x + h, t) - 2 * fn(x, t) + fn(x - h, t)) / (h * h)


def _time_derivative(fn, x: np.ndarray, t: np.ndarray, alpha: float, grid: TimeGrid) -> np.ndarray:
    """Caputo derivative in time at each ``(x_i, t_i)``; plain central difference for ``alpha = 1``."""
    out = np.empty(x.size)
    if alpha == 1.0:
        for i, (xi, ti) in enumerate(zip(x, t)):
            dt = ti / grid.n_steps
            out[i] = (fn(xi, ti + dt) - fn(xi, ti - dt)) / (2 * dt)
        return out
    s = TimeGrid(1.0, grid.n_steps, grid.grading).nodes()
    for i, (xi, ti) in enumerate(zip(x, t)):
        tau = ti * s
        # tau = 0 stands for the t -> 0+ limit; a time 40 decades earlier is
        # indistinguishable from it for every similarity profile
        vals = np.asarray(fn(np.full(tau.size, xi), np.maximum(tau, ti * 1e-40)), dtype=float)
        out[i] = caputo_l1(tau, vals, alpha)
    return out



def _pde_residuals(fn, lam: float, points, alpha: float, grid: TimeGrid, h_x: float):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, t = pts[:, 0], pts[:, 1]
    dt_term = _time_derivative(fn, x, t, alpha, grid)
    dxx = lam**2 * _second_difference(fn, x, t, h_x)
    return dt_term, dxx, np.abs(dt_term - dxx)


def _scale(amplitude: float, lam: float, x_char: np.ndarray) -> np.ndarray:
    return max(abs(amplitude), 1.0) * lam**2 / np.asarray(x_char) ** 2


def check_pde(sol: NeumannSolution, phase: Phase | str, sample_points, grid: TimeGrid,
              h_x: float) -> PdeCheck:
    """Residual ``|D^alpha u - lambda^2 u_xx|`` at interior points of one phase.

    ``grid`` supplies the step count and grading; its ``t_end`` is replaced
    by each sample's own time. Points closer than ``3 h_x`` to the front (or
    to ``x = 0``) are rejected.
    """
    phase = Phase(phase)
    pts = [(float(x), float(t)) for x, t in sample_points]
    p = sol.problem
    for x, t in pts:
        s = sol.front(t)
        gap = s - x if phase is Phase.LIQUID else x - s
        if gap < BOUNDARY_GAP * h_x:
            raise ValueError(f"sample ({x}, {t}) is within {BOUNDARY_GAP} h_x of the front or outside "
                             f"the {phase.value} region (s(t) = {s})")
        if phase is Phase.LIQUID and x < BOUNDARY_GAP * h_x:
            raise ValueError(f"sample ({x}, {t}) is too close to x = 0")
    if phase is Phase.LIQUID:
        fn = lambda x, t: np.asarray(sol.u2(x, t, strict=False))  # noqa: E731
        lam = sol.diff.lambda2
    else:
        fn = lambda x, t: np.asarray(sol.u1(x, t, strict=False))  # noqa: E731
        lam = sol.diff.lambda1
    caputo, diffusion, res = _pde_residuals(fn, lam, pts, sol.alpha, grid, h_x)
    x_char = np.array([sol.front(t) for _, t in pts])
    return PdeCheck(phase.value, pts, caputo, diffusion, res, _scale(p.u0 - p.ui, lam, x_char),
                    grid.n_steps, h_x)


def pde_refinement(sol: NeumannSolution, phase: Phase | str, sample_points, grid: TimeGrid,
                   h_x: float, levels: int = 3) -> list[PdeCheck]:
    """Run :func:`check_pde` with the time grid and ``h_x`` refined 2x per level."""
    out = []
    for k in range(levels):
        g = TimeGrid(grid.t_end, grid.n_steps * 2**k, grid.grading)
        out.append(check_pde(sol, phase, sample_points, g, h_x / 2**k))
    return out


def default_sample_points(sol: NeumannSolution, phase: Phase | str, t: float = 1.0,
                          n: int = 5) -> list[tuple[float, float]]:
    s = sol.front(t)
    if Phase(phase) is Phase.LIQUID:
        fracs = np.linspace(0.2, 0.8, n)
    else:
        fracs = np.linspace(1.25, 2.25, n)
    return [(float(f * s), t) for f in fracs]


# -- Stefan condition ----------------------------------------------------------


@dataclass
class StefanCheck:
    times: list[float]
    lhs_closed: np.ndarray
    rhs: np.ndarray
    closed_residual: np.ndarray
    scale: np.ndarray
    fd_liquid: np.ndarray
    fd_solid: np.ndarray
    closed_liquid: np.ndarray
    closed_solid: np.ndarray
    fd_error_bound: np.ndarray

    @property
    def closed_scaled(self) -> np.ndarray:
        return self.closed_residual / self.scale

    @property
    def fd_gap(self) -> np.ndarray:
        return np.maximum(np.abs(self.fd_liquid - self.closed_liquid),
                          np.abs(self.fd_solid - self.closed_solid))

    @property
    def fd_agrees(self) -> bool:
        return bool(np.all(self.fd_gap <= self.fd_error_bound))


def _one_sided(fn, s: float, t: float, h: float, direction: int) -> float:
    return direction * (fn(s + direction * h, t) - fn(s, t)) / h


def _richardson_slope(fn, s: float, t: float, h: float, direction: int) -> tuple[float, float]:
    """Second-order slope estimate and an error bound from two Richardson levels."""
    d = [_one_sided(fn, s, t, h / 2**k, direction) for k in range(3)]
    r1 = 2 * d[1] - d[0]
    r2 = 2 * d[2] - d[1]
    roundoff = 64 * np.finfo(float).eps * max(abs(fn(s, t)), 1.0) / (h / 4)
    return r2, 2 * abs(r2 - r1) + roundoff


def check_stefan_condition(sol: NeumannSolution, times, h_x: float | None = None) -> StefanCheck:
    """Energy balance ``k1 u1_x - k2 u2_x = rho l D^alpha s`` at the front.

    The left side is computed from the closed-form fluxes; the right side from
    the Caputo power rule. Independently, the fluxes are re-estimated with
    Richardson-extrapolated one-sided differences of the profiles.
    """
    p = sol.problem
    times = [float(t) for t in times]
    n = len(times)
    lhs = np.empty(n)
    rhs = np.empty(n)
    scale = np.empty(n)
    cl = np.empty(n)
    cs = np.empty(n)
    fl = np.empty(n)
    fs = np.empty(n)
    bound = np.empty(n)
    u2 = lambda x, t: float(sol.u2(x, t, strict=False))  # noqa: E731
    u1 = lambda x, t: float(sol.u1(x, t, strict=False))  # noqa: E731
    for i, t in enumerate(times):
        liquid, solid = sol.flux_at_front(t)
        cl[i], cs[i] = liquid, solid
        lhs[i] = p.k1 * solid - p.k2 * liquid
        rhs[i] = p.rho * p.l * sol.diff.lambda1 * sol.xi * caputo_power(sol.alpha / 2, sol.alpha, t)
        scale[i] = max(abs(p.k1 * solid), abs(p.k2 * liquid), abs(rhs[i]))
        s = sol.front(t)
        h = h_x if h_x is not None else 1e-3 * s
        fl[i], bl = _richardson_slope(u2, s, t, h, -1)
        fs[i], bs = _richardson_slope(u1, s, t, h, +1)
        bound[i] = max(bl, bs)
    return StefanCheck(times, lhs, rhs, np.abs(lhs - rhs), scale, fl, fs, cl, cs, bound)


# -- quarter-plane problems ---------------------------------------------------------


@dataclass
class QuarterPlaneCheck:
    kind: str
    boundary_residual: float
    initial_residual: float
    pde: list[PdeCheck]

    @property
    def pde_residuals(self) -> list[float]:
        return [c.max_residual for c in self.pde]


def check_quarter_plane(alpha: float, kind: QuarterPlaneKind | str, amplitude: float, lam: float,
                        samples, grid: TimeGrid | None = None, h_x: float = 1e-2,
                        levels: int = 3) -> QuarterPlaneCheck:
    """Check ``v = f0 (1 - W)`` (step initial data) or ``w = g0 W`` (boundary signal).

    Both solve ``D^alpha u = lam^2 u_xx`` on ``x, t > 0``; ``v(0,t) = 0``,
    ``v(x,0+) = f0``; ``w(0,t) = g0``, ``w(x,0+) = 0``.
    """
    alpha = check_alpha(alpha)
    kind = QuarterPlaneKind(kind)
    if grid is None:
        grid = TimeGrid.graded_for(min(alpha, 0.999), 1.0, 256)
    samples = [(float(x), float(t)) for x, t in samples]
    if any(x <= BOUNDARY_GAP * h_x or t <= 0 for x, t in samples):
        raise ValueError("samples must lie in the open quadrant, away from x = 0")

    def eta(x, t):
        return np.asarray(x, dtype=float) / (lam * np.asarray(t, dtype=float) ** (alpha / 2))

    if kind is QuarterPlaneKind.STEP_INITIAL:
        def fn(x, t):
            return amplitude * np.asarray(frac_erf(eta(x, t), alpha))
        boundary_target, initial_target = 0.0, amplitude
    else:
        def fn(x, t):
            return amplitude * np.asarray(frac_erfc(eta(x, t), alpha))
        boundary_target, initial_target = amplitude, 0.0

    times = np.array([t for _, t in samples])
    boundary = float(np.max(np.abs(fn(np.zeros_like(times), times) - boundary_target)))
    xs = np.array([x for x, _ in samples])
    initial = float(np.max(np.abs(fn(xs, np.full_like(xs, 1e-12)) - initial_target)))
    checks = []
    x_char = lam * times ** (alpha / 2)
    for k in range(levels):
        g = TimeGrid(grid.t_end, grid.n_steps * 2**k, grid.grading)
        h = h_x / 2**k
        caputo, diffusion, res = _pde_residuals(fn, lam, samples, alpha, g, h)
        checks.append(PdeCheck(kind.value, samples, caputo, diffusion, res,
                               _scale(amplitude, lam, x_char), g.n_steps, h))
    return QuarterPlaneCheck(kind.value, boundary, initial, checks)


# -- alpha -> 1 ------------------------------------------------------------------


@dataclass
class LimitRow:
    alpha: float
    xi: float = math.nan
    xi_gap: float = math.nan
    sup_u_gap: float = math.nan
    front_gap: float = math.nan
    error: str | None = None


def limit_sweep(problem: StefanProblem, alphas, t_probe: float = 1.0, x_probes=None,
                tol: float = 1e-12, scan_max: float = 50.0) -> tuple[float, list[LimitRow]]:
    """Distance of each fractional solution from the classical one.

    Returns ``(mu, rows)``. Temperatures are compared as whole-line fields at
    ``t_probe``. Solver failures are recorded in ``LimitRow.error``.
    """
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly ascending")
    classical = classical_neumann(problem.with_alpha(1.0), tol)
    if x_probes is None:
        x_probes = np.linspace(0.0, 3.0 * classical.front(t_probe), 20)
    x_probes = np.asarray(x_probes, dtype=float)
    u_ref = classical.temperature(x_probes, np.full_like(x_probes, t_probe))
    s_ref = classical.front(t_probe)
    rows = []
    for a in alphas:
        try:
            pa = problem.with_alpha(a)
            xi = solve_xi(pa, tol, scan_max).xi
            sol = build_solution(pa, xi)
            u = sol.temperature(x_probes, np.full_like(x_probes, t_probe))
            rows.append(LimitRow(a, xi, abs(xi - classical.xi), float(np.max(np.abs(u - u_ref))),
                                 abs(sol.front(t_probe) - s_ref)))
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            rows.append(LimitRow(a, error=f"{type(exc).__name__}: {exc}"))
    return classical.mu, rows


# -- aggregate report ----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class ResidualReport:
    pde_residual_liquid: float
    pde_residual_solid: float
    stefan_residual: float
    bc_residuals: dict[str, float]
    grid_meta: dict[str, object]
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"{'check':<40} {'value':>12} {'tolerance':>12}  result"]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            line = f"{c.name:<40} {c.value:12.4e} {c.tolerance:12.4e}  {flag}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _decreasing(values, min_ratio: float) -> tuple[bool, list[float]]:
    ratios = [a / b if b > 0 else math.inf for a, b in zip(values, values[1:])]
    return all(r >= min_ratio for r in ratios), ratios


def run_verification(sol: NeumannSolution, *, n_steps: int = 128, h_x: float | None = None,
                     levels: int = 3, times=(0.5, 1.0, 2.0), limit_alphas=(0.8, 0.9, 0.95, 0.99),
                     pde_tol: float = 1e-2, stefan_tol: float = 1e-8, min_ratio: float = 1.4,
                     include_limit: bool = True) -> ResidualReport:
    """Run every check on ``sol`` and collect pass/fail results.

    PDE checks pass when the finest-level residual is below ``pde_tol`` times
    the problem scale and each 2x joint refinement reduces the residual by at
    least ``min_ratio``.
    """
    p = sol.problem
    alpha = sol.alpha
    s1 = sol.front(1.0)
    if h_x is None:
        h_x = 0.02 * s1
    grid = TimeGrid.graded_for(min(alpha, 0.999), 1.0, n_steps) if alpha < 1 else TimeGrid(1.0, n_steps)
    checks: list[CheckResult] = []
    pde_max = {}
    for phase in (Phase.LIQUID, Phase.SOLID):
        pts = default_sample_points(sol, phase)
        levels_out = pde_refinement(sol, phase, pts, grid, h_x, levels)
        res = [c.max_residual for c in levels_out]
        pde_max[phase] = res[-1]
        finest = levels_out[-1]
        checks.append(CheckResult(f"pde {phase.value} (scaled residual)", finest.max_scaled, pde_tol,
                                  finest.max_scaled <= pde_tol))
        if alpha < 1:
            ok, ratios = _decreasing(res, min_ratio)
            checks.append(CheckResult(f"pde {phase.value} refinement ratio", min(ratios), min_ratio, ok,
                                      "ratios " + ", ".join(f"{r:.2f}" for r in ratios)))

    st = check_stefan_condition(sol, times)
    worst = float(np.max(st.closed_scaled))
    checks.append(CheckResult("stefan condition (scaled residual)", worst, stefan_tol, worst <= stefan_tol))
    checks.append(CheckResult("stefan fd flux vs closed form", float(np.max(st.fd_gap)),
                              float(np.min(st.fd_error_bound)), st.fd_agrees))

    t_bc = np.array(times)
    bc = {
        "u2(0,t) = u0": float(np.max(np.abs(np.asarray(sol.u2(np.zeros_like(t_bc), t_bc)) - p.u0))),
        "u2(s(t),t) = um": float(np.max(np.abs(np.asarray(sol.u2(sol.front(t_bc), t_bc)) - p.um))),
        "u1(s(t),t) = um": float(np.max(np.abs(np.asarray(sol.u1(sol.front(t_bc), t_bc)) - p.um))),
        "u1(x->inf,t) = ui": float(abs(sol.u1(1e3 * s1, 1.0) - p.ui)),
        "s(0) = 0": float(abs(sol.front(0.0))),
    }
    bc_tol = 1e-10 * abs(p.u0 - p.ui)
    for name, v in bc.items():
        checks.append(CheckResult(name, v, bc_tol, v <= bc_tol))

    if alpha < 1:
        qp_points = [(0.5, 1.0), (1.0, 1.0), (1.5, 1.0)]
        for kind, amp in ((QuarterPlaneKind.STEP_INITIAL, 1.0), (QuarterPlaneKind.BOUNDARY_SIGNAL, 1.0)):
            q = check_quarter_plane(alpha, kind, amp, 1.0, qp_points, grid, 0.02, levels)
            checks.append(CheckResult(f"quarter-plane {kind.value} boundary", q.boundary_residual, 1e-14,
                                      q.boundary_residual <= 1e-14))
            checks.append(CheckResult(f"quarter-plane {kind.value} initial", q.initial_residual, 1e-10,
                                      q.initial_residual <= 1e-10))
            ok, ratios = _decreasing(q.pde_residuals, min_ratio)
            checks.append(CheckResult(f"quarter-plane {kind.value} refinement", min(ratios), min_ratio, ok,
                                      "ratios " + ", ".join(f"{r:.2f}" for r in ratios)))

    if include_limit:
        mu, rows = limit_sweep(p, limit_alphas)
        gaps = [r.xi_gap for r in rows]
        ok = all(r.error is None for r in rows) and all(b < a for a, b in zip(gaps, gaps[1:]))
        checks.append(CheckResult("limit sweep xi gap (last row)", gaps[-1], gaps[0], ok,
                                  f"mu = {mu:.12g}"))

    return ResidualReport(
        pde_residual_liquid=pde_max[Phase.LIQUID],
        pde_residual_solid=pde_max[Phase.SOLID],
        stefan_residual=float(np.max(st.closed_residual)),
        bc_residuals=bc,
        grid_meta={"n_steps": grid.n_steps * 2 ** (levels - 1), "grading": grid.grading,
                   "h_x": h_x / 2 ** (levels - 1), "levels": levels},
        checks=checks,
    )
