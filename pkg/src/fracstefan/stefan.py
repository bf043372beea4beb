"""Generalized Neumann solution of the two-phase fractional Stefan problem.

Liquid (phase 2) occupies ``0 < x < s(t)``, solid (phase 1) ``x > s(t)``.
With ``nu = alpha/2`` and the similarity variables ``x / (lambda_j t**nu)``:

    u2 = u0 - (u0 - um) * ferf(x / (lambda2 t^nu)) / ferf(xi * lam)
    u1 = ui + (um - ui) * W(x / (lambda1 t^nu)) / W(xi)
    s  = xi * lambda1 * t^nu

where ``ferf = 1 - W`` and ``W(z) = W(-z, -nu, 1)``. The coefficient ``xi``
is a positive root of ``F(x) = Gamma(1+nu)/Gamma(1-nu) * x``.

Units: ``lambda_j = sqrt(k_j / (rho c_j))`` is read as length * time^(-alpha/2)
so that the similarity variable is dimensionless. For ``alpha < 1`` it is
not the square root of a classical diffusivity.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from .special import (
    DEFAULT_CONFIG,
    WrightEvalConfig,
    check_alpha,
    frac_erf,
    frac_erfc,
    gamma_ratio,
    mainardi,
    mainardi_wright_ratio,
)

__all__ = [
    "DomainError",
    "Diffusivities",
    "InvalidProblemError",
    "NeumannSolution",
    "NoRootError",
    "RootReport",
    "StefanProblem",
    "big_f",
    "build_solution",
    "classical_neumann",
    "classical_residual",
    "eval_front",
    "eval_u1",
    "eval_u2",
    "f1",
    "f2",
    "flux_at_front",
    "root_function",
    "solve",
    "solve_xi",
]

XI_SCAN_START = 1e-8
DEFAULT_SCAN_MAX = 50.0
DEFAULT_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-10


class InvalidProblemError(ValueError):
    pass


class NoRootError(RuntimeError):
    pass


class DomainError(ValueError):
    """Point outside the phase region where a profile is defined."""


@dataclass(frozen=True)
class Diffusivities:
    lambda1: float
    lambda2: float

    @property
    def lambda_ratio(self) -> float:
        return self.lambda1 / self.lambda2


@dataclass(frozen=True)
class StefanProblem:
    """Thermal data for the semi-infinite two-phase problem.

    Phase 1 is the solid, phase 2 the liquid. Temperatures must satisfy
    ``ui < um < u0``; a freezing problem is posed by relabelling.
    """

    k1: float = 1.0
    k2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    rho: float = 1.0
    l: float = 1.0  # noqa: E741
    u0: float = 1.5
    um: float = 0.0
    ui: float = -0.5
    alpha: float = 0.75

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "c1", "c2", "rho", "l"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidProblemError(f"{name} must be a positive finite number, got {v!r}")
        for name in ("u0", "um", "ui"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidProblemError(f"{name} must be finite")
        if not self.ui < self.um:
            raise InvalidProblemError(f"need ui < um, got ui={self.ui} >= um={self.um}")
        if not self.um < self.u0:
            raise InvalidProblemError(f"need um < u0, got um={self.um} >= u0={self.u0}")
        try:
            check_alpha(self.alpha)
        except ValueError as exc:
            raise InvalidProblemError(str(exc)) from None

    @property
    def diffusivities(self) -> Diffusivities:
        return Diffusivities(
            math.sqrt(self.k1 / (self.rho * self.c1)),
            math.sqrt(self.k2 / (self.rho * self.c2)),
        )

    @property
    def liquid_coeff(self) -> float:
        """``k2 (u0 - um) / (rho l lambda1 lambda2)``, the weight of ``F1``."""
        d = self.diffusivities
        return self.k2 * (self.u0 - self.um) / (self.rho * self.l * d.lambda1 * d.lambda2)

    @property
    def solid_coeff(self) -> float:
        """``k1 (um - ui) / (rho l lambda1**2)``, the weight of ``F2``."""
        d = self.diffusivities
        return self.k1 * (self.um - self.ui) / (self.rho * self.l * d.lambda1**2)

    def with_alpha(self, alpha: float) -> StefanProblem:
        return dataclasses.replace(self, alpha=alpha)


def f1(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """``M(x) / (1 - W(-x))``; ``+inf`` at ``x = 0`` and wherever the denominator underflows."""
    x = np.asarray(x, dtype=float)
    m = np.asarray(mainardi(x, alpha, cfg).value)
    den = np.asarray(frac_erf(x, alpha, cfg))
    with np.errstate(divide="ignore"):
        out = np.where(den > 0, m / np.where(den > 0, den, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def f2(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """``M(x) / W(-x)``; equals ``1/Gamma(1 - alpha/2)`` at 0 and grows like ``x**(alpha/(2-alpha))``."""
    return mainardi_wright_ratio(x, alpha, cfg)


def big_f(x, problem: StefanProblem, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """Left-hand side ``F(x)`` of the equation for ``xi``."""
    lam = problem.diffusivities.lambda_ratio
    x = np.asarray(x, dtype=float)
    out = problem.liquid_coeff * np.asarray(f1(lam * x, problem.alpha, cfg)) \
        - problem.solid_coeff * np.asarray(f2(x, problem.alpha, cfg))
    return float(out) if out.ndim == 0 else out


def root_function(x, problem: StefanProblem, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """``G(x) = F(x) - gamma_ratio(alpha) * x``; positive near 0, negative for large ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(big_f(x, problem, cfg)) - gamma_ratio(problem.alpha) * x
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RootReport:
    roots: list[float]
    residuals: list[float]
    bracket_scan_max: float
    tol: float
    residual_tol: float
    multiplicity_note: str

    @property
    def xi(self) -> float:
        """Canonical coefficient: the smallest root."""
        return self.roots[0]


def _scan_grid(lo: float, hi: float) -> np.ndarray:
    geometric = np.geomspace(lo, hi, int(math.ceil(math.log(hi / lo) / math.log(1.01))) + 1)
    uniform = np.arange(0.01, hi, 0.01)
    grid = np.union1d(geometric, uniform[uniform > lo])
    return grid[grid <= hi]


def _bisect(g, lo: float, hi: float, g_lo: float, xtol: float, accept) -> float:
    """Bisection on a sign-change bracket.

    Stops once the bracket is narrower than ``xtol`` and ``accept(mid, g(mid))``
    holds, or when the bracket can no longer be split in floating point.
    """
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if hi - lo <= xtol and accept(mid, g_mid):
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_xi(problem: StefanProblem, tol: float = DEFAULT_TOL, scan_max: float = DEFAULT_SCAN_MAX,
             cfg: WrightEvalConfig = DEFAULT_CONFIG, *,
             residual_tol: float = DEFAULT_RESIDUAL_TOL) -> RootReport:
    """All roots of ``F(x) = gamma_ratio * x`` in ``(0, scan_max]``, ascending.

    A vectorized scan from ``1e-8`` (geometric, then also uniform with step
    0.01) finds sign changes; each bracket is bisected until it is narrower
    than ``tol`` and ``|G| <= residual_tol * (1 + gamma_ratio * x)``.
    Raises :class:`NoRootError` if ``G`` never changes sign.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError(f"tol must lie in (0, 1e-4], got {tol}")
    if not scan_max > XI_SCAN_START:
        raise ValueError(f"scan_max must exceed {XI_SCAN_START}, got {scan_max}")
    gam = gamma_ratio(problem.alpha)
    grid = _scan_grid(XI_SCAN_START, scan_max)
    g = np.asarray(root_function(grid, problem, cfg))
    sign = np.sign(g)
    roots: list[float] = []
    exact = np.flatnonzero(sign == 0)
    roots.extend(float(grid[i]) for i in exact)
    flips = np.flatnonzero(sign[:-1] * sign[1:] < 0)

    def scalar_g(v: float) -> float:
        return float(root_function(v, problem, cfg))

    def accept(v: float, gv: float) -> bool:
        return abs(gv) <= residual_tol * (1 + gam * v)

    for i in flips:
        roots.append(_bisect(scalar_g, float(grid[i]), float(grid[i + 1]), float(g[i]), tol, accept))
    if not roots:
        raise NoRootError(
            f"G(x) = F(x) - {gam:.6g} x has no sign change in ({XI_SCAN_START:g}, {scan_max:g}]; "
            f"G({scan_max:g}) = {g[-1]:.3e}. Increase scan_max or check the thermal data."
        )
    roots.sort()
    residuals = [scalar_g(r) for r in roots]
    if len(roots) == 1:
        note = "single root found in the scan window; the smallest root is used"
    else:
        note = (f"{len(roots)} roots found in the scan window; uniqueness is not established, "
                f"the smallest root is taken as xi")
    return RootReport(roots, residuals, float(scan_max), float(tol), float(residual_tol), note)


@dataclass(frozen=True)
class NeumannSolution:
    """Closed-form temperatures and front for a given coefficient ``xi``.

    ``u2 = A + B (1 - W(-x/(lambda2 t^nu)))`` and
    ``u1 = C + D (1 - W(-x/(lambda1 t^nu)))``.
    """

    xi: float
    coeff_A: float
    coeff_B: float
    coeff_C: float
    coeff_D: float
    problem: StefanProblem
    diff: Diffusivities
    cfg: WrightEvalConfig = field(default=DEFAULT_CONFIG, repr=False)

    @property
    def alpha(self) -> float:
        return self.problem.alpha

    @property
    def mu(self) -> float:
        """Classical Neumann coefficient ``xi/2`` (meaningful for ``alpha = 1``)."""
        return self.xi / 2

    def front(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("t must be nonnegative")
        out = self.xi * self.diff.lambda1 * t ** (self.alpha / 2)
        return float(out) if out.ndim == 0 else out

    def u2(self, x, t, *, strict: bool = True):
        """Liquid temperature. ``strict=False`` evaluates the formula beyond the front."""
        x, t = _xt(x, t)
        if strict and np.any(x > self.front(t) * (1 + 1e-12)):
            raise DomainError("liquid profile requested beyond the front x > s(t)")
        p = self.problem
        eta = x / (self.diff.lambda2 * t ** (self.alpha / 2))
        den = frac_erf(self.xi * self.diff.lambda_ratio, self.alpha, self.cfg)
        out = p.u0 - (p.u0 - p.um) * np.asarray(frac_erf(eta, self.alpha, self.cfg)) / den
        return float(out) if out.ndim == 0 else out

    def u1(self, x, t, *, strict: bool = True):
        """Solid temperature. ``strict=False`` evaluates the formula behind the front."""
        x, t = _xt(x, t)
        if strict and np.any(x < self.front(t) * (1 - 1e-12)):
            raise DomainError("solid profile requested behind the front x < s(t)")
        p = self.problem
        eta = x / (self.diff.lambda1 * t ** (self.alpha / 2))
        den = frac_erfc(self.xi, self.alpha, self.cfg)
        out = p.ui + (p.um - p.ui) * np.asarray(frac_erfc(eta, self.alpha, self.cfg)) / den
        return float(out) if out.ndim == 0 else out

    def temperature(self, x, t):
        """Whole-line field: ``u2`` left of the front, ``u1`` from the front on."""
        x, t = np.broadcast_arrays(*_xt(x, t))
        s = self.front(t)
        liquid = x < s
        out = np.empty(x.shape)
        if liquid.any():
            out[liquid] = self.u2(x[liquid], t[liquid], strict=False)
        if (~liquid).any():
            out[~liquid] = self.u1(x[~liquid], t[~liquid], strict=False)
        return float(out) if out.ndim == 0 else out

    def flux_at_front(self, t) -> tuple[float, float]:
        """``(u2_x, u1_x)`` at ``x = s(t)`` from the closed-form derivatives."""
        t = float(t)
        if not t > 0:
            raise ValueError("t must be positive")
        tn = t ** (self.alpha / 2)
        lam = self.diff.lambda_ratio
        liquid = self.coeff_B / (self.diff.lambda2 * tn) * float(mainardi(lam * self.xi, self.alpha, self.cfg))
        solid = self.coeff_D / (self.diff.lambda1 * tn) * float(mainardi(self.xi, self.alpha, self.cfg))
        return liquid, solid


def _xt(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be nonnegative")
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    return x, t


def build_solution(problem: StefanProblem, root: float,
                   cfg: WrightEvalConfig = DEFAULT_CONFIG) -> NeumannSolution:
    if not root > 0:
        raise ValueError(f"root must be positive, got {root}")
    d = problem.diffusivities
    A = problem.u0
    B = -(problem.u0 - problem.um) / float(frac_erf(root * d.lambda_ratio, problem.alpha, cfg))
    w = float(frac_erfc(root, problem.alpha, cfg))
    C = problem.ui + (problem.um - problem.ui) / w
    D = -(problem.um - problem.ui) / w
    return NeumannSolution(float(root), A, B, C, D, problem, d, cfg)


def solve(problem: StefanProblem, tol: float = DEFAULT_TOL, scan_max: float = DEFAULT_SCAN_MAX,
          cfg: WrightEvalConfig = DEFAULT_CONFIG) -> NeumannSolution:
    """Solve for the smallest ``xi`` and build the solution in one call."""
    if problem.alpha == 1.0:
        return classical_neumann(problem, tol)
    return build_solution(problem, solve_xi(problem, tol, scan_max, cfg).xi, cfg)


def eval_u2(sol: NeumannSolution, x, t):
    return sol.u2(x, t)


def eval_u1(sol: NeumannSolution, x, t):
    return sol.u1(x, t)


def eval_front(sol: NeumannSolution, t):
    return sol.front(t)


def flux_at_front(sol: NeumannSolution, t) -> tuple[float, float]:
    return sol.flux_at_front(t)


# -- classical case ------------------------------------------------------------


def classical_residual(mu: float, problem: StefanProblem) -> float:
    """Residual of the erf/erfc equation for the classical coefficient ``mu``."""
    lam = problem.diffusivities.lambda_ratio
    sp = math.sqrt(math.pi)
    liquid = math.exp(-(lam * mu) ** 2) / (sp * math.erf(lam * mu))
    solid = 1 / (sp * float(sc.erfcx(mu)))  # exp(-mu^2) / (sqrt(pi) erfc(mu))
    return problem.liquid_coeff * liquid - problem.solid_coeff * solid - mu


def classical_neumann(problem: StefanProblem, tol: float = DEFAULT_TOL, *,
                      mu_max: float = 50.0) -> NeumannSolution:
    """Classical Neumann solution (``alpha = 1``) with ``s(t) = 2 mu lambda1 sqrt(t)``."""
    if problem.alpha != 1.0:
        raise ValueError(f"classical_neumann needs alpha = 1, got {problem.alpha}")
    lo = XI_SCAN_START
    hi = lo
    g_lo = classical_residual(lo, problem)
    while classical_residual(hi, problem) > 0:
        hi *= 2
        if hi > mu_max:
            raise NoRootError(f"no sign change of the classical equation up to mu = {mu_max}")
    mu = _bisect(lambda m: classical_residual(m, problem), lo, hi, g_lo, tol,
                 lambda m, r: abs(r) <= DEFAULT_RESIDUAL_TOL * (1 + m))
    return build_solution(problem, 2 * mu)
