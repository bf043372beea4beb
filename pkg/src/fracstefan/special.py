"""Wright and Mainardi functions on the negative real axis.

Everything here evaluates ``W(-x, -nu, beta)`` with ``nu = alpha/2`` in
``(0, 1/2)`` and ``x >= 0``, which is the only slice of the Wright function
that the fractional Stefan solution touches. Two accurate routes exist:

* the power series, summed with Neumaier compensation. It is cheap for small
  ``x`` but the alternating terms grow like ``exp(x**(1/(1-nu)))`` before they
  decay, so double precision runs out well before ``x = 10`` when ``alpha`` is
  close to 1;
* the Kanter/Zolotarev integral over ``[0, pi]``, which follows from the link
  between ``M_nu`` and the one-sided stable density. All integrands are
  positive, so it keeps full relative accuracy for large ``x``.

The leading-order asymptotic expansion is also available as an explicit
opt-in branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sc

__all__ = [
    "DEFAULT_CONFIG",
    "Method",
    "NonConvergenceError",
    "PoleError",
    "WrightEvalConfig",
    "WrightValue",
    "asymptotic_coefficients",
    "check_alpha",
    "frac_erf",
    "frac_erfc",
    "gamma",
    "gamma_ratio",
    "mainardi",
    "mainardi_asymptotic",
    "mainardi_wright_ratio",
    "recip_gamma",
    "wright",
    "wright_asymptotic",
    "wright_integral",
    "wright_series",
]

_EPS = float(np.finfo(float).eps)


class PoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


class NonConvergenceError(ArithmeticError):
    """Series terms did not decay within the allowed number of terms."""


class Method(str, enum.Enum):
    SERIES = "series"
    INTEGRAL = "integral"
    ASYMPTOTIC = "asymptotic"
    CLOSED_FORM_HALF = "closed_form_half"


@dataclass(frozen=True)
class WrightEvalConfig:
    """Evaluation policy for :func:`wright`.

    ``crossover_x`` bounds the series branch from above. Below it, a point
    still leaves the series whenever the compensated sum cannot certify
    ``target_rel_err``; such points go to the large-``x`` branch.
    ``large_x`` selects that branch: ``"integral"`` (accurate) or
    ``"asymptotic"`` (leading-order only).
    """

    series_terms_max: int = 400
    crossover_x: float = 8.0
    target_rel_err: float = 1e-10
    large_x: str = "integral"
    quad_rel_err: float = 1e-13

    def __post_init__(self) -> None:
        if int(self.series_terms_max) != self.series_terms_max or self.series_terms_max < 30:
            raise ValueError(f"series_terms_max must be an integer >= 30, got {self.series_terms_max}")
        if not self.crossover_x > 0:
            raise ValueError(f"crossover_x must be positive, got {self.crossover_x}")
        if not 0 < self.target_rel_err < 1:
            raise ValueError(f"target_rel_err must lie in (0, 1), got {self.target_rel_err}")
        if self.large_x not in ("integral", "asymptotic"):
            raise ValueError(f"large_x must be 'integral' or 'asymptotic', got {self.large_x!r}")
        if not 0 < self.quad_rel_err < 1:
            raise ValueError(f"quad_rel_err must lie in (0, 1), got {self.quad_rel_err}")


DEFAULT_CONFIG = WrightEvalConfig()


@dataclass(frozen=True)
class WrightValue:
    """Value plus an error estimate and the branch that produced it.

    For array input ``value`` and ``est_abs_err`` are arrays and ``method``
    is an object array of :class:`Method` members, one per element.
    """

    value: float | np.ndarray
    est_abs_err: float | np.ndarray
    method: Method | np.ndarray

    def __float__(self) -> float:
        return float(self.value)


def check_alpha(alpha: float, *, allow_one: bool = True) -> float:
    alpha = float(alpha)
    upper_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (alpha > 0.0 and upper_ok):
        bound = "0 < alpha <= 1" if allow_one else "0 < alpha < 1"
        raise ValueError(f"fractional order must satisfy {bound}, got {alpha}")
    return alpha


def gamma(x: float) -> float:
    """Gamma function; raises :class:`PoleError` at ``0, -1, -2, ...``."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}; use recip_gamma")
    return math.gamma(x)


def recip_gamma(x):
    """Entire function ``1/Gamma(x)``, exactly 0 at the poles of Gamma."""
    out = sc.rgamma(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def gamma_ratio(alpha: float) -> float:
    """``Gamma(1 + alpha/2) / Gamma(1 - alpha/2)``, the Caputo power-rule factor of ``t**(alpha/2)``."""
    alpha = check_alpha(alpha)
    return math.gamma(1 + alpha / 2) / math.gamma(1 - alpha / 2)


def _as_nonneg(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("x must not be NaN")
    if np.any(arr < 0):
        raise ValueError("x must be nonnegative; W is only evaluated at -x with x >= 0")
    return np.atleast_1d(arr), arr.ndim == 0


def _unwrap(arr: np.ndarray, scalar: bool):
    return float(arr[0]) if scalar else arr


# -- series ----------------------------------------------------------------


def _series_sum(x: np.ndarray, nu: float, beta: float, terms_max: int, skip_first: bool):
    """Neumaier-compensated sum of ``sum_k (-x)^k / (k! Gamma(beta - nu k))``.

    Returns ``(sum, abs_sum, converged)``; ``abs_sum`` is the sum of term
    magnitudes, which sets the cancellation error.
    """
    n = x.size
    total = np.zeros(n)
    comp = np.zeros(n)
    abs_sum = np.zeros(n)
    if not skip_first:
        total += sc.rgamma(beta)
        abs_sum += abs(sc.rgamma(beta))
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    done = x == 0.0
    prev_bound = np.full(n, np.inf)
    for k in range(1, terms_max):
        arg = beta - nu * k
        rg = sc.rgamma(arg)
        if rg == 0.0:
            mag = np.zeros(n)
        else:
            with np.errstate(invalid="ignore"):
                mag = np.exp(k * logx - sc.gammaln(k + 1) - sc.gammaln(arg))
            mag[x == 0.0] = 0.0
        term = (-1.0) ** k * math.copysign(1.0, rg) * mag
        term[done] = 0.0
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        abs_sum += np.abs(term)
        # bound on |term_k| that is free of the zeros at Gamma poles:
        # |1/Gamma(z)| <= Gamma(1 - z)/pi for z <= 0
        if arg <= 0:
            with np.errstate(invalid="ignore"):
                bound = np.exp(k * logx - sc.gammaln(k + 1) + sc.gammaln(1 - arg) - math.log(math.pi))
        else:
            bound = mag
        bound = np.where(x == 0.0, 0.0, bound)
        small = bound <= 1e-3 * _EPS * np.maximum(abs_sum, 1e-300)
        done |= small & (bound <= prev_bound)
        prev_bound = bound
        if done.all():
            return total + comp, abs_sum, np.ones(n, dtype=bool)
    return total + comp, abs_sum, done


def wright_series(x, alpha: float, beta: float, *, terms_max: int = 400,
                  complement: bool = False) -> WrightValue:
    """Power-series value of ``W(-x, -alpha/2, beta)``.

    With ``complement=True`` returns ``1 - W(-x, -alpha/2, 1)`` summed without
    the leading 1, which avoids the cancellation near ``x = 0``. Raises
    :class:`NonConvergenceError` if the terms have not decayed by ``terms_max``.
    """
    alpha = check_alpha(alpha)
    xs, scalar = _as_nonneg(x)
    nu = alpha / 2
    if complement and beta != 1.0:
        raise ValueError("complement is only defined for beta = 1")
    s, abs_sum, ok = _series_sum(xs, nu, beta, terms_max, skip_first=complement)
    if not ok.all():
        bad = xs[~ok]
        raise NonConvergenceError(
            f"Wright series for alpha={alpha}, beta={beta} did not converge in "
            f"{terms_max} terms at x={bad.max():g}"
        )
    if complement:
        s = -s
    err = 64 * _EPS * abs_sum
    methods = np.full(xs.size, Method.SERIES, dtype=object)
    return WrightValue(_unwrap(s, scalar), _unwrap(err, scalar),
                       Method.SERIES if scalar else methods)


# -- integral representation ----------------------------------------------


def _kanter(phi: np.ndarray | float, nu: float):
    """``A(phi) = sin(nu phi)^(nu/(1-nu)) sin((1-nu) phi) / sin(phi)^(1/(1-nu))``."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.exp(
            nu / (1 - nu) * np.log(np.sin(nu * phi))
            + np.log(np.sin((1 - nu) * phi))
            - np.log(np.sin(phi)) / (1 - nu)
        )


def _kanter_min(nu: float) -> float:
    # A(0+), the minimum of A on (0, pi); equals the asymptotic exponent c(alpha)
    return (1 - nu) * nu ** (nu / (1 - nu))


def _log_sinc(y):
    """``log(sin(y)/y)`` with full relative accuracy for small ``y``."""
    y = np.asarray(y, dtype=float)
    y2 = y * y
    small = y < 2e-2
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.log(np.sin(y) / np.where(small, 1.0, y))
    series = -y2 / 6 * (1 + y2 / 30 * (1 + 2 * y2 / 63))
    return np.where(small, series, big)


def _kanter_excess(phi, nu: float):
    """``A(phi) - A(0+)`` without cancellation near ``phi = 0``."""
    e = nu / (1 - nu) * _log_sinc(nu * phi) + _log_sinc((1 - nu) * phi) - _log_sinc(phi) / (1 - nu)
    with np.errstate(over="ignore"):
        return _kanter_min(nu) * np.expm1(e)


_EXP_BUDGET = 100.0  # integrand cut where X (A - A0) exceeds this: exp(-100) ~ 4e-44


def _phi_cut(X: np.ndarray, nu: float) -> np.ndarray:
    """Per-component ``phi`` with ``X (A(phi) - A0) = _EXP_BUDGET`` (``pi`` if never reached)."""
    target = _EXP_BUDGET / X
    lo = np.zeros_like(X)
    hi = np.full_like(X, math.pi)
    # A increases on (0, pi); 60 halvings pin phi to ~1e-18
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = _kanter_excess(mid, nu) > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return hi


def _integral_parts(x: np.ndarray, nu: float, rel: float):
    """Scaled integrals ``I0 = int exp(-X (A - A0))`` and ``I1 = int A exp(-X (A - A0))``.

    ``X = x**(1/(1-nu))``. Then ``W = exp(-A0 X) I0 / pi`` and
    ``M = x**(nu/(1-nu)) exp(-A0 X) I1 / (pi (1 - nu))``.
    Each component is integrated over ``[0, phi_cut]`` mapped to ``[0, 1]``,
    so the peak at ``phi = 0`` has comparable width for every ``x``.
    Returns ``(I0, I1, abs_err)``.
    """
    X = x ** (1 / (1 - nu))
    a0 = _kanter_min(nu)
    n = x.size
    cut = _phi_cut(X, nu)

    def integrand(u: float) -> np.ndarray:
        da = _kanter_excess(u * cut, nu)
        e = np.exp(-X * da) * cut
        out = np.concatenate([e, (a0 + da) * e])
        out[~np.isfinite(out)] = 0.0
        return out

    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        res, err = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=0.0, epsrel=rel,
                                      norm="max", limit=20000)
    return res[:n], res[n:], float(err)


def wright_integral(x, alpha: float, beta: float, *, rel: float = 1e-13) -> WrightValue:
    """Integral-representation value of ``W(-x, -alpha/2, beta)``, ``beta`` in ``{1, 1 - alpha/2}``.

    Accurate for ``x`` of order one and larger; for ``x`` near 0 the
    integrand concentrates at ``phi = pi`` and the series is the better tool.
    """
    alpha = check_alpha(alpha, allow_one=False)
    xs, scalar = _as_nonneg(x)
    nu = alpha / 2
    want_m = _is_mainardi_beta(beta, nu)
    if not (want_m or beta == 1.0):
        raise ValueError(f"integral branch supports beta = 1 or 1 - alpha/2, got {beta}")
    val = np.empty(xs.size)
    err = np.zeros(xs.size)
    zero = xs == 0.0
    val[zero] = sc.rgamma(1 - nu) if want_m else 1.0
    nu_exp = 1 / (1 - nu)
    # beyond this the value underflows to 0 whatever the integral is
    gone = _kanter_min(nu) * xs**nu_exp > 760.0
    val[gone] = 0.0
    pos = ~zero & ~gone
    if pos.any():
        xp = xs[pos]
        i0, i1, qerr = _integral_parts(xp, nu, rel)
        scale = np.exp(-_kanter_min(nu) * xp ** (1 / (1 - nu))) / math.pi
        if want_m:
            scale = scale * xp ** (nu / (1 - nu)) / (1 - nu)
            val[pos] = scale * i1
        else:
            val[pos] = scale * i0
        err[pos] = scale * qerr + 8 * _EPS * np.abs(val[pos])
    methods = np.full(xs.size, Method.INTEGRAL, dtype=object)
    return WrightValue(_unwrap(val, scalar), _unwrap(err, scalar),
                       Method.INTEGRAL if scalar else methods)


# -- asymptotics -------------------------------------------------------------


def asymptotic_coefficients(alpha: float) -> tuple[float, float, float]:
    """``(b, c, d)`` with ``M ~ b x^(-(1-a)/(2-a)) e^(-c x^p)``, ``W ~ d x^(-1/(2-a)) e^(-c x^p)``.

    ``p = 1/(1 - alpha/2)``. ``c = (2/alpha - 1) (alpha/2)^p``, the exponent of
    the Wright expansion ``exp{(1 - 2/alpha) (alpha x / 2)^p}``.
    """
    alpha = check_alpha(alpha, allow_one=True)
    nu = alpha / 2
    a0 = 1 / math.sqrt(2 * math.pi * (1 - nu))
    b = a0 * nu ** (-(1 - alpha) / (2 - alpha))
    d = a0 * nu ** (-1 / (2 - alpha))
    c = (2 / alpha - 1) * nu ** (1 / (1 - nu))
    return b, c, d


def mainardi_asymptotic(x, alpha: float):
    b, c, _ = asymptotic_coefficients(alpha)
    x = np.asarray(x, dtype=float)
    p = 1 / (1 - alpha / 2)
    out = b * x ** (-(1 - alpha) / (2 - alpha)) * np.exp(-c * x**p)
    return float(out) if out.ndim == 0 else out


def wright_asymptotic(x, alpha: float):
    _, c, d = asymptotic_coefficients(alpha)
    x = np.asarray(x, dtype=float)
    p = 1 / (1 - alpha / 2)
    out = d * x ** (-1 / (2 - alpha)) * np.exp(-c * x**p)
    return float(out) if out.ndim == 0 else out


# -- dispatch ------------------------------------------------------------------


def _is_mainardi_beta(beta: float, nu: float) -> bool:
    return abs(beta - (1 - nu)) <= 4 * _EPS


def _closed_form_half(xs: np.ndarray, beta: float, complement: bool) -> np.ndarray:
    if beta == 1.0:
        return sc.erf(xs / 2) if complement else sc.erfc(xs / 2)
    return np.exp(-xs * xs / 4) / math.sqrt(math.pi)


def _dispatch(x, alpha: float, beta: float, cfg: WrightEvalConfig, complement: bool) -> WrightValue:
    alpha = check_alpha(alpha)
    xs, scalar = _as_nonneg(x)
    nu = alpha / 2
    is_m = _is_mainardi_beta(beta, nu)
    if not (is_m or beta == 1.0):
        raise ValueError(f"beta must be 1 or 1 - alpha/2 = {1 - nu}, got {beta}")
    if alpha == 1.0:
        val = _closed_form_half(xs, 1.0 if beta == 1.0 else 0.5, complement)
        methods = np.full(xs.size, Method.CLOSED_FORM_HALF, dtype=object)
        err = 2 * _EPS * np.abs(val)
        return WrightValue(_unwrap(val, scalar), _unwrap(err, scalar),
                           Method.CLOSED_FORM_HALF if scalar else methods)

    val = np.empty(xs.size)
    err = np.empty(xs.size)
    methods = np.empty(xs.size, dtype=object)
    use_series = xs <= cfg.crossover_x
    if use_series.any():
        xsr = xs[use_series]
        s, abs_sum, ok = _series_sum(xsr, nu, beta, cfg.series_terms_max, skip_first=complement)
        if not ok.all():
            raise NonConvergenceError(
                f"Wright series for alpha={alpha}, beta={beta} did not converge in "
                f"{cfg.series_terms_max} terms at x={xsr[~ok].max():g}"
            )
        if complement:
            s = -s
        e = 64 * _EPS * abs_sum
        # certify relative accuracy of the quantity actually returned
        good = e <= cfg.target_rel_err * np.abs(s)
        idx = np.flatnonzero(use_series)
        val[idx[good]] = s[good]
        err[idx[good]] = e[good]
        methods[idx[good]] = Method.SERIES
        use_series[idx[~good]] = False
    rest = ~use_series
    if rest.any():
        xr = xs[rest]
        if cfg.large_x == "integral":
            wv = wright_integral(xr, alpha, beta, rel=cfg.quad_rel_err)
            v = wv.value
            e = wv.est_abs_err
            m = Method.INTEGRAL
        else:
            v = mainardi_asymptotic(xr, alpha) if is_m else wright_asymptotic(xr, alpha)
            v = np.asarray(v, dtype=float)
            e = np.abs(v) * np.minimum((nu * xr) ** (-1 / (1 - nu)), 1.0)
            m = Method.ASYMPTOTIC
        if complement:
            v = 1.0 - v
        val[rest] = v
        err[rest] = e
        methods[rest] = m
    return WrightValue(_unwrap(val, scalar), _unwrap(err, scalar),
                       methods[0] if scalar else methods)


def wright(x, alpha: float, beta: float = 1.0, cfg: WrightEvalConfig = DEFAULT_CONFIG) -> WrightValue:
    """``W(-x, -alpha/2, beta)`` for ``x >= 0`` and ``beta`` in ``{1, 1 - alpha/2}``.

    ``alpha = 1`` is served by ``erfc(x/2)`` and the Gaussian. Accepts scalars
    or arrays.
    """
    return _dispatch(x, alpha, beta, cfg, complement=False)


def mainardi(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG) -> WrightValue:
    """Mainardi function ``M_{alpha/2}(x) = W(-x, -alpha/2, 1 - alpha/2)``."""
    alpha = check_alpha(alpha)
    return _dispatch(x, alpha, 1 - alpha / 2, cfg, complement=False)


def frac_erf(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """Fractional error function ``1 - W(-x, -alpha/2, 1)``; ``erf(x/2)`` at ``alpha = 1``."""
    return _dispatch(x, alpha, 1.0, cfg, complement=True).value


def frac_erfc(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """``W(-x, -alpha/2, 1)`` as a plain float or array."""
    return _dispatch(x, alpha, 1.0, cfg, complement=False).value


def mainardi_wright_ratio(x, alpha: float, cfg: WrightEvalConfig = DEFAULT_CONFIG):
    """``M_{alpha/2}(x) / W(-x, -alpha/2, 1)`` without underflow at large ``x``.

    Where both factors would come from the integral branch the common
    ``exp(-c x^p)`` factor is cancelled analytically.
    """
    alpha = check_alpha(alpha)
    xs, scalar = _as_nonneg(x)
    if alpha == 1.0:
        # exp(-z^2) / (sqrt(pi) erfc(z)) with z = x/2, via the scaled erfc
        return _unwrap(1 / (math.sqrt(math.pi) * sc.erfcx(xs / 2)), scalar)
    w = wright(xs, alpha, 1.0, cfg)
    m = mainardi(xs, alpha, cfg)
    both_series = np.array([a is Method.SERIES and b is Method.SERIES
                            for a, b in zip(np.atleast_1d(w.method), np.atleast_1d(m.method))])
    out = np.empty(xs.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:] = np.atleast_1d(m.value) / np.atleast_1d(w.value)
    rest = ~both_series
    if cfg.large_x == "integral" and rest.any():
        nu = alpha / 2
        xr = xs[rest]
        i0, i1, _ = _integral_parts(xr, nu, cfg.quad_rel_err)
        out[rest] = xr ** (nu / (1 - nu)) / (1 - nu) * i1 / i0
    return _unwrap(out, scalar)
