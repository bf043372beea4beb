"""L1 quadrature for the Caputo derivative in time, used as an independent check.

The L1 scheme replaces ``f`` by its piecewise-linear interpolant on a grid
``0 = t_0 < ... < t_N = T`` and integrates the weakly singular kernel exactly:

    D^a f(T) ~ sum_j w_j (f(t_{j+1}) - f(t_j)),
    w_j = [(T - t_j)^(1-a) - (T - t_{j+1})^(1-a)] / (Gamma(2-a) (t_{j+1} - t_j)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc

from .special import check_alpha

__all__ = [
    "GridTooCoarseWarning",
    "TimeGrid",
    "caputo_l1",
    "caputo_l1_fn",
    "caputo_power",
    "l1_weights",
]


class GridTooCoarseWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Time nodes on ``[0, t_end]``.

    ``grading`` of ``None`` gives a uniform grid; a value ``r > 1`` puts the
    nodes at ``t_end * (j/N)**r``, clustering them near ``t = 0``.
    """

    t_end: float
    n_steps: int
    grading: float | None = None

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.n_steps < 8:
            raise ValueError(f"n_steps must be >= 8, got {self.n_steps}")
        if self.grading is not None and not self.grading > 1:
            raise ValueError(f"graded exponent must exceed 1, got {self.grading}")

    @property
    def t_start(self) -> float:
        return 0.0

    def nodes(self) -> np.ndarray:
        s = np.linspace(0.0, 1.0, self.n_steps + 1)
        if self.grading is not None:
            s = s**self.grading
        t = self.t_end * s
        t[-1] = self.t_end
        return t

    def refined(self, factor: int = 2) -> TimeGrid:
        return TimeGrid(self.t_end, self.n_steps * factor, self.grading)

    @classmethod
    def graded_for(cls, alpha: float, t_end: float, n_steps: int) -> TimeGrid:
        """Default grid for similarity solutions: exponent ``2/alpha``."""
        return cls(t_end, n_steps, 2.0 / alpha)


def l1_weights(t: np.ndarray, alpha: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    T = t[-1]
    dt = np.diff(t)
    v = T - t[1:]
    w = np.empty_like(dt)
    # (v + dt)^(1-a) - v^(1-a) written without cancellation; on graded grids
    # the first steps are far below eps * T
    inner = v > 0
    vi = v[inner]
    w[inner] = vi ** (1 - alpha) * np.expm1((1 - alpha) * np.log1p(dt[inner] / vi)) / dt[inner]
    w[~inner] = dt[~inner] ** -alpha
    return w / math.gamma(2 - alpha)


def caputo_l1(t, f, alpha: float) -> float:
    """L1 approximation of the Caputo derivative of order ``alpha`` at ``t[-1]``.

    ``t`` must start at 0 and increase strictly; ``f`` holds the samples.
    """
    alpha = check_alpha(alpha, allow_one=False)
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if t.ndim != 1 or t.shape != f.shape[:1]:
        raise ValueError("t must be 1-D and match the leading dimension of f")
    if t[0] != 0.0:
        raise ValueError("Caputo base point is t = 0; the grid must start there")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time samples must increase strictly")
    w = l1_weights(t, alpha)
    return np.tensordot(w, np.diff(f, axis=0), axes=(0, 0))


def caputo_l1_fn(fn: Callable[[np.ndarray], np.ndarray], grid: TimeGrid, alpha: float, *,
                 rtol: float | None = None) -> float:
    """L1 derivative of a callable sampled on ``grid``.

    With ``rtol`` set, the result is compared against the grid with half the
    steps and a :class:`GridTooCoarseWarning` is issued if they disagree by
    more than ``rtol`` (relative).
    """
    t = grid.nodes()
    val = caputo_l1(t, fn(t), alpha)
    if rtol is not None:
        coarse = TimeGrid(grid.t_end, grid.n_steps // 2, grid.grading) if grid.n_steps >= 16 else None
        if coarse is not None:
            tc = coarse.nodes()
            val_c = caputo_l1(tc, fn(tc), alpha)
            if np.any(np.abs(val - val_c) > rtol * np.maximum(np.abs(val), 1e-300)):
                warnings.warn(
                    f"L1 values on {coarse.n_steps} and {grid.n_steps} steps differ by "
                    f"{np.max(np.abs(val - val_c)):.3e}; refine the grid",
                    GridTooCoarseWarning,
                    stacklevel=2,
                )
    return val


def caputo_power(beta: float, alpha: float, t: float) -> float:
    """Exact Caputo derivative of ``t**beta``: ``Gamma(beta+1)/Gamma(1+beta-alpha) t**(beta-alpha)``.

    ``beta = 0`` returns 0: the Caputo derivative of a constant vanishes.
    When ``1 + beta - alpha`` is a pole of Gamma the derivative is identically
    zero as well.
    """
    alpha = check_alpha(alpha)
    if not beta > -1:
        raise ValueError(f"power rule needs beta > -1, got {beta}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if beta == 0:
        return 0.0
    return math.gamma(beta + 1) * float(sc.rgamma(1 + beta - alpha)) * t ** (beta - alpha)
