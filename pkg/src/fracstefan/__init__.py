"""Generalized Neumann solution of the two-phase fractional Stefan problem."""

from .caputo import TimeGrid, caputo_l1, caputo_power
from .special import (
    WrightEvalConfig,
    frac_erf,
    frac_erfc,
    gamma,
    gamma_ratio,
    mainardi,
    recip_gamma,
    wright,
)
from .stefan import (
    NeumannSolution,
    StefanProblem,
    big_f,
    build_solution,
    classical_neumann,
    f1,
    f2,
    solve,
    solve_xi,
)

__version__ = "0.1.0"

__all__ = [
    "NeumannSolution",
    "StefanProblem",
    "TimeGrid",
    "WrightEvalConfig",
    "big_f",
    "build_solution",
    "caputo_l1",
    "caputo_power",
    "classical_neumann",
    "f1",
    "f2",
    "frac_erf",
    "frac_erfc",
    "gamma",
    "gamma_ratio",
    "mainardi",
    "recip_gamma",
    "solve",
    "solve_xi",
    "wright",
]
