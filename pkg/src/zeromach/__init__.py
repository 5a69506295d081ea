"""Two-fluid Lagrangian p-system solvers and the low-Mach liquid limit."""

from .eos import GammaGas, GasState, TaitLiquid
from .field import PiecewiseConstantField
from .riemann import solve_boundary, solve_riemann
from .wft import FrontField, advance, init_fronts, solution_at, traces

__all__ = [
    "FrontField",
    "GammaGas",
    "GasState",
    "PiecewiseConstantField",
    "TaitLiquid",
    "advance",
    "init_fronts",
    "solution_at",
    "solve_boundary",
    "solve_riemann",
    "traces",
]
