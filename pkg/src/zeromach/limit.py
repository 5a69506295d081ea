"""Incompressible-limit system: gas on two half-lines around a rigid liquid slab.

The liquid moves with one velocity ``v_l`` obeying
``m dv_l/dt = p(0-) - p(m+)``. Each gas column sees the slab as a wall
moving with ``v_l``. The local flow over a step ``h`` re-solves both wall
Riemann problems with the current ``v_l``, advances the gas columns with
the front tracker, then takes an explicit Euler step for ``v_l`` driven by
the wall pressures found at the start of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eos import PressureLaw
from .field import PiecewiseConstantField
from .wft import DomainViolation, FrontField, Region, gas_tv, init_fronts

BOUNDARY_TOL = 1e-8


@dataclass
class StepRecord:
    t: float
    h: float
    v_l: float
    p_left: float
    p_right: float
    mismatch: float


@dataclass
class LimitState:
    """Two half-line gas fields plus the slab velocity.

    ``left`` lives on ``]-inf, 0]`` with a wall at 0, ``right`` on
    ``[m, inf[`` with a wall at ``m``.
    """

    left: FrontField
    right: FrontField
    v_l: float
    m: float
    t: float = 0.0
    history: list = field(default_factory=list)

    def copy(self) -> "LimitState":
        return LimitState(self.left.copy(), self.right.copy(), self.v_l, self.m, self.t, list(self.history))

    @property
    def gas(self) -> PressureLaw:
        return self.left.regions[0].law

    def boundary_mismatch(self) -> float:
        """``|v(0-) - v_l| + |v(m+) - v_l|``."""
        v_left = self.left.last_state.v
        v_right = self.right.base_state.v
        return abs(v_left - self.v_l) + abs(v_right - self.v_l)

    def trace_pressures(self) -> tuple[float, float]:
        return self.left.last_state.p, self.right.base_state.p

    def wall_pressures(self) -> tuple[float, float]:
        """Wall pressures the next step would use, without touching the state."""
        probe = self.copy()
        for ff in (probe.left, probe.right):
            ff.wall_velocity = self.v_l
        return probe.left.apply_walls()["right"], probe.right.apply_walls()["left"]

    def gas_fields(self) -> tuple[PiecewiseConstantField, PiecewiseConstantField]:
        """``(p, v)`` on each half-line at the current time."""
        return self.left.solution_at(-math.inf, 0.0), self.right.solution_at(self.m, math.inf)


def liquid_rhs(p_left: float, p_right: float, m: float) -> float:
    """Slab acceleration ``(p_left - p_right) / m``."""
    if m <= 0.0:
        raise ValueError(f"liquid mass must be positive, got {m}")
    return (p_left - p_right) / m


def make_limit_state(
    datum: PiecewiseConstantField,
    gas: PressureLaw,
    m: float,
    v_l: float,
    eps: float,
    *,
    delta: float | None = None,
    t0: float = 0.0,
    **kwargs,
) -> LimitState:
    """Build the half-line fields from a ``(p, v)`` datum given on the whole line.

    Only the parts on ``z < 0`` and ``z > m`` are used; the datum's values
    inside ``]0, m[`` are ignored.
    """
    left_region = [Region("gas_left", -math.inf, 0.0, gas)]
    right_region = [Region("gas_right", m, math.inf, gas)]
    left_datum = datum.restrict(-math.inf, 0.0)
    right_datum = datum.restrict(m, math.inf)
    left = init_fronts(left_datum, eps, left_region, t0=t0, wall_right=True, wall_velocity=v_l, **kwargs)
    right = init_fronts(right_datum, eps, right_region, t0=t0, wall_left=True, wall_velocity=v_l, **kwargs)
    state = LimitState(left, right, float(v_l), float(m), t0)
    if delta is not None:
        size = gas_tv(left, left_datum) + gas_tv(right, right_datum) + state.boundary_mismatch()
        if size >= delta:
            raise DomainViolation(f"total variation plus boundary mismatch {size:.4g} is not below delta={delta}")
    return state


def _step(state: LimitState, h: float) -> float:
    """In-place local flow; returns the step actually taken."""
    for ff in (state.left, state.right):
        ff.wall_velocity = state.v_l
        ff.t = state.t
    p_left = state.left.apply_walls()["right"]
    p_right = state.right.apply_walls()["left"]
    arrival = min(state.left.next_wall_arrival(), state.right.next_wall_arrival())
    if state.t < arrival < state.t + h:
        h = arrival - state.t
    t_new = state.t + h
    state.left.advance(t_new)
    state.right.advance(t_new)
    state.v_l += h * liquid_rhs(p_left, p_right, state.m)
    state.t = t_new
    state.history.append(StepRecord(t_new, h, state.v_l, p_left, p_right, state.boundary_mismatch()))
    return h


def local_flow_step(state: LimitState, h: float, h_max: float = 1e-2) -> LimitState:
    """One step of the local flow on a copy of ``state``.

    The step may be shortened so that it ends when a gas front reaches a wall.
    """
    if not 0.0 < h <= h_max:
        raise ValueError(f"step {h} outside (0, {h_max}]")
    out = state.copy()
    _step(out, h)
    return out


def evolve(state: LimitState, t_target: float, h: float, h_max: float = 1e-2) -> LimitState:
    """Iterate the local flow from ``state.t`` to ``t_target`` on a copy.

    Nominal step ends sit on the grid ``t0 + k h``; the last step is shortened.
    """
    if not 0.0 < h <= h_max:
        raise ValueError(f"step {h} outside (0, {h_max}]")
    if t_target < state.t:
        raise ValueError(f"cannot evolve backwards from {state.t} to {t_target}")
    out = state.copy()
    t_start = out.t
    k = 0
    while out.t < t_target and not math.isclose(out.t, t_target, rel_tol=0.0, abs_tol=1e-13):
        k += 1
        # next grid node strictly ahead of the current time
        while t_start + k * h <= out.t + 1e-13:
            k += 1
        node = min(t_start + k * h, t_target)
        _step(out, node - out.t)
    if out.t != t_target:
        out.left.t = out.right.t = out.t = t_target
    return out


def ode_identity_residual(state0: LimitState, state1: LimitState, rule: str = "trapezoid") -> float:
    """``|v_l(T) - v_l(0) - (1/m) int (p(0-) - p(m+)) dt|`` over the steps of ``state1``.

    The integral uses the per-step wall pressures: ``"left"`` is the
    rectangle rule matching the Euler update, ``"trapezoid"`` averages each
    step's start pressure with the next step's start pressure.
    """
    recs = state1.history[len(state0.history):]
    if not recs:
        return abs(state1.v_l - state0.v_l)
    h = np.array([r.h for r in recs])
    dp = np.array([r.p_left - r.p_right for r in recs])
    if rule == "left":
        integral = float(np.sum(h * dp))
    elif rule == "trapezoid":
        p_end = state1.wall_pressures()
        dp_end = np.append(dp[1:], p_end[0] - p_end[1])
        integral = float(np.sum(h * 0.5 * (dp + dp_end)))
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    return abs(state1.v_l - state0.v_l - integral / state1.m)


__all__ = [
    "BOUNDARY_TOL",
    "LimitState",
    "StepRecord",
    "evolve",
    "liquid_rhs",
    "local_flow_step",
    "make_limit_state",
    "ode_identity_residual",
]
