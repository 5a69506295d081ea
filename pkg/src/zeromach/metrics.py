"""Measurements comparing compressible runs with the incompressible limit.

Both kinds of state are lifted to a common form: a 4-component field ``U``
on ``x >= 0`` holding the two gas columns (the left one reflected) relative
to their far-field values, and a 2-vector ``w`` of liquid velocity relative
to the two far-field gas velocities. The distance between lifted states is
the L1 norm of ``Delta U`` plus the Euclidean norm of ``Delta w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .eos import PressureLaw, TaitLiquid
from .field import PiecewiseConstantField, l1_distance, merged_breakpoints, total_variation
from .limit import LimitState, evolve, local_flow_step, make_limit_state
from .wft import FrontField, init_fronts, two_fluid_regions


class EventInWindow(ValueError):
    """A front event falls inside the requested sampling window."""


class BackgroundMismatch(ValueError):
    pass


@dataclass(frozen=True)
class LiftedState:
    """``U`` on the half-line (breakpoints all positive) and ``w``.

    ``background`` is ``(tau_-inf, v_-inf, tau_+inf, v_+inf)``.
    """

    U: PiecewiseConstantField
    w: np.ndarray
    background: tuple

    def norm(self) -> float:
        return distance_d(self, zero_like(self))


def zero_like(a: LiftedState) -> LiftedState:
    return LiftedState(PiecewiseConstantField.constant(np.zeros(4)), np.zeros(2), a.background)


def _stack(*fields: PiecewiseConstantField) -> PiecewiseConstantField:
    """Concatenate components of fields defined on ``x > 0``."""
    bp = merged_breakpoints(*fields)
    bp = bp[bp > 0.0]
    if bp.size == 0:
        samples = np.array([1.0])
    else:
        edges = np.concatenate([[0.0], bp, [bp[-1] + 2.0]])
        samples = 0.5 * (edges[:-1] + edges[1:])
    vals = np.hstack([f(samples) for f in fields])
    return PiecewiseConstantField(bp, vals)


def lift_fields(
    left_pv: PiecewiseConstantField,
    right_pv: PiecewiseConstantField,
    gas: PressureLaw,
    m: float,
    liquid_velocity: float,
) -> LiftedState:
    """Lift two gas ``(p, v)`` fields and a liquid velocity.

    ``left_pv`` is read on ``z < 0`` and ``right_pv`` on ``z > m``.
    """
    p_minus, v_minus = left_pv.values[0]
    p_plus, v_plus = right_pv.values[-1]
    tau_minus, tau_plus = gas.tau(p_minus), gas.tau(p_plus)
    left = left_pv.restrict(-math.inf, 0.0).map(lambda r: (gas.tau(r[0]) - tau_minus, r[1] - v_minus))
    right = right_pv.restrict(m, math.inf).map(lambda r: (gas.tau(r[0]) - tau_plus, r[1] - v_plus))
    U = _stack(left.reflect(), right.shift(-m))
    w = np.array([liquid_velocity - v_minus, liquid_velocity - v_plus])
    return LiftedState(U, w, (tau_minus, v_minus, tau_plus, v_plus))


def liquid_mean_velocity(pv: PiecewiseConstantField, m: float) -> float:
    """``(1/m) int_0^m v`` computed exactly."""
    return float(pv.integral(0.0, m)[1] / m)


def lift(state) -> LiftedState:
    """Lift a :class:`LimitState` or a two-fluid :class:`FrontField`.

    For the compressible field the liquid velocity is its mean over ``]0, m[``.
    """
    if isinstance(state, LimitState):
        left, right = state.gas_fields()
        return lift_fields(left, right, state.gas, state.m, state.v_l)
    if isinstance(state, FrontField):
        if len(state.regions) != 3:
            raise ValueError("lift needs a gas / liquid / gas front field")
        m = state.regions[1].hi
        pv = state.solution_at()
        return lift_fields(pv, pv, state.regions[0].law, m, liquid_mean_velocity(pv, m))
    raise TypeError(f"cannot lift {type(state).__name__}")


def distance_d(a: LiftedState, b: LiftedState, parts: bool = False):
    """``||U_a - U_b||_L1(x>0) + |w_a - w_b|``; with ``parts`` also the two pieces."""
    if not np.allclose(a.background, b.background, rtol=0.0, atol=1e-12):
        raise BackgroundMismatch(f"backgrounds differ: {a.background} vs {b.background}")
    d_u = l1_distance(a.U, b.U, 0.0, math.inf)
    d_w = float(np.linalg.norm(a.w - b.w))
    if parts:
        return d_u + d_w, d_u, d_w
    return d_u + d_w


def tv(f: PiecewiseConstantField, lo: float = -math.inf, hi: float = math.inf) -> float:
    """Jump sum of ``f`` strictly inside ``(lo, hi)``."""
    return total_variation(f, lo, hi)


def tv_gas(ff: FrontField) -> float:
    """TV of ``(tau, v)`` over the gas regions of a front field."""
    tau_v = ff.tau_field()
    return sum(tv(tau_v, r.lo, r.hi) for r in ff.regions if r.name.startswith("gas"))


def tv_liquid_velocity(ff: FrontField) -> float:
    r = ff.region("liquid")
    return tv(ff.solution_at().component(1), r.lo, r.hi)


def limit_from_front_field(ff: FrontField, eps: float | None = None) -> LimitState:
    """Limit state sharing the gas columns of ``ff`` with ``v_l`` the liquid mean."""
    gas = ff.regions[0].law
    m = ff.regions[1].hi
    pv = ff.solution_at()
    return make_limit_state(pv, gas, m, liquid_mean_velocity(pv, m), eps or ff.eps, t0=ff.t)


def local_error_rate(run: FrontField, s: float, h: float, eps: float | None = None) -> float:
    """``d(lift(run at s+h), F(h) lift(run at s)) / h``.

    ``F(h)`` is one local-flow step of the limit system started from the
    gas columns of the run at ``s``. ``run`` is not modified.
    """
    if h <= 0.0:
        raise ValueError(f"window length must be positive, got {h}")
    c = run.copy()
    c.advance(s)
    if c.next_event_time() < s + h:
        raise EventInWindow(f"event at t={c.next_event_time():.6g} inside ]{s}, {s + h}[")
    lim = local_flow_step(limit_from_front_field(c, eps), h, h_max=max(h, 1e-2))
    c.advance(s + h)
    return distance_d(lift(c), lift(lim)) / h


# --- convergence study -------------------------------------------------------


def eps_rule_from_name(name: str) -> Callable[[float], float]:
    """``"kappa_sq"`` or ``"fixed:<value>"``."""
    if name == "kappa_sq":
        return lambda k: k * k
    if name.startswith("fixed:"):
        value = float(name.split(":", 1)[1])
        return lambda k: value
    raise ValueError(f"unknown eps rule {name!r}")


@dataclass
class StudyResult:
    rows: list = field(default_factory=list)
    fit: dict = field(default_factory=dict)

    COLUMNS = ("kappa", "epsilon", "t", "d_total", "d_U_L1", "d_w", "tv_G", "tv_liquid_v")

    def d_at(self, kappa: float, t: float) -> float:
        for r in self.rows:
            if r["kappa"] == kappa and r["t"] == t:
                return r["d_total"]
        raise KeyError((kappa, t))


def fit_order(kappas: Sequence[float], d: Sequence[float]) -> dict:
    """Least-squares fit ``log d = log C + q log kappa`` with monotonicity flag."""
    k = np.asarray(kappas, dtype=float)
    d = np.asarray(d, dtype=float)
    order = np.argsort(k)[::-1]
    k, d = k[order], d[order]
    flags = []
    if k.size < 2:
        return {"order_q": None, "constant": None, "flags": ["single_kappa"]}
    if np.any(np.diff(d) >= 0.0):
        flags.append("non_monotone")
        k, d = k[-2:], d[-2:]
    q, logc = np.polyfit(np.log(k), np.log(d), 1)
    return {"order_q": float(q), "constant": float(np.exp(logc)), "flags": flags}


def convergence_study(
    datum: PiecewiseConstantField,
    gas: PressureLaw,
    liquid: TaitLiquid,
    m: float,
    kappas: Sequence[float],
    eps_rule: Callable[[float], float] | str = "kappa_sq",
    times: Sequence[float] = (1.0,),
    h: float = 1e-3,
    t_fit: float | None = None,
    delta: float | None = 0.4,
) -> StudyResult:
    """Distance between compressible and limit runs from the same lifted datum.

    For every ``kappa`` the liquid law is ``liquid.with_kappa(kappa)`` and the
    limit run starts from the datum's gas columns with ``v_l`` equal to the
    datum's liquid mean velocity. The order is fitted at ``t_fit`` (default
    the first time).
    """
    rule = eps_rule_from_name(eps_rule) if isinstance(eps_rule, str) else eps_rule
    times = sorted(times)
    t_fit = times[0] if t_fit is None else t_fit
    out = StudyResult()
    v_bar = liquid_mean_velocity(datum, m)
    for kappa in kappas:
        eps = rule(kappa)
        ff = init_fronts(datum, eps, two_fluid_regions(gas, liquid.with_kappa(kappa), m), delta=delta)
        lim = make_limit_state(datum, gas, m, v_bar, eps)
        for t in times:
            ff.advance(t)
            lim = evolve(lim, t, h)
            total, d_u, d_w = distance_d(lift(ff), lift(lim), parts=True)
            out.rows.append(
                {
                    "kappa": kappa,
                    "epsilon": eps,
                    "t": t,
                    "d_total": total,
                    "d_U_L1": d_u,
                    "d_w": d_w,
                    "tv_G": tv_gas(ff),
                    "tv_liquid_v": tv_liquid_velocity(ff),
                }
            )
    sel = [r for r in out.rows if r["t"] == t_fit]
    out.fit = fit_order([r["kappa"] for r in sel], [r["d_total"] for r in sel])
    out.fit["t_fit"] = t_fit
    return out


# --- eigenstructure of the stacked gas system ----------------------------------


def stacked_flux(U, gas: PressureLaw, tau_minus: float, tau_plus: float) -> np.ndarray:
    """Flux of the four-component half-line system."""
    U = np.asarray(U, dtype=float)
    return np.array(
        [U[1], -gas.pressure(U[0] + tau_minus), -U[3], gas.pressure(U[2] + tau_plus)]
    )


def fd_jacobian(fun, U, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian."""
    U = np.asarray(U, dtype=float)
    cols = []
    for j in range(U.size):
        e = np.zeros_like(U)
        e[j] = step
        cols.append((fun(U + e) - fun(U - e)) / (2.0 * step))
    return np.column_stack(cols)


def exact_speeds(U, gas: PressureLaw, tau_minus: float, tau_plus: float) -> np.ndarray:
    """``(lambda_1, ..., lambda_4)`` from the sound speed of each column."""
    c_left = gas.char_speed(gas.pressure(U[0] + tau_minus))
    c_right = gas.char_speed(gas.pressure(U[2] + tau_plus))
    return np.array([-c_left, -c_right, c_left, c_right])


def boundary_determinant(jac: np.ndarray) -> float:
    """``det(Db [r3 r4])`` with ``r3, r4`` the numeric right eigenvectors of the positive speeds.

    ``r3`` is scaled to first entry 1 and ``r4`` to third entry 1.
    """
    vals, vecs = np.linalg.eig(jac)
    vals = vals.real
    vecs = vecs.real
    r3 = vecs[:, np.argmax(np.where(np.abs(vecs[0]) > 0.1, vals, -np.inf))]
    r4 = vecs[:, np.argmax(np.where(np.abs(vecs[2]) > 0.1, vals, -np.inf))]
    r3 = r3 / r3[0]
    r4 = r4 / r4[2]
    db = np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    return float(np.linalg.det(db @ np.column_stack([r3, r4])))


__all__ = [
    "BackgroundMismatch",
    "EventInWindow",
    "LiftedState",
    "StudyResult",
    "boundary_determinant",
    "convergence_study",
    "distance_d",
    "eps_rule_from_name",
    "exact_speeds",
    "fd_jacobian",
    "fit_order",
    "lift",
    "lift_fields",
    "limit_from_front_field",
    "liquid_mean_velocity",
    "local_error_rate",
    "stacked_flux",
    "tv",
    "tv_gas",
    "tv_liquid_velocity",
]
