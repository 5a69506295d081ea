"""Exact Riemann solvers for the Lagrangian p-system with piecewise pressure laws.

In ``(p, v)`` variables a Riemann fan has two waves separated by a middle
state ``(p*, v*)``. The 1-wave lives on the left law and moves left, the
2-wave lives on the right law and moves right, so a material interface at
``xi = 0`` sits inside the middle state and pressure and velocity are
continuous across it automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .eos import GasState, InadmissiblePressure, PressureLaw

SHOCK = "shock"
RAREFACTION = "rarefaction"
NULL = "null"

RESIDUAL_TOL = 1e-13
MAX_ITER = 100


class VacuumError(ValueError):
    """The data would open a vacuum; outside the small-data regime."""


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Wave:
    """One elementary wave of a fan.

    ``speeds`` are the (leftmost, rightmost) edge speeds; they coincide for
    shocks and are both zero for null waves.
    """

    family: int
    kind: str
    left: GasState
    right: GasState
    law: PressureLaw
    speeds: tuple[float, float]

    @property
    def strength(self) -> float:
        return abs(self.right.p - self.left.p) * self.law.strength_weight()


@dataclass(frozen=True)
class WaveFan:
    left: GasState
    right: GasState
    law_left: PressureLaw
    law_right: PressureLaw
    p_star: float
    v_left_star: float
    v_right_star: float
    wave1: Wave
    wave2: Wave

    @property
    def v_star(self) -> float:
        return self.v_left_star

    @property
    def middle(self) -> GasState:
        return GasState(self.p_star, self.v_left_star)

    def as_dict(self) -> dict:
        def w(wave: Wave) -> dict:
            return {"kind": wave.kind, "speeds": list(wave.speeds)}

        return {
            "p_star": self.p_star,
            "v_star": self.v_star,
            "wave1": w(self.wave1),
            "wave2": w(self.wave2),
        }


@dataclass(frozen=True)
class BoundaryFan:
    """Half-line problem with prescribed velocity at the end of the domain.

    ``side == "left"`` is a gas column on ``z < 0`` whose right end moves with
    ``v_b``; ``side == "right"`` is a column on ``z > m`` with a moving left end.
    """

    side: str
    trace: GasState
    law: PressureLaw
    v_b: float
    p_b: float
    wave: Wave

    @property
    def boundary_state(self) -> GasState:
        return GasState(self.p_b, self.v_b)


@dataclass(frozen=True, slots=True)
class Front:
    """A straight discontinuity ``x(t) = x0 + speed * (t - t0)``."""

    x0: float
    t0: float
    speed: float
    family: int
    kind: str
    left: GasState
    right: GasState
    region: str = ""

    def position(self, t: float) -> float:
        return self.x0 + self.speed * (t - self.t0)


# --- root finding ---------------------------------------------------------


def solve_increasing(fun, dfun, target: float, lower: float, guess: float) -> float:
    """Solve ``fun(p) = target`` for increasing ``fun`` on ``(lower, inf)``.

    Newton steps with analytic derivative, falling back to bisection when a
    step leaves the current bracket. Raises :class:`VacuumError` when the
    target lies below ``fun(lower)``.
    """
    lo = lower * (1.0 + 1e-12)
    if fun(lo) - target >= 0.0:
        raise VacuumError(f"no admissible pressure above {lower:g} reaches {target:g}")
    hi = max(guess, lo * 2.0)
    r_hi = fun(hi) - target
    n = 0
    while r_hi < 0.0:
        lo = hi
        hi *= 2.0
        r_hi = fun(hi) - target
        n += 1
        if n > 2000:
            raise NonConvergence("could not bracket the root")
    x = min(max(guess, lo), hi)
    tol = RESIDUAL_TOL * max(1.0, abs(target))
    best_x, best_r = hi, abs(r_hi)
    for _ in range(MAX_ITER):
        r = fun(x) - target
        if abs(r) < best_r:
            best_x, best_r = x, abs(r)
        if abs(r) <= tol:
            return x
        if r < 0.0:
            lo = x
        else:
            hi = x
        d = dfun(x)
        x_new = x - r / d if d > 0.0 else math.nan
        if not (lo < x_new < hi):
            x_new = math.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * hi or x_new == x:
            break
        x = x_new
    if best_r <= 10.0 * tol:
        return best_x
    raise NonConvergence(f"root not converged, residual {best_r:.3e}")


# --- wave descriptors -----------------------------------------------------


def _wave1(law: PressureLaw, left: GasState, mid: GasState) -> Wave:
    if mid.p == left.p:
        return Wave(1, NULL, left, mid, law, (0.0, 0.0))
    if mid.p > left.p:
        s = -law.shock_speed(mid.p, left.p)
        return Wave(1, SHOCK, left, mid, law, (s, s))
    return Wave(1, RAREFACTION, left, mid, law, (-law.char_speed(left.p), -law.char_speed(mid.p)))


def _wave2(law: PressureLaw, mid: GasState, right: GasState) -> Wave:
    if mid.p == right.p:
        return Wave(2, NULL, mid, right, law, (0.0, 0.0))
    if mid.p > right.p:
        s = law.shock_speed(mid.p, right.p)
        return Wave(2, SHOCK, mid, right, law, (s, s))
    return Wave(2, RAREFACTION, mid, right, law, (law.char_speed(mid.p), law.char_speed(right.p)))


# --- solvers --------------------------------------------------------------


def solve_riemann(
    left: GasState, law_left: PressureLaw, right: GasState, law_right: PressureLaw
) -> WaveFan:
    """Exact solution of the (possibly two-law) Riemann problem.

    The middle pressure solves ``W_L(p; pL) + W_R(p; pR) = vL - vR``.
    """
    pl, vl = left
    pr, vr = right
    law_left.check(pl)
    law_right.check(pr)
    target = vl - vr

    def fun(p):
        return law_left.wave_curve(p, pl) + law_right.wave_curve(p, pr)

    def dfun(p):
        return law_left.dwave_curve(p, pl) + law_right.dwave_curve(p, pr)

    lower = max(law_left.p_lower, law_right.p_lower)
    if target == 0.0 and pl == pr:
        p_star = pl
    else:
        # data on a single wave curve: keep the partner wave exactly null
        tol = RESIDUAL_TOL * max(1.0, abs(target))
        on_curve = [p for p in (pl, pr) if abs(fun(p) - target) <= tol]
        if on_curve:
            p_star = on_curve[0]
        else:
            p_star = solve_increasing(fun, dfun, target, lower, 0.5 * (pl + pr))
    v_ls = vl - law_left.wave_curve(p_star, pl)
    v_rs = vr + law_right.wave_curve(p_star, pr)
    mid = GasState(p_star, v_ls)
    return WaveFan(
        left,
        right,
        law_left,
        law_right,
        p_star,
        v_ls,
        v_rs,
        _wave1(law_left, left, mid),
        _wave2(law_right, GasState(p_star, v_rs), right),
    )


def solve_boundary(side: str, trace: GasState, law: PressureLaw, v_b: float) -> BoundaryFan:
    """Single entering wave matching the prescribed boundary velocity ``v_b``."""
    p_tr, v_tr = trace
    law.check(p_tr)
    if side == "left":
        target = v_tr - v_b
    elif side == "right":
        target = v_b - v_tr
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if target == 0.0:
        p_b = p_tr
    else:
        p_b = solve_increasing(
            lambda p: law.wave_curve(p, p_tr),
            lambda p: law.dwave_curve(p, p_tr),
            target,
            law.p_lower,
            p_tr,
        )
    bstate = GasState(p_b, v_b)
    if side == "left":
        wave = _wave1(law, trace, bstate)
    else:
        wave = _wave2(law, bstate, trace)
    return BoundaryFan(side, trace, law, v_b, p_b, wave)


def sample(fan: WaveFan, xi: float) -> GasState:
    """State of the self-similar solution at ``z / t = xi``."""
    w1, w2 = fan.wave1, fan.wave2
    if xi < 0.0:
        if w1.kind == NULL or xi >= w1.speeds[1]:
            return fan.middle
        if w1.kind == SHOCK or xi < w1.speeds[0]:
            return fan.left
        p = fan.law_left.p_of_char_speed(-xi)
        return GasState(p, fan.left.v - fan.law_left.wave_curve(p, fan.left.p))
    if xi == 0.0:
        return fan.middle
    if w2.kind == NULL or xi <= w2.speeds[0]:
        return GasState(fan.p_star, fan.v_right_star)
    if xi > w2.speeds[1] or w2.kind == SHOCK:
        return fan.right
    p = fan.law_right.p_of_char_speed(xi)
    return GasState(p, fan.right.v + fan.law_right.wave_curve(p, fan.right.p))


def n_steps(strength: float, eps: float) -> int:
    """Number of equal pressure steps used for a rarefaction of this strength."""
    return max(1, math.ceil(strength / eps - 1e-9))


def wave_fronts(wave: Wave, eps: float, x0: float = 0.0, t0: float = 0.0, region: str = "") -> list[Front]:
    """Fronts approximating one wave: none for null, one for a shock, steps for a rarefaction."""
    if wave.kind == NULL:
        return []
    if wave.kind == SHOCK:
        return [Front(x0, t0, wave.speeds[0], wave.family, SHOCK, wave.left, wave.right, region)]
    return split_rarefaction(wave, wave.law, eps, x0, t0, region)


def split_rarefaction(
    wave: Wave, law: PressureLaw, eps: float, x0: float = 0.0, t0: float = 0.0, region: str = ""
) -> list[Front]:
    """Replace a centred rarefaction by jumps of strength at most ``eps``.

    Pressures are equally spaced; intermediate velocities lie on the exact
    curve through the wave's outer state; each step moves with the
    characteristic speed of its midpoint pressure.
    """
    if eps <= 0.0:
        raise ValueError(f"accuracy parameter must be positive, got {eps}")
    if wave.kind != RAREFACTION:
        raise ValueError(f"expected a rarefaction, got {wave.kind}")
    n = n_steps(wave.strength, eps)
    pa, pb = wave.left.p, wave.right.p
    states = [wave.left]
    for i in range(1, n):
        p = pa + (pb - pa) * i / n
        if wave.family == 1:
            v = wave.left.v - law.wave_curve(p, wave.left.p)
        else:
            v = wave.right.v + law.wave_curve(p, wave.right.p)
        states.append(GasState(p, v))
    states.append(wave.right)
    sign = -1.0 if wave.family == 1 else 1.0
    fronts = []
    for a, b in zip(states[:-1], states[1:]):
        s = sign * law.char_speed(0.5 * (a.p + b.p))
        if fronts and abs(s - fronts[-1].speed) < 1e-14:
            prev = fronts.pop()
            a = prev.left
        fronts.append(Front(x0, t0, s, wave.family, RAREFACTION, a, b, region))
    return fronts


def rh_residual(front_or_wave, law: PressureLaw) -> float:
    """Largest Rankine-Hugoniot defect of a jump, using ``tau`` from ``law``."""
    if isinstance(front_or_wave, Wave):
        s = front_or_wave.speeds[0]
    else:
        s = front_or_wave.speed
    l, r = front_or_wave.left, front_or_wave.right
    dtau = law.tau(r.p) - law.tau(l.p)
    dv = r.v - l.v
    return max(abs(s * dtau + dv), abs(s * dv - (r.p - l.p)))


__all__ = [
    "SHOCK",
    "RAREFACTION",
    "NULL",
    "BoundaryFan",
    "Front",
    "InadmissiblePressure",
    "NonConvergence",
    "VacuumError",
    "Wave",
    "WaveFan",
    "n_steps",
    "rh_residual",
    "sample",
    "solve_boundary",
    "solve_increasing",
    "solve_riemann",
    "split_rarefaction",
    "wave_fronts",
]
