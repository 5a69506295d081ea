"""Acceptance battery shared by the test-suite and ``zeromach check``.

Every ``criterion_*`` function runs one experiment and returns a
:class:`CriterionResult` with the measured numbers; none of them raise on a
failed check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .eos import GammaGas, GasState, TaitLiquid
from .field import l1_distance, total_variation
from .godunov import cells_to_field, godunov_run, initial_cells, make_mesh
from .limit import evolve, make_limit_state, ode_identity_residual
from .metrics import (
    boundary_determinant,
    convergence_study,
    distance_d,
    exact_speeds,
    fd_jacobian,
    lift,
    stacked_flux,
)
from .riemann import NULL, RAREFACTION, SHOCK, VacuumError, rh_residual, solve_riemann
from .scenarios import builtin_scenarios
from .wft import gas_tv

POTENTIAL_ROUNDOFF = 1e-12


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    values: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        return f"[{tag}] criterion {self.number} {self.title} ({self.elapsed:.1f} s): {shown}"


def _fmt(v) -> str:
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# --- 1: Riemann correctness ------------------------------------------------------


def _lax_ok(fan) -> bool:
    ok = True
    for wave in (fan.wave1, fan.wave2):
        lo, hi = wave.speeds
        if wave.kind == NULL:
            continue
        if wave.family == 1:
            ok &= hi <= 0.0
        else:
            ok &= lo >= 0.0
        if wave.kind == RAREFACTION:
            ok &= lo <= hi
        else:
            c_left = wave.law.char_speed(wave.left.p)
            c_right = wave.law.char_speed(wave.right.p)
            s = lo
            if wave.family == 1:
                ok &= -c_left > s > -c_right
            else:
                ok &= c_left > s > c_right
    return bool(ok)


def criterion_1(n: int = 10_000, seed: int = 0) -> CriterionResult:
    """Random same-law and two-law Riemann problems."""
    rng = np.random.default_rng(seed)
    gas = GammaGas(1.0, 1.4)
    start = time.perf_counter()
    worst_curve = worst_rh = worst_contact = 0.0
    lax_fail = vacuum = false_vacuum = 0
    for i in range(n):
        kappa = rng.uniform(0.05, 0.5)
        liquid = TaitLiquid(7.0, 1.0, kappa)
        pair = i % 4
        law_l = (gas, liquid, gas, liquid)[pair]
        law_r = (gas, liquid, liquid, gas)[pair]
        pl, pr = rng.uniform(0.5, 2.0, size=2)
        vl = rng.uniform(-0.15, 0.15)
        vr = vl + rng.uniform(-0.3, 0.3)
        left, right = GasState(pl, vl), GasState(pr, vr)
        try:
            fan = solve_riemann(left, law_l, right, law_r)
        except VacuumError:
            # genuine only if the curve sum stays above the target down to the floor
            p_floor = max(law_l.p_lower, law_r.p_lower) * (1.0 + 1e-9)
            floor_sum = law_l.wave_curve(p_floor, pl) + law_r.wave_curve(p_floor, pr)
            vacuum += 1
            false_vacuum += floor_sum < vl - vr
            continue
        p = fan.p_star
        curve = abs(law_l.wave_curve(p, pl) + law_r.wave_curve(p, pr) - (vl - vr))
        worst_curve = max(worst_curve, curve)
        worst_contact = max(worst_contact, abs(fan.v_left_star - fan.v_right_star))
        for wave in (fan.wave1, fan.wave2):
            if wave.kind == SHOCK:
                worst_rh = max(worst_rh, rh_residual(wave, wave.law))
        lax_fail += not _lax_ok(fan)
    elapsed = time.perf_counter() - start
    passed = worst_curve <= 1e-12 and worst_rh <= 1e-10 and worst_contact <= 1e-10
    passed &= lax_fail == 0 and false_vacuum == 0
    passed &= elapsed <= 5.0
    return CriterionResult(
        1,
        "Riemann correctness",
        passed,
        {
            "problems": n,
            "vacuum": vacuum,
            "false_vacuum": false_vacuum,
            "curve_residual": worst_curve,
            "rh_residual": worst_rh,
            "contact_jump": worst_contact,
            "lax_failures": lax_fail,
        },
        elapsed,
    )


# --- 2: oracle agreement --------------------------------------------------------


def g1_distance(eps: float, dz: float, t: float = 0.5) -> tuple[float, float]:
    """L1 distance in ``(tau, v)`` between tracker and Godunov on G1, and TV0."""
    sc = builtin_scenarios()["G1"]
    gas = sc.gas_law()
    datum = sc.datum()
    ff = sc.front_field(eps=eps)
    ff.advance(t)
    lam = max(gas.char_speed(p) for p in datum.values[:, 0])
    mesh = make_mesh(dz, sc.support_radius + 1.5 * lam * t + 2 * dz, gas)
    cells = godunov_run(initial_cells(datum, mesh), mesh, t)[t]
    dist = l1_distance(ff.tau_field(), cells_to_field(cells, mesh), mesh.edges[0], mesh.edges[-1])
    tau_v = datum.map(lambda r: (gas.tau(r[0]), r[1]))
    return dist, total_variation(tau_v)


def criterion_2(eps: float = 0.01, dz: float = 1.0 / 400.0) -> CriterionResult:
    start = time.perf_counter()
    d1, tv0 = g1_distance(eps, dz)
    d2, _ = g1_distance(eps / 2, dz / 2)
    elapsed = time.perf_counter() - start
    ratio = d1 / d2
    passed = d1 <= 0.02 * tv0 and ratio >= 1.3 and elapsed <= 60.0
    return CriterionResult(
        2,
        "oracle agreement on G1",
        passed,
        {"L1": d1, "L1_over_TV0": d1 / tv0, "bound": 0.02, "L1_halved": d2, "reduction": ratio},
        elapsed,
    )


# --- 3: conservation ------------------------------------------------------------


def criterion_3(kappa: float = 0.1, eps: float = 0.01, t_end: float = 1.0) -> CriterionResult:
    start = time.perf_counter()
    sc = builtin_scenarios()["C1"]
    gas = sc.gas_law()
    datum = sc.datum()
    ff = sc.front_field(kappa=kappa, eps=eps)
    lam = max(gas.char_speed(p) for p in datum.values[:, 0])
    window = (-sc.support_radius - 2.0 * lam * t_end - 1.0, sc.m + sc.support_radius + 2.0 * lam * t_end + 1.0)
    v0 = ff.solution_at().integral(*window)[1]
    tau0 = ff.tau_field().integral(*window)[0]
    ff.advance(t_end)
    drift_v = abs(ff.solution_at().integral(*window)[1] - v0)
    drift_tau = abs(ff.tau_field().integral(*window)[0] - tau0)
    tv0 = gas_tv(ff, datum)
    bound = 5.0 * eps * tv0 * lam * t_end
    rises: dict[str, int] = {}
    worst_rise = 0.0
    for r in ff.potential_log:
        rise = r.potential_after - r.potential_before
        if rise > POTENTIAL_ROUNDOFF * max(1.0, r.potential_before):
            rises[r.type] = rises.get(r.type, 0) + 1
            worst_rise = max(worst_rise, rise)
    kinds = sorted({r.type for r in ff.potential_log})
    elapsed = time.perf_counter() - start
    passed = drift_v <= bound and not rises
    return CriterionResult(
        3,
        "conservation and interaction potential on C1",
        passed,
        {
            "drift_v": drift_v,
            "drift_tau": drift_tau,
            "bound": bound,
            "events": {k: sum(r.type == k for r in ff.potential_log) for k in kinds},
            "potential_rises": {k: rises.get(k, 0) for k in kinds},
            "largest_rise": worst_rise,
        },
        elapsed,
    )


# --- 4: stiff-liquid scaling ----------------------------------------------------


def liquid_tv_at(kappa: float, t: float = 0.5) -> float:
    sc = builtin_scenarios()["C1"]
    ff = sc.front_field(kappa=kappa, eps=kappa * kappa)
    ff.advance(t)
    return total_variation(ff.solution_at().component(1), 0.0, sc.m)


def criterion_4(kappas=(0.2, 0.1, 0.05), t: float = 0.5) -> CriterionResult:
    start = time.perf_counter()
    tvs = [liquid_tv_at(k, t) for k in kappas]
    ratios = [a / b for a, b in zip(tvs[:-1], tvs[1:])]
    passed = all(1.5 <= r <= 2.8 for r in ratios)
    return CriterionResult(
        4,
        "liquid velocity TV scaling",
        passed,
        {"tv_liquid_v": tvs, "ratios": ratios},
        time.perf_counter() - start,
    )


# --- 5: limit-system self-consistency -------------------------------------------


def criterion_5(steps=(1e-2, 5e-3, 2.5e-3), t_end: float = 1.0, semigroup_constant: float = 1.0) -> CriterionResult:
    start = time.perf_counter()
    sc = builtin_scenarios()["L1"]
    gas = sc.gas_law()
    state0 = make_limit_state(sc.datum(), gas, sc.m, sc.initial_liquid_velocity(), sc.epsilon(), delta=sc.delta)
    residuals = []
    bc_ok = True
    bc_worst = 0.0
    semigroup = []
    for h in steps:
        final = evolve(state0, t_end, h)
        residuals.append(ode_identity_residual(state0, final))
        for rec in final.history:
            # traces sit at the old slab velocity, which moved by one Euler increment
            allowed = 1e-8 + 2.0 * rec.h * abs(rec.p_left - rec.p_right) / sc.m * (1.0 + 1e-9)
            bc_worst = max(bc_worst, rec.mismatch / rec.h)
            bc_ok &= rec.mismatch <= allowed
        split = evolve(evolve(state0, 0.5 * t_end, h), t_end, h)
        semigroup.append(distance_d(lift(final), lift(split)))
    slope = float(np.polyfit(np.log(steps), np.log(residuals), 1)[0])
    sg_ok = all(d <= semigroup_constant * h for d, h in zip(semigroup, steps))
    passed = bool(bc_ok) and slope >= 1.0 and sg_ok
    return CriterionResult(
        5,
        "limit-system self-consistency on L1",
        passed,
        {
            "max_mismatch_over_h": bc_worst,
            "ode_residuals": residuals,
            "observed_order": slope,
            "semigroup_d": semigroup,
        },
        time.perf_counter() - start,
    )


# --- 6: main rate ---------------------------------------------------------------


def criterion_6(kappas=(0.2, 0.1, 0.05), h: float = 1e-3) -> CriterionResult:
    start = time.perf_counter()
    sc = builtin_scenarios()["C1"]
    gas, liquid, datum = sc.gas_law(), sc.liquid_law(), sc.datum()
    study = convergence_study(datum, gas, liquid, sc.m, kappas, "kappa_sq", times=[1.0], h=h)
    growth = convergence_study(datum, gas, liquid, sc.m, [0.1], "kappa_sq", times=[1.0, 2.0], h=h)
    d = [study.d_at(k, 1.0) for k in kappas]
    ratio = growth.d_at(0.1, 2.0) / growth.d_at(0.1, 1.0)
    q = study.fit["order_q"]
    elapsed = time.perf_counter() - start
    decreasing = all(a > b for a, b in zip(d[:-1], d[1:]))
    passed = decreasing and q is not None and 0.7 <= q <= 1.3 and ratio <= 3.0 and elapsed <= 600.0
    return CriterionResult(
        6,
        "compressible-to-limit rate on C1",
        passed,
        {"d": d, "order_q": q, "d2_over_d1": ratio, "flags": study.fit["flags"]},
        elapsed,
    )


# --- 7: eigenstructure ----------------------------------------------------------


def criterion_7(n: int = 100, seed: int = 0) -> CriterionResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    gas = GammaGas(1.0, 1.4)
    worst_eig = worst_det = 0.0
    smallest_det = math.inf
    for _ in range(n):
        tau_minus = gas.tau(rng.uniform(0.5, 2.0))
        tau_plus = gas.tau(rng.uniform(0.5, 2.0))
        U = np.array(
            [
                rng.uniform(-0.3, 0.3) * tau_minus,
                rng.uniform(-1.0, 1.0),
                rng.uniform(-0.3, 0.3) * tau_plus,
                rng.uniform(-1.0, 1.0),
            ]
        )
        jac = fd_jacobian(lambda u: stacked_flux(u, gas, tau_minus, tau_plus), U)
        numeric = np.sort(np.linalg.eigvals(jac).real)
        exact = exact_speeds(U, gas, tau_minus, tau_plus)
        worst_eig = max(worst_eig, float(np.max(np.abs(numeric - np.sort(exact)))))
        det_exact = -exact[2] * exact[3]
        det_num = boundary_determinant(jac)
        worst_det = max(worst_det, abs(det_num - det_exact))
        smallest_det = min(smallest_det, abs(det_exact))
    passed = worst_eig <= 1e-8 and worst_det <= 1e-8 and smallest_det > 0.0
    return CriterionResult(
        7,
        "eigenstructure of the stacked gas system",
        passed,
        {"eigenvalue_error": worst_eig, "determinant_error": worst_det, "min_abs_det": smallest_det},
        time.perf_counter() - start,
    )


ALL = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
}


def run_battery(quick: bool = False) -> list[CriterionResult]:
    """All criteria; ``quick`` shrinks the random sample sizes and the rate study."""
    if not quick:
        return [fn() for fn in ALL.values()]
    return [
        criterion_1(n=1000),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(kappas=(0.2, 0.1)),
        criterion_7(n=20),
    ]
