import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeromach.eos import GammaGas, GasState, TaitLiquid
from zeromach.riemann import (
    NULL,
    RAREFACTION,
    SHOCK,
    VacuumError,
    n_steps,
    rh_residual,
    sample,
    solve_boundary,
    solve_riemann,
    split_rarefaction,
    wave_fronts,
)

# frozen from oracle.py (quadrature wave curves + Brent root finding)
P_STAR_SYMMETRIC = 1.3136772095309224
P_STAR_INTERFACE = 1.1884958948354765
V_STAR_INTERFACE = 0.007120642327800831
P_B_LEFT_WALL = 1.1490287324807722
P_B_RIGHT_WALL = 0.865903429569493

GAS2 = GammaGas(1.0, 2.0)
GAS14 = GammaGas(1.0, 1.4)
WATER = TaitLiquid(7.0, 1.0, 0.1)


def test_identical_states_give_null_waves():
    s = GasState(1.3, 0.2)
    fan = solve_riemann(s, GAS14, s, GAS14)
    assert fan.p_star == 1.3 and fan.v_star == 0.2
    assert fan.wave1.kind == NULL and fan.wave2.kind == NULL


def test_symmetric_two_shock():
    fan = solve_riemann(GasState(1.0, 0.2), GAS2, GasState(1.0, -0.2), GAS2)
    assert fan.wave1.kind == SHOCK and fan.wave2.kind == SHOCK
    assert abs(fan.p_star - P_STAR_SYMMETRIC) <= 1e-10
    assert abs(fan.v_star) <= 1e-14
    assert abs(2 * GAS2.wave_curve(fan.p_star, 1.0) - 0.4) <= 1e-12


def test_interface_rarefaction_and_shock():
    fan = solve_riemann(GasState(1.2, 0.0), GAS2, GasState(1.0, 0.0), WATER)
    assert fan.wave1.kind == RAREFACTION and fan.wave2.kind == SHOCK
    assert abs(fan.p_star - P_STAR_INTERFACE) <= 1e-10
    assert abs(fan.v_star - V_STAR_INTERFACE) <= 1e-10
    assert abs(fan.v_left_star - fan.v_right_star) <= 1e-12
    # the liquid shock is fast, of order 1/kappa
    assert fan.wave2.speeds[0] > 20.0


def test_boundary_null_when_velocity_matches():
    fan = solve_boundary("left", GasState(1.1, 0.3), GAS2, 0.3)
    assert fan.p_b == 1.1 and fan.wave.kind == NULL


def test_boundary_left_gas_shock():
    fan = solve_boundary("left", GasState(1.0, 0.1), GAS2, 0.0)
    assert fan.wave.kind == SHOCK and fan.wave.family == 1
    assert abs(fan.p_b - P_B_LEFT_WALL) <= 1e-10
    assert fan.boundary_state.v == 0.0


def test_boundary_right_gas_rarefaction():
    fan = solve_boundary("right", GasState(1.0, 0.0), GAS2, -0.1)
    closed = (1.0 - 0.1 / (4.0 * 2.0**-0.5)) ** 4
    assert fan.wave.kind == RAREFACTION and fan.wave.family == 2
    assert abs(closed - P_B_RIGHT_WALL) <= 1e-10
    assert abs(fan.p_b - closed) <= 1e-12


def test_boundary_rejects_bad_side():
    with pytest.raises(ValueError):
        solve_boundary("up", GasState(1.0, 0.0), GAS2, 0.0)


def test_vacuum_detected():
    with pytest.raises(VacuumError):
        solve_riemann(GasState(1.0, -7.0), GAS14, GasState(1.0, 7.0), GAS14)


def test_near_vacuum_still_solved():
    # the gamma=1.4 vacuum threshold is |dv| = 4 sqrt(1.4) / 0.4, about 11.8
    fan = solve_riemann(GasState(1.0, -5.0), GAS14, GasState(1.0, 5.0), GAS14)
    assert 0.0 < fan.p_star < 1e-3
    assert fan.wave1.kind == RAREFACTION and fan.wave2.kind == RAREFACTION


def test_sample_far_and_centre():
    fan = solve_riemann(GasState(1.0, 0.2), GAS2, GasState(1.0, -0.2), GAS2)
    assert sample(fan, -100.0) == fan.left
    assert sample(fan, 100.0) == fan.right
    mid = sample(fan, 0.0)
    assert abs(mid.p - P_STAR_SYMMETRIC) <= 1e-10 and abs(mid.v) <= 1e-14


def test_sample_inside_rarefaction():
    fan = solve_riemann(GasState(1.3, 0.0), GAS14, GasState(1.0, 0.0), GAS14)
    lo, hi = fan.wave1.speeds
    for frac in (0.1, 0.5, 0.9):
        xi = lo + frac * (hi - lo)
        state = sample(fan, xi)
        assert abs(GAS14.char_speed(state.p) - abs(xi)) <= 1e-10
        # the sampled state sits on the 1-curve through the left state
        assert abs(fan.left.v - GAS14.wave_curve(state.p, 1.3) - state.v) <= 1e-13


@given(
    pl=st.floats(0.5, 2.0),
    pr=st.floats(0.5, 2.0),
    vl=st.floats(-0.15, 0.15),
    dv=st.floats(-0.3, 0.3),
    kappa=st.floats(0.05, 0.5),
    pair=st.integers(0, 3),
)
@settings(max_examples=200, deadline=None)
def test_riemann_residuals_property(pl, pr, vl, dv, kappa, pair):
    liquid = TaitLiquid(7.0, 1.0, kappa)
    law_l = (GAS14, liquid, GAS14, liquid)[pair]
    law_r = (GAS14, liquid, liquid, GAS14)[pair]
    vr = vl + dv
    try:
        fan = solve_riemann(GasState(pl, vl), law_l, GasState(pr, vr), law_r)
    except VacuumError:
        return
    residual = law_l.wave_curve(fan.p_star, pl) + law_r.wave_curve(fan.p_star, pr) - (vl - vr)
    assert abs(residual) <= 1e-12
    assert abs(fan.v_left_star - fan.v_right_star) <= 1e-10
    for wave in (fan.wave1, fan.wave2):
        if wave.kind == SHOCK:
            assert rh_residual(wave, wave.law) <= 1e-10


def test_fan_serialises():
    fan = solve_riemann(GasState(1.2, 0.0), GAS2, GasState(1.0, 0.0), WATER)
    data = json.loads(json.dumps(fan.as_dict()))
    assert data["p_star"] == pytest.approx(P_STAR_INTERFACE, abs=1e-10)


# --- rarefaction splitting ---------------------------------------------------


def test_weak_rarefaction_single_front():
    fan = solve_riemann(GasState(1.0, 0.0), GAS14, GasState(0.995, 0.0), GAS14)
    wave = fan.wave2 if fan.wave2.kind == RAREFACTION else fan.wave1
    assert wave.kind == RAREFACTION
    assert len(split_rarefaction(wave, wave.law, 0.05)) == 1


def test_split_count_and_equal_pressure_steps():
    # a pure 1-rarefaction p: 1 -> 0.5 lies on the curve through the left state
    left = GasState(1.0, 0.0)
    right = GasState(0.5, -GAS14.wave_curve(0.5, 1.0))
    fan = solve_riemann(left, GAS14, right, GAS14)
    assert fan.wave1.kind == RAREFACTION and fan.wave2.kind == NULL
    assert n_steps(0.5, 0.05) == 10
    fronts = split_rarefaction(fan.wave1, GAS14, 0.05)
    assert len(fronts) == 10
    pressures = [f.left.p for f in fronts] + [fronts[-1].right.p]
    steps = [a - b for a, b in zip(pressures[:-1], pressures[1:])]
    assert max(steps) - min(steps) <= 1e-14
    # consecutive fronts share states and speeds increase left to right
    for a, b in zip(fronts[:-1], fronts[1:]):
        assert a.right == b.left and a.speed < b.speed
    for f in fronts:
        assert f.speed == pytest.approx(-GAS14.char_speed(0.5 * (f.left.p + f.right.p)), rel=1e-14)


@pytest.mark.parametrize("eps", [0.1, 0.05, 0.025, 0.0125])
def test_split_endpoint_velocity_error(eps):
    left = GasState(1.0, 0.0)
    right = GasState(0.5, -GAS14.wave_curve(0.5, 1.0))
    wave = solve_riemann(left, GAS14, right, GAS14).wave1
    fronts = split_rarefaction(wave, GAS14, eps)
    # every intermediate state lies on the exact curve, so the chain ends exactly
    assert fronts[-1].right == wave.right
    for f in fronts:
        assert abs(f.left.v - (left.v - GAS14.wave_curve(f.left.p, 1.0))) <= 1e-14


def test_wave_fronts_shock_and_null():
    fan = solve_riemann(GasState(1.0, 0.2), GAS2, GasState(1.0, -0.2), GAS2)
    (front,) = wave_fronts(fan.wave1, 0.01, x0=2.0, t0=1.0)
    assert front.kind == SHOCK and front.position(2.0) == pytest.approx(2.0 + front.speed)
    same = solve_riemann(GasState(1.0, 0.0), GAS2, GasState(1.0, 0.0), GAS2)
    assert wave_fronts(same.wave1, 0.01) == []


def test_split_rejects_bad_input():
    fan = solve_riemann(GasState(1.0, 0.2), GAS2, GasState(1.0, -0.2), GAS2)
    with pytest.raises(ValueError):
        split_rarefaction(fan.wave1, GAS2, 0.01)
    wave = solve_riemann(GasState(1.3, 0.0), GAS14, GasState(1.0, 0.0), GAS14).wave1
    with pytest.raises(ValueError):
        split_rarefaction(wave, GAS14, 0.0)
    assert math.isfinite(wave.strength)
