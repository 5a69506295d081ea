import math

import pytest

from zeromach.eos import GammaGas
from zeromach.field import PiecewiseConstantField as PC
from zeromach.limit import (
    evolve,
    liquid_rhs,
    local_flow_step,
    make_limit_state,
    ode_identity_residual,
)
from zeromach.metrics import distance_d, lift
from zeromach.scenarios import builtin_scenarios
from zeromach.wft import DomainViolation

GAS = GammaGas(1.0, 2.0)


def l1_state():
    sc = builtin_scenarios()["L1"]
    return make_limit_state(sc.datum(), sc.gas_law(), sc.m, sc.initial_liquid_velocity(), sc.epsilon(), delta=sc.delta)


def test_liquid_rhs_examples():
    assert liquid_rhs(1.2, 1.0, 2.0) == pytest.approx(0.1, abs=1e-15)
    assert liquid_rhs(1.0, 1.0, 2.0) == 0.0
    assert liquid_rhs(1.0, 1.2, 2.0) == pytest.approx(-0.1, abs=1e-15)
    with pytest.raises(ValueError):
        liquid_rhs(1.0, 1.0, 0.0)


def test_equilibrium_is_fixed_point():
    state = make_limit_state(PC.constant([1.3, 0.2]), GAS, 2.0, 0.2, 0.01)
    out = evolve(state, 0.5, 1e-2)
    assert abs(out.v_l - 0.2) <= 1e-12
    for half in (out.left, out.right):
        assert len(half) == 0
    assert out.trace_pressures() == (1.3, 1.3)


def test_first_step_pressure_push():
    datum = PC([1.0], [[1.2, 0.0], [1.0, 0.0]])
    state = make_limit_state(datum, GAS, 2.0, 0.0, 0.01)
    h = 1e-3
    out = local_flow_step(state, h)
    assert out.v_l == pytest.approx(0.1 * h, rel=1e-14)
    rec = out.history[0]
    assert (rec.p_left, rec.p_right) == (1.2, 1.0)
    # the input state is untouched
    assert state.v_l == 0.0 and state.t == 0.0


def test_step_size_validated():
    state = l1_state()
    with pytest.raises(ValueError):
        local_flow_step(state, 0.0)
    with pytest.raises(ValueError):
        evolve(state, 1.0, 0.5)
    with pytest.raises(ValueError):
        evolve(evolve(state, 0.1, 1e-2), 0.05, 1e-2)


def test_evolve_to_current_time_is_identity():
    state = l1_state()
    out = evolve(state, 0.0, 1e-2)
    assert out.v_l == state.v_l and out.t == state.t
    assert distance_d(lift(out), lift(state)) == 0.0


def test_velocity_converges_first_order():
    state = l1_state()
    vs = [evolve(state, 1.0, h).v_l for h in (1e-2, 5e-3, 2.5e-3)]
    ratio = abs(vs[0] - vs[1]) / abs(vs[1] - vs[2])
    assert math.log2(ratio) >= 0.9


@pytest.mark.parametrize("h", [1e-2, 5e-3])
def test_semigroup_property(h):
    state = l1_state()
    direct = evolve(state, 1.0, h)
    split = evolve(evolve(state, 0.4, h), 1.0, h)
    assert distance_d(lift(direct), lift(split)) <= 1.0 * h


def test_ode_integral_identity():
    state = l1_state()
    residuals = []
    for h in (1e-2, 5e-3):
        out = evolve(state, 1.0, h)
        # the rectangle rule is the Euler update itself
        assert ode_identity_residual(state, out, rule="left") <= 1e-13
        residuals.append(ode_identity_residual(state, out))
    assert residuals[1] <= 0.6 * residuals[0]
    assert residuals[0] <= 1.0 * 1e-2
    with pytest.raises(ValueError):
        ode_identity_residual(state, out, rule="simpson")


def test_boundary_mismatch_bounded_per_step():
    state = l1_state()
    out = evolve(state, 1.0, 1e-2)
    for rec in out.history:
        allowed = 1e-8 + 2.0 * rec.h * abs(rec.p_left - rec.p_right) / 2.0
        assert rec.mismatch <= allowed * (1.0 + 1e-9)


def test_step_shortened_at_wall_arrival():
    datum = PC([-0.05, 2.0], [[1.1, 0.0], [1.0, 0.0], [1.0, 0.0]])
    state = make_limit_state(datum, GAS, 2.0, 0.0, 0.01)
    out = evolve(state, 0.2, 1e-2)
    steps = [r.h for r in out.history]
    assert min(steps) < 1e-2 * 0.999
    assert sum(steps) == pytest.approx(0.2, abs=1e-13)
    assert out.t == 0.2


def test_large_datum_rejected():
    with pytest.raises(DomainViolation):
        make_limit_state(PC([-1.0], [[3.0, 0.0], [1.0, 0.0]]), GAS, 2.0, 0.0, 0.01, delta=0.4)
