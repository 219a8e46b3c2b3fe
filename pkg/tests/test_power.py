import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from stimvco import DomainError, OverloadError, ValidationError
from stimvco.power import (
    ChargePumpStage,
    FeedbackLoop,
    HighSideBias,
    MultiStagePump,
    alpha,
    capacitor_voltage,
    efficiency,
    efficiency_curve,
    grid_optimum_iout,
    high_side_bias,
    open_circuit_voltage,
    optimum_iout,
    overload_current,
    regulation_point,
    simulate_feedback,
    steady_state_vout,
)

STAGE = ChargePumpStage()


def test_defaults_match_design_point():
    assert (STAGE.V_dd, STAGE.f_clk, STAGE.R_on, STAGE.C_s, STAGE.C_p_eq) == (5.0, 13.56e6, 100.0, 100e-12, 500e-15)
    assert STAGE.V_clk == 5.0


def test_alpha_and_capacitor_voltage():
    expected = math.exp(-1 / (2 * 13.56e6 * 100 * 100e-12))
    assert alpha(STAGE) == pytest.approx(expected, rel=1e-15)
    assert capacitor_voltage(STAGE) == pytest.approx(5 * (1 - expected))


def test_example_point_by_hand():
    # hand substitution at 1 mA, single stage
    a = math.exp(-1 / (2 * 13.56e6 * 100 * 100e-12))
    v = 5 + (1 - a) * 5 - 1e-3 / (2 * 13.56e6 * 100e-12) - 100 * 1e-3
    p_in = 500e-15 * 13.56e6 * 25 + 2 * 100 * 1e-6 + 2 * 5 * 1e-3
    assert steady_state_vout(STAGE, 1e-3) == pytest.approx(v, rel=1e-14)
    assert efficiency(STAGE, 1e-3) == pytest.approx(v * 1e-3 / p_in, rel=1e-14)
    assert steady_state_vout(STAGE, 1e-3) == pytest.approx(9.406, abs=1e-3)
    assert efficiency(STAGE, 1e-3) == pytest.approx(0.907, abs=1e-3)


def test_vout_vectorised():
    I = np.array([0.0, 1e-3, 2e-3])
    v = steady_state_vout(STAGE, I, 3)
    assert v.shape == (3,)
    assert np.all(np.diff(v) < 0)
    with pytest.raises(DomainError):
        steady_state_vout(STAGE, -1e-3)


@pytest.mark.parametrize("n", range(1, 11))
def test_ideal_switch_limit(n):
    ideal = ChargePumpStage(R_on=1e-3)
    assert alpha(ideal) == 0.0
    assert steady_state_vout(ideal, 0.0, n) == (n + 1) * 5.0


def test_supply_draws_n_plus_one_currents():
    # without parasitics or switch loss, eta tends to V_out / ((n + 1) V_dd)
    s = ChargePumpStage(R_on=1e-3, C_p_eq=0.0)
    for n in (1, 4, 9):
        I = 1e-9
        assert efficiency(s, I, n) == pytest.approx(steady_state_vout(s, I, n) / ((n + 1) * 5.0), rel=1e-12)


def test_overload():
    I_max = overload_current(STAGE)
    assert steady_state_vout(STAGE, I_max) == pytest.approx(5.0)
    with pytest.raises(OverloadError):
        efficiency(STAGE, I_max * 1.01)
    with pytest.raises(DomainError):
        efficiency(STAGE, 0.0)
    curve = efficiency_curve(STAGE, [1e-3, 2 * I_max])
    assert not math.isnan(curve[0]) and math.isnan(curve[1])


def test_optimum_matches_paper_parameters():
    i_opt = optimum_iout(STAGE)
    g, _ = grid_optimum_iout(STAGE, points=20001)
    assert i_opt == pytest.approx(g, rel=1e-3)
    h = i_opt * 1e-4
    assert efficiency(STAGE, i_opt) > efficiency(STAGE, i_opt - h)
    assert efficiency(STAGE, i_opt) > efficiency(STAGE, i_opt + h)


stages = st.builds(
    ChargePumpStage,
    V_dd=st.floats(1.0, 5.0),
    f_clk=st.floats(1e6, 20e6),
    R_on=st.floats(10.0, 500.0),
    C_s=st.floats(20e-12, 1e-9),
    C_p_eq=st.floats(50e-15, 2e-12),
)


@settings(max_examples=100, deadline=None)
@given(stages, st.integers(1, 10))
def test_optimum_zeroes_derivative(stage, n):
    try:
        i = optimum_iout(stage, n)
    except DomainError:
        assume(False)
    h = i * 1e-5
    d = (efficiency(stage, i + h, n) - efficiency(stage, i - h, n)) / (2 * h)
    assert abs(d) * i < 1e-6


def test_no_parasitic_means_no_interior_optimum():
    with pytest.raises(DomainError):
        optimum_iout(ChargePumpStage(C_p_eq=0.0))


def test_trends_with_parasitic():
    peaks, currents = [], []
    for cp in (100e-15, 500e-15, 1e-12):
        s = ChargePumpStage(C_p_eq=cp)
        i = optimum_iout(s)
        currents.append(i)
        peaks.append(efficiency(s, i))
    assert peaks == sorted(peaks, reverse=True)
    assert currents == sorted(currents)


def test_regulation_setpoint():
    loop = FeedbackLoop()
    assert regulation_point(loop) == pytest.approx(1.8 * 11.1 / 1.1)


def test_open_loop_settles_to_steady_state():
    pump = MultiStagePump(STAGE, 3)
    tr = simulate_feedback(pump, None, 1e-3, 2e-3)
    assert tr.clock_enabled.all()
    assert tr.v_out[-1] == pytest.approx(steady_state_vout(STAGE, 1e-3, 3), rel=1e-6)


@pytest.mark.parametrize("I", [0.5e-3, 1e-3, 2e-3])
def test_closed_loop_band(I):
    pump = MultiStagePump(STAGE, 7)
    loop = FeedbackLoop()
    tr = simulate_feedback(pump, loop, I, 2e-3).settled(0.5)
    target = regulation_point(loop)
    assert np.all(np.abs(tr.v_out - target) < 1.0)
    assert 0 < tr.clock_enabled.mean() < 1


def test_hysteresis_widens_ripple():
    pump = MultiStagePump(STAGE, 7)
    bare = simulate_feedback(pump, FeedbackLoop(), 1e-3, 2e-3).settled()
    hyst = simulate_feedback(pump, FeedbackLoop(hysteresis=0.05), 1e-3, 2e-3).settled()
    assert np.ptp(hyst.v_out) > np.ptp(bare.v_out)


def test_high_side_bias():
    assert high_side_bias(HighSideBias()) == pytest.approx(15.0)


@pytest.mark.parametrize(
    "factory, field",
    [
        (lambda: ChargePumpStage(V_dd=0), "V_dd"),
        (lambda: ChargePumpStage(C_p_eq=-1), "C_p_eq"),
        (lambda: ChargePumpStage(V_clk=6.0), "V_clk"),
        (lambda: MultiStagePump(STAGE, 0), "n_stages"),
        (lambda: MultiStagePump(STAGE, 2, C_load=1e-10), "C_load"),
        (lambda: FeedbackLoop(R_1=0), "R_1"),
        (lambda: FeedbackLoop(hysteresis=-1), "hysteresis"),
        (lambda: HighSideBias(ratio=-1), "ratio"),
    ],
)
def test_validation(factory, field):
    with pytest.raises(ValidationError) as exc:
        factory()
    assert exc.value.field == field


def test_simulation_input_errors():
    pump = MultiStagePump(STAGE)
    with pytest.raises(DomainError):
        simulate_feedback(pump, None, 1e-3, 0.0)
    with pytest.raises(DomainError):
        simulate_feedback(pump, None, -1e-3, 1e-6)


def test_open_circuit_voltage():
    assert open_circuit_voltage(STAGE, 2) == pytest.approx(5 + 2 * capacitor_voltage(STAGE))
