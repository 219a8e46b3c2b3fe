import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stimvco import DomainError, ValidationError
from stimvco.refclock import (
    BandgapModel,
    RelaxOsc,
    calibrate,
    compensating_tc,
    di_ref_dT,
    divided_frequency,
    frequency_plan_flags,
    i_ref,
    osc_frequency,
    osc_transient_oracle,
    stationary_points,
    thermal_voltage,
    vbe,
)


def test_thermal_voltage_at_body_temperature():
    assert thermal_voltage(36.0) == pytest.approx(26.64e-3, rel=1e-3)


def test_reference_sum_by_hand():
    m = BandgapModel()
    vt = 1.380649e-23 * (36 + 273.15) / 1.602176634e-19
    expected = 0.65 / 45.3e3 + vt * math.log(8) / 6.13e3
    assert i_ref(m, 36.0) == pytest.approx(expected, rel=1e-12)


def test_calibration_hits_target():
    m = calibrate(BandgapModel(), 5e-6)
    assert i_ref(m, 36.0) == pytest.approx(5e-6, rel=1e-12)
    assert m.mirror_ratio == pytest.approx(0.2138, abs=1e-4)
    with pytest.raises(DomainError):
        calibrate(BandgapModel(), 0.0)


def test_linear_model_has_constant_slope():
    m = calibrate(BandgapModel(), 5e-6)
    g = di_ref_dT(m, np.linspace(-20, 65, 50))
    np.testing.assert_allclose(g, g[0], rtol=1e-6)
    assert stationary_points(m) == []


def test_curvature_keeps_value_and_slope_at_T0():
    lin, bowed = BandgapModel(), BandgapModel(vbe_curvature=3.0)
    assert vbe(bowed, 36.0) == pytest.approx(vbe(lin, 36.0), abs=1e-15)
    h = 1e-4
    s_lin = (vbe(lin, 36 + h) - vbe(lin, 36 - h)) / (2 * h)
    s_bow = (vbe(bowed, 36 + h) - vbe(bowed, 36 - h)) / (2 * h)
    assert s_bow == pytest.approx(s_lin, abs=1e-9)
    assert vbe(bowed, -20.0) < vbe(lin, -20.0) and vbe(bowed, 65.0) < vbe(lin, 65.0)


@pytest.mark.parametrize("T_c", [0.0, 36.0, 50.0])
def test_compensating_tc_zeroes_slope(T_c):
    m = BandgapModel(vbe_curvature=2.0)
    m = replace(m, tc_resistor=compensating_tc(m, T_c))
    assert abs(di_ref_dT(m, T_c)) < 1e-14


def test_compensated_reference_has_interior_maximum():
    m = BandgapModel(vbe_curvature=2.0)
    m = calibrate(replace(m, tc_resistor=compensating_tc(m)), 5e-6)
    pts = stationary_points(m)
    assert len(pts) == 1 and pts[0] == pytest.approx(36.0, abs=0.2)
    T = np.linspace(-20, 65, 200)
    assert np.all(i_ref(m, T) <= i_ref(m, 36.0) + 1e-18)
    assert compensating_tc(BandgapModel(vbe_curvature=2.0)) < 0


def test_temperature_domain():
    with pytest.raises(DomainError):
        i_ref(BandgapModel(), 70.0)
    with pytest.raises(DomainError):
        i_ref(BandgapModel(), np.array([0.0, -25.0]))


def test_bandgap_validation():
    with pytest.raises(ValidationError):
        BandgapModel(R_2=0)
    with pytest.raises(ValidationError):
        BandgapModel(emitter_area_ratio=4)


def test_oscillator_design_point():
    o = RelaxOsc()
    assert osc_frequency(o) == pytest.approx(312.5e3)
    assert divided_frequency(o) == pytest.approx(312.5e3 / 65)
    assert frequency_plan_flags(o) == []


oscillators = st.builds(
    RelaxOsc,
    i_osc=st.floats(0.5e-6, 50e-6),
    C_1=st.floats(1e-12, 100e-12),
    V_high=st.floats(0.9, 1.8),
    V_low=st.floats(0.1, 0.8),
    divider=st.integers(1, 256),
)


@settings(max_examples=200, deadline=None)
@given(oscillators)
def test_frequency_matches_event_oracle(o):
    assert osc_frequency(o) == pytest.approx(osc_transient_oracle(o, 7), rel=1e-9)


def test_frequency_flags():
    assert len(frequency_plan_flags(RelaxOsc(i_osc=50e-6, C_1=1e-12))) >= 1
    assert any("divided" in f for f in frequency_plan_flags(RelaxOsc(divider=256)))


def test_oscillator_validation_and_oracle_limits():
    with pytest.raises(ValidationError):
        RelaxOsc(V_high=0.3)
    with pytest.raises(ValidationError):
        RelaxOsc(divider=0)
    with pytest.raises(NotImplementedError):
        osc_transient_oracle(RelaxOsc(i_discharge=1e-6))
    with pytest.raises(DomainError):
        osc_transient_oracle(RelaxOsc(), 0)
