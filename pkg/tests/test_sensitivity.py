import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from stimvco import DomainError, ValidationError
from stimvco.vco import (
    HarmonicWaveform,
    fourier,
    gamma_eff,
    isf,
    isf_profile,
    rms,
    sweep_isf,
    theta_grid,
)


def test_pure_cosine_gives_negative_sine():
    g = isf(HarmonicWaveform.two_tone(0.0, 0.0))
    np.testing.assert_allclose(g, -np.sin(theta_grid()), atol=1e-14)
    assert rms(g) == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    assert abs(fourier(g).dc) < 1e-15


def test_amplitude_normalisation():
    a = isf(HarmonicWaveform(((2.5, 0.0), (1.0, math.pi))))
    b = isf(HarmonicWaveform.two_tone(0.4, math.pi))
    np.testing.assert_allclose(a, b, rtol=1e-12)


@settings(max_examples=100)
@given(st.floats(0.0, 0.95), st.sampled_from([0.0, math.pi]), st.floats(0.0, 0.3), st.sampled_from([0.0, math.pi]))
def test_even_waveforms_have_zero_dc(A2, phi2, A3, phi3):
    w = HarmonicWaveform(((1.0, 0.0), (A2, phi2), (A3, phi3)))
    try:
        g = isf(w)
    except DomainError:
        return
    assert abs(fourier(g).dc) < 1e-9


def _closed_form_rms(w):
    def g2(t):
        f, fp = w.evaluate(t), w.evaluate(t, 1)
        return (fp / (fp * fp + f * f)) ** 2

    val, _ = quad(g2, 0, 2 * math.pi, limit=400, epsabs=1e-14, epsrel=1e-13)
    return math.sqrt(val / (2 * math.pi))


waveforms = st.builds(
    lambda a2, p2, a3, p3: HarmonicWaveform(((1.0, 0.0), (a2, p2), (a3, p3))),
    st.floats(0.0, 0.4), st.floats(0, 2 * math.pi), st.floats(0.0, 0.1), st.floats(0, 2 * math.pi),
)


@settings(max_examples=60, deadline=None)
@given(waveforms)
def test_parseval_and_quadrature_oracle(w):
    g = isf(w, 1024)
    fs = fourier(g)
    assert fs.parseval_rms() == pytest.approx(rms(g), rel=1e-6)
    assert rms(g) == pytest.approx(_closed_form_rms(w), rel=1e-6)


@settings(max_examples=50)
@given(st.integers(256, 2049), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1))
def test_fourier_recovers_known_coefficients(n, c1, s3, dc):
    t = theta_grid(n)
    x = dc + c1 * np.cos(t) + s3 * np.sin(3 * t)
    fs = fourier(x, 4)
    np.testing.assert_allclose(fs.cos, [dc, c1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(fs.sin, [0, 0, 0, s3, 0], atol=1e-12)
    assert fourier(x).parseval_rms() == pytest.approx(rms(x), rel=1e-9, abs=1e-12)


def test_phase_convention():
    t = theta_grid(1024)
    x = 0.7 * np.cos(2 * t + 0.3)
    fs = fourier(x, 3)
    assert fs.magnitude[2] == pytest.approx(0.7)
    assert fs.phase[2] == pytest.approx(0.3)


def test_nyquist_term_in_parseval():
    x = np.cos(np.pi * np.arange(256))
    assert fourier(x).parseval_rms() == pytest.approx(1.0)


def test_singular_waveform_is_rejected():
    with pytest.raises(DomainError):
        isf(HarmonicWaveform.two_tone(1.0, 0.0))
    with pytest.raises(DomainError):
        isf(HarmonicWaveform.two_tone(0.5, math.pi / 2))


def test_sample_count_floor():
    with pytest.raises(DomainError):
        isf(HarmonicWaveform(), 128)


def test_waveform_validation():
    with pytest.raises(ValidationError):
        HarmonicWaveform(((0.0, 0.0),))
    with pytest.raises(ValidationError):
        HarmonicWaveform(())
    with pytest.raises(ValidationError):
        HarmonicWaveform(((1.0, 0.0), (-0.1, 0.0)))


def test_waveform_derivatives():
    w = HarmonicWaveform.two_tone(0.3, 1.0)
    t = np.linspace(0, 6, 7)
    h = 1e-6
    num = (w.evaluate(t + h) - w.evaluate(t - h)) / (2 * h)
    np.testing.assert_allclose(w.evaluate(t, 1), num, atol=1e-8)
    num2 = (w.evaluate(t + h, 1) - w.evaluate(t - h, 1)) / (2 * h)
    np.testing.assert_allclose(w.evaluate(t, 2), num2, atol=1e-7)
    with pytest.raises(ValueError):
        w.evaluate(t, 3)


def test_unmodulated_profile_is_gamma():
    g = isf(HarmonicWaveform.two_tone(0.3, 2.0))
    prof = isf_profile(g)
    ge, dc, r = gamma_eff(prof)
    np.testing.assert_array_equal(ge, g)
    assert dc == pytest.approx(fourier(g).dc, abs=1e-15)
    assert r == pytest.approx(rms(g), rel=1e-12)
    assert prof.coefficients("gamma").shape == (9,)
    assert prof.phase_sum.shape == prof.phase_diff.shape == (9, 9)


def test_profile_grid_mismatch():
    g = isf(HarmonicWaveform())
    with pytest.raises(DomainError):
        isf_profile(g, np.ones(g.size + 1))
    with pytest.raises(DomainError):
        isf_profile(g[:100], np.ones(100))


def test_intermediate_phases():
    g = isf(HarmonicWaveform.two_tone(0.3, 2.0))
    a = 0.5 + 0.5 * np.cos(theta_grid() + 0.4)
    prof = isf_profile(g, a, 4)
    pa, pg = fourier(a).phase, fourier(g).phase
    assert prof.phase_sum[1, 2] == pytest.approx(pa[1] + pg[2])
    assert prof.phase_diff[1, 2] == pytest.approx(pa[1] - pg[2])


def test_sweep_maps_and_symmetry():
    A2 = np.linspace(0, 0.9, 10)
    phi2 = np.array([0.0, math.pi / 3, math.pi, 4 * math.pi / 3])
    sw = sweep_isf(A2, phi2)
    assert sw.gamma_rms.shape == (10, 4)
    assert np.nanmax(np.abs(sw.gamma_0[:, [0, 2]])) < 1e-9
    # a half-period shift maps phi2 to phi2 + pi without changing rms
    np.testing.assert_allclose(sw.gamma_rms[:, 1], sw.gamma_rms[:, 3], rtol=1e-9)


def test_sweep_marks_singular_points():
    sw = sweep_isf([0.5, 1.0], [0.0, math.pi / 2, math.pi])
    assert sw.singular.tolist() == [[False, True, False], [True, False, True]]


def test_gamma2_grows_with_A2_at_pi():
    A2 = np.linspace(0, 0.8, 41)
    g2 = sweep_isf(A2, [math.pi]).gamma_2[:, 0]
    assert np.all(np.diff(g2) > 0)


def test_parallel_sweep_matches_serial():
    from concurrent.futures import ThreadPoolExecutor

    A2, phi2 = np.linspace(0, 1, 11), np.linspace(0, 2 * math.pi, 9)
    serial = sweep_isf(A2, phi2)
    with ThreadPoolExecutor(4) as ex:
        par = sweep_isf(A2, phi2, executor=ex)
    np.testing.assert_array_equal(serial.gamma_rms, par.gamma_rms)


def test_empty_sweep():
    with pytest.raises(DomainError):
        sweep_isf([], [0.0])
