"""Closed-form oscillator, PLL, flicker-noise and FMCW radar relations (SI units)."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError

__all__ = [
    "RADAR_C",
    "fom",
    "flicker_psd",
    "mos_flicker_psd",
    "k_vco",
    "pll_bandwidth",
    "capture_range",
    "range_resolution",
    "max_unambiguous_range",
]

# Radar range relations use the customary round value of the speed of light.
RADAR_C = 3e8


def _positive(**kw):
    for name, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise DomainError(f"{name} must be positive, got {v!r}")


def fom(pn_dbchz, f0, offset, p_dc_mw):
    """Oscillator figure of merit in dBc/Hz.

    ``pn_dbchz`` is the phase noise at ``offset`` from carrier ``f0``;
    ``p_dc_mw`` is the dc power in milliwatts.
    """
    _positive(f0=f0, offset=offset, p_dc_mw=p_dc_mw)
    return abs(pn_dbchz) + 20 * math.log10(f0 / offset) - 10 * math.log10(p_dc_mw)


def flicker_psd(K, alpha_exp, f):
    """Generic ``K / f**alpha_exp`` spectrum."""
    _positive(f=f)
    return K / np.asarray(f, dtype=float) ** alpha_exp


def mos_flicker_psd(K_F, W, L, C_ox, f):
    """Gate-referred MOS flicker voltage PSD, ``K_F W / (L f C_ox^2)``."""
    _positive(W=W, L=L, C_ox=C_ox, f=f)
    return K_F * W / (L * np.asarray(f, dtype=float) * C_ox**2)


def k_vco(delta_f, delta_v):
    """Tuning gain in Hz/V."""
    if delta_v == 0:
        raise DomainError("delta_v must be nonzero")
    return delta_f / delta_v


def pll_bandwidth(K_PD, K_VCO, K_F, N, L):
    """Approximate loop bandwidth of a charge-pump PLL, in Hz."""
    _positive(K_PD=K_PD, K_VCO=K_VCO, K_F=K_F, N=N, L=L)
    return math.sqrt(K_PD * K_VCO * K_F / (N * L)) / (2 * math.pi)


def capture_range(K_VCO, V_Cmax):
    """Capture range in rad/s."""
    _positive(K_VCO=K_VCO, V_Cmax=V_Cmax)
    return 2 * math.pi * K_VCO * V_Cmax


def range_resolution(bandwidth):
    """FMCW range resolution for chirp bandwidth ``bandwidth`` (m)."""
    _positive(bandwidth=bandwidth)
    return RADAR_C / (2 * bandwidth)


def max_unambiguous_range(T_chirp):
    _positive(T_chirp=T_chirp)
    return RADAR_C * T_chirp / 2
