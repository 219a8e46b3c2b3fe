"""Bandgap current reference and relaxation-oscillator clock models.

The reference current is::

    i_ref = (W3/W2) * (V_BE(T) / R_2(T) + V_T(T) ln(8) / R_3(T))

``V_BE`` is linear in temperature by default.  Two optional second-order
effects are available, both off by default:

* ``vbe_curvature`` adds the usual ``-X (k/q) (T ln(T/T0) - (T - T0))``
  bow to ``V_BE`` (value and slope at ``T0`` are unchanged);
* ``tc_resistor`` gives both poly resistors a common linear coefficient,
  ``R(T) = R(T0) (1 + tc (T - T0))``.

The oscillator charges ``C_1`` with ``i_osc`` between two thresholds and
discharges it with the same current, so its core frequency is
``i_osc / (2 C_1 (V_high - V_low))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants

from .errors import DomainError, ValidationError

__all__ = [
    "BandgapModel",
    "RelaxOsc",
    "thermal_voltage",
    "vbe",
    "i_ref",
    "di_ref_dT",
    "calibrate",
    "compensating_tc",
    "stationary_points",
    "osc_frequency",
    "divided_frequency",
    "frequency_plan_flags",
    "osc_transient_oracle",
]

K_OVER_Q = constants.k / constants.e
ZERO_C = constants.zero_Celsius
T_RANGE = (-20.0, 65.0)
CORE_RANGE = (65e3, 3e6)
DIVIDED_RANGE = (4.8e3, 640e3)


def thermal_voltage(T_c):
    return K_OVER_Q * (np.asarray(T_c, dtype=float) + ZERO_C)


@dataclass(frozen=True)
class BandgapModel:
    V_BE_at_T0: float = 0.65
    dV_BE_dT: float = -2e-3
    T0: float = 36.0
    R_2: float = 45.3e3
    R_3: float = 6.13e3
    mirror_ratio: float = 1.0
    emitter_area_ratio: int = 8
    vbe_curvature: float = 0.0
    tc_resistor: float = 0.0

    def __post_init__(self):
        for name in ("R_2", "R_3"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        if not self.mirror_ratio >= 0:
            raise ValidationError("mirror_ratio", "must be non-negative")
        if self.emitter_area_ratio != 8:
            raise ValidationError("emitter_area_ratio", "the PTAT term is fixed at ln(8)")


def vbe(model, T_c):
    T = np.asarray(T_c, dtype=float)
    v = model.V_BE_at_T0 + model.dV_BE_dT * (T - model.T0)
    if model.vbe_curvature:
        Tk, T0k = T + ZERO_C, model.T0 + ZERO_C
        v = v - model.vbe_curvature * K_OVER_Q * (Tk * np.log(Tk / T0k) - (Tk - T0k))
    return v


def _inner(model, T_c):
    """Bracketed sum (before the mirror ratio), in amperes."""
    scale = 1 + model.tc_resistor * (np.asarray(T_c, dtype=float) - model.T0)
    ptat = thermal_voltage(T_c) * math.log(model.emitter_area_ratio)
    return (vbe(model, T_c) / model.R_2 + ptat / model.R_3) / scale


def _check_T(T_c):
    T = np.asarray(T_c, dtype=float)
    lo, hi = T_RANGE
    if np.any(T < lo) or np.any(T > hi) or np.any(~np.isfinite(T)):
        raise DomainError(f"temperature outside model validity [{lo}, {hi}] degC")


def i_ref(model, T_c):
    """Reference current at ``T_c`` degrees Celsius (scalar or array)."""
    _check_T(T_c)
    i = model.mirror_ratio * _inner(model, T_c)
    return float(i) if np.ndim(T_c) == 0 else i


def di_ref_dT(model, T_c):
    """Temperature slope of ``i_ref`` in A/degC (central difference)."""
    h = 1e-3
    T = np.asarray(T_c, dtype=float)
    return model.mirror_ratio * (_inner(model, T + h) - _inner(model, T - h)) / (2 * h)


def calibrate(model, target, T_cal=36.0):
    """Copy of ``model`` with the mirror ratio set so ``i_ref(T_cal) == target``."""
    if not target > 0:
        raise DomainError("target current must be positive")
    _check_T(T_cal)
    inner = float(_inner(model, T_cal))
    if inner == 0:
        raise DomainError("reference sum is zero at the calibration temperature")
    return replace(model, mirror_ratio=target / inner)


def compensating_tc(model, T_c=None):
    """Common resistor coefficient that zeroes ``di_ref/dT`` at ``T_c``.

    With ``R(T) = R0 (1 + tc (T - T0))`` and ``S(T)`` the bracketed sum at
    ``tc = 0``, the slope vanishes where ``S'(1 + tc d) = S tc``.
    """
    T_c = model.T0 if T_c is None else T_c
    base = replace(model, tc_resistor=0.0)
    h = 1e-3
    s = float(_inner(base, T_c))
    ds = float((_inner(base, T_c + h) - _inner(base, T_c - h)) / (2 * h))
    d = T_c - model.T0
    return ds / (s - ds * d)


def stationary_points(model, T_lo=T_RANGE[0], T_hi=T_RANGE[1], points=851):
    """Temperatures in ``(T_lo, T_hi)`` where ``di_ref/dT`` changes sign."""
    T = np.linspace(T_lo, T_hi, points)
    g = di_ref_dT(model, T)
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    out = []
    for k in idx:
        # linear interpolation of the slope's zero crossing
        t0, t1, g0, g1 = T[k], T[k + 1], g[k], g[k + 1]
        out.append(float(t0 - g0 * (t1 - t0) / (g1 - g0)))
    return out


@dataclass(frozen=True)
class RelaxOsc:
    i_osc: float = 5e-6
    C_1: float = 10e-12
    V_high: float = 1.2
    V_low: float = 0.4
    divider: int = 65
    i_discharge: float = None

    def __post_init__(self):
        if not self.i_osc > 0:
            raise ValidationError("i_osc", "must be positive")
        if not self.C_1 > 0:
            raise ValidationError("C_1", "must be positive")
        if not self.V_high > self.V_low:
            raise ValidationError("V_high", "must exceed V_low")
        if isinstance(self.divider, bool) or not isinstance(self.divider, int) or self.divider < 1:
            raise ValidationError("divider", "must be a positive integer")


def osc_frequency(o):
    """Core oscillation frequency in Hz."""
    return o.i_osc / (2 * o.C_1 * (o.V_high - o.V_low))


def divided_frequency(o):
    return osc_frequency(o) / o.divider


def frequency_plan_flags(o):
    """Range warnings for the core and divided clocks (empty when fine)."""
    flags = []
    core = osc_frequency(o)
    if not CORE_RANGE[0] <= core <= CORE_RANGE[1]:
        flags.append(f"core frequency {core:.6g} Hz outside [65 kHz, 3 MHz]")
    div = core / o.divider
    if not DIVIDED_RANGE[0] <= div <= DIVIDED_RANGE[1]:
        flags.append(f"divided frequency {div:.6g} Hz outside [4.8 kHz, 640 kHz]")
    return flags


def osc_transient_oracle(o, n_cycles=10):
    """Measure frequency from an event-driven ramp simulation.

    The capacitor voltage ramps at ``+i/C`` until it crosses ``V_high``,
    then at ``-i/C`` until it crosses ``V_low``.  The frequency is the
    number of completed cycles over the time between the first and last
    upper-threshold events.
    """
    if n_cycles < 1:
        raise DomainError("n_cycles must be at least 1")
    if o.i_discharge is not None and o.i_discharge != o.i_osc:
        raise NotImplementedError("asymmetric charge/discharge currents are not modeled")
    slope = o.i_osc / o.C_1
    v, t, rising = o.V_low, 0.0, True
    top_events = []
    while len(top_events) < n_cycles + 1:
        if rising:
            t += (o.V_high - v) / slope
            v = o.V_high
            top_events.append(t)
        else:
            t += (v - o.V_low) / slope
            v = o.V_low
        rising = not rising
    return n_cycles / (top_events[-1] - top_events[0])
