"""Charge-pump DC-DC converter model and its regulation loop.

Each stage charges its storage capacitor ``C_s`` through a switch of
on-resistance ``R_on`` for half a clock period, reaching
``V_C = (1 - alpha) * V_dd`` with ``alpha = exp(-1 / (2 f R_on C_s))``.
Under a dc load the output of an ``n``-stage pump is affine in the load
current::

    V_out = V_clk + n V_C - n I / (2 f C_s) - n R_on I  =  K - beta I

and the efficiency is::

    eta = V_out I / (n C_p f V_dd^2 + 2 n R_on I^2 + (n + 1) V_dd I)

Inter-stage leakage is taken as zero, which is what makes an ``n``-stage
pump draw ``(n + 1) I`` from the supply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OverloadError, ValidationError

__all__ = [
    "ChargePumpStage",
    "MultiStagePump",
    "FeedbackLoop",
    "HighSideBias",
    "FeedbackTrace",
    "alpha",
    "capacitor_voltage",
    "output_resistance",
    "open_circuit_voltage",
    "steady_state_vout",
    "overload_current",
    "efficiency",
    "efficiency_curve",
    "optimum_iout",
    "grid_optimum_iout",
    "regulation_point",
    "simulate_feedback",
    "high_side_bias",
]


@dataclass(frozen=True)
class ChargePumpStage:
    V_dd: float = 5.0
    f_clk: float = 13.56e6
    R_on: float = 100.0
    C_s: float = 100e-12
    C_p_eq: float = 500e-15
    V_clk: float = None

    def __post_init__(self):
        for name in ("V_dd", "f_clk", "R_on", "C_s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(name, f"must be positive, got {v!r}")
        if not (math.isfinite(self.C_p_eq) and self.C_p_eq >= 0):
            raise ValidationError("C_p_eq", "must be non-negative")
        if self.V_clk is None:
            object.__setattr__(self, "V_clk", self.V_dd)
        if not (0 < self.V_clk <= self.V_dd):
            raise ValidationError("V_clk", "clock amplitude must be in (0, V_dd]")


@dataclass(frozen=True)
class MultiStagePump:
    stage: ChargePumpStage
    n_stages: int = 7
    C_load: float = 10e-9

    def __post_init__(self):
        if isinstance(self.n_stages, bool) or not isinstance(self.n_stages, int) or self.n_stages < 1:
            raise ValidationError("n_stages", "must be a positive integer")
        if not self.C_load >= 10 * self.stage.C_s:
            raise ValidationError("C_load", "must be at least 10 x C_s")


@dataclass(frozen=True)
class FeedbackLoop:
    """Resistive divider plus comparator gating the pump clock.

    The clock is gated off while ``V_out * R_2 / (R_1 + R_2)`` exceeds
    ``V_ref``.  ``hysteresis`` is the comparator's total window in volts at
    its input (0 for a bare comparator).
    """

    R_1: float = 10e3
    R_2: float = 1.1e3
    V_ref: float = 1.8
    hysteresis: float = 0.0
    target: str = "20 V rail"

    def __post_init__(self):
        for name in ("R_1", "R_2", "V_ref"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(name, f"must be positive, got {v!r}")
        if self.hysteresis < 0:
            raise ValidationError("hysteresis", "must be non-negative")

    @property
    def ratio(self):
        return self.R_2 / (self.R_1 + self.R_2)


@dataclass(frozen=True)
class HighSideBias:
    """Generator for a rail sitting ``V_ref * R_3/R_1`` below the supply."""

    V_ref: float = 1.25
    ratio: float = 4.0
    supply: float = 20.0

    def __post_init__(self):
        if not (math.isfinite(self.ratio) and self.ratio >= 0):
            raise ValidationError("ratio", "must be non-negative")


def alpha(stage):
    return math.exp(-1.0 / (2 * stage.f_clk * stage.R_on * stage.C_s))


def capacitor_voltage(stage):
    """Voltage on ``C_s`` at the end of the charging half-period."""
    return (1 - alpha(stage)) * stage.V_dd


def output_resistance(stage, n_stages=1):
    """``beta`` of the affine output model, times the stage count."""
    return n_stages * (1.0 / (2 * stage.f_clk * stage.C_s) + stage.R_on)


def open_circuit_voltage(stage, n_stages=1):
    return stage.V_clk + n_stages * capacitor_voltage(stage)


def steady_state_vout(stage, I_out, n_stages=1):
    """Average output voltage at dc load ``I_out``.  Works on arrays too."""
    I = np.asarray(I_out, dtype=float)
    if np.any(I < 0):
        raise DomainError("I_out must be non-negative")
    v = open_circuit_voltage(stage, n_stages) - output_resistance(stage, n_stages) * I
    return float(v) if np.ndim(I_out) == 0 else v


def overload_current(stage, n_stages=1):
    """Load current at which the output falls to ``V_dd``."""
    return (open_circuit_voltage(stage, n_stages) - stage.V_dd) / output_resistance(stage, n_stages)


def _efficiency(stage, I, n):
    v_out = open_circuit_voltage(stage, n) - output_resistance(stage, n) * I
    denom = (
        n * stage.C_p_eq * stage.f_clk * stage.V_dd**2
        + 2 * n * stage.R_on * I**2
        + (n + 1) * stage.V_dd * I
    )
    return v_out, v_out * I / denom


def efficiency(stage, I_out, n_stages=1):
    """Steady-state power efficiency at load ``I_out``.

    Raises ``OverloadError`` when the output would not exceed ``V_dd``.
    """
    if not I_out > 0:
        raise DomainError("I_out must be positive")
    v_out, eta = _efficiency(stage, I_out, n_stages)
    if v_out <= stage.V_dd:
        raise OverloadError(
            f"pump overloaded at I_out={I_out:g} A (V_out={v_out:.4g} V <= V_dd)"
        )
    return float(eta)


def efficiency_curve(stage, I_out, n_stages=1):
    """Vectorised efficiency; overloaded points are NaN."""
    I = np.asarray(I_out, dtype=float)
    v_out, eta = _efficiency(stage, I, n_stages)
    return np.where((v_out > stage.V_dd) & (I > 0), eta, np.nan)


def optimum_iout(stage, n_stages=1):
    """Load current maximising efficiency.

    With ``V_out = K - beta I`` and denominator ``a I^2 + b I + c`` the
    derivative numerator collapses to the quadratic
    ``(a K + b beta) I^2 + 2 beta c I - K c = 0``; its positive root is the
    optimum.
    """
    n = n_stages
    K = open_circuit_voltage(stage, n)
    beta = output_resistance(stage, n)
    a = 2 * n * stage.R_on
    b = (n + 1) * stage.V_dd
    c = n * stage.C_p_eq * stage.f_clk * stage.V_dd**2
    A = a * K + b * beta
    if c <= 0 or A <= 0 or K <= 0:
        raise DomainError("efficiency has no interior maximum for these parameters")
    # numerically stable positive root of A I^2 + B I - C = 0
    B, C = 2 * beta * c, K * c
    root = 2 * C / (B + math.sqrt(B * B + 4 * A * C))
    if root >= overload_current(stage, n):
        raise DomainError("optimum lies beyond the overload current")
    return root


def grid_optimum_iout(stage, n_stages=1, lo=1e-6, hi=50e-3, points=1000):
    """Brute-force argmax of efficiency over a log-spaced current grid."""
    grid = np.geomspace(lo, hi, points)
    eta = efficiency_curve(stage, grid, n_stages)
    if np.all(np.isnan(eta)):
        raise DomainError("pump is overloaded over the whole grid")
    k = int(np.nanargmax(eta))
    return float(grid[k]), float(eta[k])


def regulation_point(loop):
    """Output voltage at which the divided output equals ``V_ref``."""
    return loop.V_ref / loop.ratio


@dataclass
class FeedbackTrace:
    time: np.ndarray
    v_out: np.ndarray
    clock_enabled: np.ndarray

    def settled(self, fraction=0.5):
        """Slice of the trace after the first ``fraction`` of the run."""
        k = int(len(self.time) * fraction)
        return FeedbackTrace(self.time[k:], self.v_out[k:], self.clock_enabled[k:])


def simulate_feedback(pump, loop, I_load, duration, v_initial=0.0):
    """Cycle-by-cycle behavioral simulation of the regulated pump.

    Every clock period the comparator decides whether the pump runs.  While
    running, the output relaxes toward ``steady_state_vout(I_load)`` with
    time constant ``C_load * n * beta``; while gated, the load discharges
    ``C_load`` at ``I_load / C_load``.  ``loop=None`` runs the pump open
    loop (clock always on).
    """
    if not duration > 0:
        raise DomainError("duration must be positive")
    if I_load < 0:
        raise DomainError("I_load must be non-negative")
    st, n = pump.stage, pump.n_stages
    T = 1.0 / st.f_clk
    steps = int(math.ceil(duration / T))
    v_ss = steady_state_vout(st, I_load, n)
    decay = math.exp(-T / (pump.C_load * output_resistance(st, n)))
    droop = I_load * T / pump.C_load

    v = np.empty(steps + 1)
    en = np.zeros(steps + 1, dtype=bool)
    v[0] = v_initial
    if loop is not None:
        upper = loop.V_ref + loop.hysteresis / 2
        lower = loop.V_ref - loop.hysteresis / 2
        ratio = loop.ratio
    enabled = True
    for k in range(steps):
        if loop is not None:
            sensed = v[k] * ratio
            if sensed > upper:
                enabled = False
            elif sensed < lower:
                enabled = True
            elif loop.hysteresis == 0:
                # sensed == V_ref exactly: not exceeding, keep pumping
                enabled = True
        en[k] = enabled
        if enabled:
            v[k + 1] = v_ss + (v[k] - v_ss) * decay
        else:
            v[k + 1] = max(v[k] - droop, 0.0)
    en[steps] = enabled
    return FeedbackTrace(np.arange(steps + 1) * T, v, en)


def high_side_bias(b):
    return b.supply - b.V_ref * b.ratio
