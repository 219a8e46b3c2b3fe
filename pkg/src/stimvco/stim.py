"""Programmable stimulation waveforms, charge accounting and passive balance.

A stimulation burst is described by a 32-entry table of 8-bit DAC codes
played back at ``32 * stim_frequency``.  The DAC is differential around
mid-scale: code 128 is zero current and one LSB is ``1/128`` of full scale,
so code 0 maps to ``-full_scale`` and code 255 to ``+127/128`` of it.  A
5-bit amplitude block scales the result linearly by ``amplitude_code / 31``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .tissue import discharge_time_constant

__all__ = [
    "SAMPLES_PER_CYCLE",
    "SHAPES",
    "StimProgram",
    "DacModel",
    "BiphasicPulse",
    "shape_table",
    "synthesize",
    "net_charge",
    "simulate_balance",
    "inl_dnl",
    "is_monotonic",
    "biphasic_samples",
    "program_to_dict",
    "program_from_dict",
    "program_to_json",
    "program_from_json",
    "write_waveform_csv",
]

SAMPLES_PER_CYCLE = 32
MID_CODE = 128
LSB_PER_FULL_SCALE = 128
MAX_AMPLITUDE_CODE = 31
SHAPES = ("sine", "triangle", "square", "arbitrary")

FREQ_RANGE = (150.0, 20_000.0)
CYCLES_RANGE = (7, 2047)
BALANCE_RANGE = (16e-3, 1.28)
DEFAULT_FULL_SCALE = 1.25e-3


def shape_table(shape):
    """The built-in 32-code table for ``shape``.

    Tables are antisymmetric about mid-scale over the two half cycles, so a
    whole number of cycles delivers zero net charge.
    """
    k = np.arange(SAMPLES_PER_CYCLE)
    if shape == "sine":
        x = np.sin(2 * np.pi * k / SAMPLES_PER_CYCLE)
    elif shape == "triangle":
        phase = k / SAMPLES_PER_CYCLE
        x = np.where(phase < 0.25, 4 * phase, np.where(phase < 0.75, 2 - 4 * phase, 4 * phase - 4))
    elif shape == "square":
        x = np.where(k < SAMPLES_PER_CYCLE // 2, 1.0, -1.0)
    else:
        raise ValidationError("shape", f"no built-in table for {shape!r}")
    # round half away from zero keeps +x and -x symmetric about 128
    codes = MID_CODE + np.sign(x) * np.floor(np.abs(127 * x) + 0.5)
    return tuple(int(c) for c in codes)


def _check_int(name, value, lo, hi):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(name, f"must be an integer, got {value!r}")
    if not lo <= value <= hi:
        raise ValidationError(name, f"must be in [{lo}, {hi}], got {value}")


def _check_float(name, value, lo, hi):
    if not isinstance(value, (int, float, np.floating)) or isinstance(value, bool):
        raise ValidationError(name, f"must be a number, got {value!r}")
    if not (math.isfinite(value) and lo <= value <= hi):
        raise ValidationError(name, f"must be in [{lo}, {hi}], got {value}")


@dataclass(frozen=True)
class StimProgram:
    """Complete description of one stimulation burst plus its balance window.

    ``sample_table`` may be omitted for the built-in shapes.
    """

    shape: str = "sine"
    stim_frequency: float = 150.0
    cycles: int = 7
    amplitude_code: int = 31
    balance_duration: float = 16e-3
    full_scale_current: float = DEFAULT_FULL_SCALE
    sample_table: tuple = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError("shape", f"must be one of {SHAPES}, got {self.shape!r}")
        if self.sample_table is None:
            if self.shape == "arbitrary":
                raise ValidationError("sample_table", "required for arbitrary shape")
            object.__setattr__(self, "sample_table", shape_table(self.shape))
        table = tuple(self.sample_table)
        if len(table) != SAMPLES_PER_CYCLE:
            raise ValidationError("sample_table", f"needs exactly 32 codes, got {len(table)}")
        for code in table:
            _check_int("sample_table", code, 0, 255)
        object.__setattr__(self, "sample_table", tuple(int(c) for c in table))
        _check_float("stim_frequency", self.stim_frequency, *FREQ_RANGE)
        _check_int("cycles", self.cycles, *CYCLES_RANGE)
        _check_int("amplitude_code", self.amplitude_code, 0, MAX_AMPLITUDE_CODE)
        _check_float("balance_duration", self.balance_duration, *BALANCE_RANGE)
        _check_float("full_scale_current", self.full_scale_current, 0.0, math.inf)
        if self.full_scale_current <= 0:
            raise ValidationError("full_scale_current", "must be positive")

    @property
    def sample_rate(self):
        return SAMPLES_PER_CYCLE * self.stim_frequency

    @property
    def n_samples(self):
        return SAMPLES_PER_CYCLE * self.cycles


@dataclass(frozen=True)
class DacModel:
    """8-bit current DAC with an optional per-code level error (in LSB)."""

    inl_injection: tuple = field(default_factory=lambda: (0.0,) * 256)
    resolution: int = 8

    def __post_init__(self):
        if self.resolution != 8:
            raise ValidationError("resolution", "only 8-bit DACs are modeled")
        errs = tuple(float(e) for e in self.inl_injection)
        if len(errs) != 256:
            raise ValidationError("inl_injection", f"needs 256 entries, got {len(errs)}")
        if not all(math.isfinite(e) for e in errs):
            raise ValidationError("inl_injection", "entries must be finite")
        object.__setattr__(self, "inl_injection", errs)

    @classmethod
    def ideal(cls):
        return cls()

    @classmethod
    def from_dnl(cls, dnl):
        """DAC whose step ``k -> k+1`` is ``1 + dnl[k]`` LSB wide."""
        dnl = np.asarray(dnl, dtype=float)
        if dnl.shape != (255,):
            raise ValidationError("dnl", f"needs 255 entries, got {dnl.shape}")
        levels = np.concatenate([[0.0], np.cumsum(1.0 + dnl)])
        return cls(tuple(levels - np.arange(256)))

    def levels(self):
        """Output level of every code, in LSB."""
        return np.arange(256) + np.asarray(self.inl_injection)

    def transfer(self, codes):
        """Signed output in units of full scale for the given codes."""
        lv = self.levels()[np.asarray(codes, dtype=int)]
        return (lv - MID_CODE) / LSB_PER_FULL_SCALE


@dataclass(frozen=True)
class BiphasicPulse:
    """Cathodic-first rectangular biphasic pulse."""

    amp_neg: float
    amp_pos: float
    dur_neg: float
    dur_pos: float
    interphase_gap: float = 0.0
    balance_duration: float = 16e-3

    def __post_init__(self):
        for name in ("amp_neg", "amp_pos", "dur_neg", "dur_pos", "interphase_gap", "balance_duration"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError(name, f"must be non-negative, got {v!r}")


def biphasic_samples(pulse, dt):
    """Sample ``pulse`` on a uniform grid (negative phase first)."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    n_neg = int(round(pulse.dur_neg / dt))
    n_gap = int(round(pulse.interphase_gap / dt))
    n_pos = int(round(pulse.dur_pos / dt))
    return np.concatenate(
        [np.full(n_neg, -pulse.amp_neg), np.zeros(n_gap), np.full(n_pos, pulse.amp_pos)]
    )


def synthesize(program, dac=None):
    """Render ``program`` through ``dac``.

    Returns ``(time, current)`` arrays with ``32 * cycles`` samples at
    ``32 * stim_frequency``; sample ``k`` is held on ``[t_k, t_k + dt)``.
    """
    dac = dac or DacModel()
    dt = 1.0 / program.sample_rate
    codes = np.tile(np.asarray(program.sample_table), program.cycles)
    gain = program.full_scale_current * program.amplitude_code / MAX_AMPLITUDE_CODE
    current = gain * dac.transfer(codes)
    if program.amplitude_code == 0:
        current = np.zeros_like(current)
    time = np.arange(codes.size) * dt
    return time, current


def net_charge(samples, dt):
    """Charge delivered by a sampled burst (coulombs).

    The burst is taken to start and end at zero current, so the trapezoidal
    integral runs over the samples padded with one zero on each side.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt!r}")
    i = np.asarray(samples, dtype=float)
    padded = np.concatenate([[0.0], i, [0.0]])
    return float(np.trapezoid(padded, dx=dt))


def simulate_balance(load, residual_capacitor_voltage, short_resistance=0.0, duration=16e-3):
    """Capacitor voltage left after shorting the electrodes for ``duration``."""
    if duration < 0:
        raise DomainError("duration must be non-negative")
    if duration == 0:
        return residual_capacitor_voltage
    tau = discharge_time_constant(load, short_resistance)
    return residual_capacitor_voltage * math.exp(-duration / tau)


def inl_dnl(dac):
    """Endpoint-fit INL per code and DNL per step, both in LSB."""
    lv = dac.levels()
    gain = (lv[-1] - lv[0]) / 255.0
    if gain <= 0:
        raise DomainError("DAC endpoints are not increasing")
    ideal = lv[0] + gain * np.arange(256)
    inl = (lv - ideal) / gain
    dnl = np.diff(lv) / gain - 1.0
    return inl, dnl


def is_monotonic(dac):
    """True when every step is strictly positive (all DNL > -1 LSB)."""
    _, dnl = inl_dnl(dac)
    return bool(np.all(dnl > -1.0))


def program_to_dict(program):
    return {
        "shape": program.shape,
        "stim_frequency": program.stim_frequency,
        "cycles": program.cycles,
        "amplitude_code": program.amplitude_code,
        "balance_duration": program.balance_duration,
        "full_scale_current": program.full_scale_current,
        "sample_table": list(program.sample_table),
    }


def program_from_dict(d):
    if not isinstance(d, dict):
        raise ValidationError("program", "must be a JSON object")
    known = set(StimProgram.__dataclass_fields__)
    unknown = set(d) - known
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown program field")
    kwargs = dict(d)
    if kwargs.get("sample_table") is not None:
        if not isinstance(kwargs["sample_table"], (list, tuple)):
            raise ValidationError("sample_table", "must be a list of codes")
        kwargs["sample_table"] = tuple(kwargs["sample_table"])
    return StimProgram(**kwargs)


def program_to_json(program):
    return json.dumps(program_to_dict(program), indent=2, sort_keys=True) + "\n"


def program_from_json(text):
    return program_from_dict(json.loads(text))


def write_waveform_csv(path_or_file, time, current):
    """Write ``time_s,current_a`` rows."""
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "current_a"])
        for t, i in zip(time, current):
            w.writerow([repr(float(t)), repr(float(i))])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
