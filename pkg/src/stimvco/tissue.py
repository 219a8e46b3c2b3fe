"""Electrode-tissue load models.

Two lumped models are provided:

``SeriesRCLoad``
    Spreading resistance in series with the double-layer capacitance.
``RandlesLoad``
    Spreading resistance ``R_s`` in series with the interface capacitance
    ``C`` shunted by a Faradaic resistance ``R_w``.  Charge-transfer and
    Warburg diffusion are lumped into the single fixed resistor ``R_w``.

Both expose a single capacitor state, so transient simulation is a
first-order explicit update of the capacitor voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DomainError, ValidationError

__all__ = [
    "SeriesRCLoad",
    "RandlesLoad",
    "LoadState",
    "impedance",
    "simulate_load",
    "step_voltage_response",
    "series_resistance",
    "discharge_time_constant",
    "load_from_dict",
    "load_to_dict",
]


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(name, f"must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class SeriesRCLoad:
    resistance: float
    capacitance: float

    kind = "series_rc"

    def __post_init__(self):
        _positive("resistance", self.resistance)
        _positive("capacitance", self.capacitance)


@dataclass(frozen=True)
class RandlesLoad:
    spreading_resistance: float
    faradaic_resistance: float
    interface_capacitance: float

    kind = "randles"

    def __post_init__(self):
        _positive("spreading_resistance", self.spreading_resistance)
        _positive("faradaic_resistance", self.faradaic_resistance)
        _positive("interface_capacitance", self.interface_capacitance)


TissueLoad = SeriesRCLoad | RandlesLoad


@dataclass(frozen=True)
class LoadState:
    """Capacitor voltage of a load at a point in time."""

    capacitor_voltage: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.capacitor_voltage) and math.isfinite(self.time)):
            raise ValidationError("LoadState", "values must be finite")


def impedance(load, f):
    """Complex impedance of ``load`` at frequency ``f`` (Hz).

    ``f`` may be a scalar or an array; the result has the same shape.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(~np.isfinite(f_arr)) or np.any(f_arr <= 0):
        raise DomainError("frequency must be positive and finite")
    w = 2 * np.pi * f_arr
    if isinstance(load, SeriesRCLoad):
        z = load.resistance + 1.0 / (1j * w * load.capacitance)
    elif isinstance(load, RandlesLoad):
        rw = load.faradaic_resistance
        z = load.spreading_resistance + rw / (1 + 1j * w * rw * load.interface_capacitance)
    else:
        raise TypeError(f"unsupported load type {type(load).__name__}")
    return z if np.ndim(f) else complex(z)


def series_resistance(load):
    """Resistance in series with the capacitor branch."""
    if isinstance(load, SeriesRCLoad):
        return load.resistance
    return load.spreading_resistance


def _capacitance(load):
    if isinstance(load, SeriesRCLoad):
        return load.capacitance
    return load.interface_capacitance


def simulate_load(load, current, dt, state=None):
    """Drive ``load`` with sampled ``current`` and return terminal voltages.

    Each sample is held for ``dt``.  The capacitor charge is updated first,
    then the terminal voltage is read as ``R_series * i + v_c``, so a
    constant current ``I`` applied for ``N`` samples ends at
    ``R*I + I*N*dt/C``.

    Returns ``(voltages, final_state)``.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt!r}")
    i = np.asarray(current, dtype=float)
    if i.ndim != 1:
        raise DomainError("current must be a one-dimensional sequence")
    if not np.all(np.isfinite(i)):
        raise DomainError("current samples must be finite")
    state = state or LoadState()

    c = _capacitance(load)
    r = series_resistance(load)
    vc = np.empty_like(i)
    if isinstance(load, SeriesRCLoad):
        # pure integrator: cumulative sum is the exact explicit update
        vc[:] = state.capacitor_voltage + np.cumsum(i) * dt / c
    else:
        rw = load.faradaic_resistance
        v = state.capacitor_voltage
        for k, ik in enumerate(i):
            v += dt * (ik - v / rw) / c
            vc[k] = v
    volts = r * i + vc
    final_v = float(vc[-1]) if len(vc) else state.capacitor_voltage
    return volts, LoadState(final_v, state.time + len(i) * dt)


def step_voltage_response(load, current_samples, dt):
    """Terminal voltage of ``load`` for a sampled current drive."""
    volts, _ = simulate_load(load, current_samples, dt)
    return volts


def discharge_time_constant(load, short_resistance=0.0):
    """Time constant of the capacitor when the electrodes are shorted.

    For the Randles model the Faradaic resistor discharges the capacitor in
    parallel with the external path.
    """
    if short_resistance < 0:
        raise DomainError("short_resistance must be non-negative")
    external = series_resistance(load) + short_resistance
    if isinstance(load, RandlesLoad):
        rw = load.faradaic_resistance
        external = external * rw / (external + rw)
    return external * _capacitance(load)


def load_from_dict(d):
    """Build a load from ``{"kind": "series_rc" | "randles", ...}`` (SI units)."""
    if not isinstance(d, dict):
        raise ValidationError("load", "must be a JSON object")
    params = dict(d)
    kind = params.pop("kind", None)
    try:
        if kind == "series_rc":
            return SeriesRCLoad(float(params["resistance"]), float(params["capacitance"]))
        if kind == "randles":
            return RandlesLoad(
                float(params["spreading_resistance"]),
                float(params["faradaic_resistance"]),
                float(params["interface_capacitance"]),
            )
    except KeyError as exc:
        raise ValidationError(str(exc.args[0]), "missing load parameter") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("load", str(exc)) from None
    raise ValidationError("kind", f"unknown load kind {kind!r}")


def load_to_dict(load):
    d = {"kind": load.kind}
    d.update(asdict(load))
    return d
