"""Noise modulation factor (NMF) of the core transistor.

The transconductance follows a three-region square law.  With
``V_ov = V_gs - V_th``::

    cutoff      V_ov <= 0           G_m = 0
    saturation  V_ds >= V_ov        G_m = k V_ov
    triode      0 < V_ds < V_ov     G_m = k V_ds

and ``alpha = G_m / max G_m`` over one period, so the scale ``k`` cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ValidationError
from . import formulas
from .sensitivity import DEFAULT_SAMPLES, HarmonicWaveform, rms, theta_grid
from .tline import VoltageRatio

__all__ = [
    "CUTOFF",
    "TRIODE",
    "SATURATION",
    "DeviceModel",
    "DriveCondition",
    "drive_waveforms",
    "nmf",
    "NmfSweep",
    "sweep_nmf",
]

CUTOFF, TRIODE, SATURATION = 0, 1, 2


@dataclass(frozen=True)
class DeviceModel:
    V_th: float = 0.4
    transconductance_scale: float = 1e-2
    K_F: float = 1e-24
    C_ox: float = 1.7e-2
    W: float = 20e-6
    L: float = 60e-9

    def __post_init__(self):
        if not self.V_th > 0:
            raise ValidationError("V_th", "must be positive")
        for name in ("transconductance_scale", "C_ox", "W", "L"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        if self.K_F < 0:
            raise ValidationError("K_F", "must be non-negative")

    def region(self, v_gs, v_ds):
        """Region code per sample: ``CUTOFF``, ``TRIODE`` or ``SATURATION``."""
        v_ov = np.asarray(v_gs, dtype=float) - self.V_th
        v_ds = np.asarray(v_ds, dtype=float)
        return np.where(v_ov <= 0, CUTOFF, np.where(v_ds >= v_ov, SATURATION, TRIODE))

    def transconductance(self, v_gs, v_ds):
        v_ov = np.asarray(v_gs, dtype=float) - self.V_th
        v_ds = np.asarray(v_ds, dtype=float)
        reg = self.region(v_gs, v_ds)
        gm = np.where(reg == SATURATION, v_ov, np.maximum(v_ds, 0.0))
        return self.transconductance_scale * np.where(reg == CUTOFF, 0.0, gm)

    def flicker_psd(self, f):
        return formulas.mos_flicker_psd(self.K_F, self.W, self.L, self.C_ox, f)


def nmf(device, v_gs, v_ds):
    """Sampled alpha for gate and drain waveforms on a common grid."""
    v_gs = np.asarray(v_gs, dtype=float)
    v_ds = np.asarray(v_ds, dtype=float)
    if v_gs.shape != v_ds.shape:
        raise DomainError(f"v_gs and v_ds grids differ: {v_gs.shape} vs {v_ds.shape}")
    gm = device.transconductance(v_gs, v_ds)
    peak = gm.max() if gm.size else 0.0
    if not peak > 0:
        raise DomainError("device never conducts over the period")
    return gm / peak


@dataclass(frozen=True)
class DriveCondition:
    """Bias and swing that turn a normalised waveform into terminal voltages.

    The defaults put the cross-coupled device at ``V_dc = 0.6`` V with a
    ``0.2`` V fundamental swing on the drain.
    """

    V_dc: float = 0.6
    swing: float = 0.2
    V_gate_dc: float = None

    def __post_init__(self):
        if not self.swing > 0:
            raise ValidationError("swing", "must be positive")
        if self.V_gate_dc is None:
            object.__setattr__(self, "V_gate_dc", self.V_dc)


def _as_complex(r):
    return r.value if isinstance(r, VoltageRatio) else complex(r)


def drive_waveforms(waveform, R_v1, R_v2, drive=None, samples=DEFAULT_SAMPLES):
    """Drain and gate voltages of one device of the cross-coupled pair.

    The drain carries ``V_dc + swing * f(theta)``.  The gate sees the other
    drain, so the fundamental arrives inverted; ``R_v1`` is the ratio on top
    of that inversion while even harmonics arrive in phase scaled by
    ``R_v2``.  Harmonics above the second are ignored at the gate.
    """
    drive = drive or DriveCondition()
    theta = theta_grid(samples)
    (a1, p1), *rest = waveform.components
    a2, p2 = rest[0] if rest else (0.0, 0.0)
    s = drive.swing / a1
    v_ds = drive.V_dc + drive.swing * waveform.evaluate(theta)
    gate = -_as_complex(R_v1) * a1 * np.exp(1j * (theta + p1))
    gate = gate + _as_complex(R_v2) * a2 * np.exp(1j * (2 * theta + p2))
    v_gs = drive.V_gate_dc + s * gate.real
    return v_gs, v_ds


@dataclass
class NmfSweep:
    """alpha_rms over an ``R_v,1`` magnitude (rows) by phase (columns) grid."""

    magnitude: np.ndarray
    phase: np.ndarray
    alpha_rms: np.ndarray

    def argmin(self):
        if np.all(np.isnan(self.alpha_rms)):
            raise DomainError("device never conducts anywhere on the grid")
        i, j = np.unravel_index(np.nanargmin(self.alpha_rms), self.alpha_rms.shape)
        return float(self.magnitude[i]), float(self.phase[j]), float(self.alpha_rms[i, j])


def _nmf_row(mag, phases, device, waveform, R_v2, drive, samples):
    out = np.full(len(phases), np.nan)
    for j, p in enumerate(phases):
        v_gs, v_ds = drive_waveforms(waveform, VoltageRatio(mag, p), R_v2, drive, samples)
        try:
            out[j] = rms(nmf(device, v_gs, v_ds))
        except DomainError:
            pass
    return out


def sweep_nmf(magnitudes, phases, device=None, waveform=None, R_v2=1.0, drive=None,
              samples=DEFAULT_SAMPLES, executor=None):
    """alpha_rms for every ``R_v,1 = (magnitude, phase)`` on the grid.

    The waveform defaults to ``A_2 = 0.7, phi_2 = pi``.  Grid points where
    the device never conducts are NaN.
    """
    magnitudes = np.asarray(magnitudes, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if magnitudes.size == 0 or phases.size == 0:
        raise DomainError("empty sweep grid")
    device = device or DeviceModel()
    waveform = waveform or HarmonicWaveform.two_tone(0.7, math.pi)
    mapper = executor.map if executor is not None else map
    rows = list(mapper(lambda m: _nmf_row(m, phases, device, waveform, R_v2, drive, samples), magnitudes))
    return NmfSweep(magnitudes, phases, np.vstack(rows))
