"""Impulse sensitivity function (ISF) of a harmonic drain waveform.

The drain-source waveform is ``f(theta) = sum_n A_n cos(n theta + phi_n)``,
normalised by the fundamental amplitude ``A_1``.  Its ISF is estimated from
the phase-plane trajectory ``(f, f')``::

    Gamma(theta) = f'(theta) / (f'(theta)^2 + f(theta)^2)

which is exactly ``-sin(theta)`` for a pure cosine.  The estimate is odd in
``theta`` whenever ``f`` is even, so its dc term vanishes for ``phi_n`` in
``{0, pi}``.

Fourier conventions: a sampled periodic ``x`` is expanded as
``x = c_0 + sum_n (c_n cos n theta + s_n sin n theta)``; magnitudes are
``sqrt(c_n^2 + s_n^2)`` and phases ``psi_n`` satisfy
``x = c_0 + sum_n |x_n| cos(n theta + psi_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, ValidationError

__all__ = [
    "MIN_SAMPLES",
    "HarmonicWaveform",
    "FourierSeries",
    "IsfProfile",
    "theta_grid",
    "fourier",
    "rms",
    "isf",
    "isf_profile",
    "gamma_eff",
    "IsfSweep",
    "sweep_isf",
]

MIN_SAMPLES = 256
DEFAULT_SAMPLES = 1024
DEFAULT_HARMONICS = 8
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class HarmonicWaveform:
    """``components[k] = (A_{k+1}, phi_{k+1})``; index 0 is the fundamental."""

    components: tuple = ((1.0, 0.0), (0.0, 0.0))
    f0: float = 40e9

    def __post_init__(self):
        comps = tuple((float(a), float(p)) for a, p in self.components)
        if len(comps) < 1:
            raise ValidationError("components", "need at least the fundamental")
        if not comps[0][0] > 0:
            raise ValidationError("components", "fundamental amplitude A_1 must be positive")
        if any(a < 0 or not math.isfinite(a) or not math.isfinite(p) for a, p in comps):
            raise ValidationError("components", "amplitudes must be finite and non-negative")
        object.__setattr__(self, "components", comps)

    @classmethod
    def two_tone(cls, A2, phi2, A1=1.0, phi1=0.0, f0=40e9):
        return cls(((A1, phi1), (A2, phi2)), f0)

    def evaluate(self, theta, derivative=0, normalized=True):
        """Waveform (or its ``derivative``-th theta derivative) at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for n, (a, p) in enumerate(self.components, start=1):
            arg = n * theta + p
            if derivative == 0:
                out += a * np.cos(arg)
            elif derivative == 1:
                out -= n * a * np.sin(arg)
            elif derivative == 2:
                out -= n * n * a * np.cos(arg)
            else:
                raise ValueError("only derivatives up to 2 are provided")
        if normalized:
            out /= self.components[0][0]
        return out


def theta_grid(samples=DEFAULT_SAMPLES):
    return 2 * np.pi * np.arange(samples) / samples


@dataclass(frozen=True)
class FourierSeries:
    """Fourier coefficients of a sampled periodic function.

    ``cos[0]`` is the dc value and ``sin[0]`` is zero.  ``nyquist`` marks a
    full spectrum from an even sample count, whose last cosine entry is the
    Nyquist amplitude and carries no factor of two.
    """

    cos: np.ndarray
    sin: np.ndarray
    nyquist: bool = False

    @property
    def dc(self):
        return float(self.cos[0])

    @property
    def magnitude(self):
        m = np.hypot(self.cos, self.sin)
        m[0] = abs(self.cos[0])
        return m

    @property
    def phase(self):
        return np.arctan2(-self.sin, self.cos)

    def truncated(self, n_harmonics):
        k = n_harmonics + 1
        return FourierSeries(self.cos[:k].copy(), self.sin[:k].copy())

    def parseval_rms(self):
        """rms from the coefficients alone (the sum of squared coefficients)."""
        c, s = self.cos, self.sin
        if self.nyquist:
            power = c[0] ** 2 + 0.5 * np.sum(c[1:-1] ** 2 + s[1:-1] ** 2) + c[-1] ** 2
        else:
            power = c[0] ** 2 + 0.5 * np.sum(c[1:] ** 2 + s[1:] ** 2)
        return math.sqrt(power)


def fourier(x, n_harmonics=None):
    """Coefficients of ``x`` sampled uniformly over one period.

    Uniform-grid projection, which is the trapezoidal rule for periodic
    integrands.  With ``n_harmonics=None`` the full discrete spectrum is
    kept, so :meth:`FourierSeries.parseval_rms` reproduces the sample rms.
    """
    x = np.asarray(x, dtype=float)
    N = x.size
    X = np.fft.rfft(x) / N
    c = 2 * X.real
    s = -2 * X.imag
    c[0] = X[0].real
    s[0] = 0.0
    nyquist = N % 2 == 0
    if nyquist:
        c[-1] = X[-1].real
        s[-1] = 0.0
    fs = FourierSeries(c, s, nyquist)
    return fs if n_harmonics is None else fs.truncated(n_harmonics)


def rms(x):
    """Time-domain rms of uniformly sampled ``x``."""
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x)))


def isf(waveform, samples=DEFAULT_SAMPLES):
    """Sampled ISF of ``waveform`` on :func:`theta_grid` (``samples`` points)."""
    if samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    theta = theta_grid(samples)
    f = waveform.evaluate(theta)
    fp = waveform.evaluate(theta, derivative=1)
    denom = fp * fp + f * f
    if not np.any(denom > 0):
        raise DomainError("degenerate all-zero waveform")
    # exact zeros rarely survive rounding, so flag anything at round-off level
    if np.any(denom <= SINGULAR_RTOL * denom.max()):
        k = int(np.argmin(denom))
        raise DomainError(f"waveform and its slope vanish together at theta={theta[k]:.6g}")
    return fp / denom


@dataclass
class IsfProfile:
    """Sampled Gamma, alpha and Gamma*alpha over one period with their spectra.

    ``phase_sum[m, n]`` and ``phase_diff[m, n]`` are the intermediate
    phases ``psi_alpha_m + psi_gamma_n`` and ``psi_alpha_m - psi_gamma_n``
    of the product expansion.
    """

    theta: np.ndarray
    gamma: np.ndarray
    nmf: np.ndarray
    gamma_eff: np.ndarray
    fourier_gamma: FourierSeries
    fourier_nmf: FourierSeries
    fourier_gamma_eff: FourierSeries
    n_harmonics: int
    phase_sum: np.ndarray = field(repr=False)
    phase_diff: np.ndarray = field(repr=False)

    @property
    def gamma_dc(self):
        return self.fourier_gamma.dc

    @property
    def gamma_rms(self):
        return rms(self.gamma)

    @property
    def nmf_rms(self):
        return rms(self.nmf)

    @property
    def gamma_eff_dc(self):
        return self.fourier_gamma_eff.dc

    @property
    def gamma_eff_rms(self):
        return rms(self.gamma_eff)

    def coefficients(self, which="gamma"):
        """Leading ``n_harmonics`` magnitudes (gamma_n, zeta_m or of the product)."""
        fs = {"gamma": self.fourier_gamma, "nmf": self.fourier_nmf, "gamma_eff": self.fourier_gamma_eff}[which]
        return fs.magnitude[: self.n_harmonics + 1]


def isf_profile(gamma, nmf=None, n_harmonics=DEFAULT_HARMONICS):
    """Bundle a sampled ISF and NMF into an :class:`IsfProfile`.

    ``nmf=None`` means a noise source that is never modulated (alpha = 1).
    """
    gamma = np.asarray(gamma, dtype=float)
    nmf = np.ones_like(gamma) if nmf is None else np.asarray(nmf, dtype=float)
    if gamma.shape != nmf.shape or gamma.ndim != 1:
        raise DomainError(f"gamma and alpha grids differ: {gamma.shape} vs {nmf.shape}")
    if gamma.size < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples")
    ge = gamma * nmf
    fg, fa = fourier(gamma), fourier(nmf)
    pg = fg.phase[: n_harmonics + 1]
    pa = fa.phase[: n_harmonics + 1]
    return IsfProfile(
        theta=theta_grid(gamma.size),
        gamma=gamma,
        nmf=nmf,
        gamma_eff=ge,
        fourier_gamma=fg,
        fourier_nmf=fa,
        fourier_gamma_eff=fourier(ge),
        n_harmonics=n_harmonics,
        phase_sum=pa[:, None] + pg[None, :],
        phase_diff=pa[:, None] - pg[None, :],
    )


def gamma_eff(profile):
    """``(Gamma_eff samples, dc, rms)``.

    The rms is taken from the spectrum and cross-checked against the time
    average; a disagreement means the profile is corrupt.
    """
    ge = profile.gamma * profile.nmf
    spec = fourier(ge)
    r_spec = spec.parseval_rms()
    r_time = rms(ge)
    if not math.isclose(r_spec, r_time, rel_tol=1e-6, abs_tol=1e-12):
        raise DomainError(f"Parseval check failed: {r_spec} vs {r_time}")
    return ge, spec.dc, r_spec


@dataclass
class IsfSweep:
    """Maps over an ``(A_2, phi_2)`` grid; rows follow ``A2``, columns ``phi2``.

    Points where the waveform and its slope vanish together are NaN.
    """

    A2: np.ndarray
    phi2: np.ndarray
    gamma_0: np.ndarray
    gamma_1: np.ndarray
    gamma_2: np.ndarray
    gamma_rms: np.ndarray

    def argmin(self, name="gamma_rms"):
        """``(A2, phi2, value)`` of the smallest finite entry of a map."""
        m = getattr(self, name)
        if name == "gamma_0":
            m = np.abs(m)
        if np.all(np.isnan(m)):
            raise DomainError("no finite points in sweep")
        i, j = np.unravel_index(np.nanargmin(m), m.shape)
        return float(self.A2[i]), float(self.phi2[j]), float(m[i, j])

    @property
    def singular(self):
        return np.isnan(self.gamma_rms)


def _sweep_row(a2, phi2, samples):
    row = np.full((4, len(phi2)), np.nan)
    for j, p in enumerate(phi2):
        try:
            g = isf(HarmonicWaveform.two_tone(a2, p), samples)
        except DomainError:
            continue
        fs = fourier(g, 2)
        row[0, j] = fs.dc
        row[1, j] = fs.magnitude[1]
        row[2, j] = fs.magnitude[2]
        row[3, j] = rms(g)
    return row


def sweep_isf(A2, phi2, samples=DEFAULT_SAMPLES, executor=None):
    """Evaluate gamma_0, |gamma_1|, |gamma_2| and Gamma_rms on a grid.

    ``A_1 = 1`` and ``phi_1 = 0``.  ``executor`` (anything with an
    order-preserving ``map``) parallelises over rows.
    """
    A2 = np.asarray(A2, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    if A2.size == 0 or phi2.size == 0:
        raise DomainError("empty sweep grid")
    mapper = executor.map if executor is not None else map
    rows = list(mapper(lambda a: _sweep_row(a, phi2, samples), A2))
    stack = np.stack(rows, axis=1)
    return IsfSweep(A2, phi2, stack[0], stack[1], stack[2], stack[3])
