"""Gate-to-drain voltage ratio set by a feedback transmission line.

A line of length ``l`` between drain and gate, loaded by a gate reflection
``Gamma`` at harmonic ``n``, gives::

    R_v,n = (1 + Gamma) / (exp(j beta_n l) + Gamma exp(-j beta_n l))

with ``beta_n = 2 pi n f0 sqrt(eps_eff) / c``.  The denominator magnitude is
``1 + |Gamma|^2 + 2 |Gamma| cos(arg Gamma - 2 beta_n l)``, so ``|R_v,n|`` peaks
where ``2 beta_n l = arg Gamma + pi`` (mod ``2 pi``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from ..errors import DomainError, ValidationError

__all__ = [
    "VoltageRatio",
    "TLineFeedback",
    "GATE_REFLECTION_40GHZ",
    "GATE_IMPEDANCE_40GHZ",
    "DEFAULT_EFFECTIVE_PERMITTIVITY",
    "reflection_from_impedance",
    "phase_constant",
    "wavelength",
    "rv_complex",
    "rv_from_tline",
    "optimal_length",
]

# Mean gate reflection and gate impedance of the 40 GHz core device, as
# reported.  They are not mutually consistent under a 50 ohm reference
# (see reflection_from_impedance), and both are kept as given.
GATE_REFLECTION_40GHZ = complex(-0.157, -0.6567)
GATE_IMPEDANCE_40GHZ = complex(18.61, -44.7)
DEFAULT_EFFECTIVE_PERMITTIVITY = 3.44
MAX_RATIO = 3.0


@dataclass(frozen=True)
class VoltageRatio:
    """Complex ratio ``V_g,n / V_d,n`` in polar form."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise ValidationError("magnitude", f"must be finite and non-negative, got {self.magnitude!r}")
        if not math.isfinite(self.phase):
            raise ValidationError("phase", "must be finite")

    @classmethod
    def from_complex(cls, z):
        return cls(abs(z), cmath.phase(z))

    @property
    def value(self):
        return cmath.rect(self.magnitude, self.phase)

    @property
    def in_design_space(self):
        return self.magnitude <= MAX_RATIO

    def __complex__(self):
        return self.value


@dataclass(frozen=True)
class TLineFeedback:
    """Drain-to-gate feedback line.

    ``reflection`` holds the gate reflection at each harmonic, starting with
    the fundamental; a single complex number applies to every harmonic.
    """

    Z_0: float = 50.0
    effective_permittivity: float = DEFAULT_EFFECTIVE_PERMITTIVITY
    length: float = 0.0
    reflection: object = GATE_REFLECTION_40GHZ
    f0: float = 40e9

    def __post_init__(self):
        if not self.Z_0 > 0:
            raise ValidationError("Z_0", "must be positive")
        if not self.effective_permittivity >= 1:
            raise ValidationError("effective_permittivity", "must be at least 1")
        if not (math.isfinite(self.length) and self.length >= 0):
            raise ValidationError("length", "must be non-negative")
        if not self.f0 > 0:
            raise ValidationError("f0", "must be positive")
        refl = self.reflection
        refl = (complex(refl),) if np.isscalar(refl) else tuple(complex(g) for g in refl)
        if not refl:
            raise ValidationError("reflection", "need at least one harmonic")
        object.__setattr__(self, "reflection", refl)

    def reflection_at(self, n):
        if n < 1:
            raise DomainError("harmonic index starts at 1")
        return self.reflection[min(n, len(self.reflection)) - 1]

    @property
    def gamma_r(self):
        return self.reflection[0].real

    @property
    def gamma_i(self):
        return self.reflection[0].imag


def reflection_from_impedance(Z, Z_0=50.0):
    return (Z - Z_0) / (Z + Z_0)


def phase_constant(f0, effective_permittivity, n=1):
    """``beta_n`` in rad/m."""
    return 2 * math.pi * n * f0 * math.sqrt(effective_permittivity) / constants.c


def wavelength(f0, effective_permittivity, n=1):
    """Guided wavelength at the ``n``-th harmonic."""
    return constants.c / (n * f0 * math.sqrt(effective_permittivity))


def _check_reflection(g):
    if abs(g) > 1 + 1e-12:
        raise DomainError(f"|reflection| = {abs(g):.6g} exceeds 1")


def rv_complex(reflection, beta, length):
    """Vectorised ratio for arrays of line lengths."""
    x = beta * np.asarray(length, dtype=float)
    return (1 + reflection) / (np.exp(1j * x) + reflection * np.exp(-1j * x))


def rv_from_tline(t, n=1, length=None):
    """Voltage ratio at harmonic ``n`` for line ``t`` (or an alternative length)."""
    g = t.reflection_at(n)
    _check_reflection(g)
    l = t.length if length is None else length
    if g == -1:
        return VoltageRatio(0.0, 0.0)
    beta = phase_constant(t.f0, t.effective_permittivity, n)
    z = complex(rv_complex(g, beta, l))
    return VoltageRatio.from_complex(z)


def optimal_length(t, n=1):
    """Shortest line length in ``[0, lambda_n / 2)`` maximising ``|R_v,n|``.

    The branch follows from ``arg Gamma`` directly, so a purely imaginary
    reflection (where a half-angle arctangent would divide by zero) needs no
    special case and lands on ``lambda/8`` or ``3 lambda/8``.
    A matched gate (``Gamma = 0``) makes every length equivalent; 0 is
    returned.
    """
    g = t.reflection_at(n)
    _check_reflection(g)
    if g == 0:
        return 0.0
    lam = wavelength(t.f0, t.effective_permittivity, n)
    turn = (cmath.phase(g) + math.pi) % (2 * math.pi)
    l = lam * turn / (4 * math.pi)
    # guard the half-open interval against round-off at the top end
    return 0.0 if l >= lam / 2 else l
