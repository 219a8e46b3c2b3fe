"""Second-harmonic drain current and power of the core device.

The phasor current at ``2 f0`` combines the linear response to the
second-harmonic voltages with second-order translation of the fundamental::

    I = (G21_a R_v2 + G22_t) V2 + M12 (R_v1 V1)^2 + N12 V1^2

Power is the real part of complex phasor products.  ``|V|^2`` stands for
``V conj(V)`` and a mixed ``V1^2 V2`` term is read as ``V1^2 conj(V2)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from ..errors import ValidationError

__all__ = ["HarmonicPowerCoefficients", "harmonic_current", "harmonic_power"]


@dataclass(frozen=True)
class HarmonicPowerCoefficients:
    """Small-signal (``G21_a``, ``G22_t``, S) and translation (``M_12``, ``N_12``, A/V^2) terms."""

    G21_a: complex = 0.0
    G22_t: complex = 0.0
    M_12: complex = 0.0
    N_12: complex = 0.0

    def __post_init__(self):
        for name in ("G21_a", "G22_t", "M_12", "N_12"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValidationError(name, "must be finite")
            object.__setattr__(self, name, v)


def harmonic_current(c, V1, V2, R_v1, R_v2):
    """Complex drain current at ``2 f0`` (amperes)."""
    R_v1, R_v2 = complex(R_v1), complex(R_v2)
    V_gs1 = R_v1 * V1
    return (c.G21_a * R_v2 + c.G22_t) * V2 + c.M_12 * V_gs1**2 + c.N_12 * V1**2


def harmonic_power(c, V1, V2, R_v1, R_v2, form="printed"):
    """Real power at ``2 f0`` (watts).

    ``form="printed"`` uses the compact closed form
    ``Re(G21_a + R_v2 G22_t) |V2|^2 + Re[(M12 R_v1 + N12) V1^2 conj(V2)]``.
    ``form="current"`` is ``Re(I conj(V2))`` with ``I`` from
    :func:`harmonic_current`.  The two agree when ``R_v2 = 1`` and
    ``R_v1 = 1``; elsewhere they weight the ratios differently.
    """
    R_v1, R_v2 = complex(R_v1), complex(R_v2)
    V1, V2 = complex(V1), complex(V2)
    if form == "current":
        return (harmonic_current(c, V1, V2, R_v1, R_v2) * V2.conjugate()).real
    if form != "printed":
        raise ValueError(f"unknown form {form!r}")
    linear = ((c.G21_a + R_v2 * c.G22_t) * abs(V2) ** 2).real
    mixed = ((c.M_12 * R_v1 + c.N_12) * V1**2 * V2.conjugate()).real
    return float(linear + mixed)
