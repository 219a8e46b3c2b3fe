"""Phase-noise waveform analysis for harmonic VCOs."""

from .formulas import *  # noqa: F401,F403
from .harmonic import *  # noqa: F401,F403
from .sensitivity import *  # noqa: F401,F403
from .device import *  # noqa: F401,F403
from .tline import *  # noqa: F401,F403
