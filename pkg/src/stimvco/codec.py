"""Parameter upload link: memory image, framing and differential BPSK.

Memory image (38 bytes)
-----------------------
SRAM, 32 bytes
    The waveform sample table, one DAC code per byte.
ROM, 6 bytes
    One big-endian 48-bit word, layout version 1:

    =======  ======  ==============================================
    bits     width   field
    =======  ======  ==============================================
    47..44   4       layout version (1)
    43..42   2       shape (0 sine, 1 triangle, 2 square, 3 arbitrary)
    41..31   11      cycles (7..2047)
    30..26   5       amplitude code (0..31)
    25..11   15      stimulation frequency, whole hertz (150..20000)
    10..0    11      balance duration in ms minus 16 (0..1264)
    =======  ======  ==============================================

Frame stream (480 bits)
-----------------------
A 12-bit start word, 38 data frames of 12 bits and a 12-bit end word.  A
data frame is ``1 0 d7..d0 p p`` where ``p`` is the even parity of the data
byte, sent twice.  The sync words are chosen so that neither is a legal
data frame.

Baseband
--------
Differential BPSK: a reference symbol is sent first, then every ``1`` bit
flips the carrier phase by 180 degrees at the symbol boundary and every
``0`` keeps it.  The demodulator correlates each symbol with the previous
one, which is insensitive to gain and to any constant carrier phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CodecError, FrameError, LengthError, ValidationError
from .stim import SHAPES, StimProgram, DEFAULT_FULL_SCALE

__all__ = [
    "SRAM_BYTES",
    "ROM_BYTES",
    "FRAME_BITS",
    "STREAM_BITS",
    "DEFAULT_START_SYNC",
    "DEFAULT_END_SYNC",
    "LAYOUT_VERSION",
    "MemoryImage",
    "FrameConfig",
    "Deserializer",
    "BasebandSignal",
    "pack",
    "unpack",
    "serialize",
    "deserialize",
    "modulate",
    "demodulate",
    "bits_to_bytes",
    "bytes_to_bits",
    "bits_to_hex",
    "hex_to_bits",
]

SRAM_BYTES = 32
ROM_BYTES = 6
FRAME_BITS = 12
N_FRAMES = SRAM_BYTES + ROM_BYTES
STREAM_BITS = FRAME_BITS * (N_FRAMES + 2)
DEFAULT_START_SYNC = 0xACE
DEFAULT_END_SYNC = 0x35C
LAYOUT_VERSION = 1

_BALANCE_MS_MIN = 16


@dataclass(frozen=True)
class MemoryImage:
    sram: bytes
    rom: bytes

    def __post_init__(self):
        if len(self.sram) != SRAM_BYTES:
            raise ValidationError("sram", f"needs exactly {SRAM_BYTES} bytes, got {len(self.sram)}")
        if len(self.rom) != ROM_BYTES:
            raise ValidationError("rom", f"needs exactly {ROM_BYTES} bytes, got {len(self.rom)}")
        object.__setattr__(self, "sram", bytes(self.sram))
        object.__setattr__(self, "rom", bytes(self.rom))

    def to_bytes(self):
        return self.sram + self.rom

    @classmethod
    def from_bytes(cls, data):
        if len(data) != SRAM_BYTES + ROM_BYTES:
            raise LengthError(f"memory image needs {SRAM_BYTES + ROM_BYTES} bytes, got {len(data)}")
        return cls(bytes(data[:SRAM_BYTES]), bytes(data[SRAM_BYTES:]))


def _whole(name, value, scale):
    scaled = value * scale
    n = round(scaled)
    if abs(scaled - n) > 1e-6:
        raise ValidationError(name, f"{value!r} is not representable in the ROM layout")
    return int(n)


def pack(program):
    """Encode ``program`` into its 38-byte memory image."""
    freq = _whole("stim_frequency", program.stim_frequency, 1)
    balance = _whole("balance_duration", program.balance_duration, 1000) - _BALANCE_MS_MIN
    word = (
        (LAYOUT_VERSION << 44)
        | (SHAPES.index(program.shape) << 42)
        | (program.cycles << 31)
        | (program.amplitude_code << 26)
        | (freq << 11)
        | balance
    )
    return MemoryImage(bytes(program.sample_table), word.to_bytes(ROM_BYTES, "big"))


def unpack(image, full_scale_current=DEFAULT_FULL_SCALE):
    """Decode a memory image back into a ``StimProgram``.

    Full-scale current is a property of the output stage, not of the image,
    so it is supplied by the caller.
    """
    word = int.from_bytes(image.rom, "big")
    version = word >> 44
    if version != LAYOUT_VERSION:
        raise ValidationError("rom", f"unsupported layout version {version}")
    shape = SHAPES[(word >> 42) & 0x3]
    return StimProgram(
        shape=shape,
        stim_frequency=float((word >> 11) & 0x7FFF),
        cycles=(word >> 31) & 0x7FF,
        amplitude_code=(word >> 26) & 0x1F,
        balance_duration=((word & 0x7FF) + _BALANCE_MS_MIN) / 1000,
        full_scale_current=full_scale_current,
        sample_table=tuple(image.sram),
    )


def _parity(byte):
    return bin(byte).count("1") & 1


def _frame_word(byte):
    p = _parity(byte)
    return (0b10 << 10) | (byte << 2) | (p << 1) | p


def _decode_frame(word):
    """Data byte of a 12-bit frame, or ``None`` if it is not a legal frame."""
    if word >> 10 != 0b10:
        return None
    byte = (word >> 2) & 0xFF
    p1, p0 = (word >> 1) & 1, word & 1
    if p1 != p0 or p0 != _parity(byte):
        return None
    return byte


@dataclass(frozen=True)
class FrameConfig:
    start_sync: int = DEFAULT_START_SYNC
    end_sync: int = DEFAULT_END_SYNC

    def __post_init__(self):
        for name in ("start_sync", "end_sync"):
            v = getattr(self, name)
            if not 0 <= v < (1 << FRAME_BITS):
                raise ValidationError(name, "must fit in 12 bits")
            if _decode_frame(v) is not None:
                raise ValidationError(name, "collides with a legal data frame")
        if self.start_sync == self.end_sync:
            raise ValidationError("end_sync", "must differ from start_sync")


def _word_bits(word):
    return [(word >> (FRAME_BITS - 1 - k)) & 1 for k in range(FRAME_BITS)]


def serialize(image, config=None):
    """Frame ``image`` into a 480-element array of 0/1 bits."""
    config = config or FrameConfig()
    words = [config.start_sync] + [_frame_word(b) for b in image.to_bytes()] + [config.end_sync]
    return np.array([bit for w in words for bit in _word_bits(w)], dtype=np.uint8)


class _State(Enum):
    SYNC_HUNT = "sync-hunt"
    DATA = "data"
    END = "end"
    DONE = "done"


@dataclass
class Deserializer:
    """Resumable frame parser.

    Feed bits in chunks with :meth:`feed`; once the end word has been seen
    :attr:`image` holds the decoded memory image.  With ``hunt=False`` (the
    default) the start word must open the stream; with ``hunt=True`` the
    parser slides bit by bit until it finds one.
    """

    config: FrameConfig = field(default_factory=FrameConfig)
    hunt: bool = False
    state: _State = _State.SYNC_HUNT
    offset: int = 0
    _word: int = 0
    _nbits: int = 0
    _data: bytearray = field(default_factory=bytearray)
    image: MemoryImage = None

    def feed(self, bits):
        for b in bits:
            b = int(b)
            if b not in (0, 1):
                raise FrameError(self.offset, f"bit value {b} is not 0 or 1")
            if self.state is _State.DONE:
                raise LengthError(f"trailing bits after end word at offset {self.offset}")
            self._word = ((self._word << 1) | b) & 0xFFF
            self._nbits += 1
            self.offset += 1
            if self.state is _State.SYNC_HUNT:
                self._hunt_step()
            elif self._nbits == FRAME_BITS:
                self._frame_step()
        return self

    def _hunt_step(self):
        if self._nbits < FRAME_BITS:
            return
        if self._word == self.config.start_sync:
            self.state = _State.DATA
            self._nbits = 0
        elif not self.hunt:
            raise FrameError(self.offset - FRAME_BITS, "start sync not found (sync-hunt)")

    def _frame_step(self):
        start = self.offset - FRAME_BITS
        word, self._nbits = self._word, 0
        if self.state is _State.DATA:
            byte = _decode_frame(word)
            if byte is None:
                if word == self.config.end_sync:
                    raise LengthError(f"end word after {len(self._data)} data frames, expected {N_FRAMES}")
                raise FrameError(start, f"bad data frame {word:03x}")
            self._data.append(byte)
            if len(self._data) == N_FRAMES:
                self.state = _State.END
        elif self.state is _State.END:
            if word != self.config.end_sync:
                if _decode_frame(word) is not None:
                    raise LengthError(f"more than {N_FRAMES} data frames")
                raise FrameError(start, f"bad end word {word:03x}")
            self.image = MemoryImage.from_bytes(bytes(self._data))
            self.state = _State.DONE

    def finish(self):
        if self.state is not _State.DONE:
            raise LengthError(
                f"stream ended in state {self.state.value} after {self.offset} bits"
            )
        return self.image


def deserialize(bits, config=None, hunt=False):
    """Parse a complete frame stream back into a memory image."""
    return Deserializer(config or FrameConfig(), hunt=hunt).feed(bits).finish()


@dataclass(frozen=True)
class BasebandSignal:
    samples: np.ndarray
    carrier_frequency: float = 13.56e6
    samples_per_cycle: int = 8
    cycles_per_bit: int = 8

    def __post_init__(self):
        if self.samples_per_cycle < 4:
            raise ValidationError("samples_per_cycle", "needs at least 4 samples per carrier cycle")
        if self.cycles_per_bit < 1:
            raise ValidationError("cycles_per_bit", "must be at least 1")
        if not self.carrier_frequency > 0:
            raise ValidationError("carrier_frequency", "must be positive")

    @property
    def sample_rate(self):
        return self.carrier_frequency * self.samples_per_cycle

    @property
    def samples_per_symbol(self):
        return self.samples_per_cycle * self.cycles_per_bit


def modulate(
    bits, carrier_frequency=13.56e6, samples_per_cycle=8, cycles_per_bit=8, amplitude=1.0, phase=0.0
):
    """Differentially BPSK-modulate ``bits`` onto a sampled carrier.

    The output carries ``len(bits) + 1`` symbols; the first is the phase
    reference.
    """
    b = np.asarray(bits, dtype=np.int64)
    if b.ndim != 1 or np.any((b != 0) & (b != 1)):
        raise ValidationError("bits", "must be a 1-D sequence of 0/1")
    sign = np.concatenate([[1.0], np.where(np.cumsum(b) % 2 == 1, -1.0, 1.0)])
    k = np.arange(samples_per_cycle * cycles_per_bit)
    symbol = amplitude * np.cos(2 * np.pi * k / samples_per_cycle + phase)
    samples = (sign[:, None] * symbol[None, :]).ravel()
    return BasebandSignal(samples, carrier_frequency, samples_per_cycle, cycles_per_bit)


def demodulate(signal):
    """Recover bits from a differential BPSK signal (noiseless-exact)."""
    sps = signal.samples_per_symbol
    x = np.asarray(signal.samples, dtype=float)
    n_sym = x.size // sps
    if n_sym < 1:
        raise LengthError(f"signal shorter than one symbol ({x.size} < {sps} samples)")
    sym = x[: n_sym * sps].reshape(n_sym, sps)
    corr = np.einsum("ij,ij->i", sym[1:], sym[:-1])
    return (corr < 0).astype(np.uint8)


def bits_to_bytes(bits):
    b = np.asarray(bits, dtype=np.uint8)
    if b.size % 8:
        raise LengthError("bit count is not a multiple of 8")
    return np.packbits(b).tobytes()


def bytes_to_bits(data):
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_hex(bits):
    return bits_to_bytes(bits).hex()


def hex_to_bits(text):
    try:
        data = bytes.fromhex(text.strip())
    except ValueError as exc:
        raise CodecError(f"invalid hex text: {exc}") from None
    return bytes_to_bits(data)
