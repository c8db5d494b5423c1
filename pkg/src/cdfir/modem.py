"""QPSK/16QAM/32QAM mapping, pulse shaping and the matched-filter receiver."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.signal import oaconvolve

from .exceptions import ParameterError
from .validation import check_in_interval, check_stream, freeze


class ModFormat(str, Enum):
    QPSK = "qpsk"
    QAM16 = "16qam"
    QAM32 = "32qam"

    @classmethod
    def parse(cls, value) -> "ModFormat":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"qam16": "16qam", "qam32": "32qam", "4qam": "qpsk"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(
                f"unknown modulation format {value!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-average-energy point set with its bit labels.

    ``labels[i]`` is the integer bit label of ``points[i]``.
    """

    format: ModFormat
    points: np.ndarray
    labels: np.ndarray
    bits_per_symbol: int

    def __len__(self):
        return len(self.points)

    def nearest(self, x: np.ndarray) -> np.ndarray:
        """Index of the nearest constellation point for every sample."""
        x = np.asarray(x, dtype=np.complex128)
        d = np.abs(x[:, None] - self.points[None, :])
        return np.argmin(d, axis=1)


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _square_grid(levels_i: np.ndarray, levels_q: np.ndarray):
    bits_q = int(np.log2(len(levels_q)))
    pts, labels = [], []
    for a, li in enumerate(levels_i):
        for b, lq in enumerate(levels_q):
            pts.append(complex(li, lq))
            labels.append((_gray(a) << bits_q) | _gray(b))
    return np.array(pts), np.array(labels)


def _cross32():
    # Fold the two outer columns of a Gray-labelled 8x4 rectangle onto the
    # Q = +-5 rows: (+-7, q) -> (+-(4 - |q|), 5 sign(q)). Labels survive the
    # move, giving a quasi-Gray cross (a handful of neighbours differ by 2 bits).
    pts, labels = _square_grid(np.arange(-7, 8, 2), np.arange(-3, 4, 2))
    folded = []
    for p in pts:
        i, q = p.real, p.imag
        if abs(i) == 7:
            folded.append(complex(np.sign(i) * (4 - abs(q)), 5 * np.sign(q)))
        else:
            folded.append(p)
    return np.array(folded), labels


@lru_cache(maxsize=None)
def _build(fmt: ModFormat) -> Constellation:
    if fmt is ModFormat.QPSK:
        pts, labels = _square_grid(np.array([-1.0, 1.0]), np.array([-1.0, 1.0]))
        bps = 2
    elif fmt is ModFormat.QAM16:
        lv = np.array([-3.0, -1.0, 1.0, 3.0])
        pts, labels = _square_grid(lv, lv)
        bps = 4
    else:
        pts, labels = _cross32()
        bps = 5
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    return Constellation(fmt, freeze(pts), freeze(labels.astype(np.int64)), bps)


def build_constellation(fmt) -> Constellation:
    """Return the constellation for ``fmt`` ("qpsk", "16qam" or "32qam").

    32QAM is the 6x6 cross with the four corners removed.
    """
    return _build(ModFormat.parse(fmt))


@dataclass(frozen=True, eq=False)
class SymbolStream:
    symbols: np.ndarray
    seed: int | None = None
    indices: np.ndarray | None = None

    def __len__(self):
        return len(self.symbols)


def generate_symbols(constellation: Constellation, count: int, seed: int) -> SymbolStream:
    """Draw ``count`` i.i.d. uniform symbols with numpy's PCG64 generator."""
    if int(count) != count or count <= 0:
        raise ParameterError(f"symbol count must be a positive integer, got {count}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(constellation), size=int(count))
    return SymbolStream(freeze(constellation.points[idx]), seed, freeze(idx))


@dataclass(frozen=True)
class ShapeSpec:
    """Transmit pulse: ``"rrc"`` (root-raised-cosine) or ``"nrz"`` (sample-and-hold)."""

    kind: str = "rrc"
    rolloff: float = 0.1
    span: int = 80

    def __post_init__(self):
        if self.kind not in ("rrc", "nrz"):
            raise ParameterError(f"unknown pulse shape {self.kind!r}")
        if self.kind == "rrc":
            check_in_interval(self.rolloff, 0.0, 1.0, "rolloff")
            if int(self.span) != self.span or self.span < 2 or self.span % 2:
                raise ParameterError("span must be an even integer >= 2 symbols")

    @property
    def span_symbols(self) -> int:
        return int(self.span) if self.kind == "rrc" else 0


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Oversampled baseband waveform.

    ``symbol_alignment`` is the sample index of symbol 0's decision
    instant; symbol ``m`` is decided at ``symbol_alignment + m * S``.
    ``symbol_energy`` is the per-symbol energy in sample units
    (sum of ``|x|^2`` over one symbol period), used to set noise levels.
    """

    samples: np.ndarray
    samples_per_symbol: int
    symbol_alignment: int
    n_symbols: int
    shape: ShapeSpec = field(default_factory=ShapeSpec)
    symbol_energy: float = 1.0

    def __len__(self):
        return len(self.samples)

    def with_samples(self, samples: np.ndarray, *, alignment_shift: int = 0) -> "SampleStream":
        return SampleStream(
            freeze(np.asarray(samples, dtype=np.complex128)),
            self.samples_per_symbol,
            self.symbol_alignment + alignment_shift,
            self.n_symbols,
            self.shape,
            self.symbol_energy,
        )


@lru_cache(maxsize=32)
def _rrc_cached(rolloff: float, span: int, sps: int) -> np.ndarray:
    t = np.arange(-span * sps // 2, span * sps // 2 + 1) / sps
    b = rolloff
    h = np.empty_like(t)
    at_zero = np.isclose(t, 0.0, atol=1e-12)
    at_sing = np.isclose(np.abs(t), 1.0 / (4 * b), atol=1e-12)
    reg = ~(at_zero | at_sing)
    tr = t[reg]
    h[reg] = (np.sin(np.pi * tr * (1 - b)) + 4 * b * tr * np.cos(np.pi * tr * (1 + b))) / (
        np.pi * tr * (1 - (4 * b * tr) ** 2)
    )
    h[at_zero] = 1 - b + 4 * b / np.pi
    h[at_sing] = b / np.sqrt(2) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * b)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * b))
    )
    return freeze(h / np.sqrt(np.sum(h**2)))


def rrc_taps(rolloff: float, span: int, sps: int) -> np.ndarray:
    """Unit-energy root-raised-cosine taps, ``span * sps + 1`` long, symmetric."""
    check_in_interval(rolloff, 0.0, 1.0, "rolloff")
    return _rrc_cached(float(rolloff), int(span), int(sps))


def pulse_shape(symbols: SymbolStream, samples_per_symbol: int,
                shape: ShapeSpec | None = None) -> SampleStream:
    """Upsample by ``samples_per_symbol`` and apply the transmit pulse."""
    shape = shape or ShapeSpec()
    sps = int(samples_per_symbol)
    if sps < 2:
        raise ParameterError("samples_per_symbol must be >= 2")
    s = np.asarray(symbols.symbols, dtype=np.complex128)
    n = len(s)
    if shape.kind == "nrz":
        x = np.repeat(s, sps)
        return SampleStream(freeze(x), sps, 0, n, shape, float(sps))
    h = rrc_taps(shape.rolloff, shape.span, sps)
    up = np.zeros(n * sps, dtype=np.complex128)
    up[::sps] = s
    x = oaconvolve(up, h)
    return SampleStream(freeze(x), sps, shape.span * sps // 2, n, shape, 1.0)


def matched_filter(stream: SampleStream) -> np.ndarray:
    """Receive filtering at the sample rate; returns same-length samples."""
    x = stream.samples
    if stream.shape.kind == "nrz":
        return np.asarray(x)
    h = rrc_taps(stream.shape.rolloff, stream.shape.span, stream.samples_per_symbol)
    # h is symmetric and odd-length, so "same" keeps decision instants in place.
    return oaconvolve(x, h[::-1].conj(), mode="same")


def sample_symbols(stream: SampleStream) -> np.ndarray:
    """Matched filter and pick one soft value per symbol at the decision instants."""
    sps = stream.samples_per_symbol
    start = stream.symbol_alignment
    n = stream.n_symbols
    if stream.shape.kind == "nrz":
        stop = start + n * sps
        x = np.asarray(stream.samples)
        if start < 0 or stop > len(x):
            raise ParameterError("stream too short for its symbol count")
        return x[start:stop].reshape(n, sps).mean(axis=1)
    last = start + (n - 1) * sps
    if start < 0 or last >= len(stream.samples):
        raise ParameterError("stream too short for its symbol count")
    y = matched_filter(stream)
    return y[start:last + 1:sps]


def receive_decide(stream: SampleStream, constellation: Constellation):
    """Return ``(decided, soft)`` symbol streams."""
    check_stream(stream.samples, min_length=stream.samples_per_symbol, name="samples")
    soft = sample_symbols(stream)
    idx = constellation.nearest(soft)
    decided = SymbolStream(freeze(constellation.points[idx]), None, freeze(idx))
    return decided, SymbolStream(freeze(np.asarray(soft)))
