"""Data-aided EVM, bit error ratio and constellation export."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ParameterError
from .modem import Constellation, SymbolStream


@dataclass(frozen=True)
class EvmReport:
    evm_percent: float
    ber: float
    gain_correction: complex
    symbols_used: int
    trimmed_head: int
    trimmed_tail: int

    def to_dict(self) -> dict:
        return {
            "evm_percent": self.evm_percent,
            "ber": self.ber,
            "symbols_used": self.symbols_used,
            "gain_correction_re": self.gain_correction.real,
            "gain_correction_im": self.gain_correction.imag,
            "trimmed_head": self.trimmed_head,
            "trimmed_tail": self.trimmed_tail,
        }


def edge_trim(n_taps: int, samples_per_symbol: int, shaping_span: int) -> int:
    """Symbols to drop at each end: equalizer plus shaping transients."""
    return math.ceil(n_taps / (2 * samples_per_symbol)) + int(shaping_span)


def _as_array(s) -> np.ndarray:
    return np.asarray(s.symbols if isinstance(s, SymbolStream) else s, dtype=np.complex128)


def _trimmed(r, s, head: int, tail: int):
    r, s = _as_array(r), _as_array(s)
    if len(r) != len(s):
        raise ParameterError(f"length mismatch: {len(r)} received vs {len(s)} reference")
    if head < 0 or tail < 0:
        raise ParameterError("trim counts must be non-negative")
    stop = len(r) - tail
    if stop - head <= 0:
        raise ParameterError("no symbols left after edge trimming")
    return r[head:stop], s[head:stop]


def ls_gain(received: np.ndarray, reference: np.ndarray) -> complex:
    """Complex scalar ``g`` minimising ``sum |g r - s|^2``."""
    den = np.vdot(received, received).real
    if den == 0:
        return 1.0 + 0j
    return complex(np.vdot(received, reference) / den)


def evm(received, reference, *, trim_head: int = 0, trim_tail: int = 0,
        gain_correction: bool = True) -> EvmReport:
    """RMS EVM in percent against the known transmitted symbols.

    Normalised by the reference RMS. With ``gain_correction`` the received
    symbols are first scaled by the least-squares complex gain.
    """
    r, s = _trimmed(received, reference, trim_head, trim_tail)
    ref_energy = np.vdot(s, s).real
    if ref_energy == 0:
        raise ParameterError("reference has zero energy")
    g = ls_gain(r, s) if gain_correction else 1.0 + 0j
    err = g * r - s
    value = 100.0 * math.sqrt(np.vdot(err, err).real / ref_energy)
    return EvmReport(value, math.nan, g, len(s), trim_head, trim_tail)


def ber(decided, reference, constellation: Constellation, *, trim_head: int = 0,
        trim_tail: int = 0) -> float:
    """Bit error ratio using the constellation's bit labels."""
    d, s = _trimmed(decided, reference, trim_head, trim_tail)
    ld = constellation.labels[constellation.nearest(d)]
    ls = constellation.labels[constellation.nearest(s)]
    popcount = np.array([bin(i).count("1") for i in range(1 << constellation.bits_per_symbol)])
    errors = int(popcount[np.bitwise_xor(ld, ls)].sum())
    return errors / (len(s) * constellation.bits_per_symbol)


def export_constellation(received, path, gain: complex = 1.0 + 0j) -> Path:
    """Write gain-corrected soft symbols as ``re,im`` CSV rows."""
    r = _as_array(received) * gain
    if r.size == 0:
        raise ParameterError("nothing to export")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for v in r:
            w.writerow([repr(float(v.real)), repr(float(v.imag))])
    return path
