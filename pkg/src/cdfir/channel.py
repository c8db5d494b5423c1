"""Linear fiber channel: all-pass chromatic dispersion plus receiver-referred AWGN."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .modem import SampleStream
from .params import SPEED_OF_LIGHT, LinkParams, sampling_interval


@dataclass(frozen=True)
class ChannelConfig:
    link: LinkParams
    esn0_db: float | None = None
    noise_seed: int = 1

    def __post_init__(self):
        if self.esn0_db is not None and math.isnan(self.esn0_db):
            raise ParameterError("esn0_db must be a number")


def dispersion_phase(omega: np.ndarray, accumulated_dispersion: float) -> np.ndarray:
    """Phase of H(w) = exp(-j D lambda^2 L w^2 / (4 pi c))."""
    return -accumulated_dispersion * omega**2 / (4 * np.pi * SPEED_OF_LIGHT)


def cd_transfer(omega: np.ndarray, link: LinkParams) -> np.ndarray:
    return np.exp(1j * dispersion_phase(omega, link.accumulated_dispersion))


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(n))))


def apply_cd(stream: SampleStream, link: LinkParams | ChannelConfig, *, pad: bool = True) -> SampleStream:
    """Disperse ``stream`` over the full fiber length in the frequency domain.

    With ``pad=True`` the record is zero-padded, centred, to the next power
    of two >= twice its length before the transform, so dispersion tails
    land in guard zeros instead of wrapping onto the symbols; the returned
    stream is the padded length and ``symbol_alignment`` moves with the
    front guard. With ``pad=False`` the operator is applied circularly on
    the record as given and the length is unchanged.
    """
    link = link.link if isinstance(link, ChannelConfig) else link
    x = np.asarray(stream.samples, dtype=np.complex128)
    n = len(x)
    if n < 2:
        raise ParameterError("apply_cd needs at least 2 samples")
    front = 0
    if pad:
        nfft = _next_pow2(2 * n)
        front = (nfft - n) // 2
        x = np.concatenate([np.zeros(front, complex), x, np.zeros(nfft - n - front, complex)])
    if link.fiber_length == 0:
        return stream.with_samples(x.copy(), alignment_shift=front)
    ts = sampling_interval(link)
    omega = 2 * np.pi * np.fft.fftfreq(len(x), ts)
    y = np.fft.ifft(np.fft.fft(x) * cd_transfer(omega, link))
    return stream.with_samples(y, alignment_shift=front)


def noise_variance(esn0_db: float, symbol_energy: float) -> float:
    """Per-sample complex noise variance for a given Es/N0.

    N0 is the per-sample noise energy, so ``var = Es / (Es/N0)`` with Es in
    sample-energy units (see ``SampleStream.symbol_energy``).
    """
    return symbol_energy / 10.0 ** (esn0_db / 10.0)


def add_awgn(stream: SampleStream, esn0_db: float | None, seed: int,
             symbol_energy: float | None = None) -> SampleStream:
    """Add circular complex Gaussian noise at ``esn0_db``.

    ``esn0_db=None`` or ``+inf`` disables noise. ``symbol_energy`` defaults
    to the value recorded by the pulse shaper.
    """
    if esn0_db is None or esn0_db == math.inf:
        return stream
    if not math.isfinite(esn0_db):
        raise ParameterError(f"esn0_db must be finite or +inf, got {esn0_db}")
    es = stream.symbol_energy if symbol_energy is None else float(symbol_energy)
    var = noise_variance(esn0_db, es)
    rng = np.random.default_rng(seed)
    n = len(stream.samples)
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return stream.with_samples(stream.samples + np.sqrt(var / 2) * w)
