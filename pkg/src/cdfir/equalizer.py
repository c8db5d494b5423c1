"""Apply tap vectors to sample streams and inspect their frequency responses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import oaconvolve
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ParameterError
from .filter_design import FilterSpec, TapVector, design
from .modem import SampleStream
from .params import LinkParams
from .validation import check_stream, freeze

METHODS = ("auto", "direct", "fft")


@dataclass(frozen=True, eq=False)
class EqualizedStream:
    """Equalizer output, same length as the input.

    The first and last ``group_delay_samples`` samples are transients
    (the filter only partially overlaps the record there).
    """

    stream: SampleStream
    group_delay_samples: int
    taps_used: dict

    @property
    def samples(self) -> np.ndarray:
        return self.stream.samples

    @property
    def transient_head(self) -> int:
        return self.group_delay_samples

    @property
    def transient_tail(self) -> int:
        return self.group_delay_samples


def _nonzero_span(a: np.ndarray) -> tuple[int, int]:
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return 0, 0
    return int(nz[0]), int(nz[-1]) + 1


def convolve_same(x: np.ndarray, taps: np.ndarray, method: str = "auto") -> np.ndarray:
    """``y[n] = sum_k a_k x[n - k]`` with ``k`` centred on the middle tap.

    Leading/trailing exact-zero taps are skipped; the output is unchanged
    by that, it only shortens the work.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown convolution method {method!r}")
    x = np.asarray(x, dtype=np.complex128)
    a = np.asarray(taps, dtype=np.complex128)
    n_taps = len(a)
    if len(x) < n_taps:
        raise ParameterError(f"stream of {len(x)} samples is shorter than {n_taps} taps")
    lo, hi = _nonzero_span(a)
    if hi == 0:
        return np.zeros_like(x)
    a_eff = a[lo:hi]
    if method == "auto":
        method = "direct" if len(a_eff) <= 32 else "fft"
    full = np.convolve(x, a_eff) if method == "direct" else oaconvolve(x, a_eff)
    # a[lo] has index k = lo - N//2, so full[j] is output sample j + lo - N//2.
    start = n_taps // 2 - lo
    return full[start:start + len(x)]


def convolve(stream: SampleStream, taps: TapVector, method: str = "auto") -> EqualizedStream:
    x = check_stream(stream.samples, min_length=len(taps), name="stream")
    y = convolve_same(x, taps.taps, method)
    return EqualizedStream(stream.with_samples(y), taps.center_index, dict(taps.design_meta))


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    f_hz: np.ndarray
    response: np.ndarray

    @property
    def magnitude_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.response))

    @property
    def phase_rad(self) -> np.ndarray:
        return np.unwrap(np.angle(self.response))


def freq_response(taps: TapVector, n_points: int = 4096, ts: float | None = None) -> FrequencyResponse:
    """Zero-padded DFT of the taps on ``f`` in ``(-1/(2 Ts), 1/(2 Ts)]``, ascending.

    The taps are referenced to ``k = 0`` so the response carries no bulk
    delay. ``ts`` defaults to the sampling interval stored by the designer.
    """
    n = len(taps)
    if int(n_points) != n_points or n_points < n:
        raise ParameterError(f"n_points must be an integer >= {n}")
    n_points = int(n_points)
    if ts is None:
        ts = taps.design_meta.get("ts", 1.0)
    buf = np.zeros(n_points, dtype=np.complex128)
    buf[taps.k % n_points] += taps.taps
    spec = np.fft.fft(buf)
    bins = np.arange(-((n_points - 1) // 2), n_points // 2 + 1)
    return FrequencyResponse(freeze(bins / (n_points * ts)), freeze(spec[bins % n_points]))


class CDEqualizer(TransformerMixin, BaseEstimator):
    """Static chromatic-dispersion equalizer.

    ``fit`` designs the taps from the link hyperparameters (the data is
    only validated); ``transform`` filters complex baseband samples and
    returns a same-length array.

    Parameters
    ----------
    filter : {"none", "fir", "transversal", "rc", "gs"}
        Tap designer.
    alpha, x : float
        Raised-cosine roll-off and window FWHM (fraction of the truncation
        window). ``x`` is also the Gaussian FWHM.
    rect_bandwidth_hz, fft_length : optional
        Transversal-design band limit and DFT size.
    window_mapping : {"physical", "doubled"}
        Tap-index to window-coordinate mapping.
    gaussian_width : {"amplitude", "intensity"}
    normalize_dc : bool
        Scale taps to unit DC gain.
    dispersion_ps_nm_km, wavelength_nm, length_km, span_km,
    symbol_rate_gbaud, samples_per_symbol :
        Link description in engineering units.
    method : {"auto", "direct", "fft"}
        Convolution engine.

    Attributes
    ----------
    taps_ : TapVector
    n_taps_ : int
    link_ : LinkParams
    """

    def __init__(self, filter="fir", alpha=0.3, x=0.7, rect_bandwidth_hz=None,
                 fft_length=None, window_mapping="physical", gaussian_width="amplitude",
                 normalize_dc=False, dispersion_ps_nm_km=16.0, wavelength_nm=1550.0,
                 length_km=1000.0, span_km=100.0, symbol_rate_gbaud=20.0,
                 samples_per_symbol=2, method="auto"):
        self.filter = filter
        self.alpha = alpha
        self.x = x
        self.rect_bandwidth_hz = rect_bandwidth_hz
        self.fft_length = fft_length
        self.window_mapping = window_mapping
        self.gaussian_width = gaussian_width
        self.normalize_dc = normalize_dc
        self.dispersion_ps_nm_km = dispersion_ps_nm_km
        self.wavelength_nm = wavelength_nm
        self.length_km = length_km
        self.span_km = span_km
        self.symbol_rate_gbaud = symbol_rate_gbaud
        self.samples_per_symbol = samples_per_symbol
        self.method = method

    @classmethod
    def from_link(cls, link: LinkParams, spec: FilterSpec | None = None, **kwargs) -> "CDEqualizer":
        spec = spec or FilterSpec()
        if spec.kind == "custom":
            raise ParameterError("custom windows are only available through design_weighted")
        params = dict(
            filter=spec.kind, alpha=spec.alpha, x=spec.x,
            rect_bandwidth_hz=spec.rect_bandwidth_hz, fft_length=spec.fft_length,
            window_mapping=spec.mapping, gaussian_width=spec.gaussian_width,
            normalize_dc=spec.normalize_dc, **link.to_engineering(),
        )
        params.pop("launch_dbm")
        params.update(kwargs)
        return cls(**params)

    def _link(self) -> LinkParams:
        return LinkParams.from_engineering(
            dispersion_ps_nm_km=self.dispersion_ps_nm_km, wavelength_nm=self.wavelength_nm,
            length_km=self.length_km, span_km=self.span_km,
            symbol_rate_gbaud=self.symbol_rate_gbaud, samples_per_symbol=self.samples_per_symbol,
        )

    def filter_spec(self) -> FilterSpec:
        return FilterSpec(
            kind=self.filter, alpha=self.alpha, x=self.x,
            rect_bandwidth_hz=self.rect_bandwidth_hz, fft_length=self.fft_length,
            mapping=self.window_mapping, gaussian_width=self.gaussian_width,
            normalize_dc=self.normalize_dc,
        )

    def fit(self, X=None, y=None, shaping_rolloff: float = 0.1):
        if self.method not in METHODS:
            raise ParameterError(f"unknown convolution method {self.method!r}")
        self.link_ = self._link()
        self.taps_ = design(self.link_, self.filter_spec(), shaping_rolloff=shaping_rolloff)
        self.n_taps_ = len(self.taps_)
        if X is not None:
            check_stream(X, min_length=self.n_taps_)
        return self

    def transform(self, X):
        check_is_fitted(self, "taps_")
        x = check_stream(X, min_length=self.n_taps_)
        return convolve_same(x, self.taps_.taps, self.method)

    def freq_response(self, n_points: int = 4096) -> FrequencyResponse:
        check_is_fitted(self, "taps_")
        return freq_response(self.taps_, n_points, self.link_.ts)
