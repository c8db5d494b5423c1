"""Tap designers for the chromatic-dispersion FIR equalizer family.

Four designs share the same symmetric index range ``k = -N//2 .. N//2``:

* ``design_fir``: samples of the inverse CD impulse response, rectangular
  truncation (constant tap modulus).
* ``design_weighted``: the same taps multiplied by a real symmetric window
  (raised cosine, Gaussian or a user function).
* ``design_transversal``: inverse DFT of the band-limited inverse transfer
  function.

Window coordinates are expressed in units of the truncation window
``T_window``. By default tap ``k`` sits at ``t = k / N`` (its physical time
``k Ts`` over ``T_window`` ~ ``N Ts``), so the taps cover ``[-1/2, 1/2]``.
``mapping="doubled"`` uses ``t = 2k / N`` instead, stretching the tap range
over ``[-1, 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ParameterError
from .params import SPEED_OF_LIGHT, LinkParams, sampling_interval, tap_count
from .validation import check_in_interval, check_odd, check_positive, freeze

WINDOW_KINDS = ("rectangular", "raised_cosine", "gaussian", "custom")
MAPPINGS = {"physical": 1.0, "doubled": 2.0}
GAUSSIAN_WIDTHS = ("amplitude", "intensity")


@dataclass(frozen=True, eq=False)
class TapVector:
    """Complex taps ``a_k`` for ``k = -N//2 .. N//2``; ``taps[center_index]`` is ``a_0``."""

    taps: np.ndarray
    center_index: int
    design_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = check_odd(len(self.taps), "tap count")
        if self.center_index != n // 2:
            raise ParameterError("center_index must be N // 2")

    def __len__(self):
        return len(self.taps)

    @property
    def k(self) -> np.ndarray:
        half = self.center_index
        return np.arange(-half, half + 1)

    @classmethod
    def identity(cls) -> "TapVector":
        return cls(freeze(np.ones(1, dtype=np.complex128)), 0, {"designer": "none"})


@dataclass(frozen=True)
class WindowSpec:
    """Weighting window for :func:`design_weighted`.

    ``x`` is the window FWHM as a fraction of ``T_window``; ``alpha`` is the
    raised-cosine roll-off. ``gaussian_width`` selects how ``x`` sets the
    Gaussian's T0: ``"amplitude"`` makes ``x`` the FWHM of the weight itself,
    ``"intensity"`` the FWHM of the weight squared.
    """

    kind: str = "rectangular"
    alpha: float | None = None
    x: float | None = None
    func: Callable[[np.ndarray], np.ndarray] | None = None
    mapping: str = "physical"
    gaussian_width: str = "amplitude"

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ParameterError(f"unknown window kind {self.kind!r}")
        if self.mapping not in MAPPINGS:
            raise ParameterError(f"unknown window mapping {self.mapping!r}")
        if self.gaussian_width not in GAUSSIAN_WIDTHS:
            raise ParameterError(f"unknown gaussian_width {self.gaussian_width!r}")
        if self.kind == "raised_cosine":
            if self.alpha is None or self.x is None:
                raise ParameterError("raised_cosine needs alpha and x")
            check_in_interval(self.alpha, 0.0, 1.0, "alpha")
            check_positive(self.x, "x")
        elif self.kind == "gaussian":
            if self.x is None:
                raise ParameterError("gaussian needs x")
            check_positive(self.x, "x")
        elif self.kind == "custom" and not callable(self.func):
            raise ParameterError("custom window needs a callable func")

    @classmethod
    def rectangular(cls, **kw) -> "WindowSpec":
        return cls("rectangular", **kw)

    @classmethod
    def raised_cosine(cls, alpha: float, x: float, **kw) -> "WindowSpec":
        return cls("raised_cosine", alpha=alpha, x=x, **kw)

    @classmethod
    def gaussian(cls, x: float, **kw) -> "WindowSpec":
        return cls("gaussian", x=x, **kw)

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], **kw) -> "WindowSpec":
        return cls("custom", func=func, **kw)

    def describe(self) -> dict:
        d = {"window": self.kind, "mapping": self.mapping}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.x is not None:
            d["x"] = self.x
        if self.kind == "gaussian":
            d["gaussian_width"] = self.gaussian_width
        if self.kind == "custom":
            d["func"] = getattr(self.func, "__name__", repr(self.func))
        return d


def window_rc(t_norm, alpha: float, x_rc: float):
    """Raised-cosine weight with FWHM ``x_rc`` and roll-off ``alpha``.

    Flat (1) for ``|t| < (1 - alpha) x_rc / 2``, cosine taper up to
    ``(1 + alpha) x_rc / 2``, zero beyond. Half value at ``|t| = x_rc / 2``.
    """
    alpha = check_in_interval(alpha, 0.0, 1.0, "alpha")
    T = check_positive(x_rc, "x_rc")
    at = np.abs(np.asarray(t_norm, dtype=float))
    lo = (1 - alpha) * T / 2
    hi = (1 + alpha) * T / 2
    taper = 0.5 * (1 + np.cos(np.pi / (alpha * T) * (at - lo)))
    out = np.where(at < lo, 1.0, np.where(at <= hi, taper, 0.0))
    return out if out.ndim else float(out)


def gaussian_t0(x_gs: float, width: str = "amplitude") -> float:
    """Gaussian T0 for a window of FWHM ``x_gs``."""
    if width == "amplitude":
        return x_gs / (2 * math.sqrt(2 * math.log(2)))
    if width == "intensity":
        return x_gs / (2 * math.sqrt(math.log(2)))
    raise ParameterError(f"unknown gaussian_width {width!r}")


def window_gs(t_norm, x_gs: float, width: str = "amplitude"):
    """Gaussian weight ``exp(-t^2 / (2 T0^2))`` with T0 set by the FWHM ``x_gs``."""
    t0 = gaussian_t0(check_positive(x_gs, "x_gs"), width)
    t = np.asarray(t_norm, dtype=float)
    out = np.exp(-(t**2) / (2 * t0**2))
    return out if out.ndim else float(out)


def super_gaussian_window(x: float, order: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    """Super-Gaussian ``exp(-ln2 |2t/x|^(2 order))``; weight 0.5 at ``|t| = x/2``."""
    check_positive(x, "x")

    def f(t):
        return np.exp(-math.log(2) * np.abs(2 * np.asarray(t) / x) ** (2 * order))

    f.__name__ = f"super_gaussian(x={x}, order={order})"
    return f


def sech_window(x: float) -> Callable[[np.ndarray], np.ndarray]:
    """Hyperbolic secant with FWHM ``x``."""
    check_positive(x, "x")
    width = x / (2 * math.acosh(2.0))

    def f(t):
        return 1.0 / np.cosh(np.asarray(t) / width)

    f.__name__ = f"sech(x={x})"
    return f


def window_coordinates(n: int, mapping: str = "physical") -> np.ndarray:
    n = check_odd(n)
    try:
        scale = MAPPINGS[mapping]
    except KeyError:
        raise ParameterError(f"unknown window mapping {mapping!r}") from None
    k = np.arange(-(n // 2), n // 2 + 1)
    return scale * k / n


def sample_window(spec: WindowSpec, n: int) -> np.ndarray:
    """Window weights ``f(k)`` for an ``n``-tap filter."""
    t = window_coordinates(n, spec.mapping)
    if spec.kind == "rectangular":
        return np.ones(n)
    if spec.kind == "raised_cosine":
        return np.asarray(window_rc(t, spec.alpha, spec.x), dtype=float)
    if spec.kind == "gaussian":
        return np.asarray(window_gs(t, spec.x, spec.gaussian_width), dtype=float)
    f = np.asarray(spec.func(t), dtype=float)
    if f.shape != t.shape:
        raise ParameterError("custom window must return one weight per tap")
    if not np.all(np.isfinite(f)) or f.min() < 0 or f.max() > 1 + 1e-12:
        raise ParameterError("custom window weights must lie in [0, 1]")
    if not np.allclose(f, f[::-1], rtol=0, atol=1e-12):
        raise ParameterError("custom window must be symmetric, f(-t) = f(t)")
    if abs(float(np.asarray(spec.func(np.zeros(1)))[0]) - 1.0) > 1e-12:
        raise ParameterError("custom window must satisfy f(0) = 1")
    return f


def _require_dispersion(params: LinkParams) -> float:
    b = params.accumulated_dispersion
    if b == 0:
        raise ParameterError("accumulated dispersion is zero; nothing to equalize")
    return b


def _normalize_dc(taps: np.ndarray) -> np.ndarray:
    s = abs(taps.sum())
    if s == 0:
        raise ParameterError("cannot DC-normalize taps with zero sum")
    return taps / s


def base_taps(params: LinkParams, n_taps: int | None = None) -> TapVector:
    """Constant-modulus taps ``sqrt(j c Ts^2 / b) exp(-j pi c Ts^2 k^2 / b)``, ``b = D lambda^2 L``."""
    b = _require_dispersion(params)
    n = tap_count(params) if n_taps is None else check_odd(n_taps, "n_taps")
    ts = sampling_interval(params)
    k = np.arange(-(n // 2), n // 2 + 1)
    prefactor = np.sqrt(1j * SPEED_OF_LIGHT * ts**2 / b + 0j)
    taps = prefactor * np.exp(-1j * np.pi * SPEED_OF_LIGHT * ts**2 * k.astype(float) ** 2 / b)
    return TapVector(freeze(taps), n // 2, {"designer": "base", "n_taps": n})


def design_weighted(params: LinkParams, spec: WindowSpec, *, n_taps: int | None = None,
                    normalize_dc: bool = False) -> TapVector:
    """Window-weighted taps ``a_k = base_k * f(k)``.

    Zero-weight taps are kept, so the vector length always matches the
    unweighted design.
    """
    base = base_taps(params, n_taps)
    f = sample_window(spec, len(base))
    taps = base.taps * f
    if normalize_dc:
        taps = _normalize_dc(taps)
    designer = {"rectangular": "fir", "raised_cosine": "rc", "gaussian": "gs"}.get(spec.kind, "custom")
    meta = {"designer": designer, "n_taps": len(base), "normalize_dc": normalize_dc, **spec.describe()}
    return TapVector(freeze(taps), base.center_index, meta)


def design_fir(params: LinkParams, *, n_taps: int | None = None,
               normalize_dc: bool = False) -> TapVector:
    """Rectangular truncation of the inverse impulse response."""
    return design_weighted(params, WindowSpec.rectangular(), n_taps=n_taps, normalize_dc=normalize_dc)


def default_rect_bandwidth(params: LinkParams, shaping_rolloff: float = 0.1) -> float:
    return min(params.symbol_rate * (1 + shaping_rolloff), 1.0 / sampling_interval(params))


def design_transversal(params: LinkParams, rect_bandwidth_hz: float | None = None,
                       fft_length: int | None = None, *, n_taps: int | None = None,
                       shaping_rolloff: float = 0.1, normalize_dc: bool = False) -> TapVector:
    """Taps from the inverse DFT of ``H_eq(w)`` zeroed outside ``|f| <= B/2``.

    ``H_eq(w) = exp(+j D lambda^2 L w^2 / (4 pi c))`` is sampled on an
    ``fft_length``-point grid spanning one sampling period of frequency;
    the ``N`` taps around ``t = 0`` are kept.
    """
    _require_dispersion(params)
    ts = sampling_interval(params)
    n = tap_count(params) if n_taps is None else check_odd(n_taps, "n_taps")
    if rect_bandwidth_hz is None:
        rect_bandwidth_hz = default_rect_bandwidth(params, shaping_rolloff)
    bw = check_in_interval(rect_bandwidth_hz, 0.0, 1.0 / ts * (1 + 1e-12), "rect_bandwidth_hz")
    if fft_length is None:
        fft_length = 1 << int(math.ceil(math.log2(64 * n)))
    m = int(fft_length)
    if m != fft_length or m < 8 * n or m & (m - 1):
        raise ParameterError(f"fft_length must be a power of two >= 8N = {8 * n}, got {fft_length}")
    f = np.fft.fftfreq(m, ts)
    omega = 2 * np.pi * f
    h_eq = np.exp(1j * params.accumulated_dispersion * omega**2 / (4 * np.pi * SPEED_OF_LIGHT))
    h_eq[np.abs(f) > bw / 2 * (1 + 1e-12)] = 0.0
    h = np.fft.ifft(h_eq)
    k = np.arange(-(n // 2), n // 2 + 1)
    taps = h[k % m]
    if normalize_dc:
        taps = _normalize_dc(taps)
    meta = {"designer": "transversal", "n_taps": n, "rect_bandwidth_hz": bw,
            "fft_length": m, "normalize_dc": normalize_dc}
    return TapVector(freeze(np.ascontiguousarray(taps)), n // 2, meta)


FILTER_KINDS = ("none", "fir", "transversal", "rc", "gs", "custom")


@dataclass(frozen=True)
class FilterSpec:
    """Designer selector plus its parameters, as used by experiments and the CLI."""

    kind: str = "fir"
    alpha: float = 0.3
    x: float = 0.7
    rect_bandwidth_hz: float | None = None
    fft_length: int | None = None
    mapping: str = "physical"
    gaussian_width: str = "amplitude"
    normalize_dc: bool = False
    func: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ParameterError(f"unknown filter {self.kind!r}; expected one of {FILTER_KINDS}")
        if self.kind in ("rc", "gs", "custom"):
            self.window_spec()

    def window_spec(self) -> WindowSpec:
        kw = {"mapping": self.mapping, "gaussian_width": self.gaussian_width}
        if self.kind == "rc":
            return WindowSpec.raised_cosine(self.alpha, self.x, **kw)
        if self.kind == "gs":
            return WindowSpec.gaussian(self.x, **kw)
        if self.kind == "custom":
            return WindowSpec.custom(self.func, **kw)
        return WindowSpec.rectangular(**kw)

    def describe(self) -> dict:
        d = {"filter": self.kind}
        if self.kind == "rc":
            d.update(alpha=self.alpha, x=self.x, mapping=self.mapping)
        elif self.kind == "gs":
            d.update(x=self.x, mapping=self.mapping, gaussian_width=self.gaussian_width)
        elif self.kind == "transversal":
            d.update(rect_bandwidth_hz=self.rect_bandwidth_hz, fft_length=self.fft_length)
        elif self.kind == "custom":
            d.update(func=getattr(self.func, "__name__", repr(self.func)), mapping=self.mapping)
        if self.kind != "none":
            d["normalize_dc"] = self.normalize_dc
        return d


def design(params: LinkParams, spec: FilterSpec, *, shaping_rolloff: float = 0.1) -> TapVector:
    """Dispatch to the designer named by ``spec.kind``; ``"none"`` gives a unit tap."""
    if spec.kind == "none":
        return TapVector.identity()
    if spec.kind == "transversal":
        tv = design_transversal(params, spec.rect_bandwidth_hz, spec.fft_length,
                                shaping_rolloff=shaping_rolloff, normalize_dc=spec.normalize_dc)
    elif spec.kind == "fir":
        tv = design_fir(params, normalize_dc=spec.normalize_dc)
    else:
        tv = design_weighted(params, spec.window_spec(), normalize_dc=spec.normalize_dc)
    return TapVector(tv.taps, tv.center_index, {**tv.design_meta, "ts": sampling_interval(params)})
