"""Physical constants, link parameters and the quantities derived from them.

All internal math is SI (seconds, meters). Engineering units
(ps/(nm km), nm, km, GBaud) are converted once, in
:meth:`LinkParams.from_engineering`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Any, Mapping

from .exceptions import ConfigError, ParameterError

#: Speed of light in vacuum, m/s (exact SI value).
SPEED_OF_LIGHT = 299_792_458.0

PS_PER_NM_KM = 1e-12 / (1e-9 * 1e3)  # 1 ps/(nm km) in s/m^2

ENGINEERING_KEYS = (
    "dispersion_ps_nm_km",
    "wavelength_nm",
    "length_km",
    "span_km",
    "symbol_rate_gbaud",
    "samples_per_symbol",
    "launch_dbm",
)


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = SPEED_OF_LIGHT


@dataclass(frozen=True)
class LinkParams:
    """Fiber link and receiver sampling parameters, SI units.

    ``fiber_length`` may be zero (back-to-back); designers that divide by
    the accumulated dispersion reject that case themselves.
    ``launch_power_dbm`` is carried for provenance only: the channel model
    is linear.
    """

    dispersion: float = 16.0 * PS_PER_NM_KM
    wavelength: float = 1550e-9
    fiber_length: float = 1000e3
    span_length: float = 100e3
    symbol_rate: float = 20e9
    samples_per_symbol: int = 2
    launch_power_dbm: float = 0.0

    def __post_init__(self):
        for name in ("dispersion", "wavelength", "fiber_length", "span_length",
                     "symbol_rate", "launch_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.dispersion == 0:
            raise ParameterError("dispersion must be nonzero")
        if self.wavelength <= 0:
            raise ParameterError("wavelength must be positive")
        if self.fiber_length < 0:
            raise ParameterError("fiber_length must be non-negative")
        if self.symbol_rate <= 0:
            raise ParameterError("symbol_rate must be positive")
        if int(self.samples_per_symbol) != self.samples_per_symbol or self.samples_per_symbol < 2:
            raise ParameterError("samples_per_symbol must be an integer >= 2")
        object.__setattr__(self, "samples_per_symbol", int(self.samples_per_symbol))
        if self.span_length <= 0:
            raise ParameterError("span_length must be positive")
        spans = self.fiber_length / self.span_length
        if abs(spans - round(spans)) > 1e-9 * max(1.0, spans):
            warnings.warn(
                f"fiber length {self.fiber_length:g} m is not an integer number of "
                f"{self.span_length:g} m spans",
                stacklevel=3,
            )

    @classmethod
    def from_engineering(
        cls,
        dispersion_ps_nm_km: float = 16.0,
        wavelength_nm: float = 1550.0,
        length_km: float = 1000.0,
        span_km: float = 100.0,
        symbol_rate_gbaud: float = 20.0,
        samples_per_symbol: int = 2,
        launch_dbm: float = 0.0,
    ) -> "LinkParams":
        return cls(
            dispersion=float(dispersion_ps_nm_km) * PS_PER_NM_KM,
            wavelength=float(wavelength_nm) * 1e-9,
            fiber_length=float(length_km) * 1e3,
            span_length=float(span_km) * 1e3,
            symbol_rate=float(symbol_rate_gbaud) * 1e9,
            samples_per_symbol=samples_per_symbol,
            launch_power_dbm=float(launch_dbm),
        )

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "LinkParams":
        """Build from a config mapping using the engineering-unit keys."""
        kwargs = {k: cfg[k] for k in ENGINEERING_KEYS if k in cfg}
        try:
            return cls.from_engineering(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid link parameters: {exc}") from exc

    def to_engineering(self) -> dict:
        return {
            "dispersion_ps_nm_km": self.dispersion / PS_PER_NM_KM,
            "wavelength_nm": self.wavelength * 1e9,
            "length_km": self.fiber_length / 1e3,
            "span_km": self.span_length / 1e3,
            "symbol_rate_gbaud": self.symbol_rate / 1e9,
            "samples_per_symbol": self.samples_per_symbol,
            "launch_dbm": self.launch_power_dbm,
        }

    def replace(self, **changes) -> "LinkParams":
        values = asdict(self)
        values.update(changes)
        return LinkParams(**values)

    @property
    def accumulated_dispersion(self) -> float:
        """D * lambda^2 * L, in seconds^2 (sign of D kept)."""
        return self.dispersion * self.wavelength**2 * self.fiber_length

    @property
    def ts(self) -> float:
        return sampling_interval(self)

    @property
    def n_spans(self) -> int:
        return int(round(self.fiber_length / self.span_length))


def sampling_interval(params: LinkParams) -> float:
    """ADC sampling interval ``1 / (symbol_rate * samples_per_symbol)``."""
    if params.symbol_rate <= 0 or params.samples_per_symbol < 1:
        raise ParameterError("symbol_rate and samples_per_symbol must be positive")
    return 1.0 / (params.symbol_rate * params.samples_per_symbol)


def truncation_window(params: LinkParams) -> float:
    """Time span of the anti-aliasing truncation window, |D| lambda^2 L / (c Ts)."""
    return abs(params.accumulated_dispersion) / (SPEED_OF_LIGHT * sampling_interval(params))


def tap_count(params: LinkParams) -> int:
    """Largest odd tap count free of frequency aliasing.

    ``N = 2 * floor(|D| lambda^2 L / (2 c Ts^2)) + 1``
    """
    ts = sampling_interval(params)
    ratio = abs(params.accumulated_dispersion) / (2.0 * SPEED_OF_LIGHT * ts**2)
    return 2 * math.floor(ratio) + 1
