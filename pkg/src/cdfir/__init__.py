"""Weighted-FIR chromatic-dispersion equalization for coherent optical links."""
from .equalizer import CDEqualizer, convolve, freq_response
from .exceptions import ConfigError, NumericalError, ParameterError
from .filter_design import (
    FilterSpec,
    TapVector,
    WindowSpec,
    base_taps,
    design,
    design_fir,
    design_transversal,
    design_weighted,
    sample_window,
    window_gs,
    window_rc,
)
from .link import Experiment, run, simulate
from .metrics import EvmReport, ber, evm
from .modem import ModFormat, ShapeSpec, build_constellation
from .params import LinkParams, sampling_interval, tap_count, truncation_window

__version__ = "0.1.0"

__all__ = [
    "CDEqualizer", "ConfigError", "EvmReport", "Experiment", "FilterSpec", "LinkParams",
    "ModFormat", "NumericalError", "ParameterError", "ShapeSpec", "TapVector", "WindowSpec",
    "base_taps", "ber", "build_constellation", "convolve", "design", "design_fir",
    "design_transversal", "design_weighted", "evm", "freq_response", "run", "sample_window",
    "sampling_interval", "simulate", "tap_count", "truncation_window", "window_gs", "window_rc",
]
