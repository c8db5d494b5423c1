"""End-to-end link simulation: modem -> fiber -> equalizer -> metrics."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from .channel import add_awgn, apply_cd
from .equalizer import convolve
from .exceptions import ConfigError, NumericalError, ParameterError
from .filter_design import FilterSpec, TapVector, design
from .metrics import EvmReport, ber, edge_trim, evm, export_constellation
from .modem import ModFormat, ShapeSpec, SymbolStream, build_constellation, generate_symbols, pulse_shape, receive_decide
from .params import LinkParams, tap_count

DEFAULT_SWEEP_SYMBOLS = 2**16
DEFAULT_COMPARE_SYMBOLS = 2**17


@dataclass(frozen=True)
class Experiment:
    link: LinkParams = field(default_factory=LinkParams)
    format: ModFormat = ModFormat.QPSK
    shaping: ShapeSpec = field(default_factory=ShapeSpec)
    filter: FilterSpec = field(default_factory=FilterSpec)
    n_symbols: int = DEFAULT_SWEEP_SYMBOLS
    data_seed: int = 1
    noise_seed: int = 2
    esn0_db: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "format", ModFormat.parse(self.format))
        if int(self.n_symbols) != self.n_symbols or self.n_symbols <= 0:
            raise ParameterError("n_symbols must be a positive integer")
        need = 4 * 2 * self.trim_symbols()
        if self.n_symbols < need:
            raise ParameterError(
                f"n_symbols={self.n_symbols} is too small; need >= {need} "
                f"(4x the transient symbols trimmed at both ends)"
            )

    def n_taps(self) -> int:
        if self.filter.kind == "none":
            return 1
        return tap_count(self.link)

    def trim_symbols(self) -> int:
        return edge_trim(self.n_taps(), self.link.samples_per_symbol, self.shaping.span_symbols)

    def with_filter(self, **changes) -> "Experiment":
        return replace(self, filter=replace(self.filter, **changes))

    def with_link(self, **changes) -> "Experiment":
        return replace(self, link=self.link.replace(**changes))

    def to_dict(self) -> dict:
        return {
            **self.link.to_engineering(),
            "format": self.format.value,
            "shaping": {"kind": self.shaping.kind, "rolloff": self.shaping.rolloff,
                        "span": self.shaping.span},
            **self.filter.describe(),
            "n_symbols": self.n_symbols,
            "data_seed": self.data_seed,
            "noise_seed": self.noise_seed,
            "esn0_db": self.esn0_db,
        }

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "Experiment":
        """Build from a flat config mapping (the CLI/config-file schema)."""
        try:
            link = LinkParams.from_mapping(cfg)
            shaping_cfg = cfg.get("shaping", {}) or {}
            if isinstance(shaping_cfg, str):
                shaping_cfg = {"kind": shaping_cfg}
            shaping = ShapeSpec(**shaping_cfg)
            fspec = FilterSpec(
                kind=cfg.get("filter", "fir"),
                alpha=float(cfg.get("alpha", 0.3)),
                x=float(cfg.get("x", 0.7)),
                rect_bandwidth_hz=cfg.get("rect_bandwidth_hz"),
                fft_length=cfg.get("fft_length"),
                mapping=cfg.get("window_mapping", "physical"),
                gaussian_width=cfg.get("gaussian_width", "amplitude"),
                normalize_dc=bool(cfg.get("normalize_dc", False)),
            )
            esn0 = cfg.get("esn0_db")
            return cls(
                link=link,
                format=cfg.get("format", "qpsk"),
                shaping=shaping,
                filter=fspec,
                n_symbols=int(cfg.get("n_symbols", DEFAULT_SWEEP_SYMBOLS)),
                data_seed=int(cfg.get("data_seed", cfg.get("seed", 1))),
                noise_seed=int(cfg.get("noise_seed", int(cfg.get("seed", 1)) + 1)),
                esn0_db=None if esn0 is None else float(esn0),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class SimulationResult:
    report: EvmReport
    taps: TapVector
    reference: SymbolStream
    soft: SymbolStream
    decided: SymbolStream

    def trimmed_soft(self) -> np.ndarray:
        r = self.report
        return np.asarray(self.soft.symbols[r.trimmed_head:len(self.soft) - r.trimmed_tail])


def _context(exp: Experiment) -> str:
    e = exp.link.to_engineering()
    return (f"[{exp.format.value} {e['symbol_rate_gbaud']:g} GBaud {e['length_km']:g} km "
            f"filter={exp.filter.kind}]")


def simulate(experiment: Experiment) -> SimulationResult:
    """Run the full pipeline once; deterministic for fixed seeds."""
    try:
        return _simulate(experiment)
    except ParameterError as exc:
        raise ParameterError(f"{_context(experiment)} {exc}") from exc
    except NumericalError as exc:
        raise NumericalError(f"{_context(experiment)} {exc}") from exc


def _simulate(exp: Experiment) -> SimulationResult:
    const = build_constellation(exp.format)
    link = exp.link
    tx = generate_symbols(const, exp.n_symbols, exp.data_seed)
    wave = pulse_shape(tx, link.samples_per_symbol, exp.shaping)
    wave = apply_cd(wave, link, pad=True)
    wave = add_awgn(wave, exp.esn0_db, exp.noise_seed)
    taps = design(link, exp.filter, shaping_rolloff=exp.shaping.rolloff)
    eq = convolve(wave, taps)
    decided, soft = receive_decide(eq.stream, const)
    trim = edge_trim(len(taps), link.samples_per_symbol, exp.shaping.span_symbols)
    rep = evm(soft, tx, trim_head=trim, trim_tail=trim)
    if not np.isfinite(rep.evm_percent):
        raise NumericalError("EVM is not finite")
    b = ber(decided, tx, const, trim_head=trim, trim_tail=trim)
    rep = replace(rep, ber=b)
    return SimulationResult(rep, taps, tx, soft, decided)


def run(experiment: Experiment, constellation_path=None) -> EvmReport:
    """Simulate and return the EVM report, optionally exporting the constellation."""
    res = simulate(experiment)
    if constellation_path is not None:
        export_constellation(res.trimmed_soft(), constellation_path, res.report.gain_correction)
    return res.report
