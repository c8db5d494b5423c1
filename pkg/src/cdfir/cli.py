"""Command-line front end.

Every invocation writes into its own output directory: ``manifest.json``
plus the data files of the command. Exit codes: 0 success, 2 configuration
error, 3 numerical/runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .equalizer import freq_response
from .exceptions import ConfigError, NumericalError, ParameterError
from .filter_design import FILTER_KINDS, design
from .link import DEFAULT_COMPARE_SYMBOLS, DEFAULT_SWEEP_SYMBOLS, Experiment, simulate
from .metrics import export_constellation
from .params import ENGINEERING_KEYS
from .sweep import DEFAULT_ALPHA_GRID, DEFAULT_X_GRID, check_grid, sweep_gs, sweep_rc

log = logging.getLogger("cdfir")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DESIGN_FILTERS = ["fir", "transversal", "rc", "gs"]

DEFAULTS = {
    "dispersion_ps_nm_km": 16.0,
    "wavelength_nm": 1550.0,
    "length_km": 1000.0,
    "span_km": 100.0,
    "symbol_rate_gbaud": 20.0,
    "samples_per_symbol": 2,
    "launch_dbm": 0.0,
    "format": "qpsk",
    "filter": "fir",
    "alpha": 0.3,
    "x": 0.7,
    "window_mapping": "physical",
    "gaussian_width": "amplitude",
    "normalize_dc": False,
    "rect_bandwidth_hz": None,
    "fft_length": None,
    "shaping": {"kind": "rrc", "rolloff": 0.1, "span": 80},
    "esn0_db": None,
    "seed": 1,
}


def _float_list(text: str) -> list[float]:
    """Parse ``"a,b,c"`` or ``"start:stop:step"`` (stop inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--out", type=Path, help="output directory (default: ./cdfir-<command>)")
    common.add_argument("--force", action="store_true", help="allow writing into a non-empty --out")
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["qpsk", "16qam", "32qam"])
    common.add_argument("--filter", action="append", choices=list(FILTER_KINDS[:-1]),
                        help="designer; repeatable for design/response/compare")
    common.add_argument("--alpha", type=float)
    common.add_argument("--x", type=float)
    common.add_argument("--esn0-db", type=float, dest="esn0_db")
    common.add_argument("--symbols", type=int, dest="n_symbols")
    common.add_argument("--length-km", type=float, dest="length_km")
    common.add_argument("--rate-gbaud", type=float, dest="symbol_rate_gbaud")
    common.add_argument("--window-mapping", choices=["physical", "doubled"], dest="window_mapping")
    common.add_argument("--gaussian-width", choices=["amplitude", "intensity"], dest="gaussian_width")
    common.add_argument("--shape", choices=["rrc", "nrz"])
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cdfir", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cdfir {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="write tap CSVs")
    r = sub.add_parser("response", parents=[common], help="write frequency-response CSVs")
    r.add_argument("--points", type=int, dest="n_points")
    s = sub.add_parser("simulate", parents=[common], help="run one link simulation")
    s.add_argument("--constellation", action="store_true", help="also write constellation.csv")
    w = sub.add_parser("sweep", parents=[common], help="grid-search window parameters")
    w.add_argument("--alpha-grid", type=_float_list, dest="alpha_grid")
    w.add_argument("--x-grid", type=_float_list, dest="x_grid")
    c = sub.add_parser("compare", parents=[common], help="EVM vs distance for several filters")
    c.add_argument("--distances-km", type=_float_list, dest="distances_km")
    c.add_argument("--constellation-km", type=float, dest="constellation_km")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults <- config file <- command-line flags."""
    cfg = dict(DEFAULTS)
    cfg["n_symbols"] = DEFAULT_COMPARE_SYMBOLS if args.command == "compare" else DEFAULT_SWEEP_SYMBOLS
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(DEFAULTS) | set(ENGINEERING_KEYS) | {
            "n_symbols", "filters", "distances_km", "alpha_grid", "x_grid", "n_points",
            "data_seed", "noise_seed", "constellation_km",
        }
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("config", "out", "force", "command", "jobs",
                                            "verbose", "filter", "shape", "constellation")}
    cfg.update(flags)
    if args.shape is not None:
        cfg["shaping"] = {**(cfg.get("shaping") or {}), "kind": args.shape}
    if args.filter:
        if args.command in ("design", "response", "compare"):
            cfg["filters"] = list(args.filter)
        else:
            if len(args.filter) > 1:
                raise ConfigError(f"{args.command} takes a single --filter")
            cfg["filter"] = args.filter[0]
    if args.seed is not None:
        cfg["data_seed"] = args.seed
        cfg["noise_seed"] = args.seed + 1
    cfg.setdefault("data_seed", cfg["seed"])
    cfg.setdefault("noise_seed", cfg["data_seed"] + 1)
    if args.command in ("design", "response", "compare"):
        cfg.setdefault("filters", list(DESIGN_FILTERS))
    if args.command == "sweep":
        if cfg["filter"] not in ("rc", "gs"):
            cfg["filter"] = "rc"
        cfg.setdefault("alpha_grid", list(DEFAULT_ALPHA_GRID))
        cfg.setdefault("x_grid", list(DEFAULT_X_GRID))
    if args.command == "compare":
        cfg.setdefault("distances_km", [float(d) for d in range(200, 2001, 200)])
    if args.command == "response":
        cfg.setdefault("n_points", 4096)
    return cfg


def _experiment(cfg: dict, **overrides) -> Experiment:
    try:
        return Experiment.from_mapping({**cfg, **overrides})
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else repr(float(v)) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


class Outputs:
    """Output directory bookkeeping; records every file written."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name


# Each command validates everything up front (plan_*), then writes (exec_*),
# so configuration errors never leave partial files behind.

def plan_design(cfg):
    exps = {f: _experiment(cfg, filter=f) for f in cfg["filters"]}
    return exps


def exec_design(cfg, plan, out: Outputs):
    for name, exp in plan.items():
        tv = design(exp.link, exp.filter, shaping_rolloff=exp.shaping.rolloff)
        rows = ((k, a.real, a.imag, abs(a), np.angle(a)) for k, a in zip(tv.k, tv.taps))
        _write_csv(out.path(f"taps_{name}.csv"), ["k", "re", "im", "magnitude", "phase"],
                   ((str(int(r[0])),) + r[1:] for r in rows))


def plan_response(cfg):
    n = int(cfg["n_points"])
    exps = plan_design(cfg)
    for exp in exps.values():
        if n < exp.n_taps():
            raise ConfigError(f"n_points={n} is smaller than the {exp.n_taps()}-tap filter")
    return exps


def exec_response(cfg, plan, out: Outputs):
    for name, exp in plan.items():
        tv = design(exp.link, exp.filter, shaping_rolloff=exp.shaping.rolloff)
        fr = freq_response(tv, int(cfg["n_points"]), exp.link.ts)
        _write_csv(out.path(f"response_{name}.csv"), ["f_hz", "mag_db", "phase_rad"],
                   zip(fr.f_hz, fr.magnitude_db, fr.phase_rad))


def plan_simulate(cfg):
    return _experiment(cfg)


def exec_simulate(cfg, exp, out: Outputs, constellation: bool = False):
    res = simulate(exp)
    payload = {**res.report.to_dict(), "config": exp.to_dict()}
    _write_json(out.path("metrics.json"), payload)
    if constellation:
        export_constellation(res.trimmed_soft(), out.path("constellation.csv"),
                             res.report.gain_correction)
    log.info("EVM %.4f%%  BER %.3g", res.report.evm_percent, res.report.ber)


def plan_sweep(cfg):
    exp = _experiment(cfg)
    try:
        if cfg["filter"] == "rc":
            check_grid(cfg["alpha_grid"], "alpha", 0.0, 1.0)
            check_grid(cfg["x_grid"], "x", 0.0, 2.5)
        else:
            check_grid(cfg["x_grid"], "x", 0.0, np.inf)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return exp


def exec_sweep(cfg, exp, out: Outputs, jobs: int = 1):
    if cfg["filter"] == "rc":
        surf = sweep_rc(exp, cfg["alpha_grid"], cfg["x_grid"], n_jobs=jobs)
    else:
        surf = sweep_gs(exp, cfg["x_grid"], n_jobs=jobs)
    surf.to_csv(out.path(f"sweep_{surf.kind}.csv"))
    surf.to_json(out.path(f"sweep_{surf.kind}.json"))
    log.info("argmin %s", surf.argmin)


def plan_compare(cfg):
    dists = [float(d) for d in cfg["distances_km"]]
    if not dists or any(d <= 0 for d in dists):
        raise ConfigError("distances_km must be a non-empty list of positive lengths")
    plan = {(d, f): _experiment(cfg, filter=f, length_km=d) for d in dists for f in cfg["filters"]}
    ck = cfg.get("constellation_km")
    if ck is None:
        ck = 1000.0 if 1000.0 in dists else dists[-1]
    if float(ck) not in dists:
        raise ConfigError(f"constellation_km={ck} is not in distances_km")
    cfg["constellation_km"] = float(ck)
    return plan


def _compare_point(exp: Experiment):
    res = simulate(exp)
    return res.report, res.trimmed_soft()


def exec_compare(cfg, plan, out: Outputs, jobs: int = 1):
    keys = list(plan)
    if jobs == 1:
        results = [_compare_point(plan[k]) for k in keys]
    else:
        results = Parallel(n_jobs=jobs)(delayed(_compare_point)(plan[k]) for k in keys)
    rows = []
    for (dist, name), (rep, soft) in zip(keys, results):
        rows.append((repr(dist), name, rep.evm_percent, rep.ber))
        if dist == cfg["constellation_km"]:
            export_constellation(soft, out.path(f"constellation_{name}_{dist:g}km.csv"),
                                 rep.gain_correction)
    _write_csv(out.path("compare.csv"), ["distance_km", "filter", "evm_percent", "ber"], rows)


COMMANDS = {
    "design": (plan_design, exec_design),
    "response": (plan_response, exec_response),
    "simulate": (plan_simulate, exec_simulate),
    "sweep": (plan_sweep, exec_sweep),
    "compare": (plan_compare, exec_compare),
}


def _prepare_out(args) -> Path:
    out = args.out or Path(f"cdfir-{args.command}")
    if out.exists():
        if not out.is_dir():
            raise ConfigError(f"--out {out} exists and is not a directory")
        if any(out.iterdir()) and not args.force:
            raise ConfigError(f"--out {out} is not empty; pass --force to write into it")
    return out


def _jsonable(cfg: dict) -> dict:
    return json.loads(json.dumps(cfg, default=str))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        plan_fn, exec_fn = COMMANDS[args.command]
        plan = plan_fn(cfg)
        out_dir = _prepare_out(args)
    except (ConfigError, ParameterError) as exc:
        print(f"cdfir {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = Outputs(out_dir)
    status, error, code = "ok", None, EXIT_OK
    kwargs = {}
    if args.command == "simulate":
        kwargs["constellation"] = args.constellation
    if args.command in ("sweep", "compare"):
        kwargs["jobs"] = args.jobs
    try:
        exec_fn(cfg, plan, outputs, **kwargs)
    except (ConfigError, ParameterError) as exc:
        status, error, code = "failed", str(exc), EXIT_CONFIG
    except (NumericalError, ArithmeticError, FloatingPointError) as exc:
        status, error, code = "failed", str(exc), EXIT_NUMERIC
    finally:
        manifest = {
            "command": args.command,
            "config": _jsonable(cfg),
            "inputs": [str(args.config)] if args.config else [],
            "outputs": outputs.files,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seeds": {"data": cfg["data_seed"], "noise": cfg["noise_seed"]},
            "status": status,
        }
        if error:
            manifest["error"] = error
        _write_json(out_dir / "manifest.json", manifest)
    if error:
        print(f"cdfir {args.command}: {error}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
