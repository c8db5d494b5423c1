"""Grid search over window parameters.

Each grid point is an independent ``link.run``; points run in parallel via
joblib and are gathered back in grid order, so the surface does not
depend on scheduling.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import ParameterGrid

from .exceptions import ParameterError
from .link import Experiment, run

DEFAULT_ALPHA_GRID = tuple(np.round(np.arange(0.1, 0.91, 0.1), 10))
DEFAULT_X_GRID = tuple(np.round(np.arange(0.4, 1.21, 0.1), 10))


@dataclass(frozen=True, eq=False)
class SweepSurface:
    """EVM over a parameter grid.

    ``evm_grid`` is indexed ``[alpha, x]`` for raised-cosine sweeps and
    ``[x]`` for Gaussian sweeps. ``argmin`` breaks exact ties toward the
    smaller ``x``, then the smaller ``alpha``.
    """

    kind: str
    axes: dict
    evm_grid: np.ndarray
    experiment: Experiment

    @property
    def argmin_index(self) -> tuple:
        g = self.evm_grid
        best = np.min(g)
        cells = [tuple(int(i) for i in c) for c in np.argwhere(g == best)]
        # cells are (alpha_i, x_i) or (x_i,); x is always the last axis
        return min(cells, key=lambda c: (c[-1],) + c[:-1])

    @property
    def argmin(self) -> dict:
        idx = self.argmin_index
        point = {name: float(self.axes[name][i]) for name, i in zip(self.axes, idx)}
        return {**point, "evm_percent": float(self.evm_grid[idx])}

    def rows(self):
        if self.kind == "rc":
            for i, a in enumerate(self.axes["alpha"]):
                for j, x in enumerate(self.axes["x"]):
                    yield {"alpha": float(a), "x": float(x), "evm_percent": float(self.evm_grid[i, j])}
        else:
            for j, x in enumerate(self.axes["x"]):
                yield {"x": float(x), "evm_percent": float(self.evm_grid[j])}

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = ["alpha", "x", "evm_percent"] if self.kind == "rc" else ["x", "evm_percent"]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in self.rows():
                w.writerow([repr(row[c]) for c in cols])
        return path

    def sidecar(self) -> dict:
        return {
            "kind": self.kind,
            "axes": {k: [float(v) for v in vals] for k, vals in self.axes.items()},
            "argmin": self.argmin,
            "experiment": self.experiment.to_dict(),
        }

    def to_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return path


def check_grid(values, name: str, low: float, high: float) -> np.ndarray:
    arr = np.asarray(list(values), dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError(f"{name} grid must be a non-empty 1-D sequence")
    if np.any(~np.isfinite(arr)) or np.any(arr <= low) or np.any(arr > high):
        raise ParameterError(f"{name} grid values must lie in ({low}, {high}]")
    return arr


def _run_point(template: Experiment, filter_changes: dict) -> float:
    exp = replace(template, filter=replace(template.filter, **filter_changes))
    try:
        return run(exp).evm_percent
    except ParameterError as exc:
        raise ParameterError(f"at grid point {filter_changes}: {exc}") from exc


def _evaluate(template: Experiment, points: list[dict], n_jobs: int) -> np.ndarray:
    if n_jobs == 1:
        vals = [_run_point(template, p) for p in points]
    else:
        vals = Parallel(n_jobs=n_jobs)(delayed(_run_point)(template, p) for p in points)
    return np.asarray(vals, dtype=float)


def sweep_rc(template: Experiment, alpha_grid=DEFAULT_ALPHA_GRID, x_grid=DEFAULT_X_GRID,
             n_jobs: int = 1) -> SweepSurface:
    """EVM surface of the raised-cosine weighted FIR over ``alpha x x``."""
    alphas = check_grid(alpha_grid, "alpha", 0.0, 1.0)
    xs = check_grid(x_grid, "x", 0.0, 2.5)
    # ParameterGrid iterates the last sorted key fastest: alpha-major, x-minor.
    points = [{"kind": "rc", "alpha": float(p["alpha"]), "x": float(p["x"])}
              for p in ParameterGrid({"alpha": alphas, "x": xs})]
    grid = _evaluate(template, points, n_jobs).reshape(len(alphas), len(xs))
    exp = replace(template, filter=replace(template.filter, kind="rc"))
    return SweepSurface("rc", {"alpha": alphas, "x": xs}, grid, exp)


def sweep_gs(template: Experiment, x_grid=DEFAULT_X_GRID, n_jobs: int = 1) -> SweepSurface:
    """EVM curve of the Gaussian weighted FIR over ``x``."""
    xs = check_grid(x_grid, "x", 0.0, np.inf)
    points = [{"kind": "gs", "x": float(x)} for x in xs]
    grid = _evaluate(template, points, n_jobs)
    exp = replace(template, filter=replace(template.filter, kind="gs"))
    return SweepSurface("gs", {"x": xs}, grid, exp)


def cell_distance(surface: SweepSurface, **target) -> int:
    """Chebyshev distance, in grid cells, from the argmin to the cell nearest ``target``."""
    idx = surface.argmin_index
    dist = 0
    for (name, vals), i in zip(surface.axes.items(), idx):
        j = int(np.argmin(np.abs(np.asarray(vals) - target[name])))
        dist = max(dist, abs(i - j))
    return dist
