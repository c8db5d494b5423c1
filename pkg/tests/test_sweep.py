import csv
import json

import numpy as np
import pytest

from cdfir import Experiment, ParameterError, run
from cdfir.filter_design import FilterSpec
from cdfir.sweep import DEFAULT_ALPHA_GRID, DEFAULT_X_GRID, SweepSurface, cell_distance, sweep_gs, sweep_rc

SMALL = 2**14


@pytest.fixture
def template():
    return Experiment(n_symbols=SMALL, filter=FilterSpec("rc"))


def test_default_grids():
    np.testing.assert_allclose(DEFAULT_ALPHA_GRID, np.arange(1, 10) / 10)
    np.testing.assert_allclose(DEFAULT_X_GRID, np.arange(4, 13) / 10)


def test_single_point_rc(template):
    s = sweep_rc(template, [0.4], [0.8])
    assert s.evm_grid.shape == (1, 1)
    assert s.evm_grid[0, 0] == run(template.with_filter(alpha=0.4, x=0.8)).evm_percent


def test_single_point_gs(template):
    s = sweep_gs(template, [0.9])
    assert s.evm_grid[0] == run(template.with_filter(kind="gs", x=0.9)).evm_percent


def test_degenerate_cells_equal_fir(template):
    fir = run(template.with_filter(kind="fir")).evm_percent
    s = sweep_rc(template, [0.1, 0.2], [0.7, 2.4, 2.5])
    for i, a in enumerate(s.axes["alpha"]):
        for j, x in enumerate(s.axes["x"]):
            if x * (1 - a) / 2 >= 1:
                assert s.evm_grid[i, j] == fir
    assert s.evm_grid[0, 0] != fir


def test_wide_gaussian_approaches_fir(template):
    fir = run(template.with_filter(kind="fir")).evm_percent
    s = sweep_gs(template, [10.0])
    assert abs(s.evm_grid[0] - fir) < 0.2


def test_shape_and_determinism(template):
    a = sweep_rc(template, [0.2, 0.3, 0.5], [0.6, 0.7])
    b = sweep_rc(template, [0.2, 0.3, 0.5], [0.6, 0.7])
    assert a.evm_grid.shape == (3, 2)
    np.testing.assert_array_equal(a.evm_grid, b.evm_grid)
    assert a.evm_grid[a.argmin_index] == a.evm_grid.min()


def test_parallel_matches_serial(template):
    args = (template, [0.2, 0.3], [0.6, 0.7])
    np.testing.assert_array_equal(sweep_rc(*args).evm_grid, sweep_rc(*args, n_jobs=2).evm_grid)


def test_grid_order_is_alpha_major(template):
    s = sweep_rc(template, [0.2, 0.6], [0.5, 0.9])
    assert s.evm_grid[1, 0] == run(template.with_filter(alpha=0.6, x=0.5)).evm_percent


def test_tie_breaking(template):
    grid = np.array([[1.0, 0.5], [0.5, 0.5]])
    s = SweepSurface("rc", {"alpha": np.array([0.1, 0.2]), "x": np.array([0.4, 0.5])}, grid, template)
    assert s.argmin_index == (1, 0)
    assert s.argmin == {"alpha": 0.2, "x": 0.4, "evm_percent": 0.5}
    assert cell_distance(s, alpha=0.1, x=0.5) == 1


@pytest.mark.parametrize("alphas, xs", [([], [0.5]), ([0.0], [0.5]), ([1.1], [0.5]),
                                        ([0.3], [2.6]), ([0.3], [np.nan])])
def test_grid_validation(template, alphas, xs):
    with pytest.raises(ParameterError):
        sweep_rc(template, alphas, xs)


def test_point_errors_carry_coordinates(template):
    bad = Experiment(n_symbols=SMALL, filter=FilterSpec("rc")).with_link(fiber_length=0.0)
    with pytest.raises(ParameterError, match="grid point"):
        sweep_rc(bad, [0.3], [0.7])


def test_csv_and_sidecar(template, tmp_path):
    s = sweep_rc(template, [0.2, 0.3], [0.6, 0.7])
    with s.to_csv(tmp_path / "rc.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["alpha", "x", "evm_percent"] and len(rows) == 4
    assert float(rows[1]["evm_percent"]) == s.evm_grid[0, 1]
    side = json.loads(s.to_json(tmp_path / "rc.json").read_text())
    assert side["argmin"] == s.argmin and side["experiment"]["n_symbols"] == SMALL
    g = sweep_gs(template, [0.6, 0.7])
    with g.to_csv(tmp_path / "gs.csv").open() as fh:
        assert next(csv.reader(fh)) == ["x", "evm_percent"]


@pytest.mark.slow
def test_argmin_cell_shared_by_eight_of_nine_links():
    cells = {}
    for rate in (10, 20, 30):
        for km in (500, 1000, 1500):
            exp = Experiment(filter=FilterSpec("rc")).with_link(symbol_rate=rate * 1e9, fiber_length=km * 1e3)
            cells[(rate, km)] = sweep_rc(exp).argmin_index
    reference = cells[(20, 1000)]
    agreeing = sum(c == reference for c in cells.values())
    assert agreeing >= 8, cells
