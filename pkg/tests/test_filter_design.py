import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdfir import LinkParams, ParameterError, tap_count
from cdfir.filter_design import (
    FilterSpec,
    TapVector,
    WindowSpec,
    base_taps,
    design,
    design_fir,
    design_transversal,
    design_weighted,
    gaussian_t0,
    sample_window,
    sech_window,
    super_gaussian_window,
    window_coordinates,
    window_gs,
    window_rc,
)
from cdfir.params import SPEED_OF_LIGHT

# mpmath, 40 digits, at 20 GBaud / 1000 km / S=2
PHASE_STEP_K1 = -0.015313244401249132393
TAP_MODULUS = 0.069816596038951806386
GS_INTENSITY_AT_1 = 0.059061726769287919773
GS_AMPLITUDE_AT_HALF = 0.24302618535723248226


def test_tap_modulus_oracle(link):
    np.testing.assert_allclose(np.abs(base_taps(link).taps), TAP_MODULUS, rtol=1e-12)


def test_centre_tap_phase(link):
    a = base_taps(link)
    assert np.angle(a.taps[a.center_index]) == pytest.approx(math.pi / 4, abs=1e-14)


def test_negative_dispersion_centre_phase(link):
    a = base_taps(link.replace(dispersion=-link.dispersion))
    assert np.angle(a.taps[a.center_index]) == pytest.approx(-math.pi / 4, abs=1e-14)


def test_phase_step_oracle(link):
    a = base_taps(link)
    c = a.center_index
    step = np.angle(a.taps[c + 1] / a.taps[c])
    assert step == pytest.approx(PHASE_STEP_K1, abs=1e-12)


def test_phase_law_all_taps(link):
    a = base_taps(link)
    b = link.accumulated_dispersion
    expected = -np.pi * SPEED_OF_LIGHT * link.ts**2 * a.k.astype(float) ** 2 / b
    diff = np.angle(a.taps / a.taps[a.center_index]) - expected
    wrapped = np.angle(np.exp(1j * diff))
    assert np.max(np.abs(wrapped)) < 1e-9


def test_base_taps_zero_dispersion():
    with pytest.raises(ParameterError):
        base_taps(LinkParams.from_engineering(length_km=0))


def test_design_fir_matches_base_and_tap_count(link):
    f, b = design_fir(link), base_taps(link)
    np.testing.assert_array_equal(f.taps, b.taps)
    assert len(f) == tap_count(link) == 205


valid_links = st.builds(
    LinkParams.from_engineering,
    dispersion_ps_nm_km=st.floats(1.0, 25.0) | st.floats(-25.0, -1.0),
    wavelength_nm=st.floats(1260, 1625),
    length_km=st.integers(1, 20).map(lambda n: 100.0 * n),
    symbol_rate_gbaud=st.floats(5, 40),
    samples_per_symbol=st.integers(2, 4),
)


@settings(max_examples=100, deadline=None)
@given(valid_links)
def test_constant_modulus_property(p):
    m = np.abs(design_fir(p).taps)
    assert (m.max() - m.min()) / m.mean() < 1e-12


def test_window_rc_values():
    a, x = 0.3, 0.7
    assert window_rc(0.0, a, x) == 1.0
    assert window_rc(x / 2, a, x) == pytest.approx(0.5, abs=1e-12)
    assert window_rc(-x / 2, a, x) == pytest.approx(0.5, abs=1e-12)
    assert window_rc((1 + a) * x / 2, a, x) == pytest.approx(0.0, abs=1e-12)
    assert window_rc(0.5, a, x) == 0.0
    assert window_rc((1 - a) * x / 2 - 1e-9, a, x) == 1.0


@pytest.mark.parametrize("alpha", [0.0, -0.1, 1.01, math.nan])
def test_window_rc_rejects_alpha(alpha):
    with pytest.raises(ParameterError):
        window_rc(0.1, alpha, 0.7)


@pytest.mark.parametrize("width", ["amplitude", "intensity"])
def test_window_gs_at_t0(width):
    t0 = gaussian_t0(0.7, width)
    assert window_gs(0.0, 0.7, width) == 1.0
    assert window_gs(t0, 0.7, width) == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_window_gs_half_point_amplitude():
    assert window_gs(0.35, 0.7) == pytest.approx(0.5, abs=1e-12)
    assert window_gs(0.5, 0.7) == pytest.approx(GS_AMPLITUDE_AT_HALF, abs=1e-14)


def test_window_gs_intensity_convention():
    # the squared weight has its half point at x/2
    assert window_gs(0.35, 0.7, "intensity") ** 2 == pytest.approx(0.5, abs=1e-12)
    assert window_gs(1.0, 0.7, "intensity") == pytest.approx(GS_INTENSITY_AT_1, abs=1e-14)


def test_window_coordinates():
    t = window_coordinates(5)
    np.testing.assert_allclose(t, [-0.4, -0.2, 0, 0.2, 0.4])
    np.testing.assert_allclose(window_coordinates(5, "doubled"), 2 * t)
    with pytest.raises(ParameterError):
        window_coordinates(4)
    with pytest.raises(ParameterError):
        window_coordinates(5, "other")


@pytest.mark.parametrize("n", [1, 7, 205])
def test_rectangular_window_is_ones(n):
    np.testing.assert_array_equal(sample_window(WindowSpec.rectangular(), n), np.ones(n))


@pytest.mark.parametrize("mapping", ["physical", "doubled"])
def test_flat_top_covers_range(mapping):
    f = sample_window(WindowSpec.raised_cosine(0.1, 2.5, mapping=mapping), 205)
    np.testing.assert_array_equal(f, np.ones(205))


def test_support_edge_doubled_mapping():
    f = sample_window(WindowSpec.raised_cosine(0.3, 0.7, mapping="doubled"), 205)
    k = np.arange(-102, 103)
    assert np.all(f[np.abs(k) >= 47] == 0)
    assert np.all(f[np.abs(k) <= 46] > 0)


def test_support_edge_physical_mapping():
    f = sample_window(WindowSpec.raised_cosine(0.3, 0.7), 205)
    k = np.arange(-102, 103)
    edge = 0.455 * 205
    assert np.all(f[np.abs(k) > edge] == 0)
    assert np.all(f[np.abs(k) < edge] > 0)


def test_sample_window_rejects_even_n():
    with pytest.raises(ParameterError):
        sample_window(WindowSpec.rectangular(), 10)


@pytest.mark.parametrize("func, msg", [
    (lambda t: np.exp(t), "symmetric|\\[0, 1\\]"),
    (lambda t: 0.5 * np.ones_like(t), "f\\(0\\)"),
    (lambda t: 2 * np.ones_like(t), "\\[0, 1\\]"),
    (lambda t: np.ones(3), "one weight"),
])
def test_custom_window_checks(func, msg):
    with pytest.raises(ParameterError, match=msg):
        sample_window(WindowSpec.custom(func), 9)


@pytest.mark.parametrize("factory", [lambda: super_gaussian_window(0.7), lambda: sech_window(0.7)])
def test_extension_windows_are_valid(factory, link):
    f = factory()
    assert float(f(np.array([0.35]))[0]) == pytest.approx(0.5, abs=1e-12)
    tv = design_weighted(link, WindowSpec.custom(f))
    assert len(tv) == 205


def test_rectangular_weighting_bit_identical(link):
    np.testing.assert_array_equal(design_weighted(link, WindowSpec.rectangular()).taps,
                                  design_fir(link).taps)


def test_degenerate_rc_bit_identical(link):
    for mapping in ("physical", "doubled"):
        tv = design_weighted(link, WindowSpec.raised_cosine(0.1, 2.5, mapping=mapping))
        np.testing.assert_array_equal(tv.taps, design_fir(link).taps)


def test_rc_modulus_follows_window(link):
    spec = WindowSpec.raised_cosine(0.3, 0.7)
    tv = design_weighted(link, spec)
    np.testing.assert_allclose(np.abs(tv.taps), TAP_MODULUS * sample_window(spec, 205), rtol=1e-12, atol=0)
    assert len(tv) == 205  # zero-weight taps are kept


def test_gaussian_edge_ratio_intensity(link):
    tv = design_weighted(link, WindowSpec.gaussian(0.7, mapping="doubled", gaussian_width="intensity"))
    a = np.abs(tv.taps)
    # doubled mapping puts the outermost tap at t = 2*102/205, just inside 1
    t_edge = 2 * 102 / 205
    assert a[-1] / a[tv.center_index] == pytest.approx(window_gs(t_edge, 0.7, "intensity"), rel=1e-12)
    expected = math.exp(-(2 * math.log(2)) / 0.49)
    assert expected == pytest.approx(GS_INTENSITY_AT_1, rel=1e-15)
    assert round(expected, 4) == 0.0591


@pytest.mark.parametrize("spec", [
    WindowSpec.rectangular(), WindowSpec.raised_cosine(0.3, 0.7), WindowSpec.gaussian(0.7),
    WindowSpec.raised_cosine(0.5, 0.9, mapping="doubled"), WindowSpec.custom(sech_window(0.6)),
])
def test_symmetry_and_modulus_bound(link, spec):
    tv = design_weighted(link, spec)
    np.testing.assert_array_equal(tv.taps, tv.taps[::-1])
    assert np.all(np.abs(tv.taps) <= np.abs(base_taps(link).taps))


def test_transversal_symmetric(link):
    tv = design_transversal(link)
    np.testing.assert_allclose(tv.taps, tv.taps[::-1], rtol=0, atol=1e-15)


def test_transversal_single_tap():
    p = LinkParams.from_engineering(length_km=1, span_km=1)
    assert tap_count(p) == 1
    tv = design_transversal(p, rect_bandwidth_hz=1 / p.ts)
    assert len(tv) == 1
    assert abs(tv.taps[0]) == pytest.approx(1.0, abs=5e-3)


def test_transversal_edges_roll_off(link):
    m = np.abs(design_transversal(link).taps)
    assert (m.max() - m.min()) / m.mean() > 0.1
    c = len(m) // 2
    assert m[:10].mean() < 0.5 * m[c - 10:c + 10].mean()


@pytest.mark.parametrize("kwargs", [
    {"rect_bandwidth_hz": 0.0}, {"rect_bandwidth_hz": 1e12}, {"fft_length": 1000},
    {"fft_length": 512},
])
def test_transversal_rejects(link, kwargs):
    with pytest.raises(ParameterError):
        design_transversal(link, **kwargs)


def test_normalize_dc(link):
    tv = design(link, FilterSpec("rc", normalize_dc=True))
    assert abs(tv.taps.sum()) == pytest.approx(1.0, abs=1e-12)


def test_design_dispatch(link):
    assert len(design(link, FilterSpec("none"))) == 1
    for kind in ("fir", "transversal", "rc", "gs"):
        tv = design(link, FilterSpec(kind))
        assert len(tv) == 205
        assert tv.design_meta["ts"] == link.ts
    with pytest.raises(ParameterError):
        FilterSpec("kaiser")
    with pytest.raises(ParameterError):
        FilterSpec("rc", alpha=1.5)


def test_tap_vector_is_immutable(link):
    tv = design_fir(link)
    with pytest.raises(ValueError):
        tv.taps[0] = 0
    with pytest.raises(ParameterError):
        TapVector(np.ones(4, complex), 2)
