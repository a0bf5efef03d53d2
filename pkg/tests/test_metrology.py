import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmpdc.errors import (
    GainImplied,
    InvalidContrast,
    InvalidIndex,
    InvalidReflectivity,
    NegativeNetRate,
    NoFringeFound,
)
from qpmpdc.metrology import (
    BrightnessInput,
    FringeScan,
    airy_transmission,
    analyze_scan,
    brightness_lower_bound,
    contrast_from_loss,
    fresnel_reflectivity,
    fringe_contrast,
    lossless_contrast_bound,
    loss_from_contrast,
    synthetic_scan,
)

LOSS_GRID = list(itertools.product([0.05, 0.1, 0.2, 0.5], [0.1, 0.14, 0.2], [2.0, 4.0, 8.0]))


def airy_oracle(phase, r, loss_db_per_cm, length_cm):
    # the same resonator summed as a geometric series of round trips
    a = 10 ** (-loss_db_per_cm * length_cm / 10)
    field = sum((1 - r) * math.sqrt(a) * (r * a) ** k * np.exp(1j * k * phase) for k in range(400))
    return np.abs(field) ** 2


def test_airy_matches_round_trip_sum():
    phase = np.linspace(0, 4 * math.pi, 37)
    got = airy_transmission(phase, 0.3, 0.4, 3.0)
    assert np.allclose(got, airy_oracle(phase, 0.3, 0.4, 3.0), rtol=1e-12)


def test_contrast_of_constant_trace_is_zero():
    assert fringe_contrast(np.full(50, 3.0)) == 0.0
    with pytest.raises(NoFringeFound):
        analyze_scan(FringeScan(np.arange(50.0), np.full(50, 3.0), 0.14, 4.0))


def test_contrast_of_airy_trace_with_rt_01():
    # lossless facets of R = 0.1: Rt = 0.1
    scan = synthetic_scan(0.1, 0.0, 4.0, fringes=4, samples=800)
    assert fringe_contrast(scan) == pytest.approx(2 * 0.1 / 1.01, rel=1e-6)


def test_full_modulation_gives_unit_contrast():
    x = np.linspace(0, 4 * math.pi, 801)
    assert fringe_contrast(np.cos(x) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_trace_without_both_extrema():
    with pytest.raises(NoFringeFound):
        fringe_contrast(np.linspace(0.0, 1.0, 20))
    with pytest.raises(NoFringeFound):
        fringe_contrast(np.sin(np.linspace(0, 2, 50)))


def test_scan_validation():
    with pytest.raises(ValueError):
        FringeScan([0, 1, 1], [1, 1, 1], 0.1, 1.0)
    with pytest.raises(ValueError):
        FringeScan([0, 1, 2], [1, -1, 1], 0.1, 1.0)
    with pytest.raises(ValueError):
        FringeScan([0, 1, 2], [1, 1], 0.1, 1.0)
    with pytest.raises(InvalidReflectivity):
        FringeScan([0, 1, 2], [1, 1, 1], 1.0, 1.0)
    with pytest.raises(ValueError):
        FringeScan([0, 1, 2], [1, 1, 1], 0.1, 0.0)


@pytest.mark.parametrize("loss, r, length", LOSS_GRID)
def test_loss_round_trip(loss, r, length):
    scan = synthetic_scan(r, loss, length, fringes=5, samples=1000, chirp=0.3)
    res = analyze_scan(scan)
    assert res.loss_db_per_cm == pytest.approx(loss, rel=0.01)
    # the closed-form contrast inverts to machine precision
    assert loss_from_contrast(contrast_from_loss(r, loss, length), r, length) == pytest.approx(loss, rel=1e-9)


def test_reference_scale_case():
    k = contrast_from_loss(0.1406, 0.2, 4.0)
    assert k == pytest.approx(0.230736, abs=1e-6)
    assert loss_from_contrast(k, 0.1406, 4.0) == pytest.approx(0.2, rel=1e-9)
    # the rounded K = 0.2298 corresponds to R = 0.14
    assert contrast_from_loss(0.14, 0.2, 4.0) == pytest.approx(0.2298, abs=1e-4)


def test_coarse_sampling_still_recovers_the_loss():
    scan = synthetic_scan(0.1406, 0.2, 4.0, fringes=5, samples=150)
    assert analyze_scan(scan).loss_db_per_cm == pytest.approx(0.2, rel=0.01)


def test_lossless_bound_and_gain():
    r = 0.14
    bound = lossless_contrast_bound(r)
    assert loss_from_contrast(bound, r, 4.0) == 0.0
    assert loss_from_contrast(bound + 0.5e-9, r, 4.0) == 0.0
    with pytest.raises(GainImplied):
        loss_from_contrast(0.9, r, 4.0)
    for bad in (0.0, -0.1, 1.1, float("nan")):
        with pytest.raises(InvalidContrast):
            loss_from_contrast(bad, r, 4.0)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(InvalidReflectivity):
            loss_from_contrast(0.1, bad, 4.0)
    res = analyze_scan(synthetic_scan(r, 0.0, 4.0, samples=1000))
    assert res.loss_db_per_cm == pytest.approx(0.0, abs=1e-6)


@settings(max_examples=60)
@given(st.floats(min_value=0.05, max_value=0.3), st.floats(min_value=0.01, max_value=0.99),
       st.floats(min_value=0.01, max_value=0.99))
def test_loss_decreases_with_contrast(r, u, v):
    bound = lossless_contrast_bound(r)
    k1, k2 = sorted((u * bound, v * bound))
    if k1 < k2:
        assert loss_from_contrast(k1, r, 4.0) > loss_from_contrast(k2, r, 4.0)


def test_fresnel_reflectivity():
    assert fresnel_reflectivity(1.0) == 0.0
    assert fresnel_reflectivity(3.0) == 0.25
    assert fresnel_reflectivity(2.2) == pytest.approx(0.1406, abs=1e-4)
    for bad in (0.5, float("nan"), -2.0):
        with pytest.raises(InvalidIndex):
            fresnel_reflectivity(bad)


def test_brightness_reference_case():
    res = brightness_lower_bound(BrightnessInput(1.25e8, 0.0, 1.0, 25000.0, coupling_efficiency=0.2))
    assert res.lower_bound == 5000.0
    assert res.estimate == 25000.0
    assert brightness_lower_bound(BrightnessInput(1.25e8, 0.0, 1.0, 25000.0)).estimate is None
    assert brightness_lower_bound(BrightnessInput(7.0, 7.0, 1.0, 1.0)).lower_bound == 0.0


def test_brightness_errors():
    with pytest.raises(NegativeNetRate):
        brightness_lower_bound(BrightnessInput(1.0, 2.0, 1.0, 1.0))
    for kwargs in (dict(pump_power_mw=0.0), dict(bandwidth_ghz=-1.0), dict(coupling_efficiency=1.5),
                   dict(calibration_scale=0.0)):
        base = dict(detected_rate=1.0, background_rate=0.0, pump_power_mw=1.0, bandwidth_ghz=1.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            BrightnessInput(**base)


@settings(max_examples=60)
@given(st.integers(1, 10**9), st.integers(1, 1000), st.integers(1, 10**5), st.integers(1, 8))
def test_brightness_is_linear(net, power, bandwidth, factor):
    # integer-valued inputs keep the arithmetic exact
    b = brightness_lower_bound(BrightnessInput(float(net), 0.0, float(power), float(bandwidth))).lower_bound
    scaled = brightness_lower_bound(BrightnessInput(float(net * factor), 0.0, float(power), float(bandwidth)))
    assert scaled.lower_bound == pytest.approx(factor * b, rel=1e-15)
    wider = brightness_lower_bound(BrightnessInput(float(net), 0.0, float(power * factor), float(bandwidth)))
    assert wider.lower_bound == pytest.approx(b / factor, rel=1e-15)
    broader = brightness_lower_bound(BrightnessInput(float(net), 0.0, float(power), float(bandwidth * factor)))
    assert broader.lower_bound == pytest.approx(b / factor, rel=1e-15)


def test_calibration_scale_multiplies():
    base = brightness_lower_bound(BrightnessInput(1e6, 0.0, 2.0, 100.0)).lower_bound
    assert brightness_lower_bound(BrightnessInput(1e6, 0.0, 2.0, 100.0, calibration_scale=3.0)).lower_bound == 3 * base
