import numpy as np
import pytest
from hypothesis import given, strategies as st

from dropletfsk.calibration import (
    PAPER_SYMBOL_PRESSURES,
    PAPER_THRESHOLDS,
    CalibrationCurve,
    CalibrationPoint,
    OperatingRange,
    affine_midpoint_fit,
    characterize_setpoint,
    default_curve,
    fit_affine_calibration,
    mean_frequency_at,
    read_calibration_csv,
    variance_at,
    write_calibration_csv,
)
from dropletfsk.errors import InsufficientDataError, OrderingError, ParseError, RangeError
from dropletfsk.events import DropletEventSeries


def normal_equations_fit(x, y):
    """Ordinary least squares for a line by explicit sums (oracle)."""
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    a = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return a, (sy - a * sx) / n


# Frozen from normal_equations_fit on the published thresholds at midpoints 221.25/228.75/236.25.
PAPER_SLOPE = 0.212
PAPER_INTERCEPT = -44.41166666666667
PAPER_MEANS = (1.6983333333, 3.2883333333, 4.8783333333, 6.4683333333)
PAPER_MIDPOINTS = (2.4933333333, 4.0833333333, 5.6733333333)


def test_oracle_matches_frozen_values():
    mids = [221.25, 228.75, 236.25]
    a, b = normal_equations_fit(mids, PAPER_THRESHOLDS)
    assert a == pytest.approx(PAPER_SLOPE, abs=1e-12)
    assert b == pytest.approx(PAPER_INTERCEPT, abs=1e-9)


def test_paper_fit():
    a, b = affine_midpoint_fit(PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS)
    assert a == pytest.approx(PAPER_SLOPE, rel=1e-10)
    assert b == pytest.approx(PAPER_INTERCEPT, rel=1e-10)
    curve = fit_affine_calibration(PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS)
    np.testing.assert_allclose(curve.means, PAPER_MEANS, atol=1e-9)
    assert np.all(curve.variances == 0)
    mids = 0.5 * (curve.means[:-1] + curve.means[1:])
    np.testing.assert_allclose(mids, PAPER_MIDPOINTS, atol=1e-9)
    assert np.max(np.abs(mids - PAPER_THRESHOLDS)) <= 0.035


def test_shipped_default_matches_fit():
    fitted = fit_affine_calibration(PAPER_SYMBOL_PRESSURES, PAPER_THRESHOLDS)
    np.testing.assert_allclose(default_curve().means, fitted.means, rtol=1e-15)
    np.testing.assert_array_equal(default_curve().pressures, PAPER_SYMBOL_PRESSURES)


@pytest.mark.parametrize(
    "pressures, thresholds",
    [([0.0, 2.0], [1.0]), ([210.0, 220.0, 230.0], [2.0, 4.0])],
)
def test_consistent_systems_fit_exactly(pressures, thresholds):
    curve = fit_affine_calibration(pressures, thresholds)
    mids = 0.5 * (curve.means[:-1] + curve.means[1:])
    np.testing.assert_allclose(mids, thresholds, rtol=1e-12)


def test_identity_fit_example():
    a, b = affine_midpoint_fit([0.0, 2.0], [1.0])
    # one equation, two unknowns: lstsq picks a minimum-norm solution hitting f(1) = 1
    assert a * 1.0 + b == pytest.approx(1.0)


def test_fit_errors():
    with pytest.raises(InsufficientDataError):
        fit_affine_calibration([225.0], [])
    with pytest.raises(OrderingError):
        fit_affine_calibration([210.0, 220.0, 230.0], [4.0, 2.0])
    with pytest.raises(ValueError):
        fit_affine_calibration([210.0, 220.0, 240.0], [2.0, 4.0])


@given(
    a=st.floats(0.01, 2.0),
    b=st.floats(-50.0, 50.0),
    p0=st.floats(100.0, 300.0),
    step=st.floats(0.5, 20.0),
    m=st.integers(2, 8),
)
def test_affine_consistent_thresholds_reproduced(a, b, p0, step, m):
    p = p0 + step * np.arange(m)
    mids = 0.5 * (p[:-1] + p[1:])
    target = a * mids + b
    if np.any(a * p + b <= 0):
        return
    curve = fit_affine_calibration(p, target)
    got = 0.5 * (curve.means[:-1] + curve.means[1:])
    np.testing.assert_allclose(got, target, rtol=1e-9, atol=1e-9 * np.abs(target).max())


def test_knot_and_midpoint_queries():
    single = CalibrationCurve((CalibrationPoint(225.0, 3.288),))
    assert mean_frequency_at(single, 225.0) == 3.288
    two = CalibrationCurve.from_arrays([200.0, 210.0], [1.0, 3.0], [0.0, 2.0])
    assert mean_frequency_at(two, 205.0) == pytest.approx(2.0)
    assert variance_at(two, 205.0) == pytest.approx(1.0)
    assert variance_at(two, 210.0) == 2.0
    assert mean_frequency_at(default_curve(), 217.5) == pytest.approx(1.698, abs=5e-4)


def test_zero_variance_curve():
    c = default_curve()
    for p in np.linspace(217.5, 240, 11):
        assert variance_at(c, p) == 0


@pytest.mark.parametrize("p", [217.4, 240.01, 0.0])
def test_out_of_range_refused(p):
    with pytest.raises(RangeError):
        mean_frequency_at(default_curve(), p)
    with pytest.raises(RangeError):
        variance_at(default_curve(), p)


@given(st.floats(217.5, 240.0), st.floats(217.5, 240.0))
def test_interpolation_monotone(p1, p2):
    c = default_curve()
    lo, hi = sorted((p1, p2))
    assert mean_frequency_at(c, lo) <= mean_frequency_at(c, hi)
    if hi > lo:
        assert mean_frequency_at(c, lo) < mean_frequency_at(c, hi)


def test_curve_invariants():
    with pytest.raises(OrderingError):
        CalibrationCurve.from_arrays([200.0, 200.0], [1.0, 2.0])
    with pytest.raises(OrderingError):
        CalibrationCurve.from_arrays([200.0, 210.0], [2.0, 1.0])
    with pytest.raises(InsufficientDataError):
        CalibrationCurve(())
    with pytest.raises(ValueError):
        CalibrationPoint(220.0, 0.0)
    with pytest.raises(ValueError):
        CalibrationPoint(220.0, 1.0, -1.0)
    with pytest.raises(RangeError):
        CalibrationCurve.from_arrays([200.0, 210.0], [1.0, 2.0], operating_range=OperatingRange())


def test_operating_range_defaults():
    r = OperatingRange()
    assert (r.p_cont, r.p_disp_min, r.p_disp_max) == (1200.0, 205.0, 250.0)
    with pytest.raises(ValueError):
        OperatingRange(p_disp_min=250.0, p_disp_max=205.0)
    with pytest.raises(ValueError):
        OperatingRange(p_cont=0.0)


def test_characterize_setpoint_examples():
    assert characterize_setpoint([0, 0.5, 1.0, 1.5]) == (2.0, 0.0)
    mean, var = characterize_setpoint([0, 0.5, 0.75])
    assert mean == pytest.approx(3.0)
    assert var == pytest.approx(2.0)
    ev = DropletEventSeries(np.arange(21) * 0.25)
    assert characterize_setpoint(ev) == (4.0, 0.0)


def test_characterize_setpoint_errors():
    with pytest.raises(InsufficientDataError):
        characterize_setpoint([0.0, 0.5])
    with pytest.raises(OrderingError):
        characterize_setpoint([0.0, 0.5, 0.5])


@given(st.floats(0.01, 5.0), st.integers(3, 40))
def test_characterize_constant_interval(delta, n):
    ev = np.arange(n) * delta
    mean, var = characterize_setpoint(ev)
    assert mean == pytest.approx(1 / delta, rel=1e-9)
    assert var == pytest.approx(0.0, abs=1e-9 * mean**2)


def test_csv_round_trip(tmp_path):
    c = default_curve().with_variances([0.01, 0.02, 0.03, 0.04])
    path = tmp_path / "cal.csv"
    write_calibration_csv(path, c)
    assert path.read_text().splitlines()[0] == "pressure_mbar,mean_freq_hz,freq_var_hz2"
    back = read_calibration_csv(path)
    np.testing.assert_array_equal(back.means, c.means)
    np.testing.assert_array_equal(back.variances, c.variances)


@pytest.mark.parametrize(
    "body, word",
    [
        ("225,3.0,0\n217.5,2.0,0\n", "unsorted"),
        ("225,3.0,0\n225,4.0,0\n", "duplicate"),
        ("225,abc,0\n", "non-numeric"),
    ],
)
def test_csv_strict(tmp_path, body, word):
    path = tmp_path / "cal.csv"
    path.write_text("pressure_mbar,mean_freq_hz,freq_var_hz2\n" + body)
    with pytest.raises(ParseError, match=word):
        read_calibration_csv(path)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "cal.csv"
    path.write_text("p,f,v\n225,3,0\n")
    with pytest.raises(ParseError, match="line 1"):
        read_calibration_csv(path)
