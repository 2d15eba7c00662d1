import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dropletfsk.calibration import PAPER_THRESHOLDS
from dropletfsk.channel import ChannelModel, propagate
from dropletfsk.errors import ConfigError, OrderingError
from dropletfsk.events import DropletEventSeries
from dropletfsk.modem import (
    ERASURE,
    PROFILES,
    FskConfig,
    classify,
    compute_thresholds,
    decode,
    encode,
    instantaneous_frequencies,
    read_fsk_config,
    smooth,
    write_decoded_csv,
    write_fsk_config,
)
from dropletfsk.transmitter import ControllerModel, generate_droplets

DERIVED_MEANS = (1.6983333333, 3.2883333333, 4.8783333333, 6.4683333333)


def test_thresholds_examples():
    np.testing.assert_allclose(compute_thresholds([1, 3]), [2])
    np.testing.assert_allclose(compute_thresholds([2, 4, 6, 8]), [3, 5, 7])
    got = compute_thresholds(DERIVED_MEANS)
    np.testing.assert_allclose(got, [2.4933333333, 4.0833333333, 5.6733333333], atol=1e-9)
    assert np.max(np.abs(got - np.array(PAPER_THRESHOLDS))) <= 0.035


def test_thresholds_reject_unsorted():
    with pytest.raises(OrderingError):
        compute_thresholds([1.0, 1.0])
    with pytest.raises(ValueError):
        compute_thresholds([1.0])


def test_encode_examples():
    cfg = FskConfig(symbol_interval=20.0)
    s = encode([0, 3], cfg)
    assert s.segments == [(217.5, 0.0), (240.0, 20.0)]
    assert s.total_duration == 40.0
    empty = encode([], cfg)
    assert len(empty) == 0 and empty.total_duration == 0
    rep = encode([1, 1, 1], cfg)
    assert [p for p, _ in rep.segments] == [225.0] * 3
    with pytest.raises(ValueError):
        encode([4], cfg)
    with pytest.raises(ValueError):
        encode([-1], cfg)


@pytest.mark.parametrize(
    "ts, want",
    [([0, 0.5, 1.0], [(0.5, 2.0), (1.0, 2.0)]), ([0, 0.25, 0.75], [(0.25, 4.0), (0.75, 2.0)]), ([3.0], [])],
)
def test_instantaneous_frequencies(ts, want):
    t, f = instantaneous_frequencies(DropletEventSeries(ts, "arrival"))
    assert list(zip(t.tolist(), f.tolist())) == want


def test_smooth_examples():
    t = np.arange(5.0)
    raw = np.array([2.0, 4.0, 1.0, 7.0, 3.0])
    np.testing.assert_array_equal(smooth(t, raw, 1).smoothed, raw)
    np.testing.assert_allclose(smooth(t, np.full(5, 3.3), 4).smoothed, 3.3)
    np.testing.assert_allclose(smooth([0, 1], [2, 4], 2).smoothed, [2, 3])
    # brute-force trailing mean
    for k in range(1, 7):
        want = [raw[max(0, i - k + 1): i + 1].mean() for i in range(5)]
        np.testing.assert_allclose(smooth(t, raw, k).smoothed, want)


@given(st.lists(st.floats(0.1, 20.0), min_size=2, max_size=80), st.integers(1, 20))
def test_smooth_reduces_variance(vals, k):
    s = smooth(np.arange(len(vals)), vals, k)
    assert np.var(s.smoothed) <= np.var(s.raw) * (1 + 1e-9) + 1e-12


def test_classify_examples():
    assert classify(1.0, PAPER_THRESHOLDS) == 0
    assert classify(6.0, PAPER_THRESHOLDS) == 3
    assert classify(2.51, PAPER_THRESHOLDS) == 0
    assert classify(np.nextafter(2.51, 3), PAPER_THRESHOLDS) == 1


@given(st.lists(st.floats(0.1, 100.0), min_size=2, max_size=8, unique=True), st.floats(0.01, 100.0))
def test_classifier_self_consistent_and_scale_free(vals, c):
    means = np.sort(vals)
    if np.any(np.diff(means) <= 1e-9 * means[1:]):
        return
    th = compute_thresholds(means)
    assert [classify(m, th) for m in means] == list(range(means.size))
    th_c = compute_thresholds(means * c)
    assert [classify(m * c, th_c) for m in means] == list(range(means.size))


def test_config_validation():
    with pytest.raises(ConfigError):
        FskConfig(m=3)
    with pytest.raises(ConfigError):
        FskConfig(thresholds=(2.0, 1.0, 3.0))
    with pytest.raises(ConfigError):
        FskConfig(smoothing_k=0)
    assert FskConfig(symbol_interval=12.0).detection_window == 12.0
    assert PROFILES["paper-12s"].detection_window == 12.4


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "fsk.ini"
    write_fsk_config(path, PROFILES["paper-12s"])
    assert read_fsk_config(path) == PROFILES["paper-12s"]


def pipeline_arrivals(symbols, cfg, curve, delay=0.285):
    gen = generate_droplets(encode(symbols, cfg), ControllerModel(0.0), curve)
    return propagate(gen, ChannelModel(transit_delay=delay))


@pytest.mark.parametrize("interval, window", [(20.0, 20.0), (12.0, 12.4)])
def test_decode_zero_noise(curve, interval, window):
    cfg = FskConfig(symbol_interval=interval, detection_window=window)
    syms, diag = decode(pipeline_arrivals([0, 1, 2, 3], cfg, curve), cfg, 4)
    assert syms.tolist() == [0, 1, 2, 3]
    for d, mu in zip(diag, DERIVED_MEANS):
        assert d.statistic == pytest.approx(mu, rel=1e-6)
        assert d.n_estimates > 0
        assert d.start <= d.estimate_time <= d.end


def test_decode_constant_symbol(curve):
    cfg = FskConfig(symbol_interval=12.0, detection_window=12.4)
    syms, _ = decode(pipeline_arrivals([2] * 5, cfg, curve), cfg, 5)
    assert syms.tolist() == [2] * 5


def test_decode_empty_is_erased():
    syms, diag = decode(DropletEventSeries([], "arrival"), FskConfig(), 3)
    assert syms.tolist() == [ERASURE] * 3
    assert all(d.erased and d.n_estimates == 0 for d in diag)


def test_decode_picks_estimate_nearest_midpoint():
    cfg = FskConfig(m=2, symbol_pressures=(1.0, 2.0), thresholds=(3.0,), symbol_interval=10.0, smoothing_k=1)
    # estimates at 2, 4 (f=0.5) then 4.9 (f~1.11); 6, 10 (f=0.25); midpoint 5
    ts = [0.0, 2.0, 4.0, 4.9, 10.0]
    syms, diag = decode(DropletEventSeries(ts, "arrival"), cfg, 1)
    assert diag[0].estimate_time == 4.9
    assert diag[0].statistic == pytest.approx(1 / 0.9)


def test_decode_tie_prefers_earlier():
    cfg = FskConfig(m=2, symbol_pressures=(1.0, 2.0), thresholds=(3.0,), symbol_interval=10.0, smoothing_k=1)
    syms, diag = decode(DropletEventSeries([0.0, 4.0, 6.0], "arrival"), cfg, 1)
    assert diag[0].estimate_time == 4.0


def test_decoded_csv(tmp_path):
    cfg = FskConfig(symbol_interval=10.0)
    _, diag = decode(DropletEventSeries([1.0, 1.5, 2.0], "arrival"), cfg, 2)
    path = tmp_path / "d.csv"
    write_decoded_csv(path, diag)
    lines = path.read_text().splitlines()
    assert lines[0] == "window_index,midpoint_time_s,decision_freq_hz,symbol"
    assert lines[1] == "0,5.0,2.0,0"
    assert lines[2] == "1,15.0,,-1"


# Measured minimum intervals for exact zero-noise decoding (window = interval, 0.285 s delay).
@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=50), st.floats(3.0, 30.0))
def test_decode_encode_identity_unsmoothed(curve, symbols, interval):
    cfg = FskConfig(symbol_interval=interval, smoothing_k=1)
    syms, _ = decode(pipeline_arrivals(symbols, cfg, curve), cfg, len(symbols))
    assert syms.tolist() == symbols


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=50), st.floats(14.0, 40.0))
def test_decode_encode_identity_default_smoothing(curve, symbols, interval):
    cfg = FskConfig(symbol_interval=interval)
    syms, _ = decode(pipeline_arrivals(symbols, cfg, curve), cfg, len(symbols))
    assert syms.tolist() == symbols
