import json
import math

import numpy as np
import pytest

import dsa_sim

QUICK = json.dumps(
    {
        "sensor": {"avg_vectors": 16},
        "dsa": {"bands_hz": [[2420e6, 2426e6]]},
        "scan": {"bands_hz": [[2430e6, 2436e6]]},
        "pu_sweep": {"start_offset_hz": 0, "stop_offset_hz": 6e5, "step_hz": 3e5, "packets_per_point": 200},
        "seed_count": 1,
    }
)


def test_default_layout():
    layout = dsa_sim.fft_layout(dsa_sim.SensorConfig())
    assert (layout.fft_size, layout.bin_start, layout.bin_stop, layout.usable_bins) == (640, 80, 560, 480)
    assert dsa_sim.chunk_bandwidth(dsa_sim.SensorConfig()) == pytest.approx(3e6)


def test_window_matches_closed_form():
    n = 64
    a = (0.35875, 0.48829, 0.14128, 0.01168)
    k = np.arange(n)
    x = 2 * np.pi * k / (n - 1)
    expected = a[0] - a[1] * np.cos(x) + a[2] * np.cos(2 * x) - a[3] * np.cos(3 * x)
    np.testing.assert_allclose(dsa_sim.blackman_harris(n), expected, atol=1e-15)


def test_sense_dwell_zero_input():
    cfg = dsa_sim.SensorConfig(avg_vectors=4)
    out = dsa_sim.sense_dwell(np.zeros(640 * 4, dtype=complex), 2440e6, cfg)
    assert len(out["energy"]) == 480
    assert np.all(out["energy"] == 0.0)


def test_capture_is_deterministic():
    cfg = json.dumps({"environment": {"frontend": {"tune_delay_s": 0.0}}})
    a = dsa_sim.capture(cfg, 7, 2440e6, 1e-3)
    b = dsa_sim.capture(cfg, 7, 2440e6, 1e-3)
    assert a.dtype == np.complex128
    assert a.size == 4000
    np.testing.assert_array_equal(a, b)


def test_sweep_covers_band():
    m = dsa_sim.sweep(QUICK, 1, 2420e6, 2426e6)
    assert len(m["carrier_hz"]) == 960
    assert m["carrier_hz"][0] == pytest.approx(2420e6)
    np.testing.assert_allclose(np.diff(m["carrier_hz"]), 6250.0)
    assert np.all(np.diff(m["carrier_hz"]) > 0)


def test_link_stats_without_pu():
    s = dsa_sim.link_stats(QUICK, 1, None, 100)
    assert s["sent"] == 100
    assert s["psr"] == pytest.approx(1.0)


def test_static_and_dsa_runs():
    static_avg, static_seed = dsa_sim.run_static(QUICK)
    dsa_avg, _ = dsa_sim.run_dsa(QUICK)
    assert [r["pu_offset_hz"] for r in static_avg] == [0.0, 3e5, 6e5]
    assert len(static_seed) == 3
    assert static_avg[0]["psr"] <= 0.05
    assert dsa_avg[0]["psr"] > static_avg[0]["psr"]
    for row in dsa_avg:
        assert 0.0 <= row["psr"] <= row["prr"] <= 1.0
        assert not math.isnan(row["sensing_time_s"])


def test_invalid_config_raises():
    with pytest.raises(dsa_sim.SimError):
        dsa_sim.run_static(json.dumps({"sensor": {"avg_vectors": 0}}))
