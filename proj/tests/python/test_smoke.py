import math

import numpy as np
import pytest

hbfpy = pytest.importorskip("hbfpy")


def test_steering_vector_shape_and_norm():
    geom = hbfpy.ArrayGeometry(6, 1)
    a = hbfpy.steering_vector(geom, 0.3, 0.1)
    a = np.asarray(a).ravel()
    assert a.shape == (6,)
    assert np.allclose(np.abs(a), 1.0)


def test_zadoff_chu_autocorrelation():
    zc = np.asarray(hbfpy.zadoff_chu(25)).ravel()
    assert len(zc) == 63
    for tau in (1, 5, 31):
        acc = np.sum(zc * np.conj(np.roll(zc, -tau)))
        assert abs(acc) < 1e-9


def test_quantize_and_apply():
    geom = hbfpy.ArrayGeometry(6, 1)
    a = np.asarray(hbfpy.steering_vector(geom, 0.5, 0.0)).ravel()
    w = a / np.linalg.norm(a)
    q = np.asarray(hbfpy.quantize_weight(w, hbfpy.RfHardwareModel())).ravel()
    gain = abs(hbfpy.apply_weight(q / np.linalg.norm(q), a)) ** 2
    assert gain > 6.0 * 10 ** (-0.5 / 10.0)  # within 0.5 dB of the full array gain


def test_eigen_oracle_matches_numpy():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    r = m @ m.conj().T
    vec, val, degenerate = hbfpy.eigen_oracle(r)
    ref = np.linalg.eigvalsh(r).max()
    assert val == pytest.approx(ref, rel=1e-10)
    assert not degenerate


def test_channel_and_correlation():
    geom = hbfpy.ArrayGeometry(6, 1)
    cl = hbfpy.PathCluster()
    cl.azimuth = 0.4
    cl.power_fraction = 1.0
    r = np.asarray(hbfpy.exact_correlation([cl], geom))
    assert r.shape == (6, 6)
    assert np.allclose(r, r.conj().T)
    h = np.asarray(hbfpy.generate_channel([cl], geom, [0.0], 0, 7))
    assert h.shape == (6, 1)
    assert np.linalg.norm(h) == pytest.approx(math.sqrt(6.0), rel=1e-9)


def test_lpf_design():
    taps = hbfpy.design_lpf()
    assert len(taps) % 2 == 1
    assert sum(taps) == pytest.approx(1.0, abs=1e-9)


def test_link_trial_runs():
    cl = hbfpy.PathCluster()
    cl.azimuth = 0.3
    cl.power_fraction = 1.0
    rec = hbfpy.run_link_trial([cl], 16, 5)
    assert rec.sync_ok
    assert len(rec.rows) == 16
    assert rec.rows[0].weight_id == 1
    rec2 = hbfpy.run_link_trial([cl], 16, 5)
    assert [r.snr_db for r in rec.rows] == [r.snr_db for r in rec2.rows]


def test_system_eval_runs():
    out = hbfpy.run_system_eval(drops=3, ms_per_floor=5, seed=9, workers=2)
    assert out["hybrid_mean"] > out["conventional_mean"]
    assert all(0.0 <= r <= 200e6 + 1e-3 for r in out["hybrid"])
