import json
import math

import numpy as np
import pytest

import errsense


def test_version_and_config_hash():
    assert errsense.__version__ == "0.1.0"
    h = errsense.config_hash({"seed": 1})
    assert len(h) == 16
    assert h == errsense.config_hash({"seed": 1})
    assert h != errsense.config_hash({"seed": 2})


def test_unknown_config_key():
    with pytest.raises(errsense.ConfigError):
        errsense.config_hash({"seed": 1, "bogus": 2})


def test_band_powers_of_alpha_tone():
    t = np.arange(256) / 256.0
    bands = errsense.band_powers(2.0 * np.sin(2 * np.pi * 10 * t), 256.0)
    assert len(bands) == 5
    assert bands[2] >= 0.95 * sum(bands)


def test_kernels_against_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(256)
    energies = errsense.wavelet_energies(x, 4)
    assert math.isclose(sum(energies), float(np.sum(x * x)), rel_tol=1e-6)
    assert np.allclose(errsense.dwt_roundtrip(x, 4), x, atol=1e-10)
    assert errsense.approximate_entropy(np.zeros(128)) == 0.0
    a1, a2 = errsense.ar_coefficients(x)
    assert abs(a1) < 0.3 and abs(a2) < 0.3


def test_filter_dc_rejection():
    taps = np.asarray(errsense.fir_bandpass(0.5, 40.0, 0.1, 0.5, 130.0))
    assert len(taps) % 2 == 1
    assert 20 * np.log10(abs(taps.sum())) <= -40.0


def test_stats():
    t, p = errsense.t_test_vs_chance([0.9, 0.88, 0.92, 0.87, 0.89])
    assert t == pytest.approx(45.5691, rel=1e-5)
    assert p < 1e-5
    assert errsense.power_sample_size("logistic_or") == 191
    m = errsense.compute_metrics([1, 0, 1, 0], [1, 1, 1, 1])
    assert m["precision"] == 0.5 and m["recall"] == 1.0
    assert errsense.rr_metrics([700, 900])[1] == pytest.approx(141.421356)


def test_train_predict_separable():
    rng = np.random.default_rng(1)
    y = np.arange(100) % 2
    X = rng.standard_normal((100, 2))
    X[:, 0] += 6 * y
    p = np.asarray(errsense.train_predict("random_forest", X, y, X, 3))
    assert np.mean((p >= 0.5) == y) >= 0.99


def test_verify_suite_passes():
    rows = errsense.verify({"seed": 1})
    assert rows and all(r["pass"] for r in rows)


def test_synth_and_pipeline(tmp_path):
    cfg = {
        "seed": 4,
        "synth": {"participants": 2, "block_duration_s": 40.0, "eye_tracking_participants": ["P1", "P2"]},
        "pipeline": {"modalities": ["ecg"], "strategies": ["lopo"]},
        "learn": {"random_forest": {"n_trees": 10}},
    }
    names = errsense.synth(cfg, tmp_path / "sessions")
    assert len(names) == 6
    errsense.pipeline(cfg, tmp_path / "sessions", tmp_path / "out")
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["provenance"]["config_hash"] == errsense.config_hash(cfg)
    assert (tmp_path / "out" / "report.csv").read_text().count("\n") == 2
