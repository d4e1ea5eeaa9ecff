"""Error detection from EEG, eye tracking and ECG: native kernels and pipeline commands."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    Error,
    approximate_entropy,
    ar_coefficients,
    band_powers,
    compute_metrics,
    detect_r_peaks,
    dwt_roundtrip,
    filter_zero_phase,
    fir_bandpass,
    hurst_exponent,
    power_sample_size,
    rr_metrics,
    t_test_vs_chance,
    wavelet_energies,
)

__version__ = _core.__version__


def _dump(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def config_hash(config=None):
    return _core.config_hash(_dump(config))


def canonical_config(config=None):
    return _json.loads(_core.canonical_config(_dump(config)))


def train_predict(kind, X, y, X_test, seed, config=None):
    """Fit a classifier on (X, y) and return error-class probabilities for X_test."""
    return _core.train_predict(kind, X, list(y), X_test, seed, _dump(config))


def synth(config, out):
    return _core.synth(_dump(config), str(out))


def pipeline(config, sessions, out):
    return _core.pipeline(_dump(config), str(sessions), str(out))


def verify(config=None):
    return [
        {"name": n, "measured": m, "tolerance": t, "pass": p}
        for n, m, t, p in _core.verify(_dump(config))
    ]
