# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

from ssmseg.config import MfccConfig
from ssmseg.core.errors import AudioTooShort, ConfigError
from ssmseg.pipeline.audio_io import AudioBuffer
from ssmseg.pipeline.features import (
    FeatureMatrix,
    compute_mfcc,
    frame_signal,
    hz_to_mel,
    log_mel_energies,
    mel_edges_hz,
    mel_filterbank,
    mel_to_hz,
    num_frames,
)
from .utils import assert_equal


def oracle_mfcc(samples, k, sample_rate=16000, cfg=MfccConfig()):
    """Straightforward per-frame MFCC with explicit sums, no FFT."""
    frame_len, hop = cfg.frame_len(sample_rate), cfg.hop_len(sample_rate)
    start = k * hop
    frame = []
    for n in range(start, start + frame_len):
        previous = samples[n - 1] if n > 0 else 0.0
        frame.append(samples[n] - cfg.preemph * previous if n > 0 else samples[n])
    frame = np.array(frame)
    window = 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(frame_len) / (frame_len - 1))
    x = frame * window

    n_bins = cfg.n_fft // 2 + 1
    bins = np.arange(n_bins)[:, None]
    ts = np.arange(frame_len)[None, :]
    spectrum = (x[None, :] * np.exp(-2j * np.pi * bins * ts / cfg.n_fft)).sum(axis=1)
    power = np.abs(spectrum) ** 2

    fmax = sample_rate / 2
    lo, hi = 2595 * math.log10(1 + cfg.mel_fmin / 700), 2595 * math.log10(1 + fmax / 700)
    mels = [lo + (hi - lo) * i / (cfg.n_mels + 1) for i in range(cfg.n_mels + 2)]
    edges = [700 * (10 ** (m / 2595) - 1) for m in mels]
    energies = []
    for m in range(cfg.n_mels):
        left, centre, right = edges[m], edges[m + 1], edges[m + 2]
        total = 0.0
        for b in range(n_bins):
            f = b * sample_rate / cfg.n_fft
            if left < f < right:
                weight = (f - left) / (centre - left) if f <= centre else (right - f) / (right - centre)
                total += weight * power[b]
        energies.append(math.log(total + cfg.log_floor))

    coeffs = []
    size = cfg.n_mels
    for c in range(cfg.n_coeffs):
        scale = math.sqrt(1 / size) if c == 0 else math.sqrt(2 / size)
        coeffs.append(
            scale * sum(e * math.cos(math.pi * c * (2 * m + 1) / (2 * size)) for m, e in enumerate(energies))
        )
    return np.array(coeffs)


def test_matches_oracle_on_random_frames():
    rng = np.random.default_rng(3)
    samples = np.clip(0.3 * rng.standard_normal(16000 * 3), -1.0, 1.0)
    features = compute_mfcc(AudioBuffer(samples, 16000))
    for k in rng.choice(len(features), size=100, replace=False):
        expected = oracle_mfcc(samples, int(k))
        actual = features.vectors[k]
        assert np.all(np.abs(actual - expected) <= 1e-6 * np.maximum(1.0, np.abs(expected)))


@pytest.mark.parametrize(
    "n_samples,expected",
    [(399, 0), (400, 1), (559, 1), (560, 2), (16000, 98)],
)
def test_num_frames(n_samples, expected):
    assert_equal(num_frames(n_samples, 400, 160), expected)


def test_frame_geometry():
    features = compute_mfcc(AudioBuffer(np.zeros(16000), 16000))
    assert_equal(features.vectors.shape, (98, 13))
    assert_equal(features.hop_s, 0.01)
    assert_equal(features.frame_len_s, 0.025)
    assert math.isclose(float(features.frame_time(0)), 0.0125)
    assert math.isclose(float(features.frame_time(10)), 0.1125)
    assert_equal(features.frame_index(65.0), 6500)


def test_silence():
    features = compute_mfcc(AudioBuffer(np.zeros(4000), 16000))
    expected_c0 = math.sqrt(26) * math.log(1e-10)
    np.testing.assert_allclose(features.vectors[:, 0], expected_c0, rtol=1e-12)
    np.testing.assert_allclose(features.vectors[:, 1:], 0.0, atol=1e-9)


def test_too_short():
    with pytest.raises(AudioTooShort):
        compute_mfcc(AudioBuffer(np.zeros(399), 16000))


def test_invalid_config():
    with pytest.raises(ConfigError):
        compute_mfcc(AudioBuffer(np.zeros(1600), 16000), MfccConfig(n_coeffs=30))


def test_sine_peaks_in_nearest_filter():
    cfg = MfccConfig()
    samples = np.sin(2 * np.pi * 1000 * np.arange(16000) / 16000)
    emphasized = np.concatenate([samples[:1], samples[1:] - cfg.preemph * samples[:-1]])
    frames = frame_signal(emphasized, cfg.frame_len(16000), cfg.hop_len(16000))
    assert_equal(frames.shape[0], 98)
    mean_log_energy = log_mel_energies(frames, 16000, cfg).mean(axis=0)
    centres = mel_edges_hz(cfg.n_mels, 0.0, 8000.0)[1:-1]
    assert_equal(int(np.argmax(mean_log_energy)), int(np.argmin(np.abs(centres - 1000))))
    assert_equal(len(compute_mfcc(AudioBuffer(samples, 16000))), 98)


def speech_like(n_samples, seed=0, peak=0.095):
    """White noise plus an amplitude-modulated 120 Hz harmonic series."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / 16000
    voiced = sum(np.sin(2 * np.pi * 120 * h * t + h) / h for h in range(1, 30))
    voiced *= 1 - 0.4 * (1 - np.cos(2 * np.pi * 4 * t))
    samples = voiced + 0.5 * rng.standard_normal(n_samples)
    return samples * (peak / np.max(np.abs(samples)))


def test_gain_moves_only_c0():
    gain = 10.0
    samples = speech_like(16000)
    base = compute_mfcc(AudioBuffer(samples, 16000)).vectors
    loud = compute_mfcc(AudioBuffer(samples * gain, 16000)).vectors
    shift = loud - base
    np.testing.assert_allclose(shift[:, 0], math.sqrt(26) * 2 * math.log(gain), rtol=1e-6)
    np.testing.assert_allclose(shift[:, 1:], 0.0, atol=1e-6)


def test_frame_count_for_random_lengths():
    rng = np.random.default_rng(12)
    lengths = [0, 399, 400, 401, 4000] + rng.integers(0, 4001, size=40).tolist()
    for n in lengths:
        starts = [s for s in range(0, n, 160) if s + 400 <= n]
        assert_equal(num_frames(n, 400, 160), len(starts))
        if n < 400:
            with pytest.raises(AudioTooShort):
                compute_mfcc(AudioBuffer(np.zeros(n), 16000))
        else:
            assert_equal(len(compute_mfcc(AudioBuffer(np.zeros(n), 16000))), len(starts))


def test_filterbank_shape():
    bank = mel_filterbank(16000, 512, 26, 0.0, 8000.0)
    assert_equal(bank.shape, (26, 257))
    assert np.all(bank >= 0) and np.all(bank <= 1)
    assert np.all(bank.max(axis=1) > 0.5)


def test_mel_scale_inverse():
    freqs = np.array([0.0, 100.0, 1000.0, 8000.0])
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(freqs)), freqs, atol=1e-9)
    assert math.isclose(float(hz_to_mel(700.0)), 2595 * math.log10(2))


def test_feature_matrix_is_read_only():
    features = FeatureMatrix(np.zeros((3, 2)), 0.01, 0.025, 0.0125)
    with pytest.raises(ValueError):
        features.vectors[0, 0] = 1.0
    with pytest.raises(ValueError):
        FeatureMatrix(np.array([[np.nan]]), 0.01, 0.025, 0.0125)


def test_csv_dump():
    features = FeatureMatrix(np.arange(6.0).reshape(3, 2), 0.01, 0.025, 0.0125)
    lines = features.to_csv().splitlines()
    assert_equal(lines[0], "time_s,c0,c1")
    assert_equal(lines[1], "0.012500,0,1")
    assert_equal(lines[3], "0.032500,4,5")
