# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""MFCC front-end: 25 ms Hamming frames every 10 ms, HTK mel filterbank, orthonormal DCT."""

import dataclasses
import functools

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft

from ssmseg.config import MfccConfig
from ssmseg.core.common import get_logger
from ssmseg.core.errors import AudioTooShort
from ssmseg.pipeline.formats import csv_text

logger = get_logger(__name__)

# frames per FFT block, bounds peak memory on long recordings
_BLOCK_FRAMES = 4096


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """
    Time-ordered MFCC vectors.

    Parameters
    ----------
    vectors : np.ndarray
        ``T x d`` matrix, stored read-only.
    hop_s : float
        Frame hop in seconds.
    frame_len_s : float
        Frame length in seconds.
    t0_s : float
        Centre time of frame 0.
    """

    vectors: np.ndarray
    hop_s: float
    frame_len_s: float
    t0_s: float

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError("FeatureMatrix vectors must be a 2-D array")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("FeatureMatrix entries must be finite")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        """Feature dimensionality ``d``."""
        return self.vectors.shape[1]

    @property
    def window_tail_frames(self):
        """Hop slots at the end of the audio that no full analysis window covers."""
        return max(0, int(np.ceil(self.frame_len_s / self.hop_s - 1e-9)) - 1)

    def frame_time(self, k):
        """Centre time of frame `k` in seconds."""
        return self.t0_s + np.asarray(k) * self.hop_s

    def frame_index(self, time_s):
        """
        Map a boundary time to the index of the first frame starting at or after it.

        Parameters
        ----------
        time_s : float
            Time in seconds.

        Returns
        -------
        int
            ``round(time_s / hop_s)``.
        """
        return int(round(time_s / self.hop_s))

    def with_vectors(self, vectors):
        """Copy of this matrix with the same geometry and new `vectors`."""
        return dataclasses.replace(self, vectors=vectors)

    def to_csv(self):
        """
        Render one row per frame: centre time (6 decimals) then the coefficients.

        Returns
        -------
        str
        """
        header = ["time_s"] + [f"c{i}" for i in range(self.dim)]
        times = self.frame_time(np.arange(len(self)))
        rows = ([t, *v] for t, v in zip(times, self.vectors))
        return csv_text(header, rows, [".6f"] + [".9g"] * self.dim)


def num_frames(n_samples, frame_len, hop):
    """
    Number of complete frames in a signal.

    Parameters
    ----------
    n_samples : int
        Signal length.
    frame_len : int
        Frame length in samples.
    hop : int
        Hop in samples.

    Returns
    -------
    int
        ``floor((n_samples - frame_len) / hop) + 1``, or 0 for signals shorter than a frame.
    """
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def hz_to_mel(hz):
    """HTK mel scale: ``2595 * log10(1 + f / 700)``."""
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    """Inverse of ``hz_to_mel``."""
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_edges_hz(n_mels, fmin, fmax):
    """
    Edge frequencies of a triangular filterbank equally spaced on the mel scale.

    Returns
    -------
    np.ndarray
        ``n_mels + 2`` frequencies; filter ``m`` rises from edge ``m``, peaks at
        edge ``m + 1`` (its centre) and falls to edge ``m + 2``.
    """
    return mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))


@functools.lru_cache(maxsize=8)
def mel_filterbank(sample_rate, n_fft, n_mels, fmin, fmax):
    """
    Triangular mel filterbank evaluated at the FFT bin frequencies.

    Returns
    -------
    np.ndarray
        Read-only ``n_mels x (n_fft // 2 + 1)`` weight matrix with unit peaks.
    """
    edges = mel_edges_hz(n_mels, fmin, fmax)
    freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)
    lower, centre, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lower) / (centre - lower)
    falling = (upper - freqs) / (upper - centre)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights.setflags(write=False)
    return weights


def frame_signal(samples, frame_len, hop):
    """
    Cut a 1-D signal into overlapping frames (a strided view, no copy).

    Returns
    -------
    np.ndarray
        ``T x frame_len`` view.
    """
    n = num_frames(samples.size, frame_len, hop)
    return sliding_window_view(samples, frame_len)[: (n - 1) * hop + 1 : hop]


def log_mel_energies(frames, sample_rate, cfg):
    """
    Log mel filterbank energies of already pre-emphasized frames.

    Parameters
    ----------
    frames : np.ndarray
        ``T x frame_len`` frames.
    sample_rate : int
        Sample rate in Hz.
    cfg : MfccConfig
        Front-end parameters.

    Returns
    -------
    np.ndarray
        ``T x n_mels`` matrix of ``log(energy + log_floor)``.
    """
    fmax = sample_rate / 2 if cfg.mel_fmax is None else cfg.mel_fmax
    bank = mel_filterbank(sample_rate, cfg.n_fft, cfg.n_mels, float(cfg.mel_fmin), float(fmax))
    window = np.hamming(frames.shape[1])
    out = np.empty((frames.shape[0], cfg.n_mels))
    for start in range(0, frames.shape[0], _BLOCK_FRAMES):
        block = frames[start : start + _BLOCK_FRAMES] * window
        power = np.abs(np.fft.rfft(block, n=cfg.n_fft, axis=1)) ** 2
        out[start : start + _BLOCK_FRAMES] = np.log(power @ bank.T + cfg.log_floor)
    return out


def compute_mfcc(buffer, cfg=None):
    """
    Compute MFCC vectors of `buffer`.

    Per frame: pre-emphasis, Hamming window, zero-padding to ``n_fft``,
    power spectrum, mel filterbank, ``log(energy + log_floor)``, orthonormal
    DCT-II, first ``n_coeffs`` coefficients (coefficient 0 included).

    Parameters
    ----------
    buffer : AudioBuffer
        Audio at the working rate.
    cfg : MfccConfig, optional
        Front-end parameters. Defaults are used if it isn't provided.

    Returns
    -------
    FeatureMatrix

    Raises
    ------
    AudioTooShort
        If the buffer holds fewer samples than one frame.
    """
    cfg = MfccConfig() if cfg is None else cfg
    sample_rate = buffer.sample_rate
    cfg.validate(sample_rate)
    frame_len, hop = cfg.frame_len(sample_rate), cfg.hop_len(sample_rate)
    if len(buffer) < frame_len:
        raise AudioTooShort(
            f"{len(buffer)} samples is shorter than one {frame_len}-sample frame"
        )

    x = buffer.samples
    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - cfg.preemph * x[:-1]

    frames = frame_signal(emphasized, frame_len, hop)
    log_energies = log_mel_energies(frames, sample_rate, cfg)
    cepstra = fft.dct(log_energies, type=2, norm="ortho", axis=1)[:, : cfg.n_coeffs]
    logger.info(f"Computed {cepstra.shape[0]} MFCC frames of dimension {cfg.n_coeffs}")
    return FeatureMatrix(
        vectors=cepstra,
        hop_s=hop / sample_rate,
        frame_len_s=frame_len / sample_rate,
        t0_s=frame_len / sample_rate / 2,
    )
