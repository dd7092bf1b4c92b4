# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""
First pass: segment models, the BIC self-similarity matrix and coarse change points.

The audio is cut into non-overlapping segments of a few seconds, each segment
is modelled as a full-covariance Gaussian, and the matrix of pairwise BIC
values is scanned along its diagonal with a checkerboard kernel. Peaks of the
resulting novelty curve are the coarse change points.
"""

import dataclasses

import numpy as np
from scipy import linalg

from ssmseg.core import api as execution
from ssmseg.core.common import get_logger
from ssmseg.core.errors import AudioTooShort, DegenerateModel, EmptyRange, KernelTooLarge
from ssmseg.pipeline.common import ChangePoint, Stage
from ssmseg.pipeline.formats import csv_text, ssm_to_pgm

logger = get_logger(__name__)

DEFAULT_EPSILON = 1e-6


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianStats:
    """
    Sufficient statistics of a set of feature vectors.

    Parameters
    ----------
    n : int
        Number of vectors.
    sum : np.ndarray
        Sum of the vectors, shape ``(d,)``.
    sumsq : np.ndarray
        Sum of outer products, shape ``(d, d)``.
    """

    n: int
    sum: np.ndarray
    sumsq: np.ndarray

    @classmethod
    def from_vectors(cls, vectors):
        """
        Accumulate statistics of the rows of `vectors`.

        Parameters
        ----------
        vectors : np.ndarray
            ``n x d`` matrix.

        Returns
        -------
        GaussianStats
        """
        vectors = np.asarray(vectors, dtype=np.float64)
        return cls(vectors.shape[0], vectors.sum(axis=0), vectors.T @ vectors)

    @classmethod
    def empty(cls, dim):
        """Statistics of no vectors in dimension `dim`."""
        return cls(0, np.zeros(dim), np.zeros((dim, dim)))

    def __add__(self, other):
        return self.merge(other)

    def merge(self, other):
        """
        Statistics of the union of both vector sets.

        Parameters
        ----------
        other : GaussianStats
            Statistics of a disjoint set of vectors.

        Returns
        -------
        GaussianStats
        """
        return GaussianStats(self.n + other.n, self.sum + other.sum, self.sumsq + other.sumsq)

    @property
    def dim(self):
        """Feature dimensionality ``d``."""
        return self.sum.shape[0]

    @property
    def mean(self):
        """Sample mean."""
        if self.n < 1:
            raise EmptyRange("mean of an empty set of vectors")
        return self.sum / self.n

    def raw_covariance(self):
        """
        Maximum-likelihood covariance ``sumsq / n - mean mean^T``, symmetrized.

        Returns
        -------
        np.ndarray
        """
        mean = self.mean
        cov = self.sumsq / self.n - np.outer(mean, mean)
        return (cov + cov.T) / 2

    def covariance(self, epsilon=DEFAULT_EPSILON):
        """
        Covariance with a diagonal ridge.

        Parameters
        ----------
        epsilon : float, default: 1e-6
            Ridge factor: ``epsilon * trace / d`` is added to the diagonal, or
            ``epsilon`` itself when the trace is 0.

        Returns
        -------
        np.ndarray
        """
        cov = self.raw_covariance()
        if epsilon:
            trace = float(np.trace(cov))
            ridge = epsilon * trace / self.dim if trace > 0 else epsilon
            cov = cov + ridge * np.eye(self.dim)
        return cov


def log_det(cov):
    """
    Log-determinant of a symmetric positive definite matrix via Cholesky.

    Parameters
    ----------
    cov : np.ndarray
        Square matrix.

    Returns
    -------
    float

    Raises
    ------
    DegenerateModel
        If the factorization fails.
    """
    try:
        chol = linalg.cholesky(cov, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise DegenerateModel(
            "covariance is not positive definite; check the epsilon regularization"
        ) from e
    diag = np.diag(chol)
    if not np.all(diag > 0):
        raise DegenerateModel("covariance has a zero pivot")
    return 2.0 * float(np.sum(np.log(diag)))


def bic_penalty(dim, n):
    """
    Model-complexity penalty of one full-covariance Gaussian, ``1/2 (d + d(d+1)/2) log n``.

    Parameters
    ----------
    dim : int
        Feature dimensionality.
    n : int
        Number of vectors of the pooled window.

    Returns
    -------
    float
    """
    return 0.5 * (dim + dim * (dim + 1) / 2) * np.log(n)


def _half_term(stats, epsilon):
    """``n / 2 * log|Sigma|`` of a window."""
    if stats.n < 2:
        raise DegenerateModel(f"a Gaussian model needs at least 2 vectors, got {stats.n}")
    return 0.5 * stats.n * log_det(stats.covariance(epsilon))


def _combine(merged, half_a, half_b, epsilon, penalty_lambda):
    value = _half_term(merged, epsilon) - (half_a + half_b)
    if penalty_lambda:
        value -= penalty_lambda * bic_penalty(merged.dim, merged.n)
    return value


def accumulate_stats(features, frame_range):
    """
    Sufficient statistics of the feature vectors in ``[begin, end)``.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    frame_range : tuple of int
        ``(begin, end)`` frame indices.

    Returns
    -------
    GaussianStats

    Raises
    ------
    EmptyRange
        If the range is empty or reaches outside the matrix.
    """
    begin, end = (int(v) for v in frame_range)
    if not 0 <= begin < end <= len(features):
        raise EmptyRange(
            f"frame range [{begin}, {end}) is empty or outside [0, {len(features)})"
        )
    return GaussianStats.from_vectors(features.vectors[begin:end])


def bic_similarity(a, b, epsilon=DEFAULT_EPSILON, penalty_lambda=0.0):
    """
    BIC dissimilarity of two windows.

    ``N_W/2 log|Sigma_W| - N_a/2 log|Sigma_a| - N_b/2 log|Sigma_b|`` where ``W``
    pools both windows; larger values mean more dissimilar.

    Parameters
    ----------
    a, b : GaussianStats
        Window statistics, at least 2 vectors each.
    epsilon : float, default: 1e-6
        Covariance ridge factor, see ``GaussianStats.covariance``.
    penalty_lambda : float, default: 0.0
        Weight of the model-complexity penalty; 0 keeps the bare likelihood term.

    Returns
    -------
    float

    Raises
    ------
    DegenerateModel
        If a window has fewer than 2 vectors or a covariance is not positive definite.
    """
    return _combine(
        a.merge(b),
        _half_term(a, epsilon),
        _half_term(b, epsilon),
        epsilon,
        penalty_lambda,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """
    Symmetric matrix of pairwise BIC values over first-pass segments.

    Parameters
    ----------
    values : np.ndarray
        ``S x S`` matrix.
    segment_len_s : float
        Requested segment length.
    segment_times : np.ndarray
        Start time of every segment.
    frames_per_segment : int
        Frames per segment.
    dim : int
        Feature dimensionality the models were built in.
    """

    values: np.ndarray
    segment_len_s: float
    segment_times: np.ndarray
    frames_per_segment: int
    dim: int

    def __len__(self):
        return self.values.shape[0]

    def to_pgm(self):
        """Binary PGM rendering, see ``ssm_to_pgm``."""
        return ssm_to_pgm(self.values)


def _fill_rows(stats, halves, rows, epsilon, penalty_lambda):
    """Upper-triangle entries ``j > i`` of the given rows."""
    out = []
    for i in rows:
        out.append(
            np.array(
                [
                    _combine(stats[i].merge(stats[j]), halves[i], halves[j], epsilon, penalty_lambda)
                    for j in range(i + 1, len(stats))
                ]
            )
        )
    return out


def build_ssm(features, segment_len_s=5.0, epsilon=DEFAULT_EPSILON, penalty_lambda=0.0):
    """
    Pairwise BIC self-similarity matrix over non-overlapping segments.

    Frames are grouped into ``L = floor(segment_len_s / hop_s)``-frame segments.
    A final segment short of ``L`` only by the frames the analysis window cannot
    produce at the end of the audio (``ceil(frame_len_s / hop_s) - 1``) is kept,
    so 600 s of audio gives 120 five-second segments; any shorter tail is
    discarded. Only the upper triangle is computed, possibly in parallel, and
    mirrored.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    segment_len_s : float, default: 5.0
        Segment length, 2 to 5 seconds recommended.
    epsilon : float, default: 1e-6
        Covariance ridge factor.
    penalty_lambda : float, default: 0.0
        Weight of the BIC model-complexity penalty.

    Returns
    -------
    SimilarityMatrix

    Raises
    ------
    AudioTooShort
        If fewer than 2 segments fit.
    """
    if not 2.0 <= segment_len_s <= 5.0:
        logger.warning(f"segment_len_s={segment_len_s} is outside the recommended 2-5 s")
    frames_per_segment = int(np.floor(segment_len_s / features.hop_s + 1e-9))
    if frames_per_segment < 2:
        raise ValueError(f"segment_len_s={segment_len_s} spans fewer than 2 frames")
    n_segments, remainder = divmod(len(features), frames_per_segment)
    if remainder >= 2 and remainder + features.window_tail_frames >= frames_per_segment:
        n_segments += 1
    if n_segments < 2:
        raise AudioTooShort(
            f"{len(features)} frames hold {n_segments} segment(s) of {segment_len_s} s, need 2"
        )

    stats = [
        accumulate_stats(
            features,
            (i * frames_per_segment, min((i + 1) * frames_per_segment, len(features))),
        )
        for i in range(n_segments)
    ]
    halves = [_half_term(s, epsilon) for s in stats]
    chunks = execution.split_round_robin(n_segments - 1, execution.num_workers())
    results = execution.map_tasks(
        _fill_rows, [(stats, halves, chunk, epsilon, penalty_lambda) for chunk in chunks]
    )

    values = np.zeros((n_segments, n_segments))
    for chunk, rows in zip(chunks, results):
        for i, row in zip(chunk, rows):
            values[i, i + 1 :] = row
    values = values + values.T - np.diag(np.diag(values))
    logger.info(
        f"Built {n_segments}x{n_segments} similarity matrix "
        f"({frames_per_segment} frames/segment)"
    )
    return SimilarityMatrix(
        values=values,
        segment_len_s=segment_len_s,
        segment_times=np.arange(n_segments) * frames_per_segment * features.hop_s,
        frames_per_segment=frames_per_segment,
        dim=features.dim,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class NoveltyCurve:
    """
    Checkerboard-kernel novelty along the similarity matrix diagonal.

    ``scores[i]`` rates a boundary at the start of segment ``i``.
    """

    scores: np.ndarray
    kernel_half_width: int

    def to_csv(self, segment_times):
        """
        Render ``segment_index,time_s,score`` rows.

        Parameters
        ----------
        segment_times : np.ndarray
            Start time of every segment.

        Returns
        -------
        str
        """
        rows = ((i, t, s) for i, (t, s) in enumerate(zip(segment_times, self.scores)))
        return csv_text(["segment_index", "time_s", "score"], rows, ["d", ".3f", ".6f"])


def novelty_curve(ssm, kernel_half_width=2):
    """
    Correlate a ``2w x 2w`` checkerboard kernel along the diagonal.

    For a boundary at segment ``i`` the score is the sum of the means of the two
    cross quadrants minus the sum of the means of the two same-side quadrants,
    floored at 0; high cross-boundary BIC with low within-side BIC scores high.
    Boundaries closer than ``w`` segments to either border score 0.

    Parameters
    ----------
    ssm : SimilarityMatrix
        First-pass matrix.
    kernel_half_width : int, default: 2
        ``w``, in segments.

    Returns
    -------
    NoveltyCurve

    Raises
    ------
    KernelTooLarge
        If ``w < 1`` or ``w > S / 2``.
    """
    w = int(kernel_half_width)
    n = len(ssm)
    if w < 1 or 2 * w > n:
        raise KernelTooLarge(f"kernel half width {w} does not fit a {n}x{n} matrix")
    v = ssm.values
    scores = np.zeros(n)
    for i in range(w, n - w):
        before, after = slice(i - w, i), slice(i, i + w)
        same = v[before, before].mean() + v[after, after].mean()
        cross = v[before, after].mean() + v[after, before].mean()
        scores[i] = max(0.0, cross - same)
    return NoveltyCurve(scores=scores, kernel_half_width=w)


def novelty_floor(ssm, min_novelty_lambda=1.0):
    """
    Absolute novelty a coarse peak must exceed.

    A boundary whose cross-segment BIC exceeds the within-segment BIC by the
    model-complexity penalty of a segment pair scores twice that penalty.

    Parameters
    ----------
    ssm : SimilarityMatrix
        First-pass matrix.
    min_novelty_lambda : float, default: 1.0
        Penalty weight; 0 disables the floor.

    Returns
    -------
    float
    """
    return 2.0 * min_novelty_lambda * bic_penalty(ssm.dim, 2 * ssm.frames_per_segment)


def pick_coarse_changes(nov, ssm, peak_k=2.0, min_score=0.0):
    """
    Select coarse change points from a novelty curve.

    A segment index is kept when its score is a local maximum, exceeds both
    ``mean + peak_k * std`` of the curve and `min_score`, and lies at least
    ``2 * kernel_half_width`` segments from every higher kept peak (ties go to
    the earlier index).

    Parameters
    ----------
    nov : NoveltyCurve
        Curve computed from `ssm`.
    ssm : SimilarityMatrix
        Matrix providing the segment times.
    peak_k : float, default: 2.0
        Threshold in standard deviations above the mean.
    min_score : float, default: 0.0
        Absolute floor, see ``novelty_floor``.

    Returns
    -------
    list of ChangePoint
        Coarse points sorted by time; empty for single-source audio.
    """
    scores = nov.scores
    threshold = max(scores.mean() + peak_k * scores.std(), min_score)
    padded = np.concatenate(([-np.inf], scores, [-np.inf]))
    is_peak = (scores >= padded[:-2]) & (scores >= padded[2:]) & (scores > threshold)
    candidates = sorted(np.flatnonzero(is_peak), key=lambda i: (-scores[i], i))

    separation = 2 * nov.kernel_half_width
    kept = []
    for i in candidates:
        if all(abs(i - j) >= separation for j in kept):
            kept.append(i)
    kept.sort()
    logger.info(
        f"{len(kept)} coarse change point(s) above {threshold:.3f} "
        f"from {len(candidates)} candidate peak(s)"
    )
    return [
        ChangePoint(time_s=float(ssm.segment_times[i]), stage=Stage.COARSE, score=float(scores[i]))
        for i in kept
    ]
