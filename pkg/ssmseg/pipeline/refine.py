# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""
Second pass: localize coarse change points with a sliding-window BIC comparator.

Around every coarse point two adjacent windows slide over a fixed context and
the candidate boundary with the highest BIC wins. The context is assumed to
hold exactly one change, so no threshold is involved. The same comparator run
over the whole stream with a threshold is the single-pass baseline.
"""

import dataclasses

import numpy as np

from ssmseg.config import RefineConfig
from ssmseg.core import api as execution
from ssmseg.core.common import get_logger
from ssmseg.core.errors import ContextOutOfAudio
from ssmseg.pipeline.common import ChangePoint, Stage
from ssmseg.pipeline.formats import csv_text
from ssmseg.pipeline.ssm import DEFAULT_EPSILON, accumulate_stats, bic_similarity

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class BicCurve:
    """
    Sliding BIC values at candidate boundary times.

    Parameters
    ----------
    times : np.ndarray
        Candidate boundary times in seconds.
    values : np.ndarray
        BIC between the window before and the window after each candidate.
    offsets : np.ndarray
        Candidate offsets from the grid anchor in steps.
    """

    times: np.ndarray
    values: np.ndarray
    offsets: np.ndarray

    def __len__(self):
        return self.times.size

    def to_csv(self):
        """Render ``candidate_time_s,bic`` rows."""
        return csv_text(["candidate_time_s", "bic"], zip(self.times, self.values), [".3f", ".6f"])


def _window_frames(features, win_s):
    frames = int(round(win_s / features.hop_s))
    if frames < 2:
        raise ValueError(f"win_s={win_s} spans fewer than 2 frames")
    return frames


def sliding_bic_curve(features, anchor_s, offsets, win_s, step_s, epsilon=DEFAULT_EPSILON):
    """
    Evaluate the two-window BIC comparator on a grid ``anchor_s + k * step_s``.

    Candidates whose windows ``[t - win_s, t)`` and ``[t, t + win_s)`` do not both
    fit inside the features are skipped, never evaluated on partial windows.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    anchor_s : float
        Grid anchor time.
    offsets : iterable of int
        Grid offsets ``k`` to evaluate.
    win_s : float
        Window length.
    step_s : float
        Grid step.
    epsilon : float, default: 1e-6
        Covariance ridge factor.

    Returns
    -------
    BicCurve
    """
    win = _window_frames(features, win_s)
    n_frames = len(features)
    times, values, kept = [], [], []
    for k in offsets:
        t = anchor_s + k * step_s
        boundary = features.frame_index(t)
        if boundary - win < 0 or boundary + win > n_frames:
            continue
        before = accumulate_stats(features, (boundary - win, boundary))
        after = accumulate_stats(features, (boundary, boundary + win))
        times.append(t)
        values.append(bic_similarity(before, after, epsilon))
        kept.append(k)
    return BicCurve(np.array(times), np.array(values), np.array(kept, dtype=int))


def context_curve(features, coarse, cfg, epsilon=DEFAULT_EPSILON):
    """
    Sliding BIC curve over the refinement context of a coarse point.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    coarse : ChangePoint
        First-pass point the grid is anchored at.
    cfg : RefineConfig
        Second pass parameters.
    epsilon : float, default: 1e-6
        Covariance ridge factor.

    Returns
    -------
    BicCurve
    """
    half = int(np.floor(cfg.context_s / 2 / cfg.step_s + 1e-9))
    return sliding_bic_curve(
        features, coarse.time_s, range(-half, half + 1), cfg.win_s, cfg.step_s, epsilon
    )


def refine_change_point(features, coarse, cfg=None, epsilon=DEFAULT_EPSILON):
    """
    Localize one coarse change point at the maximum of the sliding BIC curve.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    coarse : ChangePoint
        Point with ``stage == "coarse"``.
    cfg : RefineConfig, optional
        Second pass parameters. Defaults are used if it isn't provided.
    epsilon : float, default: 1e-6
        Covariance ridge factor.

    Returns
    -------
    ChangePoint
        Refined point scored with its peak BIC; ties go to the candidate
        nearest the coarse time, then to the earlier one.

    Raises
    ------
    ContextOutOfAudio
        If the audio is shorter than two windows or no candidate fits.
    """
    cfg = RefineConfig() if cfg is None else cfg
    cfg.validate()
    if coarse.stage != Stage.COARSE:
        raise ValueError(f"expected a coarse change point, got stage '{coarse.stage}'")
    if len(features) < 2 * _window_frames(features, cfg.win_s):
        raise ContextOutOfAudio(
            f"{len(features) * features.hop_s:.3f} s of features is shorter than two {cfg.win_s} s windows"
        )
    curve = context_curve(features, coarse, cfg, epsilon)
    if not len(curve):
        raise ContextOutOfAudio(f"no refinement window fits around {coarse.time_s:.3f} s")
    best = min(
        range(len(curve)),
        key=lambda i: (-curve.values[i], abs(curve.offsets[i]), curve.offsets[i]),
    )
    refined = ChangePoint(
        time_s=float(curve.times[best]), stage=Stage.REFINED, score=float(curve.values[best])
    )
    logger.debug(
        f"Refined {coarse.time_s:.3f} s -> {refined.time_s:.3f} s (BIC {refined.score:.3f})"
    )
    return refined


def merge_close(points, min_gap_s):
    """
    Merge change points closer than `min_gap_s`, keeping the higher score.

    Parameters
    ----------
    points : list of ChangePoint
        Points in any order.
    min_gap_s : float
        Minimal distance between surviving points.

    Returns
    -------
    list of ChangePoint
        Strictly increasing times; on equal scores the earlier point survives.
    """
    merged = []
    for point in sorted(points, key=lambda p: p.time_s):
        if merged and (
            point.time_s - merged[-1].time_s < min_gap_s or point.time_s == merged[-1].time_s
        ):
            if point.score > merged[-1].score:
                merged[-1] = point
            continue
        merged.append(point)
    return merged


def _refine_batch(features, points, cfg, epsilon):
    return [refine_change_point(features, point, cfg, epsilon) for point in points]


def refine_all(features, coarse_list, cfg=None, epsilon=DEFAULT_EPSILON):
    """
    Refine every coarse point independently, then merge points closer than ``min_gap_s``.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    coarse_list : list of ChangePoint
        Coarse points sorted by time.
    cfg : RefineConfig, optional
        Second pass parameters. Defaults are used if it isn't provided.
    epsilon : float, default: 1e-6
        Covariance ridge factor.

    Returns
    -------
    list of ChangePoint
        Refined points with strictly increasing times.
    """
    cfg = RefineConfig() if cfg is None else cfg
    cfg.validate()
    if not 10.0 <= cfg.context_s <= 20.0:
        logger.warning(f"context_s={cfg.context_s} is outside the recommended 10-20 s")
    if not coarse_list:
        return []
    chunks = execution.split_round_robin(len(coarse_list), execution.num_workers())
    results = execution.map_tasks(
        _refine_batch,
        [(features, [coarse_list[i] for i in chunk], cfg, epsilon) for chunk in chunks],
    )
    refined = [None] * len(coarse_list)
    for chunk, points in zip(chunks, results):
        for i, point in zip(chunk, points):
            refined[i] = point
    merged = merge_close(refined, cfg.min_gap_s)
    logger.info(f"Refined {len(coarse_list)} coarse point(s) into {len(merged)}")
    return merged


def sliding_window_changes(
    features, win_s=2.0, step_s=0.1, threshold=0.0, min_gap_s=2.0, epsilon=DEFAULT_EPSILON
):
    """
    Single-pass detector: thresholded peaks of the sliding BIC over the whole stream.

    This is the conventional comparator the two-pass method replaces; its
    output depends on `threshold` and tends to over-segment.

    Parameters
    ----------
    features : FeatureMatrix
        MFCC vectors.
    win_s : float, default: 2.0
        Window length.
    step_s : float, default: 0.1
        Grid step.
    threshold : float, default: 0.0
        Minimal BIC of a reported peak.
    min_gap_s : float, default: 2.0
        Minimal distance between reported points.
    epsilon : float, default: 1e-6
        Covariance ridge factor.

    Returns
    -------
    list of ChangePoint
        Refined-stage points sorted by time.
    """
    duration = len(features) * features.hop_s
    curve = sliding_bic_curve(
        features, 0.0, range(int(np.floor(duration / step_s)) + 1), win_s, step_s, epsilon
    )
    if len(curve) == 0:
        raise ContextOutOfAudio(
            f"{duration:.3f} s of features is shorter than two {win_s} s windows"
        )
    values = curve.values
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    peaks = np.flatnonzero((values >= padded[:-2]) & (values > padded[2:]) & (values > threshold))
    points = [ChangePoint(float(curve.times[i]), Stage.REFINED, float(values[i])) for i in peaks]
    merged = merge_close(points, min_gap_s)
    logger.info(f"Sliding-window detector found {len(merged)} change point(s) above {threshold}")
    return merged
