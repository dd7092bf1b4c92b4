# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Cutting the audio at change points and newsreader labeling."""

import dataclasses

from ssmseg.core.common import get_logger
from ssmseg.core.errors import PointOutOfRange
from ssmseg.pipeline.common import Label, Segment
from ssmseg.pipeline.ssm import DEFAULT_EPSILON, accumulate_stats, bic_similarity

logger = get_logger(__name__)


def cut_segments(change_points, duration_s):
    """
    Cut ``[0, duration_s]`` at the given change points.

    Parameters
    ----------
    change_points : list of ChangePoint or float
        Points sorted by time, strictly inside ``(0, duration_s)``.
    duration_s : float
        Audio duration.

    Returns
    -------
    list of Segment
        ``K + 1`` unlabeled segments tiling the audio.

    Raises
    ------
    PointOutOfRange
        If a point is unsorted or outside ``(0, duration_s)``.
    """
    times = [getattr(p, "time_s", p) for p in change_points]
    bounds = [0.0, *times, float(duration_s)]
    for prev, cur in zip(bounds, bounds[1:]):
        if not prev < cur:
            raise PointOutOfRange(
                f"change points must be strictly increasing inside (0, {duration_s}), got {times}"
            )
    return [Segment(start, end) for start, end in zip(bounds, bounds[1:])]


def _segment_frames(features, segment):
    begin = features.frame_index(segment.start_s)
    end = min(features.frame_index(segment.end_s), len(features))
    return begin, end


def label_newsreader(segments, features, tau=0.0, epsilon=DEFAULT_EPSILON, penalty_lambda=1.0):
    """
    Label the segments spoken by the newsreader.

    The longest segment (the earlier one on ties) is the anchor and is always
    labeled newsreader. Every other segment is compared against it and joins
    the newsreader when its BIC value does not exceed `tau`.

    Parameters
    ----------
    segments : list of Segment
        Segments tiling the audio, each spanning at least 2 frames.
    features : FeatureMatrix
        MFCC vectors of the same audio.
    tau : float, default: 0.0
        Same-speaker threshold on the anchor BIC.
    epsilon : float, default: 1e-6
        Covariance ridge factor.
    penalty_lambda : float, default: 1.0
        Weight of the BIC model-complexity penalty.

    Returns
    -------
    list of Segment
        Labeled copies of `segments` in the same order.

    Raises
    ------
    DegenerateModel
        If a segment spans fewer than 2 frames.
    """
    if not segments:
        return []
    anchor = max(range(len(segments)), key=lambda i: (segments[i].duration_s, -i))
    anchor_stats = accumulate_stats(features, _segment_frames(features, segments[anchor]))
    labeled = []
    for i, segment in enumerate(segments):
        if i == anchor:
            labeled.append(dataclasses.replace(segment, label=Label.NEWSREADER, anchor_bic=0.0))
            continue
        stats = accumulate_stats(features, _segment_frames(features, segment))
        value = bic_similarity(anchor_stats, stats, epsilon, penalty_lambda)
        label = Label.NEWSREADER if value <= tau else Label.OTHER
        logger.debug(
            f"Segment [{segment.start_s:.3f}, {segment.end_s:.3f}] anchor BIC {value:.3f} -> {label}"
        )
        labeled.append(dataclasses.replace(segment, label=label, anchor_bic=value))
    n_reader = sum(s.label == Label.NEWSREADER for s in labeled)
    logger.info(f"Labeled {n_reader} of {len(labeled)} segment(s) as newsreader")
    return labeled


def newsreader_regions(segments):
    """
    Merge adjacent newsreader segments into contiguous regions.

    Parameters
    ----------
    segments : list of Segment
        Labeled segments sorted by time.

    Returns
    -------
    list of tuple of float
        ``(start_s, end_s)`` per region.
    """
    regions = []
    for segment in segments:
        if segment.label != Label.NEWSREADER:
            continue
        if regions and regions[-1][1] == segment.start_s:
            regions[-1] = (regions[-1][0], segment.end_s)
        else:
            regions.append((segment.start_s, segment.end_s))
    return regions
