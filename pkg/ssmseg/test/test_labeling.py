# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

from ssmseg.core.errors import DegenerateModel, PointOutOfRange
from ssmseg.pipeline.common import ChangePoint, Label, Segment, Stage
from ssmseg.pipeline.features import FeatureMatrix
from ssmseg.pipeline.labeling import cut_segments, label_newsreader, newsreader_regions
from ssmseg.pipeline.ssm import bic_penalty
from .utils import assert_equal, random_features


def test_cut_without_points():
    assert_equal(cut_segments([], 600.0), [Segment(0.0, 600.0)])


def test_cut_at_points():
    points = [ChangePoint(100.0, Stage.REFINED, 1.0), ChangePoint(250.0, Stage.REFINED, 1.0)]
    segments = cut_segments(points, 600.0)
    assert_equal(
        [(s.start_s, s.end_s) for s in segments], [(0.0, 100.0), (100.0, 250.0), (250.0, 600.0)]
    )
    assert all(s.label == Label.NONE for s in segments)


@pytest.mark.parametrize("times", [[0.0], [600.0], [700.0], [300.0, 200.0], [100.0, 100.0]])
def test_cut_rejects_points_out_of_range(times):
    with pytest.raises(PointOutOfRange):
        cut_segments(times, 600.0)


def test_single_segment_is_newsreader():
    features = random_features(1000)
    (segment,) = label_newsreader([Segment(0.0, 10.0)], features)
    assert_equal((segment.label, segment.anchor_bic), (Label.NEWSREADER, 0.0))


def test_duplicated_anchor_content():
    rng = np.random.default_rng(31)
    a = rng.standard_normal((3000, 13))
    b = 3.0 * rng.standard_normal((1000, 13)) + 4.0
    # the last segment repeats the anchor vectors in another order
    vectors = np.vstack([a, b, a[::-1]])
    features = FeatureMatrix(vectors, 0.01, 0.025, 0.0125)
    segments = cut_segments([30.0, 40.0], 70.0)
    labeled = label_newsreader(segments, features, tau=0.0)
    assert_equal([s.label for s in labeled], [Label.NEWSREADER, Label.OTHER, Label.NEWSREADER])
    # identical statistics leave only the penalty
    assert abs(labeled[2].anchor_bic + bic_penalty(13, 6000)) < 1e-3
    assert labeled[1].anchor_bic > 0
    unpenalized = label_newsreader(segments, features, penalty_lambda=0.0)
    assert abs(unpenalized[2].anchor_bic) < 1e-3


def test_anchor_is_longest_then_earliest():
    features = random_features(4000, seed=32)
    segments = cut_segments([10.0, 20.0, 30.0], 40.0)
    labeled = label_newsreader(segments, features)
    assert_equal(labeled[0].anchor_bic, 0.0)
    assert all(s.anchor_bic != 0.0 for s in labeled[1:])


def test_same_source_segments_join_newsreader():
    rng = np.random.default_rng(33)
    vectors = np.vstack(
        [
            rng.standard_normal((6000, 13)),
            2.0 * rng.standard_normal((3000, 13)) + 3.0,
            rng.standard_normal((4000, 13)),
        ]
    )
    features = FeatureMatrix(vectors, 0.01, 0.025, 0.0125)
    labeled = label_newsreader(cut_segments([60.0, 90.0], 130.0), features)
    assert_equal([s.label for s in labeled], [Label.NEWSREADER, Label.OTHER, Label.NEWSREADER])
    assert labeled[2].anchor_bic <= 0.0 < labeled[1].anchor_bic


def test_tau_controls_membership():
    features = random_features(3000, seed=34)
    segments = cut_segments([20.0], 30.0)
    strict = label_newsreader(segments, features, tau=-1e9)
    loose = label_newsreader(segments, features, tau=1e9)
    assert_equal([s.label for s in strict], [Label.NEWSREADER, Label.OTHER])
    assert_equal([s.label for s in loose], [Label.NEWSREADER, Label.NEWSREADER])


def test_degenerate_segment():
    features = random_features(1000)
    with pytest.raises(DegenerateModel):
        label_newsreader([Segment(0.0, 9.99), Segment(9.99, 10.0)], features)


def test_regions_merge_adjacent_newsreader_segments():
    segments = [
        Segment(0.0, 10.0, Label.NEWSREADER),
        Segment(10.0, 20.0, Label.NEWSREADER),
        Segment(20.0, 30.0, Label.OTHER),
        Segment(30.0, 45.0, Label.NEWSREADER),
    ]
    assert_equal(newsreader_regions(segments), [(0.0, 20.0), (30.0, 45.0)])
