# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np

from ssmseg.pipeline.features import FeatureMatrix, compute_mfcc
from ssmseg.pipeline.synth import SourceSpec, SynthScript, render

# spectrally disjoint sources
SOURCE_A = SourceSpec("A", ((300.0, 100.0, 1.0), (1200.0, 150.0, 0.6)), am_rate=4.0)
SOURCE_B = SourceSpec("B", ((2500.0, 200.0, 1.0), (4500.0, 300.0, 0.5)), am_rate=5.0)
SOURCE_C = SourceSpec("C", ((700.0, 120.0, 1.0), (3500.0, 250.0, 0.7)), am_rate=3.0)

SOURCES = (SOURCE_A, SOURCE_B, SOURCE_C)

# 10 minutes, 4 changes at least 60 s apart
FOUR_CHANGE_SCHEDULE = (("A", 110.0), ("B", 120.0), ("A", 120.0), ("C", 130.0), ("B", 120.0))
FOUR_CHANGE_TIMES = [110.0, 230.0, 350.0, 480.0]


def assert_equal(actual_result, expected_result):
    assert (
        actual_result == expected_result
    ), f"Actual result is <{actual_result}>, but expected <{expected_result}>."


def assert_close(actual_result, expected_result, tolerance):
    assert (
        abs(actual_result - expected_result) <= tolerance
    ), f"Actual result is <{actual_result}>, but expected <{expected_result}> +- {tolerance}."


def make_script(schedule, seed=0, sample_rate=16000):
    return SynthScript(
        sources=SOURCES, schedule=tuple(schedule), sample_rate=sample_rate, seed=seed
    )


def render_schedule(schedule, seed=0):
    """Render a schedule of the test sources, returns ``(AudioBuffer, ReferenceAnnotation)``."""
    return render(make_script(schedule, seed=seed))


def schedule_features(schedule, seed=0):
    buffer, _ = render_schedule(schedule, seed=seed)
    return compute_mfcc(buffer)


def random_features(n_frames, dim=13, seed=0, hop_s=0.01):
    rng = np.random.default_rng(seed)
    return FeatureMatrix(rng.standard_normal((n_frames, dim)), hop_s, 0.025, 0.0125)


def switching_features(n_before, n_after, dim=13, seed=0, shift=4.0):
    """Gaussian features whose mean and scale switch after `n_before` frames."""
    rng = np.random.default_rng(seed)
    before = rng.standard_normal((n_before, dim))
    after = 2.0 * rng.standard_normal((n_after, dim)) + shift
    return FeatureMatrix(np.vstack([before, after]), 0.01, 0.025, 0.0125)
