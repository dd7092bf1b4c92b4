# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""High-level API: the two-pass segmentation pipeline and the single-pass baseline."""

import dataclasses
import os
import typing

from ssmseg.config import PipelineConfig
from ssmseg.core.common import get_logger
from ssmseg.pipeline.audio_io import AudioBuffer, load_wav, resample
from ssmseg.pipeline.features import compute_mfcc
from ssmseg.pipeline.formats import rttm_lines
from ssmseg.pipeline.labeling import cut_segments, label_newsreader, newsreader_regions
from ssmseg.pipeline.refine import refine_all, sliding_window_changes
from ssmseg.pipeline.ssm import build_ssm, novelty_curve, novelty_floor, pick_coarse_changes

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class SegmentationResult:
    """
    Everything a segmentation run produced.

    Parameters
    ----------
    audio : AudioBuffer
        Audio at the working rate.
    config : PipelineConfig
        Parameters of the run.
    features : FeatureMatrix
        MFCC vectors.
    coarse : list of ChangePoint
        First-pass points; empty for the single-pass baseline.
    refined : list of ChangePoint
        Final change points.
    segments : list of Segment
        Labeled segments tiling the audio.
    ssm : SimilarityMatrix, optional
        First-pass matrix; ``None`` for the baseline.
    novelty : NoveltyCurve, optional
        First-pass novelty; ``None`` for the baseline.
    """

    audio: AudioBuffer
    config: PipelineConfig
    features: typing.Any
    coarse: list
    refined: list
    segments: list
    ssm: typing.Any = None
    novelty: typing.Any = None

    @property
    def duration_s(self):
        return self.audio.duration_seconds

    @property
    def change_points(self):
        """Coarse points followed by refined points."""
        return list(self.coarse) + list(self.refined)

    def to_dict(self, audio_path=None):
        """
        JSON report of the run.

        Parameters
        ----------
        audio_path : str, optional
            Path echoed in the report. ``AudioBuffer.source_path`` is used if it isn't provided.

        Returns
        -------
        dict
        """
        return {
            "audio": audio_path if audio_path is not None else self.audio.source_path,
            "duration_s": round(self.duration_s, 3),
            "change_points": [p.to_dict() for p in self.change_points],
            "segments": [s.to_dict() for s in self.segments],
            "config": self.config.to_dict(),
        }

    def rttm_lines(self, file_id=None):
        """RTTM lines of the labeled segments."""
        if file_id is None:
            file_id = os.path.splitext(os.path.basename(self.audio.source_path))[0] or "audio"
        return rttm_lines(file_id, self.segments)

    def newsreader_regions(self):
        """Contiguous newsreader regions, see ``newsreader_regions``."""
        return newsreader_regions(self.segments)


def load_audio(audio, config=None):
    """
    Get `audio` at the working rate of `config`.

    Parameters
    ----------
    audio : str, os.PathLike or AudioBuffer
        WAV file path or already decoded audio.
    config : PipelineConfig, optional
        Parameters. Defaults are used if it isn't provided.

    Returns
    -------
    AudioBuffer
    """
    config = PipelineConfig() if config is None else config
    if isinstance(audio, AudioBuffer):
        return resample(audio, config.sample_rate)
    return load_wav(audio, target_rate=config.sample_rate)


def first_pass(features, config):
    """
    Run the self-similarity pass.

    Returns
    -------
    tuple
        ``(SimilarityMatrix, NoveltyCurve, list of ChangePoint)``.
    """
    ssm = build_ssm(features, config.segment_len_s, config.epsilon, config.penalty_lambda)
    novelty = novelty_curve(ssm, config.kernel_half_width)
    floor = novelty_floor(ssm, config.min_novelty_lambda)
    coarse = pick_coarse_changes(novelty, ssm, config.peak_k, floor)
    return ssm, novelty, coarse


def _label(refined, features, duration_s, config):
    segments = cut_segments(refined, duration_s)
    return label_newsreader(
        segments, features, config.tau, config.epsilon, config.label_penalty_lambda
    )


def segment_audio(audio, config=None):
    """
    Run the two-pass segmentation: MFCC, self-similarity coarse detection,
    sliding-window BIC refinement, cutting and newsreader labeling.

    Parameters
    ----------
    audio : str, os.PathLike or AudioBuffer
        WAV file path or decoded audio.
    config : PipelineConfig, optional
        Parameters. Defaults are used if it isn't provided.

    Returns
    -------
    SegmentationResult
    """
    config = (PipelineConfig() if config is None else config).validate()
    buffer = load_audio(audio, config)
    features = compute_mfcc(buffer, config.mfcc)
    ssm, novelty, coarse = first_pass(features, config)
    refined = refine_all(features, coarse, config.refine, config.epsilon)
    segments = _label(refined, features, buffer.duration_seconds, config)
    logger.info(
        f"Segmented {buffer.duration_seconds:.3f} s into {len(segments)} segment(s) "
        f"from {len(coarse)} coarse point(s)"
    )
    return SegmentationResult(buffer, config, features, coarse, refined, segments, ssm, novelty)


def segment_baseline(audio, config=None, threshold=0.0):
    """
    Segment with the single-pass thresholded sliding-window BIC detector.

    Parameters
    ----------
    audio : str, os.PathLike or AudioBuffer
        WAV file path or decoded audio.
    config : PipelineConfig, optional
        Parameters; ``win_s``, ``step_s`` and ``min_gap_s`` drive the detector.
    threshold : float, default: 0.0
        Minimal BIC of a detected peak.

    Returns
    -------
    SegmentationResult
    """
    config = (PipelineConfig() if config is None else config).validate()
    buffer = load_audio(audio, config)
    features = compute_mfcc(buffer, config.mfcc)
    refined = sliding_window_changes(
        features, config.win_s, config.step_s, threshold, config.min_gap_s, config.epsilon
    )
    segments = _label(refined, features, buffer.duration_seconds, config)
    return SegmentationResult(buffer, config, features, [], refined, segments)
