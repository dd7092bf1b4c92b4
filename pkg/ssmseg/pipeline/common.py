# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Boundary and segment records shared by the pipeline stages."""

import dataclasses


class Stage:
    """String representations of change point stages."""

    COARSE = "coarse"
    REFINED = "refined"


class Label:
    """String representations of segment labels."""

    NEWSREADER = "newsreader"
    OTHER = "other"
    # not yet labeled
    NONE = ""


@dataclasses.dataclass(frozen=True)
class ChangePoint:
    """
    An acoustic change point.

    Parameters
    ----------
    time_s : float
        Boundary time in seconds.
    stage : str
        ``Stage.COARSE`` or ``Stage.REFINED``.
    score : float
        Novelty score for coarse points, peak BIC for refined points.
    """

    time_s: float
    stage: str
    score: float

    def to_dict(self):
        """JSON form with times and scores rounded to 3 decimals."""
        return {
            "time_s": round(float(self.time_s), 3),
            "stage": self.stage,
            "score": round(float(self.score), 3),
        }

    @classmethod
    def from_dict(cls, obj):
        """Inverse of ``to_dict``."""
        return cls(float(obj["time_s"]), str(obj["stage"]), float(obj["score"]))


@dataclasses.dataclass(frozen=True)
class Segment:
    """
    A speaker-homogeneous interval.

    Parameters
    ----------
    start_s, end_s : float
        Interval bounds in seconds.
    label : str
        ``Label.NEWSREADER``, ``Label.OTHER`` or ``Label.NONE`` before labeling.
    anchor_bic : float
        BIC value against the anchor segment; 0 for the anchor itself.
    """

    start_s: float
    end_s: float
    label: str = Label.NONE
    anchor_bic: float = 0.0

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"Empty segment [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self):
        """Length in seconds."""
        return self.end_s - self.start_s

    def to_dict(self):
        """JSON form with times and scores rounded to 3 decimals."""
        return {
            "start_s": round(float(self.start_s), 3),
            "end_s": round(float(self.end_s), 3),
            "label": self.label,
            "anchor_bic": round(float(self.anchor_bic), 3),
        }

    @classmethod
    def from_dict(cls, obj):
        """Inverse of ``to_dict``."""
        return cls(
            float(obj["start_s"]),
            float(obj["end_s"]),
            str(obj.get("label", Label.NONE)),
            float(obj.get("anchor_bic", 0.0)),
        )
