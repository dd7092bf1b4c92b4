# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Scoring hypothesis segmentations against reference annotations."""

import collections
import dataclasses
import json
import typing

from ssmseg.core.errors import ParseError
from ssmseg.pipeline.common import ChangePoint, Label, Segment, Stage
from ssmseg.pipeline.formats import atomic_write
from ssmseg.pipeline.labeling import cut_segments

DEFAULT_TOLERANCE_S = 0.5

CountComparison = collections.namedtuple("CountComparison", ["hyp_count", "ref_count", "delta"])


@dataclasses.dataclass(frozen=True)
class ReferenceAnnotation:
    """
    Ground-truth change times of a recording.

    Parameters
    ----------
    change_times_s : tuple of float
        Strictly increasing change times.
    labels : tuple of str
        Optional labels per segment; empty if not annotated.
    duration_s : float, optional
        Recording duration when known.
    """

    change_times_s: tuple = ()
    labels: tuple = ()
    duration_s: typing.Optional[float] = None

    def __post_init__(self):
        times = tuple(float(t) for t in self.change_times_s)
        object.__setattr__(self, "change_times_s", times)
        object.__setattr__(self, "labels", tuple(self.labels))
        bounds = [0.0, *times] + ([self.duration_s] if self.duration_s is not None else [])
        if times and not all(a < b for a, b in zip(bounds, bounds[1:])):
            raise ValueError("reference change times must be strictly increasing inside (0, duration)")
        if self.labels and len(self.labels) != self.n_segments:
            raise ValueError(f"{len(self.labels)} labels for {self.n_segments} segment(s)")

    @property
    def n_segments(self):
        """Number of reference segments."""
        return len(self.change_times_s) + 1

    def to_text(self):
        """
        Render the annotation in the reference file format.

        Returns
        -------
        str
        """
        lines = ["# reference change points (seconds)"]
        if self.duration_s is not None:
            lines.append(f"duration {self.duration_s:.6f}")
        lines.extend(f"{t:.6f}" for t in self.change_times_s)
        lines.extend(f"label {i} {label}" for i, label in enumerate(self.labels))
        return "\n".join(lines) + "\n"


def parse_reference(text, source="<reference>"):
    """
    Parse the reference file format.

    One change time in seconds per line; ``#`` starts a comment; segment labels
    are given as ``label <index> <newsreader|other>`` and the recording length
    as ``duration <seconds>``.

    Parameters
    ----------
    text : str
        File contents.
    source : str, default: "<reference>"
        Name used in error messages.

    Returns
    -------
    ReferenceAnnotation

    Raises
    ------
    ParseError
        On malformed lines or inconsistent content.
    """
    times, labels, duration = [], {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "label" and len(fields) == 3:
                if fields[2] not in (Label.NEWSREADER, Label.OTHER):
                    raise ValueError(f"unknown label '{fields[2]}'")
                labels[int(fields[1])] = fields[2]
            elif fields[0] == "duration" and len(fields) == 2:
                duration = float(fields[1])
            elif len(fields) == 1:
                times.append(float(fields[0]))
            else:
                raise ValueError(f"unexpected line '{line}'")
        except ValueError as err:
            raise ParseError(f"{source}:{lineno}: {err}") from err
    try:
        ordered = ()
        if labels:
            if sorted(labels) != list(range(len(times) + 1)):
                raise ValueError("labels must cover every segment exactly once")
            ordered = tuple(labels[i] for i in range(len(times) + 1))
        return ReferenceAnnotation(tuple(times), ordered, duration)
    except ValueError as err:
        raise ParseError(f"{source}: {err}") from err


def read_reference(path):
    """Read a reference annotation file, see ``parse_reference``."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_reference(f.read(), source=str(path))


def write_reference(path, ref):
    """Atomically write `ref` in the reference file format."""
    atomic_write(path, ref.to_text())


@dataclasses.dataclass(frozen=True)
class Hypothesis:
    """Change points and segments read back from a segmentation report."""

    duration_s: float
    change_points: tuple
    segments: tuple

    @property
    def refined_times(self):
        """Times of the refined change points."""
        return [p.time_s for p in self.change_points if p.stage == Stage.REFINED]


def parse_hypothesis(text, source="<hypothesis>"):
    """
    Parse a segmentation JSON report.

    Parameters
    ----------
    text : str
        File contents.
    source : str, default: "<hypothesis>"
        Name used in error messages.

    Returns
    -------
    Hypothesis

    Raises
    ------
    ParseError
        If the document is not valid JSON, misses required fields, or its
        refined change points are not strictly increasing inside
        ``(0, duration_s)``.
    """
    try:
        obj = json.loads(text)
        hyp = Hypothesis(
            duration_s=float(obj["duration_s"]),
            change_points=tuple(ChangePoint.from_dict(p) for p in obj["change_points"]),
            segments=tuple(Segment.from_dict(s) for s in obj["segments"]),
        )
    except (ValueError, KeyError, TypeError) as err:
        raise ParseError(f"{source}: malformed segmentation report: {err}") from err
    bounds = [0.0, *hyp.refined_times, hyp.duration_s]
    if any(not prev < cur for prev, cur in zip(bounds, bounds[1:])):
        raise ParseError(
            f"{source}: refined change points must be strictly increasing inside "
            f"(0, {hyp.duration_s}), got {hyp.refined_times}"
        )
    return hyp


def read_hypothesis(path):
    """Read a segmentation JSON report, see ``parse_hypothesis``."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_hypothesis(f.read(), source=str(path))


def compare_counts(hyp, ref):
    """
    Compare hypothesis and reference segment counts.

    Parameters
    ----------
    hyp : list of Segment
        Hypothesis segments.
    ref : ReferenceAnnotation
        Ground truth.

    Returns
    -------
    CountComparison
        ``(hyp_count, ref_count, hyp_count - ref_count)``.
    """
    hyp_count = len(hyp)
    return CountComparison(hyp_count, ref.n_segments, hyp_count - ref.n_segments)


@dataclasses.dataclass(frozen=True)
class BoundaryScore:
    """Boundary detection precision, recall and F1 at a tolerance."""

    precision: float
    recall: float
    f1: float
    matched: int
    tolerance_s: float

    def to_dict(self):
        return dataclasses.asdict(self)


def _ratio(matched, total, other_total):
    if total:
        return matched / total
    return 1.0 if other_total == 0 else 0.0


def boundary_prf(hyp_times, ref_times, tolerance_s=DEFAULT_TOLERANCE_S):
    """
    Score hypothesis boundaries against reference boundaries.

    Hypothesis boundaries are visited in time order; each one matches the
    nearest still unmatched reference boundary within `tolerance_s` (the
    earlier one on ties).

    Parameters
    ----------
    hyp_times : list of float
        Sorted hypothesis boundary times.
    ref_times : list of float
        Sorted reference boundary times.
    tolerance_s : float, default: 0.5
        Maximal distance of a match.

    Returns
    -------
    BoundaryScore
        Precision and recall are 1.0 when both lists are empty; the side with
        an empty list scores 0.0 otherwise.
    """
    unmatched = list(ref_times)
    matched = 0
    for t in sorted(hyp_times):
        in_reach = [(abs(r - t), r) for r in unmatched if abs(r - t) <= tolerance_s]
        if in_reach:
            unmatched.remove(min(in_reach)[1])
            matched += 1
    precision = _ratio(matched, len(hyp_times), len(ref_times))
    recall = _ratio(matched, len(ref_times), len(hyp_times))
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return BoundaryScore(precision, recall, f1, matched, float(tolerance_s))


def evaluate(hyp, ref, tolerance_s=DEFAULT_TOLERANCE_S):
    """
    Build the evaluation report of a hypothesis against a reference.

    The hypothesis boundaries are its refined change points; the hypothesis
    segment count is the count obtained by cutting the audio at them.

    Parameters
    ----------
    hyp : Hypothesis
        Parsed segmentation report.
    ref : ReferenceAnnotation
        Ground truth.
    tolerance_s : float, default: 0.5
        Boundary matching tolerance.

    Returns
    -------
    dict
        JSON-ready report.
    """
    times = hyp.refined_times
    counts = compare_counts(cut_segments(times, hyp.duration_s), ref)
    score = boundary_prf(times, list(ref.change_times_s), tolerance_s)
    return {
        "hyp_count": counts.hyp_count,
        "ref_count": counts.ref_count,
        "delta": counts.delta,
        "boundaries": {
            key: round(value, 6) if isinstance(value, float) else value
            for key, value in score.to_dict().items()
        },
    }
