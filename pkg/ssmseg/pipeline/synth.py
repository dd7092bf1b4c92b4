# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""
Scripted synthetic multi-source audio with known change points.

Each source is white noise shaped by parallel second-order resonators and
optionally amplitude modulated at a syllabic rate. A schedule concatenates
sources with 10 ms linear crossfades. Script files use INI sections::

    [global]
    sample_rate = 16000
    seed = 7
    peak = 0.9

    [source A]
    resonances = 300:80:1.0, 2400:150:0.5
    am_rate = 4
    am_depth = 0.5
    level = 0.1

    [schedule]
    schedule = A:60, B:60
"""

import configparser
import dataclasses

import numpy as np
from scipy import signal

from ssmseg.config import WORKING_SAMPLE_RATE
from ssmseg.core.common import get_logger
from ssmseg.core.errors import InvalidScript
from ssmseg.pipeline.audio_io import AudioBuffer
from ssmseg.pipeline.evaluation import ReferenceAnnotation

logger = get_logger(__name__)

CROSSFADE_S = 0.010
# samples rendered and dropped before every entry so resonators start settled
_WARMUP = 2048


@dataclasses.dataclass(frozen=True)
class SourceSpec:
    """
    A synthetic source.

    Parameters
    ----------
    name : str
        Identifier referenced by the schedule.
    resonances : tuple of tuple of float
        ``(center_hz, bandwidth_hz, gain)`` per resonator.
    am_rate : float
        Amplitude modulation rate in Hz; 0 disables modulation.
    am_depth : float
        Modulation depth in ``[0, 1]``.
    level : float
        RMS level of the rendered source before peak normalization.
    """

    name: str
    resonances: tuple
    am_rate: float = 4.0
    am_depth: float = 0.5
    level: float = 0.1


@dataclasses.dataclass(frozen=True)
class SynthScript:
    """
    Sources, schedule and rendering parameters.

    Parameters
    ----------
    sources : tuple of SourceSpec
        Available sources.
    schedule : tuple of tuple
        ``(source_name, duration_s)`` entries in playback order.
    sample_rate : int
        Output sample rate.
    seed : int
        Seed of the ``PCG64`` generator.
    peak : float
        Peak amplitude of the rendered stream.
    """

    sources: tuple
    schedule: tuple
    sample_rate: int = WORKING_SAMPLE_RATE
    seed: int = 0
    peak: float = 0.9

    @property
    def change_times_s(self):
        """Prefix sums of the scheduled durations, the total excluded."""
        return tuple(np.cumsum([d for _, d in self.schedule])[:-1].tolist())

    @property
    def duration_s(self):
        """Total scheduled duration."""
        return float(sum(d for _, d in self.schedule))

    def validate(self):
        """
        Check the script invariants.

        Returns
        -------
        SynthScript
            `self`, to allow chaining.

        Raises
        ------
        InvalidScript
            If any invariant is violated.
        """
        if self.sample_rate <= 0:
            raise InvalidScript("sample_rate must be positive")
        if not 0 < self.peak <= 1:
            raise InvalidScript("peak must be in (0, 1]")
        names = [s.name for s in self.sources]
        if len(set(names)) != len(names):
            raise InvalidScript("source names must be unique")
        nyquist = self.sample_rate / 2
        for source in self.sources:
            if not source.resonances:
                raise InvalidScript(f"source '{source.name}' has no resonances")
            for fc, bw, gain in source.resonances:
                if not (0 < fc < nyquist and bw > 0 and gain >= 0):
                    raise InvalidScript(
                        f"source '{source.name}': resonance {fc}:{bw}:{gain} must satisfy "
                        f"0 < center < {nyquist}, bandwidth > 0, gain >= 0"
                    )
            if source.am_rate < 0 or not 0 <= source.am_depth <= 1 or source.level <= 0:
                raise InvalidScript(f"source '{source.name}': bad modulation or level")
        if not self.schedule:
            raise InvalidScript("schedule needs at least one entry")
        for name, duration in self.schedule:
            if name not in names:
                raise InvalidScript(f"schedule references unknown source '{name}'")
            if duration <= 0:
                raise InvalidScript(f"schedule entry {name}:{duration} needs a positive duration")
        return self


def _floats(text, count, what):
    parts = [p.strip() for p in text.split(":")]
    if len(parts) != count:
        raise InvalidScript(f"expected {count} ':'-separated fields in {what} '{text}'")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as err:
        raise InvalidScript(f"bad number in {what} '{text}'") from err


def _items(text):
    return [item.strip() for item in text.replace("\n", ",").split(",") if item.strip()]


def parse_script(text, source="<script>"):
    """
    Parse a synthesis script.

    Parameters
    ----------
    text : str
        Script contents.
    source : str, default: "<script>"
        Name used in error messages.

    Returns
    -------
    SynthScript

    Raises
    ------
    InvalidScript
        On syntax errors or violated invariants.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
        glob = parser["global"] if parser.has_section("global") else {}
        sources = []
        for section in parser.sections():
            if not section.startswith("source "):
                continue
            opts = parser[section]
            sources.append(
                SourceSpec(
                    name=section[len("source "):].strip(),
                    resonances=tuple(
                        _floats(item, 3, "resonance") for item in _items(opts.get("resonances", ""))
                    ),
                    am_rate=opts.getfloat("am_rate", 4.0),
                    am_depth=opts.getfloat("am_depth", 0.5),
                    level=opts.getfloat("level", 0.1),
                )
            )
        if not parser.has_option("schedule", "schedule"):
            raise InvalidScript(f"{source}: missing [schedule] section with a 'schedule' key")
        schedule = []
        for item in _items(parser.get("schedule", "schedule")):
            name, _, duration = item.rpartition(":")
            schedule.append((name.strip(), _floats(duration, 1, "duration")[0]))
        script = SynthScript(
            sources=tuple(sources),
            schedule=tuple(schedule),
            sample_rate=int(glob.get("sample_rate", WORKING_SAMPLE_RATE)),
            seed=int(glob.get("seed", 0)),
            peak=float(glob.get("peak", 0.9)),
        )
    except (configparser.Error, ValueError) as err:
        if isinstance(err, InvalidScript):
            raise
        raise InvalidScript(f"{source}: {err}") from err
    return script.validate()


def load_script(path):
    """Read and parse a synthesis script file, see ``parse_script``."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_script(f.read(), source=str(path))


def resonator_coefficients(center_hz, bandwidth_hz, sample_rate):
    """
    Two-pole resonator with zeros at DC and Nyquist and unit peak gain.

    Returns
    -------
    tuple of np.ndarray
        ``(b, a)`` filter coefficients.
    """
    r = np.exp(-np.pi * bandwidth_hz / sample_rate)
    theta = 2 * np.pi * center_hz / sample_rate
    b = np.array([1.0, 0.0, -1.0]) * (1 - r * r) / 2
    a = np.array([1.0, -2 * r * np.cos(theta), r * r])
    return b, a


def render_source(spec, n_samples, sample_rate, rng):
    """
    Render `n_samples` of a source at its RMS level.

    Parameters
    ----------
    spec : SourceSpec
        Source to render.
    n_samples : int
        Output length.
    sample_rate : int
        Sample rate.
    rng : np.random.Generator
        Noise generator, advanced by the call.

    Returns
    -------
    np.ndarray
    """
    noise = rng.standard_normal(n_samples + _WARMUP)
    out = np.zeros(n_samples + _WARMUP)
    for fc, bw, gain in spec.resonances:
        b, a = resonator_coefficients(fc, bw, sample_rate)
        out += gain * signal.lfilter(b, a, noise)
    out = out[_WARMUP:]
    if spec.am_rate > 0 and spec.am_depth > 0:
        t = np.arange(n_samples) / sample_rate
        out *= 1 - spec.am_depth / 2 * (1 - np.cos(2 * np.pi * spec.am_rate * t))
    rms = np.sqrt(np.mean(out * out)) if n_samples else 0.0
    return out * (spec.level / rms) if rms > 0 else out


def render(script):
    """
    Render a script into audio and its reference annotation.

    Parameters
    ----------
    script : SynthScript
        Script to render; identical scripts render bit-identical audio.

    Returns
    -------
    tuple
        ``(AudioBuffer, ReferenceAnnotation)``; the audio holds
        ``round(duration_s * sample_rate)`` samples.

    Raises
    ------
    InvalidScript
        If the script violates its invariants.
    """
    script.validate()
    sr = script.sample_rate
    sources = {s.name: s for s in script.sources}
    rng = np.random.Generator(np.random.PCG64(script.seed))
    bounds = [0] + [int(round(t * sr)) for t in np.cumsum([d for _, d in script.schedule])]
    total = bounds[-1]
    half = int(round(CROSSFADE_S * sr / 2))
    out = np.zeros(total)
    for k, (name, _) in enumerate(script.schedule):
        start = max(bounds[k] - half, 0) if k > 0 else 0
        stop = min(bounds[k + 1] + half, total) if k + 1 < len(script.schedule) else total
        if stop <= start:
            continue
        piece = render_source(sources[name], stop - start, sr, rng)
        idx = np.arange(start, stop)
        weight = np.ones(stop - start)
        if half and k > 0:
            weight *= np.clip((idx - (bounds[k] - half) + 0.5) / (2 * half), 0, 1)
        if half and k + 1 < len(script.schedule):
            weight *= np.clip((bounds[k + 1] + half - idx - 0.5) / (2 * half), 0, 1)
        out[start:stop] += weight * piece
    peak = np.max(np.abs(out)) if total else 0.0
    if peak > 0:
        out *= script.peak / peak
    logger.info(f"Rendered {len(script.schedule)} schedule entries into {total / sr:.3f} s of audio")
    ref = ReferenceAnnotation(script.change_times_s, (), script.duration_s)
    return AudioBuffer(np.clip(out, -1.0, 1.0), sr), ref
