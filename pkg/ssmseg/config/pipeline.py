# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Numeric parameters of the segmentation pipeline."""

import dataclasses
import typing

from ssmseg.config.parameter import OptionalFloat, get_type_descriptor
from ssmseg.core.errors import ConfigError

WORKING_SAMPLE_RATE = 16000


@dataclasses.dataclass(frozen=True)
class MfccConfig:
    """
    Frame geometry and front-end parameters of MFCC extraction.

    ``mel_fmax`` set to ``None`` means half the sample rate.
    """

    frame_len_s: float = 0.025
    hop_s: float = 0.010
    n_fft: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    preemph: float = 0.97
    mel_fmin: float = 0.0
    mel_fmax: typing.Optional[float] = None
    log_floor: float = 1e-10

    def frame_len(self, sample_rate):
        """Frame length in samples."""
        return int(round(self.frame_len_s * sample_rate))

    def hop_len(self, sample_rate):
        """Hop in samples."""
        return int(round(self.hop_s * sample_rate))

    def validate(self, sample_rate):
        """
        Check the invariants for a given sample rate.

        Parameters
        ----------
        sample_rate : int
            Sample rate the features are computed at.

        Raises
        ------
        ConfigError
            If any invariant is violated.
        """
        fmax = sample_rate / 2 if self.mel_fmax is None else self.mel_fmax
        checks = [
            (self.frame_len_s > 0 and self.hop_s > 0, "frame_len_s and hop_s must be positive"),
            (self.hop_len(sample_rate) >= 1, "hop_s is shorter than one sample"),
            (self.hop_s <= self.frame_len_s, "hop_s must not exceed frame_len_s"),
            (
                self.n_fft > 0 and self.n_fft & (self.n_fft - 1) == 0,
                "n_fft must be a positive power of two",
            ),
            (
                self.frame_len(sample_rate) <= self.n_fft,
                "frame_len_s * sample_rate must not exceed n_fft",
            ),
            (self.n_mels > 0, "n_mels must be positive"),
            (0 < self.n_coeffs <= self.n_mels, "n_coeffs must be in [1, n_mels]"),
            (0.0 <= self.preemph < 1.0, "preemph must be in [0, 1)"),
            (0.0 <= self.mel_fmin < fmax <= sample_rate / 2, "mel band must lie in [0, sample_rate/2]"),
            (self.log_floor > 0, "log_floor must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)


@dataclasses.dataclass(frozen=True)
class RefineConfig:
    """Second pass (sliding-window BIC) parameters."""

    context_s: float = 20.0
    win_s: float = 2.0
    step_s: float = 0.1
    min_gap_s: float = 2.0

    def validate(self):
        """
        Check the invariants.

        Raises
        ------
        ConfigError
            If any invariant is violated.
        """
        if min(self.context_s, self.win_s, self.step_s) <= 0 or self.min_gap_s < 0:
            raise ConfigError("refinement durations must be positive")
        if 2 * self.win_s > self.context_s:
            raise ConfigError("win_s * 2 must not exceed context_s")
        if self.step_s > self.win_s:
            raise ConfigError("step_s must not exceed win_s")


_MFCC_FIELDS = tuple(f.name for f in dataclasses.fields(MfccConfig))
_REFINE_FIELDS = tuple(f.name for f in dataclasses.fields(RefineConfig))


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """
    All parameters of a segmentation run.

    The defaults reproduce the published setup: 25 ms frames every 10 ms,
    5 s first-pass segments, 20 s refinement context, 2 s windows every 100 ms.
    """

    sample_rate: int = WORKING_SAMPLE_RATE
    # MFCC front-end
    frame_len_s: float = 0.025
    hop_s: float = 0.010
    n_fft: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    preemph: float = 0.97
    mel_fmin: float = 0.0
    mel_fmax: typing.Optional[float] = None
    log_floor: float = 1e-10
    # first pass
    segment_len_s: float = 5.0
    kernel_half_width: int = 2
    peak_k: float = 2.0
    epsilon: float = 1e-6
    penalty_lambda: float = 0.0
    min_novelty_lambda: float = 1.0
    # second pass
    context_s: float = 20.0
    win_s: float = 2.0
    step_s: float = 0.1
    min_gap_s: float = 2.0
    # labeling
    tau: float = 0.0
    label_penalty_lambda: float = 1.0

    @property
    def mfcc(self):
        """``MfccConfig`` view of the front-end fields."""
        return MfccConfig(**{name: getattr(self, name) for name in _MFCC_FIELDS})

    @property
    def refine(self):
        """``RefineConfig`` view of the second pass fields."""
        return RefineConfig(**{name: getattr(self, name) for name in _REFINE_FIELDS})

    def validate(self):
        """
        Check the invariants of every component.

        Returns
        -------
        PipelineConfig
            `self`, to allow chaining.

        Raises
        ------
        ConfigError
            If any invariant is violated.
        """
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        self.mfcc.validate(self.sample_rate)
        self.refine.validate()
        if self.segment_len_s < self.hop_s * 2:
            raise ConfigError("segment_len_s must span at least two frames")
        if self.kernel_half_width < 1:
            raise ConfigError("kernel_half_width must be at least 1")
        if self.epsilon < 0 or self.penalty_lambda < 0 or self.label_penalty_lambda < 0:
            raise ConfigError("epsilon and penalty weights must be non-negative")
        if self.min_novelty_lambda < 0:
            raise ConfigError("min_novelty_lambda must be non-negative")
        return self

    @classmethod
    def keys(cls):
        """
        Get the names of all configuration keys in declaration order.

        Returns
        -------
        tuple of str
        """
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def key_type(cls, key):
        """
        Get the config type of `key` as used by the type descriptors.

        Parameters
        ----------
        key : str
            Configuration key.

        Returns
        -------
        type
        """
        annotation = {f.name: f.type for f in dataclasses.fields(cls)}[key]
        if annotation in (typing.Optional[float], "typing.Optional[float]"):
            return OptionalFloat
        if annotation in (int, "int"):
            return int
        return float

    @classmethod
    def from_dict(cls, values, base=None):
        """
        Build a config from a mapping of key to raw or typed value.

        Parameters
        ----------
        values : dict
            Keys must be config keys; values may be strings or numbers.
        base : PipelineConfig, optional
            Config providing the values of absent keys. Defaults are used if it isn't provided.

        Returns
        -------
        PipelineConfig

        Raises
        ------
        ConfigError
            On unknown keys, undecodable values or violated invariants.
        """
        base = cls() if base is None else base
        known = set(cls.keys())
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")
        decoded = {}
        for key, value in values.items():
            descriptor = get_type_descriptor(cls.key_type(key))
            if not descriptor.verify(value):
                raise ConfigError(
                    f"Bad value {value!r} for '{key}': expected {descriptor.help}"
                )
            decoded[key] = descriptor.normalize(value)
        return dataclasses.replace(base, **decoded).validate()

    def to_dict(self):
        """
        Get the config as a plain mapping.

        Returns
        -------
        dict
        """
        return dataclasses.asdict(self)

    @classmethod
    def from_file(cls, path, base=None):
        """
        Read a plain-text ``key = value`` config file.

        Blank lines and lines starting with ``#`` are ignored.

        Parameters
        ----------
        path : str or os.PathLike
            Path to the config file.
        base : PipelineConfig, optional
            Config providing the values of absent keys.

        Returns
        -------
        PipelineConfig

        Raises
        ------
        ConfigError
            If the file cannot be read or holds bad keys or values.
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
        except (OSError, UnicodeDecodeError) as err:
            raise ConfigError(f"cannot read config file {path}: {err}") from err
        values = {}
        for lineno, line in enumerate(lines, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            values[key] = value
        return cls.from_dict(values, base=base)

    def to_text(self):
        """
        Render the config in the ``key = value`` file format.

        Returns
        -------
        str
        """
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key} = {'none' if value is None else repr(value)}")
        return "\n".join(lines) + "\n"
