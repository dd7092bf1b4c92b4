# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Exceptions raised by ssmseg."""


class SsmsegError(Exception):
    """Base class for all errors raised by ssmseg."""


class UnsupportedEncoding(SsmsegError, ValueError):
    """WAV data is stored in an encoding the decoder does not handle (e.g. compressed)."""


class CorruptHeader(SsmsegError, ValueError):
    """RIFF, ``fmt `` or ``data`` chunk layout is inconsistent."""


class AudioTooShort(SsmsegError, ValueError):
    """Not enough audio for the requested analysis."""


class EmptyRange(SsmsegError, ValueError):
    """A frame range selects no feature vectors."""


class DegenerateModel(SsmsegError, ArithmeticError):
    """A covariance matrix is not positive definite after regularization."""


class KernelTooLarge(SsmsegError, ValueError):
    """The novelty kernel does not fit the similarity matrix."""


class ContextOutOfAudio(SsmsegError, ValueError):
    """The refinement windows cannot be placed inside the audio."""


class PointOutOfRange(SsmsegError, ValueError):
    """A change point lies outside the open interval ``(0, duration)`` or is out of order."""


class InvalidScript(SsmsegError, ValueError):
    """A synthesis script is malformed or violates its invariants."""


class ConfigError(SsmsegError, ValueError):
    """A pipeline configuration is malformed or violates its invariants."""


class ParseError(SsmsegError, ValueError):
    """An input file (reference annotation, hypothesis JSON) cannot be parsed."""


class WorkerDied(SsmsegError, RuntimeError):
    """A worker process exited while results of its batch were pending."""
