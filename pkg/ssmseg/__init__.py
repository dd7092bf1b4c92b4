# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""High-level API."""

from .api import (
    SegmentationResult,
    load_audio,
    first_pass,
    segment_audio,
    segment_baseline,
)
from .config import PipelineConfig
from ._version import __version__

__all__ = [
    "SegmentationResult",
    "load_audio",
    "first_pass",
    "segment_audio",
    "segment_baseline",
    "PipelineConfig",
    "__version__",
]
