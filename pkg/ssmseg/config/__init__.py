# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Config entities which can be used for ssmseg behavior tuning."""

from .envvars import ThreadCount, Backend, IsDebugLog, LogFile
from .parameter import ValueSource
from .pipeline import (
    WORKING_SAMPLE_RATE,
    MfccConfig,
    RefineConfig,
    PipelineConfig,
)

__all__ = [
    "ThreadCount",
    "Backend",
    "IsDebugLog",
    "LogFile",
    "ValueSource",
    "WORKING_SAMPLE_RATE",
    "MfccConfig",
    "RefineConfig",
    "PipelineConfig",
]
