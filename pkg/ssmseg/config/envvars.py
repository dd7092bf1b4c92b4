# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Config entities which can be used for ssmseg runtime behavior tuning."""

from ssmseg.config.parameter import EnvironmentVariable, ExactStr
from ssmseg.core.common import BackendName


class ThreadCount(EnvironmentVariable, type=int):
    """How many workers internal parallelism may use (0 means one per CPU core)."""

    varname = "SSMSEG_THREADS"
    default = 0

    @classmethod
    def get_resolved(cls):
        """
        Get the effective number of workers.

        Returns
        -------
        int
            ``ThreadCount`` value with 0 (and negative values) resolved to the CPU count.
        """
        value = cls.get()
        if value > 0:
            return value
        import multiprocessing

        return multiprocessing.cpu_count()


class Backend(EnvironmentVariable, type=str):
    """Execution backend to run the parallel parts of the pipeline by."""

    varname = "SSMSEG_BACKEND"
    choices = (BackendName.PYSEQ, BackendName.PYMP)

    @classmethod
    def _get_default(cls):
        """
        Get default value of the config.

        Returns
        -------
        str
        """
        if ThreadCount.get_resolved() > 1:
            return BackendName.PYMP
        return BackendName.PYSEQ


class IsDebugLog(EnvironmentVariable, type=bool):
    """Whether to emit DEBUG level log records."""

    varname = "SSMSEG_DEBUG_LOG"
    default = False


class LogFile(EnvironmentVariable, type=ExactStr):
    """File to write log records to instead of stderr."""

    varname = "SSMSEG_LOG_FILE"
