# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Commons used by the core functionality."""

import logging
import sys


class BackendName:
    """String representations of ssmseg execution backends."""

    PYMP = "pymp"
    PYSEQ = "pyseq"


def get_logger(logger_name, file_name=None, activate=None):
    """
    Configure logger and get it's instance.

    Parameters
    ----------
    logger_name : str
        Name of a logger.
    file_name : str, optional
        File name. If it isn't provided, ``LogFile`` config value is used and
        stderr when that is unset as well.
    activate : bool, optional
        Write DEBUG records or not. If it isn't provided, ``IsDebugLog`` config value is used.

    Returns
    -------
    object
        A Python logger object.
    """
    from ssmseg.config import IsDebugLog, LogFile

    logger = logging.getLogger(logger_name)
    if not logger.handlers:
        if file_name is None:
            file_name = LogFile.get()
        f_format = logging.Formatter("%(levelname)s %(name)s: %(message)s")
        if file_name:
            handler = logging.FileHandler(file_name, delay=True)
        else:
            handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(f_format)
        logger.addHandler(handler)

    if activate is None:
        activate = IsDebugLog.get()
    if activate:
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.NOTSET)

    return logger
