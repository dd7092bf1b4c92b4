# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Utilities used to initialize execution backend."""

from ssmseg.config import Backend, ThreadCount
from ssmseg.core.common import BackendName
from .backend import BackendProxy


def _make_backend(backend_name):
    if backend_name == BackendName.PYMP:
        from ssmseg.core.backends.pymp.backend import PyMpBackend

        return PyMpBackend(num_workers=ThreadCount.get_resolved())
    elif backend_name == BackendName.PYSEQ:
        from ssmseg.core.backends.pyseq.backend import PySeqBackend

        return PySeqBackend()
    raise ValueError("Unrecognized execution backend.")


def init_backend():
    """
    Initialize an execution backend.

    Notes
    -----
    The concrete execution backend can be set via
    `SSMSEG_BACKEND` environment variable or ``Backend`` config value.
    The number of workers is taken from ``ThreadCount``.
    """
    BackendProxy.get_instance(backend_cls=_make_backend(Backend.get()))


def get_backend_proxy():
    """
    Get proxy object of the backend through which operations will be performed.

    Returns
    -------
    Backend
        The ``Backend`` instance that is considered as the proxy object.
    """
    backend = BackendProxy.get_instance()

    if backend is None:
        init_backend()
        backend = BackendProxy.get_instance()

    return backend
