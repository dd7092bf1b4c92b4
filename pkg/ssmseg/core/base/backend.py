# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Core base backend specific functionality."""

from abc import ABC, abstractmethod


class Backend(ABC):
    """An interface that represents the parent class for any backend class."""

    @abstractmethod
    def map(self, func, args_list):
        """
        Apply `func` to every argument tuple of `args_list`.

        Parameters
        ----------
        func : callable
            Function to be executed for each task.
        args_list : list of tuple
            Positional arguments of each task.

        Returns
        -------
        list
            Results in the order of `args_list`.

        Notes
        -----
        The method of the child class for the concrete backend must return
        results in submission order regardless of completion order.
        """
        pass

    @abstractmethod
    def num_workers(self):
        """
        Get the number of workers used by the execution backend.

        Returns
        -------
        int
        """
        pass

    @abstractmethod
    def shutdown(self):
        """Shutdown an execution backend."""
        pass

    @abstractmethod
    def is_initialized(self):
        """
        Check if a backend has already been initialized.

        Returns
        -------
        bool
        """
        pass


class BackendProxy(Backend):
    """
    A class which instance is a proxy object to dispatch operations to the concrete backend.

    Parameters
    ----------
    backend_cls : Backend
        Instance of the concrete backend class.
    """

    __instance = None

    def __init__(self, backend_cls):
        if self.__instance is None:
            self._backend_cls = backend_cls

    @classmethod
    def get_instance(cls, backend_cls=None):
        """
        Get instance of this class.

        Parameters
        ----------
        backend_cls : Backend, optional
            Instance of the concrete backend class.
        """
        if cls.__instance is None and backend_cls is not None:
            cls.__instance = BackendProxy(backend_cls)
        return cls.__instance

    @classmethod
    def reset_instance(cls):
        """Drop the proxied backend so that the next initialization picks the configured one."""
        cls.__instance = None

    @property
    def backend(self):
        """The concrete backend instance."""
        return self._backend_cls

    def map(self, func, args_list):
        """
        Apply `func` to every argument tuple of `args_list`.

        Parameters
        ----------
        func : callable
            Function to be executed for each task.
        args_list : list of tuple
            Positional arguments of each task.

        Returns
        -------
        list
            Results in the order of `args_list`.
        """
        return self._backend_cls.map(func, args_list)

    def num_workers(self):
        """
        Get the number of workers used by the execution backend.

        Returns
        -------
        int
        """
        return self._backend_cls.num_workers()

    def shutdown(self):
        """Shutdown an execution backend."""
        self._backend_cls.shutdown()
        BackendProxy.reset_instance()

    def is_initialized(self):
        """
        Check if the backend has already been initialized.

        Returns
        -------
        bool
        """
        return self._backend_cls.is_initialized()
