# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Workers related functionality."""

import itertools
import queue

import cloudpickle as pkl
from multiprocessing import (
    Process,
    JoinableQueue,
    Queue,
)

from ssmseg.core.common import get_logger
from ssmseg.core.errors import WorkerDied

logger = get_logger(__name__)

# seconds between liveness checks while waiting for results
POLL_INTERVAL = 1.0


class Worker(Process):
    """
    Class-process that executes tasks from `self.task_queue`.

    Parameters
    ----------
    task_queue : multiprocessing.JoinableQueue
        A queue of task to execute.
    result_queue : multiprocessing.Queue
        A queue shared by all workers to post ``(batch_id, index, ok, value)`` results to.
    """

    def __init__(self, task_queue, result_queue):
        Process.__init__(self, daemon=True)
        self.task_queue = task_queue
        self.result_queue = result_queue

    def run(self):
        """Run main infinite loop of process to execute tasks from `self.task_queue`."""
        while 1:
            task = self.task_queue.get()
            if task is None:
                self.task_queue.task_done()
                break
            task = pkl.loads(task)
            try:
                value = task()
            except Exception as e:
                self.result_queue.put((task.batch_id, task.index, False, e))
            else:
                self.result_queue.put((task.batch_id, task.index, True, value))
            finally:
                self.task_queue.task_done()
        return

    def add_task(self, task):
        """
        Add `task` to `self.task_queue`.

        Parameters
        ----------
        task : bytes
            Serialized ``Task`` to be added in the queue.
        """
        self.task_queue.put(task)


class ProcessManager:
    """
    Class that controls worker pool and assigns task to workers.

    Parameters
    ----------
    num_workers : int
        Number of worker-processes to start.

    Notes
    -----
    Constructor starts `num_workers` Multiprocessing Workers.
    """

    __instance = None

    def __init__(self, num_workers):
        self.result_queue = Queue()
        self.workers = [None] * num_workers
        self._worker_id = 0
        self._batch_ids = itertools.count()
        for idx in range(num_workers):
            self.workers[idx] = Worker(JoinableQueue(), self.result_queue)
            self.workers[idx].start()
        logger.debug(f"Started {num_workers} worker processes")

    @classmethod
    def get_instance(cls, num_workers=None):
        """
        Get instance of ``ProcessManager``.

        Parameters
        ----------
        num_workers : int, optional
            Number of workers to start if the pool doesn't exist yet.

        Returns
        -------
        ssmseg.core.backends.pymp.process_manager.ProcessManager
        """
        if cls.__instance is None and num_workers is not None:
            cls.__instance = ProcessManager(num_workers=num_workers)
        return cls.__instance

    @classmethod
    def drop_instance(cls):
        """Stop all workers and forget the pool."""
        if cls.__instance is not None:
            for worker in cls.__instance.workers:
                worker.add_task(None)
            for worker in cls.__instance.workers:
                worker.join(timeout=5)
            cls.__instance = None

    def _next(self):
        """
        Get current worker index and move to another with incrementing by one.

        Returns
        -------
        int
        """
        idx = self._worker_id
        self._worker_id += 1
        if self._worker_id == len(self.workers):
            self._worker_id = 0
        return idx

    def submit(self, task):
        """
        Add `task` to task queue of one of workers using round-robin.

        Parameters
        ----------
        task : ssmseg.core.backends.pymp.process_manager.Task
            Task to be added in task queue.
        """
        self.workers[self._next()].add_task(pkl.dumps(task))

    def run_batch(self, func, args_list):
        """
        Execute `func` for every argument tuple and wait for all results.

        Parameters
        ----------
        func : callable
            Function to be executed.
        args_list : list of tuple
            Positional arguments of each task.

        Returns
        -------
        list
            Results in the order of `args_list`.

        Raises
        ------
        WorkerDied
            If a worker process exits before the batch completes; the pool is
            dropped so the next batch starts a fresh one.
        Exception
            The first (by task index) exception raised inside a worker.
        """
        batch_id = next(self._batch_ids)
        for index, args in enumerate(args_list):
            self.submit(Task(func, batch_id, index, *args))

        results = [None] * len(args_list)
        errors = {}
        pending = len(args_list)
        while pending:
            try:
                result_batch, index, ok, value = self.result_queue.get(timeout=POLL_INTERVAL)
            except queue.Empty:
                self._check_workers(pending)
                continue
            if result_batch != batch_id:
                # leftovers of an interrupted batch
                continue
            pending -= 1
            if ok:
                results[index] = value
            else:
                errors[index] = value
        if errors:
            raise errors[min(errors)]
        return results

    def _check_workers(self, pending):
        dead = [w for w in self.workers if not w.is_alive()]
        if dead:
            codes = ", ".join(f"pid {w.pid} exit code {w.exitcode}" for w in dead)
            logger.error(f"Worker process died with {pending} result(s) pending: {codes}")
            for worker in self.workers:
                # pending tasks are never consumed, do not wait on their flush at exit
                worker.task_queue.cancel_join_thread()
                if worker.is_alive():
                    worker.terminate()
            ProcessManager.drop_instance()
            raise WorkerDied(
                f"{len(dead)} worker process(es) exited with {pending} result(s) pending ({codes})"
            )


class Task:
    """
    Class poses as unified callable object to execute in Multiprocessing Worker.

    Parameters
    ----------
    func : callable
        A function to be called in object invocation.
    batch_id : int
        Identifier of the ``run_batch`` call the task belongs to.
    index : int
        Position of the task inside its batch.
    *args : iterable
        Positional arguments to be passed in the `func`.
    """

    def __init__(self, func, batch_id, index, *args):
        self._func = func
        self._args = args
        self.batch_id = batch_id
        self.index = index

    def __call__(self):
        """
        Execute `self._func`.

        Returns
        -------
        object
            The result of `self._func` invocation.
        """
        return self._func(*self._args)
