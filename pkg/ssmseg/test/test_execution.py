# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

import os

import numpy as np
import pytest

from ssmseg.core import api as execution
from ssmseg.core.backends.pymp.backend import PyMpBackend
from ssmseg.core.backends.pyseq.backend import PySeqBackend
from ssmseg.core.errors import EmptyRange, WorkerDied
from ssmseg.pipeline.ssm import build_ssm
from .utils import assert_equal, random_features



@pytest.fixture(scope="module", autouse=True)
def initialized_backend():
    # other test modules shut the global backend down; re-init for this module
    execution.init()


def square(x):
    return x * x


def fail_on(x, bad):
    if x == bad:
        raise EmptyRange(f"bad input {x}")
    return x


def exit_on(x, bad):
    if x == bad:
        os._exit(3)
    return x


@pytest.fixture(params=["pyseq", "pymp"])
def backend(request):
    instance = PySeqBackend() if request.param == "pyseq" else PyMpBackend(num_workers=2)
    yield instance
    instance.shutdown()


def test_is_initialized():
    assert execution.is_initialized()
    assert execution.num_workers() >= 1


def test_map_keeps_order(backend):
    assert_equal(backend.map(square, [(i,) for i in range(10)]), [i * i for i in range(10)])


def test_map_lambda(backend):
    assert_equal(backend.map(lambda a, b: a - b, [(5, 3), (1, 1)]), [2, 0])


def test_map_empty(backend):
    assert_equal(backend.map(square, []), [])


def test_map_reraises_first_error(backend):
    with pytest.raises(EmptyRange, match="bad input 3"):
        backend.map(fail_on, [(i, 3) for i in range(6)])
    # the pool survives a failed batch
    assert_equal(backend.map(square, [(2,), (3,)]), [4, 9])


def test_dead_worker_fails_the_batch():
    backend = PyMpBackend(num_workers=2)
    try:
        with pytest.raises(WorkerDied, match="exit code 3"):
            backend.map(exit_on, [(i, 2) for i in range(6)])
        assert not backend.is_initialized()
        # a fresh pool serves the next batch
        assert_equal(backend.map(square, [(2,), (3,)]), [4, 9])
    finally:
        backend.shutdown()


@pytest.mark.parametrize(
    "count,parts,expected",
    [
        (0, 4, []),
        (3, 1, [[0, 1, 2]]),
        (5, 2, [[0, 2, 4], [1, 3]]),
        (2, 8, [[0], [1]]),
    ],
)
def test_split_round_robin(count, parts, expected):
    assert_equal(execution.split_round_robin(count, parts), expected)


def test_ssm_identical_across_backends(monkeypatch):
    features = random_features(3000, seed=11)
    matrices = []
    for instance in (PySeqBackend(), PyMpBackend(num_workers=3)):
        monkeypatch.setattr(execution, "get_backend_proxy", lambda instance=instance: instance)
        try:
            matrices.append(build_ssm(features, segment_len_s=2.0).values)
        finally:
            instance.shutdown()
    assert np.array_equal(matrices[0], matrices[1])
