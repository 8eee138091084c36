import math

import pytest

from fgcoupled import CoupledMapPair, MapSpec, SpaceDescriptor
from fgcoupled.cli import load_problem

INF = math.inf


def box(lo, hi):
    return SpaceDescriptor(tuple(lo), tuple(hi))


def affine_pair(X, Y, AF, BF, AG, BG, cF=None, cG=None):
    return CoupledMapPair(X, Y, MapSpec.affine(AF, BF, cF), MapSpec.affine(AG, BG, cG))


@pytest.fixture
def ex1():
    """x/3 - y/4 and y/8 - x/6 on (-inf, 0] x [0, inf)."""
    return affine_pair(box([-INF], [0.0]), box([0.0], [INF]),
                       [[1 / 3]], [[-1 / 4]], [[1 / 8]], [[-1 / 6]])


@pytest.fixture
def ex1_unit():
    """Example 1 maps restricted to [-1, 0] x [0, 1]."""
    return affine_pair(box([-1.0], [0.0]), box([0.0], [1.0]),
                       [[1 / 3]], [[-1 / 4]], [[1 / 8]], [[-1 / 6]])


@pytest.fixture
def ex2():
    return affine_pair(box([-1.0], [0.0]), box([0.0], [1.0]),
                       [[1 / 3]], [[0.0]], [[1 / 4]], [[0.0]])


@pytest.fixture
def eighth():
    return affine_pair(box([-1.0], [0.0]), box([0.0], [1.0]),
                       [[1 / 8]], [[-1 / 8]], [[1 / 8]], [[-1 / 8]])


@pytest.fixture
def constant_pair():
    X, Y = box([-1.0], [0.0]), box([0.0], [1.0])
    return CoupledMapPair(X, Y, MapSpec.constant([-0.5], 1, 1), MapSpec.constant([0.5], 1, 1))


@pytest.fixture(params=["banach_example1.prob", "quasi_example2.prob", "banach_unique.prob"])
def shipped(request):
    return load_problem(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(RESULTS, key=lambda s: (len(s.split("-")[0]), s)):
        terminalreporter.write_line(RESULTS[label])
