"""Shared fixtures: the two-test-treatments-vs-control setting reused throughout."""

import numpy as np
import pytest

from wdesign import DesignSpec, EstimableSystem, estimation_space

SQRT2 = np.sqrt(2.0)


def contrast(v, i, j):
    """Normalized elementary contrast comparing treatments i and j (1-based)."""
    q = np.zeros(v)
    q[i - 1], q[j - 1] = -1.0, 1.0
    return q / SQRT2


@pytest.fixture
def q1():
    return contrast(3, 1, 2)


@pytest.fixture
def q2():
    return contrast(3, 1, 3)


@pytest.fixture
def q3():
    return contrast(3, 2, 3)


@pytest.fixture
def control_system(q1, q2):
    """Two test treatments compared against the first (the control)."""
    return EstimableSystem(np.column_stack([q1, q2]))


@pytest.fixture
def contrasts3():
    return estimation_space("contrasts", 3)


@pytest.fixture
def full3():
    return estimation_space("full", 3)


@pytest.fixture
def balanced_design():
    """v=3, n=6, two replicates per treatment, intercept nuisance."""
    return DesignSpec.from_replications(3, [2, 2, 2])


@pytest.fixture
def unit_weight_pair():
    """Two positive definite matrices giving both control contrasts weight 1.

    They disagree on other contrasts, so they are not estimation equivalent.
    """
    w_a = np.array([[1.5, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    w_b = np.array([[2.5, -1.0, -1.0], [-1.0, 2 / 3, 1 / 3], [-1.0, 1 / 3, 2 / 3]])
    return w_a, w_b
