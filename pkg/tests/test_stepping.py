import numpy as np
import pytest
import scipy.linalg

from decaylab.stepping import (
    QuadratureError,
    SolverError,
    StepUnderflowError,
    TraceDriftError,
    rk4_propagate,
    snap_grid,
)


def test_error_hierarchy():
    for cls in (StepUnderflowError, TraceDriftError, QuadratureError):
        assert issubclass(cls, SolverError)
    assert issubclass(SolverError, RuntimeError)


def test_snap_grid_exact_multiples():
    grid = np.array([0.0, 0.5, 1.0, 2.5])
    times, idx = snap_grid(grid, 0.5)
    assert np.array_equal(times, grid)
    assert np.array_equal(idx, [0, 1, 2, 5])


def test_snap_grid_rounds_to_nearest_step():
    times, idx = snap_grid(np.array([0.0, 0.301, 0.9]), 0.1)
    assert np.array_equal(idx, [0, 3, 9])
    assert np.allclose(times, [0.0, 0.3, 0.9])


def test_snap_grid_collapses_duplicates():
    times, idx = snap_grid(np.array([0.0, 0.1001, 0.1002, 0.5]), 0.1)
    assert np.array_equal(idx, [0, 1, 5])
    assert len(times) == 3


def test_snap_grid_validation():
    with pytest.raises(ValueError):
        snap_grid(np.array([0.1, 0.0]), 0.1)  # decreasing
    with pytest.raises(ValueError):
        snap_grid(np.array([-0.1, 0.0]), 0.1)  # negative time
    with pytest.raises(ValueError):
        snap_grid(np.array([0.0, 1.0]), 0.0)  # bad step
    with pytest.raises(ValueError):
        snap_grid(np.empty(0), 0.1)


def _textbook_rk4(rhs, y0, dt, steps):
    y = y0.copy()
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def test_rk4_matches_textbook_form_for_linear_rhs():
    # the in-place Horner update used here is algebraically the classic
    # scheme whenever rhs is linear; check to near machine precision
    rng = np.random.default_rng(11)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    y0 = rng.normal(size=6) + 1j * rng.normal(size=6)
    rhs = lambda y: A @ y
    got = rk4_propagate(rhs, y0, 0.01, np.array([50]), lambda i, y: None)
    want = _textbook_rk4(rhs, y0, 0.01, 50)
    assert np.linalg.norm(got - want) < 1e-12 * np.linalg.norm(want)


def test_rk4_converges_to_matrix_exponential():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(5, 5))
    A = A - A.T  # skew: bounded flow
    y0 = rng.normal(size=5)
    y1 = rk4_propagate(
        lambda y: A @ y, y0, 1e-3, np.array([1000]), lambda i, y: None
    )
    want = scipy.linalg.expm(A) @ y0
    assert np.linalg.norm(y1 - want) < 1e-9


def test_rk4_observation_slots():
    seen = {}
    steps = np.array([0, 3, 10])
    final = rk4_propagate(
        lambda y: -y,
        np.ones(1),
        0.1,
        steps,
        lambda i, y: seen.__setitem__(i, y[0]),
    )
    assert sorted(seen) == [0, 1, 2]
    assert seen[0] == 1.0
    assert seen[1] == pytest.approx(np.exp(-0.3), rel=1e-6)
    assert seen[2] == pytest.approx(np.exp(-1.0), rel=1e-6)
    assert final[0] == seen[2]


def test_rk4_without_initial_slot():
    seen = {}
    rk4_propagate(
        lambda y: -y,
        np.ones(1),
        0.1,
        np.array([2, 4]),
        lambda i, y: seen.__setitem__(i, y[0]),
    )
    assert sorted(seen) == [0, 1]
    assert seen[0] == pytest.approx(np.exp(-0.2), rel=1e-5)
    assert seen[1] == pytest.approx(np.exp(-0.4), rel=1e-5)
