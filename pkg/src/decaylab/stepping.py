"""Shared fixed-step integration machinery.

All generators in this package are linear and time independent, so the
classic RK4 update reduces to the degree-4 Taylor polynomial of
``exp(dt L)``.  We accumulate it in Horner form

    k_0 = y,   k_j = (dt / j) L k_{j-1},   y <- y + k_1 + ... + k_4

which is algebraically identical to textbook RK4 (same stability
polynomial) while touching memory half as often.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np

__all__ = [
    "SolverError",
    "StepUnderflowError",
    "TraceDriftError",
    "QuadratureError",
    "snap_grid",
    "rk4_propagate",
]


class SolverError(RuntimeError):
    """A numerical routine failed to meet its contract."""


class StepUnderflowError(SolverError):
    """Step halving ran out of room without stabilizing the run."""


class TraceDriftError(SolverError):
    """Trace drifted far beyond tolerance; the step is unstable."""


class QuadratureError(SolverError):
    """A quadrature failed to converge to the requested tolerance."""


def snap_grid(grid, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Map requested output times onto integration steps.

    Returns ``(times, steps)`` where ``steps`` are unique integer step
    indices and ``times = steps * dt``.  No interpolation: samples are
    taken at the nearest step, and coincident requests collapse.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid must be finite")
    if np.any(grid < 0):
        raise ValueError("grid times must be >= 0")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    if not (dt > 0) or not np.isfinite(dt):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    steps = np.unique(np.rint(grid / dt).astype(np.int64))
    return steps * dt, steps


def rk4_propagate(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    dt: float,
    steps: np.ndarray,
    observe: Callable[[int, np.ndarray], None],
) -> np.ndarray:
    """Propagate ``y0`` with fixed-step RK4, observing at given steps.

    ``rhs(y)`` must return ``L y`` for the linear generator L.
    ``observe(i, y)`` is called with the position ``i`` in ``steps`` and
    the current state.  Returns the final state.
    """
    y = np.array(y0, copy=True)
    pos = 0
    if steps[pos] == 0:
        observe(pos, y)
        pos += 1
    for step in range(1, int(steps[-1]) + 1):
        k = y.copy()
        for j in (1, 2, 3, 4):
            k = rhs(k)
            k *= dt / j
            y += k
        if pos < steps.size and step == steps[pos]:
            observe(pos, y)
            pos += 1
    return y
