"""Lindblad master equation for the emitter plus dephasing lattice.

Single-excitation sector, hard-wall lattice of N sites.  The density
matrix splits into the photon block rho_{n,m}, the emitter-photon
coherences rho_{n,eps}, and the excited-state population rho_{eps,eps};
the remaining row rho_{eps,m} is fixed by Hermiticity as
conj(rho_{m,eps}) and is never stored.

Equations of motion (rotating frame, detuning delta = omega0 - omegaC):

    d rho_{n,m} /dt = i J (rho_{n+1,m} + rho_{n-1,m} - rho_{n,m-1} - rho_{n,m+1})
                      - gamma (1 - delta_{n,m}) rho_{n,m}
                      + i g0 (delta_{m,0} rho_{n,eps} - delta_{n,0} rho_{eps,m})
    d rho_{n,eps}/dt = (i delta - gamma/2) rho_{n,eps}
                      + i J (rho_{n-1,eps} + rho_{n+1,eps})
                      - i g0 delta_{n,0} rho_{eps,eps} + i g0 rho_{n,0}
    d rho_{eps,eps}/dt = i g0 (rho_{eps,0} - rho_{0,eps})

Terms referencing n = -1 or n = N vanish (hard wall).  The generator is
linear and time independent, so the fixed-step RK4 update is applied in
Taylor-Horner form (see :mod:`decaylab.stepping`); the hot loop lives in
a numba kernel because the strong-dephasing runs take ~3e5 steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .curves import DecayCurve
from .model import ModelParams, default_step
from .stepping import SolverError, StepUnderflowError, TraceDriftError, snap_grid

__all__ = [
    "DensityState",
    "IntegratorOptions",
    "initial_state",
    "master_rhs",
    "evolve_master",
]


@dataclass
class DensityState:
    """Single-excitation density matrix in split storage.

    photon : (N, N) complex photon block rho_{n,m}
    cross  : (N,) complex emitter-photon coherences rho_{n,eps}
    atom   : float excited-state population rho_{eps,eps}
    """

    photon: np.ndarray
    cross: np.ndarray
    atom: float

    def __post_init__(self) -> None:
        self.photon = np.asarray(self.photon, dtype=complex)
        self.cross = np.asarray(self.cross, dtype=complex)
        if self.photon.ndim != 2 or self.photon.shape[0] != self.photon.shape[1]:
            raise ValueError("photon block must be a square matrix")
        if self.cross.shape != (self.photon.shape[0],):
            raise ValueError("cross vector must have one entry per site")

    @property
    def n_sites(self) -> int:
        return self.photon.shape[0]

    def trace(self) -> float:
        return float(self.atom + np.trace(self.photon).real)


def initial_state(N: int) -> DensityState:
    """Emitter excited, lattice empty: rho_{eps,eps} = 1, all else 0."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return DensityState(np.zeros((N, N), dtype=complex), np.zeros(N, dtype=complex), 1.0)


def master_rhs(state: DensityState, p: ModelParams) -> DensityState:
    """Right-hand side of the master equation (pure numpy reference)."""
    if state.n_sites != p.N:
        raise ValueError(f"state has {state.n_sites} sites but params say N={p.N}")
    rho = state.photon
    cross = state.cross
    N = state.n_sites
    drho = np.zeros_like(rho)
    # hopping: shifted copies with hard-wall zero fill
    drho[:-1, :] += rho[1:, :]
    drho[1:, :] += rho[:-1, :]
    drho[:, 1:] -= rho[:, :-1]
    drho[:, :-1] -= rho[:, 1:]
    drho *= 1j * p.J
    # dephasing damps off-diagonal elements only
    drho -= p.gamma * rho
    drho.flat[:: N + 1] += p.gamma * rho.flat[:: N + 1]
    # coupling to the emitter through column/row 0
    drho[:, 0] += 1j * p.g0 * cross
    drho[0, :] -= 1j * p.g0 * np.conj(cross)

    dcross = np.zeros_like(cross)
    dcross[:-1] += cross[1:]
    dcross[1:] += cross[:-1]
    dcross *= 1j * p.J
    dcross += (1j * p.delta - 0.5 * p.gamma) * cross
    dcross += 1j * p.g0 * rho[:, 0]
    dcross[0] -= 1j * p.g0 * state.atom

    datom = (1j * p.g0 * (np.conj(cross[0]) - cross[0])).real
    return DensityState(drho, dcross, datom)


# ---------------------------------------------------------------------------
# flat packing and the numba hot path
#
# layout: y[:N*N] photon block (row major), y[N*N:N*N+N] cross, y[-1] atom
# ---------------------------------------------------------------------------

def _pack(state: DensityState) -> np.ndarray:
    N = state.n_sites
    y = np.empty(N * N + N + 1, dtype=complex)
    y[: N * N] = state.photon.ravel()
    y[N * N : N * N + N] = state.cross
    y[-1] = state.atom
    return y


def _unpack(y: np.ndarray, N: int) -> DensityState:
    return DensityState(
        y[: N * N].reshape(N, N).copy(),
        y[N * N : N * N + N].copy(),
        float(y[-1].real),
    )


@njit(cache=True, nogil=True)
def _stage(src, dst, y, c, N, J, g0, gamma, delta):  # pragma: no cover - numba
    # dst = c * L(src); y += dst, fused in one pass
    NN = N * N
    iJ = 1j * J
    ig0 = 1j * g0
    for n in range(N):
        base = n * N
        for m in range(N):
            acc = 0.0 + 0.0j
            if n + 1 < N:
                acc += src[base + N + m]
            if n >= 1:
                acc += src[base - N + m]
            if m >= 1:
                acc -= src[base + m - 1]
            if m + 1 < N:
                acc -= src[base + m + 1]
            d = iJ * acc
            if n != m:
                d -= gamma * src[base + m]
            if m == 0:
                d += ig0 * src[NN + n]
            if n == 0:
                d -= ig0 * np.conj(src[NN + m])
            d *= c
            dst[base + m] = d
            y[base + m] += d
    for n in range(N):
        acc = 0.0 + 0.0j
        if n + 1 < N:
            acc += src[NN + n + 1]
        if n >= 1:
            acc += src[NN + n - 1]
        d = (1j * delta - 0.5 * gamma) * src[NN + n] + iJ * acc + ig0 * src[n * N]
        if n == 0:
            d -= ig0 * src[NN + N]
        d *= c
        dst[NN + n] = d
        y[NN + n] += d
    d = c * (ig0 * (np.conj(src[NN]) - src[NN]))
    dst[NN + N] = d
    y[NN + N] += d


@njit(cache=True, nogil=True)
def _rk4_step(y, s1, s2, dt, N, J, g0, gamma, delta):  # pragma: no cover - numba
    for i in range(y.shape[0]):
        s1[i] = y[i]
    src, dst = s1, s2
    for j in range(1, 5):
        _stage(src, dst, y, dt / j, N, J, g0, gamma, delta)
        src, dst = dst, src


@dataclass
class IntegratorOptions:
    """Knobs for :func:`evolve_master`.

    ``record``, when given a dict, is filled with run diagnostics
    (actual dt, halvings, worst trace/Hermiticity drift, population floor).
    """

    dt: Optional[float] = None
    trace_tol: float = 1e-8
    herm_tol: float = 1e-10
    positivity_tol: float = 1e-10
    max_halvings: int = 6
    min_step: float = 1e-12
    record: Optional[dict] = field(default=None)


def evolve_master(p: ModelParams, grid, opts: Optional[IntegratorOptions] = None) -> DecayCurve:
    """Integrate the master equation; return the survival probability.

    The output grid is decoupled from the integration step: each
    requested time snaps to the nearest step, without interpolation.
    The trace is monitored at every sample; drift beyond ``trace_tol``
    restarts the run with half the step, drift beyond ``100 * trace_tol``
    aborts (instability), and running out of halvings raises
    :class:`StepUnderflowError`.
    """
    opts = opts if opts is not None else IntegratorOptions()
    base_dt = opts.dt if opts.dt is not None else default_step(p)
    if not (base_dt > 0):
        raise ValueError(f"dt must be positive, got {base_dt}")

    for halving in range(opts.max_halvings + 1):
        dt = base_dt / 2 ** halving
        if dt < opts.min_step:
            raise StepUnderflowError(
                f"step {dt:g} fell below the floor {opts.min_step:g} after {halving} halvings"
            )
        curve = _attempt(p, grid, dt, halving, opts)
        if curve is not None:
            return curve
    raise StepUnderflowError(
        f"trace drift still above {opts.trace_tol:g} after {opts.max_halvings} halvings"
    )


def _attempt(p: ModelParams, grid, dt: float, halving: int, opts: IntegratorOptions):
    times, steps = snap_grid(grid, dt)
    N = p.N
    NN = N * N
    y = _pack(initial_state(N))
    s1 = np.empty_like(y)
    s2 = np.empty_like(y)
    ps = np.empty(times.size)
    max_trace = 0.0
    max_herm = 0.0
    min_pop = 1.0

    pos = 0
    last = int(steps[-1])
    for step in range(0, last + 1):
        if step > 0:
            _rk4_step(y, s1, s2, dt, N, p.J, p.g0, p.gamma, p.delta)
        if pos < steps.size and step == steps[pos]:
            rho = y[:NN].reshape(N, N)
            diag = rho.flat[:: N + 1].real
            atom = y[-1].real
            trace_drift = abs(atom + diag.sum() - 1.0)
            if trace_drift > 100.0 * opts.trace_tol:
                raise TraceDriftError(
                    f"trace drifted by {trace_drift:.3e} at t={step * dt:g} "
                    f"(dt={dt:g}); the step is unstable"
                )
            if trace_drift > opts.trace_tol:
                return None  # alarm: retry with half the step
            herm = float(np.abs(rho - rho.conj().T).max())
            if herm > opts.herm_tol:
                raise SolverError(f"Hermiticity drift {herm:.3e} exceeds {opts.herm_tol:g}")
            floor = float(min(diag.min(), atom)) if N > 0 else float(atom)
            if floor < -opts.positivity_tol:
                raise SolverError(f"population {floor:.3e} below -{opts.positivity_tol:g}")
            max_trace = max(max_trace, trace_drift)
            max_herm = max(max_herm, herm)
            min_pop = min(min_pop, floor)
            ps[pos] = atom
            pos += 1

    if opts.record is not None:
        opts.record.update(
            dt=dt,
            halvings=halving,
            max_trace_drift=max_trace,
            max_herm_drift=max_herm,
            min_population=min_pop,
        )
    return DecayCurve(times, ps)
