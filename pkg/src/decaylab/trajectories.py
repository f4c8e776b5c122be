"""Stochastic unraveling of the dephasing master equation.

Each trajectory evolves a pure state under the coherent Hamiltonian
interleaved with white-noise phase kicks on the photon amplitudes
(Strang splitting: half step of H0, kick exp(-i dW_n) with
dW_n ~ Normal(0, gamma dt), half step of H0).  The ensemble mean of
|c_a|^2 converges to the master-equation survival probability.

Reproducibility contract: trajectory i draws from a counter-based
Philox stream keyed by (seed, i), so results are bit identical for a
given (seed, M) and trajectory i does not depend on M.  The reduction
over trajectories is a fixed-order numpy mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coherent import build_hamiltonian
from .curves import DecayCurve
from .model import ModelParams, default_step
from .stepping import snap_grid

__all__ = ["PureState", "EnsembleResult", "trajectory_step", "run_ensemble"]


@dataclass
class PureState:
    """Pure state of one trajectory: emitter amplitude plus photon field."""

    atom: complex
    photon: np.ndarray

    def __post_init__(self) -> None:
        self.photon = np.asarray(self.photon, dtype=complex)
        if self.photon.ndim != 1:
            raise ValueError("photon amplitudes must form a 1-D array")

    def norm(self) -> float:
        return float(abs(self.atom) ** 2 + np.vdot(self.photon, self.photon).real)


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble mean curve with its standard error and provenance."""

    curve: DecayCurve
    trajectories: int
    seed: int
    dt: float


def half_step_propagator(p: ModelParams, dt: float) -> np.ndarray:
    """exp(-i H dt / 2) in the site basis, exactly unitary.

    Built from the eigenbasis of the truncated lattice Hamiltonian, so
    repeated application cannot leak norm.
    """
    energies, modes = np.linalg.eigh(build_hamiltonian(p))
    phase = np.exp(-0.5j * dt * energies)
    return (modes * phase) @ modes.T


def trajectory_step(
    state: PureState,
    p: ModelParams,
    dt: float,
    noise: np.ndarray,
    half: Optional[np.ndarray] = None,
) -> PureState:
    """One Strang step; ``noise`` holds N standard normal draws."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (p.N,):
        raise ValueError(f"noise must have shape ({p.N},), got {noise.shape}")
    if half is None:
        half = half_step_propagator(p, dt)
    psi = np.empty(p.N + 1, dtype=complex)
    psi[0] = state.atom
    psi[1:] = state.photon
    psi = half @ psi
    psi[1:] *= np.exp(-1j * math.sqrt(p.gamma * dt) * noise)
    psi = half @ psi
    return PureState(psi[0], psi[1:])


def _trajectory_rngs(seed: int, count: int) -> list:
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(i,))))
        for i in range(count)
    ]


def run_ensemble(
    p: ModelParams,
    grid,
    trajectories: int,
    seed: int,
    dt: Optional[float] = None,
    chunk_steps: int = 64,
) -> EnsembleResult:
    """Propagate an ensemble and return mean curve plus standard error.

    All trajectories advance in lockstep as columns of one state matrix;
    per-step noise is drawn trajectory by trajectory from the dedicated
    streams, so the result is identical to running them one at a time.
    """
    if trajectories < 2:
        raise ValueError(f"need at least 2 trajectories, got {trajectories}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    step = dt if dt is not None else default_step(p)
    times, steps = snap_grid(grid, step)

    N = p.N
    M = trajectories
    half = half_step_propagator(p, step)
    kick = math.sqrt(p.gamma * step)
    rngs = _trajectory_rngs(seed, M)

    psi = np.zeros((N + 1, M), dtype=complex)
    psi[0, :] = 1.0
    samples = np.empty((times.size, M))

    pos = 0
    if steps[pos] == 0:
        samples[pos] = np.abs(psi[0]) ** 2
        pos += 1
    done = 0
    last = int(steps[-1])
    while done < last:
        span = min(chunk_steps, last - done)
        if p.gamma > 0:
            noise = np.empty((M, span, N))
            for i, rng in enumerate(rngs):
                noise[i] = rng.standard_normal((span, N))
        for j in range(span):
            psi = half @ psi
            if p.gamma > 0:
                psi[1:, :] *= np.exp(-1j * kick * noise[:, j, :].T)
            psi = half @ psi
            done += 1
            if pos < steps.size and done == steps[pos]:
                samples[pos] = np.abs(psi[0]) ** 2
                pos += 1

    mean = samples.mean(axis=1)
    stderr = samples.std(axis=1, ddof=1) / math.sqrt(M)
    return EnsembleResult(DecayCurve(times, mean, stderr), M, int(seed), step)
