"""Single-cavity limit (J = 0): dephasing Jaynes-Cummings dynamics.

The master equation closes on four matrix elements ordered as
(rho_ee, rho_00, rho_0e, rho_e0).  On resonance the relaxation
eigenvalues are known in closed form,

    { 0,  -gamma/2,  -gamma/4 +- sqrt(gamma^2/16 - 4 g0^2) }

with an exceptional point (eigenvalue and eigenvector coalescence) at
gamma / g0 = 8, beyond which the decay is overdamped.  Strong dephasing
adiabatically eliminates the coherences and leaves the rate law
P_s = (1 + exp(-2 R t)) / 2 with R = 4 g0^2 / gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import DecayCurve
from .model import ModelParams, default_step
from .stepping import rk4_propagate, snap_grid

__all__ = [
    "JCState",
    "JCSpectrum",
    "relaxation_matrix",
    "evolve_jc",
    "jc_spectrum",
    "jc_rate_approx",
    "exceptional_point",
    "eigenvector_coalescence_gap",
]


@dataclass(frozen=True)
class JCState:
    """The four matrix elements that close under J = 0 dynamics."""

    rho_ee: float
    rho_00: float
    rho_0e: complex
    rho_e0: complex

    def __post_init__(self) -> None:
        if abs(self.rho_e0 - np.conj(self.rho_0e)) > 1e-12:
            raise ValueError("rho_e0 must be the conjugate of rho_0e")

    def as_vector(self) -> np.ndarray:
        return np.array([self.rho_ee, self.rho_00, self.rho_0e, self.rho_e0], dtype=complex)


def relaxation_matrix(g0: float, gamma: float, delta: float = 0.0) -> np.ndarray:
    """Generator of the closed four-element system d/dt v = A v."""
    ig = 1j * g0
    return np.array(
        [
            [0.0, 0.0, -ig, +ig],
            [0.0, 0.0, +ig, -ig],
            [-ig, +ig, 1j * delta - gamma / 2.0, 0.0],
            [+ig, -ig, 0.0, -1j * delta - gamma / 2.0],
        ],
        dtype=complex,
    )


def evolve_jc(p: ModelParams, grid, dt: Optional[float] = None) -> DecayCurve:
    """Integrate the four-element system; returns P_s(t) = rho_ee(t).

    Uses the same fixed-step scheme as the lattice solver so that the
    J = 0 reduction of the master equation is step-for-step comparable.
    The default step is five times finer than the lattice default; the
    system is only four-dimensional, and the extra accuracy keeps the
    undamped Rabi phase error below 1e-8 over hundreds of cycles.
    """
    if p.J != 0:
        raise ValueError("evolve_jc requires J = 0 (single-cavity limit)")
    step = dt if dt is not None else default_step(p) / 5.0
    times, steps = snap_grid(grid, step)
    A = relaxation_matrix(p.g0, p.gamma, p.delta)
    y0 = JCState(1.0, 0.0, 0.0, 0.0).as_vector()
    ps = np.empty(times.size)

    def observe(pos: int, y: np.ndarray) -> None:
        ps[pos] = y[0].real

    rk4_propagate(lambda y: A @ y, y0, step, steps, observe)
    return DecayCurve(times, ps)


@dataclass(frozen=True)
class JCSpectrum:
    """Relaxation eigenvalues at a given dephasing-to-coupling ratio."""

    gamma_over_g0: float
    g0: float
    eigenvalues: np.ndarray  # order: 0, -gamma/2, -gamma/4 + s, -gamma/4 - s
    is_overdamped: bool


def jc_spectrum(gamma_over_g0: float, g0: float = 1.0) -> JCSpectrum:
    """Closed-form relaxation spectrum on resonance."""
    if g0 <= 0:
        raise ValueError(f"g0 must be > 0, got {g0}")
    if gamma_over_g0 < 0:
        raise ValueError(f"gamma_over_g0 must be >= 0, got {gamma_over_g0}")
    gamma = gamma_over_g0 * g0
    s = np.sqrt(complex(gamma * gamma / 16.0 - 4.0 * g0 * g0))
    eigs = np.array([0.0, -gamma / 2.0, -gamma / 4.0 + s, -gamma / 4.0 - s], dtype=complex)
    return JCSpectrum(gamma_over_g0, g0, eigs, gamma_over_g0 > 8.0)


def jc_rate_approx(p: ModelParams, grid) -> DecayCurve:
    """Adiabatic-elimination rate law P_s = (1 + exp(-2 R t)) / 2."""
    if p.gamma <= 0:
        raise ValueError("the rate approximation requires gamma > 0")
    if p.g0 <= 0:
        raise ValueError(f"g0 must be > 0, got {p.g0}")
    times = np.asarray(grid, dtype=float)
    R = 4.0 * p.g0 * p.g0 / p.gamma
    return DecayCurve(times, 0.5 * (1.0 + np.exp(-2.0 * R * times)))


def exceptional_point(g0: float = 1.0, lo: float = 0.0, hi: float = 16.0, tol: float = 1e-9) -> float:
    """Locate the oscillatory-to-overdamped transition by bisection.

    Bisects the sign of the discriminant gamma^2/16 - 4 g0^2 in the
    ratio x = gamma/g0; the root is the exceptional point.
    """
    if g0 <= 0:
        raise ValueError(f"g0 must be > 0, got {g0}")

    def discriminant(x: float) -> float:
        return (x * g0) ** 2 / 16.0 - 4.0 * g0 * g0

    if not (discriminant(lo) < 0 < discriminant(hi)):
        raise ValueError(f"bracket [{lo}, {hi}] does not straddle the transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if discriminant(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eigenvector_coalescence_gap(gamma_over_g0: float, g0: float = 1.0) -> float:
    """Smallest singular value of the paired eigenvectors near -gamma/4.

    The two eigenvalues closest to -gamma/4 are the coalescing pair; at
    an exceptional point their eigenvectors become parallel and the
    stacked 4x2 matrix drops to rank one, so this gap tends to zero.
    Away from the transition it is O(1).
    """
    gamma = gamma_over_g0 * g0
    values, vectors = np.linalg.eig(relaxation_matrix(g0, gamma))
    order = np.argsort(np.abs(values - (-gamma / 4.0)))
    pair = vectors[:, order[:2]]
    pair = pair / np.linalg.norm(pair, axis=0)
    return float(np.linalg.svd(pair, compute_uv=False)[-1])
