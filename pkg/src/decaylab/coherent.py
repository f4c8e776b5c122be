"""Dephasing-free dynamics: wavefunction propagation and the exact
spectral representation of the survival amplitude.

With gamma = 0 the excitation stays pure: amplitudes (c_a, C_0..C_{N-1})
obey

    i dc_a/dt = delta c_a + g0 C_0
    i dC_n/dt = -J (C_{n+1} + C_{n-1}) + g0 delta_{n,0} c_a

with a hard wall at n = N.  Independently of the lattice solver, the
resonant semi-infinite problem has a survival amplitude

    c_a(t) = integral rho(E) exp(-i E t) dE    over the band (-2J, 2J)

where rho is the emitter spectral density; the square-root band-edge
factor makes Gauss-Chebyshev (second kind) quadrature the natural rule.
Both routes are kept separate so each can validate the other.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from .curves import DecayCurve
from .model import ModelParams, default_step, derive_rates
from .stepping import QuadratureError, rk4_propagate, snap_grid

__all__ = [
    "build_hamiltonian",
    "evolve_coherent",
    "spectral_density",
    "survival_spectral",
    "zeno_edge_times",
]


def build_hamiltonian(p: ModelParams) -> np.ndarray:
    """Single-excitation Hamiltonian, index 0 = emitter, 1..N = sites."""
    H = np.zeros((p.N + 1, p.N + 1))
    H[0, 0] = p.delta
    H[0, 1] = H[1, 0] = p.g0
    for s in range(p.N - 1):
        H[1 + s, 2 + s] = H[2 + s, 1 + s] = -p.J
    return H


def _require_coherent(p: ModelParams) -> None:
    if p.gamma != 0:
        raise ValueError("coherent propagation requires gamma = 0")


def evolve_coherent(
    p: ModelParams,
    grid,
    dt: Optional[float] = None,
    record: Optional[dict] = None,
) -> DecayCurve:
    """Propagate the pure state with fixed-step RK4; return P_s = |c_a|^2.

    The dephasing rate in ``p`` plays no role here; this solver is the
    gamma = 0 reference dynamics regardless of what ``p.gamma`` says.
    """
    step = dt if dt is not None else default_step(replace(p, gamma=0.0))
    times, steps = snap_grid(grid, step)

    J, g0, delta = p.J, p.g0, p.delta

    def rhs(y: np.ndarray) -> np.ndarray:
        d = np.zeros_like(y)
        amp = y[1:]
        d[0] = -1j * (delta * y[0] + g0 * amp[0])
        dd = d[1:]
        dd[:-1] += amp[1:]
        dd[1:] += amp[:-1]
        dd *= 1j * J
        dd[0] -= 1j * g0 * y[0]
        return d

    y0 = np.zeros(p.N + 1, dtype=complex)
    y0[0] = 1.0
    ps = np.empty(times.size)
    norm_drift = 0.0

    def observe(pos: int, y: np.ndarray) -> None:
        nonlocal norm_drift
        ps[pos] = abs(y[0]) ** 2
        norm_drift = max(norm_drift, abs(float(np.vdot(y, y).real) - 1.0))

    rk4_propagate(rhs, y0, step, steps, observe)
    if record is not None:
        record.update(dt=step, max_norm_drift=norm_drift)
    return DecayCurve(times, ps)


def spectral_density(E, coupling_ratio: float, J: float = 1.0):
    """Emitter spectral density on the band interior |E| < 2J.

    rho(E) = (1/pi) (lam^2/2) sqrt(4J^2 - E^2)
             / [ E^2 (1 - lam^2/2)^2 + (lam^4/4)(4J^2 - E^2) ]

    Defined for weak coupling 0 < lam < 1, where it carries unit weight.
    Requests outside the open support raise ValueError.
    """
    lam = coupling_ratio
    if not (0.0 < lam < 1.0):
        raise ValueError(f"coupling_ratio must be in (0, 1), got {lam}")
    if J <= 0:
        raise ValueError(f"J must be > 0, got {J}")
    E = np.asarray(E, dtype=float)
    if np.any(np.abs(E) >= 2.0 * J):
        raise ValueError("spectral density evaluated outside the band |E| < 2J")
    band = 4.0 * J * J - E * E
    den = E * E * (1.0 - lam * lam / 2.0) ** 2 + (lam ** 4 / 4.0) * band
    out = (lam * lam / (2.0 * math.pi)) * np.sqrt(band) / den
    return out if out.ndim else float(out)


def _chebyshev_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    # Gauss-Chebyshev second kind: int_{-1}^{1} f(x) sqrt(1-x^2) dx
    i = np.arange(1, n + 1)
    theta = i * math.pi / (n + 1)
    return np.cos(theta), (math.pi / (n + 1)) * np.sin(theta) ** 2


def _band_weights(p: ModelParams, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # nodes E_i and weights absorbing the sqrt(4J^2-E^2) factor of rho
    lam = p.g0 / p.J
    x, w = _chebyshev_rule(n)
    E = 2.0 * p.J * x
    band = 4.0 * p.J * p.J - E * E
    smooth = (lam * lam / (2.0 * math.pi)) / (
        E * E * (1.0 - lam * lam / 2.0) ** 2 + (lam ** 4 / 4.0) * band
    )
    return E, 4.0 * p.J * p.J * w * smooth


def _spectral_eval(times: np.ndarray, E: np.ndarray, coef: np.ndarray) -> np.ndarray:
    phase = -1j * E
    ps = np.empty(times.size)
    for k, t in enumerate(times):
        ps[k] = abs(np.dot(coef, np.exp(phase * t))) ** 2
    return ps


def survival_spectral(
    p: ModelParams,
    times,
    nodes: Optional[int] = None,
    doubling_tol: float = 1e-10,
    max_doublings: int = 4,
) -> DecayCurve:
    """Survival probability from the band integral (semi-infinite lattice).

    The node count must resolve the fastest phase 2J*t_max; convergence
    is certified by doubling the rule until the curve moves by less than
    ``doubling_tol``, else :class:`QuadratureError` is raised.
    """
    _require_coherent(p)
    if p.delta != 0:
        raise ValueError("the spectral route is resonant only (delta = 0)")
    rates = derive_rates(p)
    if rates.coupling_ratio is None or not (0.0 < rates.coupling_ratio < 1.0):
        raise ValueError("survival_spectral requires J > 0 and 0 < g0/J < 1")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D array")
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")

    n = nodes if nodes is not None else math.ceil(40 + 16.0 * p.J * times[-1])
    E, coef = _band_weights(p, n)
    ps = _spectral_eval(times, E, coef)
    for _ in range(max_doublings):
        n *= 2
        E, coef = _band_weights(p, n)
        ps_fine = _spectral_eval(times, E, coef)
        if np.max(np.abs(ps_fine - ps)) <= doubling_tol:
            return DecayCurve(times, ps_fine)
        ps = ps_fine
    raise QuadratureError(
        f"band quadrature did not settle to {doubling_tol:g} by n={n} nodes"
    )


def zeno_edge_times(p: ModelParams) -> Tuple[float, float]:
    """Crossover times bounding the exponential era.

    Returns (zeno_time, edge_time): the end of the quadratic short-time
    regime (~1/J) and the point where the band-edge algebraic tail
    overtakes the exponential.
    """
    rates = derive_rates(p)
    if rates.zeno_time is None or rates.edge_time is None:
        raise ValueError("zeno_edge_times requires J > 0 and 0 < g0/J < 1")
    return rates.zeno_time, rates.edge_time
