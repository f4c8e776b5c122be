"""Strong-dephasing limit: classical random walk with a trapping edge.

When gamma dominates every coherent scale, populations obey rate
equations with two incoherent rates, R = 4 g0^2 / gamma between emitter
and edge site and Q = 2 J^2 / gamma between neighbouring sites:

    d p_a /dt = R (p_0 - p_a)
    d p_0 /dt = -R (p_0 - p_a) + Q (p_1 - p_0)
    d p_n /dt = Q (p_{n+1} + p_{n-1} - 2 p_n),   n >= 1

On the semi-infinite lattice the emitter population has the closed form

    P_s(t) = integral_0^pi G(w) exp(E(w) t) dw  [+ w_b exp(E_b t)]

    E(w) = -2 Q (1 - cos w)
    G(w) = r^2 (1 + cos w) / ( pi [ r^2 + 4 (r-1)(1 - cos w)(r - 1 + cos w) ] )

with r = R/Q and G(0) = 2/pi, approaching the diffusive law
1/sqrt(pi Q t) at long times.

For r > 4/3 the exchange is fast enough that the quickest relaxation
mode splits off below the diffusion band [-4Q, 0].  The generator is
symmetric, so that isolated mode carries discrete weight w_b and the
band integral alone sums to 1 - w_b; the bracketed term restores
P_s(0) = 1.  The mode profile decays as x^n with

    (1 - r) x^2 - 2 (1 - r) x + 1 = 0,  x = 1 - sqrt(r/(r-1)),

normalizable (|x| < 1) exactly when r > 4/3, with rate
E_b = Q (x-1)^2 / x < -4Q.  Being the fastest mode it never affects
the long-time diffusive asymptote.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .curves import DecayCurve
from .model import ModelParams, derive_rates, diffusive_truncation
from .stepping import QuadratureError, rk4_propagate, snap_grid

__all__ = ["WalkKernel", "evolve_walk", "walk_exact", "walk_asymptotic"]


@dataclass(frozen=True)
class WalkKernel:
    """Spectral kernel of the semi-infinite walk at rate ratio r = R/Q."""

    atom_rate: float
    site_rate: float

    def __post_init__(self) -> None:
        if self.atom_rate <= 0 or self.site_rate <= 0:
            raise ValueError("walk kernel requires atom_rate > 0 and site_rate > 0")

    @property
    def rate_ratio(self) -> float:
        return self.atom_rate / self.site_rate

    def relaxation(self, omega):
        """Mode relaxation rate E(w) = -2 Q (1 - cos w), always <= 0."""
        return -2.0 * self.site_rate * (1.0 - np.cos(omega))

    def weight_denominator(self, omega):
        # factored form; never expanded, so the sign structure is explicit
        r = self.rate_ratio
        c = np.cos(omega)
        return math.pi * (r * r + 4.0 * (r - 1.0) * (1.0 - c) * (r - 1.0 + c))

    def weight(self, omega):
        """Band-mode weight G(w).

        Integrates to one over (0, pi) for r <= 4/3; above that the
        isolated fast mode carries the remainder (see bound_mode).
        """
        r = self.rate_ratio
        return r * r * (1.0 + np.cos(omega)) / self.weight_denominator(omega)

    def bound_mode(self) -> Optional[tuple]:
        """Weight and rate of the isolated fast mode, or None below r = 4/3.

        The mode profile x^n solves (1-r) x^2 - 2 (1-r) x + 1 = 0; the
        root x = 1 - sqrt(r/(r-1)) is normalizable only for r > 4/3.
        The emitter amplitude follows from the eigenvalue equation and
        the weight from normalizing against the geometric site tail.
        """
        r = self.rate_ratio
        if r <= 4.0 / 3.0:
            return None
        x = 1.0 - math.sqrt(r / (r - 1.0))
        rate = (x - 1.0) ** 2 / x
        amp = r / (rate + r)
        weight = amp * amp / (amp * amp + 1.0 / (1.0 - x * x))
        return weight, self.site_rate * rate

    def check_positivity(self, samples: int = 4001) -> float:
        """Return the minimum of the weight denominator on a dense grid.

        For physical ratios 0 < r <= 2 the denominator is positive and a
        non-positive minimum raises; outside that range a diagnostic
        warning is emitted instead, since positivity is not guaranteed.
        The scan stops short of omega = pi, where numerator and
        denominator share a removable zero at r = 4/3.
        """
        omega = np.linspace(0.0, math.pi, samples, endpoint=False)
        dmin = float(np.min(self.weight_denominator(omega)))
        if 0.0 < self.rate_ratio <= 2.0:
            if dmin <= 0.0:
                raise QuadratureError(
                    f"weight denominator reached {dmin:g} at physical r={self.rate_ratio:g}"
                )
        elif dmin <= 0.0:
            warnings.warn(
                f"rate ratio r={self.rate_ratio:g} lies outside the physical range; "
                f"weight denominator min {dmin:g} <= 0, the mode weight changes sign",
                stacklevel=2,
            )
        return dmin


def evolve_walk(
    p: ModelParams,
    grid,
    dt: Optional[float] = None,
    n_sites: Optional[int] = None,
    record: Optional[dict] = None,
) -> DecayCurve:
    """Integrate the truncated rate equations; returns p_a(t).

    The lattice is sized for the diffusive horizon sqrt(2 Q t_max)
    unless ``n_sites`` is given; the far wall is reflecting.
    """
    if p.gamma <= 0:
        raise ValueError("evolve_walk requires gamma > 0")
    rates = derive_rates(p)
    R = rates.atom_rate
    Q = rates.site_rate
    grid = np.asarray(grid, dtype=float)
    N = n_sites if n_sites is not None else diffusive_truncation(Q, float(grid[-1]))
    if N < 1:
        raise ValueError(f"n_sites must be >= 1, got {N}")
    step = dt if dt is not None else 0.01 / max(R, Q, 1.0)
    times, steps = snap_grid(grid, step)

    def rhs(y: np.ndarray) -> np.ndarray:
        d = np.zeros_like(y)
        exchange = R * (y[1] - y[0])
        d[0] = exchange
        d[1] = -exchange
        sites = y[1:]
        dsites = d[1:]
        if N > 1:
            dsites[:-1] += Q * (sites[1:] - sites[:-1])
            dsites[1:] += Q * (sites[:-1] - sites[1:])
        return d

    y0 = np.zeros(N + 1)
    y0[0] = 1.0
    ps = np.empty(times.size)
    sum_drift = 0.0
    floor = 1.0

    def observe(pos: int, y: np.ndarray) -> None:
        nonlocal sum_drift, floor
        ps[pos] = y[0]
        sum_drift = max(sum_drift, abs(float(y.sum()) - 1.0))
        floor = min(floor, float(y.min()))

    rk4_propagate(rhs, y0, step, steps, observe)
    if record is not None:
        record.update(dt=step, n_sites=N, max_sum_drift=sum_drift, min_population=floor)
    return DecayCurve(times, ps)


def _quad_points(kernel: WalkKernel, t: float) -> list:
    # interior breakpoints: the weight resonance near cos w = 1 - r and
    # the exp(E t) boundary layer w ~ sqrt(1/(Q t)) at large Q t
    points = []
    r = kernel.rate_ratio
    if 0.0 < r < 2.0:
        points.append(math.acos(1.0 - r))
    if t > 0 and kernel.site_rate * t > 1.0:
        points.append(math.sqrt(1.0 / (kernel.site_rate * t)))
    return sorted(points)


def walk_exact(t, atom_rate: float, site_rate: float, absolute_tolerance: float = 1e-10):
    """Emitter population of the semi-infinite walk, by adaptive quadrature.

    Parameters
    ----------
    t : array_like
        Times, all >= 0.
    atom_rate, site_rate : float
        Rates R and Q, both > 0.
    absolute_tolerance : float
        Absolute tolerance handed to the adaptive rule.

    Returns
    -------
    numpy.ndarray of P_s(t), same shape as ``t``.
    """
    kernel = WalkKernel(atom_rate, site_rate)
    kernel.check_positivity()
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("t must be >= 0")
    isolated = kernel.bound_mode()
    out = np.empty(times.shape)
    for k, tk in enumerate(times.ravel()):
        def integrand(w, tk=tk):
            return kernel.weight(w) * math.exp(kernel.relaxation(w) * tk)

        value, err = quad(
            integrand,
            0.0,
            math.pi,
            points=_quad_points(kernel, tk),
            epsabs=absolute_tolerance,
            epsrel=1e-12,
            limit=200,
        )
        if err > 100.0 * absolute_tolerance:
            raise QuadratureError(
                f"walk quadrature error {err:g} at t={tk:g} exceeds "
                f"{100.0 * absolute_tolerance:g}"
            )
        if isolated is not None:
            value += isolated[0] * math.exp(isolated[1] * tk)
        out.ravel()[k] = value
    return out if np.ndim(t) else float(out[0])


def walk_asymptotic(t, site_rate: float):
    """Long-time diffusive law 1/sqrt(pi Q t); undefined at t = 0."""
    if site_rate <= 0:
        raise ValueError(f"site_rate must be > 0, got {site_rate}")
    times = np.asarray(t, dtype=float)
    if np.any(times <= 0):
        raise ValueError("the asymptotic amplitude is undefined at t <= 0")
    out = 1.0 / np.sqrt(math.pi * site_rate * times)
    return out if out.ndim else float(out)
