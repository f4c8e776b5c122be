"""Decay-law diagnostics: windowed fits, plateau tests, envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .curves import DecayCurve

__all__ = ["FitReport", "fit_exponential", "fit_power_law", "plateau_check", "envelope"]


@dataclass(frozen=True)
class FitReport:
    """Result of a windowed fit.

    ``value`` is the headline number (decay rate, power-law exponent, or
    plateau level), ``prefactor`` the fitted amplitude, ``rms_residual``
    the goodness of fit in log space.  Plateau checks also carry the
    maximum relative deviation and the verdict.
    """

    kind: str
    window: Tuple[float, float]
    value: float
    prefactor: float
    rms_residual: float
    max_deviation: Optional[float] = None
    plateau: Optional[bool] = None

    def as_json_dict(self) -> dict:
        payload = {
            "kind": self.kind,
            "window": [self.window[0], self.window[1]],
            "value": self.value,
            "prefactor": self.prefactor,
            "rmsResidual": self.rms_residual,
        }
        if self.max_deviation is not None:
            payload["maxDeviation"] = self.max_deviation
        if self.plateau is not None:
            payload["plateau"] = self.plateau
        return payload


def _window(curve: DecayCurve, window: Tuple[float, float], minimum: int) -> Tuple[np.ndarray, np.ndarray]:
    t_lo, t_hi = window
    if not (t_lo < t_hi):
        raise ValueError(f"empty window [{t_lo}, {t_hi}]")
    mask = (curve.times >= t_lo) & (curve.times <= t_hi)
    t = curve.times[mask]
    ps = curve.ps[mask]
    if t.size < minimum:
        raise ValueError(f"window [{t_lo}, {t_hi}] holds {t.size} points, need >= {minimum}")
    return t, ps


def fit_exponential(curve: DecayCurve, window: Tuple[float, float]) -> FitReport:
    """Least squares on (t, ln ps); value is the decay rate (minus slope)."""
    t, ps = _window(curve, window, minimum=4)
    if np.any(ps <= 0):
        raise ValueError("exponential fit needs ps > 0 throughout the window")
    logp = np.log(ps)
    slope, intercept = np.polyfit(t, logp, 1)
    resid = logp - (slope * t + intercept)
    return FitReport(
        kind="exponential",
        window=window,
        value=-float(slope),
        prefactor=float(math.exp(intercept)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
    )


def fit_power_law(curve: DecayCurve, window: Tuple[float, float]) -> FitReport:
    """Least squares on (ln t, ln ps); value is the exponent."""
    t, ps = _window(curve, window, minimum=4)
    if np.any(t <= 0):
        raise ValueError("power-law fit needs t > 0 throughout the window")
    if np.any(ps <= 0):
        raise ValueError("power-law fit needs ps > 0 throughout the window")
    logt = np.log(t)
    logp = np.log(ps)
    slope, intercept = np.polyfit(logt, logp, 1)
    resid = logp - (slope * logt + intercept)
    return FitReport(
        kind="powerlaw",
        window=window,
        value=float(slope),
        prefactor=float(math.exp(intercept)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
    )


def plateau_check(
    curve: DecayCurve,
    alpha: float,
    window: Tuple[float, float],
    threshold: float = 0.10,
) -> FitReport:
    """Test whether t^alpha * ps is flat over the window.

    The plateau is declared when the maximum relative deviation from the
    window mean stays below ``threshold`` (default 10 percent).
    """
    t, ps = _window(curve, window, minimum=1)
    if np.any(t <= 0) or np.any(ps <= 0):
        raise ValueError("plateau check needs t > 0 and ps > 0 throughout the window")
    y = t**alpha * ps
    level = float(np.mean(y))
    deviation = float(np.max(np.abs(y / level - 1.0)))
    resid = np.log(y) - math.log(level)
    return FitReport(
        kind="plateau",
        window=window,
        value=level,
        prefactor=level,
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        max_deviation=deviation,
        plateau=bool(deviation < threshold),
    )


def envelope(curve: DecayCurve) -> DecayCurve:
    """Strict local maxima of ps, for oscillation-robust tail fits.

    A curve with no interior maxima (monotone data) is returned with
    just its endpoints dropped, since only interior points can ever be
    compared against both neighbours.
    """
    if len(curve) < 3:
        return DecayCurve(curve.times.copy(), curve.ps.copy(),
                          None if curve.stderr is None else curve.stderr.copy())
    ps = curve.ps
    peaks = (ps[1:-1] > ps[:-2]) & (ps[1:-1] > ps[2:])
    idx = np.flatnonzero(peaks) + 1
    if idx.size == 0:
        idx = np.arange(1, len(curve) - 1)
    return DecayCurve(
        curve.times[idx],
        curve.ps[idx],
        None if curve.stderr is None else curve.stderr[idx],
    )
