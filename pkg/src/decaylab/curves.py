"""Survival-probability curves and their on-disk CSV form.

Every solver in the package produces a :class:`DecayCurve`; the CLI
serializes them as ``t,ps[,stderr]`` CSV at full double precision so
that reruns with the same seed are byte identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = ["DecayCurve", "write_curve", "read_curve", "write_table", "write_metadata", "fmt"]


def fmt(x: float) -> str:
    """Format a float with 17 significant digits (lossless round trip)."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".17g")


@dataclass
class DecayCurve:
    """Survival probability sampled on a strictly increasing time grid.

    ``stderr`` is present only for ensemble estimates (standard error of
    the mean across trajectories).
    """

    times: np.ndarray
    ps: np.ndarray
    stderr: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.ps = np.asarray(self.ps, dtype=float)
        if self.times.ndim != 1 or self.ps.shape != self.times.shape:
            raise ValueError("times and ps must be 1-D arrays of equal length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.times)) or not np.all(np.isfinite(self.ps)):
            raise ValueError("times and ps must be finite")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.times.shape:
                raise ValueError("stderr must match times in shape")
            if not np.all(np.isfinite(self.stderr)) or np.any(self.stderr < 0):
                raise ValueError("stderr must be finite and >= 0")

    def __len__(self) -> int:
        return self.times.size

    def window(self, t_lo: float, t_hi: float) -> "DecayCurve":
        """Restrict the curve to t_lo <= t <= t_hi (inclusive)."""
        if not (t_lo < t_hi):
            raise ValueError(f"empty window [{t_lo}, {t_hi}]")
        mask = (self.times >= t_lo) & (self.times <= t_hi)
        return DecayCurve(
            self.times[mask],
            self.ps[mask],
            None if self.stderr is None else self.stderr[mask],
        )


def write_curve(curve: DecayCurve, path) -> None:
    """Write ``t,ps[,stderr]`` CSV at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if curve.stderr is None:
            fh.write("t,ps\n")
            for t, ps in zip(curve.times, curve.ps):
                fh.write(f"{fmt(t)},{fmt(ps)}\n")
        else:
            fh.write("t,ps,stderr\n")
            for t, ps, se in zip(curve.times, curve.ps, curve.stderr):
                fh.write(f"{fmt(t)},{fmt(ps)},{fmt(se)}\n")


def read_curve(path) -> DecayCurve:
    """Read a CSV written by :func:`write_curve`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if header[:2] != ["t", "ps"]:
        raise ValueError(f"unexpected curve header {header!r} in {path}")
    stderr = data[:, 2] if len(header) > 2 else None
    return DecayCurve(data[:, 0], data[:, 1], stderr)


def write_table(path, names: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    """Write a generic multi-column CSV at 17 significant digits."""
    if len(names) != len(columns):
        raise ValueError("one name per column required")
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise ValueError("all columns must have the same length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(fmt(c[i]) for c in cols) + "\n")


def write_metadata(path, payload: dict) -> None:
    """Write the JSON sidecar; sorted keys keep reruns byte identical."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
