"""Model parameters, derived rates, and truncation heuristics.

The physical setting is a single two-level emitter coupled with strength
``g0`` to the edge site (n = 0) of a semi-infinite tight-binding photonic
lattice with hopping ``J``, subject to pure dephasing of the photon modes
at rate ``gamma``.  Everything downstream works in the frame rotating at
the cavity frequency, so only the detuning ``delta`` between emitter and
cavities enters the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

__all__ = [
    "ModelParams",
    "DerivedRates",
    "derive_rates",
    "recommended_truncation",
    "diffusive_truncation",
    "default_step",
    "load_config",
    "CONFIG_KEYS",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of a run.

    Attributes
    ----------
    J : float
        Photon hopping rate between neighbouring lattice sites (>= 0).
    g0 : float
        Emitter to edge-site coupling (>= 0).
    gamma : float
        Pure dephasing rate of the photon modes (>= 0).
    delta : float
        Emitter-cavity detuning in the rotating frame.  All headline
        results are at resonance, delta = 0.
    N : int
        Number of lattice sites kept by the hard-wall truncation (>= 1).
    """

    J: float = 1.0
    g0: float = 0.3
    gamma: float = 0.0
    delta: float = 0.0
    N: int = 1

    def __post_init__(self) -> None:
        for name in ("J", "g0", "gamma", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.J < 0:
            raise ValueError(f"J must be >= 0, got {self.J}")
        if self.g0 < 0:
            raise ValueError(f"g0 must be >= 0, got {self.g0}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")


@dataclass(frozen=True)
class DerivedRates:
    """Characteristic rates and times implied by a parameter set.

    Fields that are undefined for the given parameters (for instance the
    golden-rule rate when J = 0) are ``None``, never silently zero.
    """

    rabi_frequency: float
    decay_rate: Optional[float] = None      # 2 g0^2 / J, weak-coupling emission rate
    coupling_ratio: Optional[float] = None  # g0 / J
    atom_rate: Optional[float] = None       # 4 g0^2 / gamma, emitter <-> edge site exchange
    site_rate: Optional[float] = None       # 2 J^2 / gamma, incoherent site hopping
    rate_ratio: Optional[float] = None      # atom_rate / site_rate = 2 (g0/J)^2
    zeno_time: Optional[float] = None       # ~ 1/J, end of the quadratic regime
    edge_time: Optional[float] = None       # onset of the algebraic band-edge tail


def derive_rates(p: ModelParams) -> DerivedRates:
    """Compute every derived rate that is well defined for ``p``.

    Pure and deterministic: no state, no rounding beyond float arithmetic.
    """
    decay_rate = coupling_ratio = zeno_time = edge_time = None
    atom_rate = site_rate = rate_ratio = None

    if p.J > 0:
        decay_rate = 2.0 * p.g0 ** 2 / p.J
        coupling_ratio = p.g0 / p.J
        zeno_time = 1.0 / p.J
        if 0.0 < coupling_ratio < 1.0:
            # time at which the exponential has decayed to the level of the
            # band-edge tail; only meaningful at weak coupling
            edge_time = math.log(2.0 * math.pi / coupling_ratio ** 10) / decay_rate
    if p.gamma > 0:
        atom_rate = 4.0 * p.g0 ** 2 / p.gamma
        site_rate = 2.0 * p.J ** 2 / p.gamma
        if site_rate > 0:
            rate_ratio = atom_rate / site_rate

    return DerivedRates(
        rabi_frequency=2.0 * p.g0,
        decay_rate=decay_rate,
        coupling_ratio=coupling_ratio,
        atom_rate=atom_rate,
        site_rate=site_rate,
        rate_ratio=rate_ratio,
        zeno_time=zeno_time,
        edge_time=edge_time,
    )


def recommended_truncation(p: ModelParams, t_max: float, margin: int = 20) -> int:
    """Smallest safe N for a ballistic run up to ``t_max``.

    The wavefront travels at group velocity 2J, so the cone occupies
    ceil(2 J t_max) sites; any nonzero horizon reserves at least the
    source site.  ``margin`` extra sites keep the reflected tail away
    from the region that matters.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    cone = max(math.ceil(2.0 * p.J * t_max), 1) if t_max > 0 else 0
    return cone + margin


def diffusive_truncation(site_rate: float, t_max: float, margin: int = 20) -> int:
    """Smallest safe N when transport is diffusive with site rate Q.

    The population spread is sqrt(2 Q t); three standard deviations plus
    ``margin`` keeps the reflecting wall irrelevant.
    """
    if site_rate < 0:
        raise ValueError(f"site_rate must be >= 0, got {site_rate}")
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    return math.ceil(3.0 * math.sqrt(2.0 * site_rate * t_max)) + margin


def default_step(p: ModelParams) -> float:
    """Default integration step: resolve the fastest scale in the problem."""
    return 0.01 / max(p.J, p.gamma, p.g0, 1.0)


# flat config keys accepted by the CLI; value = conversion function
CONFIG_KEYS = {
    "J": float,
    "g0": float,
    "gamma": float,
    "delta": float,
    "N": int,
    "tMax": float,
    "dt": float,
    "seed": int,
    "trajectories": int,
}


def load_config(path: str) -> dict:
    """Parse a flat ``key = value`` config file.

    Blank lines and ``#`` comments are ignored.  Unknown keys and
    malformed values raise ValueError so the CLI can reject bad input.
    """
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = CONFIG_KEYS[key](text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {text!r}") from exc
    return values
