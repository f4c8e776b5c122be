"""Command-line front end: single solvers, figure presets, artifacts.

Every run writes CSV data plus a JSON sidecar (parameter echo, code
version, seed) into the output directory; reruns with identical
parameters and seed are byte identical.  Exit codes: 0 success,
2 invalid run specification, 3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import FitReport, envelope, fit_exponential, fit_power_law, plateau_check
from .coherent import evolve_coherent, spectral_density, survival_spectral
from .curves import DecayCurve, write_metadata, write_table
from .jaynes_cummings import evolve_jc, jc_spectrum
from .master import IntegratorOptions, evolve_master
from .model import (
    ModelParams,
    derive_rates,
    diffusive_truncation,
    load_config,
    recommended_truncation,
)
from .stepping import SolverError
from .trajectories import run_ensemble
from .walk import evolve_walk, walk_asymptotic, walk_exact

SOLVERS = ("master", "trajectory", "coherent", "spectral", "jc", "jc-spectrum", "walk", "walk-exact")
PRESETS = ("fig1b", "fig2a", "fig2bc", "fig3a", "fig3b", "fig4b")

DEFAULTS = {
    "J": 1.0,
    "g0": 0.3,
    "gamma": 0.0,
    "delta": 0.0,
    "N": None,
    "tMax": 40.0,
    "points": 401,
    "seed": 12345,
    "trajectories": 2000,
    "dt": None,
}

# flags that make no sense together with a preset (presets pin them)
PINNED_BY_PRESETS = ("J", "g0", "gamma", "delta", "N", "tMax", "points", "seed", "trajectories")


@dataclass
class RunSpec:
    command: str
    J: float
    g0: float
    gamma: float
    delta: float
    N: Optional[int]
    tMax: float
    points: int
    seed: int
    trajectories: int
    dt: Optional[float]
    out: str
    fits: List[tuple]


@dataclass
class Artifact:
    stem: str
    names: Optional[Sequence[str]]
    columns: Optional[Sequence[np.ndarray]]
    meta: dict
    reports: List[FitReport] = field(default_factory=list)


def parse_fit(text: str):
    """Parse exp:tLo:tHi | pow:tLo:tHi | plateau:alpha:tLo:tHi."""
    parts = text.split(":")
    try:
        if parts[0] == "exp" and len(parts) == 3:
            return ("exp", float(parts[1]), float(parts[2]))
        if parts[0] == "pow" and len(parts) == 3:
            return ("pow", float(parts[1]), float(parts[2]))
        if parts[0] == "plateau" and len(parts) == 4:
            return ("plateau", float(parts[1]), float(parts[2]), float(parts[3]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"bad fit request {text!r}; expected exp:tLo:tHi, pow:tLo:tHi, or plateau:alpha:tLo:tHi"
    )


def apply_fit(curve: DecayCurve, fit: tuple) -> FitReport:
    if fit[0] == "exp":
        return fit_exponential(curve, (fit[1], fit[2]))
    if fit[0] == "pow":
        return fit_power_law(curve, (fit[1], fit[2]))
    return plateau_check(curve, fit[1], (fit[2], fit[3]))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decaylab",
        description="Decay-law solvers and figure presets for an emitter on a dephasing lattice.",
    )
    parser.add_argument("command", choices=SOLVERS + PRESETS, help="solver or preset to run")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--J", type=float, help="photon hopping rate")
    parser.add_argument("--g0", type=float, help="emitter coupling")
    parser.add_argument("--gamma", type=float, help="pure dephasing rate")
    parser.add_argument("--delta", type=float, help="emitter-cavity detuning")
    parser.add_argument("--N", type=int, help="lattice truncation (default: sized per horizon)")
    parser.add_argument("--tmax", type=float, dest="tMax", help="time horizon")
    parser.add_argument("--points", type=int, help="output grid points")
    parser.add_argument("--seed", type=int, help="ensemble seed")
    parser.add_argument("--trajectories", type=int, help="ensemble size")
    parser.add_argument("--out", default=".", help="output directory (default: cwd)")
    parser.add_argument(
        "--fit",
        action="append",
        type=parse_fit,
        default=[],
        metavar="SPEC",
        help="fit request exp:tLo:tHi | pow:tLo:tHi | plateau:alpha:tLo:tHi (repeatable)",
    )
    return parser


def _resolve(args: argparse.Namespace) -> RunSpec:
    explicit = {
        key: getattr(args, key)
        for key in ("J", "g0", "gamma", "delta", "N", "tMax", "points", "seed", "trajectories")
        if getattr(args, key) is not None
    }
    if args.command in PRESETS:
        if args.config is not None:
            raise ValueError(f"preset {args.command} pins its parameters; --config is not allowed")
        pinned = sorted(set(explicit) & set(PINNED_BY_PRESETS))
        if pinned:
            raise ValueError(
                f"preset {args.command} pins its parameters; drop --{' --'.join(pinned)} "
                "or run the underlying solver directly"
            )
        merged = dict(DEFAULTS)
    else:
        merged = dict(DEFAULTS)
        if args.config is not None:
            merged.update(load_config(args.config))
        if args.command in ("jc", "jc-spectrum") and "J" not in explicit and (
            args.config is None or "J" not in load_config(args.config)
        ):
            merged["J"] = 0.0
        merged.update(explicit)

    spec = RunSpec(
        command=args.command,
        J=float(merged["J"]),
        g0=float(merged["g0"]),
        gamma=float(merged["gamma"]),
        delta=float(merged["delta"]),
        N=None if merged["N"] is None else int(merged["N"]),
        tMax=float(merged["tMax"]),
        points=int(merged["points"]),
        seed=int(merged["seed"]),
        trajectories=int(merged["trajectories"]),
        dt=None if merged["dt"] is None else float(merged["dt"]),
        out=args.out,
        fits=list(args.fit),
    )
    if spec.tMax <= 0:
        raise ValueError(f"tMax must be > 0, got {spec.tMax}")
    if spec.points < 2:
        raise ValueError(f"points must be >= 2, got {spec.points}")
    if spec.dt is not None and spec.dt <= 0:
        raise ValueError(f"dt must be > 0, got {spec.dt}")
    return spec


def _grid(spec: RunSpec) -> np.ndarray:
    return np.linspace(0.0, spec.tMax, spec.points)


def _params(spec: RunSpec, n_sites: int) -> ModelParams:
    return ModelParams(J=spec.J, g0=spec.g0, gamma=spec.gamma, delta=spec.delta, N=n_sites)


def _meta(spec: RunSpec, solver: str, p: Optional[ModelParams], **extras) -> dict:
    meta = {
        "command": spec.command,
        "solver": solver,
        "version": __version__,
        "grid": {"tMax": spec.tMax, "points": spec.points},
    }
    if p is not None:
        meta["params"] = {"J": p.J, "g0": p.g0, "gamma": p.gamma, "delta": p.delta, "N": p.N}
    meta.update(extras)
    return meta


def _curve_artifact(stem: str, curve: DecayCurve, meta: dict) -> Artifact:
    if curve.stderr is None:
        return Artifact(stem, ("t", "ps"), (curve.times, curve.ps), meta)
    return Artifact(stem, ("t", "ps", "stderr"), (curve.times, curve.ps, curve.stderr), meta)


# ---------------------------------------------------------------------------
# solver runners
# ---------------------------------------------------------------------------

def _run_master(spec: RunSpec) -> List[Artifact]:
    grid = _grid(spec)
    n = spec.N if spec.N is not None else recommended_truncation(_params(spec, 1), spec.tMax)
    p = _params(spec, n)
    diag: dict = {}
    curve = evolve_master(p, grid, IntegratorOptions(dt=spec.dt, record=diag))
    return [_curve_artifact("master", curve, _meta(spec, "master", p, diagnostics=diag))]


def _run_trajectory(spec: RunSpec) -> List[Artifact]:
    grid = _grid(spec)
    n = spec.N if spec.N is not None else recommended_truncation(_params(spec, 1), spec.tMax)
    p = _params(spec, n)
    result = run_ensemble(p, grid, spec.trajectories, spec.seed, dt=spec.dt)
    meta = _meta(
        spec, "trajectory", p,
        trajectories=result.trajectories, seed=result.seed, dt=result.dt,
    )
    return [_curve_artifact("trajectory", result.curve, meta)]


def _run_coherent(spec: RunSpec) -> List[Artifact]:
    grid = _grid(spec)
    n = spec.N if spec.N is not None else recommended_truncation(_params(spec, 1), spec.tMax)
    p = _params(spec, n)
    diag: dict = {}
    curve = evolve_coherent(p, grid, dt=spec.dt, record=diag)
    return [_curve_artifact("coherent", curve, _meta(spec, "coherent", p, diagnostics=diag))]


def _run_spectral(spec: RunSpec) -> List[Artifact]:
    p = _params(spec, 1)
    curve = survival_spectral(p, _grid(spec))
    lam = spec.g0 / spec.J
    edge = 2.0 * spec.J
    energies = np.linspace(-edge, edge, spec.points + 2)[1:-1]
    density = spectral_density(energies, lam, spec.J)
    return [
        _curve_artifact("spectral", curve, _meta(spec, "spectral", p)),
        Artifact(
            "spectral_density",
            ("E", "rho"),
            (energies, density),
            _meta(spec, "spectral", p, note="emitter spectral density over the band"),
        ),
    ]


def _run_jc(spec: RunSpec) -> List[Artifact]:
    p = _params(spec, 1)
    curve = evolve_jc(p, _grid(spec), dt=spec.dt)
    return [_curve_artifact("jc", curve, _meta(spec, "jc", p))]


def _spectrum_rows(ratios: np.ndarray, g0: float):
    columns = [np.asarray(ratios, dtype=float)]
    parts = [np.empty(len(ratios)) for _ in range(8)]
    for i, ratio in enumerate(ratios):
        eigs = jc_spectrum(float(ratio), g0).eigenvalues
        for k in range(4):
            parts[2 * k][i] = eigs[k].real
            parts[2 * k + 1][i] = eigs[k].imag
    columns.extend(parts)
    names = ["gammaOverG0"]
    for k in range(1, 5):
        names.extend([f"re{k}", f"im{k}"])
    return names, columns


def _run_jc_spectrum(spec: RunSpec) -> List[Artifact]:
    if spec.g0 <= 0:
        raise ValueError("jc-spectrum requires g0 > 0")
    ratio = spec.gamma / spec.g0
    names, columns = _spectrum_rows(np.array([ratio]), spec.g0)
    p = _params(spec, 1)
    meta = _meta(spec, "jc-spectrum", p, gammaOverG0=ratio)
    return [Artifact("jc_spectrum", names, columns, meta)]


def _run_walk(spec: RunSpec) -> List[Artifact]:
    grid = _grid(spec)
    p = _params(spec, 1)
    diag: dict = {}
    curve = evolve_walk(p, grid, dt=spec.dt, n_sites=spec.N, record=diag)
    rates = derive_rates(p)
    meta = _meta(
        spec, "walk", p,
        atom_rate=rates.atom_rate, site_rate=rates.site_rate, diagnostics=diag,
    )
    return [_curve_artifact("walk", curve, meta)] + _run_walk_exact(spec)


def _run_walk_exact(spec: RunSpec) -> List[Artifact]:
    p = _params(spec, 1)
    rates = derive_rates(p)
    if rates.atom_rate is None or rates.site_rate is None or rates.site_rate == 0:
        raise ValueError("walk-exact requires gamma > 0 and J > 0 (both rates positive)")
    grid = _grid(spec)
    t = grid[grid > 0]
    exact = walk_exact(t, rates.atom_rate, rates.site_rate)
    asym = walk_asymptotic(t, rates.site_rate)
    meta = _meta(
        spec, "walk-exact", p,
        atom_rate=rates.atom_rate, site_rate=rates.site_rate,
        note="rows start at the first positive grid time",
    )
    return [Artifact("walk_exact", ("t", "exact", "asymptotic"), (t, exact, asym), meta)]


# ---------------------------------------------------------------------------
# presets: fully pinned parameter sets reproducing the canonical figures
# ---------------------------------------------------------------------------

def _sweep(jobs: List[Callable[[], Artifact]]) -> List[Artifact]:
    if len(jobs) == 1:
        return [jobs[0]()]
    workers = min(len(jobs), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [future.result() for future in futures]


def _preset_fig1b(spec: RunSpec) -> List[Artifact]:
    p_time = ModelParams(J=1.0, g0=0.3, gamma=0.0, delta=0.0,
                         N=recommended_truncation(ModelParams(J=1.0), 100.0))
    diag: dict = {}
    curve = evolve_coherent(p_time, np.linspace(0.0, 100.0, 1001), record=diag)
    coherent_art = _curve_artifact(
        "fig1b_coherent", curve, _meta(spec, "coherent", p_time, diagnostics=diag)
    )
    coherent_art.reports.append(fit_exponential(curve, (3.0, 20.0)))

    p_band = ModelParams(J=1.0, g0=0.3, gamma=0.0, delta=0.0, N=1)
    tail = survival_spectral(p_band, np.linspace(0.0, 400.0, 4001))
    spectral_art = _curve_artifact(
        "fig1b_spectral", tail,
        _meta(spec, "spectral", p_band, note="tail fit runs on the oscillation envelope"),
    )
    spectral_art.reports.append(fit_power_law(envelope(tail), (120.0, 400.0)))

    energies = np.linspace(-2.0, 2.0, 803)[1:-1]
    density_art = Artifact(
        "fig1b_density", ("E", "rho"), (energies, spectral_density(energies, 0.3, 1.0)),
        _meta(spec, "spectral", p_band, note="emitter spectral density over the band"),
    )
    return [coherent_art, spectral_art, density_art]


def _preset_fig2a(spec: RunSpec) -> List[Artifact]:
    grid = np.linspace(0.0, 20.0, 801)

    def job(ratio: float) -> Callable[[], Artifact]:
        def run() -> Artifact:
            p = ModelParams(J=0.0, g0=1.0, gamma=ratio, delta=0.0, N=1)
            curve = evolve_jc(p, grid)
            meta = _meta(spec, "jc", p, gammaOverG0=ratio)
            return _curve_artifact(f"fig2a_ratio_{ratio:g}", curve, meta)
        return run

    return _sweep([job(r) for r in (0.0, 1.0, 2.0, 8.0, 20.0)])


def _preset_fig2bc(spec: RunSpec) -> List[Artifact]:
    ratios = np.linspace(0.0, 16.0, 401)
    names, columns = _spectrum_rows(ratios, 1.0)
    meta = _meta(spec, "jc-spectrum", ModelParams(J=0.0, g0=1.0, N=1),
                 sweep={"gammaOverG0": [0.0, 16.0], "points": 401})
    return [Artifact("fig2bc", names, columns, meta)]


def _preset_fig3a(spec: RunSpec) -> List[Artifact]:
    grid = np.linspace(0.0, 40.0, 401)
    n = recommended_truncation(ModelParams(J=1.0), 40.0)

    def job(ratio: float) -> Callable[[], Artifact]:
        def run() -> Artifact:
            p = ModelParams(J=1.0, g0=0.3, gamma=ratio, delta=0.0, N=n)
            diag: dict = {}
            curve = evolve_master(p, grid, IntegratorOptions(record=diag))
            meta = _meta(spec, "master", p, gammaOverJ=ratio, diagnostics=diag)
            return _curve_artifact(f"fig3a_gamma_{ratio:g}", curve, meta)
        return run

    return _sweep([job(r) for r in (0.0, 0.1, 1.0, 3.0, 10.0)])


def _preset_fig3b(spec: RunSpec) -> List[Artifact]:
    grid = np.linspace(0.0, 300.0, 601)

    def job(ratio: float) -> Callable[[], Artifact]:
        def run() -> Artifact:
            p = ModelParams(J=1.0, g0=0.3, gamma=ratio, delta=0.0, N=150)
            diag: dict = {}
            curve = evolve_master(p, grid, IntegratorOptions(record=diag))
            meta = _meta(spec, "master", p, gammaOverJ=ratio, diagnostics=diag)
            art = _curve_artifact(f"fig3b_gamma_{ratio:g}", curve, meta)
            art.reports.append(plateau_check(curve, 0.5, (100.0, 300.0)))
            return art
        return run

    return _sweep([job(r) for r in (3.0, 10.0)])


def _preset_fig4b(spec: RunSpec) -> List[Artifact]:
    p = ModelParams(J=1.0, g0=0.3, gamma=10.0, delta=0.0, N=150)
    diag: dict = {}
    curve = evolve_master(p, np.linspace(0.0, 300.0, 601), IntegratorOptions(record=diag))
    rates = derive_rates(p)
    mask = curve.times > 0
    t = curve.times[mask]
    exact = walk_exact(t, rates.atom_rate, rates.site_rate)
    asym = walk_asymptotic(t, rates.site_rate)
    meta = _meta(
        spec, "master", p,
        atom_rate=rates.atom_rate, site_rate=rates.site_rate, diagnostics=diag,
        note="rows start at the first positive grid time",
    )
    return [Artifact("fig4b", ("t", "master", "exact", "asymptotic"),
                     (t, curve.ps[mask], exact, asym), meta)]


RUNNERS = {
    "master": _run_master,
    "trajectory": _run_trajectory,
    "coherent": _run_coherent,
    "spectral": _run_spectral,
    "jc": _run_jc,
    "jc-spectrum": _run_jc_spectrum,
    "walk": _run_walk,
    "walk-exact": _run_walk_exact,
    "fig1b": _preset_fig1b,
    "fig2a": _preset_fig2a,
    "fig2bc": _preset_fig2bc,
    "fig3a": _preset_fig3a,
    "fig3b": _preset_fig3b,
    "fig4b": _preset_fig4b,
}


def _execute(spec: RunSpec) -> List[Artifact]:
    artifacts = RUNNERS[spec.command](spec)
    if spec.fits:
        for artifact in artifacts:
            if artifact.names is not None and list(artifact.names[:2]) == ["t", "ps"]:
                curve = DecayCurve(artifact.columns[0], artifact.columns[1])
                for fit in spec.fits:
                    artifact.reports.append(apply_fit(curve, fit))
    return artifacts


def _write_all(artifacts: List[Artifact], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for artifact in artifacts:
        meta = dict(artifact.meta)
        if artifact.names is not None:
            csv_name = f"{artifact.stem}.csv"
            write_table(os.path.join(out_dir, csv_name), artifact.names, artifact.columns)
            meta["csv"] = csv_name
            meta["columns"] = list(artifact.names)
        if artifact.reports:
            fits_name = f"{artifact.stem}_fits.json"
            with open(os.path.join(out_dir, fits_name), "w", encoding="utf-8", newline="\n") as fh:
                json.dump([r.as_json_dict() for r in artifact.reports], fh, indent=2, sort_keys=True)
                fh.write("\n")
            meta["fits"] = fits_name
        write_metadata(os.path.join(out_dir, f"{artifact.stem}.json"), meta)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors with code 2
        return int(exc.code or 0)

    try:
        spec = _resolve(args)
    except (ValueError, OSError) as exc:
        print(f"decaylab: invalid run specification: {exc}", file=sys.stderr)
        return 2

    try:
        artifacts = _execute(spec)
    except SolverError as exc:
        print(f"decaylab: solver failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"decaylab: invalid run specification: {exc}", file=sys.stderr)
        return 2

    try:
        _write_all(artifacts, spec.out)
    except OSError as exc:
        print(f"decaylab: I/O failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
