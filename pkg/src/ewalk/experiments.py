"""Experiment drivers: Bloch oscillations, super-Bloch oscillations and resonant drift.

Every driver is a pure function of its arguments.  Sweeps run their grid
points as independent jobs through :func:`ewalk.sweep.parallel_map`, so the
output is identical for any number of worker processes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, least_squares

from .observables import (
    CentroidRecorder,
    CentroidTrace,
    DensityMap,
    DensityRecorder,
    default_velocity_window,
    drift_velocity,
)
from .spectral import Spectrum, spectral_peaks, spectrum
from .sweep import parallel_map
from .walk import CoinParams, EdgeLeakError, FieldConfig, SimulationConfig, evolve

__all__ = [
    "BlochRun",
    "DriftRun",
    "SBORun",
    "VelocityCurve",
    "VelocityMap",
    "density_experiment",
    "density_checksums",
    "drift_steps",
    "fit_velocity_law",
    "law_extrema",
    "law_zeros",
    "light_cone_sites",
    "phi_grid",
    "run_bloch",
    "run_resonant_drift",
    "run_sbo",
    "theta_grid",
    "velocity_curve",
    "velocity_law",
    "velocity_map",
]

HADAMARD = math.pi / 4


class BlochRun(NamedTuple):
    trace: CentroidTrace
    spectrum: Spectrum
    density: DensityMap | None


class SBORun(NamedTuple):
    trace: CentroidTrace
    spectrum: Spectrum
    peaks: list


class DriftRun(NamedTuple):
    trace: CentroidTrace
    velocity: float


def phi_grid(n: int = 64) -> np.ndarray:
    """``n`` equally spaced phases on ``[0, 2 pi)``."""
    return 2 * math.pi * np.arange(n) / n


def theta_grid(n: int = 48) -> np.ndarray:
    """``n`` cell-centred gate angles on the open interval ``(0, pi)``."""
    return (np.arange(n) + 0.5) * math.pi / n


def drift_steps(m: float) -> int:
    """Run length covering the default velocity window, ``25 T_B``."""
    return default_velocity_window(m)[1]


def light_cone_sites(steps: int) -> int:
    """Chain length that no amplitude can cross within ``steps`` steps from the centre."""
    return 2 * steps + 8


def run_bloch(
    m: float = 100.0,
    theta: float = HADAMARD,
    n_sites: int = 1000,
    steps: int = 1000,
    density_stride: int | None = None,
) -> BlochRun:
    """Static field only: Bloch-like oscillation with period ``m``."""
    config = SimulationConfig(n_sites, steps, CoinParams(theta), FieldConfig(m))
    recorders = [CentroidRecorder()]
    if density_stride:
        recorders.append(DensityRecorder(density_stride))
    out = evolve(config, recorders)
    return BlochRun(out["centroid"], spectrum(out["centroid"]), out.get("density"))


def run_sbo(
    m: float = 100.0,
    detuning: float = 0.01,
    theta: float = HADAMARD,
    n_sites: int = 1000,
    steps: int = 40_000,
    phi: float = 0.0,
) -> SBORun:
    """Harmonic drive detuned by ``detuning`` from the Bloch frequency.

    ``peaks`` lists the three strongest spectral lines, strongest first.
    """
    config = SimulationConfig(n_sites, steps, CoinParams(theta), FieldConfig.driven(m, detuning, phi))
    trace = evolve(config, [CentroidRecorder()])["centroid"]
    spec = spectrum(trace)
    return SBORun(trace, spec, spectral_peaks(spec, 3))


def run_resonant_drift(
    m: float = 100.0,
    theta: float = HADAMARD,
    phi: float = 0.0,
    n_sites: int = 2000,
    steps: int | None = None,
    relative_amplitude: float = 1.0,
) -> DriftRun:
    """Drive exactly at the Bloch frequency and measure the centroid drift.

    The velocity is the slope over ``[5 T_B, 25 T_B)``; ``steps`` defaults
    to the end of that window.  Shorter runs use the whole periods available
    (see :func:`~ewalk.observables.default_velocity_window`).
    """
    steps = drift_steps(m) if steps is None else steps
    field = FieldConfig.driven(m, 0.0, phi, relative_amplitude)
    config = SimulationConfig(n_sites, steps, CoinParams(theta), field)
    trace = evolve(config, [CentroidRecorder()])["centroid"]
    window = default_velocity_window(m, steps)
    return DriftRun(trace, drift_velocity(trace, window, bloch_period=m))


def velocity_law(phi, relative_amplitude: float = 1.0):
    """Normalized resonant drift ``cos(d cos(phi) - phi)`` with ``d = delta_phi / phi0``."""
    return np.cos(relative_amplitude * np.cos(phi) - phi)


def law_extrema(relative_amplitude: float = 1.0) -> tuple[float, float]:
    """Phases of maximal and minimal drift: ``phi1 = d cos(phi1)`` and ``pi - phi1``."""
    d = relative_amplitude
    phi1 = brentq(lambda p: p - d * math.cos(p), -math.pi / 2, math.pi / 2 + abs(d), xtol=1e-14)
    return phi1, math.pi - phi1


def law_zeros(relative_amplitude: float = 1.0, samples: int = 4096) -> list[float]:
    """Sign changes of :func:`velocity_law` on ``[0, 2 pi)``, bracketed and bisected."""
    grid = np.linspace(0.0, 2 * math.pi, samples + 1)
    vals = velocity_law(grid, relative_amplitude)
    roots = []
    for a, b, va, vb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if va == 0.0:
            roots.append(float(a))
        elif va * vb < 0:
            roots.append(brentq(lambda p: velocity_law(p, relative_amplitude), a, b, xtol=1e-14))
    return roots


def fit_velocity_law(
    phis: np.ndarray,
    velocities: np.ndarray,
    relative_amplitude: float = 1.0,
    fit_offset: bool = False,
) -> tuple[float, float, float]:
    """Least-squares amplitude (and optionally a global phase offset) of the drift law.

    Returns
    -------
    v0, offset, residual
        ``residual`` is the largest absolute deviation, in sites per step,
        of ``v0 * law(phi + offset)`` from the data.  NaN points are skipped.
    """
    phis = np.asarray(phis, dtype=float)
    v = np.asarray(velocities, dtype=float)
    ok = np.isfinite(v)
    phis, v = phis[ok], v[ok]
    model = velocity_law(phis, relative_amplitude)
    v0 = float(np.dot(model, v) / np.dot(model, model))
    offset = 0.0
    if fit_offset:
        sol = least_squares(
            lambda p: p[0] * velocity_law(phis + p[1], relative_amplitude) - v,
            x0=[v0, 0.0],
            bounds=([-np.inf, -math.pi / 4], [np.inf, math.pi / 4]),
        )
        v0, offset = float(sol.x[0]), float(sol.x[1])
    residual = float(np.max(np.abs(v0 * velocity_law(phis + offset, relative_amplitude) - v)))
    return v0, offset, residual


@dataclass(frozen=True, eq=False)
class VelocityCurve:
    m: float
    theta: float
    relative_amplitude: float
    phis: np.ndarray
    velocities: np.ndarray
    fitted_v0: float
    phase_offset: float
    fit_residual: float
    errors: dict = dataclasses.field(default_factory=dict)

    @property
    def normalized_residual(self) -> float:
        return self.fit_residual / abs(self.fitted_v0)


@dataclass(frozen=True, eq=False)
class VelocityMap:
    m: float
    thetas: np.ndarray
    phis: np.ndarray
    v: np.ndarray
    errors: dict = dataclasses.field(default_factory=dict)


def _drift_job(args):
    m, theta, phi, n_sites, steps, rel = args
    try:
        return run_resonant_drift(m, theta, phi, n_sites, steps, rel).velocity, None
    except EdgeLeakError as exc:
        return math.nan, str(exc)


def velocity_curve(
    m: float = 100.0,
    theta: float = HADAMARD,
    phis: np.ndarray | None = None,
    n_sites: int = 2000,
    steps: int | None = None,
    relative_amplitude: float = 1.0,
    fit_offset: bool = False,
    jobs: int | None = 1,
) -> VelocityCurve:
    """Resonant drift velocity against the drive phase, with the law fitted."""
    phis = phi_grid() if phis is None else np.asarray(phis, dtype=float)
    jobs_in = [(m, theta, float(p), n_sites, steps, relative_amplitude) for p in phis]
    out = parallel_map(_drift_job, jobs_in, jobs)
    v = np.array([o[0] for o in out])
    errors = {i: o[1] for i, o in enumerate(out) if o[1] is not None}
    v0, offset, resid = fit_velocity_law(phis, v, relative_amplitude, fit_offset)
    return VelocityCurve(m, theta, relative_amplitude, phis, v, v0, offset, resid, errors)


def velocity_map(
    m: float = 100.0,
    thetas: np.ndarray | None = None,
    phis: np.ndarray | None = None,
    n_sites: int | None = None,
    steps: int | None = None,
    jobs: int | None = 1,
) -> VelocityMap:
    """Resonant drift velocity over the (gate angle, drive phase) plane.

    Near ``theta = 0`` or ``pi`` part of the packet moves ballistically, so
    ``n_sites`` defaults to the light-cone size for the run length.  A
    point that still hits the boundary is stored as NaN and its error kept
    in ``errors[(i, j)]``.
    """
    thetas = theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    phis = phi_grid() if phis is None else np.asarray(phis, dtype=float)
    steps = drift_steps(m) if steps is None else steps
    n_sites = light_cone_sites(steps) if n_sites is None else n_sites
    keys = [(i, j) for i in range(thetas.size) for j in range(phis.size)]
    jobs_in = [(m, float(thetas[i]), float(phis[j]), n_sites, steps, 1.0) for i, j in keys]
    out = parallel_map(_drift_job, jobs_in, jobs)
    v = np.full((thetas.size, phis.size), math.nan)
    errors = {}
    for (i, j), (vel, err) in zip(keys, out):
        v[i, j] = vel
        if err is not None:
            errors[(i, j)] = err
    return VelocityMap(m, thetas, phis, v, errors)


def _density_job(args):
    label, config, stride = args
    return evolve(config, [DensityRecorder(stride)])["density"]


def density_experiment(
    m: float = 100.0,
    theta: float = HADAMARD,
    n_sites: int = 1000,
    steps: int = 1000,
    detuning: float = 0.01,
    phi: float = 0.0,
    stride: int = 1,
    jobs: int | None = 1,
) -> dict[str, DensityMap]:
    """Density maps for the static field, a slightly detuned drive and the resonant drive."""
    variants = {
        "bloch": FieldConfig(m),
        "sbo": FieldConfig.driven(m, detuning, phi),
        "resonant": FieldConfig.driven(m, 0.0, phi),
    }
    jobs_in = [
        (label, SimulationConfig(n_sites, steps, CoinParams(theta), f), stride) for label, f in variants.items()
    ]
    maps = parallel_map(_density_job, jobs_in, jobs)
    return dict(zip(variants, maps))


def density_checksums(dmap: DensityMap) -> list[str]:
    """Per-row SHA-256 of the raw float64 bytes, for run-to-run regression."""
    return [hashlib.sha256(np.ascontiguousarray(row, dtype="<f8").tobytes()).hexdigest() for row in dmap.rows]
