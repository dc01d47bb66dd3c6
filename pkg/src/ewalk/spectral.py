"""Centroid spectra, dominant peaks and the Bloch / super-Bloch crossover scan."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .observables import CentroidRecorder, CentroidTrace
from .sweep import parallel_map
from .walk import EdgeLeakError, SimulationConfig, evolve

__all__ = [
    "BRANCH_TOLERANCE_BINS",
    "CrossoverResult",
    "Spectrum",
    "aligned_steps",
    "classify_branch",
    "crossover_grid",
    "crossover_scan",
    "dominant_frequency",
    "spectral_peaks",
    "spectrum",
]

BRANCH_TOLERANCE_BINS = 2


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided amplitude spectrum.

    ``mags[k]`` is ``2 |X_k| / T`` for the DFT ``X`` of a record of ``T``
    samples, so a unit-amplitude tone sitting on a bin shows up with
    magnitude 1.  ``freqs`` are angular, in radians per step.
    """

    freqs: np.ndarray
    mags: np.ndarray
    resolution: float

    @property
    def record_length(self) -> int:
        return int(round(2 * math.pi / self.resolution))


def spectrum(trace: CentroidTrace | np.ndarray) -> Spectrum:
    """Rectangular-window spectrum of the mean-subtracted trace.

    A trace of ``t_max + 1`` samples is treated as a periodic record of the
    first ``t_max`` of them, giving bins at multiples of ``2 pi / t_max``.
    Record lengths that hold whole periods of the tones of interest put
    those tones exactly on bins.
    """
    samples = trace.samples if isinstance(trace, CentroidTrace) else np.asarray(trace, dtype=float)
    if samples.size < 3:
        raise ValueError("need at least 3 samples")
    x = samples[:-1]
    x = x - x.mean()
    t_max = x.size
    mags = 2.0 * np.abs(np.fft.rfft(x)) / t_max
    freqs = 2 * math.pi * np.arange(mags.size) / t_max
    return Spectrum(freqs, mags, 2 * math.pi / t_max)


def dominant_frequency(spec: Spectrum, min_freq: float | None = None) -> float:
    """Frequency of the strongest bin at or above ``min_freq`` (default: one bin)."""
    if min_freq is None:
        min_freq = spec.resolution
    if min_freq < spec.resolution * (1 - 1e-9):
        raise ValueError("min_freq must exclude the DC bin")
    admissible = spec.freqs >= min_freq * (1 - 1e-12)
    if not admissible.any():
        raise ValueError(f"no bins at or above {min_freq}")
    idx = np.flatnonzero(admissible)
    return float(spec.freqs[idx[np.argmax(spec.mags[idx])]])


def spectral_peaks(spec: Spectrum, count: int = 3, min_freq: float | None = None) -> list[tuple[float, float]]:
    """Strongest local maxima as ``(freq, mag)``, largest first."""
    if min_freq is None:
        min_freq = spec.resolution
    m = spec.mags
    is_peak = np.zeros(m.size, dtype=bool)
    is_peak[1:-1] = (m[1:-1] >= m[:-2]) & (m[1:-1] > m[2:])
    is_peak &= spec.freqs >= min_freq * (1 - 1e-12)
    idx = np.flatnonzero(is_peak)
    idx = idx[np.argsort(m[idx])[::-1]][:count]
    return [(float(spec.freqs[i]), float(m[i])) for i in idx]


def classify_branch(omega_dom: float, detuning: float, bloch_frequency: float, resolution: float) -> str | None:
    """``"sbo"`` if the peak tracks the detuning, ``"bloch"`` if it sits at the
    Bloch frequency, ``None`` if neither (within two bins)."""
    tol = BRANCH_TOLERANCE_BINS * resolution * (1 + 1e-9)
    if abs(omega_dom - detuning) <= tol:
        return "sbo"
    if abs(omega_dom - bloch_frequency) <= tol:
        return "bloch"
    return None


def crossover_grid(m: float, points: int = 30, denominator: int = 40) -> np.ndarray:
    """Detunings ``k * omega_B / denominator`` for ``k = 1..points``.

    Rational multiples of the Bloch frequency let a single record length
    (see :func:`aligned_steps`) hold whole periods of every tone.
    """
    if points >= denominator:
        raise ValueError("grid must stay below the Bloch frequency")
    return np.arange(1, points + 1) * (2 * math.pi / m) / denominator


def aligned_steps(m: float, denominator: int = 40, min_steps: int = 10_000) -> int:
    """Smallest multiple of ``denominator * T_B`` that is at least ``min_steps``.

    Exact only for integer ``m``.
    """
    block = denominator * m
    return int(round(math.ceil(min_steps / block) * block))


@dataclass(frozen=True, eq=False)
class CrossoverResult:
    m: float
    theta: float
    steps: int
    detunings: np.ndarray
    dominant: np.ndarray
    branches: list
    crossover: float
    errors: dict = dataclasses.field(default_factory=dict)

    @property
    def bloch_frequency(self) -> float:
        return 2 * math.pi / self.m

    @property
    def ratio(self) -> float:
        """Crossover detuning in units of the Bloch frequency."""
        return self.crossover / self.bloch_frequency

    @property
    def unclassified(self) -> list[int]:
        return [i for i, b in enumerate(self.branches) if b is None]


def _split_index(branches: list) -> int:
    # Boundary k (between k-1 and k) with fewest SBO points above it plus
    # Bloch points below it; for a clean transition that is the first Bloch point.
    best, best_cost = None, None
    for k in range(1, len(branches)):
        cost = sum(b == "bloch" for b in branches[:k]) + sum(b == "sbo" for b in branches[k:])
        if best_cost is None or cost < best_cost:
            best, best_cost = k, cost
    return best


def _dominant_for(job):
    config, min_freq = job
    try:
        trace = evolve(config, [CentroidRecorder()])["centroid"]
    except EdgeLeakError as exc:
        return math.nan, str(exc)
    return dominant_frequency(spectrum(trace), min_freq), None


def crossover_scan(base: SimulationConfig, detuning_grid, jobs: int | None = 1) -> CrossoverResult:
    """Dominant centroid frequency across detunings and the regime boundary.

    Each grid point reruns ``base`` with ``omega = omega_B + detuning``
    (amplitude and phase of the harmonic term taken from ``base``).  The
    crossover is the midpoint between the grid points either side of the
    switch from the super-Bloch branch to the Bloch branch.  Points on
    neither branch stay in ``branches`` as ``None``.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    f = base.field
    wb = f.bloch_frequency
    if np.any(grid <= 0) or np.any(grid >= wb):
        raise ValueError("detunings must lie in (0, omega_B)")
    res = 2 * math.pi / base.steps
    jobs_in = [
        (dataclasses.replace(base, field=dataclasses.replace(f, omega=wb + dw)), res)
        for dw in grid
    ]
    out = parallel_map(_dominant_for, jobs_in, jobs)
    dominant = np.array([o[0] for o in out])
    errors = {i: o[1] for i, o in enumerate(out) if o[1] is not None}
    branches = [
        None if math.isnan(om) else classify_branch(om, dw, wb, res)
        for om, dw in zip(dominant, grid)
    ]
    if not any(b == "sbo" for b in branches) or not any(b == "bloch" for b in branches):
        crossover = math.nan
    else:
        k = _split_index(branches)
        crossover = 0.5 * (grid[k - 1] + grid[k])
    return CrossoverResult(
        m=f.m,
        theta=base.coin.theta,
        steps=base.steps,
        detunings=grid,
        dominant=dominant,
        branches=branches,
        crossover=crossover,
        errors=errors,
    )
