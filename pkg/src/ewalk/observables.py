"""Observables of a walker state and recorders that collect them during a run."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .walk import WalkerState

__all__ = [
    "CentroidRecorder",
    "CentroidTrace",
    "DensityMap",
    "DensityRecorder",
    "NormRecorder",
    "centroid",
    "default_velocity_window",
    "drift_velocity",
    "probability_distribution",
]


@dataclass(frozen=True, eq=False)
class CentroidTrace:
    """Mean position per step; ``samples[t]`` is the centroid after ``t`` steps."""

    samples: np.ndarray

    @property
    def steps(self) -> int:
        return self.samples.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size)


@dataclass(frozen=True, eq=False)
class DensityMap:
    """Site probabilities recorded every ``stride`` steps."""

    rows: np.ndarray
    stride: int

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.rows.shape[0]) * self.stride


def probability_distribution(state: WalkerState) -> np.ndarray:
    """Spin-summed site probability ``|up_n|^2 + |down_n|^2``."""
    return state.up.real**2 + state.up.imag**2 + state.down.real**2 + state.down.imag**2


def centroid(state: WalkerState) -> float:
    # Absolute site index, not relative to the origin.
    p = probability_distribution(state)
    return float(np.dot(np.arange(p.size, dtype=float), p))


def default_velocity_window(bloch_period: float, steps: int | None = None) -> tuple[int, int]:
    """Fit window ``[5 T_B, 25 T_B)``, skipping the initial transient.

    For runs shorter than ``25 T_B`` the window keeps as many whole periods
    as fit after ``5 T_B``, or starts at 0 if fewer than two would remain.
    """
    start = int(round(5 * bloch_period))
    if steps is None:
        return start, int(round(25 * bloch_period))
    samples = steps + 1
    periods = min(20, math.floor((samples - start) / bloch_period))
    if periods < 2:
        start = 0
        periods = min(20, math.floor(samples / bloch_period))
    if periods < 2:
        raise ValueError(f"a run of {steps} steps holds fewer than two Bloch periods of {bloch_period}")
    return start, start + int(round(periods * bloch_period))


def drift_velocity(
    trace: CentroidTrace,
    window: tuple[int, int],
    bloch_period: float | None = None,
) -> float:
    """Least-squares slope of the centroid over steps ``start <= t < stop``.

    Parameters
    ----------
    trace : CentroidTrace
        Centroid samples.
    window : (int, int)
        Half-open step range.  With a modulated drift the window should
        cover a whole number of Bloch periods so the intra-period wobble
        averages out.
    bloch_period : float, optional
        If given, the window is required to span at least two periods and an
        integer multiple of the period.

    Returns
    -------
    float
        Drift velocity in sites per step.
    """
    start, stop = window
    if not (0 <= start < stop):
        raise ValueError(f"invalid window {window}")
    if stop > trace.samples.size:
        raise ValueError(f"window {window} exceeds trace of {trace.samples.size} samples")
    if bloch_period is not None:
        n_periods = (stop - start) / bloch_period
        # Non-integer periods can only be matched to the nearest step.
        whole = round(n_periods)
        if whole < 2 or abs((stop - start) - whole * bloch_period) > 0.5:
            raise ValueError(
                f"window length {stop - start} is not a whole number (>= 2) of Bloch periods {bloch_period}"
            )
    t = np.arange(start, stop, dtype=float)
    x = trace.samples[start:stop]
    t_c = t - t.mean()
    return float(np.dot(t_c, x - x.mean()) / np.dot(t_c, t_c))


class CentroidRecorder:
    name = "centroid"

    def __init__(self):
        self._samples: list[float] = []

    def record(self, t: int, state: WalkerState) -> None:
        self._samples.append(centroid(state))

    def result(self) -> CentroidTrace:
        return CentroidTrace(np.array(self._samples))


class NormRecorder:
    name = "norm"

    def __init__(self):
        self._samples: list[float] = []

    def record(self, t: int, state: WalkerState) -> None:
        self._samples.append(state.norm())

    def result(self) -> np.ndarray:
        return np.array(self._samples)


class DensityRecorder:
    """Keep the site distribution every ``stride`` steps (including t = 0)."""

    name = "density"

    def __init__(self, stride: int = 1):
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride}")
        self.stride = stride
        self._rows: list[np.ndarray] = []

    def record(self, t: int, state: WalkerState) -> None:
        if t % self.stride == 0:
            self._rows.append(probability_distribution(state))

    def result(self) -> DensityMap:
        return DensityMap(np.array(self._rows), self.stride)
