"""Discrete-time quantum walks under superposed static and harmonic phase fields."""

from .observables import CentroidTrace, DensityMap, centroid, drift_velocity, probability_distribution
from .spectral import Spectrum, crossover_scan, dominant_frequency, spectrum
from .walk import (
    CoinParams,
    EdgeLeakError,
    FieldConfig,
    SimulationConfig,
    WalkerState,
    build_coin,
    dense_unitary_oracle,
    evolve,
    initial_state,
    phase_at,
    step,
)

__version__ = "0.1.0"
