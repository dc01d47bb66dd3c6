"""Two-component discrete-time quantum walk driven by a position-linear phase.

One step of the walk applies the coin, the spin-conditional shift and the
field operator, in that order::

    up'[n]   = exp(i G_t (n - N//2)) * ( cos(theta) up[n-1] + sin(theta) down[n-1])
    down'[n] = exp(i G_t (n - N//2)) * ( sin(theta) up[n+1] - cos(theta) down[n+1])

with ``G_t = phi0 + delta_phi * sin(omega * t + phi)`` evaluated at the
pre-update step index ``t``.  Centring the position in the exponent on
``N//2`` rather than on site 0 only changes a global, time-dependent phase.

The chain is open: amplitude shifted past either end is dropped.  To keep that
from silently eating probability, :func:`step` refuses to advance a state
whose weight near the boundary exceeds :data:`EDGE_TOLERANCE`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Any, Iterable, Protocol

import numpy as np

__all__ = [
    "EDGE_TOLERANCE",
    "EDGE_WIDTH",
    "NORM_TOLERANCE",
    "CoinParams",
    "EdgeLeakError",
    "FieldConfig",
    "Recorder",
    "SimulationConfig",
    "WalkerState",
    "build_coin",
    "dense_unitary_oracle",
    "evolve",
    "initial_state",
    "phase_at",
    "step",
]

#: Probability allowed within ``EDGE_WIDTH`` sites of a boundary before a step.
EDGE_TOLERANCE = 1e-8
EDGE_WIDTH = 2
NORM_TOLERANCE = 1e-12
ORACLE_MAX_SITES = 64

DEFAULT_SPINOR = (1 / math.sqrt(2), 1j / math.sqrt(2))


class EdgeLeakError(RuntimeError):
    """The wavefunction reached the open boundary of the chain."""

    def __init__(self, step: int, side: str, probability: float):
        self.step = step
        self.side = side
        self.probability = probability
        super().__init__(
            f"edge leak at step {step}: probability {probability:.3e} within "
            f"{EDGE_WIDTH} sites of the {side} boundary exceeds {EDGE_TOLERANCE:g}"
        )


@dataclass(frozen=True)
class CoinParams:
    """Gate angle of the real coin ``[[cos, sin], [sin, -cos]]``."""

    theta: float = math.pi / 4

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


@dataclass(frozen=True)
class FieldConfig:
    """Static plus harmonic phase ``G(t) = 2 pi/m + delta_phi sin(omega t + phi)``.

    Parameters
    ----------
    m : float
        Static field denominator; the static phase increment is ``2 pi / m``.
        Need not be an integer.
    delta_phi : float
        Amplitude of the harmonic term (radians).
    omega : float
        Angular frequency of the harmonic term (radians per step).
    phi : float
        Phase of the harmonic term (radians).
    """

    m: float
    delta_phi: float = 0.0
    omega: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValueError(f"m must be a positive finite number, got {self.m}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")

    @property
    def phi0(self) -> float:
        return 2 * math.pi / self.m

    @property
    def bloch_frequency(self) -> float:
        return self.phi0

    @property
    def bloch_period(self) -> float:
        return self.m

    @property
    def relative_amplitude(self) -> float:
        """Harmonic-to-static strength ratio ``delta_phi / phi0``."""
        return self.delta_phi / self.phi0

    @classmethod
    def driven(
        cls,
        m: float,
        detuning: float = 0.0,
        phi: float = 0.0,
        relative_amplitude: float = 1.0,
    ) -> FieldConfig:
        """Harmonic drive at ``omega = 2 pi/m + detuning`` with ``delta_phi = rel * 2 pi/m``."""
        phi0 = 2 * math.pi / m
        return cls(m=m, delta_phi=relative_amplitude * phi0, omega=phi0 + detuning, phi=phi)


@dataclass(frozen=True)
class SimulationConfig:
    n_sites: int
    steps: int
    coin: CoinParams = dc_field(default_factory=CoinParams)
    field: FieldConfig = dc_field(default_factory=lambda: FieldConfig(m=100.0))
    origin: int | None = None
    spinor: tuple[complex, complex] = DEFAULT_SPINOR

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError(f"n_sites must be at least 3, got {self.n_sites}")
        if self.steps < 0:
            raise ValueError(f"steps must be non-negative, got {self.steps}")
        if self.origin is None:
            object.__setattr__(self, "origin", self.n_sites // 2)
        if not (0 <= self.origin < self.n_sites):
            raise ValueError(f"origin {self.origin} outside [0, {self.n_sites})")
        c_up, c_down = (complex(c) for c in self.spinor)
        object.__setattr__(self, "spinor", (c_up, c_down))
        norm = abs(c_up) ** 2 + abs(c_down) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"spinor must be normalized, |c_up|^2 + |c_down|^2 = {norm}")


@dataclass(frozen=True, eq=False)
class WalkerState:
    """Spin-up and spin-down amplitudes over the chain at one time step."""

    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.up, dtype=np.complex128)
        down = np.asarray(self.down, dtype=np.complex128)
        if up.ndim != 1 or up.shape != down.shape:
            raise ValueError(f"up/down must be 1-D of equal length, got {up.shape} and {down.shape}")
        if up.size < 3:
            raise ValueError("a chain needs at least 3 sites")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @property
    def n_sites(self) -> int:
        return self.up.size

    def norm(self) -> float:
        return float(np.vdot(self.up, self.up).real + np.vdot(self.down, self.down).real)

    def as_vector(self) -> np.ndarray:
        """Stack into a single ``2N`` vector, spin-up block first."""
        return np.concatenate([self.up, self.down])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> WalkerState:
        n = vec.size // 2
        return cls(vec[:n].copy(), vec[n:].copy())


class Recorder(Protocol):
    """Observable hook called by :func:`evolve` at t = 0 and after every step."""

    name: str

    def record(self, t: int, state: WalkerState) -> None: ...

    def result(self) -> Any: ...


def build_coin(coin: CoinParams) -> np.ndarray:
    c, s = math.cos(coin.theta), math.sin(coin.theta)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def phase_at(field: FieldConfig, t: int) -> float:
    """Phase increment ``G(t)`` in radians."""
    return field.phi0 + field.delta_phi * math.sin(field.omega * t + field.phi)


def initial_state(config: SimulationConfig) -> WalkerState:
    up = np.zeros(config.n_sites, dtype=np.complex128)
    down = np.zeros(config.n_sites, dtype=np.complex128)
    up[config.origin], down[config.origin] = config.spinor
    return WalkerState(up, down)


def _check_edges(state: WalkerState, t: int) -> None:
    for side, sl in (("left", slice(None, EDGE_WIDTH)), ("right", slice(-EDGE_WIDTH, None))):
        weight = np.sum(np.abs(state.up[sl]) ** 2 + np.abs(state.down[sl]) ** 2)
        if weight > EDGE_TOLERANCE:
            raise EdgeLeakError(t, side, float(weight))


def step(
    state: WalkerState,
    coin: CoinParams,
    field: FieldConfig,
    t: int,
    guard: bool = True,
) -> WalkerState:
    """Advance ``state`` from step ``t`` to ``t + 1``.

    Parameters
    ----------
    state : WalkerState
        Amplitudes at step ``t``.
    coin, field : CoinParams, FieldConfig
        Walk parameters.
    t : int
        Current step index; the phase ``G`` is evaluated here.
    guard : bool
        Raise :class:`EdgeLeakError` if the state touches the boundary.
        Disable only when boundary loss is intended (e.g. oracle comparisons
        of arbitrary states).

    Returns
    -------
    WalkerState
        Fresh amplitudes at step ``t + 1``.
    """
    if guard:
        _check_edges(state, t)
    c, s = math.cos(coin.theta), math.sin(coin.theta)
    n = state.n_sites
    up, down = state.up, state.down

    new_up = np.empty(n, dtype=np.complex128)
    new_down = np.empty(n, dtype=np.complex128)
    new_up[0] = 0.0
    new_up[1:] = c * up[:-1] + s * down[:-1]
    new_down[-1] = 0.0
    new_down[:-1] = s * up[1:] - c * down[1:]

    g = phase_at(field, t)
    phase = np.exp(1j * g * (np.arange(n) - n // 2))
    new_up *= phase
    new_down *= phase
    return WalkerState(new_up, new_down)


def evolve(
    config: SimulationConfig,
    recorders: Iterable[Recorder] = (),
    guard: bool = True,
    state: WalkerState | None = None,
) -> dict[str, Any]:
    """Run ``config.steps`` steps and collect each recorder's result by name.

    Only the current state is kept in memory; attach a density recorder to
    retain distributions.  An :class:`EdgeLeakError` carries the step at which
    the boundary was hit.
    """
    recorders = list(recorders)
    if state is None:
        state = initial_state(config)
    for rec in recorders:
        rec.record(0, state)
    for t in range(config.steps):
        state = step(state, config.coin, config.field, t, guard=guard)
        for rec in recorders:
            rec.record(t + 1, state)
    return {rec.name: rec.result() for rec in recorders}


def _walk_matrix(config: SimulationConfig, t: int) -> np.ndarray:
    n = config.n_sites
    eye = np.eye(n)
    c, s = math.cos(config.coin.theta), math.sin(config.coin.theta)
    coin = np.block([[c * eye, s * eye], [s * eye, -c * eye]]).astype(np.complex128)

    shift = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for site in range(n):
        if site + 1 < n:
            shift[site + 1, site] = 1.0
        if site - 1 >= 0:
            shift[n + site - 1, n + site] = 1.0

    x = np.arange(n) - n // 2
    diag = np.exp(1j * phase_at(config.field, t) * x)
    field_op = np.diag(np.concatenate([diag, diag]))

    ident = np.eye(2 * n)
    for name, op in (("coin", coin), ("field", field_op)):
        if np.abs(op.conj().T @ op - ident).max() > NORM_TOLERANCE:
            raise AssertionError(f"{name} operator is not unitary at t={t}")
    # Open chain: the shift is a partial isometry that drops exactly the
    # right-moving amplitude on the last site and the left-moving one on site 0.
    kept = np.ones(2 * n)
    kept[n - 1] = kept[n] = 0.0
    if np.abs(shift.conj().T @ shift - np.diag(kept)).max() > NORM_TOLERANCE:
        raise AssertionError("shift operator is not an open-chain partial isometry")

    return field_op @ shift @ coin


def dense_unitary_oracle(
    config: SimulationConfig, t: int, state: WalkerState | None = None
) -> WalkerState:
    """State at step ``t`` by explicit ``2N x 2N`` matrix products.

    Independent reference for :func:`evolve`; quadratic memory, so limited to
    ``N <= 64``.
    """
    if config.n_sites > ORACLE_MAX_SITES:
        raise ValueError(f"oracle limited to N <= {ORACLE_MAX_SITES}, got {config.n_sites}")
    vec = (state if state is not None else initial_state(config)).as_vector()
    for tp in range(t):
        vec = _walk_matrix(config, tp) @ vec
    return WalkerState.from_vector(vec)
