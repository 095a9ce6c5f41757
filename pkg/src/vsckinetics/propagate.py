"""Master-equation propagation and species observables.

The generator is tiny (<= 36 states) but stiff: rates span ~1e-4 to 1 ps^-1
while horizons reach 1e4-1e6 ps. The propagator therefore evaluates the
exact dense matrix exponential p(t) = expm(K t) p0 at every requested time
instead of stepping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .rates import RateMatrix
from .states import CompositeState

__all__ = [
    "NumericalError",
    "TimeGrid",
    "Trajectory",
    "DEFAULT_GRID_START",
    "DEFAULT_GRID_END",
    "DEFAULT_GRID_POINTS",
    "propagate",
    "species_population",
    "normalized_species_fraction",
    "clamp_for_output",
    "ScalingCriterion",
    "vsc_scaling_criterion",
]

DEFAULT_GRID_START = 0.1  # ps
DEFAULT_GRID_END = 5.0e4  # ps
DEFAULT_GRID_POINTS = 400

CONSERVATION_TOL = 1e-9
NEGATIVITY_TOL = -1e-10
OUTPUT_CLAMP = 1e-12


class NumericalError(RuntimeError):
    """Propagation produced unphysical populations (non-finite, negative, or leaking)."""


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing output times in ps."""

    points: Tuple[float, ...]
    spacing: str  # "log" or "linear"

    def __post_init__(self) -> None:
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if not self.points:
            raise ValueError("time grid needs at least one point")
        if self.points[0] < 0.0:
            raise ValueError("time grid must start at t >= 0")
        for a, b in zip(self.points, self.points[1:]):
            if b <= a:
                raise ValueError("time grid must be strictly increasing")

    @property
    def t_end(self) -> float:
        return self.points[-1]

    @classmethod
    def logarithmic(cls, start: float, end: float, n: int) -> "TimeGrid":
        if start <= 0.0:
            raise ValueError("log grid needs start > 0")
        if n < 2 or end <= start:
            raise ValueError("log grid needs n >= 2 and end > start")
        return cls(points=tuple(float(t) for t in np.geomspace(start, end, n)), spacing="log")

    @classmethod
    def linear(cls, start: float, end: float, n: int) -> "TimeGrid":
        if n < 2 or end <= start:
            raise ValueError("linear grid needs n >= 2 and end > start")
        return cls(points=tuple(float(t) for t in np.linspace(start, end, n)), spacing="linear")

    @classmethod
    def default(cls) -> "TimeGrid":
        return cls.logarithmic(DEFAULT_GRID_START, DEFAULT_GRID_END, DEFAULT_GRID_POINTS)


@dataclass(frozen=True)
class Trajectory:
    """Populations over a time grid, per state and aggregated per species.

    ``state_populations[k]`` is the state distribution at ``grid.points[k]``;
    ``species_populations[k]`` holds the raw molecule counts N_phi(t) in
    [0, n_molecules], columns aligned with ``species_labels``.
    """

    grid: TimeGrid
    states: Tuple[CompositeState, ...]
    state_populations: np.ndarray
    species_labels: Tuple[str, ...]
    species_populations: np.ndarray

    @property
    def n_molecules(self) -> int:
        return len(self.states[0].config)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.grid.points)

    def species_series(self, label: str) -> np.ndarray:
        """Raw molecule count N_phi(t)."""
        if label not in self.species_labels:
            raise KeyError(f"unknown species {label!r}")
        return self.species_populations[:, self.species_labels.index(label)]

    def normalized_series(self, label: str) -> np.ndarray:
        """N_phi(t) divided by the molecule count, in [0, 1]."""
        return self.species_series(label) / self.n_molecules


def _species_order(states: Sequence[CompositeState]) -> Tuple[str, ...]:
    seen: list[str] = []
    for s in states:
        for lab in s.config:
            if lab not in seen:
                seen.append(lab)
    return tuple(seen)


def species_population(
    p: np.ndarray, states: Sequence[CompositeState], label: str
) -> float:
    """Expected number of molecules in species ``label`` for distribution ``p``."""
    if label not in {lab for s in states for lab in s.config}:
        raise KeyError(f"unknown species {label!r}")
    if len(p) != len(states):
        raise ValueError("distribution length does not match state count")
    return float(sum(p[s.index] * s.count(label) for s in states))


def normalized_species_fraction(
    p: np.ndarray, states: Sequence[CompositeState], label: str
) -> float:
    """Species population divided by the number of molecules."""
    return species_population(p, states, label) / len(states[0].config)


def propagate(rate_matrix: RateMatrix, p0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Evaluate p(t) = expm(K t) p0 on every grid point.

    p0 must be a normalized distribution over the generator's states.
    Raises NumericalError if the result loses probability beyond 1e-9 or
    turns negative beyond roundoff; populations are kept unclamped here.
    """
    K = rate_matrix.matrix
    states = rate_matrix.states
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (len(states),):
        raise ValueError(f"p0 has shape {p0.shape}, expected ({len(states)},)")
    if abs(p0.sum() - 1.0) > 1e-10:
        raise ValueError(f"p0 must sum to 1 within 1e-10, got {p0.sum()!r}")
    if p0.min() < 0.0:
        raise ValueError("p0 must be nonnegative")

    result = np.empty((len(grid.points), len(states)))
    for k, t in enumerate(grid.points):
        result[k] = expm(K * t) @ p0

    if not np.all(np.isfinite(result)):
        raise NumericalError("propagation produced non-finite populations")
    worst_leak = float(np.abs(result.sum(axis=1) - 1.0).max())
    if worst_leak > CONSERVATION_TOL:
        raise NumericalError(f"probability leaked by {worst_leak:.3e} (tolerance {CONSERVATION_TOL})")
    worst_neg = float(result.min())
    if worst_neg < NEGATIVITY_TOL:
        raise NumericalError(f"population went negative: {worst_neg:.3e}")

    labels = _species_order(states)
    counts = np.array([[s.count(lab) for lab in labels] for s in states], dtype=float)
    return Trajectory(
        grid=grid,
        states=states,
        state_populations=result,
        species_labels=labels,
        species_populations=result @ counts,
    )


def clamp_for_output(populations: np.ndarray) -> np.ndarray:
    """Zero out tiny negative roundoff for reporting; internal arrays stay raw."""
    out = np.array(populations, dtype=float, copy=True)
    out[(out < 0.0) & (out > -OUTPUT_CLAMP)] = 0.0
    return out


@dataclass(frozen=True)
class ScalingCriterion:
    """Both sides of the collective-scaling condition epsilon/N >= k_d/(k_r + k_d)."""

    modifiable: bool
    lhs: float
    rhs: float
    k_ssa: Optional[float] = None  # steady-state bare rate k_f * k_d / (k_r + k_d)


def vsc_scaling_criterion(
    epsilon: float,
    n_molecules: float,
    k_r: float,
    k_d: float,
    k_f: Optional[float] = None,
) -> ScalingCriterion:
    """Decide whether a per-molecule rate change epsilon can alter ensemble kinetics.

    A vibrationally hot product branches between the reverse reaction (k_r)
    and decay (k_d); the net conversion is modified only if the relative
    single-molecule rate change epsilon, diluted by the N molecules sharing
    the cavity, is at least the branching fraction k_d/(k_r + k_d). Passing
    the forward rate k_f additionally reports the steady-state net rate.
    """
    if n_molecules < 1:
        raise ValueError(f"N must be >= 1, got {n_molecules}")
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    if k_r < 0.0 or k_d < 0.0:
        raise ValueError("rates must be >= 0")
    if k_r + k_d == 0.0:
        raise ValueError("k_r + k_d must be > 0")
    lhs = epsilon / n_molecules
    rhs = k_d / (k_r + k_d)
    k_ssa = None if k_f is None else k_f * rhs
    return ScalingCriterion(modifiable=lhs >= rhs, lhs=lhs, rhs=rhs, k_ssa=k_ssa)
