"""Reaction network description and composite vibronic state enumeration.

A composite state pairs an electronic configuration (one species label per
molecule) with a vibrational occupation pattern over the three active modes,
truncated to at most one total quantum. For two molecules and S species that
gives 4*S^2 states, ordered lexicographically by configuration (declaration
order) and then by occupation pattern (ground, then one quantum in each mode
in basis order).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .eigenmodes import (
    BARE_MODE_LABELS,
    CavitySpec,
    build_displacements,
    build_mode_basis,
    composite_energy_bare,
    composite_energy_vsc,
)
from .units import thermal_energy

__all__ = [
    "SpeciesSpec",
    "CouplingSpec",
    "ReactionNetwork",
    "CompositeState",
    "enumerate_states",
    "initial_distribution",
]


@dataclass(frozen=True)
class SpeciesSpec:
    """One electronic species: label, energy (cm^-1), dimensionless displacement."""

    label: str
    energy: float
    displacement: float

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("species label must be non-empty")


@dataclass(frozen=True)
class CouplingSpec:
    """Electronic coupling between an unordered species pair.

    J is the diabatic coupling (cm^-1), lambda_s the classical (solvent)
    reorganization energy (cm^-1) for that transition.
    """

    pair: Tuple[str, str]
    J: float
    lambda_s: float

    def __post_init__(self) -> None:
        if len(self.pair) != 2 or self.pair[0] == self.pair[1]:
            raise ValueError(f"coupling pair must name two distinct species, got {self.pair}")
        if self.J != 0.0 and self.lambda_s <= 0.0:
            raise ValueError("lambda_s must be > 0 for a nonzero coupling")
        if self.lambda_s < 0.0:
            raise ValueError(f"lambda_s must be >= 0, got {self.lambda_s}")

    def involves(self, a: str, b: str) -> bool:
        return {a, b} == set(self.pair)


@dataclass(frozen=True)
class ReactionNetwork:
    """Declared species plus the couplings that connect them."""

    species: Tuple[SpeciesSpec, ...]
    couplings: Tuple[CouplingSpec, ...] = ()

    def __post_init__(self) -> None:
        if not self.species:
            raise ValueError("network needs at least one species")
        labels = [s.label for s in self.species]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate species labels in {labels}")
        seen_pairs = set()
        for c in self.couplings:
            for lab in c.pair:
                if lab not in labels:
                    raise ValueError(f"coupling references undeclared species {lab!r}")
            key = frozenset(c.pair)
            if key in seen_pairs:
                raise ValueError(f"duplicate coupling for pair {tuple(sorted(c.pair))}")
            seen_pairs.add(key)

    def labels(self) -> Tuple[str, ...]:
        return tuple(s.label for s in self.species)

    def _lookup(self, label: str) -> SpeciesSpec:
        for s in self.species:
            if s.label == label:
                return s
        raise KeyError(f"unknown species {label!r}")

    def energy(self, label: str) -> float:
        return self._lookup(label).energy

    def displacement(self, label: str) -> float:
        return self._lookup(label).displacement

    def coupling(self, a: str, b: str) -> Optional[CouplingSpec]:
        for c in self.couplings:
            if c.involves(a, b):
                return c
        return None


@dataclass(frozen=True)
class CompositeState:
    """One basis state of the master equation: configuration + occupations + energy."""

    index: int
    config: Tuple[str, ...]
    occupations: Tuple[int, ...]
    mode_labels: Tuple[str, ...]
    energy: float  # cm^-1

    @property
    def total_quanta(self) -> int:
        return sum(self.occupations)

    @property
    def label(self) -> str:
        if self.total_quanta == 0:
            vib = "0"
        else:
            vib = self.mode_labels[self.occupations.index(1)]
        return f"{'.'.join(self.config)}|{vib}"

    def count(self, species_label: str) -> int:
        return self.config.count(species_label)


def _occupation_patterns(n_modes: int) -> list[Tuple[int, ...]]:
    patterns = [tuple(0 for _ in range(n_modes))]
    for k in range(n_modes):
        patterns.append(tuple(1 if j == k else 0 for j in range(n_modes)))
    return patterns


def enumerate_states(
    network: ReactionNetwork,
    kind: str,
    cavity: CavitySpec,
    omega_v: float,
) -> Tuple[CompositeState, ...]:
    """Enumerate all composite states for ``kind`` in {"vsc", "bare"}.

    "vsc" uses the polariton/dark eigenmodes (energies include the polaron
    shift); "bare" uses the uncoupled cavity and per-molecule vibrations.
    Ordering is deterministic: configuration-major in species declaration
    order, occupation pattern minor.
    """
    if kind == "vsc":
        basis = build_mode_basis(cavity, omega_v)
        table = build_displacements(basis, network)
        mode_labels = basis.labels

        def energy_of(config, occ):
            return composite_energy_vsc(config, occ, basis, table, network)

    elif kind == "bare":
        mode_labels = BARE_MODE_LABELS

        def energy_of(config, occ):
            return composite_energy_bare(config, occ, network, cavity, omega_v)

    else:
        raise ValueError(f"kind must be 'vsc' or 'bare', got {kind!r}")

    labels = network.labels()
    states = []
    index = 0
    for phi1 in labels:
        for phi2 in labels:
            config = (phi1, phi2)
            for occ in _occupation_patterns(len(mode_labels)):
                states.append(
                    CompositeState(
                        index=index,
                        config=config,
                        occupations=occ,
                        mode_labels=mode_labels,
                        energy=energy_of(config, occ),
                    )
                )
                index += 1
    return tuple(states)


def initial_distribution(
    states: Sequence[CompositeState],
    reactant: str,
    temperature: float,
) -> np.ndarray:
    """Thermal distribution restricted to the all-``reactant`` configuration.

    Weights are Boltzmann factors at ``temperature`` over the vibrational
    manifold of the configuration with every molecule in the reactant species;
    all other states get probability 0. The result sums to 1.
    """
    kT = thermal_energy(temperature)
    declared = {lab for s in states for lab in s.config}
    if reactant not in declared:
        raise ValueError(f"reactant {reactant!r} not among declared species")
    p = np.zeros(len(states))
    target = [s for s in states if all(lab == reactant for lab in s.config)]
    e_min = min(s.energy for s in target)
    for s in target:
        p[s.index] = np.exp(-(s.energy - e_min) / kT)
    return p / p.sum()
