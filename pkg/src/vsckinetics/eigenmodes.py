"""Collective mode structure of N vibrations coupled to one cavity mode.

Diagonalizing the bilinear cavity-vibration Hamiltonian for N identical
vibrations of frequency omega_v and one cavity mode omega_c gives two
polaritons (labels "+", "-") and N-1 dark combinations (label "d" for N=2).
Everything here is expressed in wavenumbers (cm^-1); a quantum of mode q
carries energy omega_q directly in those units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence, Tuple

if TYPE_CHECKING:  # pragma: no cover
    from .states import ReactionNetwork

__all__ = [
    "CavitySpec",
    "ModeBasis",
    "DisplacementTable",
    "build_mode_basis",
    "build_displacements",
    "composite_energy_vsc",
    "composite_energy_bare",
    "VSC_MODE_LABELS",
    "BARE_MODE_LABELS",
]

VSC_MODE_LABELS: Tuple[str, str, str] = ("+", "-", "d")
BARE_MODE_LABELS: Tuple[str, str, str] = ("c", "v1", "v2")

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CavitySpec:
    """Cavity parameters: frequency and loss in cm^-1 / ps^-1, single-molecule coupling g."""

    omega_c: float  # cm^-1
    g: float  # cm^-1, single-molecule coupling strength
    kappa: float  # ps^-1, photon loss rate
    n_molecules: int = 2

    def __post_init__(self) -> None:
        if self.omega_c <= 0.0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if self.g < 0.0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.n_molecules != 2:
            raise ValueError("only the two-molecule system is implemented")


@dataclass(frozen=True)
class ModeBasis:
    """Eigenmodes of the coupled cavity-vibration block.

    ``coefficients[q][i]`` is the amplitude of bare mode i (0 = cavity,
    1..N = molecular vibrations) in eigenmode q; rows are orthonormal.
    ``frequencies`` aligns with ``labels``.
    """

    labels: Tuple[str, ...]
    frequencies: Tuple[float, ...]  # cm^-1
    coefficients: Tuple[Tuple[float, ...], ...]
    mixing_angle: float  # rad
    omega_v: float  # cm^-1, bare vibration (= dark mode) frequency

    def frequency(self, label: str) -> float:
        return self.frequencies[self.labels.index(label)]

    def coefficient(self, label: str, bare_index: int) -> float:
        return self.coefficients[self.labels.index(label)][bare_index]


def build_mode_basis(cavity: CavitySpec, omega_v: float) -> ModeBasis:
    """Diagonalize the cavity + N-vibration block.

    Frequencies: omega_pm = (omega_c + omega_v)/2 +- sqrt((omega_c-omega_v)^2
    + 4 g^2 N)/2, dark mode stays at omega_v. The mixing angle is taken on the
    branch theta = atan2(2 g sqrt(N), omega_c - omega_v)/2 in (0, pi/2) so the
    "+" mode is the upper polariton and its cavity amplitude is cos(theta).
    The dark row is fixed to (0, 1/sqrt2, -1/sqrt2); observable rates must not
    depend on that sign choice.
    """
    if omega_v <= 0.0:
        raise ValueError(f"omega_v must be > 0, got {omega_v}")
    n = cavity.n_molecules
    g_coll = cavity.g * math.sqrt(n)  # collective coupling g*sqrt(N)
    detuning = cavity.omega_c - omega_v
    half_split = 0.5 * math.sqrt(detuning * detuning + 4.0 * g_coll * g_coll)
    center = 0.5 * (cavity.omega_c + omega_v)
    omega_plus = center + half_split
    omega_minus = center - half_split
    theta = 0.5 * math.atan2(2.0 * g_coll, detuning)
    ct, st = math.cos(theta), math.sin(theta)
    coefficients = (
        (ct, st / _SQRT2, st / _SQRT2),
        (st, -ct / _SQRT2, -ct / _SQRT2),
        (0.0, 1.0 / _SQRT2, -1.0 / _SQRT2),
    )
    return ModeBasis(
        labels=VSC_MODE_LABELS,
        frequencies=(omega_plus, omega_minus, omega_v),
        coefficients=coefficients,
        mixing_angle=theta,
        omega_v=omega_v,
    )


@dataclass(frozen=True)
class DisplacementTable:
    """Equilibrium displacements of the eigenmodes for every electronic configuration.

    ``per_molecule[(i, species, q)]`` is molecule i's contribution
    c_qi * (omega_v / omega_q) * lambda_species to the displacement of mode q;
    ``aggregate[(config, q)]`` sums those contributions over molecules for a
    full configuration tuple.
    """

    basis: ModeBasis
    per_molecule: Mapping[Tuple[int, str, str], float]
    aggregate: Mapping[Tuple[Tuple[str, ...], str], float]


def build_displacements(basis: ModeBasis, network: "ReactionNetwork") -> DisplacementTable:
    """Redistribute each species' bare displacement over the eigenmodes.

    A molecule in species phi displaces eigenmode q by
    c_qi * (omega_v / omega_q) * lambda_phi, which preserves the physical
    equilibrium geometry of the bare vibration after the basis rotation.
    """
    n = len(basis.coefficients[0]) - 1  # molecules
    per_molecule = {}
    for i in range(1, n + 1):
        for sp in network.species:
            for q, omega_q in zip(basis.labels, basis.frequencies):
                coeff = basis.coefficient(q, i)
                per_molecule[(i, sp.label, q)] = (
                    coeff * (basis.omega_v / omega_q) * sp.displacement
                )
    labels = [sp.label for sp in network.species]
    aggregate = {}
    for phi1 in labels:
        for phi2 in labels:
            config = (phi1, phi2)
            for q in basis.labels:
                aggregate[(config, q)] = (
                    per_molecule[(1, phi1, q)] + per_molecule[(2, phi2, q)]
                )
    return DisplacementTable(basis=basis, per_molecule=per_molecule, aggregate=aggregate)


def composite_energy_vsc(
    config: Tuple[str, ...],
    occupations: Sequence[int],
    basis: ModeBasis,
    table: DisplacementTable,
    network: "ReactionNetwork",
) -> float:
    """Energy (cm^-1) of |config; occupations> in the eigenmode basis.

    Sum of electronic energies and eigenmode quanta, plus the polaron shift
    omega_v * sum_i lambda_phi_i^2 - sum_q omega_q * lambda_config_q^2 that
    the basis rotation leaves behind (it vanishes when the cavity decouples).
    """
    energy = sum(network.energy(phi) for phi in config)
    energy += sum(m * omega for m, omega in zip(occupations, basis.frequencies))
    shift = basis.omega_v * sum(network.displacement(phi) ** 2 for phi in config)
    for q, omega_q in zip(basis.labels, basis.frequencies):
        lam = table.aggregate[(tuple(config), q)]
        shift -= omega_q * lam * lam
    return energy + shift


def composite_energy_bare(
    config: Tuple[str, ...],
    occupations: Sequence[int],
    network: "ReactionNetwork",
    cavity: CavitySpec,
    omega_v: float,
) -> float:
    """Energy (cm^-1) of |config; occupations> in the uncoupled basis.

    Occupations are ordered (cavity, vibration 1, vibration 2); with each
    molecule's vibration displaced along its own coordinate there is no
    residual shift term.
    """
    energy = sum(network.energy(phi) for phi in config)
    energy += occupations[0] * cavity.omega_c
    energy += omega_v * (occupations[1] + occupations[2])
    return energy
