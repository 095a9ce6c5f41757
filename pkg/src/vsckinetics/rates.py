"""Transition rates and generator assembly for the kinetic model.

Three process families populate the generator:

* reactive transitions (nonadiabatic electron transfer of one molecule,
  Marcus-Levich-Jortner form with a multimode Franck-Condon factor),
* loss and gain of single cavity-vibrational quanta (detailed balance),
* one-quantum exchange between eigenmodes (Ohmic bath in the collective
  basis; Purcell-type cavity-vibration exchange in the weak regime).

Rates are in ps^-1, energies in cm^-1. The generator K is column-conservative:
K[j][i] is the rate i -> j and each diagonal entry carries minus its column's
off-diagonal sum, so d/dt p = K p preserves total probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .eigenmodes import (
    CavitySpec,
    DisplacementTable,
    ModeBasis,
    build_displacements,
    build_mode_basis,
)
from .states import CompositeState, ReactionNetwork
from .units import HBAR, thermal_energy, wavenumber_to_angular

__all__ = [
    "BathSpec",
    "RegimeSpec",
    "RateMatrix",
    "REGIME_KINDS",
    "WEAK_COUPLING_DIVISOR",
    "displacement_matrix_element",
    "franck_condon_vsc",
    "franck_condon_bare",
    "reactive_rate",
    "loss_rate_vsc",
    "gain_rate",
    "exchange_rate",
    "purcell_exchange_rate",
    "assemble_rate_matrix",
]

REGIME_KINDS = ("bare", "weak", "vsc")
WEAK_COUPLING_DIVISOR = 100.0


@dataclass(frozen=True)
class BathSpec:
    """Dissipation parameters: vibrational decay, anharmonic bath, temperature."""

    gamma: float  # ps^-1, bare vibrational decay
    eta: float  # dimensionless anharmonic coupling strength
    omega_cut: float  # cm^-1, cutoff of the low-frequency bath
    temperature: float  # K

    def __post_init__(self) -> None:
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.eta < 0.0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.omega_cut <= 0.0:
            raise ValueError(f"omega_cut must be > 0, got {self.omega_cut}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class RegimeSpec:
    """Light-matter coupling regime and the coupling strength it actually uses.

    The effective single-molecule coupling is g for "vsc", g/100 for "weak"
    (perturbative regime) and 0 for "bare".
    """

    kind: str
    g_effective: float  # cm^-1

    def __post_init__(self) -> None:
        if self.kind not in REGIME_KINDS:
            raise ValueError(f"regime kind must be one of {REGIME_KINDS}, got {self.kind!r}")
        if self.g_effective < 0.0:
            raise ValueError(f"g_effective must be >= 0, got {self.g_effective}")

    @classmethod
    def for_kind(cls, kind: str, g: float) -> "RegimeSpec":
        if kind == "vsc":
            return cls(kind, g)
        if kind == "weak":
            return cls(kind, g / WEAK_COUPLING_DIVISOR)
        if kind == "bare":
            return cls(kind, 0.0)
        raise ValueError(f"regime kind must be one of {REGIME_KINDS}, got {kind!r}")


@dataclass(frozen=True)
class RateMatrix:
    """Master-equation generator over an ordered state list."""

    states: Tuple[CompositeState, ...]
    matrix: np.ndarray  # K[j, i] = rate of states[i] -> states[j]
    regime: RegimeSpec

    def __post_init__(self) -> None:
        n = len(self.states)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} states")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("rate matrix contains non-finite entries")
        off = self.matrix - np.diag(np.diag(self.matrix))
        if np.any(off < 0.0):
            raise ValueError("negative off-diagonal rate")

    @property
    def out_rates(self) -> np.ndarray:
        return -np.diag(self.matrix)


def displacement_matrix_element(m_to: int, m_from: int, lam: float) -> float:
    """<m_to| D(lam) |m_from> for a real displacement lam.

    Closed form: sqrt(m_min!/m_max!) * exp(-lam^2/2) * arg^k * L_{m_min}^{(k)}(lam^2)
    with k = |m_to - m_from| and arg = lam for raising elements, -lam for
    lowering ones. The Laguerre value comes from the three-term upward
    recurrence and the factorial ratio from a running product of 1/sqrt, both
    stable for the modest quantum numbers used here.
    """
    if m_to < 0 or m_from < 0:
        raise ValueError("occupation numbers must be non-negative")
    n = min(m_to, m_from)
    k = abs(m_to - m_from)
    arg = lam if m_to >= m_from else -lam
    x = lam * lam
    if n == 0:
        laguerre = 1.0
    else:
        prev = 1.0
        curr = 1.0 + k - x
        for j in range(2, n + 1):
            prev, curr = curr, ((2 * j - 1 + k - x) * curr - (j - 1 + k) * prev) / j
        laguerre = curr
    prefactor = math.exp(-0.5 * x)
    for j in range(1, k + 1):
        prefactor *= arg / math.sqrt(n + j)
    return prefactor * laguerre


def franck_condon_vsc(
    occ_to: Sequence[int],
    occ_from: Sequence[int],
    molecule: int,
    species_from: str,
    species_to: str,
    table: DisplacementTable,
) -> float:
    """Squared Franck-Condon factor for molecule ``molecule`` reacting in the eigenmode basis.

    Product over eigenmodes of displacement elements for the reacting
    molecule's displacement change; every mode can change occupation because
    the reaction coordinate is spread over all of them.
    """
    amp = 1.0
    for idx, q in enumerate(table.basis.labels):
        dlam = (
            table.per_molecule[(molecule, species_to, q)]
            - table.per_molecule[(molecule, species_from, q)]
        )
        amp *= displacement_matrix_element(occ_to[idx], occ_from[idx], dlam)
        if amp == 0.0:
            return 0.0
    return amp * amp


def franck_condon_bare(
    occ_to: Sequence[int],
    occ_from: Sequence[int],
    molecule: int,
    species_from: str,
    species_to: str,
    network: ReactionNetwork,
) -> float:
    """Squared Franck-Condon factor without cavity mixing.

    Only the reacting molecule's own vibration (occupation index ``molecule``;
    index 0 is the cavity) can change; cavity and spectator occupations must
    match or the factor is 0.
    """
    for idx in range(len(occ_from)):
        if idx != molecule and occ_to[idx] != occ_from[idx]:
            return 0.0
    dlam = network.displacement(species_to) - network.displacement(species_from)
    amp = displacement_matrix_element(occ_to[molecule], occ_from[molecule], dlam)
    return amp * amp


def reactive_rate(
    state_from: CompositeState,
    state_to: CompositeState,
    network: ReactionNetwork,
    fc: float,
    temperature: float,
) -> float:
    """Electron-transfer rate (ps^-1) between composite states.

    Marcus-Levich-Jortner form with the high-frequency part carried by the
    precomputed squared Franck-Condon factor ``fc`` and the activation
    penalty by the full composite energy gap. Returns 0 for species pairs
    with no declared coupling.
    """
    diff = [k for k in range(len(state_from.config)) if state_from.config[k] != state_to.config[k]]
    if len(diff) != 1:
        raise ValueError("reactive transition must change exactly one molecule's species")
    phi_from = state_from.config[diff[0]]
    phi_to = state_to.config[diff[0]]
    coupling = network.coupling(phi_from, phi_to)
    if coupling is None or coupling.J == 0.0:
        return 0.0
    kT = thermal_energy(temperature)
    lam_s = coupling.lambda_s
    de = state_to.energy - state_from.energy
    prefactor = math.sqrt(math.pi / (lam_s * kT)) * coupling.J * coupling.J / HBAR
    return prefactor * fc * math.exp(-((de + lam_s) ** 2) / (4.0 * lam_s * kT))


def loss_rate_vsc(q: str, basis: ModeBasis, cavity: CavitySpec, bath: BathSpec) -> float:
    """Decay rate of one quantum in eigenmode q: cavity and vibrational channels mix."""
    c0 = basis.coefficient(q, 0)
    vib_weight = sum(
        basis.coefficient(q, i) ** 2 for i in range(1, len(basis.coefficients[0]))
    )
    return c0 * c0 * cavity.kappa + vib_weight * bath.gamma


def gain_rate(loss: float, omega: float, temperature: float) -> float:
    """Thermal excitation rate paired to ``loss`` by detailed balance."""
    if loss < 0.0:
        raise ValueError(f"loss rate must be >= 0, got {loss}")
    return loss * math.exp(-omega / thermal_energy(temperature))


def exchange_rate(q_from: str, q_to: str, basis: ModeBasis, bath: BathSpec) -> float:
    """One-quantum relaxation between distinct eigenmodes via the anharmonic bath.

    Ohmic spectral density J(w) = eta * w * exp(-(w/w_cut)^2) evaluated at the
    angular gap; downhill moves carry (nbar+1), uphill moves nbar, so the pair
    satisfies detailed balance. Degenerate pairs are rejected: the
    secular rate picture does not apply to them.
    """
    if q_from == q_to:
        raise ValueError("exchange needs two distinct modes")
    d_omega = basis.frequency(q_to) - basis.frequency(q_from)  # cm^-1
    if d_omega == 0.0:
        raise ValueError(f"modes {q_from!r} and {q_to!r} are degenerate")
    gap = abs(d_omega)
    n_mol = len(basis.coefficients[0]) - 1
    overlap = sum(
        basis.coefficient(q_to, i) ** 2 * basis.coefficient(q_from, i) ** 2
        for i in range(1, n_mol + 1)
    )
    w = wavenumber_to_angular(gap)
    w_cut = wavenumber_to_angular(bath.omega_cut)
    spectral = bath.eta * w * math.exp(-((w / w_cut) ** 2))
    nbar = 1.0 / math.expm1(gap / thermal_energy(bath.temperature))
    occupancy = nbar + 1.0 if d_omega < 0.0 else nbar
    return 2.0 * math.pi * overlap * occupancy * spectral


def purcell_exchange_rate(
    k_out_cavity: float, k_out_vib: float, g: float, delta: float
) -> float:
    """Cavity-vibration exchange rate in the perturbative regime.

    gamma' = 4 g^2 k / (4 Delta^2 + k^2) with k the summed out-rates of the
    two exchanging states; g (cm^-1) and the detuning Delta (cm^-1) are
    converted to angular frequency so the result is ps^-1. The rate is
    symmetric in the two states. Requires a nonzero total linewidth.
    """
    if k_out_cavity < 0.0 or k_out_vib < 0.0:
        raise ValueError("out-rates must be >= 0")
    k_total = k_out_cavity + k_out_vib
    if k_total == 0.0:
        raise ValueError("Purcell exchange undefined for two non-decaying states")
    g_ang = wavenumber_to_angular(g)
    d_ang = wavenumber_to_angular(delta)
    return 4.0 * g_ang * g_ang * k_total / (4.0 * d_ang * d_ang + k_total * k_total)


def _config_diff(a: CompositeState, b: CompositeState) -> list[int]:
    return [k for k in range(len(a.config)) if a.config[k] != b.config[k]]


def assemble_rate_matrix(
    states: Sequence[CompositeState],
    network: ReactionNetwork,
    cavity: CavitySpec,
    bath: BathSpec,
    regime: RegimeSpec,
    omega_v: float,
    basis: ModeBasis | None = None,
) -> RateMatrix:
    """Build the full generator for ``states`` under the given regime.

    "vsc" works in the eigenmode basis (reactive, loss/gain, exchange);
    "bare" in the uncoupled basis (reactive, loss/gain only); "weak" is the
    bare generator plus the symmetric Purcell cavity-vibration exchange,
    whose linewidths are the bare out-rates of the two exchanging states.
    An explicit ``basis`` overrides the internally built eigenmodes (only
    meaningful for "vsc"; observable rates must not depend on the arbitrary
    dark-row sign, which this hook lets tests verify).
    """
    kind = regime.kind
    n = len(states)
    K = np.zeros((n, n))
    if kind == "vsc":
        if basis is None:
            effective_cavity = (
                cavity
                if cavity.g == regime.g_effective
                else CavitySpec(
                    omega_c=cavity.omega_c,
                    g=regime.g_effective,
                    kappa=cavity.kappa,
                    n_molecules=cavity.n_molecules,
                )
            )
            basis = build_mode_basis(effective_cavity, omega_v)
        table = build_displacements(basis, network)
        expected_labels = basis.labels
    else:
        if basis is not None:
            raise ValueError("an explicit mode basis only applies to the vsc regime")
        table = None
        expected_labels = ("c", "v1", "v2")
    for s in states:
        if s.mode_labels != expected_labels:
            raise ValueError(
                f"state {s.label} has mode labels {s.mode_labels}, expected {expected_labels}"
            )

    def vib_omega(state: CompositeState) -> float:
        q_idx = state.occupations.index(1)
        if kind == "vsc":
            return basis.frequencies[q_idx]
        return cavity.omega_c if q_idx == 0 else omega_v

    def loss_of(state: CompositeState) -> float:
        q_idx = state.occupations.index(1)
        if kind == "vsc":
            return loss_rate_vsc(state.mode_labels[q_idx], basis, cavity, bath)
        return cavity.kappa if q_idx == 0 else bath.gamma

    for s_from in states:
        for s_to in states:
            if s_to.index == s_from.index:
                continue
            diff = _config_diff(s_from, s_to)
            if len(diff) == 1:
                mol = diff[0] + 1
                phi_from = s_from.config[diff[0]]
                phi_to = s_to.config[diff[0]]
                if network.coupling(phi_from, phi_to) is None:
                    continue
                if kind == "vsc":
                    fc = franck_condon_vsc(
                        s_to.occupations, s_from.occupations, mol, phi_from, phi_to, table
                    )
                else:
                    fc = franck_condon_bare(
                        s_to.occupations, s_from.occupations, mol, phi_from, phi_to, network
                    )
                K[s_to.index, s_from.index] = reactive_rate(
                    s_from, s_to, network, fc, bath.temperature
                )
            elif len(diff) == 0:
                t_from, t_to = s_from.total_quanta, s_to.total_quanta
                if t_from == 1 and t_to == 0:
                    K[s_to.index, s_from.index] = loss_of(s_from)
                elif t_from == 0 and t_to == 1:
                    K[s_to.index, s_from.index] = gain_rate(
                        loss_of(s_to), vib_omega(s_to), bath.temperature
                    )
                elif t_from == 1 and t_to == 1 and kind == "vsc":
                    q_from = s_from.mode_labels[s_from.occupations.index(1)]
                    q_to = s_to.mode_labels[s_to.occupations.index(1)]
                    K[s_to.index, s_from.index] = exchange_rate(q_from, q_to, basis, bath)
                # bare/weak one-quantum moves between different modes: handled
                # below for weak (Purcell), absent for bare

    if kind == "weak":
        out = K.sum(axis=0) - np.diag(K)  # bare out-rates; diag still zero here
        delta = cavity.omega_c - omega_v
        for s_from in states:
            if s_from.total_quanta != 1 or s_from.occupations[0] != 1:
                continue  # s_from is the cavity-excited state of its configuration
            for s_to in states:
                if s_to.total_quanta != 1 or s_to.index == s_from.index:
                    continue
                if _config_diff(s_from, s_to):
                    continue
                if s_to.occupations[0] == 1:
                    continue
                gamma_p = purcell_exchange_rate(
                    out[s_from.index], out[s_to.index], regime.g_effective, delta
                )
                K[s_to.index, s_from.index] = gamma_p
                K[s_from.index, s_to.index] = gamma_p

    np.fill_diagonal(K, 0.0)
    np.fill_diagonal(K, -K.sum(axis=0))
    return RateMatrix(states=tuple(states), matrix=K, regime=regime)
