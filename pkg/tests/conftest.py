"""Shared fixtures and independent oracle implementations for the test suite.

Oracles here deliberately avoid the package's own closed-form code paths:
displacement elements come from exponentiating the truncated displacement
generator, and the stochastic route samples jump processes directly from a
rate matrix. Tests compare the two routes instead of trusting either alone.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import expm

from vsckinetics.config import ScenarioConfig, bundled_config_path, load_config


@pytest.fixture(scope="session")
def reaction1() -> ScenarioConfig:
    return load_config(bundled_config_path("reaction1"))


@pytest.fixture(scope="session")
def reaction2() -> ScenarioConfig:
    return load_config(bundled_config_path("reaction2"))


@pytest.fixture(scope="session")
def reaction3() -> ScenarioConfig:
    return load_config(bundled_config_path("reaction3"))


def with_regime(config: ScenarioConfig, kind: str, **overrides) -> ScenarioConfig:
    """Copy of a config in another regime, optionally tweaking kappa/eta/gamma."""
    out = replace(config, regime_kind=kind)
    if "kappa" in overrides:
        out = replace(out, cavity=replace(out.cavity, kappa=overrides.pop("kappa")))
    bath_fields = {k: overrides.pop(k) for k in ("gamma", "eta") if k in overrides}
    if bath_fields:
        out = replace(out, bath=replace(out.bath, **bath_fields))
    if overrides:
        raise TypeError(f"unknown overrides {sorted(overrides)}")
    return out


def detailed_balance_worst(matrix: np.ndarray, energies: np.ndarray, kT: float) -> float:
    """Worst relative deviation of K[j,i]/K[i,j] from exp(-(E_j-E_i)/kT).

    Pairs with both rates exactly zero carry no constraint and are skipped;
    a pair with exactly one zero would make the ratio meaningless and is
    reported as infinite deviation.
    """
    n = matrix.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            down, up = matrix[j, i], matrix[i, j]
            if down == 0.0 and up == 0.0:
                continue
            if down == 0.0 or up == 0.0:
                return float("inf")
            expected = np.exp(-(energies[j] - energies[i]) / kT)
            worst = max(worst, abs(down / up / expected - 1.0))
    return worst


def displacement_oracle(m_to: int, m_from: int, lam: float, levels: int = 30) -> float:
    """<m_to|exp(lam*(ad - a))|m_from> by dense exponentiation in a truncated basis."""
    ad = np.diag(np.sqrt(np.arange(1.0, levels)), -1)
    return float(expm(lam * (ad - ad.T))[m_to, m_from])


def kmc_state_counts(
    matrix: np.ndarray,
    p0: np.ndarray,
    checkpoints: np.ndarray,
    n_traj: int,
    seed: int,
) -> np.ndarray:
    """Sample jump trajectories of the generator; occupancy counts per checkpoint.

    Returns an integer array of shape (len(checkpoints), n_states) whose row j
    counts how many of the n_traj walkers sat in each state at checkpoints[j].
    Vectorized Gillespie: exponential holding times from the diagonal,
    destinations from the normalized column rates.
    """
    rng = np.random.default_rng(seed)
    n = matrix.shape[0]
    checkpoints = np.asarray(checkpoints, dtype=float)
    exit_rates = -np.diag(matrix)
    jump = matrix.T.copy()  # jump[i, j]: rate i -> j
    np.fill_diagonal(jump, 0.0)
    with np.errstate(invalid="ignore"):
        cum = np.cumsum(jump / np.where(exit_rates > 0.0, exit_rates, 1.0)[:, None], axis=1)

    state = rng.choice(n, size=n_traj, p=p0)
    t_now = np.zeros(n_traj)
    counts = np.zeros((len(checkpoints), n), dtype=np.int64)
    active = np.arange(n_traj)
    t_last = checkpoints[-1]
    while active.size:
        s = state[active]
        lam = exit_rates[s]
        dt = np.full(active.size, np.inf)
        moving = lam > 0.0
        dt[moving] = rng.exponential(1.0, size=int(moving.sum())) / lam[moving]
        t_next = t_now[active] + dt
        for j, t_cp in enumerate(checkpoints):
            hit = (t_now[active] <= t_cp) & (t_next > t_cp)
            if hit.any():
                np.add.at(counts[j], s[hit], 1)
        t_now[active] = t_next
        keep = t_next <= t_last
        active = active[keep]
        if active.size:
            u = rng.random(active.size)
            rows = cum[state[active]]
            dest = (rows < u[:, None]).sum(axis=1)
            state[active] = np.minimum(dest, n - 1)  # guard the u ~ 1.0 roundoff edge
    return counts
