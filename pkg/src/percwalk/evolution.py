"""Hadamard coin, percolation-aware shift and N-step evolution.

The shift is a permutation of the basis.  With ``b[k]`` the flag of the
bond joining window sites ``k`` and ``k+1``::

    up'[k]   = up[k-1]   if b[k-1] else down[k]
    down'[k] = down[k+1] if b[k]   else up[k]

i.e. a blocked up-mover stays put and flips to down, and vice versa.
Bonds beyond the window count as missing, so the kernel is a
permutation for any input; :func:`apply_shift` still refuses states that
touch the window edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import BondConfig, LatticeSequence
from .state import WalkerState

_R2 = 1 / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class PositionDistribution:
    window_radius: int
    probs: np.ndarray

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.window_radius, self.window_radius + 1)

    def at(self, position: int) -> float:
        return float(self.probs[position + self.window_radius])


# -- batched kernels -------------------------------------------------------
# Arrays carry arbitrary leading batch axes; the last axis is position for
# ``up``/``down`` and bond for ``bonds``.

def coin_kernel(up: np.ndarray, down: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (up + down) * _R2, (up - down) * _R2


def shift_kernel(up: np.ndarray, down: np.ndarray, bonds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    new_up = down.copy()
    new_up[..., 1:] = np.where(bonds, up[..., :-1], down[..., 1:])
    new_down = up.copy()
    new_down[..., :-1] = np.where(bonds, down[..., 1:], up[..., :-1])
    return new_up, new_down


def evolve_kernel(up: np.ndarray, down: np.ndarray, bonds: np.ndarray, steps: int):
    """Evolve batched walkers.

    ``bonds`` has shape ``(..., n_configs, 2N)`` with ``n_configs`` either 1
    (reused every step) or ``steps``.
    """
    n_cfg = bonds.shape[-2]
    if n_cfg not in (1, steps):
        raise ValueError("bond sequence length does not match the step count")
    for s in range(steps):
        up, down = coin_kernel(up, down)
        up, down = shift_kernel(up, down, bonds[..., 0 if n_cfg == 1 else s, :])
    return up, down


# -- single-walker API -------------------------------------------------------

def apply_coin(state: WalkerState) -> WalkerState:
    up, down = coin_kernel(state.amplitudes[:, 0], state.amplitudes[:, 1])
    return WalkerState(state.window_radius, np.stack([up, down], axis=-1))


def apply_shift(state: WalkerState, config: BondConfig | np.ndarray) -> WalkerState:
    """Move the walker across the bonds that are present.

    Raises
    ------
    ValueError
        If the window sizes differ or the state has weight on an edge site.
    """
    present = config.present if isinstance(config, BondConfig) else np.asarray(config, dtype=bool)
    if present.size != 2 * state.window_radius:
        raise ValueError("bond configuration does not match the state window")
    a = state.amplitudes
    if np.any(a[0] != 0) or np.any(a[-1] != 0):
        raise ValueError("state support touches the window edge")
    up, down = shift_kernel(a[:, 0], a[:, 1], present)
    return WalkerState(state.window_radius, np.stack([up, down], axis=-1))


def evolve(state: WalkerState, seq: LatticeSequence) -> WalkerState:
    """Apply ``seq.steps`` rounds of coin-then-shift."""
    if seq.window_radius != state.window_radius:
        raise ValueError("lattice window does not match the state window")
    if seq.steps > state.window_radius:
        raise ValueError(f"window radius {state.window_radius} too small for {seq.steps} steps")
    a = state.amplitudes
    up, down = evolve_kernel(a[:, 0], a[:, 1], seq.bonds, seq.steps)
    return WalkerState(state.window_radius, np.stack([up, down], axis=-1))


def probabilities(amps: np.ndarray) -> np.ndarray:
    """Site probabilities from ``(..., sites, 2)`` amplitudes."""
    return np.sum(amps.real**2 + amps.imag**2, axis=-1)


def position_distribution(state: WalkerState) -> PositionDistribution:
    probs = probabilities(state.amplitudes)
    if probs.min() < -1e-14:
        raise ValueError("negative probability")
    probs = np.maximum(probs, 0.0)
    return PositionDistribution(state.window_radius, probs)


def dense_step_matrix(config: BondConfig | np.ndarray) -> np.ndarray:
    """Explicit ``S (1 x H)`` for one bond configuration.

    Built site by site from the four local shift operators (free, blocked
    on the right, blocked on the left, blocked on both sides), with basis
    index ``2*site + coin``.  Meant as a brute-force reference only.
    """
    present = config.present if isinstance(config, BondConfig) else np.asarray(config, dtype=bool)
    n_sites = present.size + 1
    dim = 2 * n_sites
    up, dn = 0, 1

    def idx(site, coin):
        return 2 * site + coin

    shift = np.zeros((dim, dim))
    for i in range(n_sites):
        right = i < n_sites - 1 and present[i]
        left = i > 0 and present[i - 1]
        if right and left:        # S
            shift[idx(i + 1, up), idx(i, up)] = 1
            shift[idx(i - 1, dn), idx(i, dn)] = 1
        elif left:                # S+: following bond missing
            shift[idx(i, dn), idx(i, up)] = 1
            shift[idx(i - 1, dn), idx(i, dn)] = 1
        elif right:               # S-: previous bond missing
            shift[idx(i + 1, up), idx(i, up)] = 1
            shift[idx(i, up), idx(i, dn)] = 1
        else:                     # both missing
            shift[idx(i, dn), idx(i, up)] = 1
            shift[idx(i, up), idx(i, dn)] = 1
    hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) * _R2
    return shift @ np.kron(np.eye(n_sites), hadamard)


def dense_evolution_matrix(seq: LatticeSequence) -> np.ndarray:
    """Product of dense step matrices, latest step leftmost."""
    dim = 2 * (2 * seq.window_radius + 1)
    u = np.eye(dim)
    for s in range(seq.steps):
        u = dense_step_matrix(seq.config(s)) @ u
    return u
