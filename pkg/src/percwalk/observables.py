"""Scalar observables of one- and two-walker outputs.

The array functions accept leading batch axes, so the Monte Carlo layer
evaluates a whole block of realizations at once.  Positions are taken to
be centred on the window: index ``k`` is site ``k - N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evolution import PositionDistribution, evolve, position_distribution
from .lattice import LatticeSequence
from .state import coin_at, make_localized, CoinState
from .twowalker import InputKind, JointDistribution, TwoWalkerInput, joint_distribution

QUANTITIES = ("D", "M", "C", "V")


def _probs(dist) -> np.ndarray:
    return np.asarray(getattr(dist, "probs", dist), dtype=float)


def _sites(n_sites: int) -> np.ndarray:
    n = (n_sites - 1) // 2
    return np.arange(-n, n + 1)


def avg_distance(dist) -> np.ndarray | float:
    """Mean separation ``sum_ij |j - i| P(i, j)``."""
    p = _probs(dist)
    x = _sites(p.shape[-1])
    return np.sum(np.abs(x[None, :] - x[:, None]) * p, axis=(-2, -1))


def meeting_probability(dist) -> np.ndarray | float:
    return np.trace(_probs(dist), axis1=-2, axis2=-1)


def origin_probability(dist) -> np.ndarray | float:
    p = _probs(dist)
    c = (p.shape[-1] - 1) // 2
    return p[..., c, c]


def spread_single(dist, origin: int = 0) -> np.ndarray | float:
    """``sum_i (i - origin)^2 P(i)``."""
    p = _probs(dist)
    x = _sites(p.shape[-1])
    return np.sum((x - origin) ** 2 * p, axis=-1)


def spread_two(dist) -> np.ndarray | float:
    """``(1/2) sum_ij (i^2 + j^2) P(i, j)`` for walkers started at the origin."""
    p = _probs(dist)
    x2 = _sites(p.shape[-1]) ** 2
    return 0.5 * np.sum((x2[:, None] + x2[None, :]) * p, axis=(-2, -1))


def joint_quantity(quantity: str, probs: np.ndarray) -> np.ndarray:
    q = quantity.upper()
    if q == "D":
        return avg_distance(probs)
    if q == "M":
        return meeting_probability(probs)
    if q == "C":
        return origin_probability(probs)
    if q in ("V", "V2"):
        return spread_two(probs)
    raise ValueError(f"unknown quantity {quantity!r}")


def single_quantity(quantity: str, probs: np.ndarray) -> np.ndarray:
    """Single-walker counterparts: ``V`` is the spread, ``C`` the return probability."""
    q = quantity.upper()
    if q in ("V", "V1"):
        return spread_single(probs)
    if q == "C":
        c = (probs.shape[-1] - 1) // 2
        return probs[..., c]
    raise ValueError(f"quantity {quantity!r} is not defined for a single walker")


# -- reduced coin and the spread identities ---------------------------------

@dataclass(frozen=True)
class ReducedCoinDecomposition:
    eigenvalues: tuple[float, float]
    eigenvectors: tuple[CoinState, CoinState]
    operator: np.ndarray = field(repr=False)


def _eigh2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigen-decomposition of a 2x2 Hermitian matrix (descending)."""
    a, d = m[0, 0].real, m[1, 1].real
    b = m[0, 1]
    half_tr = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), abs(b))
    lam = np.array([half_tr + rad, half_tr - rad])
    if abs(b) <= 1e-15 * max(1.0, abs(a) + abs(d)):
        vecs = np.eye(2, dtype=complex) if a >= d else np.eye(2, dtype=complex)[:, ::-1]
        return lam, vecs
    v1 = np.array([b, lam[0] - a], dtype=complex)
    if abs(lam[0] - a) < abs(lam[0] - d):
        # better conditioned form of the same eigenvector
        v1 = np.array([lam[0] - d, np.conj(b)], dtype=complex)
    v1 /= np.linalg.norm(v1)
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])])
    return lam, np.stack([v1, v2], axis=1)


def reduced_coin_operator(inp: TwoWalkerInput) -> np.ndarray:
    """Coin state of walker 1 after tracing out walker 2 (both at the origin).

    For the classical separable input the exchange-symmetric measurement
    makes the relevant marginal the average of the two coin projectors.
    """
    c1 = coin_at(inp.psi1, 0)
    c2 = coin_at(inp.psi2, 0)
    if inp.kind is InputKind.CLASSICAL:
        return 0.5 * (np.outer(c1, c1.conj()) + np.outer(c2, c2.conj()))
    t = (np.outer(c1, c2) + inp.kind.sign * np.outer(c2, c1)) / inp.normalization
    return t @ t.conj().T


def reduced_coin_decomposition(inp: TwoWalkerInput) -> ReducedCoinDecomposition:
    rho = reduced_coin_operator(inp)
    lam, vecs = _eigh2(rho)
    lam = np.clip(lam, 0.0, 1.0)
    return ReducedCoinDecomposition(
        eigenvalues=(float(lam[0]), float(lam[1])),
        eigenvectors=(CoinState(*vecs[:, 0]), CoinState(*vecs[:, 1])),
        operator=rho,
    )


@dataclass(frozen=True)
class SpreadIdentityReport:
    v2_direct: float
    v2_from_decomposition: float
    eigenvalues: tuple[float, float]
    single_spreads: tuple[float, float]

    @property
    def deviation(self) -> float:
        return abs(self.v2_direct - self.v2_from_decomposition)

    @property
    def ok(self) -> bool:
        return self.deviation <= 1e-10


def marginal_spread_identity_check(inp: TwoWalkerInput, seq: LatticeSequence) -> SpreadIdentityReport:
    """Compare the two-walker spread with the eigen-weighted single spreads."""
    dec = reduced_coin_decomposition(inp)
    v2 = float(spread_two(joint_distribution(inp, seq)))
    n = inp.window_radius
    singles = tuple(
        float(spread_single(position_distribution(evolve(make_localized(0, c, n), seq))))
        for c in dec.eigenvectors
    )
    weighted = sum(lam * v for lam, v in zip(dec.eigenvalues, singles))
    return SpreadIdentityReport(v2, float(weighted), dec.eigenvalues, singles)


# -- Monte Carlo sweeps ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObservableCurve:
    quantity: str
    input_name: str
    p_grid: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    averages: int
    steps: int
    regime: str
    master_seed: int

    def rows(self):
        return zip(self.p_grid, self.means, self.stderrs)


def mean_and_stderr(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error along the last axis (sample std, ddof=1)."""
    a = samples.shape[-1]
    if a < 2:
        raise ValueError("standard error needs at least two samples")
    mean = np.sum(samples, axis=-1) / a
    var = np.sum((samples - mean[..., None]) ** 2, axis=-1) / (a - 1)
    return mean, np.sqrt(var / a)


def default_grid(count: int = 41) -> np.ndarray:
    return np.linspace(0.0, 1.0, count)


def sweep(
    quantity: str,
    input_name: str,
    regime,
    p_grid,
    steps: int,
    averages: int,
    master_seed: int,
    workers: int = 1,
) -> ObservableCurve:
    """Average a per-realization observable over ``averages`` lattices per p."""
    from .montecarlo import sample_observables

    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.size == 0:
        raise ValueError("empty p grid")
    if averages < 2:
        raise ValueError("need at least two realizations per grid point")
    samples = sample_observables(
        [input_name], [quantity], regime, p_grid, steps, averages, master_seed, workers
    )[input_name][quantity]
    mean, err = mean_and_stderr(samples)
    return ObservableCurve(
        quantity.upper(), input_name, p_grid, mean, err, averages, steps,
        str(getattr(regime, "value", regime)), master_seed,
    )
