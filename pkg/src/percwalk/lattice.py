"""Percolation bond configurations.

Every bond draw is a pure function of ``(master_seed, realization_index,
step_index, bond_position)``: the four integers are folded through the
SplitMix64 finalizer and the top 53 bits of the result give a uniform
variate ``u``.  A bond is present iff ``u < p``.  Because ``u`` does not
depend on ``p``, realizations at different percolation parameters share
their random numbers, which keeps swept curves smooth.

Bond ``b`` of a window of radius ``N`` joins sites ``b - N`` and
``b - N + 1`` (``b = 0 .. 2N-1``); it is hashed by its signed left-site
coordinate so a realization does not change when the window grows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


class Regime(str, enum.Enum):
    PERFECT = "perfect"
    STATIC = "static"
    DYNAMIC = "dynamic"

    @classmethod
    def parse(cls, value: "Regime | str") -> "Regime":
        if isinstance(value, Regime):
            return value
        aliases = {"statical": "static", "dynamical": "dynamic"}
        return cls(aliases.get(value.lower(), value.lower()))


def splitmix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 output function applied elementwise (uint64, wrapping)."""
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _u64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64).astype(np.uint64)


def bond_uniforms(
    regime: Regime | str,
    steps: int,
    master_seed: int,
    realizations,
    window_radius: int | None = None,
) -> np.ndarray:
    """Uniform variates of shape ``(R, n_configs, 2*window_radius)``.

    ``n_configs`` is ``steps`` for the dynamic regime and 1 otherwise.  The
    perfect regime returns zeros (every bond present for any ``p > 0``;
    callers treat it specially anyway).
    """
    regime = Regime.parse(regime)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = steps if window_radius is None else window_radius
    reals = np.atleast_1d(np.asarray(realizations, dtype=np.int64))
    n_cfg = steps if regime is Regime.DYNAMIC else 1
    if regime is Regime.PERFECT:
        return np.zeros((reals.size, 1, 2 * n))
    with np.errstate(over="ignore"):
        k = splitmix64(np.array([master_seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
        k = splitmix64(k ^ _u64(reals))[:, None, None]
        k = splitmix64(k ^ _u64(np.arange(n_cfg))[None, :, None])
        k = splitmix64(k ^ _u64(np.arange(-n, n))[None, None, :])
    return (k >> np.uint64(11)).astype(np.float64) * 2.0**-53


def bonds_from_uniforms(regime: Regime | str, p: float, uniforms: np.ndarray) -> np.ndarray:
    _check_p(p)
    if Regime.parse(regime) is Regime.PERFECT:
        return np.ones(uniforms.shape, dtype=bool)
    return uniforms < p


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"percolation parameter must lie in [0, 1], got {p}")


@dataclass(frozen=True, eq=False)
class BondConfig:
    """Presence flags for the ``2N`` bonds of a window of radius ``N``."""

    present: np.ndarray

    def __post_init__(self):
        if self.present.ndim != 1 or self.present.size % 2:
            raise ValueError("bond array must be 1-D with even length")

    @property
    def window_radius(self) -> int:
        return self.present.size // 2

    @classmethod
    def full(cls, window_radius: int) -> "BondConfig":
        return cls(np.ones(2 * window_radius, dtype=bool))

    def dump(self) -> str:
        return "".join("1" if b else "0" for b in self.present)


@dataclass(frozen=True, eq=False)
class LatticeSequence:
    steps: int
    bonds: np.ndarray  # (n_configs, 2N) bool
    regime: Regime
    p: float
    master_seed: int | None = None
    realization_index: int | None = None

    @property
    def window_radius(self) -> int:
        return self.bonds.shape[1] // 2

    def config(self, step: int) -> BondConfig:
        if not 0 <= step < self.steps:
            raise IndexError(step)
        row = self.bonds[step] if self.bonds.shape[0] > 1 else self.bonds[0]
        return BondConfig(row)

    def per_step(self) -> np.ndarray:
        """Bond flags broadcast to one row per step, shape ``(steps, 2N)``."""
        return np.broadcast_to(self.bonds, (self.steps, self.bonds.shape[1])) \
            if self.bonds.shape[0] == 1 else self.bonds

    def dump(self) -> str:
        """One line per step, '1'/'0' per bond from left to right."""
        return "\n".join(self.config(s).dump() for s in range(self.steps))


def sample_sequence(
    regime: Regime | str,
    p: float,
    steps: int,
    master_seed: int,
    realization_index: int,
    window_radius: int | None = None,
) -> LatticeSequence:
    regime = Regime.parse(regime)
    _check_p(p)
    u = bond_uniforms(regime, steps, master_seed, [realization_index], window_radius)[0]
    return LatticeSequence(
        steps=steps,
        bonds=bonds_from_uniforms(regime, p, u),
        regime=regime,
        p=p,
        master_seed=master_seed,
        realization_index=realization_index,
    )


def fixed_sequence(bonds, steps: int | None = None) -> LatticeSequence:
    """Wrap explicit bond flags: a 1-D array is reused at every step."""
    bonds = np.atleast_2d(np.asarray(bonds, dtype=bool))
    if steps is None:
        steps = bonds.shape[0] if bonds.shape[0] > 1 else 1
    if bonds.shape[0] not in (1, steps):
        raise ValueError("need one bond row or one per step")
    regime = Regime.DYNAMIC if bonds.shape[0] > 1 else Regime.STATIC
    return LatticeSequence(steps, bonds, regime, float("nan"))


def perfect_sequence(steps: int, window_radius: int | None = None) -> LatticeSequence:
    n = steps if window_radius is None else window_radius
    return LatticeSequence(steps, np.ones((1, 2 * n), dtype=bool), Regime.PERFECT, 1.0)


def avg_segment_length(p: float) -> float:
    """Mean length of a connected run of bonds, ``p / (1 - p)``.

    Returns ``inf`` at ``p = 1``.
    """
    _check_p(p)
    if p == 1.0:
        return float("inf")
    return p / (1.0 - p)
