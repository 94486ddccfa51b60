"""Single-walker states on a bounded lattice window.

A walker lives in position x coin space.  Positions run from ``-N`` to
``+N`` where ``N`` is the window radius; amplitudes are stored densely as a
``(2N+1, 2)`` complex array (position-major, coin-minor; coin index 0 is
up, 1 is down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INPUT_NORM_TOL = 1e-9
INTERNAL_NORM_TOL = 1e-12


@dataclass(frozen=True)
class CoinState:
    up: complex
    down: complex

    def __post_init__(self):
        for c in (self.up, self.down):
            if not math.isfinite(complex(c).real) or not math.isfinite(complex(c).imag):
                raise ValueError("coin components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=np.complex128)

    @property
    def norm_sq(self) -> float:
        return abs(self.up) ** 2 + abs(self.down) ** 2

    def normalized(self) -> "CoinState":
        n = math.sqrt(self.norm_sq)
        if n == 0:
            raise ValueError("cannot normalize the zero coin")
        return CoinState(self.up / n, self.down / n)

    def conj(self) -> "CoinState":
        return CoinState(complex(self.up).conjugate(), complex(self.down).conjugate())


_S = 1 / math.sqrt(2)
UP = CoinState(1.0, 0.0)
DOWN = CoinState(0.0, 1.0)
PHI_PLUS = CoinState(_S, 1j * _S)
PHI_MINUS = CoinState(_S, -1j * _S)


@dataclass(frozen=True, eq=False)
class WalkerState:
    """Amplitudes of one walker over positions ``-window_radius..window_radius``."""

    window_radius: int
    amplitudes: np.ndarray

    def __post_init__(self):
        shape = (2 * self.window_radius + 1, 2)
        if self.amplitudes.shape != shape:
            raise ValueError(f"amplitudes must have shape {shape}, got {self.amplitudes.shape}")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("non-finite amplitude")
        self.amplitudes.setflags(write=False)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.window_radius, self.window_radius + 1)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude(self, position: int, coin: int) -> complex:
        return complex(self.amplitudes[position + self.window_radius, coin])

    def flat(self) -> np.ndarray:
        """Flattened amplitude vector, index ``2*(position+N) + coin``."""
        return self.amplitudes.reshape(-1)


def make_localized(position: int, coin: CoinState, window_radius: int) -> WalkerState:
    """Walker sitting at ``position`` with internal state ``coin``.

    Raises
    ------
    ValueError
        If the position falls outside the window or the coin is not
        normalized to within 1e-9.
    """
    if window_radius < 0:
        raise ValueError("window_radius must be non-negative")
    if abs(position) > window_radius:
        raise ValueError(f"position {position} outside window [-{window_radius}, {window_radius}]")
    if abs(coin.norm_sq - 1.0) > INPUT_NORM_TOL:
        raise ValueError(f"coin is not normalized (|c|^2 = {coin.norm_sq})")
    amps = np.zeros((2 * window_radius + 1, 2), dtype=np.complex128)
    amps[position + window_radius] = coin.as_array()
    return WalkerState(window_radius, amps)


def inner_product(a: WalkerState, b: WalkerState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.window_radius != b.window_radius:
        raise ValueError("window radii differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def conjugate(a: WalkerState) -> WalkerState:
    return WalkerState(a.window_radius, np.conj(a.amplitudes))


def coin_at(state: WalkerState, position: int = 0) -> np.ndarray:
    """Coin amplitudes at one site, requiring all others to vanish."""
    idx = position + state.window_radius
    rest = np.delete(state.amplitudes, idx, axis=0)
    if np.any(rest != 0):
        raise ValueError(f"state is not localized at position {position}")
    return state.amplitudes[idx].copy()
