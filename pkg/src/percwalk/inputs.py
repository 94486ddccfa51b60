"""Named walker inputs shared by the Monte Carlo layer and the CLI.

Accepted names:

* ``phi_plus``, ``psi_minus``, ``psi_s`` -- boson, fermion and classical
  combinations of the coins phi+ = (up + i down)/sqrt2 and phi- = conj(phi+);
* ``single:up``, ``single:down``, ``single:phi+``, ``single:phi-``;
* ``custom:KIND:c1u,c1d,c2u,c2d`` with KIND in boson/fermion/classical and
  four Python complex literals (``custom:c1u,c1d,c2u,c2d`` means classical).

All walkers start at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import DOWN, INPUT_NORM_TOL, PHI_MINUS, PHI_PLUS, UP, CoinState, make_localized
from .twowalker import CANONICAL_INPUTS, DEGENERACY_TOL, InputKind, TwoWalkerInput, make_input

SINGLE_COINS = {"up": UP, "down": DOWN, "phi+": PHI_PLUS, "phi-": PHI_MINUS}


@dataclass(frozen=True)
class InputSpec:
    name: str
    kind: InputKind | None  # None for a single walker
    coin1: CoinState
    coin2: CoinState | None = None

    @property
    def is_single(self) -> bool:
        return self.kind is None

    @property
    def overlap(self) -> complex:
        if self.coin2 is None:
            return 1.0
        return complex(np.vdot(self.coin1.as_array(), self.coin2.as_array()))

    def two_walker_input(self, window_radius: int) -> TwoWalkerInput:
        if self.is_single:
            raise ValueError(f"{self.name} is a single-walker input")
        return make_input(
            self.kind,
            make_localized(0, self.coin1, window_radius),
            make_localized(0, self.coin2, window_radius),
        )


def _check_coin(c: CoinState, label: str) -> CoinState:
    if abs(c.norm_sq - 1) > INPUT_NORM_TOL:
        raise ValueError(f"{label} coin is not normalized (|c|^2 = {c.norm_sq:.12g})")
    return c


def parse_input(name: str) -> InputSpec:
    key = name.strip()
    low = key.lower()
    if low in CANONICAL_INPUTS:
        return InputSpec(low, CANONICAL_INPUTS[low], PHI_PLUS, PHI_MINUS)
    if low.startswith("single:"):
        coin = SINGLE_COINS.get(low.split(":", 1)[1])
        if coin is None:
            raise ValueError(f"unknown single-walker coin in {name!r}; use up, down, phi+ or phi-")
        return InputSpec(low, None, coin)
    if low.startswith("custom:"):
        parts = key.split(":")
        if len(parts) == 2:
            kind, comps = InputKind.CLASSICAL, parts[1]
        elif len(parts) == 3:
            kind, comps = InputKind(parts[1].lower()), parts[2]
        else:
            raise ValueError(f"malformed custom input {name!r}")
        try:
            vals = [complex(v.replace(" ", "")) for v in comps.split(",")]
        except ValueError as exc:
            raise ValueError(f"bad complex component in {name!r}") from exc
        if len(vals) != 4:
            raise ValueError("custom input needs four complex components")
        c1 = _check_coin(CoinState(vals[0], vals[1]), "first")
        c2 = _check_coin(CoinState(vals[2], vals[3]), "second")
        spec = InputSpec(key, kind, c1, c2)
        if kind is InputKind.FERMION and 1 - abs(spec.overlap) ** 2 < DEGENERACY_TOL:
            raise ValueError("fermion input with proportional coins is the zero state")
        return spec
    raise ValueError(f"unknown input {name!r}")
