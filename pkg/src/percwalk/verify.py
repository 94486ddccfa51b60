"""Self-checks against brute-force references.

``corrupt_bond=True`` flips one bond in the lattice handed to the fast
path (the references keep the true lattice); it exists as a regression
fixture proving the checks can fail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import dense_evolution_matrix, evolve, position_distribution
from .lattice import LatticeSequence, Regime, sample_sequence
from .observables import marginal_spread_identity_check, spread_single, spread_two
from .state import PHI_MINUS, PHI_PLUS, make_localized
from .twowalker import (
    canonical_input,
    dense_joint_distribution,
    fluctuation_identity,
    joint_distribution,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: max error {self.max_error:.3e} (tol {self.tolerance:g})"


def _corrupt(seq: LatticeSequence) -> LatticeSequence:
    bonds = seq.bonds.copy()
    bonds[:, seq.window_radius] ^= True  # bond (0, 1)
    return LatticeSequence(seq.steps, bonds, seq.regime, seq.p, seq.master_seed, seq.realization_index)


def _sequences(steps_max: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    for k in range(count):
        regime = (Regime.STATIC, Regime.DYNAMIC)[k % 2]
        p = float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
        yield sample_sequence(regime, p, int(rng.integers(1, steps_max + 1)), seed, k)


def check_unitarity(count=200, steps_max=31, seed=7, corrupt_bond=False) -> CheckResult:
    worst = 0.0
    for seq in _sequences(steps_max, count, seed):
        fast = _corrupt(seq) if corrupt_bond else seq
        psi = make_localized(0, PHI_PLUS, seq.steps)
        worst = max(worst, abs(evolve(psi, fast).norm_sq - 1.0))
    return CheckResult("unitarity", worst <= 1e-12, worst, 1e-12)


def check_single_oracle(count=100, steps_max=8, seed=11, corrupt_bond=False) -> CheckResult:
    worst = 0.0
    for seq in _sequences(steps_max, count, seed):
        fast = _corrupt(seq) if corrupt_bond else seq
        psi = make_localized(0, PHI_PLUS, seq.steps)
        ref = dense_evolution_matrix(seq) @ psi.flat()
        worst = max(worst, float(np.max(np.abs(evolve(psi, fast).flat() - ref))))
    return CheckResult("single-walker dense oracle", worst <= 1e-12, worst, 1e-12)


def check_two_walker_oracle(count=30, steps_max=6, seed=13, corrupt_bond=False) -> CheckResult:
    worst = 0.0
    for seq in _sequences(steps_max, count, seed):
        fast = _corrupt(seq) if corrupt_bond else seq
        u = dense_evolution_matrix(seq)
        for name in ("phi_plus", "psi_minus", "psi_s"):
            inp = canonical_input(name, seq.steps)
            got = joint_distribution(inp, fast).probs
            worst = max(worst, float(np.max(np.abs(got - dense_joint_distribution(inp, u)))))
    return CheckResult("two-walker tensor oracle", worst <= 1e-12, worst, 1e-12)


def check_spread_identity(count=40, steps_max=15, seed=17, corrupt_bond=False) -> CheckResult:
    worst = 0.0
    for seq in _sequences(steps_max, count, seed):
        fast = _corrupt(seq) if corrupt_bond else seq
        n = seq.steps
        v1 = float(spread_single(position_distribution(evolve(make_localized(0, PHI_PLUS, n), seq))))
        for name in ("phi_plus", "psi_minus", "psi_s"):
            inp = canonical_input(name, n)
            worst = max(worst, abs(float(spread_two(joint_distribution(inp, fast))) - v1))
            worst = max(worst, marginal_spread_identity_check(inp, seq).deviation)
    return CheckResult("spread identities", worst <= 1e-10, worst, 1e-10)


def check_fluctuation_identity(realizations=200, steps=9, seed=19, corrupt_bond=False) -> CheckResult:
    p1, p2 = [], []
    for a in range(realizations):
        seq = sample_sequence(Regime.DYNAMIC, 0.75, steps, seed, a)
        p1.append(position_distribution(evolve(make_localized(0, PHI_PLUS, steps), seq)).probs)
        fast = _corrupt(seq) if corrupt_bond else seq
        p2.append(position_distribution(evolve(make_localized(0, PHI_MINUS, steps), fast)).probs)
    dec = fluctuation_identity(np.array(p1), np.array(p2))
    # with phi- = conj(phi+) both factors share each realization's distribution
    worst = max(dec.reconstruction_error, float(np.max(np.abs(dec.residuals1 - dec.residuals2))))
    return CheckResult("fluctuation identity", worst <= 1e-12, worst, 1e-12)


ALL_CHECKS = (
    check_unitarity,
    check_single_oracle,
    check_two_walker_oracle,
    check_spread_identity,
    check_fluctuation_identity,
)


def run_all(corrupt_bond: bool = False) -> list[CheckResult]:
    return [check(corrupt_bond=corrupt_bond) for check in ALL_CHECKS]
