"""Two non-interacting walkers sharing one lattice.

Both walkers evolve under the same single-walker unitary, so a
(anti)symmetrized input ``psi1 (x) psi2 +- psi2 (x) psi1`` stays a sum of
two products.  Writing ``a = U psi1`` and ``b = U psi2``::

    P_cl(i, j) = (Pa(i) Pb(j) + Pb(i) Pa(j)) / 2
    P_+-(i, j) = (P_cl(i, j) +- Re[g(i) g(j)*]) / (1 +- |<psi1|psi2>|^2)

with ``g(i) = sum_c conj(a[i, c]) b[i, c]``.  Joint distributions are
stored normalized over the whole (i, j) plane: the physical probability of
detecting the walkers at distinct sites i != j is ``2 * probs[i, j]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .evolution import evolve, probabilities
from .lattice import LatticeSequence
from .state import PHI_MINUS, PHI_PLUS, WalkerState, inner_product, make_localized

DEGENERACY_TOL = 1e-12


class InputKind(str, enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"
    CLASSICAL = "classical"

    @property
    def sign(self) -> int:
        return {InputKind.BOSON: 1, InputKind.FERMION: -1, InputKind.CLASSICAL: 0}[self]


@dataclass(frozen=True, eq=False)
class TwoWalkerInput:
    kind: InputKind
    psi1: WalkerState
    psi2: WalkerState
    overlap: complex

    @property
    def window_radius(self) -> int:
        return self.psi1.window_radius

    @property
    def normalization(self) -> float:
        """Denominator of the symmetrized state, sqrt(2(1 +- |<psi1|psi2>|^2))."""
        return float(np.sqrt(2 * (1 + self.kind.sign * abs(self.overlap) ** 2)))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    window_radius: int
    probs: np.ndarray

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.window_radius, self.window_radius + 1)

    def at(self, i: int, j: int) -> float:
        n = self.window_radius
        return float(self.probs[i + n, j + n])


def make_input(kind: InputKind | str, psi1: WalkerState, psi2: WalkerState) -> TwoWalkerInput:
    kind = InputKind(kind)
    ov = inner_product(psi1, psi2)
    if kind is InputKind.FERMION and 1 - abs(ov) ** 2 < DEGENERACY_TOL:
        raise ValueError("antisymmetrizing proportional states gives the zero vector")
    return TwoWalkerInput(kind, psi1, psi2, ov)


CANONICAL_INPUTS = {
    "phi_plus": InputKind.BOSON,
    "psi_minus": InputKind.FERMION,
    "psi_s": InputKind.CLASSICAL,
}


def canonical_input(name: str, window_radius: int) -> TwoWalkerInput:
    """Origin-localized phi_plus / psi_minus / psi_s inputs built from phi+-."""
    key = name.lower()
    if key not in CANONICAL_INPUTS:
        raise ValueError(f"unknown canonical input {name!r}")
    psi1 = make_localized(0, PHI_PLUS, window_radius)
    psi2 = make_localized(0, PHI_MINUS, window_radius)
    return make_input(CANONICAL_INPUTS[key], psi1, psi2)


def joint_from_evolved(kind: InputKind, a: np.ndarray, b: np.ndarray, overlap: complex) -> np.ndarray:
    """Joint probabilities from evolved factors ``a``, ``b`` of shape ``(..., sites, 2)``."""
    pa = probabilities(a)
    pb = probabilities(b)
    cross = pa[..., :, None] * pb[..., None, :]
    cl = cross + np.swapaxes(cross, -1, -2)
    cl *= 0.5
    if kind is InputKind.CLASSICAL:
        return cl
    s = kind.sign
    g = np.sum(np.conj(a) * b, axis=-1)
    gr, gi = g.real, g.imag
    # Re[g_i conj(g_j)] in real arithmetic
    interf = gr[..., :, None] * gr[..., None, :]
    interf += gi[..., :, None] * gi[..., None, :]
    if s < 0:
        cl -= interf
    else:
        cl += interf
    cl /= 1 + s * abs(overlap) ** 2
    return np.maximum(cl, 0.0, out=cl)


def joint_distribution(inp: TwoWalkerInput, seq: LatticeSequence) -> JointDistribution:
    a = evolve(inp.psi1, seq).amplitudes
    b = evolve(inp.psi2, seq).amplitudes
    return JointDistribution(inp.window_radius, joint_from_evolved(inp.kind, a, b, inp.overlap))


def dense_joint_distribution(inp: TwoWalkerInput, u: np.ndarray) -> np.ndarray:
    """Reference joint distribution through the full two-walker state.

    ``u`` is the dense single-walker evolution matrix.  The input is
    assembled as a 4-index tensor, evolved with ``kron(u, u)`` and measured
    with the exchange-symmetric projectors.  Only for small windows.
    """
    v1, v2 = inp.psi1.flat(), inp.psi2.flat()
    if inp.kind is InputKind.CLASSICAL:
        psi = np.kron(v1, v2)
    else:
        s = inp.kind.sign
        psi = (np.kron(v1, v2) + s * np.kron(v2, v1)) / inp.normalization
    out = (np.kron(u, u) @ psi).reshape(-1, 2, u.shape[0] // 2, 2)
    p = np.sum(np.abs(out) ** 2, axis=(1, 3))
    return 0.5 * (p + p.T)


@dataclass(frozen=True, eq=False)
class DiagonalDecomposition:
    """Same-site probabilities split into a classical and an interference part.

    ``boson = classical_plus + cross_plus``;
    ``fermion = classical_minus - cross_minus`` (``None`` when the fermion
    state is degenerate).
    """

    classical: np.ndarray
    classical_plus: np.ndarray
    cross_plus: np.ndarray
    classical_minus: np.ndarray | None
    cross_minus: np.ndarray | None

    @property
    def boson(self) -> np.ndarray:
        return self.classical_plus + self.cross_plus

    @property
    def fermion(self) -> np.ndarray | None:
        if self.classical_minus is None:
            return None
        return self.classical_minus - self.cross_minus


def diagonal_decomposition(psi1: WalkerState, psi2: WalkerState, seq: LatticeSequence) -> DiagonalDecomposition:
    ov2 = abs(inner_product(psi1, psi2)) ** 2
    a = evolve(psi1, seq).amplitudes
    b = evolve(psi2, seq).amplitudes
    classical = probabilities(a) * probabilities(b)
    cross = np.abs(np.sum(np.conj(a) * b, axis=-1)) ** 2
    if 1 - ov2 < DEGENERACY_TOL:
        return DiagonalDecomposition(classical, classical / (1 + ov2), cross / (1 + ov2), None, None)
    return DiagonalDecomposition(
        classical,
        classical / (1 + ov2),
        cross / (1 + ov2),
        classical / (1 - ov2),
        cross / (1 - ov2),
    )


@dataclass(frozen=True, eq=False)
class FluctuationDecomposition:
    """Averaged classical joint = product of mean marginals + fluctuation term."""

    mean1: np.ndarray
    mean2: np.ndarray
    residuals1: np.ndarray
    residuals2: np.ndarray
    product_term: np.ndarray
    fluctuation_term: np.ndarray
    direct_average: np.ndarray

    @property
    def reconstructed(self) -> np.ndarray:
        return self.product_term + self.fluctuation_term

    @property
    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.reconstructed - self.direct_average)))


def _sym_outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    o = x[..., :, None] * y[..., None, :]
    return 0.5 * (o + np.swapaxes(o, -1, -2))


def fluctuation_identity(p1: np.ndarray, p2: np.ndarray) -> FluctuationDecomposition:
    """Split the averaged classical joint of ``A`` realizations.

    ``p1`` and ``p2`` hold the per-realization single-walker distributions
    of the two factors, shape ``(A, sites)``.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape or p1.ndim != 2:
        raise ValueError("expected two (A, sites) arrays of equal shape")
    if p1.shape[0] < 2:
        raise ValueError("need at least two realizations")
    m1, m2 = p1.mean(axis=0), p2.mean(axis=0)
    d1, d2 = p1 - m1, p2 - m2
    return FluctuationDecomposition(
        mean1=m1,
        mean2=m2,
        residuals1=d1,
        residuals2=d2,
        product_term=_sym_outer(m1, m2),
        fluctuation_term=_sym_outer(d1, d2).mean(axis=0),
        direct_average=_sym_outer(p1, p2).mean(axis=0),
    )
