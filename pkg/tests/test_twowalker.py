import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percwalk.evolution import dense_evolution_matrix, evolve, position_distribution
from percwalk.lattice import perfect_sequence, sample_sequence
from percwalk.state import PHI_MINUS, PHI_PLUS, UP, CoinState, make_localized
from percwalk.twowalker import (
    InputKind, canonical_input, dense_joint_distribution, diagonal_decomposition, fluctuation_identity,
    joint_distribution, make_input,
)

from conftest import random_sequences

KINDS = ("phi_plus", "psi_minus", "psi_s")


def _coin_tensor(inp):
    """Two-walker coin amplitudes at the origin, T[c, d]."""
    c1 = inp.psi1.amplitudes[inp.window_radius]
    c2 = inp.psi2.amplitudes[inp.window_radius]
    if inp.kind is InputKind.CLASSICAL:
        return np.outer(c1, c2)
    return (np.outer(c1, c2) + inp.kind.sign * np.outer(c2, c1)) / inp.normalization


def _equal_up_to_phase(x, y):
    k = np.argmax(np.abs(y))
    phase = x.flat[k] / y.flat[k]
    return abs(abs(phase) - 1) < 1e-12 and np.allclose(x, phase * y, atol=1e-12)


def test_canonical_coin_states():
    r = 1 / np.sqrt(2)
    assert _equal_up_to_phase(_coin_tensor(canonical_input("phi_plus", 3)), np.array([[r, 0], [0, r]]))
    assert _equal_up_to_phase(_coin_tensor(canonical_input("psi_minus", 3)), np.array([[0, r], [-r, 0]]))
    ps = canonical_input("psi_s", 3)
    np.testing.assert_allclose(_coin_tensor(ps), np.outer(PHI_PLUS.as_array(), PHI_MINUS.as_array()))


def test_psi_minus_overlap_and_norm():
    inp = canonical_input("psi_minus", 5)
    assert abs(inp.overlap) < 1e-16
    assert inp.normalization == pytest.approx(np.sqrt(2))


def test_degenerate_fermion_rejected():
    psi = make_localized(0, UP, 3)
    with pytest.raises(ValueError):
        make_input("fermion", psi, psi)
    with pytest.raises(ValueError):
        canonical_input("nonsense", 3)


@pytest.mark.parametrize("seq", random_sequences(24, 6, seed=21))
@pytest.mark.parametrize("name", KINDS)
def test_product_form_matches_tensor_oracle(seq, name):
    inp = canonical_input(name, seq.steps)
    ref = dense_joint_distribution(inp, dense_evolution_matrix(seq))
    np.testing.assert_allclose(joint_distribution(inp, seq).probs, ref, atol=1e-12, rtol=0)


def _random_coin(draw_vals):
    v = np.array(draw_vals[:2]) + 1j * np.array(draw_vals[2:])
    v /= np.linalg.norm(v)
    return CoinState(*v)


vals = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
    lambda v: np.linalg.norm(v) > 0.1)


@settings(max_examples=40, deadline=None)
@given(vals, vals, st.sampled_from(list(InputKind)), st.integers(1, 5), st.integers(0, 1000))
def test_tensor_oracle_arbitrary_coins(v1, v2, kind, steps, idx):
    c1, c2 = _random_coin(v1), _random_coin(v2)
    psi1, psi2 = make_localized(0, c1, steps), make_localized(0, c2, steps)
    try:
        inp = make_input(kind, psi1, psi2)
    except ValueError:
        return
    seq = sample_sequence("dynamic", 0.6, steps, 9, idx)
    ref = dense_joint_distribution(inp, dense_evolution_matrix(seq))
    got = joint_distribution(inp, seq).probs
    np.testing.assert_allclose(got, ref, atol=1e-12)
    np.testing.assert_array_equal(got, got.T)
    assert got.sum() == pytest.approx(1, abs=1e-12)
    assert got.min() >= 0


@pytest.mark.parametrize("seq", random_sequences(20, 12, seed=22))
def test_classical_factorizations(seq):
    n = seq.steps
    psi_s = canonical_input("psi_s", n)
    p1 = position_distribution(evolve(make_localized(0, PHI_PLUS, n), seq)).probs
    p2 = position_distribution(evolve(make_localized(0, PHI_MINUS, n), seq)).probs
    np.testing.assert_allclose(p1, p2, atol=1e-12)
    joint = joint_distribution(psi_s, seq).probs
    np.testing.assert_allclose(joint, np.outer(p1, p1), atol=1e-12)
    # separable input with unrelated coins: symmetrized product of marginals
    c = make_localized(0, UP, n)
    pu = position_distribution(evolve(c, seq)).probs
    cl = joint_distribution(make_input("classical", c, make_localized(0, PHI_PLUS, n)), seq).probs
    np.testing.assert_allclose(cl, 0.5 * (np.outer(pu, p1) + np.outer(p1, pu)), atol=1e-12)


@pytest.mark.parametrize("seq", random_sequences(30, 15, seed=23))
def test_diagonal_ordering(seq):
    n = seq.steps
    diag = {k: np.diag(joint_distribution(canonical_input(k, n), seq).probs) for k in KINDS}
    assert np.all(diag["psi_minus"] <= diag["psi_s"] + 1e-12)
    assert np.all(diag["psi_s"] <= diag["phi_plus"] + 1e-12)


@pytest.mark.parametrize("seq", random_sequences(10, 10, seed=24))
def test_diagonal_decomposition_reproduces_diagonals(seq):
    n = seq.steps
    psi1, psi2 = make_localized(0, PHI_PLUS, n), make_localized(0, PHI_MINUS, n)
    dec = diagonal_decomposition(psi1, psi2, seq)
    assert np.all(dec.cross_plus >= 0)
    np.testing.assert_allclose(dec.boson, np.diag(joint_distribution(canonical_input("phi_plus", n), seq).probs), atol=1e-12)
    np.testing.assert_allclose(dec.fermion, np.diag(joint_distribution(canonical_input("psi_minus", n), seq).probs), atol=1e-12)
    np.testing.assert_allclose(dec.classical_plus, dec.classical, atol=0)  # orthogonal inputs


def test_diagonal_decomposition_nonorthogonal():
    n = 6
    seq = sample_sequence("static", 0.7, n, 1, 2)
    c2 = CoinState(0.8, 0.6j)
    psi1, psi2 = make_localized(0, UP, n), make_localized(0, c2, n)
    dec = diagonal_decomposition(psi1, psi2, seq)
    np.testing.assert_allclose(dec.boson, np.diag(joint_distribution(make_input("boson", psi1, psi2), seq).probs), atol=1e-12)
    np.testing.assert_allclose(dec.fermion, np.diag(joint_distribution(make_input("fermion", psi1, psi2), seq).probs), atol=1e-12)
    same = diagonal_decomposition(psi1, psi1, seq)
    assert same.fermion is None


def _marginals(regime, p, steps, count, seed=3):
    p1, p2 = [], []
    for a in range(count):
        seq = sample_sequence(regime, p, steps, seed, a)
        p1.append(position_distribution(evolve(make_localized(0, PHI_PLUS, steps), seq)).probs)
        p2.append(position_distribution(evolve(make_localized(0, UP, steps), seq)).probs)
    return np.array(p1), np.array(p2)


def test_fluctuation_identity_reconstructs():
    p1, p2 = _marginals("dynamic", 0.75, 9, 300)
    dec = fluctuation_identity(p1, p2)
    assert dec.reconstruction_error <= 1e-12
    np.testing.assert_allclose(dec.residuals1.sum(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(dec.residuals2.sum(axis=0), 0, atol=1e-12)


def test_fluctuation_term_positive_diagonal_for_conjugate_pair():
    p1, _ = _marginals("dynamic", 0.75, 9, 200)
    dec = fluctuation_identity(p1, p1.copy())
    d = np.diag(dec.fluctuation_term)
    np.testing.assert_allclose(d, np.mean(dec.residuals1**2, axis=0), atol=1e-15)
    assert np.all(d >= 0) and d.max() > 0


def test_fluctuation_zero_on_perfect_lattice():
    p = position_distribution(evolve(make_localized(0, PHI_PLUS, 5), perfect_sequence(5))).probs
    dec = fluctuation_identity(np.tile(p, (4, 1)), np.tile(p, (4, 1)))
    assert np.all(dec.fluctuation_term == 0)


def test_fluctuation_needs_two():
    with pytest.raises(ValueError):
        fluctuation_identity(np.ones((1, 3)), np.ones((1, 3)))
