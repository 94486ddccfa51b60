import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percwalk.evolution import evolve, position_distribution
from percwalk.lattice import perfect_sequence, sample_sequence
from percwalk.observables import (
    _eigh2, avg_distance, marginal_spread_identity_check, mean_and_stderr, meeting_probability,
    origin_probability, reduced_coin_decomposition, spread_single, spread_two, sweep,
)
from percwalk.state import PHI_MINUS, PHI_PLUS, UP, DOWN, CoinState, make_localized
from percwalk.twowalker import canonical_input, joint_distribution, make_input

from conftest import random_sequences

KINDS = ("phi_plus", "psi_minus", "psi_s")


def _joint(name, seq):
    return joint_distribution(canonical_input(name, seq.steps), seq)


def _v1(coin, seq):
    return float(spread_single(position_distribution(evolve(make_localized(0, coin, seq.steps), seq))))


def test_distance_trivial():
    frozen = _joint("psi_s", sample_sequence("static", 0.0, 5, 0, 0))
    assert avg_distance(frozen) == 0
    p = np.zeros((5, 5))
    p[2, 4] = p[4, 2] = 0.5
    assert avg_distance(p) == 2


def test_distance_ordering_perfect():
    seq = perfect_sequence(15)
    d = {k: float(avg_distance(_joint(k, seq))) for k in KINDS}
    assert d["psi_minus"] > d["psi_s"] > d["phi_plus"]


def test_meeting_and_origin_trapped():
    seq = sample_sequence("dynamic", 0.0, 7, 0, 0)
    for k in KINDS:
        j = _joint(k, seq)
        assert meeting_probability(j) == pytest.approx(1)
        assert origin_probability(j) == pytest.approx(1)


@pytest.mark.parametrize("seq", random_sequences(10, 12, seed=31))
def test_meeting_classical_is_sum_of_squares(seq):
    p1 = position_distribution(evolve(make_localized(0, PHI_PLUS, seq.steps), seq)).probs
    assert meeting_probability(_joint("psi_s", seq)) == pytest.approx(np.sum(p1**2), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_fermion_meets_less_on_perfect_lattice(n):
    seq = perfect_sequence(n)
    assert meeting_probability(_joint("psi_minus", seq)) < meeting_probability(_joint("psi_s", seq))


def test_origin_parity_on_perfect_lattice():
    for n in (1, 3, 7, 15):
        for k in KINDS:
            assert origin_probability(_joint(k, perfect_sequence(n))) == 0
    assert origin_probability(_joint("phi_plus", perfect_sequence(4))) > 0


@pytest.mark.parametrize("seq", random_sequences(20, 12, seed=32))
def test_bounds(seq):
    for k in KINDS:
        j = _joint(k, seq)
        c, m, d = origin_probability(j), meeting_probability(j), avg_distance(j)
        assert 0 <= c <= m + 1e-15 <= 1 + 1e-12
        assert d >= 0 and spread_two(j) >= 0


def test_spread_single_trivial():
    assert spread_single(np.array([0, 0, 1, 0, 0.0])) == 0
    assert spread_single(np.array([0, 0.5, 0, 0.5, 0])) == 1
    assert spread_single(np.array([0, 0, 0, 1, 0.0]), origin=1) == 0


@pytest.mark.parametrize("seq", random_sequences(40, 15, seed=33))
def test_spread_equality_chain(seq):
    v1 = _v1(PHI_PLUS, seq)
    assert _v1(PHI_MINUS, seq) == pytest.approx(v1, abs=1e-10)
    for k in KINDS:
        assert float(spread_two(_joint(k, seq))) == pytest.approx(v1, abs=1e-10)


coin_vals = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
    lambda v: np.linalg.norm(v) > 0.1)


def _coin(v):
    c = np.array(v[:2]) + 1j * np.array(v[2:])
    return CoinState(*(c / np.linalg.norm(c)))


@settings(max_examples=30, deadline=None)
@given(coin_vals, coin_vals, st.integers(0, 500))
def test_classical_spread_is_average(v1, v2, idx):
    seq = sample_sequence("dynamic", 0.5, 9, 4, idx)
    c1, c2 = _coin(v1), _coin(v2)
    inp = make_input("classical", make_localized(0, c1, 9), make_localized(0, c2, 9))
    assert float(spread_two(joint_distribution(inp, seq))) == pytest.approx((_v1(c1, seq) + _v1(c2, seq)) / 2, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(coin_vals, coin_vals, st.sampled_from(["boson", "fermion", "classical"]), st.integers(0, 500))
def test_marginal_spread_identity(v1, v2, kind, idx):
    seq = sample_sequence("static", 0.7, 9, 6, idx)
    try:
        inp = make_input(kind, make_localized(0, _coin(v1), 9), make_localized(0, _coin(v2), 9))
    except ValueError:
        return
    rep = marginal_spread_identity_check(inp, seq)
    assert rep.ok, rep
    if kind == "boson":
        assert rep.v2_direct <= max(rep.single_spreads) + 1e-10


@pytest.mark.parametrize("kind", ["boson", "classical", "fermion"])
def test_orthogonal_coins_spread_like_phi(kind):
    seq = sample_sequence("dynamic", 0.6, 11, 2, 5)
    c1 = CoinState(0.6, 0.8j)
    c2 = CoinState(-np.conj(c1.down), np.conj(c1.up))
    inp = make_input(kind, make_localized(0, c1, 11), make_localized(0, c2, 11))
    assert abs(inp.overlap) < 1e-15
    assert float(spread_two(joint_distribution(inp, seq))) == pytest.approx(_v1(PHI_PLUS, seq), abs=1e-10)


def test_reduced_coin_examples():
    n = 3
    f = reduced_coin_decomposition(make_input("fermion", make_localized(0, UP, n), make_localized(0, CoinState(0.6, 0.8), n)))
    np.testing.assert_allclose(f.eigenvalues, [0.5, 0.5], atol=1e-12)
    b = reduced_coin_decomposition(canonical_input("phi_plus", n))
    np.testing.assert_allclose(b.eigenvalues, [0.5, 0.5], atol=1e-12)
    c = CoinState(0.6, 0.8j)
    pure = reduced_coin_decomposition(make_input("boson", make_localized(0, c, n), make_localized(0, c, n)))
    np.testing.assert_allclose(pure.eigenvalues, [1, 0], atol=1e-12)
    assert abs(np.vdot(pure.eigenvectors[0].as_array(), c.as_array())) == pytest.approx(1)


@given(st.floats(0, 1), st.floats(0, 1), st.complex_numbers(max_magnitude=1))
def test_closed_form_eigh_matches_numpy(a, d, b):
    m = np.array([[a, b], [np.conj(b), d]])
    lam, vecs = _eigh2(m)
    np.testing.assert_allclose(np.sort(lam), np.linalg.eigvalsh(m), atol=1e-12)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(m @ vecs, vecs * lam, atol=1e-12)


def test_stderr_zero_for_constant_samples():
    mean, err = mean_and_stderr(np.full((3, 10), 0.25))
    np.testing.assert_array_equal(mean, 0.25)
    np.testing.assert_array_equal(err, 0)
    with pytest.raises(ValueError):
        mean_and_stderr(np.ones(1))


def test_stderr_formula():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    mean, err = mean_and_stderr(x)
    assert mean == 3.5
    assert err == pytest.approx(np.std(x, ddof=1) / 2)


def test_sweep_static_origin_decreasing():
    c = sweep("C", "psi_s", "static", np.linspace(0, 1, 11), 15, 600, 3)
    assert c.means[0] == pytest.approx(1, abs=1e-12) and c.means[-1] == 0
    assert np.all(np.diff(c.means) < 2 * np.hypot(c.stderrs[1:], c.stderrs[:-1]))


def test_sweep_rejects_bad_args():
    with pytest.raises(ValueError):
        sweep("M", "psi_s", "static", [], 5, 10, 0)
    with pytest.raises(ValueError):
        sweep("M", "psi_s", "static", [0.5], 5, 1, 0)
