import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfjet.errors import NotContractionError
from hopfjet.sampling import random_diagonal_contraction, random_germ
from hopfjet.spectral import (
    BundleAction,
    assert_contraction,
    bundle_resonances,
    diagonal_data,
    eigen,
    is_contraction,
    matrix_resonances,
    nearest_resonance,
    resonance_bound,
    schur,
    small_divisor,
)

from oracles import brute_matrix_resonances, charpoly_residual


# -- eigen ---------------------------------------------------------------------

def test_eigen_diagonal_and_triangular():
    assert np.allclose(eigen(np.diag([0.5, 1 / 3])).eigenvalues, [0.5, 1 / 3], atol=0)
    s = eigen(np.array([[0.5, 1.0], [0.0, 0.25]]))
    assert np.allclose(s.eigenvalues, [0.5, 0.25], atol=0)


def test_eigen_charpoly_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        s = eigen(A)
        norm = np.linalg.norm(A, 2)
        for lam in s.eigenvalues:
            assert charpoly_residual(A.tolist(), lam) <= 1e-8 * norm ** 3


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_schur_invariants(n):
    rng = np.random.default_rng(n)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    s = eigen(A)
    T, Q = s.schur_form, s.schur_basis
    norm = np.linalg.norm(A, 2)
    assert np.abs(np.tril(Q.conj().T @ A @ Q, -1)).max(initial=0) <= 1e-9 * norm
    assert s.residual() <= 1e-9 * norm
    assert np.allclose(Q.conj().T @ Q, np.eye(n), atol=1e-12)
    assert np.allclose(np.sort_complex(np.diag(T)), np.sort_complex(s.eigenvalues), atol=1e-12)
    mods = np.abs(s.eigenvalues)
    assert np.all(np.diff(mods) <= 1e-15)
    ref = np.linalg.eigvals(A)
    for lam in s.eigenvalues:
        assert np.min(np.abs(ref - lam)) <= 1e-10 * norm


def test_schur_of_real_matrix_with_complex_pair():
    A = np.array([[0.0, -1.0], [1.0, 0.0]]) * 0.5
    T, Q = schur(A)
    assert np.allclose(sorted(np.diag(T), key=lambda z: z.imag), [-0.5j, 0.5j], atol=1e-14)


def test_defective_matrix():
    A = np.array([[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [0.0, 0.0, 0.5]])
    s = eigen(A)
    assert np.allclose(s.eigenvalues, 0.5, atol=1e-12)


# -- contraction ---------------------------------------------------------------

def test_assert_contraction_examples():
    assert assert_contraction(np.diag([0.5, 1 / 3]))
    assert not assert_contraction(np.diag([0.5, 1.0]))
    assert not assert_contraction(np.array([[0.999999999999]]))
    assert not is_contraction([1.0 - 1e-12])
    with pytest.raises(NotContractionError, match="not a contraction"):
        matrix_resonances(np.diag([2.0, 0.5]))


# -- bounds and matrix resonances ----------------------------------------------

def test_resonance_bound_examples():
    assert resonance_bound([0.5, 0.25]) == 2
    assert resonance_bound([0.5, 1 / 3]) == 2
    assert resonance_bound([0.3, 0.3, 0.3]) == 1


def test_matrix_resonance_examples():
    rels = matrix_resonances(np.diag([0.5, 0.25]))
    assert [(r.target, tuple(r.exponents), r.residual) for r in rels] == [(1, (2, 0), 0.0)]
    assert str(rels[0]).startswith("a2 = a1^2")
    assert matrix_resonances(np.diag([0.5, 1 / 3])) == []
    assert matrix_resonances(0.7 * np.eye(3)) == []


def test_matrix_resonances_non_diagonal():
    # conjugated and coupled linear part: relation found from its eigenvalues
    rng = np.random.default_rng(1)
    Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    A = Q @ np.array([[0.5, 0.3], [0.0, 0.25]]) @ Q.T
    rels = matrix_resonances(A)
    assert [tuple(r.exponents) for r in rels] == [(2, 0)]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4))
def test_matrix_resonances_brute_force(seed, n):
    alpha = random_diagonal_contraction(np.random.default_rng(seed), n)
    got = {(r.target, tuple(r.exponents)) for r in matrix_resonances(alpha)}
    assert got == brute_matrix_resonances(list(alpha), resonance_bound(alpha), 1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 4))
def test_resonances_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    alpha = random_diagonal_contraction(rng, n)
    perm = rng.permutation(n)
    a = {(alpha[r.target], tuple(r.exponents)) for r in matrix_resonances(alpha)}
    b = {(alpha[perm][r.target], tuple(np.array(r.exponents)[np.argsort(perm)])) for r in matrix_resonances(alpha[perm])}
    assert a == b


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4))
def test_relations_satisfy_modulus_identity(seed, n):
    alpha = random_diagonal_contraction(np.random.default_rng(seed), n)
    for r in matrix_resonances(alpha):
        pred = np.prod(np.abs(alpha) ** np.array(r.exponents))
        assert abs(abs(alpha[r.target]) - pred) <= 2e-9 * abs(alpha[r.target])
        assert sum(r.exponents) >= 2


def test_resonance_set_convention_independent():
    # the pullback convention inverts every weight; weight one is fixed by inversion
    rng = np.random.default_rng(2)
    for _ in range(200):
        alpha = random_diagonal_contraction(rng, 3)
        push = {(r.target, tuple(r.exponents)) for r in matrix_resonances(alpha)}
        inv = set()
        B = resonance_bound(alpha)
        for (i, k) in brute_matrix_resonances(list(alpha), B, 1e-9):
            w = alpha[i] ** -1 / np.prod(alpha ** -np.array(k))
            if abs(w - 1) <= 2e-9:
                inv.add((i, k))
        assert push == inv


# -- bundle resonances ---------------------------------------------------------

def test_bundle_resonance_examples():
    s = diagonal_data([0.5, 0.25])
    rels = bundle_resonances(s, BundleAction.tangent(np.diag([0.5, 0.25])))
    assert {(r.target, tuple(r.exponents)) for r in rels} == {((1, 0), (1, 0))}
    assert bundle_resonances(diagonal_data([0.5]), [1.0]) == []
    rels = bundle_resonances(diagonal_data([0.5]), [2.0, 1.0])
    assert [(r.target, tuple(r.exponents)) for r in rels] == [((1, 0), (1,))]
    assert str(rels[0]).startswith("b2 = b1*a1")


def test_bundle_resonances_from_fiber_matrix():
    M = np.array([[2.0, 5.0], [0.0, 1.0]])
    rels = bundle_resonances(np.diag([0.5]), BundleAction(M))
    assert len(rels) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4))
def test_tangent_bundle_resonance_iff_matrix_resonance(seed, n):
    alpha = random_diagonal_contraction(np.random.default_rng(seed), n)
    tangent = bundle_resonances(alpha, BundleAction.diagonal(alpha))
    assert bool(tangent) == bool(matrix_resonances(alpha))


# -- small divisors ------------------------------------------------------------

def test_small_divisor():
    assert small_divisor([0.5, 0.25]) == 0.0
    assert np.isclose(small_divisor([0.5, 1 / 3], 2, 2), min(abs(1 / 3 - 0.25), abs(0.5 - 1 / 3 * 0.5), abs(1 / 3 - 1 / 9), abs(0.5 - 0.25), abs(0.5 - 1 / 6), abs(0.5 - 1 / 9), abs(1 / 3 - 1 / 6)))
    rel = nearest_resonance([0.5, 0.26])
    assert rel.target == 1 and tuple(rel.exponents) == (2, 0)
    assert small_divisor([0.5], 2, 1) == np.inf


def test_germ_input_accepted():
    g = random_germ(np.random.default_rng(3), 2, 3)
    assert isinstance(matrix_resonances(g), list)
