import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logspect import (
    CommutatorOp,
    ParameterError,
    ShapeError,
    ValidationError,
    assemble_AnB,
    b_map,
    b_map_inverse,
    commutator_op_norm,
)
from logspect.linops import UpperTriangleVector, edge_gradient
from oracles import A_explicit, B_explicit, adjacency_from_pairs, vec


def _sym(rng, m):
    X = rng.standard_normal((m, m))
    return X @ X.T / m


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_apply_and_adjoint_match_kronecker(m, seed):
    rng = np.random.default_rng(seed)
    C = _sym(rng, m)
    op = CommutatorOp(C)
    S = rng.standard_normal((m, m))
    Y = rng.standard_normal((m, m))
    A = A_explicit(C)
    np.testing.assert_allclose(vec(op.apply(S)), A @ vec(S), atol=1e-10)
    np.testing.assert_allclose(vec(op.adjoint_apply(Y)), A.T @ vec(Y), atol=1e-10)
    assert np.sum(op.apply(S) * Y) == pytest.approx(np.sum(S * op.adjoint_apply(Y)), abs=1e-9)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_norm_matches_spectral_norm_of_kronecker(m, seed):
    C = _sym(np.random.default_rng(seed), m)
    assert commutator_op_norm(C) == pytest.approx(np.linalg.norm(A_explicit(C), 2), rel=1e-9, abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_assemble_matches_kronecker_product(m, seed):
    C = _sym(np.random.default_rng(seed), m)
    np.testing.assert_allclose(assemble_AnB(C), A_explicit(C) @ B_explicit(m), atol=1e-12)


def test_b_map_enumeration_m3():
    g = b_map([1.0, 2.0, 3.0])
    # pairs ordered (0,1), (0,2), (1,2)
    np.testing.assert_array_equal(g.W, [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    np.testing.assert_array_equal(vec(g.W), B_explicit(3) @ [1.0, 2.0, 3.0])


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_b_map_matches_loop_oracle(m, seed):
    y = np.random.default_rng(seed).random(m * (m - 1) // 2)
    np.testing.assert_array_equal(b_map(y).W, adjacency_from_pairs(y, m))
    np.testing.assert_array_equal(b_map_inverse(b_map(y)).y, y)


def test_b_map_errors():
    with pytest.raises(ShapeError):
        b_map([1.0, 2.0])
    with pytest.raises(ValidationError):
        b_map([1.0, -2.0, 0.0])
    with pytest.raises(ShapeError):
        UpperTriangleVector(np.zeros(4), 3)


def test_anb_m2_closed_form():
    h11, h12, h22 = 2.0, 0.7, 0.5
    K = assemble_AnB(np.array([[h11, h12], [h12, h22]]))
    np.testing.assert_allclose(K[:, 0], [0.0, h22 - h11, h11 - h22, 0.0])


def test_edge_gradient_is_adjoint_of_b():
    rng = np.random.default_rng(0)
    G = rng.standard_normal((5, 5))
    np.testing.assert_allclose(edge_gradient(G), B_explicit(5).T @ vec(G))


def test_commutator_validation():
    with pytest.raises(ValidationError):
        CommutatorOp([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ShapeError):
        CommutatorOp(np.ones((2, 3)))
    with pytest.raises(ParameterError):
        assemble_AnB(np.eye(5), max_nodes=4)


def test_identity_shift_leaves_operator_unchanged():
    C = _sym(np.random.default_rng(3), 5)
    S = np.random.default_rng(4).standard_normal((5, 5))
    np.testing.assert_allclose(CommutatorOp(C + 3 * np.eye(5)).apply(S), CommutatorOp(C).apply(S), atol=1e-12)
