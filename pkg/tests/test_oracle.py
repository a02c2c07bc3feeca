import numpy as np
import pytest

from cyclic_reduction import oracle
from cyclic_reduction.blockmat import new_system
from cyclic_reduction.errors import DenseIndefinite

from .conftest import make, scalar_system


def test_assemble_single_block():
    s = make(1, 3, 1)
    assert np.array_equal(oracle.assemble_dense(s), s.diag[0])


def test_assemble_two_scalars():
    dense = oracle.assemble_dense(scalar_system([2, 2], [1], [3, 3]))
    assert np.array_equal(dense, [[2, 1], [1, 2]])


def test_assemble_band_and_hermitian():
    s = make(6, 2, 1, seed=1)
    dense = oracle.assemble_dense(s)
    assert np.array_equal(dense, dense.conj().T)
    assert np.array_equal(dense, s.to_dense())
    blocks = dense.reshape(6, 2, 6, 2)
    for i in range(6):
        for j in range(6):
            if abs(i - j) > 1:
                assert not blocks[i, :, j, :].any()


def test_permutation_orders():
    assert list(oracle.odd_even_order(4, 1)) == [0, 2, 1, 3]
    assert list(oracle.odd_even_order(5, 2)) == [0, 1, 4, 5, 8, 9, 2, 3, 6, 7]


@pytest.mark.parametrize("n,m", [(4, 1), (5, 2), (8, 3)])
def test_permutation_matrix_orthogonal(n, m):
    P = oracle.permutation_matrix(n, m)
    assert np.array_equal(P @ P.T, np.eye(n * m))
    dense = oracle.assemble_dense(make(n, m, 1, seed=n))
    part = oracle.permute_odd_even(dense, n, m)
    assert np.array_equal(part.permuted, P @ dense @ P.T)


def test_partition_structure():
    s = make(4, 1, 1, seed=3)
    part = oracle.permute_odd_even(oracle.assemble_dense(s), 4, 1)
    A, B = s.diag[:, 0, 0], s.sub[:, 0, 0]
    assert np.array_equal(part.D1, np.diag(A[[0, 2]]))
    assert np.array_equal(part.D2, np.diag(A[[1, 3]]))
    # rows are even blocks (2, 4), columns odd blocks (1, 3)
    C = np.array([[B[0], np.conj(B[1])], [0, B[2]]])
    assert np.array_equal(part.C, C)


def test_partition_two_blocks():
    s = make(2, 2, 1, seed=4)
    part = oracle.permute_odd_even(oracle.assemble_dense(s), 2, 2)
    assert np.array_equal(part.D1, s.diag[0]) and np.array_equal(part.D2, s.diag[1])
    assert np.array_equal(part.C, s.sub[0])


def test_dense_schur_hand_example():
    ref = oracle.dense_schur(scalar_system([2, 2], [1], [3, 3]))
    for value in ref:
        np.testing.assert_allclose(value, [[1.5]], rtol=1e-15)


def test_dense_schur_decoupled():
    s = make(5, 2, 1, seed=5)
    d = new_system(list(s.diag), [np.zeros((2, 2))] * 4, list(s.rhs))
    ref = oracle.dense_schur(d)
    odd = oracle.assemble_dense(new_system(list(s.diag[0::2]), [np.zeros((2, 2))] * 2, list(s.rhs[0::2])))
    assert np.array_equal(ref.U, odd)


def test_dense_solve_examples():
    s = make(3, 2, 2, seed=6)
    ident = new_system([np.eye(2)] * 3, [np.zeros((2, 2))] * 2, list(s.rhs))
    np.testing.assert_array_equal(oracle.dense_solve(ident), s.rhs)
    np.testing.assert_allclose(oracle.dense_solve(scalar_system([2, 2], [1], [3, 3])).ravel(), [1, 1], rtol=1e-15)


def test_dense_cholesky_indefinite():
    with pytest.raises(DenseIndefinite) as info:
        oracle.dense_cholesky(np.array([[4.0, 0], [0, -1.0]]))
    assert info.value.pivot_row == 1
    assert not oracle.is_positive_definite(scalar_system([1, 1], [2], [0, 0]))


def test_extract_round_trip():
    s = make(5, 3, 2, seed=7)
    back = oracle.extract_system(oracle.assemble_dense(s), s.rhs, 5, 3)
    for a, b in ((s.diag, back.diag), (s.sub, back.sub), (s.rhs, back.rhs)):
        assert np.array_equal(a, b)
