import numpy as np
import pytest

from cyclic_reduction import kernels
from cyclic_reduction.blockmat import is_exactly_hermitian
from cyclic_reduction.errors import Indefinite, ShapeMismatch

from .conftest import crandn, random_hpd

EPS = np.finfo(float).eps


def naive_matmul(A, B):
    r, inner = A.shape
    c = B.shape[1]
    out = np.zeros((r, c), dtype=complex)
    for i in range(r):
        for j in range(c):
            s = 0j
            for q in range(inner):
                s += A[i, q] * B[q, j]
            out[i, j] = s
    return out


def relmax(a, b, scale):
    return np.max(np.abs(a - b)) / scale


# -- cholesky ------------------------------------------------------------------

@pytest.mark.parametrize("m", [1, 3, 7])
def test_cholesky_identity(backend, m):
    assert np.array_equal(kernels.cholesky(np.eye(m)), np.eye(m))


def test_cholesky_diagonal(backend):
    np.testing.assert_array_equal(kernels.cholesky([[4.0, 0], [0, 9.0]]), [[2, 0], [0, 3]])


def test_cholesky_negative_scalar(backend):
    with pytest.raises(Indefinite) as info:
        kernels.cholesky([[-1.0]])
    assert info.value.pivot_index == 0


def test_cholesky_reports_first_bad_pivot(backend):
    # leading 2x2 minor is PD, the 3x3 is not
    M = np.array([[4.0, 2, 0], [2, 2, 3], [0, 3, 1]])
    with pytest.raises(Indefinite) as info:
        kernels.cholesky(M)
    assert info.value.pivot_index == 2


def test_cholesky_zero_pivot_rejected(backend):
    with pytest.raises(Indefinite):
        kernels.cholesky([[1.0, 1.0], [1.0, 1.0]])


def test_cholesky_nonfinite_rejected(backend):
    with pytest.raises(ValueError):
        kernels.cholesky([[np.inf]])


@pytest.mark.parametrize("m", [1, 2, 6, 16, 32])
def test_cholesky_reconstruction(backend, m):
    rng = np.random.default_rng(m)
    M = random_hpd(rng, m)
    L = kernels.cholesky(M)
    assert np.array_equal(L, np.tril(L))
    assert np.all(L.diagonal().imag == 0) and np.all(L.diagonal().real > 0)
    err = np.max(np.abs(L @ L.conj().T - M))
    assert err <= 10 * EPS * m * np.max(np.abs(M))
    assert err <= 1e-13 * np.max(np.abs(M))


@pytest.mark.parametrize("seed", range(10))
def test_cholesky_detects_negative_eigenvalue(backend, seed):
    rng = np.random.default_rng(seed)
    m = 1 + seed % 6
    Q, _ = np.linalg.qr(crandn(rng, m, m))
    ev = rng.uniform(1, 10, m)
    ev[rng.integers(m)] = -1e-6 * ev.max() - 1e-9
    M = (Q * ev) @ Q.conj().T
    M = (M + M.conj().T) / 2
    with pytest.raises(Indefinite):
        kernels.cholesky(M)


# -- substitutions ---------------------------------------------------------------

def test_solve_lower_identity(backend):
    G = crandn(np.random.default_rng(0), 3, 2)
    np.testing.assert_array_equal(kernels.solve_lower(np.eye(3), G), G)


def test_solve_lower_hand_example(backend):
    out = kernels.solve_lower([[2.0, 0], [1, 1]], [[2.0], [3.0]])
    np.testing.assert_array_equal(out, [[1], [2]])


def test_solve_lower_residual(backend):
    rng = np.random.default_rng(1)
    L = kernels.cholesky(random_hpd(rng, 6))
    G = crandn(rng, 6, 4)
    X = kernels.solve_lower(L, G)
    assert np.max(np.abs(L @ X - G)) <= 1e-13 * np.max(np.abs(G))


def test_solve_hermitian_examples(backend):
    G = crandn(np.random.default_rng(0), 2, 3)
    np.testing.assert_array_equal(kernels.solve_hermitian(kernels.cholesky(np.eye(2)), G), G)
    np.testing.assert_array_equal(kernels.solve_hermitian(kernels.cholesky([[4.0]]), [[8.0]]), [[2.0]])


@pytest.mark.parametrize("seed", range(5))
def test_solve_hermitian_residual(backend, seed):
    rng = np.random.default_rng(seed)
    M = random_hpd(rng, 7)
    G = crandn(rng, 7, 3)
    X = kernels.solve_hermitian(kernels.cholesky(M), G)
    assert np.max(np.abs(M @ X - G)) <= 1e-12 * np.max(np.abs(M)) * np.max(np.abs(X))


def test_solve_shape_mismatch(backend):
    with pytest.raises(ShapeMismatch):
        kernels.solve_hermitian(np.eye(3), np.ones((2, 1)))


# -- stable Schur term -------------------------------------------------------------

def test_schur_identity_factor(backend):
    G = crandn(np.random.default_rng(2), 4, 3)
    Z = kernels.stable_schur_term(np.eye(4), G)
    np.testing.assert_allclose(Z, G.conj().T @ G, rtol=1e-14, atol=1e-14)


def test_schur_scalar(backend):
    Z = kernels.stable_schur_term(kernels.cholesky([[4.0]]), [[2.0]])
    np.testing.assert_array_equal(Z, [[1.0]])


@pytest.mark.parametrize("seed", range(10))
def test_schur_matches_explicit_and_is_hermitian(backend, seed):
    rng = np.random.default_rng(seed)
    M = random_hpd(rng, 5)
    G = crandn(rng, 5, 3)
    L = kernels.cholesky(M)
    Z = kernels.stable_schur_term(L, G)
    explicit = G.conj().T @ kernels.solve_hermitian(L, G)
    independent = G.conj().T @ np.linalg.solve(M, G)
    assert relmax(Z, explicit, np.max(np.abs(explicit))) <= 1e-12
    assert relmax(Z, independent, np.max(np.abs(independent))) <= 1e-12
    assert is_exactly_hermitian(Z)
    assert np.all(Z.diagonal().real >= 0) and np.all(Z.diagonal().imag == 0)


# -- matmul_acc --------------------------------------------------------------------

def test_matmul_identity(backend):
    B = crandn(np.random.default_rng(3), 3, 2)
    np.testing.assert_array_equal(kernels.matmul_acc(1, np.eye(3), "plain", B, "plain", np.zeros((3, 2))), B)


def test_matmul_scalar(backend):
    out = kernels.matmul_acc(-1, [[2.0]], "plain", [[3.0]], "plain", [[10.0]])
    np.testing.assert_array_equal(out, [[4.0]])


@pytest.mark.parametrize("op_a", ["plain", "conj_transpose"])
@pytest.mark.parametrize("op_b", ["plain", "conj_transpose"])
def test_matmul_against_naive(backend, op_a, op_b):
    rng = np.random.default_rng(4)
    r, inner, c = 3, 5, 2
    A = crandn(rng, *((inner, r) if op_a == "conj_transpose" else (r, inner)))
    B = crandn(rng, *((c, inner) if op_b == "conj_transpose" else (inner, c)))
    C = crandn(rng, r, c)
    alpha = 0.5 - 2j
    opa = A.conj().T if op_a == "conj_transpose" else A
    opb = B.conj().T if op_b == "conj_transpose" else B
    ref = alpha * naive_matmul(opa, opb) + C
    out = kernels.matmul_acc(alpha, A, op_a, B, op_b, C)
    assert relmax(out, ref, np.max(np.abs(ref))) <= 1e-13


def test_matmul_shape_mismatch(backend):
    with pytest.raises(ShapeMismatch):
        kernels.matmul_acc(1, np.ones((2, 3)), "plain", np.ones((2, 3)), "plain", np.ones((2, 3)))
    with pytest.raises(ValueError):
        kernels.matmul_acc(1, np.ones((2, 2)), "transpose", np.ones((2, 2)), "plain", np.ones((2, 2)))


# -- backends ----------------------------------------------------------------------

def test_backends_agree():
    rng = np.random.default_rng(5)
    M = random_hpd(rng, 6)
    G = crandn(rng, 6, 2)
    prev = kernels.get_backend()
    results = []
    try:
        for name in kernels.available_backends():
            kernels.set_backend(name)
            L = kernels.cholesky(M)
            results.append((L, kernels.stable_schur_term(L, G)))
    finally:
        kernels.set_backend(prev)
    for L, Z in results[1:]:
        np.testing.assert_allclose(L, results[0][0], rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(Z, results[0][1], rtol=1e-13, atol=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
