"""Dense brute-force reference used to verify the block solver.

Nothing here touches :mod:`cyclic_reduction.kernels` or the block
assembly in :mod:`cyclic_reduction.blockmat`: assembly and permutation are
written out element by element, and factorizations use LAPACK through
scipy.  Cost is O((N m)^3); keep N*m to a few hundred.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import lapack

from .blockmat import BlockTridiagonalSystem
from .errors import DenseFactorizationFailed, DenseIndefinite


class OddEvenPartition(NamedTuple):
    permuted: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    C: np.ndarray


class DenseSchur(NamedTuple):
    U: np.ndarray
    u: np.ndarray
    V: np.ndarray
    v: np.ndarray


def assemble_dense(system: BlockTridiagonalSystem) -> np.ndarray:
    n, m = system.n, system.m
    out = np.zeros((n * m, n * m), dtype=np.complex128)
    for j in range(n):
        for r in range(m):
            for c in range(m):
                out[j * m + r, j * m + c] = system.diag[j, r, c]
    for j in range(n - 1):
        for r in range(m):
            for c in range(m):
                # B_j sits below the diagonal, B_j^H above it
                out[(j + 1) * m + r, j * m + c] = system.sub[j, r, c]
                out[j * m + c, (j + 1) * m + r] = np.conj(system.sub[j, r, c])
    return out


def stack_rhs(system: BlockTridiagonalSystem) -> np.ndarray:
    return system.rhs.reshape(system.n * system.m, system.k)


def odd_even_order(n_blocks: int, m: int) -> np.ndarray:
    """Scalar row order for block order 1, 3, 5, ..., 2, 4, 6, ..."""
    blocks = list(range(0, n_blocks, 2)) + list(range(1, n_blocks, 2))
    return np.array([b * m + r for b in blocks for r in range(m)], dtype=np.intp)


def permute_odd_even(dense: np.ndarray, n_blocks: int, m: int) -> OddEvenPartition:
    """Return ``P A P^T`` and its quadrants ``[[D1, C^H], [C, D2]]``."""
    if dense.shape != (n_blocks * m, n_blocks * m):
        raise ValueError(f"expected a {n_blocks * m} square matrix, got {dense.shape}")
    order = odd_even_order(n_blocks, m)
    permuted = dense[np.ix_(order, order)]
    h = ((n_blocks + 1) // 2) * m
    return OddEvenPartition(permuted, permuted[:h, :h].copy(), permuted[h:, h:].copy(), permuted[h:, :h].copy())


def permutation_matrix(n_blocks: int, m: int) -> np.ndarray:
    order = odd_even_order(n_blocks, m)
    P = np.zeros((order.size, order.size))
    P[np.arange(order.size), order] = 1.0
    return P


def dense_cholesky(M: np.ndarray) -> np.ndarray:
    """LAPACK ``zpotrf``; raises :class:`DenseIndefinite` with the 0-based failing row."""
    if M.size == 0:
        return M.copy()
    c, info = lapack.zpotrf(np.asarray(M, dtype=np.complex128), lower=1, clean=1)
    if info > 0:
        raise DenseIndefinite(int(info) - 1)
    if info < 0:
        raise DenseFactorizationFailed(f"zpotrf argument {-info} invalid")
    return c


def dense_cholesky_solve(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    if c.size == 0 or b.size == 0:
        return np.zeros((c.shape[0], b.shape[1]), dtype=np.complex128)
    x, info = lapack.zpotrs(c, np.asarray(b, dtype=np.complex128), lower=1)
    if info != 0:
        raise DenseFactorizationFailed(f"zpotrs returned {info}")
    return x


def is_positive_definite(system: BlockTridiagonalSystem) -> bool:
    """Referee: does dense Cholesky of the assembled matrix succeed?"""
    try:
        dense_cholesky(assemble_dense(system))
    except DenseIndefinite:
        return False
    return True


def dense_schur(system: BlockTridiagonalSystem) -> DenseSchur:
    """Odd and even Schur complements with their right-hand sides.

    ``U = D1 - C^H D2^-1 C``, ``u = y_o - C^H D2^-1 y_e``,
    ``V = D2 - C D1^-1 C^H``, ``v = y_e - C D1^-1 y_o``.
    """
    n, m = system.n, system.m
    part = permute_odd_even(assemble_dense(system), n, m)
    y = stack_rhs(system)[odd_even_order(n, m)]
    h = part.D1.shape[0]
    y_o, y_e = y[:h], y[h:]
    Ch = part.C.conj().T
    try:
        c1 = dense_cholesky(part.D1)
        c2 = dense_cholesky(part.D2)
    except DenseIndefinite as exc:
        raise DenseFactorizationFailed(str(exc)) from exc
    U = part.D1 - Ch @ dense_cholesky_solve(c2, part.C)
    u = y_o - Ch @ dense_cholesky_solve(c2, y_e)
    V = part.D2 - part.C @ dense_cholesky_solve(c1, Ch)
    v = y_e - part.C @ dense_cholesky_solve(c1, y_o)
    return DenseSchur(U, u, V, v)


def dense_solve(system: BlockTridiagonalSystem) -> np.ndarray:
    """Reference solution as an ``(n, m, k)`` block vector."""
    c = dense_cholesky(assemble_dense(system))
    x = dense_cholesky_solve(c, stack_rhs(system))
    return x.reshape(system.n, system.m, system.k)


def extract_system(dense: np.ndarray, rhs: np.ndarray, n_blocks: int, m: int) -> BlockTridiagonalSystem:
    """Inverse of :func:`assemble_dense` for a block-tridiagonal matrix."""
    diag = np.array([dense[j * m:(j + 1) * m, j * m:(j + 1) * m] for j in range(n_blocks)])
    sub = np.array([dense[(j + 1) * m:(j + 2) * m, j * m:(j + 1) * m] for j in range(n_blocks - 1)])
    return BlockTridiagonalSystem(diag, sub.reshape(n_blocks - 1, m, m), rhs.reshape(n_blocks, m, -1))


def max_relative_difference(x: np.ndarray, ref: np.ndarray) -> float:
    scale = float(np.max(np.abs(ref))) if np.size(ref) else 0.0
    diff = float(np.max(np.abs(np.asarray(x) - ref))) if np.size(ref) else 0.0
    return diff / scale if scale > 0 else diff
