"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Same entry points and semantics.  The level kernels vectorize over the
block axis and loop over the (small) block dimension, so every block's
arithmetic is independent of how a level is chunked.
"""

from __future__ import annotations

import numpy as np

from .blockmat import mirror_lower
from .errors import Indefinite


def _ch(X):
    return np.conj(np.swapaxes(X, -1, -2))


def _chol_batch(A):
    """Batched lower Cholesky; returns ``(L, pivots)`` with pivot -1 on success."""
    b, m = A.shape[0], A.shape[1]
    L = np.zeros_like(A)
    pivots = np.full(b, -1, dtype=np.int64)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        for c in range(m):
            row = L[:, c, :c]
            d = A[:, c, c].real - np.sum(row.real * row.real + row.imag * row.imag, axis=1)
            bad = ~(np.isfinite(d) & (d > 0.0)) & (pivots < 0)
            pivots[bad] = c
            piv = np.sqrt(np.where(pivots < 0, d, 1.0))
            L[:, c, c] = piv
            if c + 1 < m:
                acc = A[:, c + 1:, c] - (L[:, c + 1:, :c] @ np.conj(row)[:, :, None])[:, :, 0]
                L[:, c + 1:, c] = acc / piv[:, None]
    return L, pivots


def _forward_batch(L, G):
    X = np.array(G, dtype=np.complex128, copy=True)
    m = L.shape[-1]
    for i in range(m):
        X[:, i, :] = (X[:, i, :] - (L[:, i:i + 1, :i] @ X[:, :i, :])[:, 0, :]) / L[:, i, i].real[:, None]
    return X


def _backward_h_batch(L, X):
    X = np.array(X, copy=True)
    m = L.shape[-1]
    for i in range(m - 1, -1, -1):
        lh = np.conj(L[:, i + 1:, i])[:, None, :]
        X[:, i, :] = (X[:, i, :] - (lh @ X[:, i + 1:, :])[:, 0, :]) / L[:, i, i].real[:, None]
    return X


def _solve_h_batch(L, G):
    return _backward_h_batch(L, _forward_batch(L, G))


def _gram_batch(L, G):
    Gt = _forward_batch(L, G)
    return mirror_lower(_ch(Gt) @ Gt)


def cholesky(M):
    L, piv = _chol_batch(M[None])
    if piv[0] >= 0:
        raise Indefinite(int(piv[0]))
    return L[0]


def solve_lower(L, G):
    return _forward_batch(L[None], G[None])[0]


def solve_hermitian(L, G):
    return _solve_h_batch(L[None], G[None])[0]


def stable_schur_term(L, G):
    return _gram_batch(L[None], G[None])[0]


def matmul_acc(alpha, A, a_h, B, b_h, C):
    opa = A.conj().T if a_h else A
    opb = B.conj().T if b_h else B
    return C + alpha * (opa @ opb)


def factor_range(A, L, start, stop):
    if stop <= start:
        return None
    Lr, piv = _chol_batch(A[start:stop])
    L[start:stop] = Lr
    bad = np.flatnonzero(piv >= 0)
    if bad.size:
        return start + int(bad[0]), int(piv[bad[0]])
    return None


def split_range(L, A, B, Y, U, E, u, V, F, v, start, stop):
    n, k = A.shape[0], Y.shape[2]
    n_odd, n_even = (n + 1) // 2, n // 2

    j = np.arange(start, min(stop, n_odd))
    if j.size:
        c = 2 * j
        Uj = A[c].copy()
        has_left = j >= 1
        has_right = c + 1 < n
        lo, ro = c[has_left] - 1, c[has_right]
        if lo.size:
            Uj[has_left] -= _gram_batch(L[lo], _ch(B[lo]))
        if ro.size:
            Uj[has_right] -= _gram_batch(L[ro + 1], B[ro])
        U[j] = mirror_lower(Uj)

        je = j[j < n_odd - 1]
        if je.size:
            ce = 2 * je
            W = _solve_h_batch(L[ce + 1], B[ce])
            E[je] = np.zeros_like(W) - B[ce + 1] @ W

        uj = Y[c].copy()
        if k > 0:
            if lo.size:
                uj[has_left] -= B[lo] @ _solve_h_batch(L[lo], Y[lo])
            if ro.size:
                uj[has_right] -= _ch(B[ro]) @ _solve_h_batch(L[ro + 1], Y[ro + 1])
        u[j] = uj

    j = np.arange(start, min(stop, n_even))
    if j.size:
        c = 2 * j + 1
        Vj = A[c].copy()
        Vj -= _gram_batch(L[c - 1], _ch(B[c - 1]))
        has_right = c + 1 < n
        ro = c[has_right]
        if ro.size:
            Vj[has_right] -= _gram_batch(L[ro + 1], B[ro])
        V[j] = mirror_lower(Vj)

        jf = j[j < n_even - 1]
        if jf.size:
            cf = 2 * jf + 1
            W = _solve_h_batch(L[cf + 1], B[cf])
            F[jf] = np.zeros_like(W) - B[cf + 1] @ W

        vj = Y[c].copy()
        if k > 0:
            vj -= B[c - 1] @ _solve_h_batch(L[c - 1], Y[c - 1])
            if ro.size:
                vj[has_right] -= _ch(B[ro]) @ _solve_h_batch(L[ro + 1], Y[ro + 1])
        v[j] = vj
