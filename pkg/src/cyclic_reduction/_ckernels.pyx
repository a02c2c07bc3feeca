# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense block kernels.

Complex matrices are handled as interleaved (re, im) doubles, row-major.
All arithmetic is spelled out on real parts so the evaluation order is
fixed; build with ``-ffp-contract=off`` to keep it that way.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

from .errors import Indefinite

cnp.import_array()

ctypedef Py_ssize_t idx


cdef inline double* _ptr(cnp.ndarray arr) noexcept:
    return <double*> cnp.PyArray_DATA(arr)


cdef int _chol(const double* a, double* l, idx m) noexcept nogil:
    """Lower Cholesky factor of ``a`` into ``l``; return failing pivot or -1."""
    cdef idx i, j, p
    cdef double d, piv, sr, si, xr, xi, yr, yi
    memset(l, 0, 2 * m * m * sizeof(double))
    for j in range(m):
        d = a[2 * (j * m + j)]
        for p in range(j):
            xr = l[2 * (j * m + p)]
            xi = l[2 * (j * m + p) + 1]
            d -= xr * xr + xi * xi
        if not (d > 0.0) or not isfinite(d):
            return <int> j
        piv = sqrt(d)
        l[2 * (j * m + j)] = piv
        for i in range(j + 1, m):
            sr = a[2 * (i * m + j)]
            si = a[2 * (i * m + j) + 1]
            for p in range(j):
                # L[i,p] * conj(L[j,p])
                xr = l[2 * (i * m + p)]
                xi = l[2 * (i * m + p) + 1]
                yr = l[2 * (j * m + p)]
                yi = l[2 * (j * m + p) + 1]
                sr -= xr * yr + xi * yi
                si -= xi * yr - xr * yi
            l[2 * (i * m + j)] = sr / piv
            l[2 * (i * m + j) + 1] = si / piv
    return -1


cdef void _forward(const double* l, double* x, idx m, idx p) noexcept nogil:
    """In place ``x <- L^{-1} x`` for ``x`` of shape (m, p)."""
    cdef idx i, c, q
    cdef double sr, si, lr, li, xr, xi, piv
    for i in range(m):
        piv = l[2 * (i * m + i)]
        for c in range(p):
            sr = x[2 * (i * p + c)]
            si = x[2 * (i * p + c) + 1]
            for q in range(i):
                lr = l[2 * (i * m + q)]
                li = l[2 * (i * m + q) + 1]
                xr = x[2 * (q * p + c)]
                xi = x[2 * (q * p + c) + 1]
                sr -= lr * xr - li * xi
                si -= lr * xi + li * xr
            x[2 * (i * p + c)] = sr / piv
            x[2 * (i * p + c) + 1] = si / piv


cdef void _backward_h(const double* l, double* x, idx m, idx p) noexcept nogil:
    """In place ``x <- L^{-H} x``."""
    cdef idx i, c, q
    cdef double sr, si, lr, li, xr, xi, piv
    for i in range(m - 1, -1, -1):
        piv = l[2 * (i * m + i)]
        for c in range(p):
            sr = x[2 * (i * p + c)]
            si = x[2 * (i * p + c) + 1]
            for q in range(i + 1, m):
                # conj(L[q,i]) * x[q,c]
                lr = l[2 * (q * m + i)]
                li = l[2 * (q * m + i) + 1]
                xr = x[2 * (q * p + c)]
                xi = x[2 * (q * p + c) + 1]
                sr -= lr * xr + li * xi
                si -= lr * xi - li * xr
            x[2 * (i * p + c)] = sr / piv
            x[2 * (i * p + c) + 1] = si / piv


cdef void _gram_lower(const double* g, double* z, idx m, idx p, double sign) noexcept nogil:
    """``z[i, j] += sign * (g^H g)[i, j]`` for the lower triangle of the p x p ``z``."""
    cdef idx i, j, q
    cdef double sr, si, ar, ai, br, bi
    for i in range(p):
        for j in range(i):
            sr = 0.0
            si = 0.0
            for q in range(m):
                # conj(g[q,i]) * g[q,j]
                ar = g[2 * (q * p + i)]
                ai = g[2 * (q * p + i) + 1]
                br = g[2 * (q * p + j)]
                bi = g[2 * (q * p + j) + 1]
                sr += ar * br + ai * bi
                si += ar * bi - ai * br
            z[2 * (i * p + j)] += sign * sr
            z[2 * (i * p + j) + 1] += sign * si
        sr = 0.0
        for q in range(m):
            ar = g[2 * (q * p + i)]
            ai = g[2 * (q * p + i) + 1]
            sr += ar * ar + ai * ai
        z[2 * (i * p + i)] += sign * sr


cdef void _mirror(double* z, idx p) noexcept nogil:
    cdef idx i, j
    for i in range(p):
        z[2 * (i * p + i) + 1] = 0.0
        for j in range(i):
            z[2 * (j * p + i)] = z[2 * (i * p + j)]
            z[2 * (j * p + i) + 1] = -z[2 * (i * p + j) + 1]


cdef void _conj_transpose(const double* src, double* dst, idx r, idx c) noexcept nogil:
    """``dst`` (c x r) <- ``src``^H with ``src`` of shape (r, c)."""
    cdef idx i, j
    for i in range(r):
        for j in range(c):
            dst[2 * (j * r + i)] = src[2 * (i * c + j)]
            dst[2 * (j * r + i) + 1] = -src[2 * (i * c + j) + 1]


cdef void _gemm_sub(const double* a, bint a_h, const double* b, double* c,
                    idx r, idx inner, idx cols) noexcept nogil:
    """``c -= op(a) @ b`` with op = identity or conjugate transpose; a is square when a_h."""
    cdef idx i, j, q
    cdef double sr, si, ar, ai, br, bi
    for i in range(r):
        for j in range(cols):
            sr = 0.0
            si = 0.0
            for q in range(inner):
                if a_h:
                    ar = a[2 * (q * r + i)]
                    ai = -a[2 * (q * r + i) + 1]
                else:
                    ar = a[2 * (i * inner + q)]
                    ai = a[2 * (i * inner + q) + 1]
                br = b[2 * (q * cols + j)]
                bi = b[2 * (q * cols + j) + 1]
                sr += ar * br - ai * bi
                si += ar * bi + ai * br
            c[2 * (i * cols + j)] -= sr
            c[2 * (i * cols + j) + 1] -= si


cdef inline void _solve_h(const double* l, double* x, idx m, idx p) noexcept nogil:
    _forward(l, x, m, p)
    _backward_h(l, x, m, p)


# -- single-block entry points ------------------------------------------------

def cholesky(cnp.ndarray M):
    cdef idx m = M.shape[0]
    cdef cnp.ndarray L = np.empty((m, m), dtype=np.complex128)
    cdef double* a = _ptr(M)
    cdef double* l = _ptr(L)
    cdef int piv
    with nogil:
        piv = _chol(a, l, m)
    if piv >= 0:
        raise Indefinite(piv)
    return L


def solve_lower(cnp.ndarray L, cnp.ndarray G):
    cdef cnp.ndarray X = G.copy()
    cdef idx m = X.shape[0], p = X.shape[1]
    cdef double* l = _ptr(L)
    cdef double* x = _ptr(X)
    with nogil:
        _forward(l, x, m, p)
    return X


def solve_hermitian(cnp.ndarray L, cnp.ndarray G):
    cdef cnp.ndarray X = G.copy()
    cdef idx m = X.shape[0], p = X.shape[1]
    cdef double* l = _ptr(L)
    cdef double* x = _ptr(X)
    with nogil:
        _solve_h(l, x, m, p)
    return X


def stable_schur_term(cnp.ndarray L, cnp.ndarray G):
    cdef idx m = G.shape[0], p = G.shape[1]
    cdef cnp.ndarray X = G.copy()
    cdef cnp.ndarray Z = np.zeros((p, p), dtype=np.complex128)
    cdef double* l = _ptr(L)
    cdef double* x = _ptr(X)
    cdef double* z = _ptr(Z)
    with nogil:
        _forward(l, x, m, p)
        _gram_lower(x, z, m, p, 1.0)
        _mirror(z, p)
    return Z


def matmul_acc(double complex alpha, cnp.ndarray A, bint a_h, cnp.ndarray B, bint b_h, cnp.ndarray C):
    """``alpha * op(A) @ op(B) + C``; inputs must be C-contiguous complex128."""
    cdef idx r = C.shape[0], cols = C.shape[1]
    cdef idx inner = A.shape[0] if a_h else A.shape[1]
    cdef idx ra = A.shape[1], rb = B.shape[1]
    cdef cnp.ndarray out = C.copy()
    cdef double* a = _ptr(A)
    cdef double* b = _ptr(B)
    cdef double* c = _ptr(out)
    cdef double al = alpha.real, ai_ = alpha.imag
    cdef idx i, j, q
    cdef double sr, si, xr, xi, yr, yi
    with nogil:
        for i in range(r):
            for j in range(cols):
                sr = 0.0
                si = 0.0
                for q in range(inner):
                    if a_h:
                        xr = a[2 * (q * ra + i)]
                        xi = -a[2 * (q * ra + i) + 1]
                    else:
                        xr = a[2 * (i * ra + q)]
                        xi = a[2 * (i * ra + q) + 1]
                    if b_h:
                        yr = b[2 * (j * rb + q)]
                        yi = -b[2 * (j * rb + q) + 1]
                    else:
                        yr = b[2 * (q * rb + j)]
                        yi = b[2 * (q * rb + j) + 1]
                    sr += xr * yr - xi * yi
                    si += xr * yi + xi * yr
                c[2 * (i * cols + j)] += al * sr - ai_ * si
                c[2 * (i * cols + j) + 1] += al * si + ai_ * sr
    return out


# -- level kernels -------------------------------------------------------------

def factor_range(cnp.ndarray A, cnp.ndarray L, idx start, idx stop):
    """Factor diagonal blocks ``start <= i < stop`` into ``L``.

    Returns ``(block, pivot)`` for the first failure in the range, else None.
    """
    cdef idx m = A.shape[1]
    cdef idx sz = 2 * m * m
    cdef double* a = _ptr(A)
    cdef double* l = _ptr(L)
    cdef idx i
    cdef int piv = -1
    with nogil:
        for i in range(start, stop):
            piv = _chol(a + i * sz, l + i * sz, m)
            if piv >= 0:
                break
    if piv >= 0:
        return int(i), int(piv)
    return None


def split_range(cnp.ndarray L, cnp.ndarray A, cnp.ndarray B, cnp.ndarray Y,
                cnp.ndarray U, cnp.ndarray E, cnp.ndarray u,
                cnp.ndarray V, cnp.ndarray F, cnp.ndarray v,
                idx start, idx stop):
    """Odd/even reduced blocks for indices ``start <= j < stop`` (0-based)."""
    cdef idx n = A.shape[0], m = A.shape[1], k = Y.shape[2]
    cdef idx n_odd = (n + 1) // 2, n_even = n // 2
    cdef idx mm = 2 * m * m, mk = 2 * m * k
    cdef double* l = _ptr(L)
    cdef double* a = _ptr(A)
    cdef double* b = _ptr(B)
    cdef double* y = _ptr(Y)
    cdef double* pu = _ptr(U)
    cdef double* pe = _ptr(E)
    cdef double* pu_rhs = _ptr(u)
    cdef double* pv = _ptr(V)
    cdef double* pf = _ptr(F)
    cdef double* pv_rhs = _ptr(v)
    cdef double* g = <double*> malloc((mm + mk + 2) * sizeof(double))
    cdef double* w = g + mm
    cdef idx j, c, left, right
    if g == NULL:
        raise MemoryError()
    with nogil:
        for j in range(start, stop):
            if j < n_odd:
                c = 2 * j
                left = c - 1
                right = c + 1
                # U_j = A_c - B_left A_left^-1 B_left^H - B_c^H A_right^-1 B_c
                memcpy(pu + j * mm, a + c * mm, mm * sizeof(double))
                if left >= 0:
                    _conj_transpose(b + left * mm, g, m, m)
                    _forward(l + left * mm, g, m, m)
                    _gram_lower(g, pu + j * mm, m, m, -1.0)
                if right < n:
                    memcpy(g, b + c * mm, mm * sizeof(double))
                    _forward(l + right * mm, g, m, m)
                    _gram_lower(g, pu + j * mm, m, m, -1.0)
                _mirror(pu + j * mm, m)
                # E_j = -B_{right} A_right^-1 B_c
                if j < n_odd - 1:
                    memcpy(g, b + c * mm, mm * sizeof(double))
                    _solve_h(l + right * mm, g, m, m)
                    memset(pe + j * mm, 0, mm * sizeof(double))
                    _gemm_sub(b + right * mm, 0, g, pe + j * mm, m, m, m)
                # u_j = y_c - B_left A_left^-1 y_left - B_c^H A_right^-1 y_right
                memcpy(pu_rhs + j * mk, y + c * mk, mk * sizeof(double))
                if k > 0:
                    if left >= 0:
                        memcpy(w, y + left * mk, mk * sizeof(double))
                        _solve_h(l + left * mm, w, m, k)
                        _gemm_sub(b + left * mm, 0, w, pu_rhs + j * mk, m, m, k)
                    if right < n:
                        memcpy(w, y + right * mk, mk * sizeof(double))
                        _solve_h(l + right * mm, w, m, k)
                        _gemm_sub(b + c * mm, 1, w, pu_rhs + j * mk, m, m, k)
            if j < n_even:
                c = 2 * j + 1
                left = c - 1
                right = c + 1
                # V_j = A_c - B_left A_left^-1 B_left^H - B_c^H A_right^-1 B_c
                memcpy(pv + j * mm, a + c * mm, mm * sizeof(double))
                _conj_transpose(b + left * mm, g, m, m)
                _forward(l + left * mm, g, m, m)
                _gram_lower(g, pv + j * mm, m, m, -1.0)
                if right < n:
                    memcpy(g, b + c * mm, mm * sizeof(double))
                    _forward(l + right * mm, g, m, m)
                    _gram_lower(g, pv + j * mm, m, m, -1.0)
                _mirror(pv + j * mm, m)
                # F_j = -B_right A_right^-1 B_c
                if j < n_even - 1:
                    memcpy(g, b + c * mm, mm * sizeof(double))
                    _solve_h(l + right * mm, g, m, m)
                    memset(pf + j * mm, 0, mm * sizeof(double))
                    _gemm_sub(b + right * mm, 0, g, pf + j * mm, m, m, m)
                memcpy(pv_rhs + j * mk, y + c * mk, mk * sizeof(double))
                if k > 0:
                    memcpy(w, y + left * mk, mk * sizeof(double))
                    _solve_h(l + left * mm, w, m, k)
                    _gemm_sub(b + left * mm, 0, w, pv_rhs + j * mk, m, m, k)
                    if right < n:
                        memcpy(w, y + right * mk, mk * sizeof(double))
                        _solve_h(l + right * mm, w, m, k)
                        _gemm_sub(b + c * mm, 1, w, pv_rhs + j * mk, m, m, k)
    free(g)
