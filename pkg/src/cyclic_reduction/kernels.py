"""Dense m x m kernels: Cholesky, triangular solves, the Schur term, and GEMM.

Two interchangeable backends provide the arithmetic: the compiled
``_ckernels`` extension and the numpy fallback ``_pykernels``.  The compiled
one is used when it imports; set ``CYCLIC_REDUCTION_BACKEND=python`` to force
the fallback, or call :func:`set_backend` at runtime.

Cholesky factors are plain lower-triangular ``complex128`` arrays with a
real, strictly positive diagonal.
"""

from __future__ import annotations

import os
from types import ModuleType
from typing import Literal

import numpy as np

from . import _pykernels
from .blockmat import as_block
from .errors import ShapeMismatch

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

Op = Literal["plain", "conj_transpose"]

_BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends() -> list[str]:
    return list(_BACKENDS)


def _default_backend() -> str:
    wanted = os.environ.get("CYCLIC_REDUCTION_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            raise ImportError(f"kernel backend {wanted!r} is not available; have {available_backends()}")
        return wanted
    return "cython" if "cython" in _BACKENDS else "python"


_active = _default_backend()


def get_backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    prev, _active = _active, name
    return prev


def impl() -> ModuleType:
    """Module implementing the active backend (level kernels live there)."""
    return _BACKENDS[_active]


def _square(M, name):
    M = as_block(M, name=name)
    if M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ShapeMismatch(f"{name}: expected a nonempty square block, got {M.shape}")
    return M


def _rhs_for(L, G):
    G = as_block(G, name="G")
    if G.shape[0] != L.shape[0]:
        raise ShapeMismatch(f"G has {G.shape[0]} rows, factor is {L.shape[0]}x{L.shape[0]}")
    return G


def cholesky(M) -> np.ndarray:
    """Lower factor ``L`` with ``L L^H = M``.

    Only the lower triangle of ``M`` is read.  Raises
    :class:`~cyclic_reduction.errors.Indefinite` at the first pivot that is
    ``<= 0`` or not finite; there is no tolerance.
    """
    return impl().cholesky(_square(M, "M"))


def solve_lower(L, G) -> np.ndarray:
    """Forward substitution: ``L \\ G``."""
    L = _square(L, "L")
    return impl().solve_lower(L, _rhs_for(L, G))


def solve_hermitian(L, G) -> np.ndarray:
    """``M^{-1} G`` for ``M = L L^H`` (forward then backward substitution)."""
    L = _square(L, "L")
    return impl().solve_hermitian(L, _rhs_for(L, G))


def stable_schur_term(L, G) -> np.ndarray:
    """``G^H M^{-1} G`` evaluated as ``Gt^H Gt`` with ``Gt = L \\ G``.

    Only the lower triangle is computed; the upper one is its conjugate
    mirror, so the result is exactly Hermitian with a real, nonnegative
    diagonal.
    """
    L = _square(L, "L")
    return impl().stable_schur_term(L, _rhs_for(L, G))


def matmul_acc(alpha, A, op_a: Op, B, op_b: Op, C) -> np.ndarray:
    """Return ``alpha * op_a(A) @ op_b(B) + C``."""
    for op in (op_a, op_b):
        if op not in ("plain", "conj_transpose"):
            raise ValueError(f"unknown op {op!r}")
    A = as_block(A, name="A")
    B = as_block(B, name="B")
    C = as_block(C, name="C")
    a_h = op_a == "conj_transpose"
    b_h = op_b == "conj_transpose"
    ar, ac = (A.shape[1], A.shape[0]) if a_h else A.shape
    br, bc = (B.shape[1], B.shape[0]) if b_h else B.shape
    if ac != br or C.shape != (ar, bc):
        raise ShapeMismatch(f"cannot form op(A){(ar, ac)} @ op(B){(br, bc)} + C{C.shape}")
    return impl().matmul_acc(complex(alpha), A, a_h, B, b_h, C)
