"""Block-tridiagonal system containers.

Blocks are dense ``complex128`` numpy arrays.  A system stores its blocks
stacked along a leading axis:

* ``diag``: ``(n, m, m)``, the Hermitian diagonal blocks ``A_1 .. A_n``
* ``sub``:  ``(n - 1, m, m)``, the subdiagonal blocks ``B_1 .. B_{n-1}``
* ``rhs``:  ``(n, m, k)``, the right-hand sides ``y_1 .. y_n``

Block vectors (solutions, right-hand sides) are plain ``(n, m, k)`` arrays.
The superdiagonal is implicit: block ``(j, j+1)`` of the full matrix is
``B_j^H``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import NonFiniteEntry, NotHermitian, ShapeMismatch

ComplexArray = npt.NDArray[np.complex128]

HERMITIAN_GATE = 1e-12

__all__ = [
    "BlockTridiagonalSystem",
    "SplitSystems",
    "as_block",
    "deinterleave",
    "hermitize",
    "interleave",
    "is_exactly_hermitian",
    "new_system",
    "relative_residual",
]


def as_block(values, ndim: int = 2, name: str = "block") -> ComplexArray:
    """Return ``values`` as a C-contiguous complex128 array, rejecting NaN/Inf."""
    arr = np.ascontiguousarray(values, dtype=np.complex128)
    if arr.ndim != ndim:
        raise ShapeMismatch(f"{name}: expected {ndim} dimensions, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteEntry(f"{name}: contains NaN or Inf")
    return arr


def mirror_lower(M: ComplexArray) -> ComplexArray:
    """Overwrite the strict upper triangle(s) with the conjugated lower one.

    Works on a single square matrix or on a stack ``(..., m, m)``.  The
    diagonal imaginary part is set to exactly zero.
    """
    m = M.shape[-1]
    iu, ju = np.triu_indices(m, 1)
    M[..., iu, ju] = np.conj(M[..., ju, iu])
    d = np.arange(m)
    M[..., d, d] = M[..., d, d].real
    return M


def is_exactly_hermitian(M: ComplexArray) -> bool:
    """Bit-level conjugate symmetry test (also accepts a stack of blocks)."""
    M = np.asarray(M)
    if M.shape[-1] != M.shape[-2]:
        return False
    return bool(np.array_equal(M, np.conj(np.swapaxes(M, -1, -2))))


def hermitize(raw, gate: float = HERMITIAN_GATE) -> ComplexArray:
    """Symmetrize a nearly-Hermitian square block as ``(raw + raw^H) / 2``.

    Raises :class:`NotHermitian` if ``max|raw - raw^H|`` exceeds
    ``gate * (1 + max|raw|)``.  The result is exactly Hermitian: the lower
    triangle is averaged and mirrored with conjugation.
    """
    raw = as_block(raw, name="hermitian block")
    if raw.shape[0] != raw.shape[1]:
        raise ShapeMismatch(f"hermitian block must be square, got {raw.shape}")
    if raw.size == 0:
        return raw.copy()
    asym = float(np.max(np.abs(raw - raw.conj().T)))
    tol = gate * (1.0 + float(np.max(np.abs(raw))))
    if asym > tol:
        raise NotHermitian(asym, tol)
    out = (raw + raw.conj().T) / 2
    return mirror_lower(out)


class SplitSystems(NamedTuple):
    odd: "BlockTridiagonalSystem"
    even: "BlockTridiagonalSystem"


@dataclass(frozen=True, eq=False)
class BlockTridiagonalSystem:
    """Hermitian block-tridiagonal system ``A x = y``.

    Use :func:`new_system` to build one from untrusted data; the plain
    constructor only checks shapes.  Arrays are frozen (``writeable=False``)
    so instances can be shared between threads.
    """

    diag: ComplexArray
    sub: ComplexArray
    rhs: ComplexArray

    def __post_init__(self):
        for name in ("diag", "sub", "rhs"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.complex128)
            object.__setattr__(self, name, arr)
        _check_shapes(self.diag, self.sub, self.rhs)
        for arr in (self.diag, self.sub, self.rhs):
            arr.flags.writeable = False

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def m(self) -> int:
        return self.diag.shape[1]

    @property
    def k(self) -> int:
        return self.rhs.shape[2]

    def with_rhs(self, rhs) -> BlockTridiagonalSystem:
        return BlockTridiagonalSystem(self.diag, self.sub, as_block(rhs, 3, "rhs"))

    def to_dense(self) -> ComplexArray:
        """Assemble the full ``(n*m, n*m)`` matrix."""
        n, m = self.n, self.m
        dense = np.zeros((n * m, n * m), dtype=np.complex128)
        for j in range(n):
            dense[j * m:(j + 1) * m, j * m:(j + 1) * m] = self.diag[j]
        for j in range(n - 1):
            r, c = (j + 1) * m, j * m
            dense[r:r + m, c:c + m] = self.sub[j]
            dense[c:c + m, r:r + m] = self.sub[j].conj().T
        return dense

    def matvec(self, x) -> ComplexArray:
        """Banded product ``A x`` for a block vector ``x`` of shape ``(n, m, p)``."""
        x = np.asarray(x, dtype=np.complex128)
        out = self.diag @ x
        if self.n > 1:
            out[1:] += self.sub @ x[:-1]
            out[:-1] += np.conj(np.swapaxes(self.sub, 1, 2)) @ x[1:]
        return out

    def frobenius_norm(self) -> float:
        d = np.linalg.norm(self.diag.ravel())
        s = np.linalg.norm(self.sub.ravel())
        return float(np.sqrt(d * d + 2.0 * s * s))


def _check_shapes(diag, sub, rhs) -> None:
    if diag.ndim != 3 or diag.shape[1] != diag.shape[2]:
        raise ShapeMismatch(f"diag: expected (n, m, m), got {diag.shape}")
    n, m = diag.shape[0], diag.shape[1]
    if n < 1 or m < 1:
        raise ShapeMismatch(f"diag: need n >= 1 and m >= 1, got {diag.shape}")
    if sub.ndim != 3 or sub.shape[0] != n - 1:
        raise ShapeMismatch(f"sub: expected {n - 1} blocks, got {sub.shape[0] if sub.ndim else sub.shape}")
    if sub.shape[1:] != (m, m):
        raise ShapeMismatch(f"sub: expected blocks of shape ({m}, {m}), got {sub.shape[1:]}")
    if rhs.ndim != 3 or rhs.shape[0] != n:
        raise ShapeMismatch(f"rhs: expected {n} blocks, got shape {rhs.shape}")
    if rhs.shape[1] != m:
        raise ShapeMismatch(f"rhs: expected {m} block rows, got {rhs.shape[1]}")


def new_system(diag, sub, rhs) -> BlockTridiagonalSystem:
    """Validate and freeze a system from sequences of blocks.

    Every diagonal block must be exactly Hermitian (run raw data through
    :func:`hermitize` first).  Errors name the offending array and index.
    """
    diag_blocks = [as_block(a, name=f"diag[{i}]") for i, a in enumerate(diag)]
    if not diag_blocks:
        raise ShapeMismatch("diag: at least one block required")
    m = diag_blocks[0].shape[0]
    for i, a in enumerate(diag_blocks):
        if a.shape != (m, m):
            raise ShapeMismatch(f"diag[{i}]: expected ({m}, {m}), got {a.shape}")
        if not is_exactly_hermitian(a):
            raise NotHermitian(float(np.max(np.abs(a - a.conj().T))), 0.0)
    n = len(diag_blocks)

    sub_blocks = [as_block(b, name=f"sub[{i}]") for i, b in enumerate(sub)]
    if len(sub_blocks) != n - 1:
        raise ShapeMismatch(f"sub: expected {n - 1} blocks, got {len(sub_blocks)}")
    for i, b in enumerate(sub_blocks):
        if b.shape != (m, m):
            raise ShapeMismatch(f"sub[{i}]: expected ({m}, {m}), got {b.shape}")

    rhs_blocks = [as_block(y, name=f"rhs[{i}]") for i, y in enumerate(rhs)]
    if len(rhs_blocks) != n:
        raise ShapeMismatch(f"rhs: expected {n} blocks, got {len(rhs_blocks)}")
    k = rhs_blocks[0].shape[1]
    for i, y in enumerate(rhs_blocks):
        if y.shape != (m, k):
            raise ShapeMismatch(f"rhs[{i}]: expected ({m}, {k}), got {y.shape}")

    return BlockTridiagonalSystem(
        np.stack(diag_blocks),
        np.stack(sub_blocks) if sub_blocks else np.zeros((0, m, m), np.complex128),
        np.stack(rhs_blocks),
    )


def interleave(odd, even) -> ComplexArray:
    """Merge odd-position and even-position blocks back into one block vector."""
    odd = np.asarray(odd)
    even = np.asarray(even)
    if odd.ndim != 3 or even.ndim != 3:
        raise ShapeMismatch("block vectors must be 3-dimensional (n, m, k)")
    if odd.shape[0] - even.shape[0] not in (0, 1):
        raise ShapeMismatch(f"block counts {odd.shape[0]} and {even.shape[0]} cannot interleave")
    if odd.shape[1:] != even.shape[1:] and even.shape[0] > 0:
        raise ShapeMismatch(f"block shapes differ: {odd.shape[1:]} vs {even.shape[1:]}")
    out = np.empty((odd.shape[0] + even.shape[0],) + odd.shape[1:], dtype=np.result_type(odd, even))
    out[0::2] = odd
    out[1::2] = even
    return out


def deinterleave(full) -> tuple[ComplexArray, ComplexArray]:
    full = np.asarray(full)
    return full[0::2].copy(), full[1::2].copy()


def relative_residual(system: BlockTridiagonalSystem, x) -> float:
    """``||A x - y||_F / (||A||_F ||x||_F + ||y||_F)`` via the banded product."""
    r = np.linalg.norm((system.matvec(x) - system.rhs).ravel())
    denom = system.frobenius_norm() * np.linalg.norm(np.ravel(x)) + np.linalg.norm(system.rhs.ravel())
    return float(r / denom) if denom > 0 else float(r)
