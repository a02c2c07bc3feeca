"""One level of odd/even cyclic reduction.

For a parent system with blocks ``A_i``, ``B_i``, ``y_i`` (1-based) the odd
system collects the unknowns ``x_1, x_3, ...`` and the even system
``x_2, x_4, ...``.  With ``B_0 = B_N = 0`` and ``A_0 = A_{N+1} = I``::

    U_j = A_{2j-1} - B_{2j-2} A_{2j-2}^-1 B_{2j-2}^H - B_{2j-1}^H A_{2j}^-1 B_{2j-1}
    E_j = -B_{2j} A_{2j}^-1 B_{2j-1}
    u_j = y_{2j-1} - B_{2j-2} A_{2j-2}^-1 y_{2j-2} - B_{2j-1}^H A_{2j}^-1 y_{2j}

    V_j = A_{2j} - B_{2j-1} A_{2j-1}^-1 B_{2j-1}^H - B_{2j}^H A_{2j+1}^-1 B_{2j}
    F_j = -B_{2j+1} A_{2j+1}^-1 B_{2j}
    v_j = y_{2j} - B_{2j-1} A_{2j-1}^-1 y_{2j-1} - B_{2j}^H A_{2j+1}^-1 y_{2j+1}

Terms whose ``B`` is out of range are skipped.  Every ``A_i`` is factored
once per level; the Hermitian terms go through the stable Schur kernel so
``U_j`` and ``V_j`` come out exactly Hermitian.  Odd ``N`` is allowed: the
odd system then has one block more than the even one.
"""

from __future__ import annotations

import os
from collections.abc import Callable
from concurrent.futures import Executor
from functools import partial
from typing import TypeVar

import numpy as np

from . import kernels
from .blockmat import BlockTridiagonalSystem, SplitSystems
from .errors import NotPositiveDefinite

__all__ = ["LevelSplit", "factor_blocks", "factor_level", "factor_tasks", "run_tasks", "split"]

T = TypeVar("T")

MIN_CHUNK = 32


def chunk_ranges(n: int, parts: int, min_chunk: int = MIN_CHUNK) -> list[tuple[int, int]]:
    """Split ``range(n)`` into at most ``parts`` contiguous pieces."""
    if n <= 0:
        return []
    size = max(min_chunk, -(-n // max(parts, 1)))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def default_parts(executor: Executor | None) -> int:
    return 4 * (os.cpu_count() or 1) if executor is not None else 1


def run_tasks(executor: Executor | None, tasks: list[Callable[[], T]]) -> list[T]:
    """Run independent tasks, in order when serial; results keep task order."""
    if executor is None or len(tasks) <= 1:
        return [t() for t in tasks]
    return list(executor.map(lambda t: t(), tasks))


def factor_tasks(diag: np.ndarray, factors: np.ndarray, parts: int = 1):
    """Work items filling ``factors`` with the Cholesky factors of ``diag``.

    Each item returns ``None`` or ``(block, pivot)`` for its first breakdown
    (0-based).
    """
    backend = kernels.impl()
    return [partial(backend.factor_range, diag, factors, lo, hi)
            for lo, hi in chunk_ranges(diag.shape[0], parts)]


def factor_blocks(diag: np.ndarray, executor: Executor | None = None):
    """Factor every diagonal block; return ``(factors, failure)``.

    ``failure`` is ``None`` or the 0-based index of the first block whose
    Cholesky broke down.
    """
    L = np.empty_like(diag)
    fails = [f for f in run_tasks(executor, factor_tasks(diag, L, default_parts(executor))) if f]
    return L, (min(fails)[0] if fails else None)


def factor_level(parent: BlockTridiagonalSystem, executor: Executor | None = None) -> np.ndarray:
    """Cholesky factors of all diagonal blocks, shape ``(n, m, m)``."""
    L, failed = factor_blocks(parent.diag, executor)
    if failed is not None:
        raise NotPositiveDefinite(0, failed + 1)
    return L


class LevelSplit:
    """Output buffers and work items for splitting one parent system.

    Work items write disjoint slices of the buffers, so they may run in any
    order or concurrently; call :meth:`result` once all have finished.
    """

    def __init__(self, parent: BlockTridiagonalSystem, factors: np.ndarray):
        n, m, k = parent.n, parent.m, parent.k
        if n < 2:
            raise ValueError(f"split needs at least 2 blocks, got {n}")
        self.parent = parent
        self.factors = np.ascontiguousarray(factors, dtype=np.complex128)
        self.n_odd, self.n_even = (n + 1) // 2, n // 2
        self.U = np.empty((self.n_odd, m, m), np.complex128)
        self.E = np.empty((self.n_odd - 1, m, m), np.complex128)
        self.u = np.empty((self.n_odd, m, k), np.complex128)
        self.V = np.empty((self.n_even, m, m), np.complex128)
        self.F = np.empty((self.n_even - 1, m, m), np.complex128)
        self.v = np.empty((self.n_even, m, k), np.complex128)

    def tasks(self, parts: int = 1):
        backend = kernels.impl()
        p = self.parent
        args = (self.factors, p.diag, p.sub, p.rhs, self.U, self.E, self.u, self.V, self.F, self.v)
        return [partial(backend.split_range, *args, lo, hi) for lo, hi in chunk_ranges(self.n_odd, parts)]

    def result(self) -> SplitSystems:
        return SplitSystems(
            BlockTridiagonalSystem(self.U, self.E, self.u),
            BlockTridiagonalSystem(self.V, self.F, self.v),
        )


def split(
    parent: BlockTridiagonalSystem,
    factors: np.ndarray | None = None,
    executor: Executor | None = None,
) -> SplitSystems:
    """Form the half-size odd and even systems of ``parent`` (``n >= 2``).

    ``factors`` may carry the output of :func:`factor_level` to avoid
    refactoring.  Output is bit-identical with or without an executor.
    """
    if parent.n < 2:
        raise ValueError(f"split needs at least 2 blocks, got {parent.n}")
    if factors is None:
        factors = factor_level(parent, executor)
    level = LevelSplit(parent, factors)
    run_tasks(executor, level.tasks(default_parts(executor)))
    return level.result()
