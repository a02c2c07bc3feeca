"""Recursive cyclic-reduction solver and positive-definiteness checker.

The recursion tree is walked one depth at a time.  All subsystems at a
depth are independent, so their block factorizations and splits are
flattened into one batch of work items and run on a thread pool (the
compiled kernels release the GIL).  Serial mode runs the same items in
order; every item writes a disjoint output slice with a fixed evaluation
order, so both modes give bit-identical results.

Node layout: at each depth the subsystems are laid out left to right, the
odd half of a parent first, occupying the same positions as its parent.
``NotPositiveDefinite.block_index`` is a 1-based position in that layout;
at depth 0 it is the block index of the input system.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np

from . import kernels
from .blockmat import BlockTridiagonalSystem, interleave
from .errors import Indefinite, NotPositiveDefinite, ShapeMismatch
from .reduction import LevelSplit, default_parts, factor_tasks, run_tasks

__all__ = [
    "DefinitenessReport",
    "SolveOptions",
    "SolveStats",
    "base_solve",
    "check_positive_definite",
    "solve",
]


@dataclass(frozen=True)
class SolveOptions:
    """``base_threshold``: subsystems with at most this many blocks are solved densely."""

    base_threshold: int = 4
    parallel: bool = True
    collect_stats: bool = True
    max_workers: int | None = None

    def __post_init__(self):
        if int(self.base_threshold) < 1:
            raise ValueError(f"base_threshold must be >= 1, got {self.base_threshold}")


@dataclass
class SolveStats:
    levels: int = 0
    block_factorizations: int = 0
    base_case_dim: int = 0
    # m x m factorizations along the longest root-to-leaf path
    span_factorizations: int = 0


@dataclass(frozen=True)
class DefinitenessReport:
    positive_definite: bool
    failure: tuple[int, int] | None = None

    def line(self) -> str:
        if self.positive_definite:
            return "PD"
        level, block = self.failure
        return f"NOT_PD level={level} block={block}"


class _Node:
    __slots__ = ("system", "offset", "children", "x")

    def __init__(self, system: BlockTridiagonalSystem, offset: int):
        self.system = system
        self.offset = offset
        self.children: tuple[_Node, _Node] | None = None
        self.x: np.ndarray | None = None


def _dense_factor(system: BlockTridiagonalSystem) -> tuple[np.ndarray | None, int | None]:
    """Dense Cholesky of the assembled system; returns ``(L, failed_block)``."""
    try:
        return kernels.cholesky(system.to_dense()), None
    except Indefinite as exc:
        return None, exc.pivot_index // system.m


def _leaf(node: _Node, with_rhs: bool) -> int | None:
    s = node.system
    L, failed = _dense_factor(s)
    if failed is not None:
        return failed
    if with_rhs:
        y = s.rhs.reshape(s.n * s.m, s.k)
        node.x = kernels.solve_hermitian(L, y).reshape(s.n, s.m, s.k)
    return None


def base_solve(system: BlockTridiagonalSystem) -> np.ndarray:
    """Solve the whole system as one dense Hermitian matrix by Cholesky."""
    if system.k < 1:
        raise ShapeMismatch("base_solve needs at least one right-hand side column")
    node = _Node(system, 0)
    failed = _leaf(node, True)
    if failed is not None:
        raise NotPositiveDefinite(0, failed + 1)
    return node.x


def _walk(system: BlockTridiagonalSystem, opts: SolveOptions, with_rhs: bool):
    """Run the recursion.  Returns ``(root, stats, failure)``."""
    threshold = int(opts.base_threshold)
    stats = SolveStats()
    root = _Node(system, 0)
    frontier = [root]
    inner_by_level: list[list[_Node]] = []

    if opts.parallel:
        pool_ctx = ThreadPoolExecutor(max_workers=opts.max_workers or os.cpu_count() or 1)
    else:
        pool_ctx = nullcontext(None)
    with pool_ctx as pool:
        parts = default_parts(pool)
        level = 0
        while frontier:
            stats.levels = level + 1
            inner = [nd for nd in frontier if nd.system.n > threshold]
            leaves = [nd for nd in frontier if nd.system.n <= threshold]

            tasks, owners = [], []
            for nd in leaves:
                tasks.append(lambda nd=nd: _leaf(nd, with_rhs))
                owners.append((nd, None))
                stats.base_case_dim = max(stats.base_case_dim, nd.system.n * nd.system.m)
            factors = {}
            for nd in inner:
                factors[id(nd)] = L = np.empty_like(nd.system.diag)
                for t in factor_tasks(nd.system.diag, L, parts):
                    tasks.append(t)
                    owners.append((nd, L))
            failures = []
            for (nd, L), res in zip(owners, run_tasks(pool, tasks)):
                if res is None:
                    continue
                local = res if L is None else res[0]
                failures.append(nd.offset + local + 1)
            if failures:
                return root, stats, (level, min(failures))

            if inner:
                stats.block_factorizations += sum(nd.system.n for nd in inner)
                stats.span_factorizations += max(nd.system.n for nd in inner)
            splits = [LevelSplit(nd.system, factors[id(nd)]) for nd in inner]
            run_tasks(pool, [t for sp in splits for t in sp.tasks(parts)])

            frontier = []
            for nd, sp in zip(inner, splits):
                odd, even = sp.result()
                nd.children = (_Node(odd, nd.offset), _Node(even, nd.offset + odd.n))
                nd.system = None
                frontier.extend(nd.children)
            for nd in leaves:
                nd.system = None
            inner_by_level.append(inner)
            level += 1

    if with_rhs:
        for inner in reversed(inner_by_level):
            for nd in inner:
                odd, even = nd.children
                nd.x = interleave(odd.x, even.x)
                nd.children = None
    return root, stats, None


def solve(system: BlockTridiagonalSystem, opts: SolveOptions | None = None):
    """Solve ``A x = y``; returns ``(x, stats)`` with ``x`` of shape ``(n, m, k)``.

    Raises :class:`NotPositiveDefinite` if any block factorization or dense
    base case breaks down.  ``stats`` is None when ``opts.collect_stats`` is
    false.
    """
    opts = opts or SolveOptions()
    if system.k < 1:
        raise ShapeMismatch("solve needs at least one right-hand side column (k >= 1)")
    root, stats, failure = _walk(system, opts, with_rhs=True)
    if failure is not None:
        raise NotPositiveDefinite(*failure)
    return root.x, (stats if opts.collect_stats else None)


def check_positive_definite(system: BlockTridiagonalSystem, opts: SolveOptions | None = None) -> DefinitenessReport:
    """Run the recursive splitting without right-hand sides and report breakdowns."""
    opts = opts or SolveOptions()
    bare = system.with_rhs(np.zeros((system.n, system.m, 0), np.complex128))
    _, _, failure = _walk(bare, opts, with_rhs=False)
    if failure is None:
        return DefinitenessReport(True)
    return DefinitenessReport(False, failure)
