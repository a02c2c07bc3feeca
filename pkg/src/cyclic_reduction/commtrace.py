"""Static trace of which node receives which blocks during parallel reduction.

Node ``i`` owns ``A_i``, ``B_i`` (when ``i < n``) and ``y_i``.  At a level of
``n`` nodes, odd-system node ``j`` receives from ``2j-2, 2j-1, 2j`` and
even-system node ``ceil(n/2) + j`` from ``2j-1, 2j, 2j+1``, clipped to
``[1, n]``.  Recursion continues inside each half using the half's own node
range, so every index reported is a global position on the line of nodes.
Cost is the total ``|sender - receiver|`` over non-self edges (unit
spacing).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple, TextIO

PAYLOAD_TAGS = ("diag_block", "sub_block", "rhs_block")


@dataclass(frozen=True)
class CommEdge:
    level: int
    receiver: int
    sender: int
    payload: tuple[str, ...]

    @property
    def is_self(self) -> bool:
        return self.sender == self.receiver

    @property
    def distance(self) -> int:
        return abs(self.sender - self.receiver)

    @property
    def symbolic_size(self) -> str:
        """Message size in units of ``m^2`` (matrix blocks) and ``m*k`` (rhs blocks)."""
        mats = sum(tag != "rhs_block" for tag in self.payload)
        return f"{mats}*m^2" + (" + m*k" if "rhs_block" in self.payload else "")


class TraceSummary(NamedTuple):
    total_edges: int
    total_line_distance: int

    def line(self) -> str:
        return f"# total_edges={self.total_edges} total_line_distance={self.total_line_distance}"


def _payload(sender: int, n: int) -> tuple[str, ...]:
    return PAYLOAD_TAGS if sender < n else ("diag_block", "rhs_block")


def trace_level(n: int, level: int = 0, offset: int = 0) -> list[CommEdge]:
    """Edges for one reduction of ``n`` nodes occupying positions ``offset+1 .. offset+n``."""
    if n < 2:
        raise ValueError(f"a level needs at least 2 nodes, got {n}")
    n_odd, n_even = (n + 1) // 2, n // 2
    edges = []
    for j in range(1, n_odd + 1):
        for s in (2 * j - 2, 2 * j - 1, 2 * j):
            if 1 <= s <= n:
                edges.append(CommEdge(level, offset + j, offset + s, _payload(s, n)))
    for j in range(1, n_even + 1):
        for s in (2 * j - 1, 2 * j, 2 * j + 1):
            if 1 <= s <= n:
                edges.append(CommEdge(level, offset + n_odd + j, offset + s, _payload(s, n)))
    return edges


def trace_full(n: int, threshold: int) -> tuple[list[CommEdge], TraceSummary]:
    """Edges of the whole recursion, level by level, down to subsystems of ``<= threshold`` nodes."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    edges: list[CommEdge] = []
    frontier = [(0, n)]
    level = 0
    while frontier:
        nxt = []
        for offset, size in frontier:
            if size <= threshold:
                continue
            edges.extend(trace_level(size, level, offset))
            half = (size + 1) // 2
            nxt += [(offset, half), (offset + half, size - half)]
        frontier = nxt
        level += 1
    distance = sum(e.distance for e in edges if not e.is_self)
    return edges, TraceSummary(len(edges), distance)


def write_csv(edges: list[CommEdge], summary: TraceSummary, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["level", "receiver", "sender", "payload", "distance"])
    for e in edges:
        writer.writerow([e.level, e.receiver, e.sender, "|".join(e.payload), e.distance])
    out.write(summary.line() + "\n")


def to_csv(edges: list[CommEdge], summary: TraceSummary) -> str:
    buf = io.StringIO()
    write_csv(edges, summary, buf)
    return buf.getvalue()
