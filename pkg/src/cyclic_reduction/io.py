"""BTHP/BTHX binary files and seeded test-system generators.

File layout (all little-endian)::

    offset  size  field
    0       4     magic, b"BTHP" (system) or b"BTHX" (solution)
    4       4     version, uint32 = 1
    8       8     n, uint64   (number of blocks)
    16      8     m, uint64   (block size)
    24      4     k, uint32   (right-hand side columns)
    28      ...   payload: complex entries as (re, im) float64 pairs, row-major

A system payload is ``A_1..A_n``, then ``B_1..B_{n-1}``, then ``y_1..y_n``;
a solution payload is ``x_1..x_n``.

Random generators draw from Philox4x64-10 with key words ``(seed, 0)``.  The
256-bit counter starts at zero and is incremented before each block, so the
first four outputs come from counter ``(1, 0, 0, 0)``; words are used in
order.  Each raw 64-bit output ``r`` becomes the double
``(r >> 11) * 2**-53 * 2 - 1`` in ``[-1, 1)``; complex entries take two
consecutive draws (real part first) in row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Literal

import numpy as np

from .blockmat import BlockTridiagonalSystem, hermitize, new_system
from .errors import BadMagic, BadVersion, ShapeMismatch, SinkFailure, Truncated

SYSTEM_MAGIC = b"BTHP"
SOLUTION_MAGIC = b"BTHX"
VERSION = 1
_HEADER = struct.Struct("<4sIQQI")
HEADER_SIZE = _HEADER.size  # 28
_ENTRY = np.dtype("<c16")

Kind = Literal["hpd_random", "hpd_laplacian", "indefinite", "real_symmetric"]
KINDS: tuple[str, ...] = ("hpd_random", "hpd_laplacian", "indefinite", "real_symmetric")


def system_file_size(n: int, m: int, k: int) -> int:
    return HEADER_SIZE + 16 * (n * m * m + (n - 1) * m * m + n * m * k)


def solution_file_size(n: int, m: int, k: int) -> int:
    return HEADER_SIZE + 16 * n * m * k


def _write(sink: BinaryIO, chunks) -> None:
    try:
        for chunk in chunks:
            sink.write(chunk)
    except (OSError, ValueError) as exc:
        raise SinkFailure(str(exc)) from exc


def _read_exact(source: BinaryIO, size: int, what: str) -> bytes:
    data = source.read(size)
    if data is None or len(data) < size:
        got = 0 if data is None else len(data)
        raise Truncated(f"{what}: expected {size} bytes, got {got}")
    return data


def _read_header(source: BinaryIO, magic: bytes) -> tuple[int, int, int]:
    head = source.read(HEADER_SIZE) or b""
    if len(head) >= 4 and head[:4] != magic:
        raise BadMagic(f"expected magic {magic!r}, found {head[:4]!r}")
    if len(head) < HEADER_SIZE:
        raise Truncated(f"header: expected {HEADER_SIZE} bytes, got {len(head)}")
    _, version, n, m, k = _HEADER.unpack(head)
    if version != VERSION:
        raise BadVersion(f"unsupported version {version} (expected {VERSION})")
    if n < 1 or m < 1:
        raise ShapeMismatch(f"header declares n={n}, m={m}; both must be >= 1")
    return n, m, k


def _blocks(source: BinaryIO, count: int, rows: int, cols: int, what: str) -> np.ndarray:
    raw = _read_exact(source, 16 * count * rows * cols, what)
    return np.frombuffer(raw, dtype=_ENTRY).astype(np.complex128).reshape(count, rows, cols)


def write_system(system: BlockTridiagonalSystem, sink: BinaryIO) -> None:
    header = _HEADER.pack(SYSTEM_MAGIC, VERSION, system.n, system.m, system.k)
    _write(sink, [header] + [a.astype(_ENTRY).tobytes() for a in (system.diag, system.sub, system.rhs)])


def read_system(source: BinaryIO) -> BlockTridiagonalSystem:
    """Parse a BTHP v1 payload; diagonal blocks go through :func:`hermitize`."""
    n, m, k = _read_header(source, SYSTEM_MAGIC)
    diag = _blocks(source, n, m, m, "diagonal blocks")
    sub = _blocks(source, n - 1, m, m, "subdiagonal blocks")
    rhs = _blocks(source, n, m, k, "right-hand sides")
    return new_system([hermitize(a) for a in diag], list(sub), list(rhs))


def write_solution(x: np.ndarray, sink: BinaryIO) -> None:
    x = np.asarray(x)
    if x.ndim != 3 or min(x.shape) < 1:
        raise ShapeMismatch(f"a solution needs shape (n, m, k) with all sizes >= 1, got {x.shape}")
    n, m, k = x.shape
    _write(sink, [_HEADER.pack(SOLUTION_MAGIC, VERSION, n, m, k), x.astype(_ENTRY).tobytes()])


def read_solution(source: BinaryIO) -> np.ndarray:
    n, m, k = _read_header(source, SOLUTION_MAGIC)
    if k < 1:
        raise ShapeMismatch("a solution needs k >= 1")
    return _blocks(source, n, m, k, "solution blocks")


def save_system(path, system: BlockTridiagonalSystem) -> None:
    try:
        with open(path, "wb") as fh:
            write_system(system, fh)
    except OSError as exc:
        raise SinkFailure(f"{path}: {exc}") from exc


def load_system(path) -> BlockTridiagonalSystem:
    with open(path, "rb") as fh:
        return read_system(fh)


def save_solution(path, x: np.ndarray) -> None:
    try:
        with open(path, "wb") as fh:
            write_solution(x, fh)
    except OSError as exc:
        raise SinkFailure(f"{path}: {exc}") from exc


def load_solution(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_solution(fh)


# -- generators ----------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    m: int
    k: int
    seed: int
    kind: Kind = "hpd_random"
    coupling_scale: float = 1.0
    laplacian_shift: float = 1e-2

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 0:
            raise ValueError(f"need n >= 1, m >= 1, k >= 0; got n={self.n}, m={self.m}, k={self.k}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.coupling_scale >= 0:
            raise ValueError("coupling_scale must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


class SeededStream:
    """Uniform draws in ``[-1, 1)`` from Philox4x64-10 keyed by ``seed``."""

    def __init__(self, seed: int):
        self._bits = np.random.Philox(key=int(seed))

    def uniform(self, count: int) -> np.ndarray:
        if count == 0:
            return np.zeros(0)
        raw = self._bits.random_raw(count)
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53 * 2.0 - 1.0

    def complex(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        u = self.uniform(2 * count)
        return (u[0::2] + 1j * u[1::2]).reshape(shape)

    def index(self, bound: int) -> int:
        return int(self._bits.random_raw() % np.uint64(bound))


def _coupling_bound(B: np.ndarray) -> np.ndarray:
    """Per-block upper bound on the spectral norm: ``max(||B||_1, ||B||_inf)``."""
    if B.shape[0] == 0:
        return np.zeros(0)
    a = np.abs(B)
    return np.maximum(a.sum(axis=2).max(axis=1), a.sum(axis=1).max(axis=1))


def _hpd_random(spec: GeneratorSpec, stream: SeededStream, real: bool):
    n, m, k = spec.n, spec.m, spec.k
    B = spec.coupling_scale * stream.complex((n - 1, m, m))
    R = stream.complex((n, m, m))
    y = stream.complex((n, m, k))
    if real:
        B, R, y = B.real + 0j, R.real + 0j, y.real + 0j
    sigma = np.concatenate([[0.0], _coupling_bound(B), [0.0]])
    eye = np.eye(m)
    diag = [hermitize(R[j] @ R[j].conj().T + (sigma[j] + sigma[j + 1] + 1.0) * eye) for j in range(n)]
    return diag, B, y


def _laplacian(spec: GeneratorSpec, stream: SeededStream):
    n, m, k = spec.n, spec.m, spec.k
    c = spec.coupling_scale
    y = stream.complex((n, m, k))
    A = (2.0 + 2.0 * c + spec.laplacian_shift) * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    diag = [hermitize(A) for _ in range(n)]
    B = np.broadcast_to(-c * np.eye(m), (n - 1, m, m))
    return diag, B, y


def generate(spec: GeneratorSpec) -> BlockTridiagonalSystem:
    """Deterministic test system described by ``spec``.

    * ``hpd_random``: random ``B_j``; ``A_j = R_j R_j^H + (s_{j-1} + s_j + 1) I``
      where ``s_j`` bounds ``||B_j||_2``, so the smallest eigenvalue is >= 1.
    * ``real_symmetric``: the same draws with imaginary parts dropped.
    * ``hpd_laplacian``: ``A_j = tridiag(-1, 2 + 2c + shift, -1)``, ``B_j = -c I``
      (the five-point Laplacian for ``c = 1``); eigenvalues exceed ``shift``.
    * ``indefinite``: ``hpd_random`` with one seeded block shifted down by
      ``1 + trace(A_j)/m``, which pushes the smallest eigenvalue to <= -1.
    """
    stream = SeededStream(spec.seed)
    if spec.kind == "hpd_laplacian":
        diag, B, y = _laplacian(spec, stream)
    else:
        diag, B, y = _hpd_random(spec, stream, real=spec.kind == "real_symmetric")
        if spec.kind == "indefinite":
            j = stream.index(spec.n)
            shift = 1.0 + np.trace(diag[j]).real / spec.m
            diag[j] = hermitize(diag[j] - shift * np.eye(spec.m))
    return new_system(diag, list(B), list(y))
