"""
GF(2) kernels for polar transforms.

BitVector stores its elements packed in a Python int (element j at bit j-1,
so element 1 is the least significant bit); transforms run as log2(N) XOR
butterflies on that int. The *_rows functions do the same butterflies on a
2-D uint8 array, one vector per row, for batched callers. Gf2Matrix is the
dense path: oracles, the unified pre-transform and elimination inputs.

All public indices (row_weight, prefixes) are 1-based.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from deep_polar.errors import InvalidArgument


def log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise InvalidArgument(f"length must be a power of two, got {n}")
    return n.bit_length() - 1


@lru_cache(maxsize=None)
def _low_masks(n_bits: int) -> tuple[tuple[int, int, int], ...]:
    """(stride, positions with stride bit clear, positions with it set)."""
    full = (1 << n_bits) - 1
    out = []
    stride = 1
    while stride < n_bits:
        low = 0
        for j in range(n_bits):
            if not j & stride:
                low |= 1 << j
        out.append((stride, low, full ^ low))
        stride *= 2
    return tuple(out)


@dataclass(frozen=True, slots=True)
class BitVector:
    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 1:
            raise InvalidArgument(f"bit vector length must be positive, got {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise InvalidArgument(f"value does not fit in {self.length} bits")

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(0, length)

    @classmethod
    def unit(cls, length: int, index: int) -> "BitVector":
        if not 1 <= index <= length:
            raise InvalidArgument(f"index {index} outside [1, {length}]")
        return cls(1 << (index - 1), length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        length = 0
        for bit in bits:
            bit = int(bit)
            if bit not in (0, 1):
                raise InvalidArgument(f"not a GF(2) element: {bit}")
            value |= bit << length
            length += 1
        return cls(value, length)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "BitVector":
        array = np.asarray(array)
        if array.ndim != 1 or array.size == 0:
            raise InvalidArgument("expected a non-empty 1-D array")
        if np.any((array != 0) & (array != 1)):
            raise InvalidArgument("array holds values other than 0 and 1")
        packed = np.packbits(array.astype(np.uint8), bitorder="little")
        return cls(int.from_bytes(packed.tobytes(), "little"), int(array.size))

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise InvalidArgument(f"not a 0/1 string: {text!r}")
        return cls(int(text[::-1], 2), len(text))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> "BitVector":
        digits = text.strip().lower().removeprefix("0x")
        try:
            number = int(digits, 16)
        except ValueError as exc:
            raise InvalidArgument(f"not a hex string: {text!r}") from exc
        if length is None:
            length = 4 * len(digits)
        if number >> length:
            raise InvalidArgument(f"hex value {text!r} does not fit in {length} bits")
        return cls.from_string(format(number, f"0{length}b"))

    @classmethod
    def parse(cls, text: str, length: int | None = None) -> "BitVector":
        """Read a 0/1 string, or hex (MSB-first, left-padded) when prefixed 0x or using other hex digits."""
        text = text.strip()
        if text.lower().startswith("0x") or set(text) - {"0", "1"}:
            return cls.from_hex(text, length)
        vector = cls.from_string(text)
        if length is not None and vector.length != length:
            raise InvalidArgument(f"expected {length} bits, got {vector.length}")
        return vector

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, index: int) -> int:
        if index < 0:
            index += self.length
        if not 0 <= index < self.length:
            raise IndexError(index)
        return (self.value >> index) & 1

    def __iter__(self):
        for j in range(self.length):
            yield (self.value >> j) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.length != self.length:
            raise InvalidArgument("xor of vectors with different lengths")
        return BitVector(self.value ^ other.value, self.length)

    @property
    def weight(self) -> int:
        return self.value.bit_count()

    def prefix(self, k: int) -> "BitVector":
        if not 1 <= k <= self.length:
            raise InvalidArgument(f"prefix length {k} outside [1, {self.length}]")
        return BitVector(self.value & ((1 << k) - 1), k)

    def padded(self, length: int) -> "BitVector":
        if length < self.length:
            raise InvalidArgument("cannot pad to a shorter length")
        return BitVector(self.value, length)

    def concat(self, other: "BitVector") -> "BitVector":
        return BitVector(self.value | (other.value << self.length), self.length + other.length)

    def to_bits(self) -> list[int]:
        return list(self)

    def to_array(self) -> np.ndarray:
        raw = self.value.to_bytes((self.length + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits[: self.length].copy()

    def to_string(self) -> str:
        return format(self.value, f"0{self.length}b")[::-1]

    def to_hex(self) -> str:
        digits = (self.length + 3) // 4
        return format(int(self.to_string(), 2), f"0{digits}x")


def polar_transform(u: BitVector) -> BitVector:
    """u * G_N with G_N = G_2^{(x)n}, natural order."""
    log2_exact(u.length)
    value = u.value
    for stride, low, _ in _low_masks(u.length):
        value ^= (value >> stride) & low
    return BitVector(value, u.length)


def transpose_transform(u: BitVector) -> BitVector:
    """u * G_N^T. Self-inverse."""
    log2_exact(u.length)
    value = u.value
    for stride, _, high in _low_masks(u.length):
        value ^= (value << stride) & high
    return BitVector(value, u.length)


def transpose_transform_prefix(u_prefix: BitVector, n: int) -> BitVector:
    """u_{1:k} times the upper-left k x k block of G_N^T."""
    log2_exact(n)
    k = u_prefix.length
    if k > n:
        raise InvalidArgument(f"prefix length {k} exceeds N={n}")
    return transpose_transform(u_prefix.padded(n)).prefix(k)


def row_weight(n: int, i: int) -> int:
    """Hamming weight of row i of G_N."""
    log2_exact(n)
    if not 1 <= i <= n:
        raise InvalidArgument(f"row index {i} outside [1, {n}]")
    return 1 << (i - 1).bit_count()


def column_weight(n: int, i: int) -> int:
    """Hamming weight of row i of G_N^T."""
    bits = log2_exact(n)
    if not 1 <= i <= n:
        raise InvalidArgument(f"row index {i} outside [1, {n}]")
    return 1 << (bits - (i - 1).bit_count())


def _butterfly_rows(array: np.ndarray, transpose: bool) -> np.ndarray:
    x = np.array(array, dtype=np.uint8, copy=True, order="C")
    if x.ndim == 0:
        raise InvalidArgument("expected at least one dimension")
    n = x.shape[-1]
    log2_exact(n)
    lead = x.shape[:-1]
    stride = 1
    while stride < n:
        view = x.reshape(lead + (n // (2 * stride), 2, stride))
        if transpose:
            view[..., 1, :] ^= view[..., 0, :]
        else:
            view[..., 0, :] ^= view[..., 1, :]
        stride *= 2
    return x


def polar_transform_rows(array: np.ndarray) -> np.ndarray:
    """Row-wise u * G_N for every vector along the last axis."""
    return _butterfly_rows(array, transpose=False)


def transpose_transform_rows(array: np.ndarray) -> np.ndarray:
    """Row-wise u * G_N^T for every vector along the last axis."""
    return _butterfly_rows(array, transpose=True)


@dataclass(frozen=True, slots=True)
class Gf2Matrix:
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.uint8, copy=True)
        if entries.ndim != 2 or 0 in entries.shape:
            raise InvalidArgument("a GF(2) matrix needs two positive dimensions")
        if np.any(entries > 1):
            raise InvalidArgument("matrix entries must be 0 or 1")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def polar(cls, n: int) -> "Gf2Matrix":
        """Dense G_N built as an explicit Kronecker power (oracle path)."""
        log2_exact(n)
        kernel = np.array([[1, 0], [1, 1]], dtype=np.uint8)
        out = np.ones((1, 1), dtype=np.uint8)
        while out.shape[0] < n:
            out = np.kron(kernel, out)
        return cls(out)

    @property
    def T(self) -> "Gf2Matrix":
        return Gf2Matrix(self.entries.T)

    def block(self, rows: int, cols: int) -> "Gf2Matrix":
        """Upper-left rows x cols submatrix."""
        return Gf2Matrix(self.entries[:rows, :cols])

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise InvalidArgument("matrix dimensions do not chain")
        product = self.entries.astype(np.int64) @ other.entries.astype(np.int64)
        return Gf2Matrix(product & 1)

    def left_multiply(self, vector: BitVector) -> BitVector:
        """vector * self."""
        if len(vector) != self.rows:
            raise InvalidArgument(f"vector length {len(vector)} != {self.rows} rows")
        product = vector.to_array().astype(np.int64) @ self.entries.astype(np.int64)
        return BitVector.from_array(product & 1)

    def rank(self) -> int:
        rows = [_pack(row) for row in self.entries]
        rank = 0
        for col in range(self.cols):
            bit = 1 << col
            pivot = next((r for r in range(rank, len(rows)) if rows[r] & bit), None)
            if pivot is None:
                continue
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            for r in range(len(rows)):
                if r != rank and rows[r] & bit:
                    rows[r] ^= rows[rank]
            rank += 1
        return rank


def _pack(row: np.ndarray) -> int:
    packed = np.packbits(np.asarray(row, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


SolveStatus = Literal["unique", "none", "multiple"]


@dataclass(frozen=True, slots=True)
class SolveResult:
    status: SolveStatus
    solution: BitVector | None = None


def gf2_solve(a: Gf2Matrix, b: BitVector | Sequence[int]) -> SolveResult:
    """Gauss-Jordan elimination for x with a @ x = b over GF(2)."""
    if not isinstance(b, BitVector):
        b = BitVector.from_bits(b)
    if a.rows != len(b):
        raise InvalidArgument(f"matrix has {a.rows} rows but b has {len(b)} entries")
    cols = a.cols
    aug = 1 << cols
    rows = [_pack(a.entries[r]) | (b[r] << cols) for r in range(a.rows)]
    pivot_cols: list[int] = []
    for col in range(cols):
        bit = 1 << col
        rank = len(pivot_cols)
        pivot = next((r for r in range(rank, len(rows)) if rows[r] & bit), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r] & bit:
                rows[r] ^= rows[rank]
        pivot_cols.append(col)
    rank = len(pivot_cols)
    if any(rows[r] & aug for r in range(rank, len(rows))):
        return SolveResult("none")
    if rank < cols:
        return SolveResult("multiple")
    value = 0
    for r, col in enumerate(pivot_cols):
        value |= ((rows[r] >> cols) & 1) << col
    return SolveResult("unique", BitVector(value, cols))


def pack_rows(array: np.ndarray) -> list[int]:
    """Each row of a 2-D 0/1 array as a packed int (column j at bit j)."""
    array = np.asarray(array, dtype=np.uint8)
    if array.ndim != 2:
        raise InvalidArgument("expected a 2-D array")
    return [_pack(row) for row in array]


def pack_words(array: np.ndarray) -> np.ndarray:
    """Rows of a 0/1 array packed into little-endian 64-bit words (column j at bit j)."""
    array = np.asarray(array, dtype=np.uint8)
    cols = array.shape[-1]
    padded = np.zeros(array.shape[:-1] + (-(-cols // 64) * 64,), dtype=np.uint8)
    padded[..., :cols] = array
    return np.packbits(padded, axis=-1, bitorder="little").view("<u8")


def affine_flats(n_bits: int, dim: int) -> np.ndarray:
    """
    Indicator rows of every dim-dimensional affine subspace of GF(2)^n_bits.

    Column p stands for the point whose binary expansion is p. Linear parts
    are enumerated as reduced echelon bases; translates run over vectors
    supported on the non-pivot coordinates, so each flat appears once.
    """
    if not 0 <= dim <= n_bits:
        raise InvalidArgument(f"cannot place a {dim}-flat in GF(2)^{n_bits}")
    size = 1 << n_bits
    blocks: list[np.ndarray] = []
    for pivots in itertools.combinations(range(n_bits), dim):
        others = [c for c in range(n_bits) if c not in pivots]
        free = [(r, c) for r, p in enumerate(pivots) for c in others if c > p]
        shifts = np.array(
            [sum(1 << c for j, c in enumerate(others) if t >> j & 1) for t in range(1 << len(others))],
            dtype=np.int64,
        )
        for fill in range(1 << len(free)):
            basis = [1 << p for p in pivots]
            for j, (r, c) in enumerate(free):
                if fill >> j & 1:
                    basis[r] |= 1 << c
            points = np.zeros(1, dtype=np.int64)
            for vector in basis:
                points = np.concatenate([points, points ^ vector])
            block = np.zeros((shifts.size, size), dtype=np.uint8)
            block[np.arange(shifts.size)[:, None], points[None, :] ^ shifts[:, None]] = 1
            blocks.append(block)
    return np.concatenate(blocks)
