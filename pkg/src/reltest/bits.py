"""Dense bit-packed points of {0,1}^n.

A point is a row of ``uint64`` words. Coordinate ``i`` (0-based, printed as
``x{i+1}``) lives in bit ``i % 64`` of word ``i // 64``. Bits at positions
``>= n`` are always zero. A batch of ``m`` points is an ``(m, W)`` array.

For ``n <= 64`` the single word of a point doubles as its integer index
``sum_i x_i 2^i``, which is also the truth-table index convention.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


def n_words(n: int) -> int:
    return max(1, (n + WORD_BITS - 1) // WORD_BITS)


def full_mask(n: int) -> np.ndarray:
    """Words with ones exactly at coordinates ``0..n-1``."""
    w = np.zeros(n_words(n), dtype=np.uint64)
    full, rem = divmod(n, WORD_BITS)
    w[:full] = _ALL_ONES
    if rem:
        w[full] = np.uint64((1 << rem) - 1)
    return w


def index_mask(n: int, coords: Iterable[int]) -> np.ndarray:
    w = np.zeros(n_words(n), dtype=np.uint64)
    for c in coords:
        if not 0 <= c < n:
            raise IndexError(f"coordinate {c} outside [0, {n})")
        w[c >> 6] |= np.uint64(1 << (c & 63))
    return w


def mask_coords(mask: np.ndarray, n: int) -> np.ndarray:
    """Sorted coordinates set in ``mask``."""
    return np.flatnonzero(unpack_rows(mask[None, :], n)[0])


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(m, n)`` matrix into ``(m, W)`` words."""
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim == 1:
        bits = bits[None, :]
    m, n = bits.shape
    width = n_words(n) * WORD_BITS
    if n != width:
        padded = np.zeros((m, width), dtype=bool)
        padded[:, :n] = bits
        bits = padded
    packed = np.packbits(bits, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_rows(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`; returns a boolean ``(m, n)`` matrix."""
    words = np.ascontiguousarray(np.atleast_2d(words), dtype="<u8")
    raw = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return raw[:, :n].astype(bool)


def point(bits: str | Sequence[int], n: int | None = None) -> np.ndarray:
    """Build a single point from ``"0110"`` (x1 first) or a 0/1 sequence."""
    if isinstance(bits, str):
        vals = [int(ch) for ch in bits if ch in "01"]
    else:
        vals = [int(b) for b in bits]
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} bits, got {len(vals)}")
    return pack_rows(np.array(vals, dtype=bool)[None, :])[0]


def to_bitstring(x: np.ndarray, n: int) -> str:
    return "".join("1" if b else "0" for b in unpack_rows(x[None, :] if x.ndim == 1 else x, n)[0])


def from_int(k: int, n: int) -> np.ndarray:
    """Point whose integer index is ``k`` (x1 is the least significant bit)."""
    w = np.zeros(n_words(n), dtype=np.uint64)
    for j in range(len(w)):
        w[j] = np.uint64((k >> (64 * j)) & 0xFFFFFFFFFFFFFFFF)
    return w


def to_int(x: np.ndarray) -> int:
    return sum(int(v) << (64 * j) for j, v in enumerate(np.asarray(x).ravel()))


def ints_to_points(idx: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`from_int` for ``n <= 64``."""
    if n > WORD_BITS:
        raise ValueError("integer indexing needs n <= 64")
    return np.asarray(idx).astype(np.uint64).reshape(-1, 1)


def points_to_ints(X: np.ndarray) -> np.ndarray:
    if X.shape[1] != 1:
        raise ValueError("integer indexing needs n <= 64")
    return X[:, 0]


def random_points(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """``m`` independent uniform points of {0,1}^n."""
    W = n_words(n)
    raw = rng.bit_generator.random_raw(m * W).astype(np.uint64).reshape(m, W)
    return raw & full_mask(n)


def get_bit(X: np.ndarray, i: int) -> np.ndarray:
    """Boolean column of coordinate ``i`` over a batch."""
    return ((X[:, i >> 6] >> np.uint64(i & 63)) & np.uint64(1)).astype(bool)


def popcount_rows(X: np.ndarray) -> np.ndarray:
    return np.bitwise_count(X).sum(axis=1, dtype=np.int64)


def deposit(idx: np.ndarray, coords: Sequence[int], n: int) -> np.ndarray:
    """Scatter bit ``j`` of each integer in ``idx`` onto coordinate ``coords[j]``."""
    idx = np.asarray(idx, dtype=np.uint64)
    out = np.zeros((idx.size, n_words(n)), dtype=np.uint64)
    for j, c in enumerate(coords):
        bit = (idx >> np.uint64(j)) & np.uint64(1)
        out[:, c >> 6] |= bit << np.uint64(c & 63)
    return out


def extract(X: np.ndarray, coords: Sequence[int]) -> np.ndarray:
    """Gather coordinates ``coords`` of each point into an integer (inverse of deposit)."""
    out = np.zeros(X.shape[0], dtype=np.uint64)
    for j, c in enumerate(coords):
        out |= (((X[:, c >> 6] >> np.uint64(c & 63)) & np.uint64(1)) << np.uint64(j))
    return out


def lex_order(X: np.ndarray, n: int) -> np.ndarray:
    """Permutation sorting points lexicographically as strings x1 x2 ... xn."""
    bits = unpack_rows(X, n)
    # np.lexsort treats the last key as primary
    return np.lexsort(bits.T[::-1])


def all_points(n: int) -> np.ndarray:
    """All ``2^n`` points in index order (``n <= 24``)."""
    if n > 24:
        raise ValueError("refusing to enumerate more than 2^24 points")
    if n == 0:
        return np.zeros((1, 1), dtype=np.uint64)
    return ints_to_points(np.arange(1 << n, dtype=np.uint64), n)
