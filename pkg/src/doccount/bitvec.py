"""Bitvector encodings with a uniform rank/select contract.

Six interchangeable encodings of a logical bit sequence B[1, n]:

- ``plain``: raw bits in 64-bit words plus a cumulative-ones directory.
- ``rle_block``: maximal runs delta-coded as (gap, run) pairs, packed into
  fixed 32-byte blocks with per-block cumulative position/ones samples.
- ``rle_two_sparse``: run boundaries held in two sparse vectors, one for the
  start positions of 1-runs and one for their cumulative lengths.
- ``gap``: distances between consecutive 1-bits delta-coded, blocked like
  ``rle_block``; only 0-runs are exploited.
- ``delta_rle``: delta-coded runs cut into blocks of 128 ones, located through
  three sparse directories (covered positions, covered ones, payload offsets).
- ``sparse``: the low-bits/high-bits split of the positions of the 1-bits, with
  the split width chosen by exhaustive scan to minimize total size.

All positions are 1-based.  rank1(i) counts ones in B[1, i] with rank1(0) = 0;
select1(k) is the position of the k-th one for k in [1, ones].  size_in_bits()
is exactly eight times the serialized record length, directories included.
"""

from __future__ import annotations

import struct

import numpy as np
from numba import njit

from ._bitio import (
    delta_size,
    pack_width,
    popcount64,
    read_delta,
    unpack_at,
    write_delta,
)
from .errors import FormatError, RangeInvalid, SelectOutOfRange

ENCODINGS = ("plain", "rle_block", "rle_two_sparse", "gap", "delta_rle", "sparse")

# Tuning constants; directory overhead is included in size_in_bits.
PLAIN_SB_WORDS = 8  # superblock = 8 words = 512 bits per directory entry
RLE_BLOCK_BYTES = 32
DELTA_RLE_ONES = 128

_HEADER = struct.Struct("<BQQQ")
_TAGS = {name: i + 1 for i, name in enumerate(ENCODINGS)}
_NAMES = {v: k for k, v in _TAGS.items()}


def runs_from_bits(bits: np.ndarray):
    """Return (starts, lengths) of maximal 1-runs, positions 1-based."""
    b = np.asarray(bits, dtype=np.int8)
    d = np.diff(np.concatenate((np.zeros(1, np.int8), b, np.zeros(1, np.int8))))
    starts = np.flatnonzero(d == 1).astype(np.int64) + 1
    ends = np.flatnonzero(d == -1).astype(np.int64)  # inclusive 1-based ends
    return starts, ends - starts + 1


def bits_from_runs(length: int, starts, lengths) -> np.ndarray:
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    delta = np.zeros(length + 1, np.int32)
    np.add.at(delta, starts - 1, 1)
    np.add.at(delta, starts - 1 + lengths, -1)
    return (np.cumsum(delta[:length]) > 0).astype(np.uint8)


# ---------------------------------------------------------------------------
# plain encoding kernels


@njit(cache=True)
def _plain_dir(words, sb_words):
    n_sb = (len(words) + sb_words - 1) // sb_words
    cum = np.zeros(n_sb + 1, np.int64)
    c = np.int64(0)
    for i in range(len(words)):
        if i % sb_words == 0:
            cum[i // sb_words] = c
        c += popcount64(words[i])
    cum[n_sb] = c
    return cum


@njit(cache=True)
def _plain_rank1(words, cum, sb_words, i):
    if i <= 0:
        return np.int64(0)
    w_full = i >> 6
    sb = w_full // sb_words
    c = cum[sb]
    for w in range(sb * sb_words, w_full):
        c += popcount64(words[w])
    rem = i & 63
    if rem:
        mask = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
        c += popcount64(words[w_full] & mask)
    return c


@njit(cache=True)
def _plain_select1(words, cum, sb_words, k):
    lo = 0
    hi = len(cum) - 1
    while lo < hi:  # largest sb with cum[sb] < k
        mid = (lo + hi + 1) // 2
        if cum[mid] < k:
            lo = mid
        else:
            hi = mid - 1
    c = cum[lo]
    w = lo * sb_words
    while True:
        pc = popcount64(words[w])
        if c + pc >= k:
            break
        c += pc
        w += 1
    x = words[w]
    need = k - c
    pos = 0
    while True:
        if x & np.uint64(1):
            need -= 1
            if need == 0:
                break
        x >>= np.uint64(1)
        pos += 1
    return np.int64(w * 64 + pos + 1)


@njit(cache=True)
def _plain_select0(words, cum, sb_words, k):
    lo = 0
    hi = len(cum) - 1
    while lo < hi:  # largest sb with zeros-before < k
        mid = (lo + hi + 1) // 2
        if mid * sb_words * 64 - cum[mid] < k:
            lo = mid
        else:
            hi = mid - 1
    c = lo * sb_words * 64 - cum[lo]
    w = lo * sb_words
    while True:
        zc = 64 - popcount64(words[w])
        if c + zc >= k:
            break
        c += zc
        w += 1
    x = words[w]
    need = k - c
    pos = 0
    while True:
        if not (x & np.uint64(1)):
            need -= 1
            if need == 0:
                break
        x >>= np.uint64(1)
        pos += 1
    return np.int64(w * 64 + pos + 1)


# ---------------------------------------------------------------------------
# blocked delta-stream kernels, pair tokens (gap, run) and gap tokens


@njit(cache=True)
def _pairs_measure(starts, lengths, block_bits):
    nb = 0
    used = 0
    prev_end = np.int64(0)
    for t in range(len(starts)):
        z = starts[t] - 1 - prev_end
        sz = delta_size(z + 1) + delta_size(lengths[t])
        if nb == 0 or used + sz > block_bits:
            nb += 1
            used = 0
        used += sz
        prev_end = starts[t] + lengths[t] - 1
    return nb


@njit(cache=True)
def _pairs_encode(starts, lengths, block_bits, payload, cum_bits, cum_ones):
    nb = 0
    used = 0
    prev_end = np.int64(0)
    ones = np.int64(0)
    for t in range(len(starts)):
        z = starts[t] - 1 - prev_end
        sz = delta_size(z + 1) + delta_size(lengths[t])
        if nb == 0 or used + sz > block_bits:
            cum_bits[nb] = prev_end
            cum_ones[nb] = ones
            nb += 1
            used = 0
        p = (nb - 1) * block_bits + used
        p = write_delta(payload, p, z + 1)
        p = write_delta(payload, p, lengths[t])
        used = p - (nb - 1) * block_bits
        prev_end = starts[t] + lengths[t] - 1
        ones += lengths[t]
    cum_bits[nb] = prev_end
    cum_ones[nb] = ones


@njit(cache=True)
def _pairs_walk_rank1(payload, p, pos, ones, i):
    while True:
        z, p = read_delta(payload, p)
        z -= 1
        r, p = read_delta(payload, p)
        if i <= pos + z:
            return ones
        pos += z
        if i <= pos + r:
            return ones + (i - pos)
        pos += r
        ones += r


@njit(cache=True)
def _pairs_walk_select1(payload, p, pos, ones, k):
    while True:
        z, p = read_delta(payload, p)
        z -= 1
        r, p = read_delta(payload, p)
        pos += z
        if k <= ones + r:
            return pos + (k - ones)
        pos += r
        ones += r


@njit(cache=True)
def _pairs_walk_select0(payload, p, pos, ones, k):
    zeros = pos - ones
    while True:
        z, p = read_delta(payload, p)
        z -= 1
        r, p = read_delta(payload, p)
        if k <= zeros + z:
            return pos + (k - zeros)
        pos += z
        zeros += z
        pos += r


@njit(cache=True)
def _pairs_walk_access(payload, p, pos, i):
    while True:
        z, p = read_delta(payload, p)
        z -= 1
        r, p = read_delta(payload, p)
        if i <= pos + z:
            return np.int64(0)
        pos += z
        if i <= pos + r:
            return np.int64(1)
        pos += r


@njit(cache=True)
def _pairs_measure_by_ones(starts, lengths, ones_cut):
    nb = 0
    total_bits = np.int64(0)
    block_ones = np.int64(0)
    prev_end = np.int64(0)
    for t in range(len(starts)):
        z = starts[t] - 1 - prev_end
        if nb == 0 or block_ones >= ones_cut:
            nb += 1
            block_ones = 0
        total_bits += delta_size(z + 1) + delta_size(lengths[t])
        block_ones += lengths[t]
        prev_end = starts[t] + lengths[t] - 1
    return nb, total_bits


@njit(cache=True)
def _pairs_encode_by_ones(
    starts, lengths, ones_cut, payload, start_bit, end_pos, end_ones
):
    nb = -1
    block_ones = np.int64(0)
    prev_end = np.int64(0)
    ones = np.int64(0)
    p = np.int64(0)
    for t in range(len(starts)):
        z = starts[t] - 1 - prev_end
        if nb < 0 or block_ones >= ones_cut:
            if nb >= 0:
                end_pos[nb] = prev_end
                end_ones[nb] = ones
            nb += 1
            block_ones = 0
            start_bit[nb] = p
        p = write_delta(payload, p, z + 1)
        p = write_delta(payload, p, lengths[t])
        prev_end = starts[t] + lengths[t] - 1
        ones += lengths[t]
        block_ones += lengths[t]
    if nb >= 0:
        end_pos[nb] = prev_end
        end_ones[nb] = ones


@njit(cache=True)
def _gaps_measure(positions, block_bits):
    nb = 0
    used = 0
    prev = np.int64(0)
    for t in range(len(positions)):
        sz = delta_size(positions[t] - prev)
        if nb == 0 or used + sz > block_bits:
            nb += 1
            used = 0
        used += sz
        prev = positions[t]
    return nb


@njit(cache=True)
def _gaps_encode(positions, block_bits, payload, cum_bits, cum_ones):
    nb = 0
    used = 0
    prev = np.int64(0)
    for t in range(len(positions)):
        sz = delta_size(positions[t] - prev)
        if nb == 0 or used + sz > block_bits:
            cum_bits[nb] = prev
            cum_ones[nb] = t
            nb += 1
            used = 0
        p = (nb - 1) * block_bits + used
        p = write_delta(payload, p, positions[t] - prev)
        used = p - (nb - 1) * block_bits
        prev = positions[t]
    cum_bits[nb] = prev
    cum_ones[nb] = len(positions)


@njit(cache=True)
def _gaps_walk_rank1(payload, p, pos, ones, end_ones, i):
    # the ones budget stops the walk when i is the block's final position,
    # where the position test alone would run into the padding bits
    while ones < end_ones:
        d, p = read_delta(payload, p)
        if pos + d > i:
            break
        pos += d
        ones += 1
    return ones


@njit(cache=True)
def _gaps_walk_select1(payload, p, pos, ones, k):
    while True:
        d, p = read_delta(payload, p)
        pos += d
        ones += 1
        if ones == k:
            return pos


@njit(cache=True)
def _gaps_walk_select0(payload, p, pos, ones, k):
    zeros = pos - ones
    while True:
        d, p = read_delta(payload, p)
        if k <= zeros + d - 1:
            return pos + (k - zeros)
        zeros += d - 1
        pos += d


@njit(cache=True)
def _gaps_walk_access(payload, p, pos, i):
    while True:
        d, p = read_delta(payload, p)
        pos += d
        if pos == i:
            return np.int64(1)
        if pos > i:
            return np.int64(0)


# ---------------------------------------------------------------------------
# sparse (low/high split) kernels


@njit(cache=True)
def _sparse_rank1(words, cum, sb_words, low, w, count, high_max, i):
    if i <= 0 or count == 0:
        return np.int64(0)
    v = i - 1
    h = v >> w
    if h > high_max:
        return np.int64(count)
    if h == 0:
        a = np.int64(0)
    else:
        a = _plain_select0(words, cum, sb_words, h) - h
    b = _plain_select0(words, cum, sb_words, h + 1) - (h + 1)
    vlow = v & ((np.int64(1) << w) - 1) if w > 0 else np.int64(0)
    lo, hi = a, b  # count items in [a, b) with low value <= vlow
    while lo < hi:
        mid = (lo + hi) // 2
        if unpack_at(low, w, mid) <= vlow:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _sparse_select1(words, cum, sb_words, low, w, k):
    u = _plain_select1(words, cum, sb_words, k) - 1
    high = u - (k - 1)
    return ((high << w) | unpack_at(low, w, k - 1)) + 1


class Bitvector:
    """Shared contract and serialization frame for the encodings."""

    encoding = ""

    def __init__(self, length: int, ones: int):
        if length <= 0:
            raise RangeInvalid("bitvector length must be positive")
        self.length = int(length)
        self.ones = int(ones)
        self._serialized: bytes | None = None

    # encoding-specific
    def _payload(self) -> bytes:
        raise NotImplementedError

    def access(self, i: int) -> int:
        raise NotImplementedError

    def rank1(self, i: int) -> int:
        raise NotImplementedError

    def select1(self, k: int) -> int:
        raise NotImplementedError

    def select0(self, k: int) -> int:
        raise NotImplementedError

    # shared
    def rank0(self, i: int) -> int:
        self._check_rank(i)
        return i - self.rank1(i)

    def select1_ext(self, k: int) -> int:
        """select1 extended with the conventions k=0 -> 0, k=ones+1 -> length+1."""
        if k == 0:
            return 0
        if k == self.ones + 1:
            return self.length + 1
        return self.select1(k)

    def _check_rank(self, i: int):
        if not 0 <= i <= self.length:
            raise RangeInvalid(f"rank index {i} outside [0, {self.length}]")

    def _check_access(self, i: int):
        if not 1 <= i <= self.length:
            raise RangeInvalid(f"position {i} outside [1, {self.length}]")

    def _check_select1(self, k: int):
        if not 1 <= k <= self.ones:
            raise SelectOutOfRange(f"select1({k}) with {self.ones} ones")

    def _check_select0(self, k: int):
        if not 1 <= k <= self.length - self.ones:
            raise SelectOutOfRange(
                f"select0({k}) with {self.length - self.ones} zeros"
            )

    def serialize(self) -> bytes:
        if self._serialized is None:
            payload = self._payload()
            self._serialized = (
                _HEADER.pack(_TAGS[self.encoding], self.length, self.ones, len(payload))
                + payload
            )
        return self._serialized

    def size_in_bits(self) -> int:
        return 8 * len(self.serialize())

    def ones_positions(self) -> np.ndarray:
        return np.array([self.select1(k) for k in range(1, self.ones + 1)], np.int64)

    def to_bits(self) -> np.ndarray:
        bits = np.zeros(self.length, np.uint8)
        pos = self.ones_positions()
        if len(pos):
            bits[pos - 1] = 1
        return bits

    def __repr__(self):
        return f"<{type(self).__name__} n={self.length} ones={self.ones}>"


def _ser_array(a: np.ndarray) -> bytes:
    raw = np.ascontiguousarray(a, dtype="<i8").tobytes()
    return struct.pack("<Q", len(raw)) + raw


def _de_array(buf: bytes, off: int):
    (nraw,) = struct.unpack_from("<Q", buf, off)
    off += 8
    a = np.frombuffer(buf, dtype="<i8", count=nraw // 8, offset=off).astype(np.int64)
    return a, off + nraw


def _ser_bytes(b: bytes) -> bytes:
    return struct.pack("<Q", len(b)) + b


def _de_bytes(buf: bytes, off: int):
    (nraw,) = struct.unpack_from("<Q", buf, off)
    off += 8
    return buf[off : off + nraw], off + nraw


class PlainBits(Bitvector):
    encoding = "plain"

    def __init__(self, length, ones, words, cum):
        super().__init__(length, ones)
        self.words = words
        self.cum = cum

    @classmethod
    def from_bits(cls, bits: np.ndarray):
        bits = np.asarray(bits, np.uint8)
        packed = np.packbits(bits, bitorder="little")
        pad = (-len(packed)) % 8
        if pad:
            packed = np.concatenate((packed, np.zeros(pad, np.uint8)))
        words = packed.view(np.uint64)
        cum = _plain_dir(words, PLAIN_SB_WORDS)
        return cls(len(bits), int(cum[-1]), words, cum)

    def _payload(self):
        return _ser_bytes(self.words.tobytes()) + _ser_array(self.cum)

    @classmethod
    def _from_payload(cls, length, ones, buf, off):
        raw, off = _de_bytes(buf, off)
        words = np.frombuffer(raw, dtype="<u8").astype(np.uint64)
        cum, off = _de_array(buf, off)
        return cls(length, ones, words, cum)

    def access(self, i):
        self._check_access(i)
        return int(self.words[(i - 1) >> 6] >> np.uint64((i - 1) & 63)) & 1

    def rank1(self, i):
        self._check_rank(i)
        return int(_plain_rank1(self.words, self.cum, PLAIN_SB_WORDS, i))

    def select1(self, k):
        self._check_select1(k)
        return int(_plain_select1(self.words, self.cum, PLAIN_SB_WORDS, k))

    def select0(self, k):
        self._check_select0(k)
        return int(_plain_select0(self.words, self.cum, PLAIN_SB_WORDS, k))


class SparseBits(Bitvector):
    """Positions of the ones split into packed low bits and unary-coded highs."""

    encoding = "sparse"

    def __init__(self, length, ones, w, low, high: PlainBits):
        super().__init__(length, ones)
        self.w = w
        self.low = low
        self.high = high
        # largest populated high group; the unary vector holds high_max+1 zeros
        self._high_max = high.length - high.ones - 1

    @staticmethod
    def _cost(n, k, w):
        ulen = k + ((n - 1) >> w) + 1
        dir_bits = 64 * (((ulen + 63) // 64 + PLAIN_SB_WORDS - 1) // PLAIN_SB_WORDS + 1)
        return k * w + ulen + dir_bits

    @classmethod
    def from_positions(cls, length: int, positions: np.ndarray):
        positions = np.asarray(positions, np.int64)
        k = len(positions)
        if k == 0:
            high = PlainBits.from_bits(np.zeros(1, np.uint8))
            return cls(length, 0, 0, np.zeros(1, np.uint8), high)
        vals = positions - 1
        best_w = 0
        best = None
        for w in range(0, max(1, int(length).bit_length()) + 1):
            c = cls._cost(length, k, w)
            if best is None or c < best:
                best, best_w = c, w
        w = best_w
        low = pack_width(vals & ((1 << w) - 1), w) if w else np.zeros(1, np.uint8)
        highs = vals >> w
        ubits = np.zeros(k + int(highs[-1]) + 1, np.uint8)
        ubits[highs + np.arange(k, dtype=np.int64)] = 1
        return cls(length, k, w, low, PlainBits.from_bits(ubits))

    @classmethod
    def from_bits(cls, bits: np.ndarray):
        positions = np.flatnonzero(np.asarray(bits, np.uint8)).astype(np.int64) + 1
        return cls.from_positions(len(bits), positions)

    def _payload(self):
        return (
            struct.pack("<BQ", self.w, self.ones)
            + _ser_bytes(self.low.tobytes())
            + self.high.serialize()
        )

    @classmethod
    def _from_payload(cls, length, ones, buf, off):
        w, k = struct.unpack_from("<BQ", buf, off)
        off += 9
        raw, off = _de_bytes(buf, off)
        low = np.frombuffer(raw, np.uint8).copy()
        high, _ = decode(buf, off)
        return cls(length, ones, w, low, high)

    def access(self, i):
        self._check_access(i)
        return self.rank1(i) - self.rank1(i - 1)

    def rank1(self, i):
        self._check_rank(i)
        return int(
            _sparse_rank1(
                self.high.words,
                self.high.cum,
                PLAIN_SB_WORDS,
                self.low,
                self.w,
                self.ones,
                self._high_max,
                i,
            )
        )

    def select1(self, k):
        self._check_select1(k)
        return int(
            _sparse_select1(
                self.high.words, self.high.cum, PLAIN_SB_WORDS, self.low, self.w, k
            )
        )

    def select0(self, k):
        self._check_select0(k)
        lo, hi = 0, self.ones  # smallest t with zeros before one t+1 >= k
        while lo < hi:
            mid = (lo + hi) // 2
            if self.select1_ext(mid + 1) - (mid + 1) >= k:
                hi = mid
            else:
                lo = mid + 1
        return k + lo


class TwoSparseBits(Bitvector):
    """Run-length form: sparse 1-run start positions plus cumulative lengths."""

    encoding = "rle_two_sparse"

    def __init__(self, length, ones, starts: SparseBits, cumlen: SparseBits):
        super().__init__(length, ones)
        self.starts = starts
        self.cumlen = cumlen
        self.n_runs = starts.ones

    @classmethod
    def from_runs(cls, length: int, starts, lengths):
        starts = np.asarray(starts, np.int64)
        lengths = np.asarray(lengths, np.int64)
        ones = int(lengths.sum())
        sv = SparseBits.from_positions(length, starts)
        cv = SparseBits.from_positions(max(ones, 1), np.cumsum(lengths))
        return cls(length, ones, sv, cv)

    @classmethod
    def from_bits(cls, bits):
        starts, lengths = runs_from_bits(bits)
        return cls.from_runs(len(bits), starts, lengths)

    def _payload(self):
        return self.starts.serialize() + self.cumlen.serialize()

    @classmethod
    def _from_payload(cls, length, ones, buf, off):
        sv, off = decode(buf, off)
        cv, _ = decode(buf, off)
        return cls(length, ones, sv, cv)

    def _run(self, t):
        """Start position and cumulative ones before/through run t."""
        s = self.starts.select1(t)
        c0 = self.cumlen.select1(t - 1) if t > 1 else 0
        c1 = self.cumlen.select1(t)
        return s, c0, c1

    def rank1(self, i):
        self._check_rank(i)
        if self.n_runs == 0 or i <= 0:
            return 0
        t = self.starts.rank1(i)
        if t == 0:
            return 0
        s, c0, c1 = self._run(t)
        return c0 + min(i - s + 1, c1 - c0)

    def select1(self, k):
        self._check_select1(k)
        t = self.cumlen.rank1(k - 1) + 1
        s, c0, _ = self._run(t)
        return s + (k - c0 - 1)

    def select0(self, k):
        self._check_select0(k)
        if self.n_runs == 0:
            return k
        lo, hi = 1, self.n_runs + 1  # smallest run t with zeros before its start >= k
        while lo < hi:
            mid = (lo + hi) // 2
            if self._zeros_before_run(mid) >= k:
                hi = mid
            else:
                lo = mid + 1
        if lo > self.n_runs:
            return self._tail_zero(k)
        s, c0, _ = self._run(lo)
        z = s - 1 - c0
        return s - 1 - (z - k)

    def _zeros_before_run(self, t):
        if t > self.n_runs:
            return self.length - self.ones
        s, c0, _ = self._run(t)
        return s - 1 - c0

    def _tail_zero(self, k):
        # k-th zero lies after the final run
        last_end = self.starts.select1(self.n_runs) + (
            self.cumlen.select1(self.n_runs)
            - (self.cumlen.select1(self.n_runs - 1) if self.n_runs > 1 else 0)
        ) - 1
        zeros_before = last_end - self.ones
        return last_end + (k - zeros_before)

    def access(self, i):
        self._check_access(i)
        if self.n_runs == 0:
            return 0
        t = self.starts.rank1(i)
        if t == 0:
            return 0
        s, c0, c1 = self._run(t)
        return 1 if i - s + 1 <= c1 - c0 else 0


class _BlockedStream(Bitvector):
    """Shared frame for the fixed-block delta-stream encodings."""

    def __init__(self, length, ones, payload, cum_bits, cum_ones):
        super().__init__(length, ones)
        self.payload = payload
        self.cum_bits = cum_bits
        self.cum_ones = cum_ones
        self.n_blocks = len(cum_bits) - 1

    _block_bits = RLE_BLOCK_BYTES * 8

    def _payload(self):
        return (
            struct.pack("<IQ", RLE_BLOCK_BYTES, self.n_blocks)
            + _ser_array(self.cum_bits)
            + _ser_array(self.cum_ones)
            + _ser_bytes(self.payload.tobytes())
        )

    @classmethod
    def _from_payload(cls, length, ones, buf, off):
        _bb, _nb = struct.unpack_from("<IQ", buf, off)
        off += 12
        cum_bits, off = _de_array(buf, off)
        cum_ones, off = _de_array(buf, off)
        raw, off = _de_bytes(buf, off)
        return cls(length, ones, np.frombuffer(raw, np.uint8).copy(), cum_bits, cum_ones)

    def _block_for_pos(self, i):
        return int(np.searchsorted(self.cum_bits, i, side="left")) - 1

    def _block_for_one(self, k):
        return int(np.searchsorted(self.cum_ones, k, side="left")) - 1

    def _block_for_zero(self, k):
        zeros = self.cum_bits - self.cum_ones
        return int(np.searchsorted(zeros, k, side="left")) - 1

    def _bases(self, b):
        return (
            b * self._block_bits,
            int(self.cum_bits[b]),
            int(self.cum_ones[b]),
        )


class RleBlockBits(_BlockedStream):
    encoding = "rle_block"

    @classmethod
    def from_runs(cls, length, starts, lengths):
        starts = np.asarray(starts, np.int64)
        lengths = np.asarray(lengths, np.int64)
        ones = int(lengths.sum())
        nb = _pairs_measure(starts, lengths, cls._block_bits) if len(starts) else 0
        payload = np.zeros(nb * RLE_BLOCK_BYTES, np.uint8)
        cum_bits = np.zeros(nb + 1, np.int64)
        cum_ones = np.zeros(nb + 1, np.int64)
        if len(starts):
            _pairs_encode(starts, lengths, cls._block_bits, payload, cum_bits, cum_ones)
        return cls(length, ones, payload, cum_bits, cum_ones)

    @classmethod
    def from_bits(cls, bits):
        starts, lengths = runs_from_bits(bits)
        return cls.from_runs(len(bits), starts, lengths)

    def rank1(self, i):
        self._check_rank(i)
        if self.ones == 0 or i <= 0:
            return 0
        if i >= self.cum_bits[-1]:
            return self.ones
        b = self._block_for_pos(i)
        p, pos, ones = self._bases(b)
        return int(_pairs_walk_rank1(self.payload, p, pos, ones, i))

    def select1(self, k):
        self._check_select1(k)
        b = self._block_for_one(k)
        p, pos, ones = self._bases(b)
        return int(_pairs_walk_select1(self.payload, p, pos, ones, k))

    def select0(self, k):
        self._check_select0(k)
        covered_zeros = int(self.cum_bits[-1] - self.cum_ones[-1])
        if k > covered_zeros:
            return int(self.cum_bits[-1]) + (k - covered_zeros)
        b = self._block_for_zero(k)
        p, pos, ones = self._bases(b)
        return int(_pairs_walk_select0(self.payload, p, pos, ones, k))

    def access(self, i):
        self._check_access(i)
        if self.ones == 0 or i > self.cum_bits[-1]:
            return 0
        b = self._block_for_pos(i)
        p, pos, _ = self._bases(b)
        return int(_pairs_walk_access(self.payload, p, pos, i))


class GapBits(_BlockedStream):
    encoding = "gap"

    @classmethod
    def from_positions(cls, length, positions):
        positions = np.asarray(positions, np.int64)
        nb = _gaps_measure(positions, cls._block_bits) if len(positions) else 0
        payload = np.zeros(nb * RLE_BLOCK_BYTES, np.uint8)
        cum_bits = np.zeros(nb + 1, np.int64)
        cum_ones = np.zeros(nb + 1, np.int64)
        if len(positions):
            _gaps_encode(positions, cls._block_bits, payload, cum_bits, cum_ones)
        return cls(length, len(positions), payload, cum_bits, cum_ones)

    @classmethod
    def from_bits(cls, bits):
        positions = np.flatnonzero(np.asarray(bits, np.uint8)).astype(np.int64) + 1
        return cls.from_positions(len(bits), positions)

    @classmethod
    def from_runs(cls, length, starts, lengths):
        return cls.from_bits(bits_from_runs(length, starts, lengths))

    def rank1(self, i):
        self._check_rank(i)
        if self.ones == 0 or i <= 0:
            return 0
        if i >= self.cum_bits[-1]:
            return self.ones
        b = self._block_for_pos(i)
        p, pos, ones = self._bases(b)
        end_ones = int(self.cum_ones[b + 1])
        return int(_gaps_walk_rank1(self.payload, p, pos, ones, end_ones, i))

    def select1(self, k):
        self._check_select1(k)
        b = self._block_for_one(k)
        p, pos, ones = self._bases(b)
        return int(_gaps_walk_select1(self.payload, p, pos, ones, k))

    def select0(self, k):
        self._check_select0(k)
        covered_zeros = int(self.cum_bits[-1] - self.cum_ones[-1])
        if k > covered_zeros:
            return int(self.cum_bits[-1]) + (k - covered_zeros)
        b = self._block_for_zero(k)
        p, pos, ones = self._bases(b)
        return int(_gaps_walk_select0(self.payload, p, pos, ones, k))

    def access(self, i):
        self._check_access(i)
        if self.ones == 0 or i > self.cum_bits[-1]:
            return 0
        b = self._block_for_pos(i)
        p, pos, _ = self._bases(b)
        return int(_gaps_walk_access(self.payload, p, pos, i))


class DeltaRleBits(Bitvector):
    """Delta-coded runs cut into blocks of DELTA_RLE_ONES ones with sparse directories."""

    encoding = "delta_rle"

    def __init__(self, length, ones, payload, payload_bits, end_pos, end_ones, start_bit):
        super().__init__(length, ones)
        self.payload = payload
        self.payload_bits = payload_bits
        self.end_pos = end_pos  # SparseBits over positions covered
        self.end_ones = end_ones  # SparseBits over ones covered
        self.start_bit = start_bit  # SparseBits over payload bit offsets + 1
        self.n_blocks = end_pos.ones

    @classmethod
    def from_runs(cls, length, starts, lengths):
        starts = np.asarray(starts, np.int64)
        lengths = np.asarray(lengths, np.int64)
        ones = int(lengths.sum())
        if len(starts) == 0:
            ep = SparseBits.from_positions(length, np.zeros(0, np.int64))
            eo = SparseBits.from_positions(1, np.zeros(0, np.int64))
            sb = SparseBits.from_positions(1, np.zeros(0, np.int64))
            return cls(length, 0, np.zeros(1, np.uint8), 0, ep, eo, sb)
        nb, total_bits = _pairs_measure_by_ones(starts, lengths, DELTA_RLE_ONES)
        payload = np.zeros((int(total_bits) + 7) // 8 + 1, np.uint8)
        a_start = np.zeros(nb, np.int64)
        a_pos = np.zeros(nb, np.int64)
        a_ones = np.zeros(nb, np.int64)
        _pairs_encode_by_ones(
            starts, lengths, DELTA_RLE_ONES, payload, a_start, a_pos, a_ones
        )
        ep = SparseBits.from_positions(length, a_pos)
        eo = SparseBits.from_positions(max(ones, 1), a_ones)
        sb = SparseBits.from_positions(int(total_bits) + 1, a_start + 1)
        return cls(length, ones, payload, int(total_bits), ep, eo, sb)

    @classmethod
    def from_bits(cls, bits):
        starts, lengths = runs_from_bits(bits)
        return cls.from_runs(len(bits), starts, lengths)

    def _payload(self):
        return (
            struct.pack("<IQ", DELTA_RLE_ONES, self.payload_bits)
            + _ser_bytes(self.payload.tobytes())
            + self.end_pos.serialize()
            + self.end_ones.serialize()
            + self.start_bit.serialize()
        )

    @classmethod
    def _from_payload(cls, length, ones, buf, off):
        _cut, pbits = struct.unpack_from("<IQ", buf, off)
        off += 12
        raw, off = _de_bytes(buf, off)
        ep, off = decode(buf, off)
        eo, off = decode(buf, off)
        sb, off = decode(buf, off)
        return cls(length, ones, np.frombuffer(raw, np.uint8).copy(), pbits, ep, eo, sb)

    def _bases(self, b):
        p = self.start_bit.select1(b + 1) - 1
        pos = self.end_pos.select1(b) if b else 0
        ones = self.end_ones.select1(b) if b else 0
        return p, pos, ones

    def rank1(self, i):
        self._check_rank(i)
        if self.ones == 0 or i <= 0:
            return 0
        last = self.end_pos.select1(self.n_blocks)
        if i >= last:
            return self.ones
        b = self.end_pos.rank1(i - 1)
        p, pos, ones = self._bases(b)
        return int(_pairs_walk_rank1(self.payload, p, pos, ones, i))

    def select1(self, k):
        self._check_select1(k)
        b = self.end_ones.rank1(k - 1)
        p, pos, ones = self._bases(b)
        return int(_pairs_walk_select1(self.payload, p, pos, ones, k))

    def select0(self, k):
        self._check_select0(k)
        if self.ones == 0:
            return k
        last = self.end_pos.select1(self.n_blocks)
        covered_zeros = last - self.ones
        if k > covered_zeros:
            return last + (k - covered_zeros)
        lo, hi = 0, self.n_blocks - 1  # first block whose covered zeros reach k
        while lo < hi:
            mid = (lo + hi) // 2
            if self.end_pos.select1(mid + 1) - self.end_ones.select1(mid + 1) >= k:
                hi = mid
            else:
                lo = mid + 1
        p, pos, ones = self._bases(lo)
        return int(_pairs_walk_select0(self.payload, p, pos, ones, k))

    def access(self, i):
        self._check_access(i)
        if self.ones == 0:
            return 0
        last = self.end_pos.select1(self.n_blocks)
        if i > last:
            return 0
        b = self.end_pos.rank1(i - 1)
        p, pos, _ = self._bases(b)
        return int(_pairs_walk_access(self.payload, p, pos, i))


_CLASSES = {
    "plain": PlainBits,
    "rle_block": RleBlockBits,
    "rle_two_sparse": TwoSparseBits,
    "gap": GapBits,
    "delta_rle": DeltaRleBits,
    "sparse": SparseBits,
}


def encode(bits: np.ndarray, encoding: str) -> Bitvector:
    """Encode a logical bit array (index i holds position i+1)."""
    if encoding not in _CLASSES:
        raise FormatError(f"unknown encoding {encoding!r}; expected one of {ENCODINGS}")
    return _CLASSES[encoding].from_bits(bits)


def encode_runs(length: int, starts, lengths, encoding: str) -> Bitvector:
    """Encode from maximal 1-runs without materializing the bit array if possible."""
    if encoding not in _CLASSES:
        raise FormatError(f"unknown encoding {encoding!r}; expected one of {ENCODINGS}")
    cls = _CLASSES[encoding]
    if hasattr(cls, "from_runs"):
        return cls.from_runs(length, starts, lengths)
    return cls.from_bits(bits_from_runs(length, starts, lengths))


def decode(buf: bytes, offset: int = 0):
    """Decode one serialized bitvector record; returns (vector, next offset)."""
    if len(buf) < offset + _HEADER.size:
        raise FormatError("truncated bitvector record")
    tag, length, ones, plen = _HEADER.unpack_from(buf, offset)
    if tag not in _NAMES:
        raise FormatError(f"unknown bitvector tag {tag}")
    off = offset + _HEADER.size
    if len(buf) < off + plen:
        raise FormatError("truncated bitvector payload")
    cls = _CLASSES[_NAMES[tag]]
    vec = cls._from_payload(length, ones, buf, off)
    vec._serialized = bytes(buf[offset : off + plen])
    return vec, off + plen
