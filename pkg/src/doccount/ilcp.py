"""Interleaved-LCP counting: per-document LCP values in global suffix order.

ILCP[i] is the LCP value of suffix SA[i] inside the LCP array of its own
document.  Because documents end with the sentinel, comparisons between two
suffixes of the same document are decided no later than the shorter one's
sentinel, so the document's suffixes appear in the global suffix array in
exactly their local order.  That makes ILCP[i] < |P| hold precisely when i is
the first occurrence of document DA[i] inside the locus range, so counting
distinct documents reduces to counting small values in ILCP[sp, ep].

Two index modes answer that range count: a levelwise wavelet tree over the
plain values, and one over the run heads only, weighted by run lengths via
per-level prefix sums.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import bitvec
from .bitvec import _de_array, _ser_array
from .corpus import Collection
from .errors import FormatError, RangeInvalid
from .suffix import TextIndex

MODES = ("plain_wt", "rle_wt")

# Default bitvector encoding for the wavelet-tree levels of each mode.
LEVEL_ENCODING = {"plain_wt": "plain", "rle_wt": "rle_two_sparse"}


@njit(cache=True)
def _ilcp_kernel(text, sa, da, starts, n_docs, ilcp):
    """Per-document Kasai over the restriction of the global suffix array."""
    n = len(sa) - 1
    cnt = np.zeros(n_docs + 2, np.int64)
    for i in range(1, n + 1):
        cnt[da[i]] += 1
    off = np.zeros(n_docs + 2, np.int64)
    for j in range(1, n_docs + 1):
        off[j + 1] = off[j] + cnt[j]
    slot_local = np.empty(n, np.int32)
    slot_glob = np.empty(n, np.int32)
    fill = off.copy()
    for i in range(1, n + 1):
        j = da[i]
        k = fill[j]
        slot_local[k] = sa[i] - 1 - starts[j - 1]
        slot_glob[k] = i
        fill[j] += 1
    rank = np.empty(n, np.int32)
    for j in range(1, n_docs + 1):
        lo = off[j]
        m = off[j + 1] - lo
        base = starts[j - 1]
        for k in range(m):
            rank[lo + slot_local[lo + k]] = k
        h = 0
        for p in range(m):
            k = rank[lo + p]
            if k == 0:
                ilcp[slot_glob[lo]] = 0
                h = 0
                continue
            q = slot_local[lo + k - 1]
            while text[base + p + h] == text[base + q + h]:
                h += 1
            ilcp[slot_glob[lo + k]] = h
            if h > 0:
                h -= 1


@dataclass
class IlcpArray:
    """ILCP values, 1-based (slot 0 unused)."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def runs(self):
        """(heads, lengths) of maximal equal-value runs, in order."""
        v = self.values[1:]
        if len(v) == 0:
            return np.zeros(0, np.int32), np.zeros(0, np.int64)
        breaks = np.flatnonzero(np.diff(v) != 0)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [len(v) - 1]))
        return v[starts].copy(), (ends - starts + 1).astype(np.int64)


def build_ilcp(idx: TextIndex, c: Collection) -> IlcpArray:
    values = np.zeros(idx.n + 1, np.int32)
    text = np.frombuffer(c.text, np.uint8)
    _ilcp_kernel(text, idx.sa, idx.da, c.doc_offsets, c.d, values)
    return IlcpArray(values)


class IlcpIndex:
    """Wavelet tree over ILCP (plain values or run heads), for range counting."""

    def __init__(self, mode, n, width, max_value, levels, cums, run_starts, label=""):
        self.mode = mode
        self.n = n
        self.width = width
        self.max_value = max_value
        self.levels = levels
        self.cums = cums  # per level 1..width, prefix sums of routed run lengths
        self.run_starts = run_starts
        self.label = label or ("ilcp-rl" if mode == "rle_wt" else "ilcp-plain")

    # Counting within the run/value sequence the levels were built over.
    def _count_less_seq(self, a, b, bound, weighted):
        count = 0
        nb, ne = 1, self.levels[0].length
        for t in range(self.width):
            if a > b:
                return count
            bv = self.levels[t]
            z0 = bv.rank0(nb - 1)
            z_node = bv.rank0(ne) - z0
            z_a = bv.rank0(a - 1) - z0
            z_b = bv.rank0(b) - z0
            if (bound >> (self.width - 1 - t)) & 1 == 0:
                a = nb + z_a
                b = nb + z_b - 1
                ne = nb + z_node - 1
            else:
                if z_b > z_a:
                    if weighted:
                        cum = self.cums[t]
                        count += cum[nb + z_b - 1] - cum[nb + z_a - 1]
                    else:
                        count += z_b - z_a
                a = nb + z_node + ((a - 1 - (nb - 1)) - z_a)
                b = nb + z_node + ((b - (nb - 1)) - z_b) - 1
                nb = nb + z_node
        return count

    def count_less(self, l: int, r: int, bound: int) -> int:
        if not 1 <= l <= r <= self.n:
            raise RangeInvalid(f"range [{l},{r}] outside [1,{self.n}]")
        if bound <= 0:
            return 0
        if bound > self.max_value:
            return r - l + 1
        if self.mode == "plain_wt":
            return self._count_less_seq(l, r, bound, weighted=False)
        rs = self.run_starts
        ra = rs.rank1(l)
        rb = rs.rank1(r)
        if ra == rb:
            return (r - l + 1) * self._count_less_seq(ra, ra, bound, False)
        first_end = rs.select1(ra + 1) - 1
        total = (first_end - l + 1) * self._count_less_seq(ra, ra, bound, False)
        total += (r - rs.select1(rb) + 1) * self._count_less_seq(rb, rb, bound, False)
        if rb - 1 >= ra + 1:
            total += self._count_less_seq(ra + 1, rb - 1, bound, True)
        return total

    def size_in_bits(self) -> int:
        return 8 * len(self.serialize())

    def serialize(self) -> bytes:
        head = struct.pack(
            "<BBQQ",
            MODES.index(self.mode),
            self.width,
            self.n,
            self.max_value,
        )
        parts = [head]
        for bv in self.levels:
            parts.append(bv.serialize())
        if self.mode == "rle_wt":
            parts.append(self.run_starts.serialize())
            for cum in self.cums:
                parts.append(_ser_array(cum))
        return b"".join(parts)

    @classmethod
    def deserialize(cls, buf: bytes) -> "IlcpIndex":
        mode_i, width, n, max_value = struct.unpack_from("<BBQQ", buf, 0)
        off = struct.calcsize("<BBQQ")
        mode = MODES[mode_i]
        levels = []
        for _ in range(width):
            bv, off = bitvec.decode(buf, off)
            levels.append(bv)
        cums = run_starts = None
        if mode == "rle_wt":
            run_starts, off = bitvec.decode(buf, off)
            cums = []
            for _ in range(width):
                arr, off = _de_array(buf, off)
                cums.append(arr)
        return cls(mode, n, width, max_value, levels, cums, run_starts)


def build_ilcp_index(
    arr: IlcpArray, mode: str, level_encoding: str | None = None
) -> IlcpIndex:
    if mode not in MODES:
        raise FormatError(f"unknown mode {mode!r}; expected one of {MODES}")
    enc = level_encoding or LEVEL_ENCODING[mode]
    if mode == "plain_wt":
        seq0 = arr.values[1:].astype(np.int64)
        lengths = None
    else:
        heads, lengths = arr.runs()
        seq0 = heads.astype(np.int64)
    n = arr.n
    max_value = int(seq0.max()) if len(seq0) else 0
    width = max(1, max_value.bit_length())
    levels = []
    cums = [] if mode == "rle_wt" else None
    for t in range(width):
        if t == 0:
            order = np.arange(len(seq0))
        else:
            order = np.argsort(seq0 >> (width - t), kind="stable")
        seq = seq0[order]
        bits = ((seq >> (width - 1 - t)) & 1).astype(np.uint8)
        levels.append(bitvec.encode(bits, enc))
        if mode == "rle_wt":
            # cum for level t+1: the order after routing through level t
            nxt = np.argsort(seq0 >> (width - 1 - t), kind="stable")
            cums.append(np.concatenate(([0], np.cumsum(lengths[nxt]))))
    run_starts = None
    if mode == "rle_wt":
        starts_pos = np.concatenate(([0], np.cumsum(lengths[:-1]))) + 1
        run_starts = bitvec.SparseBits.from_positions(n, starts_pos.astype(np.int64))
    return IlcpIndex(mode, n, width, max_value, levels, cums, run_starts)


def count_ilcp(ix: IlcpIndex, r, pattern_len: int) -> int:
    sp, ep = r
    return ix.count_less(sp, ep, pattern_len)


def range_count_less_than(wt: IlcpIndex, l: int, r: int, bound: int) -> int:
    return wt.count_less(l, r, bound)
