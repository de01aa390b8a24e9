"""Unary-encoded redundancy-count structure and its compressed variants.

The structure stores, for the (virtual) binarized suffix tree, the per-node
redundancy counts H[1, n-1] in inorder, encoded in unary as the bitvector H'
(each value as a 1-bit followed by that many 0-bits).  For a locus range
[sp, ep] the distinct-document count is

    count(sp, ep) = 2(ep - sp) - (select1(H', ep) - select1(H', sp)) + 1

with select1 extended by select1(H', 0) = 0 and select1(H', ones+1) = |H'|+1.
Filtered variants keep only a subset of the cells and adjust the arithmetic;
each variant's formula is written out in count().

Construction never materializes a suffix tree.  Per-pair placement drops each
redundant suffix pair at the cell of the leftmost LCP minimum between the two
occurrences; aggregation regroups all pairs whose lowest common ancestor is a
node v onto v's leftmost child-boundary cell, using the identity that the
distinct-document count of any locus [l, r] equals
(r + 1 - l) - (pairs placed in cells [l, r-1]).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import bitvec
from .errors import FormatError, IncompatiblePlacement, RangeInvalid
from .suffix import TextIndex, _rmq_query

FILTERS = ("none", "count_filter", "sparse_filter", "one_filter", "sparse_plus_one")

# Preset catalogue; the names double as CLI identifiers.
PRESETS = {
    "sada": ("plain", "none", None),
    "sada-rr": ("rle_block", "none", None),
    "sada-rs": ("rle_two_sparse", "none", None),
    "sada-d": ("delta_rle", "none", None),
    "sada-p-g": ("plain", "count_filter", "gap"),
    "sada-p-rr": ("plain", "count_filter", "rle_block"),
    "sada-rr-g": ("rle_block", "count_filter", "gap"),
    "sada-rr-rr": ("rle_block", "count_filter", "rle_block"),
    "sada-s-s": ("sparse", "sparse_filter", "sparse"),
    "sada-s": ("sparse", "sparse_plus_one", "sparse"),
    "sada-rs-s": ("rle_two_sparse", "one_filter", "sparse"),
    "sada-d-s": ("delta_rle", "one_filter", "sparse"),
}


@dataclass(frozen=True)
class SadaVariant:
    hprime_encoding: str
    filter: str = "none"
    filter_encoding: str | None = None

    def __post_init__(self):
        if self.hprime_encoding not in bitvec.ENCODINGS:
            raise FormatError(f"unknown H' encoding {self.hprime_encoding!r}")
        if self.filter not in FILTERS:
            raise FormatError(f"unknown filter {self.filter!r}")
        if self.filter != "none" and self.filter_encoding not in bitvec.ENCODINGS:
            raise FormatError("filtered variants need a filter_encoding")


def variant_from_preset(name: str) -> SadaVariant:
    if name not in PRESETS:
        raise FormatError(
            f"unknown variant {name!r}; valid presets: {', '.join(sorted(PRESETS))}"
        )
    enc, filt, fenc = PRESETS[name]
    return SadaVariant(enc, filt, fenc)


@dataclass
class HArray:
    """Redundancy counts, 1-based cells 1..n-1 (slot 0 unused)."""

    h: np.ndarray
    placement: str

    @property
    def total(self) -> int:
        return int(self.h[1:].sum())


@njit(cache=True)
def _place_pairs(lcp, c_arr, table, bs, h_out):
    n = len(lcp) - 1
    for i in range(2, n + 1):
        ci = c_arr[i]
        if ci >= 1:
            p = _rmq_query(lcp, table, bs, ci + 1, i)
            h_out[p - 1] += 1


@njit(cache=True, inline="always")
def _emit_node(l, r, head, cum, nxt, h_agg, f_mark):
    # docc of any locus [a, b] is (b + 1 - a) - (cum[b-1] - cum[a-1]);
    # valid because per-pair cells of pairs inside a locus never escape it.
    docc_v = (r + 1 - l) - (cum[r - 1] - cum[l - 1])
    children_docc = np.int64(0)
    prev = np.int64(l)
    p = head
    marked = docc_v > 1
    while p != 0:
        children_docc += (p - prev) - (cum[p - 2] - cum[prev - 1])
        if marked:
            f_mark[p - 1] = 1
        prev = p
        p = nxt[p]
    children_docc += (r + 1 - prev) - (cum[r - 1] - cum[prev - 1])
    rv = children_docc - docc_v
    h_agg[head - 1] += rv
    if rv < 0 or head - 1 < l or head - 1 > r - 1:
        return 1
    return 0


@njit(cache=True)
def _aggregate(lcp, cum, h_agg, f_mark):
    """One stack pass over the LCP array: aggregated H and the docc>1 boundary marks."""
    n = len(lcp) - 1
    st_d = np.empty(n + 2, np.int32)
    st_l = np.empty(n + 2, np.int32)
    st_head = np.zeros(n + 2, np.int32)
    st_tail = np.zeros(n + 2, np.int32)
    nxt = np.zeros(n + 1, np.int32)
    top = 0
    st_d[0] = 0
    st_l[0] = 1
    bad = 0
    for i in range(2, n + 1):
        lb = i - 1
        while st_d[top] > lcp[i]:
            if st_head[top] != 0:
                bad += _emit_node(
                    st_l[top], i - 1, st_head[top], cum, nxt, h_agg, f_mark
                )
            lb = st_l[top]
            top -= 1
        if st_d[top] == lcp[i]:
            if st_head[top] == 0:
                st_head[top] = i
            else:
                nxt[st_tail[top]] = i
            st_tail[top] = i
            nxt[i] = 0
        else:
            top += 1
            st_d[top] = lcp[i]
            st_l[top] = lb
            st_head[top] = i
            st_tail[top] = i
            nxt[i] = 0
    while top >= 0:
        if st_head[top] != 0:
            bad += _emit_node(st_l[top], n, st_head[top], cum, nxt, h_agg, f_mark)
        top -= 1
    return bad


class SadaBuilder:
    """Shared construction state so many variants amortize one traversal."""

    def __init__(self, index: TextIndex):
        self.index = index
        self._h_pair = None
        self._cum = None
        self._h_agg = None
        self._f_count = None

    def h_pair(self) -> np.ndarray:
        if self._h_pair is None:
            idx = self.index
            h = np.zeros(idx.n, np.int32)
            _place_pairs(idx.rmq.vals, idx.c, idx.rmq.table, idx.rmq.block, h)
            self._h_pair = h
        return self._h_pair

    def _cumsum(self) -> np.ndarray:
        if self._cum is None:
            self._cum = np.cumsum(self.h_pair(), dtype=np.int64)
        return self._cum

    def _traverse(self):
        if self._h_agg is None:
            idx = self.index
            h_agg = np.zeros(idx.n, np.int32)
            f_mark = np.zeros(idx.n, np.uint8)
            bad = _aggregate(idx.lcp, self._cumsum(), h_agg, f_mark)
            assert bad == 0, "aggregated placement violated node locality"
            self._h_agg = h_agg
            self._f_count = f_mark
        return self._h_agg, self._f_count

    def h_agg(self) -> np.ndarray:
        return self._traverse()[0]

    def f_count_bits(self) -> np.ndarray:
        return self._traverse()[1]

    def build_h(self, placement: str) -> HArray:
        if placement == "per_pair":
            return HArray(self.h_pair(), "per_pair")
        if placement == "aggregated":
            return HArray(self.h_agg(), "aggregated")
        raise FormatError(f"unknown placement {placement!r}")

    def build(
        self, variant: SadaVariant, placement: str = "aggregated", label: str = ""
    ) -> "SadaIndex":
        idx = self.index
        if variant.filter != "none" and placement != "aggregated":
            raise IncompatiblePlacement(
                f"filter {variant.filter!r} requires aggregated placement"
            )
        harr = self.build_h(placement)
        n, d = idx.n, idx.d
        total = harr.total
        assert total <= n - d, "sum of H exceeds the n-d redundancy bound"
        h = harr.h[1:n]  # cells 1..n-1, now 0-based
        filt = variant.filter
        if filt == "none":
            mask = None
            values = h
        elif filt == "count_filter":
            mask = self.f_count_bits()[1:n].astype(bool)
            values = h[mask]
        elif filt == "sparse_filter":
            mask = h > 0
            values = h[mask]
        elif filt == "one_filter":
            mask = h != 1
            values = h[mask]
        else:  # sparse_plus_one
            mask = h > 1
            values = h[mask]

        hprime = bitvec.encode_runs(
            *_unary_runs(values), encoding=variant.hprime_encoding
        )
        f = f1 = None
        if filt == "count_filter":
            f = bitvec.encode(mask.astype(np.uint8), variant.filter_encoding)
        elif filt == "sparse_filter":
            f = bitvec.encode((h > 0).astype(np.uint8), variant.filter_encoding)
        elif filt == "one_filter":
            f1 = bitvec.encode((h == 1).astype(np.uint8), variant.filter_encoding)
        elif filt == "sparse_plus_one":
            f = bitvec.encode((h > 1).astype(np.uint8), variant.filter_encoding)
            f1 = bitvec.encode((h == 1).astype(np.uint8), variant.filter_encoding)
        runs = _runs_of_ones_from_values(values)
        return SadaIndex(variant, hprime, f, f1, n, d, harr.placement, runs, label)


def _unary_runs(values: np.ndarray):
    """(length, starts, lengths) of the 1-runs of the unary encoding of values."""
    values = np.asarray(values, np.int64)
    m = len(values)
    total = m + int(values.sum())
    if m == 0:
        # A filter can retain nothing; keep one physical zero bit so every
        # encoding stays well-formed.  Queries cancel it: both rank endpoints
        # land on 0 and only differences of select1_ext are read.
        return 1, np.zeros(0, np.int64), np.zeros(0, np.int64)
    # the t-th 1-bit sits at position t + sum of values before t
    ones_pos = np.arange(1, m + 1, dtype=np.int64)
    ones_pos[1:] += np.cumsum(values[:-1])
    # collapse consecutive ones (zero-valued cells) into runs
    breaks = np.flatnonzero(np.diff(ones_pos) > 1)
    starts = ones_pos[np.concatenate(([0], breaks + 1))]
    ends = ones_pos[np.concatenate((breaks, [m - 1]))]
    return total, starts, ends - starts + 1


def _runs_of_ones_from_values(values: np.ndarray) -> int:
    if len(values) == 0:
        return 0
    return 1 + int(np.count_nonzero(values[:-1]))


def build_h(index: TextIndex, placement: str) -> HArray:
    return SadaBuilder(index).build_h(placement)


def build_sada(
    index: TextIndex,
    variant: SadaVariant | str,
    placement: str = "aggregated",
) -> "SadaIndex":
    if isinstance(variant, str):
        label = variant
        variant = variant_from_preset(variant)
    else:
        label = ""
    return SadaBuilder(index).build(variant, placement, label)


_ENC_TAG = {name: i for i, name in enumerate(bitvec.ENCODINGS)}
_FILT_TAG = {name: i for i, name in enumerate(FILTERS)}
_PLACE_TAG = {"per_pair": 0, "aggregated": 1}


class SadaIndex:
    """Query-ready counting structure for one variant."""

    def __init__(self, variant, hprime, f, f1, n, d, placement, runs_of_ones, label=""):
        self.variant = variant
        self.hprime = hprime
        self.f = f
        self.f1 = f1
        self.n = n
        self.d = d
        self.placement = placement
        self.runs_of_ones = runs_of_ones
        self.label = label or f"sada[{variant.hprime_encoding},{variant.filter}]"

    def _check(self, sp, ep):
        if not 1 <= sp <= ep <= self.n:
            raise RangeInvalid(f"range [{sp},{ep}] outside [1,{self.n}]")

    def _ups(self, t: int) -> int:
        # sum of the first t retained H values
        return self.hprime.select1_ext(t + 1) - (t + 1)

    def count(self, sp: int, ep: int) -> int:
        self._check(sp, ep)
        hp = self.hprime
        filt = self.variant.filter
        if filt == "none":
            return 2 * (ep - sp) - (hp.select1_ext(ep) - hp.select1_ext(sp)) + 1
        if filt == "count_filter":
            a = self.f.rank1(sp - 1)
            b = self.f.rank1(ep - 1)
            if a == b:
                return 1
            return 2 * (b - a) - (hp.select1_ext(b + 1) - hp.select1_ext(a + 1)) + 1
        if filt == "sparse_filter":
            a = self.f.rank1(sp - 1)
            b = self.f.rank1(ep - 1)
            return (ep + 1 - sp) - (self._ups(b) - self._ups(a))
        if filt == "one_filter":
            r1_lo = self.f1.rank1(sp - 1)
            r1_hi = self.f1.rank1(ep - 1)
            a = (sp - 1) - r1_lo
            b = (ep - 1) - r1_hi
            return (ep + 1 - sp) - (self._ups(b) - self._ups(a)) - (r1_hi - r1_lo)
        # sparse_plus_one
        a = self.f.rank1(sp - 1)
        b = self.f.rank1(ep - 1)
        ones = self.f1.rank1(ep - 1) - self.f1.rank1(sp - 1)
        return (ep + 1 - sp) - (self._ups(b) - self._ups(a)) - ones

    def size_in_bits(self) -> int:
        return 8 * len(self.serialize())

    def serialize(self) -> bytes:
        v = self.variant
        head = struct.pack(
            "<QQBBBBB",
            self.n,
            self.d,
            _ENC_TAG[v.hprime_encoding],
            _FILT_TAG[v.filter],
            _ENC_TAG.get(v.filter_encoding, 255),
            _PLACE_TAG[self.placement],
            (1 if self.f is not None else 0) | (2 if self.f1 is not None else 0),
        )
        label = self.label.encode()
        parts = [head, struct.pack("<QH", self.runs_of_ones, len(label)), label]
        parts.append(self.hprime.serialize())
        if self.f is not None:
            parts.append(self.f.serialize())
        if self.f1 is not None:
            parts.append(self.f1.serialize())
        return b"".join(parts)

    @classmethod
    def deserialize(cls, buf: bytes) -> "SadaIndex":
        n, d, enc, filt, fenc, place, flags = struct.unpack_from("<QQBBBBB", buf, 0)
        off = struct.calcsize("<QQBBBBB")
        runs, llen = struct.unpack_from("<QH", buf, off)
        off += struct.calcsize("<QH")
        label = buf[off : off + llen].decode()
        off += llen
        names = list(bitvec.ENCODINGS)
        variant = SadaVariant(
            names[enc], FILTERS[filt], None if fenc == 255 else names[fenc]
        )
        hprime, off = bitvec.decode(buf, off)
        f = f1 = None
        if flags & 1:
            f, off = bitvec.decode(buf, off)
        if flags & 2:
            f1, off = bitvec.decode(buf, off)
        placement = "per_pair" if place == 0 else "aggregated"
        return cls(variant, hprime, f, f1, n, d, placement, runs, label)


def count(s: SadaIndex, locus) -> int:
    sp, ep = locus
    return s.count(sp, ep)


def count_runs_of_ones(s: SadaIndex) -> int:
    return s.runs_of_ones
