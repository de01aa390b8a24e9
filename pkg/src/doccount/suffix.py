"""Suffix array, LCP, document array, C array, RMQ, and pattern lookup.

All query-facing arrays are 1-based: numpy arrays of length n+1 whose slot 0 is
unused.  sa[i] is the 1-based text position of the i-th smallest suffix under
plain byte-string comparison (the sentinel 0x00 is the smallest byte, and all
suffixes are distinct strings, so the order is total and unique).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .corpus import Collection
from .errors import FormatError, RangeInvalid

RMQ_BLOCK = 32


def _suffix_array(text_arr: np.ndarray) -> np.ndarray:
    """0-based suffix array by prefix doubling on numpy lexsort."""
    n = len(text_arr)
    rank = text_arr.astype(np.int32)
    k = 1
    while True:
        key2 = np.full(n, -1, np.int32)
        key2[: n - k] = rank[k:]
        order = np.lexsort((key2, rank))
        r1 = rank[order]
        r2 = key2[order]
        changed = np.empty(n, np.int32)
        changed[0] = 0
        changed[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        del r1, r2
        ranks_sorted = np.cumsum(changed, dtype=np.int32)
        del changed
        rank = np.empty(n, np.int32)
        rank[order] = ranks_sorted
        if int(ranks_sorted[-1]) == n - 1:
            return order.astype(np.int32)
        del ranks_sorted, key2
        k *= 2


@njit(cache=True)
def _kasai(text, sa0, rank0, lcp0):
    n = len(sa0)
    h = 0
    for i in range(n):
        r = rank0[i]
        if r > 0:
            j = sa0[r - 1]
            while i + h < n and j + h < n and text[i + h] == text[j + h]:
                h += 1
            lcp0[r] = h
            if h > 0:
                h -= 1
        else:
            h = 0


@njit(cache=True)
def _rmq_block_argmins(vals, bs):
    n = len(vals) - 1
    nb = (n + bs - 1) // bs
    arg = np.empty(nb, np.int32)
    for b in range(nb):
        lo = b * bs + 1
        hi = min(lo + bs - 1, n)
        best = lo
        for p in range(lo + 1, hi + 1):
            if vals[p] < vals[best]:
                best = p
        arg[b] = best
    return arg


@njit(cache=True)
def _rmq_table(vals, arg):
    nb = len(arg)
    levels = 1
    while (1 << levels) <= nb:
        levels += 1
    table = np.zeros((levels, nb), np.int32)
    table[0, :] = arg
    j = 1
    while (1 << j) <= nb:
        span = 1 << j
        half = span >> 1
        for b in range(nb - span + 1):
            a = table[j - 1, b]
            c = table[j - 1, b + half]
            table[j, b] = a if vals[a] <= vals[c] else c
        j += 1
    return table


@njit(cache=True, inline="always")
def _rmq_query(vals, table, bs, l, r):
    # leftmost position of the minimum over vals[l..r], ties to the left
    b1 = (l - 1) // bs
    b2 = (r - 1) // bs
    if b1 == b2:
        best = l
        for p in range(l + 1, r + 1):
            if vals[p] < vals[best]:
                best = p
        return best
    best = l
    for p in range(l + 1, (b1 + 1) * bs + 1):
        if vals[p] < vals[best]:
            best = p
    mb1 = b1 + 1
    mb2 = b2 - 1
    if mb1 <= mb2:
        span = mb2 - mb1 + 1
        j = 0
        while (2 << j) <= span:
            j += 1
        a = table[j, mb1]
        c = table[j, mb2 - (1 << j) + 1]
        mid = a if vals[a] <= vals[c] else c
        if vals[mid] < vals[best]:
            best = mid
    for p in range(b2 * bs + 1, r + 1):
        if vals[p] < vals[best]:
            best = p
    return best


@njit(cache=True)
def _rmq_query_one(vals, table, bs, l, r):
    return _rmq_query(vals, table, bs, l, r)


class LeftmostMinRmq:
    """Leftmost range-minimum positions over a 1-based int array."""

    def __init__(self, values_1based: np.ndarray, block: int = RMQ_BLOCK):
        self.vals = np.ascontiguousarray(values_1based, dtype=np.int32)
        self.n = len(self.vals) - 1
        self.block = block
        arg = _rmq_block_argmins(self.vals, block)
        self.table = _rmq_table(self.vals, arg)

    def query(self, l: int, r: int) -> int:
        if not 1 <= l <= r <= self.n:
            raise RangeInvalid(f"rmq range [{l},{r}] outside [1,{self.n}]")
        return int(_rmq_query_one(self.vals, self.table, self.block, l, r))


@njit(cache=True)
def _c_array(da, c_out):
    n = len(da) - 1
    # last[j] = most recent SA position holding document j
    d = 0
    for i in range(1, n + 1):
        if da[i] > d:
            d = da[i]
    last = np.zeros(d + 1, np.int32)
    for i in range(1, n + 1):
        doc = da[i]
        c_out[i] = last[doc]
        last[doc] = i


@njit(cache=True)
def _lcp_intervals_kernel(lcp, out_l, out_r, out_d):
    n = len(lcp) - 1
    st_d = np.empty(n + 2, np.int32)
    st_l = np.empty(n + 2, np.int32)
    top = 0
    st_d[0] = 0
    st_l[0] = 1
    m = 0
    for i in range(2, n + 1):
        lb = i - 1
        while st_d[top] > lcp[i]:
            out_l[m] = st_l[top]
            out_r[m] = i - 1
            out_d[m] = st_d[top]
            m += 1
            lb = st_l[top]
            top -= 1
        if st_d[top] < lcp[i]:
            top += 1
            st_d[top] = lcp[i]
            st_l[top] = lb
    while top >= 0:
        out_l[m] = st_l[top]
        out_r[m] = n
        out_d[m] = st_d[top]
        m += 1
        top -= 1
    return m


class TextIndex:
    """Immutable bundle of the classical index arrays over one collection."""

    def __init__(self, collection: Collection, sa0=None):
        text = np.frombuffer(collection.text, np.uint8)
        n = len(text)
        self.collection = collection
        self.text = collection.text
        self.n = n
        self.d = collection.d
        if sa0 is None:
            sa0 = _suffix_array(text)
        else:
            # trusted precomputed 0-based suffix array, e.g. from a container
            sa0 = np.ascontiguousarray(sa0, np.int32)
            if len(sa0) != n:
                raise FormatError("stored suffix array length mismatch")
        rank0 = np.empty(n, np.int32)
        rank0[sa0] = np.arange(n, dtype=np.int32)
        lcp0 = np.zeros(n, np.int32)
        _kasai(text, sa0, rank0, lcp0)
        del rank0
        self.sa = np.zeros(n + 1, np.int32)
        self.sa[1:] = sa0 + 1
        self.lcp = np.zeros(n + 1, np.int32)
        self.lcp[2:] = lcp0[1:]
        del lcp0
        doc_of_pos = np.searchsorted(
            collection.doc_offsets, sa0, side="right"
        ).astype(np.int32)
        del sa0
        self.da = np.zeros(n + 1, np.int32)
        self.da[1:] = doc_of_pos
        del doc_of_pos
        self.c = np.zeros(n + 1, np.int32)
        _c_array(self.da, self.c)
        self.rmq = LeftmostMinRmq(self.lcp)

    def rmq_leftmost_min(self, l: int, r: int) -> int:
        return self.rmq.query(l, r)

    def find(self, pattern: bytes):
        """Maximal SA range [sp, ep] of suffixes prefixed by pattern, or None."""
        if not pattern:
            raise FormatError("empty pattern")
        if b"\x00" in pattern:
            raise FormatError("pattern contains the sentinel byte")
        text, sa, m = self.text, self.sa, len(pattern)
        lo, hi = 1, self.n + 1  # first suffix with prefix >= pattern
        while lo < hi:
            mid = (lo + hi) // 2
            s = sa[mid] - 1
            if text[s : s + m] < pattern:
                lo = mid + 1
            else:
                hi = mid
        sp = lo
        if sp > self.n:
            return None
        s = sa[sp] - 1
        if text[s : s + m] != pattern:
            return None
        hi = self.n + 1  # first suffix with prefix > pattern
        while lo < hi:
            mid = (lo + hi) // 2
            s = sa[mid] - 1
            if text[s : s + m] <= pattern:
                lo = mid + 1
            else:
                hi = mid
        return sp, lo - 1

    def lcp_intervals(self):
        """(l, r, depth) arrays of every internal suffix-tree node, children-first."""
        out_l = np.empty(self.n + 1, np.int32)
        out_r = np.empty(self.n + 1, np.int32)
        out_d = np.empty(self.n + 1, np.int32)
        m = _lcp_intervals_kernel(self.lcp, out_l, out_r, out_d)
        return out_l[:m].copy(), out_r[:m].copy(), out_d[:m].copy()


def build_index(collection: Collection, sa0=None) -> TextIndex:
    return TextIndex(collection, sa0)


def rmq_leftmost_min(index: TextIndex, l: int, r: int) -> int:
    return index.rmq_leftmost_min(l, r)
