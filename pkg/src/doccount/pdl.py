"""Precomputed document counting over a basic-block cover of the suffix tree.

The suffix tree is cut into basic blocks: the deepest nodes v such that
occ > docc holds for v or one of its siblings, and for no deeper node.  Below
a block every pattern occurs at most once per document, so a locus strictly
inside a block is answered as ep - sp + 1.  A locus spanning whole blocks is
a stored ancestor node whose count was precomputed; it is found as the lowest
common ancestor of the first and last block, via arithmetic on the balanced
parentheses of the stored tree (block roots plus all their ancestors, which
never contains unary internal nodes).

Leaves sit at the ends of 1-runs in the parentheses; the run head's depth is
rank(i) - (select(i) - rank(i)), and for leaves i <= j spanning a stored node
the answer is rank(i) if depth(i) >= depth(j+1), else
rank(i) + depth(j+1) - depth(i), with the virtual run n_blocks+1 at depth 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import bitvec
from ._bitio import pack_width, unpack_at
from .bitvec import _de_bytes, _ser_bytes
from .errors import CoverMismatch, PreconditionViolated, RangeInvalid
from .suffix import TextIndex

DEFAULT_BLOCK_THRESHOLD = 256


def docc_oracle(idx: TextIndex):
    """Vectorized docc for suffix-tree node ranges (not arbitrary ranges)."""
    from .sada import SadaBuilder

    cum = np.cumsum(SadaBuilder(idx).h_pair(), dtype=np.int64)

    def docc(l, r):
        l = np.asarray(l, np.int64)
        r = np.asarray(r, np.int64)
        return (r + 1 - l) - (cum[r - 1] - cum[l - 1])

    return docc


@dataclass
class BlockCover:
    """Consecutive disjoint SA ranges covering [1,n]."""

    sps: np.ndarray
    eps: np.ndarray
    quals: np.ndarray
    n: int

    def __len__(self) -> int:
        return len(self.sps)

    def ranges(self):
        return list(zip(self.sps.tolist(), self.eps.tolist(), self.quals.tolist()))

    def validate(self) -> None:
        if len(self.sps) == 0 or self.sps[0] != 1 or self.eps[-1] != self.n:
            raise CoverMismatch("cover does not span [1,n]")
        if not np.all(self.sps[1:] == self.eps[:-1] + 1):
            raise CoverMismatch("cover blocks are not consecutive")
        if not np.all(self.eps >= self.sps):
            raise CoverMismatch("cover has an empty block")


@njit(cache=True)
def _parents_kernel(ls, rs, parent):
    # children-first input: a node's children are the pending nodes it contains
    m = len(ls)
    stack = np.empty(m, np.int64)
    top = -1
    for k in range(m):
        while top >= 0 and ls[stack[top]] >= ls[k]:
            parent[stack[top]] = k
            top -= 1
        top += 1
        stack[top] = k


@njit(cache=True)
def _descend_kernel(parent, has_r_child, descend):
    # parents come after children, so walk backwards to see parents first
    for k in range(len(parent) - 1, -1, -1):
        if has_r_child[k]:
            p = parent[k]
            if p < 0 or descend[p]:
                descend[k] = True


def select_blocks(
    idx: TextIndex, oracle, block_threshold: int = DEFAULT_BLOCK_THRESHOLD
) -> BlockCover:
    ls, rs, _ = idx.lcp_intervals()
    ls = ls.astype(np.int64)
    rs = rs.astype(np.int64)
    m = len(ls)
    root = m - 1
    assert ls[root] == 1 and rs[root] == idx.n

    docc = np.asarray(oracle(ls, rs), np.int64)
    has_r = (rs - ls + 1) > docc
    parent = np.full(m, -1, np.int64)
    _parents_kernel(ls, rs, parent)
    has_r_child = np.zeros(m, bool)
    np.logical_or.at(has_r_child, parent[parent >= 0], has_r[parent >= 0])
    descend = np.zeros(m, bool)
    _descend_kernel(parent, has_r_child, descend)

    # internal children of each node, in left-to-right order
    order = np.argsort(parent, kind="stable")
    child_of = parent[order]
    first = np.searchsorted(child_of, np.arange(m), side="left")
    last = np.searchsorted(child_of, np.arange(m), side="right")
    by_l = np.argsort(ls, kind="stable")  # children emitted in range order
    rank_l = np.empty(m, np.int64)
    rank_l[by_l] = np.arange(m)

    def children(v):
        ch = order[first[v] : last[v]]
        return ch[np.argsort(rank_l[ch], kind="stable")]

    blocks = []  # (sp, ep, qualifying, internal-node index or -1)

    def emit(v, qual):
        pos = ls[v]
        for c in children(v):
            for p in range(pos, ls[c]):
                blocks.append((p, p, qual, -1))
            pos = rs[c] + 1
            if qual and descend[c]:
                continue  # its own emit() covers it
            blocks.append((int(ls[c]), int(rs[c]), qual, int(c)))
        for p in range(pos, rs[v] + 1):
            blocks.append((p, p, qual, -1))

    if descend[root]:
        for v in np.flatnonzero(descend):
            emit(int(v), True)
    else:
        emit(root, False)

    # secondary cut: qualifying blocks above the threshold recurse into children
    out = []
    work = sorted(blocks)
    while work:
        sp, ep, qual, node = work.pop()
        if qual and node >= 0 and ep - sp + 1 > block_threshold:
            pos = sp
            for c in children(node):
                for p in range(pos, ls[c]):
                    work.append((p, p, qual, -1))
                work.append((int(ls[c]), int(rs[c]), qual, int(c)))
                pos = rs[c] + 1
            for p in range(pos, ep + 1):
                work.append((p, p, qual, -1))
        else:
            out.append((sp, ep, qual))
    out.sort()
    sps = np.array([b[0] for b in out], np.int64)
    eps = np.array([b[1] for b in out], np.int64)
    quals = np.array([b[2] for b in out], bool)
    cover = BlockCover(sps, eps, quals, idx.n)
    cover.validate()
    return cover


class PdlCountIndex:
    """Block cover, stored-tree parentheses, and preorder counts."""

    def __init__(
        self,
        n,
        n_blocks,
        n_nodes,
        max_count,
        width,
        block_bounds,
        bp,
        heads,
        counts_buf,
        debug_nodes=None,
    ):
        self.n = n
        self.n_blocks = n_blocks
        self.n_nodes = n_nodes
        self.max_count = max_count
        self.width = width
        self.block_bounds = block_bounds
        self.bp = bp
        self.heads = heads
        self.counts_buf = counts_buf
        self._debug_nodes = debug_nodes
        self.label = "pdl-count"

    def _block_start(self, i: int) -> int:
        return self.block_bounds.select1(i)

    def _block_end(self, i: int) -> int:
        if i == self.n_blocks:
            return self.n
        return self.block_bounds.select1(i + 1) - 1

    def _depth(self, t: int) -> int:
        if t == self.n_blocks + 1:
            return 0
        s = self.heads.select1(t)
        return 2 * self.bp.rank1(s) - s

    def count_at(self, preorder: int) -> int:
        return int(unpack_at(self.counts_buf, self.width, preorder - 1))

    def lca_preorder(self, i: int, j: int) -> int:
        if not 1 <= i <= j <= self.n_blocks:
            raise RangeInvalid(f"blocks [{i},{j}] outside [1,{self.n_blocks}]")
        si = self.heads.select1(i)
        ri = self.bp.rank1(si)
        di = 2 * ri - si
        dj = self._depth(j + 1)
        res = ri if di >= dj else ri + (dj - di)
        if self._debug_nodes is not None:
            want = (self._block_start(i), self._block_end(j))
            got = self._debug_nodes[res - 1]
            if got != want:
                raise PreconditionViolated(
                    f"blocks [{i},{j}] are not a stored node's leaf span: "
                    f"node {res} covers {got}, expected {want}"
                )
        return res

    def count(self, sp: int, ep: int) -> int:
        if not 1 <= sp <= ep <= self.n:
            raise RangeInvalid(f"range [{sp},{ep}] outside [1,{self.n}]")
        i = self.block_bounds.rank1(sp)
        j = self.block_bounds.rank1(ep)
        si = self._block_start(i)
        ej = self._block_end(j)
        if i == j and (sp > si or ep < ej):
            return ep - sp + 1
        if sp == si and ep == ej:
            return self.count_at(self.lca_preorder(i, j))
        raise CoverMismatch(
            f"range [{sp},{ep}] straddles block boundaries without spanning"
        )

    def size_in_bits(self) -> int:
        return 8 * len(self.serialize())

    def serialize(self) -> bytes:
        head = struct.pack(
            "<QQQQB", self.n, self.n_blocks, self.n_nodes, self.max_count, self.width
        )
        return b"".join(
            [
                head,
                self.block_bounds.serialize(),
                self.bp.serialize(),
                self.heads.serialize(),
                _ser_bytes(self.counts_buf.tobytes()),
            ]
        )

    @classmethod
    def deserialize(cls, buf: bytes) -> "PdlCountIndex":
        n, n_blocks, n_nodes, max_count, width = struct.unpack_from("<QQQQB", buf, 0)
        off = struct.calcsize("<QQQQB")
        bounds, off = bitvec.decode(buf, off)
        bp, off = bitvec.decode(buf, off)
        heads, off = bitvec.decode(buf, off)
        raw, off = _de_bytes(buf, off)
        counts_buf = np.frombuffer(raw, np.uint8).copy()
        return cls(n, n_blocks, n_nodes, max_count, width, bounds, bp, heads, counts_buf)


def build_pdl(
    idx: TextIndex, cover: BlockCover, oracle=None, debug: bool = False
) -> PdlCountIndex:
    cover.validate()
    if oracle is None:
        oracle = docc_oracle(idx)
    n = idx.n
    starts = cover.sps
    ends = cover.eps
    n_blocks = len(starts)

    ls, rs, _ = idx.lcp_intervals()
    ls = ls.astype(np.int64)
    rs = rs.astype(np.int64)
    i_of = np.clip(np.searchsorted(starts, ls), 0, n_blocks - 1)
    j_of = np.clip(np.searchsorted(ends, rs), 0, n_blocks - 1)
    keep = (starts[i_of] == ls) & (ends[j_of] == rs) & (j_of > i_of)
    all_l = np.concatenate((ls[keep], starts))
    all_r = np.concatenate((rs[keep], ends))
    order = np.lexsort((-all_r, all_l))  # preorder: by start, outermost first
    pl = all_l[order]
    pr = all_r[order]
    n_nodes = len(pl)

    counts = np.asarray(oracle(pl, pr), np.int64)
    max_count = int(counts.max())
    width = max(1, max_count.bit_length())
    counts_buf = pack_width(counts, width)

    bp_bits = np.zeros(2 * n_nodes, np.uint8)
    pos = 0
    stack = []
    for k in range(n_nodes):
        while stack and stack[-1] < pl[k]:
            stack.pop()
            pos += 1
        bp_bits[pos] = 1
        pos += 1
        stack.append(pr[k])
    pos += len(stack)
    assert pos == 2 * n_nodes, "parentheses are unbalanced"

    bounds = bitvec.GapBits.from_positions(n, starts)
    bp = bitvec.PlainBits.from_bits(bp_bits)
    prev_zero = np.concatenate(([1], 1 - bp_bits[:-1]))
    head_pos = np.flatnonzero((bp_bits == 1) & (prev_zero == 1)) + 1
    assert len(head_pos) == n_blocks, "one 1-run per leaf"
    heads = bitvec.SparseBits.from_positions(2 * n_nodes, head_pos.astype(np.int64))

    debug_nodes = list(zip(pl.tolist(), pr.tolist())) if debug else None
    return PdlCountIndex(
        n,
        n_blocks,
        n_nodes,
        max_count,
        width,
        bounds,
        bp,
        heads,
        counts_buf,
        debug_nodes,
    )


def build_pdl_count(
    idx: TextIndex,
    block_threshold: int = DEFAULT_BLOCK_THRESHOLD,
    debug: bool = False,
) -> PdlCountIndex:
    oracle = docc_oracle(idx)
    cover = select_blocks(idx, oracle, block_threshold)
    return build_pdl(idx, cover, oracle, debug)


def count_pdl(p: PdlCountIndex, r) -> int:
    sp, ep = r
    return p.count(sp, ep)


def lca_preorder(p: PdlCountIndex, i: int, j: int) -> int:
    return p.lca_preorder(i, j)
