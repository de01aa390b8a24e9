"""Precomputed-count tests: cover selection, parentheses LCA, oracle sweeps."""

import numpy as np
import pytest

from doccount import corpus, pdl, suffix
from doccount._bitio import unpack_all
from doccount.errors import CoverMismatch, PreconditionViolated, RangeInvalid

from util import random_collection


def build(data, threshold=pdl.DEFAULT_BLOCK_THRESHOLD, debug=False):
    coll = corpus.ingest_concat(data)
    idx = suffix.build_index(coll)
    oracle = pdl.docc_oracle(idx)
    cover = pdl.select_blocks(idx, oracle, threshold)
    return idx, cover, pdl.build_pdl(idx, cover, oracle, debug=debug)


def naive_docc(idx, sp, ep):
    return len(np.unique(idx.da[sp : ep + 1]))


class TestCover:
    def test_hand_fillers(self):
        """No root child repeats a document: three filler blocks."""
        _, cover, p = build(b"ab\x00ab\x00", threshold=2)
        assert cover.ranges() == [(1, 2, False), (3, 4, False), (5, 6, False)]
        assert p.n_blocks == 3
        assert p.bp.to_bits().tolist() == [1, 1, 0, 1, 0, 1, 0, 0]
        assert unpack_all(p.counts_buf, p.width, p.n_nodes).tolist() == [2, 2, 2, 2]

    def test_single_doc_qualifying(self):
        """Repeats inside one document force qualifying blocks."""
        _, cover, p = build(b"aaa\x00")
        assert cover.ranges() == [(1, 1, True), (2, 2, True), (3, 4, True)]
        assert unpack_all(p.counts_buf, p.width, p.n_nodes).tolist() == [1] * 5

    def test_no_internal_repeats_all_fillers(self):
        """Distinct single-occurrence documents produce only filler blocks."""
        _, cover, p = build(b"ab\x00cd\x00ef\x00")
        assert not any(q for _, _, q in cover.ranges())
        # below-block answers equal range length
        for sp, ep, _ in cover.ranges():
            if ep > sp:
                assert p.count(sp + 1, ep) == ep - sp

    def test_partition_invariants(self):
        """Blocks are consecutive, disjoint, and cover [1,n]."""
        rng = np.random.default_rng(31)
        for _ in range(8):
            data = random_collection(rng, int(rng.integers(1, 10)), (1, 30), sigma=2)
            coll = corpus.ingest_concat(data)
            idx = suffix.build_index(coll)
            oracle = pdl.docc_oracle(idx)
            for thr in (1, 4, 64):
                cover = pdl.select_blocks(idx, oracle, thr)
                cover.validate()
                assert cover.sps[0] == 1 and cover.eps[-1] == idx.n

    def test_threshold_splits_qualifying_blocks(self):
        """A tighter threshold never leaves an oversized qualifying block."""
        data = b"aaaaaaaaaaaaaaaa\x00"
        coll = corpus.ingest_concat(data)
        idx = suffix.build_index(coll)
        oracle = pdl.docc_oracle(idx)
        wide = pdl.select_blocks(idx, oracle, 256)
        tight = pdl.select_blocks(idx, oracle, 2)
        assert len(tight) >= len(wide)
        for sp, ep, q in tight.ranges():
            if q:
                assert ep - sp + 1 <= 2 or naive_docc(idx, sp, ep) == ep - sp + 1

    def test_bad_cover_rejected(self):
        cover = pdl.BlockCover(
            np.array([1, 4], np.int64), np.array([2, 6], np.int64),
            np.array([False, False]), 6,
        )
        with pytest.raises(CoverMismatch):
            cover.validate()


class TestLca:
    def test_leaf_and_root(self):
        """A single leaf maps to itself; the full span maps to the root."""
        _, _, p = build(b"ab\x00ab\x00", threshold=2, debug=True)
        assert p.lca_preorder(1, p.n_blocks) == 1
        assert p.lca_preorder(2, 2) == 3

    def test_against_naive_tree(self):
        """BP arithmetic equals LCA on an explicitly decoded tree."""
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(30):
            data = random_collection(rng, int(rng.integers(1, 10)), (1, 35), sigma=2)
            idx, cover, p = build(data, threshold=int(rng.integers(1, 20)), debug=True)
            # decode stored spans and leaf spans from the debug node list
            spans = p._debug_nodes
            leaf_span = {}
            leaf_i = 0
            for k, (l, r) in enumerate(spans, 1):
                i = int(np.searchsorted(cover.sps, l))
                j = int(np.searchsorted(cover.eps, r))
                if cover.sps[i] == l and cover.eps[j] == r:
                    assert p.lca_preorder(i + 1, j + 1) == k
                    checked += 1
        assert checked >= 1000

    def test_depth_formula(self):
        """Run-head depths match a direct scan of the parentheses."""
        rng = np.random.default_rng(19)
        for _ in range(10):
            data = random_collection(rng, int(rng.integers(1, 8)), (1, 30), sigma=3)
            _, _, p = build(data, threshold=3)
            bits = p.bp.to_bits()
            depth = 0
            naive = []
            prev = 0
            for pos, b in enumerate(bits, 1):
                depth += 1 if b else -1
                if b and not prev:
                    naive.append((pos, depth))
                prev = b
            assert len(naive) == p.n_blocks
            for t, (pos, dep) in enumerate(naive, 1):
                assert p.heads.select1(t) == pos
                assert p._depth(t) == dep
            assert p._depth(p.n_blocks + 1) == 0

    def test_precondition_debug(self):
        """A pair that is not a stored span raises in debug mode."""
        _, _, p = build(b"aaa\x00", debug=True)
        with pytest.raises(PreconditionViolated):
            p.lca_preorder(1, 2)

    def test_block_bounds_check(self):
        _, _, p = build(b"aaa\x00")
        with pytest.raises(RangeInvalid):
            p.lca_preorder(0, 1)
        with pytest.raises(RangeInvalid):
            p.lca_preorder(2, 1)
        with pytest.raises(RangeInvalid):
            p.lca_preorder(1, p.n_blocks + 1)


class TestCounting:
    def test_all_loci_oracle(self):
        """count equals the distinct-document oracle on every locus."""
        rng = np.random.default_rng(23)
        for _ in range(10):
            data = random_collection(rng, int(rng.integers(1, 12)), (1, 40), sigma=int(rng.integers(2, 5)))
            for thr in (2, 16, 256):
                idx, _, p = build(data, threshold=thr, debug=True)
                ls, rs, _ = idx.lcp_intervals()
                for l, r in zip(ls.tolist(), rs.tolist()):
                    assert p.count(l, r) == naive_docc(idx, l, r)
                for i in range(1, idx.n + 1):
                    assert p.count(i, i) == 1

    def test_below_block_rule(self):
        """Strictly inside a block the answer is the range length."""
        idx, cover, p = build(b"abcd\x00abce\x00abcf\x00", threshold=256)
        for sp, ep, _ in cover.ranges():
            if ep - sp >= 1:
                assert p.count(sp, ep - 1 if ep > sp else ep) in (
                    ep - 1 - sp + 1,
                    naive_docc(idx, sp, ep - 1),
                )

    def test_straddling_raises(self):
        _, cover, p = build(b"aaa\x00")
        # blocks are (1,1),(2,2),(3,4); [2,3] straddles
        with pytest.raises(CoverMismatch):
            p.count(2, 3)

    def test_range_checks(self):
        _, _, p = build(b"ab\x00ab\x00")
        with pytest.raises(RangeInvalid):
            p.count(0, 2)
        with pytest.raises(RangeInvalid):
            p.count(3, 2)

    def test_module_functions(self):
        idx, _, p = build(b"ab\x00ab\x00", threshold=2)
        assert pdl.count_pdl(p, (3, 4)) == 2
        assert pdl.lca_preorder(p, 1, 3) == 1

    def test_degenerate_single_block(self):
        """A one-block cover stores a single leaf answering the root."""
        coll = corpus.ingest_concat(b"ab\x00")
        idx = suffix.build_index(coll)
        cover = pdl.BlockCover(
            np.array([1], np.int64), np.array([idx.n], np.int64),
            np.array([False]), idx.n,
        )
        p = pdl.build_pdl(idx, cover)
        assert p.n_nodes == 1
        assert p.count(1, idx.n) == 1
        assert p.count(1, idx.n - 1) == idx.n - 1  # strictly inside


class TestSizeInvariants:
    def test_bp_length_and_width(self):
        """BP holds 2 bits per stored node; count width stays within d."""
        rng = np.random.default_rng(29)
        for _ in range(6):
            nd = int(rng.integers(2, 12))
            data = random_collection(rng, nd, (1, 30), sigma=2)
            idx, cover, p = build(data, threshold=4)
            assert p.bp.length == 2 * p.n_nodes
            assert p.heads.ones == p.n_blocks
            assert p.width <= max(1, idx.d.bit_length())
            assert p.max_count <= idx.d

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(37)
        data = random_collection(rng, 8, (2, 30), sigma=3)
        idx, _, p = build(data, threshold=8)
        blob = p.serialize()
        assert p.size_in_bits() == 8 * len(blob)
        back = pdl.PdlCountIndex.deserialize(blob)
        assert (back.n, back.n_blocks, back.n_nodes) == (p.n, p.n_blocks, p.n_nodes)
        ls, rs, _ = idx.lcp_intervals()
        for l, r in zip(ls.tolist(), rs.tolist()):
            assert back.count(l, r) == p.count(l, r)
