"""Shared naive reference helpers for the test suite."""

import numpy as np


class NaiveBits:
    """Answer rank/select queries by direct scan of a bit array."""

    def __init__(self, bits):
        self.bits = np.asarray(bits, np.uint8)
        self.cum = np.concatenate(([0], np.cumsum(self.bits, dtype=np.int64)))
        self.ones_pos = np.flatnonzero(self.bits).astype(np.int64) + 1
        self.zeros_pos = np.flatnonzero(1 - self.bits).astype(np.int64) + 1

    @property
    def length(self):
        return len(self.bits)

    @property
    def ones(self):
        return int(self.cum[-1])

    def access(self, i):
        return int(self.bits[i - 1])

    def rank1(self, i):
        return int(self.cum[i])

    def rank0(self, i):
        return i - int(self.cum[i])

    def select1(self, k):
        return int(self.ones_pos[k - 1])

    def select0(self, k):
        return int(self.zeros_pos[k - 1])

    def select1_ext(self, k):
        if k == 0:
            return 0
        if k == self.ones + 1:
            return self.length + 1
        return self.select1(k)


def run_structured_bits(n, avg_run, rng):
    """Alternating 0/1 runs with geometric lengths."""
    bits = np.zeros(n, np.uint8)
    p = 0
    val = 0
    while p < n:
        ln = 1 + rng.geometric(1.0 / avg_run)
        if val:
            bits[p : p + ln] = 1
        p += ln
        val ^= 1
    return bits


def random_collection(rng, n_docs, doc_len, sigma=4):
    """Concatenated random documents over bytes 1..sigma, one sentinel each."""
    parts = []
    for _ in range(n_docs):
        ln = doc_len if np.isscalar(doc_len) else int(rng.integers(doc_len[0], doc_len[1] + 1))
        body = rng.integers(1, sigma + 1, ln).astype(np.uint8)
        parts.append(body)
        parts.append(np.zeros(1, np.uint8))
    return np.concatenate(parts).tobytes()
