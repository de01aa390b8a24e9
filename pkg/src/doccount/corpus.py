"""Document collections: ingest, synthesis, and pattern extraction.

A collection is a single byte string holding the documents back to back, each
terminated by the sentinel byte 0x00.  Document start offsets are stored
0-based; everything query-facing elsewhere in the package is 1-based.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceeded,
    EmptyDocument,
    EmptyInput,
    FormatError,
    LengthExceedsDocument,
    SeparatorInsideDocument,
)

SENTINEL = 0

# Generation refuses to build collections larger than this unless overridden.
MEM_BUDGET_ENV = "DCNT_MEM_BUDGET"
DEFAULT_MEM_BUDGET = 1 << 26

_GEN_CHUNK_ROWS = 1024  # fixed so the random stream layout never depends on budget


def memory_budget() -> int:
    raw = os.environ.get(MEM_BUDGET_ENV)
    return int(raw) if raw else DEFAULT_MEM_BUDGET


@dataclass(frozen=True)
class Collection:
    """Concatenated documents with 0x00 sentinels."""

    text: bytes
    doc_offsets: np.ndarray  # 0-based start offset of each document

    def __post_init__(self):
        object.__setattr__(
            self, "doc_offsets", np.asarray(self.doc_offsets, dtype=np.int64)
        )

    @property
    def n(self) -> int:
        return len(self.text)

    @property
    def d(self) -> int:
        return len(self.doc_offsets)

    @classmethod
    def from_text(cls, text: bytes, allow_empty: bool = False) -> "Collection":
        """Derive offsets from sentinel positions and validate invariants."""
        if not text:
            raise EmptyInput("collection text is empty")
        if text[-1] != SENTINEL:
            raise FormatError("collection text must end with the sentinel byte")
        arr = np.frombuffer(text, np.uint8)
        ends = np.flatnonzero(arr == SENTINEL).astype(np.int64)
        starts = np.concatenate(([0], ends[:-1] + 1))
        if not allow_empty and np.any(ends == starts):
            raise EmptyDocument("empty document body")
        return cls(text, starts)

    def bodies(self):
        """Document bodies without their sentinels."""
        arr = np.frombuffer(self.text, np.uint8)
        ends = np.flatnonzero(arr == SENTINEL)
        for s, e in zip(self.doc_offsets, ends):
            yield self.text[int(s) : int(e)]

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.text)

    @classmethod
    def load(cls, path, allow_empty: bool = False) -> "Collection":
        with open(path, "rb") as fh:
            return cls.from_text(fh.read(), allow_empty=allow_empty)


def ingest_concat(data: bytes, separator: int = SENTINEL, strict: bool = True) -> Collection:
    """Parse separator-delimited documents, normalizing the separator to 0x00.

    A trailing separator is appended when missing.  In strict mode an empty
    document body raises, and so does a stray 0x00 when the separator is some
    other byte (it would be indistinguishable from a sentinel afterwards).
    """
    if not data:
        raise EmptyInput("no input bytes")
    if not 0 <= separator <= 255:
        raise FormatError(f"separator must be a byte value, got {separator}")
    arr = np.frombuffer(data, np.uint8).copy()
    if separator != SENTINEL:
        if strict and np.any(arr == SENTINEL):
            raise SeparatorInsideDocument(
                "input contains 0x00 bytes but the separator is "
                f"0x{separator:02x}; they would collide after normalization"
            )
        arr[arr == separator] = SENTINEL
    if arr[-1] != SENTINEL:
        arr = np.concatenate((arr, np.array([SENTINEL], np.uint8)))
    return Collection.from_text(arr.tobytes(), allow_empty=not strict)


def from_documents(docs, strict: bool = True) -> Collection:
    """Build a collection from a list of document byte strings."""
    if not docs:
        raise EmptyInput("no documents")
    parts = []
    for doc in docs:
        if strict and not doc:
            raise EmptyDocument("empty document body")
        if SENTINEL in doc:
            raise SeparatorInsideDocument("document body contains the sentinel byte")
        parts.append(doc)
        parts.append(b"\x00")
    return Collection.from_text(b"".join(parts), allow_empty=not strict)


def load_manifest(path, strict: bool = True) -> Collection:
    """One file path per line; each named file becomes one document."""
    with open(path, "r", encoding="utf-8") as fh:
        names = [line.strip() for line in fh if line.strip()]
    if not names:
        raise EmptyInput(f"manifest {path} lists no files")
    base = os.path.dirname(os.path.abspath(path))
    docs = []
    for name in names:
        full = name if os.path.isabs(name) else os.path.join(base, name)
        with open(full, "rb") as fh:
            docs.append(fh.read())
    return from_documents(docs, strict=strict)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the mutated-copies generator."""

    base_length: int
    copies: int
    mutation_rate: float
    alphabet_size: int = 4
    seed: int = 0

    def validate(self):
        if self.base_length < 1 or self.copies < 1:
            raise FormatError("base_length and copies must be positive")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise FormatError("mutation_rate must lie in [0, 1]")
        if not 2 <= self.alphabet_size <= 255:
            raise FormatError("alphabet_size must lie in [2, 255]")
        budget = memory_budget()
        if self.base_length * self.copies > budget:
            raise BudgetExceeded(
                f"m*d = {self.base_length * self.copies} exceeds budget {budget} "
                f"(set {MEM_BUDGET_ENV} to raise it)"
            )


def generate_dna(spec: SyntheticSpec) -> Collection:
    """Random base sequence, copied and point-mutated.

    Each position of each copy is independently replaced with probability
    ``mutation_rate`` by a symbol drawn uniformly from the whole alphabet, so
    the replacement may silently equal the original.  Symbols are the byte
    values 1..alphabet_size.  Deterministic for a fixed seed.
    """
    spec.validate()
    m, d, p, sigma = (
        spec.base_length,
        spec.copies,
        spec.mutation_rate,
        spec.alphabet_size,
    )
    rng = np.random.default_rng(spec.seed)
    base = rng.integers(1, sigma + 1, m, dtype=np.uint8)
    out = np.empty((d, m + 1), np.uint8)
    out[:, :m] = base
    out[:, m] = SENTINEL
    if p > 0:
        for row in range(0, d, _GEN_CHUNK_ROWS):
            hi = min(row + _GEN_CHUNK_ROWS, d)
            mask = rng.random((hi - row, m)) < p
            repl = rng.integers(1, sigma + 1, (hi - row, m), dtype=np.uint8)
            chunk = out[row:hi, :m]
            chunk[mask] = repl[mask]
    offsets = np.arange(d, dtype=np.int64) * (m + 1)
    return Collection(out.tobytes(), offsets)


@dataclass(frozen=True)
class PatternSet:
    patterns: list = field(default_factory=list)
    provenance: str = "explicit"

    def save(self, path):
        with open(path, "wb") as fh:
            for pat in self.patterns:
                fh.write(pat + b"\n")

    @classmethod
    def load(cls, path) -> "PatternSet":
        with open(path, "rb") as fh:
            lines = fh.read().split(b"\n")
        patterns = [ln for ln in lines if ln]
        if not patterns:
            raise EmptyInput(f"pattern file {path} is empty")
        for pat in patterns:
            if bytes([SENTINEL]) in pat:
                raise FormatError("pattern contains the sentinel byte")
        return cls(patterns, "explicit")


def extract_patterns(
    collection: Collection,
    length: int,
    samples: int,
    keep: int,
    seed: int,
    index=None,
) -> PatternSet:
    """Sample substrings, deduplicate, keep those with the largest occ/docc.

    Ties in occ/docc break lexicographically so the result is deterministic.
    An existing text index for the collection may be passed to skip a rebuild.
    """
    if length < 1 or keep < 1 or samples < keep:
        raise FormatError("need length >= 1 and samples >= keep >= 1")
    arr = np.frombuffer(collection.text, np.uint8)
    # valid start offsets: windows that stay inside one document body
    good = np.ones(len(arr), bool)
    sent = arr == SENTINEL
    for shift in range(length):
        good[: len(arr) - shift] &= ~sent[shift:]
    good[len(arr) - length + 1 :] = False
    starts = np.flatnonzero(good)
    if len(starts) == 0:
        raise LengthExceedsDocument(
            f"no document has a substring of length {length}"
        )
    rng = np.random.default_rng(seed)
    picks = starts[rng.integers(0, len(starts), samples)]
    seen = sorted({collection.text[s : s + length] for s in picks})
    if index is None:
        from . import suffix

        index = suffix.build_index(collection)
    ranked = []
    for pat in seen:
        rng_ = index.find(pat)
        if rng_ is None:
            continue
        sp, ep = rng_
        occ = ep - sp + 1
        docc = len(np.unique(index.da[sp : ep + 1]))
        ranked.append((-(occ / docc), pat))
    ranked.sort()
    top = [pat for _, pat in ranked[:keep]]
    return PatternSet(top, "random_substrings")
