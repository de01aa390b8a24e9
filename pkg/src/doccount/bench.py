"""Benchmark harness: oracle, size accounting, and the timing protocol.

The oracle answers any range by sorting a copied slice of the document
array, so it doubles as the ground truth for verification and as the
zero-size baseline row in reports.  run_bench times count() per structure
under a documented protocol and refuses to report timings for a structure
that disagrees with the oracle on any benchmark pattern.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ilcp, pdl, sada
from .corpus import Collection, PatternSet
from .errors import FormatError, RangeInvalid, VerificationFailed
from .suffix import TextIndex, build_index

ALL_VARIANTS = tuple(sada.PRESETS) + ("ilcp-plain", "ilcp-rl", "pdl-count")

CSV_COLUMNS = (
    "structure",
    "variant",
    "size_bits",
    "bpc",
    "avg_us",
    "median_us",
    "queries",
    "divergences",
)

PROTOCOL_LINES = (
    "clock: time.perf_counter (monotonic), single thread",
    "per pattern: find() once untimed, then count() timed as one block of"
    " `repetitions` calls",
    "avg_us: mean over all timed calls;"
    " median_us: median over patterns of per-pattern means",
    "verification: separate untimed pass against the sort-based oracle;"
    " any divergence aborts the report",
    "repetitions=0: sizes only, timing and verification skipped",
    "baseline rows carry size_bits=0 by convention"
    " (the document array they scan is not counted)",
)


@dataclass(frozen=True)
class Oracle:
    """Ground truth: distinct documents in da[sp..ep] by sorting a copy."""

    index: TextIndex


def oracle_count(o: Oracle, r) -> int:
    sp, ep = r
    n = o.index.n
    if not 1 <= sp <= ep <= n:
        raise RangeInvalid(f"range ({sp}, {ep}) outside [1, {n}]")
    block = np.array(o.index.da[sp : ep + 1])
    block.sort()
    return 1 + int(np.count_nonzero(block[1:] != block[:-1]))


@dataclass(frozen=True)
class BenchStructure:
    """Uniform adapter: a label, a serialized size, and a counter callable.

    The counter takes (sp, ep, pattern_len); families that do not need the
    pattern length ignore it.  baseline marks rows whose size is reported
    as 0 by convention.
    """

    name: str
    variant: str
    size_bits: int
    counter: Callable
    baseline: bool = False


def wrap_index(obj) -> BenchStructure:
    if isinstance(obj, sada.SadaIndex):
        return BenchStructure(
            "sada", obj.label, obj.size_in_bits(),
            lambda sp, ep, plen, s=obj: s.count(sp, ep),
        )
    if isinstance(obj, ilcp.IlcpIndex):
        return BenchStructure(
            "ilcp", obj.label, obj.size_in_bits(),
            lambda sp, ep, plen, s=obj: s.count_less(sp, ep, plen),
        )
    if isinstance(obj, pdl.PdlCountIndex):
        return BenchStructure(
            "pdl", obj.label, obj.size_in_bits(),
            lambda sp, ep, plen, s=obj: s.count(sp, ep),
        )
    raise FormatError(f"no adapter for {type(obj).__name__}")


def baseline_structure(o: Oracle) -> BenchStructure:
    return BenchStructure(
        "brute-d", "brute-d", 0,
        lambda sp, ep, plen, o=o: oracle_count(o, (sp, ep)),
        baseline=True,
    )


def build_variants(
    index: TextIndex,
    collection: Collection,
    names,
    block_threshold: int = pdl.DEFAULT_BLOCK_THRESHOLD,
):
    """Build the named counting structures over one shared text index.

    Expensive intermediates are computed once: the interleaved-LCP array is
    shared between its two encodings and one redundancy-count builder serves
    every H'-based preset.  Unknown names are rejected up front with the
    valid list.
    """
    names = list(names)
    unknown = [nm for nm in names if nm not in ALL_VARIANTS]
    if unknown:
        raise FormatError(
            f"unknown variant(s) {', '.join(unknown)}; "
            f"valid: {', '.join(ALL_VARIANTS)}"
        )
    ilcp_arr = None
    sada_builder = None
    out = []
    for nm in names:
        if nm in sada.PRESETS:
            if sada_builder is None:
                sada_builder = sada.SadaBuilder(index)
            out.append(
                sada_builder.build(sada.variant_from_preset(nm), label=nm)
            )
        elif nm.startswith("ilcp"):
            if ilcp_arr is None:
                ilcp_arr = ilcp.build_ilcp(index, collection)
            mode = "plain_wt" if nm == "ilcp-plain" else "rle_wt"
            out.append(ilcp.build_ilcp_index(ilcp_arr, mode))
        else:
            out.append(pdl.build_pdl_count(index, block_threshold))
    return out


@dataclass(frozen=True)
class CorpusStats:
    n: int
    d: int
    n_over_d: float
    patterns: int
    avg_occ: Optional[float]
    avg_docc: Optional[float]
    occ_over_docc: Optional[float]


@dataclass(frozen=True)
class StructureRow:
    name: str
    variant: str
    size_bits: int
    bpc: float
    avg_us: Optional[float]
    median_us: Optional[float]
    queries: int
    divergences: int
    baseline: bool


@dataclass(frozen=True)
class BenchReport:
    stats: CorpusStats
    rows: tuple
    repetitions: int


def table1_stats(
    c: Collection,
    patterns: PatternSet,
    index: Optional[TextIndex] = None,
    oracle: Optional[Oracle] = None,
) -> CorpusStats:
    """Corpus statistics row: n, d, n/d, and per-pattern occ/docc averages.

    Absent patterns contribute zero occurrences; an empty pattern set leaves
    the pattern columns null.
    """
    pats = patterns.patterns
    if not pats:
        return CorpusStats(c.n, c.d, c.n / c.d, 0, None, None, None)
    if index is None:
        index = build_index(c)
    if oracle is None:
        oracle = Oracle(index)
    occs = []
    doccs = []
    for pat in pats:
        rng = index.find(pat)
        if rng is None:
            occs.append(0)
            doccs.append(0)
        else:
            occs.append(rng[1] - rng[0] + 1)
            doccs.append(oracle_count(oracle, rng))
    avg_occ = sum(occs) / len(pats)
    avg_docc = sum(doccs) / len(pats)
    ratio = avg_occ / avg_docc if avg_docc else None
    return CorpusStats(c.n, c.d, c.n / c.d, len(pats), avg_occ, avg_docc, ratio)


def run_bench(
    c: Collection,
    structures,
    patterns: PatternSet,
    repetitions: int,
    index: Optional[TextIndex] = None,
) -> BenchReport:
    """Time count() per structure over the pattern set; verify first.

    Every answer is checked against the oracle in an untimed pass before any
    timing runs; the first divergence aborts with VerificationFailed.  With
    repetitions=0 the report carries sizes only.
    """
    if repetitions < 0:
        raise FormatError("repetitions must be >= 0")
    if index is None:
        index = build_index(c)
    oracle = Oracle(index)
    stats = table1_stats(c, patterns, index, oracle)
    loci = []
    for pat in patterns.patterns:
        rng = index.find(pat)
        if rng is not None:
            loci.append((pat, rng[0], rng[1], len(pat)))
    expected = [oracle_count(oracle, (sp, ep)) for _, sp, ep, _ in loci]
    rows = []
    for s in structures:
        avg_us = None
        median_us = None
        queries = 0
        if repetitions > 0:
            for (pat, sp, ep, plen), exp in zip(loci, expected):
                got = s.counter(sp, ep, plen)
                if got != exp:
                    raise VerificationFailed(s.variant, pat, got, exp)
            if loci:
                means = []
                sink = 0
                for _, sp, ep, plen in loci:
                    fn = s.counter
                    t0 = time.perf_counter()
                    for _ in range(repetitions):
                        sink += fn(sp, ep, plen)
                    elapsed = time.perf_counter() - t0
                    means.append(elapsed * 1e6 / repetitions)
                assert sink >= 0
                queries = repetitions * len(loci)
                avg_us = sum(means) / len(means)
                median_us = statistics.median(means)
        rows.append(
            StructureRow(
                s.name,
                s.variant,
                0 if s.baseline else s.size_bits,
                0.0 if s.baseline else s.size_bits / c.n,
                avg_us,
                median_us,
                queries,
                0,
                s.baseline,
            )
        )
    return BenchReport(stats, tuple(rows), repetitions)


def stats_pairs(st: CorpusStats):
    def fmt(v):
        if v is None:
            return ""
        return f"{v:.4f}" if isinstance(v, float) else v

    return [
        ("n", st.n),
        ("d", st.d),
        ("n_over_d", fmt(st.n_over_d)),
        ("patterns", st.patterns),
        ("avg_occ", fmt(st.avg_occ)),
        ("avg_docc", fmt(st.avg_docc)),
        ("occ_over_docc", fmt(st.occ_over_docc)),
    ]


def write_csv(report: BenchReport, path) -> None:
    """CSV report with the timing protocol and corpus stats as # comments."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# protocol: repetitions={report.repetitions}\n")
        for line in PROTOCOL_LINES:
            fh.write(f"# {line}\n")
        fh.write(
            "# corpus: "
            + " ".join(f"{k}={v}" for k, v in stats_pairs(report.stats))
            + "\n"
        )
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in report.rows:
            w.writerow([
                r.name,
                r.variant,
                r.size_bits,
                f"{r.bpc:.6f}",
                "" if r.avg_us is None else f"{r.avg_us:.4f}",
                "" if r.median_us is None else f"{r.median_us:.4f}",
                r.queries,
                r.divergences,
            ])


def write_stats_csv(st: CorpusStats, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        pairs = stats_pairs(st)
        w.writerow([k for k, _ in pairs])
        w.writerow([v for _, v in pairs])


def write_dat(report: BenchReport, path) -> None:
    """Gnuplot-ready size-vs-time points: bpc, avg_us, label."""
    with open(path, "w") as fh:
        fh.write("# bpc avg_us label\n")
        for r in report.rows:
            if r.avg_us is None:
                continue
            fh.write(f"{r.bpc:.6f} {r.avg_us:.4f} {r.variant}\n")


def plot_bench(report: BenchReport, path) -> None:
    """Size-vs-time scatter with one labeled point per timed structure."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = [r for r in report.rows if r.avg_us is not None]
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for r in pts:
        ax.scatter(r.bpc, r.avg_us, marker="o" if not r.baseline else "s")
        ax.annotate(
            r.variant, (r.bpc, r.avg_us),
            textcoords="offset points", xytext=(4, 4), fontsize=8,
        )
    ax.set_xlabel("size (bits per character)")
    ax.set_ylabel("average count() time (microseconds)")
    if pts and max(r.avg_us for r in pts) > 20 * min(r.avg_us for r in pts):
        ax.set_yscale("log")
    ax.set_title(f"n={report.stats.n}, d={report.stats.d}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
