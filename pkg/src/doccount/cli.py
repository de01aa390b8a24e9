"""Command-line surface: build, count, bench, gen-dna, stats, analyze-runs.

Index files are small sectioned containers (magic "DCNT"): the corpus text
and its suffix array are embedded next to any number of counting structures,
so several variants amortize one suffix array construction.  Sections are
independently loadable; count only touches the requested structure.
"""

from __future__ import annotations

import argparse
import struct
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench, corpus, ilcp, pdl, sada
from .errors import DoccountError, FormatError
from .suffix import build_index

MAGIC = b"DCNT"
VERSION = 1

TAG_CORPUS = 0
TAG_SA = 1
TAG_SADA = 2
TAG_ILCP = 3
TAG_PDL = 4

_DESERIALIZE = {
    TAG_SADA: sada.SadaIndex.deserialize,
    TAG_ILCP: ilcp.IlcpIndex.deserialize,
    TAG_PDL: pdl.PdlCountIndex.deserialize,
}


def section_name(variant: str) -> str:
    if variant in sada.PRESETS:
        return f"sada:{variant}"
    if variant == "ilcp-plain":
        return "ilcp:plain_wt"
    if variant == "ilcp-rl":
        return "ilcp:rle_wt"
    if variant == "pdl-count":
        return "pdl"
    raise FormatError(
        f"unknown variant {variant!r}; valid: {', '.join(bench.ALL_VARIANTS)}"
    )


def _section_tag(variant: str) -> int:
    if variant in sada.PRESETS:
        return TAG_SADA
    return TAG_ILCP if variant.startswith("ilcp") else TAG_PDL


def write_container(path, sections) -> None:
    """Write (tag, name, payload) sections under the DCNT header."""
    sections = list(sections)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", VERSION, len(sections)))
        for tag, name, payload in sections:
            nb = name.encode()
            fh.write(struct.pack("<BH", tag, len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)


def read_container(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: not a DCNT container")
    try:
        version, count = struct.unpack_from("<HI", data, 4)
        if version != VERSION:
            raise FormatError(f"{path}: unsupported container version {version}")
        off = 10
        out = []
        for _ in range(count):
            tag, nlen = struct.unpack_from("<BH", data, off)
            off += 3
            name = data[off : off + nlen].decode()
            off += nlen
            (plen,) = struct.unpack_from("<Q", data, off)
            off += 8
            if off + plen > len(data):
                raise FormatError(f"{path}: truncated section {name!r}")
            out.append((tag, name, data[off : off + plen]))
            off += plen
    except (struct.error, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: corrupt container ({exc})")
    if off != len(data):
        raise FormatError(f"{path}: trailing bytes after the last section")
    return out


def load_container(path):
    """Load a container into (collection, text index, {variant: structure})."""
    text = None
    sa_payload = None
    pending = []
    for tag, name, payload in read_container(path):
        if tag == TAG_CORPUS:
            text = payload
        elif tag == TAG_SA:
            sa_payload = payload
        elif tag in _DESERIALIZE:
            pending.append((tag, payload))
        else:
            raise FormatError(f"{path}: unknown section tag {tag}")
    if text is None:
        raise FormatError(f"{path}: container lacks a corpus section")
    c = corpus.Collection.from_text(bytes(text))
    sa0 = np.frombuffer(sa_payload, np.int32) if sa_payload is not None else None
    index = build_index(c, sa0)
    loaded = {}
    for tag, payload in pending:
        obj = _DESERIALIZE[tag](bytes(payload))
        loaded[obj.label] = obj
    return c, index, loaded


def _load_corpus(args) -> corpus.Collection:
    if getattr(args, "manifest", None):
        return corpus.load_manifest(args.manifest)
    if getattr(args, "input", None):
        with open(args.input, "rb") as fh:
            data = fh.read()
        return corpus.ingest_concat(data, separator=args.separator)
    raise FormatError("need --input or --manifest")


def _load_patterns(path) -> corpus.PatternSet:
    return corpus.PatternSet.load(path) if path else corpus.PatternSet([])


def cmd_build(args) -> int:
    c = _load_corpus(args)
    index = build_index(c)
    variants = args.variant or ["sada"]
    built = bench.build_variants(index, c, variants, args.block_threshold)
    sa0 = (np.asarray(index.sa[1:], np.int64) - 1).astype(np.int32)
    sections = [(TAG_CORPUS, "corpus", c.text), (TAG_SA, "sa", sa0.tobytes())]
    for name, obj in zip(variants, built):
        sections.append((_section_tag(name), section_name(name), obj.serialize()))
    out = args.output or "index.dcnt"
    write_container(out, sections)
    print(f"wrote {out}: n={c.n} d={c.d} sections={len(sections)}")
    return 0


def cmd_count(args) -> int:
    _, index, loaded = load_container(args.input)
    if not loaded:
        raise FormatError(f"{args.input}: container holds no counting structure")
    if args.variant:
        if len(args.variant) > 1:
            raise FormatError("count answers with exactly one --variant")
        name = args.variant[0]
        if name not in loaded:
            raise FormatError(
                f"container lacks {name}; present: {', '.join(loaded)}"
            )
        obj = loaded[name]
    else:
        obj = next(iter(loaded.values()))
    s = bench.wrap_index(obj)
    pats = corpus.PatternSet.load(args.patterns)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        for pat in pats.patterns:
            rng = index.find(pat)
            docc = 0 if rng is None else s.counter(rng[0], rng[1], len(pat))
            out.write(f"{pat.decode('latin-1')}\t{docc}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_bench(args) -> int:
    c = _load_corpus(args)
    index = build_index(c)
    names = list(args.variant or bench.ALL_VARIANTS)
    built = bench.build_variants(index, c, names, args.block_threshold)
    structures = [bench.wrap_index(b) for b in built]
    structures.append(bench.baseline_structure(bench.Oracle(index)))
    report = bench.run_bench(
        c, structures, _load_patterns(args.patterns), args.repetitions, index
    )
    out = Path(args.output or "bench.csv")
    bench.write_csv(report, out)
    bench.write_dat(report, out.with_suffix(".dat"))
    bench.plot_bench(report, out.with_suffix(".png"))
    print(f"wrote {out} {out.with_suffix('.dat')} {out.with_suffix('.png')}")
    return 0


def cmd_gen_dna(args) -> int:
    spec = corpus.SyntheticSpec(
        args.base_length,
        args.copies,
        args.mutation_rate,
        args.alphabet_size,
        args.seed,
    )
    c = corpus.generate_dna(spec)
    out = args.output or "corpus.bin"
    c.save(out)
    print(f"wrote {out}: n={c.n} d={c.d}")
    return 0


def cmd_stats(args) -> int:
    c = _load_corpus(args)
    st = bench.table1_stats(c, _load_patterns(args.patterns))
    pairs = bench.stats_pairs(st)
    if args.output:
        bench.write_stats_csv(st, args.output)
        print(f"wrote {args.output}")
    else:
        print(",".join(str(k) for k, _ in pairs))
        print(",".join(str(v) for _, v in pairs))
    return 0


def cmd_analyze_runs(args) -> int:
    total = 1 << args.scale
    m_hi = (args.scale - 8) if args.m_max is None else args.m_max
    # the 2^7 default floor would invert the range at small scales
    m_lo = min(7, m_hi) if args.m_min is None else args.m_min
    if not 0 < m_lo <= m_hi < args.scale:
        raise FormatError(f"need 0 < m-min <= m-max < scale, got {m_lo}..{m_hi}")
    m_range = [1 << k for k in range(m_lo, m_hi + 1)]
    p_range = args.mutation_rate or [0.001, 0.01, 0.1, 1.0]
    report = analysis.run_experiment(
        args.sigma,
        total,
        m_range,
        p_range,
        args.seed,
        total_cap=max(analysis.DEFAULT_TOTAL_CAP, total),
        samples=args.samples,
    )
    out = Path(args.output or "runs.csv")
    analysis.write_csv(report, out)
    analysis.plot_runs(report, out.with_suffix(".png"))
    if args.verbose:
        for m in m_range:
            d = total // m
            print(f"# bound terms for m={m} d={d}:")
            for i, k_i, cap in analysis.bound_intermediates(args.sigma, m, d):
                print(f"#   i={i} k_i={k_i:.3f} max_nonunique={cap:.3f}")
    print(f"wrote {out} {out.with_suffix('.png')}")
    return 0


def _add_corpus_flags(p) -> None:
    p.add_argument("--input", help="concatenated corpus file")
    p.add_argument("--manifest", help="newline-separated list of document files")
    p.add_argument(
        "--separator", type=int, default=0,
        help="document separator byte value (default 0)",
    )


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="doccount",
        description="document counting structures over concatenated collections",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build counting structures into a container")
    _add_corpus_flags(p)
    p.add_argument(
        "--variant", action="append", metavar="NAME",
        help="structure to build, repeatable (default: sada); "
        f"one of: {', '.join(bench.ALL_VARIANTS)}",
    )
    p.add_argument("--block-threshold", type=int, default=pdl.DEFAULT_BLOCK_THRESHOLD,
                   help="split threshold for precomputed blocks (default 256)")
    p.add_argument("--output", "-o", help="container path (default index.dcnt)")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("count", help="answer pattern queries from a container")
    p.add_argument("--input", required=True, help="container file")
    p.add_argument("--patterns", required=True, help="pattern file, one per line")
    p.add_argument("--variant", action="append", metavar="NAME",
                   help="structure to answer with (default: first in container)")
    p.add_argument("--output", "-o", help="write answers here instead of stdout")
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("bench", help="size and timing report over one corpus")
    _add_corpus_flags(p)
    p.add_argument("--variant", action="append", metavar="NAME",
                   help="structure to benchmark, repeatable (default: all)")
    p.add_argument("--patterns", help="pattern file (omit for a size-only run)")
    p.add_argument("--repetitions", type=int, default=100,
                   help="timed count() calls per pattern (default 100; 0 = sizes only)")
    p.add_argument("--block-threshold", type=int, default=pdl.DEFAULT_BLOCK_THRESHOLD)
    p.add_argument("--output", "-o", help="CSV path (default bench.csv); "
                   ".dat and .png land alongside")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("gen-dna", help="generate a mutated-copies collection")
    p.add_argument("--base-length", type=int, default=1 << 7)
    p.add_argument("--copies", type=int, default=1 << 13)
    p.add_argument("--mutation-rate", type=float, default=1.0)
    p.add_argument("--alphabet-size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="corpus path (default corpus.bin)")
    p.set_defaults(fn=cmd_gen_dna)

    p = sub.add_parser("stats", help="corpus statistics row")
    _add_corpus_flags(p)
    p.add_argument("--patterns", help="pattern file for occ/docc columns")
    p.add_argument("--output", "-o", help="CSV path (default: stdout)")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("analyze-runs", help="run-count grid over (m, p)")
    p.add_argument("--sigma", type=int, default=4)
    p.add_argument("--scale", type=int, default=20, choices=range(10, 25),
                   metavar="LOG2", help="log2 of the total collection size "
                   "(default 20; full-scale experiment is 24)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1,
                   help="independent samples per grid cell (default 1)")
    p.add_argument("--mutation-rate", action="append", type=float, metavar="P",
                   help="mutation rate, repeatable (default 0.001 0.01 0.1 1)")
    p.add_argument("--m-min", type=int, help="log2 of the smallest base length")
    p.add_argument("--m-max", type=int, help="log2 of the largest base length")
    p.add_argument("--verbose", action="store_true",
                   help="print the per-length terms behind the bound")
    p.add_argument("--output", "-o", help="CSV path (default runs.csv); "
                   ".png lands alongside")
    p.set_defaults(fn=cmd_analyze_runs)

    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DoccountError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
