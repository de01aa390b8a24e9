"""Document counting structures over concatenated text collections."""

from .corpus import (
    Collection,
    PatternSet,
    SyntheticSpec,
    extract_patterns,
    from_documents,
    generate_dna,
    ingest_concat,
    load_manifest,
)
from .errors import DoccountError
from .suffix import TextIndex, build_index
from .sada import PRESETS, SadaIndex, SadaVariant, build_sada
from .ilcp import build_ilcp, build_ilcp_index, count_ilcp
from .pdl import build_pdl_count, count_pdl
from .bench import ALL_VARIANTS, build_variants, run_bench
from .analysis import run_experiment

__version__ = "0.1.0"

__all__ = [
    "ALL_VARIANTS",
    "Collection",
    "DoccountError",
    "PRESETS",
    "PatternSet",
    "SadaIndex",
    "SadaVariant",
    "SyntheticSpec",
    "TextIndex",
    "build_ilcp",
    "build_ilcp_index",
    "build_index",
    "build_pdl_count",
    "build_sada",
    "build_variants",
    "count_ilcp",
    "count_pdl",
    "extract_patterns",
    "from_documents",
    "generate_dna",
    "ingest_concat",
    "load_manifest",
    "run_bench",
    "run_experiment",
]
