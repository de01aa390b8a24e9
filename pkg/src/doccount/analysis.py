"""Expected-case run statistics for the unary counting bitvector.

On a collection of d point-mutated copies of a random length-m base string,
the number of 1-runs in H' stays near m*sqrt(d) instead of growing with the
collection size m*d.  run_experiment measures the run count over an (m, p)
grid at fixed total size and tabulates it next to the closed-form bound
(sigma/2 + 1) * m * sqrt(d); write_csv and plot_runs turn the grid into a
CSV table and a log-log figure.

Where the bound comes from: call a string unique if it occurs at most once
in every document.  The subtree below a unique string is encoded as a single
run of 1-bits, so any cover of the suffix tree leaves by unique strings
bounds the number of runs.  For fully mutated copies (p = 1) the text is
uniformly random, and a fixed string of length k is non-unique with
probability at most d*m^2 / (2*sigma**(2k)).  With probe lengths
k_i = log_sigma(m*sqrt(d)) + i there are sigma**k_i candidate strings per
length, so the expected number N(i) of non-unique strings of length k_i is
at most m*sqrt(d) / (2*sigma**i).  Counting the strings that first become
unique at each probe length telescopes to a cover of expected size at most

    m*sqrt(d) + (sigma - 1) * sum_i N(i)  <=  (sigma/2 + 1) * m * sqrt(d).

bound_intermediates exposes the per-length terms for verbose reports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .corpus import SyntheticSpec, generate_dna
from .errors import BudgetExceeded, FormatError
from .sada import build_sada, count_runs_of_ones
from .suffix import build_index

DEFAULT_TOTAL_CAP = 1 << 22

CSV_COLUMNS = ("m", "d", "p", "seed", "runs", "bound", "total_size")


def run_bound(sigma: int, m: int, d: int) -> float:
    """Closed-form expected-case cap on 1-runs: (sigma/2 + 1) * m * sqrt(d)."""
    return (sigma / 2 + 1) * m * math.sqrt(d)


def bound_intermediates(sigma: int, m: int, d: int, limit: int = 64):
    """Per-length terms behind run_bound, for verbose reports.

    Row i is (i, k_i, cap_i): k_i = log_sigma(m*sqrt(d)) + i is the i-th probe
    length and cap_i = m*sqrt(d) / (2*sigma**i) caps the expected number of
    non-unique strings of that length.  Rows stop once the cap falls below
    one half; the geometric tail beyond that point is negligible.
    """
    ms = m * math.sqrt(d)
    k0 = math.log(ms, sigma)
    rows = []
    for i in range(limit):
        cap = ms / (2 * sigma**i)
        rows.append((i, k0 + i, cap))
        if cap < 0.5:
            break
    return rows


@dataclass(frozen=True)
class RunsCell:
    m: int
    d: int
    p: float
    seed: int
    runs: int
    bound: float

    @property
    def total_size(self) -> int:
        return self.m * self.d


@dataclass(frozen=True)
class RunsReport:
    sigma: int
    master_seed: int
    cells: tuple


def cell_seed(master: int, mi: int, pi: int, sample: int = 0) -> int:
    """Stable per-cell seed derived from the master seed and grid coordinates."""
    ss = np.random.SeedSequence(master, spawn_key=(mi, pi, sample))
    return int(ss.generate_state(1)[0])


def run_experiment(
    sigma: int,
    total_size: int,
    m_range,
    p_range,
    seed: int,
    total_cap: int = DEFAULT_TOTAL_CAP,
    samples: int = 1,
) -> RunsReport:
    """Measure 1-runs of the plain counting structure over an (m, p) grid.

    Every cell generates d = total_size / m mutated copies of a fresh
    length-m base string, so the collection size is held fixed across the
    grid.  samples > 1 repeats each cell under distinct derived seeds, one
    report row per sample.  total_size beyond total_cap is refused; callers
    running the full-scale experiment must raise the cap explicitly.
    """
    if total_size > total_cap:
        raise BudgetExceeded(
            f"total_size {total_size} exceeds the cap {total_cap}"
        )
    if samples < 1:
        raise FormatError("samples must be >= 1")
    m_range = [int(m) for m in m_range]
    p_range = [float(p) for p in p_range]
    if not m_range or not p_range:
        raise FormatError("m_range and p_range must be non-empty")
    cells = []
    for mi, m in enumerate(m_range):
        if m < 1 or total_size % m:
            raise FormatError(
                f"total_size {total_size} is not a positive multiple of m={m}"
            )
        d = total_size // m
        bound = run_bound(sigma, m, d)
        for pi, p in enumerate(p_range):
            for s in range(samples):
                cseed = cell_seed(seed, mi, pi, s)
                spec = SyntheticSpec(m, d, p, alphabet_size=sigma, seed=cseed)
                idx = build_index(generate_dna(spec))
                runs = count_runs_of_ones(build_sada(idx, "sada"))
                assert runs >= 1
                cells.append(RunsCell(m, d, p, cseed, runs, bound))
    return RunsReport(sigma, seed, tuple(cells))


def write_csv(report: RunsReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for c in report.cells:
            w.writerow([c.m, c.d, c.p, c.seed, c.runs, c.bound, c.total_size])


def plot_runs(report: RunsReport, path) -> None:
    """Render the grid as a log-log figure: one line per mutation rate plus
    the dashed closed-form bound."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_p = {}
    for c in report.cells:
        by_p.setdefault(c.p, {}).setdefault(c.m, []).append(c.runs)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for p in sorted(by_p):
        ms = sorted(by_p[p])
        ys = [float(np.mean(by_p[p][m])) for m in ms]
        ax.plot(ms, ys, marker="o", label=f"p = {p:g}")
    ms = sorted({c.m for c in report.cells})
    bound_of = {c.m: c.bound for c in report.cells}
    ax.plot(
        ms,
        [bound_of[m] for m in ms],
        "k--",
        label="expected-case bound (p = 1)",
    )
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("base string length m")
    ax.set_ylabel("runs of 1-bits in H'")
    total = report.cells[0].total_size if report.cells else 0
    ax.set_title(f"1-runs at fixed collection size {total}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
