"""Tests for the run-count experiment grid."""

import csv
import math

import pytest

from doccount import analysis
from doccount.errors import BudgetExceeded, FormatError


class TestBound:
    def test_closed_form(self):
        """Bound is exactly (sigma/2 + 1) * m * sqrt(d)."""
        b = analysis.run_bound(4, 1 << 7, 1 << 13)
        assert b == 3.0 * (1 << 7) * math.sqrt(1 << 13)
        assert 34000 < b < 35000

    def test_intermediates_terminate(self):
        """Per-length rows stop at the first cap below one half."""
        rows = analysis.bound_intermediates(4, 1 << 7, 1 << 13)
        assert len(rows) == 8
        assert rows[0][1] == pytest.approx(6.75)
        assert rows[0][2] == pytest.approx(2.0**12.5)
        assert all(cap >= 0.5 for _, _, cap in rows[:-1])
        assert rows[-1][2] < 0.5

    def test_intermediates_telescope(self):
        """Summed caps stay under the closed form they feed."""
        for sigma, m, d in [(4, 1 << 7, 1 << 13), (2, 64, 256), (8, 32, 1024)]:
            rows = analysis.bound_intermediates(sigma, m, d)
            total = m * math.sqrt(d) + (sigma - 1) * sum(c for _, _, c in rows)
            assert total <= analysis.run_bound(sigma, m, d) + 1e-9


class TestExperiment:
    def test_example_cell(self):
        """Fully mutated 2^20 grid cell falls below its bound."""
        rep = analysis.run_experiment(4, 1 << 20, [1 << 7], [1.0], seed=7)
        (c,) = rep.cells
        assert (c.m, c.d, c.total_size) == (1 << 7, 1 << 13, 1 << 20)
        assert c.bound == analysis.run_bound(4, c.m, c.d)
        assert 1 <= c.runs <= c.bound

    def test_deterministic(self):
        """Identical seed reproduces the grid cell for cell."""
        args = (4, 1 << 12, [1 << 4, 1 << 6], [0.001, 1.0], 11)
        assert analysis.run_experiment(*args) == analysis.run_experiment(*args)

    def test_p_zero_copies(self):
        """Without mutations the run count does not grow with d."""
        r1 = analysis.run_experiment(4, 1 << 10, [1 << 6], [0.0], seed=5)
        r2 = analysis.run_experiment(4, 1 << 12, [1 << 6], [0.0], seed=5)
        assert r1.cells[0].runs == r2.cells[0].runs == 43

    def test_samples_expand_rows(self):
        """samples=k emits k rows per cell with distinct seeds."""
        rep = analysis.run_experiment(4, 1 << 10, [1 << 5], [1.0], 3, samples=2)
        assert len(rep.cells) == 2
        assert rep.cells[0].seed != rep.cells[1].seed
        assert rep.cells[0].m == rep.cells[1].m

    def test_cap_refused(self):
        """Totals beyond the cap raise instead of running."""
        with pytest.raises(BudgetExceeded):
            analysis.run_experiment(4, 1 << 11, [1 << 5], [1.0], 0,
                                    total_cap=1 << 10)

    def test_bad_grid(self):
        """Indivisible m and empty ranges are rejected."""
        with pytest.raises(FormatError):
            analysis.run_experiment(4, 100, [7], [1.0], 0)
        with pytest.raises(FormatError):
            analysis.run_experiment(4, 1 << 10, [], [1.0], 0)
        with pytest.raises(FormatError):
            analysis.run_experiment(4, 1 << 10, [1 << 5], [1.0], 0, samples=0)


class TestOutputs:
    def test_csv_round_trip(self, tmp_path):
        """CSV carries the documented columns with parseable values."""
        rep = analysis.run_experiment(4, 1 << 10, [1 << 4, 1 << 5],
                                      [0.01, 1.0], seed=2)
        path = tmp_path / "runs.csv"
        analysis.write_csv(rep, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(analysis.CSV_COLUMNS)
        assert len(rows) == 1 + len(rep.cells)
        for row, cell in zip(rows[1:], rep.cells):
            assert int(row[0]) == cell.m
            assert int(row[1]) == cell.d
            assert float(row[2]) == cell.p
            assert int(row[4]) == cell.runs
            assert float(row[5]) == cell.bound
            assert int(row[6]) == cell.m * cell.d

    def test_plot_written(self, tmp_path):
        """Figure lands on disk as a real PNG."""
        rep = analysis.run_experiment(4, 1 << 10, [1 << 4, 1 << 5],
                                      [1.0], seed=2)
        path = tmp_path / "runs.png"
        analysis.plot_runs(rep, path)
        assert path.read_bytes()[:4] == b"\x89PNG"
