"""Matrix ingestion and per-variable summary screening.

A DataMatrix holds a variables-by-samples table; screen() computes the
full summary vector for every variable in parallel and returns ranked
lists by any requested statistic.  Variables that cannot be summarised
(too few observations, no scale) are collected into the ranked list's
`excluded` section rather than aborting the run.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GclmError, ParseError
from .gaussian import std_normal_pdf
from .moments import (MIN_SUMMARY_N, STATISTIC_IDS, Sample, SummaryCalculator)


@dataclass(frozen=True)
class DataMatrix:
    """Variables-by-samples real matrix with a missing-value mask."""

    variable_ids: tuple
    sample_ids: tuple
    values: np.ndarray          # shape (p, n); entries under the mask are nan
    missing: np.ndarray         # boolean, shape (p, n)

    def __post_init__(self):
        if len(set(self.variable_ids)) != len(self.variable_ids):
            raise DomainError("variable ids must be unique")
        if self.values.shape != (len(self.variable_ids), len(self.sample_ids)):
            raise DomainError("values shape does not match id vectors")
        if self.missing.shape != self.values.shape:
            raise DomainError("missing mask shape does not match values")

    @property
    def p(self) -> int:
        return len(self.variable_ids)

    @property
    def n(self) -> int:
        return len(self.sample_ids)

    def row_values(self, variable_id: str) -> np.ndarray:
        """Non-missing observations of one variable."""
        try:
            idx = self.variable_ids.index(variable_id)
        except ValueError:
            raise DomainError(f"unknown variable {variable_id!r}") from None
        return self.values[idx][~self.missing[idx]]


def load_matrix(source, delimiter: str = "\t") -> DataMatrix:
    """Parse a delimited text matrix.

    Expects a header row of sample ids and one row per variable with the
    variable id in the first column.  Non-numeric cells become missing
    values; duplicate variable ids and ragged rows are rejected.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    rows = [line.split(delimiter) for line in lines if line.strip() != ""]
    if not rows:
        raise ParseError("empty matrix file")
    header = rows[0]
    sample_ids = tuple(cell.strip() for cell in header[1:])
    n = len(sample_ids)
    if n == 0:
        raise ParseError("header row names no samples", line=1)
    if len(rows) == 1:
        raise ParseError("matrix has a header but no variable rows")

    variable_ids = []
    seen = set()
    values = np.empty((len(rows) - 1, n))
    missing = np.zeros((len(rows) - 1, n), dtype=bool)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ParseError(
                f"expected {n + 1} columns, found {len(row)}", line=i)
        vid = row[0].strip()
        if vid == "":
            raise ParseError("empty variable id", line=i, column=1)
        if vid in seen:
            raise ParseError(f"duplicate variable id {vid!r}", line=i, column=1)
        seen.add(vid)
        variable_ids.append(vid)
        for j, cell in enumerate(row[1:]):
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                values[i - 2, j] = np.nan
                missing[i - 2, j] = True
    return DataMatrix(tuple(variable_ids), sample_ids, values, missing)


@dataclass(frozen=True)
class RankedList:
    """Variables ordered by one statistic's value (the rank metric)."""

    statistic: str
    entries: tuple            # of (variable_id, rank_metric), sorted
    excluded: tuple = ()      # of (variable_id, reason)
    direction: str = "descending"

    def __post_init__(self):
        metrics = [m for _, m in self.entries]
        if any(not np.isfinite(m) for m in metrics):
            raise DomainError("rank metrics must be finite")

    @property
    def variable_ids(self) -> tuple:
        return tuple(v for v, _ in self.entries)

    @property
    def metrics(self) -> np.ndarray:
        return np.asarray([m for _, m in self.entries])


def _rank_sort_key(direction: str):
    # ties in the metric are broken by variable id, lexicographically
    if direction == "descending":
        return lambda item: (-item[1], item[0])
    return lambda item: (item[1], item[0])


def screen(matrix: DataMatrix, statistics=None, direction: str = "descending",
           calculator: SummaryCalculator | None = None,
           threads: int = 1) -> dict:
    """Ranked lists of all variables by each requested statistic.

    Summaries are computed per variable in parallel; shared caches are
    built in a serial prologue over the distinct per-variable sample
    sizes, so output is identical for any thread count.
    """
    if statistics is None:
        statistics = STATISTIC_IDS
    statistics = tuple(statistics)
    unknown = [s for s in statistics if s not in STATISTIC_IDS]
    if unknown:
        raise DomainError(
            f"unknown statistics {unknown}; available: {list(STATISTIC_IDS)}")
    if direction not in ("ascending", "descending"):
        raise DomainError(f"direction must be ascending or descending, got {direction!r}")
    if threads < 1:
        raise DomainError("threads must be >= 1")
    if calculator is None:
        calculator = SummaryCalculator()

    rows = []
    for idx in range(matrix.p):
        vals = matrix.values[idx][~matrix.missing[idx]]
        rows.append((matrix.variable_ids[idx], vals))

    for _, vals in rows:
        if vals.size >= MIN_SUMMARY_N and np.ptp(vals) > 0.0:
            calculator.prepare(vals.size)

    def one(item):
        vid, vals = item
        try:
            return vid, calculator.summary(Sample(vals)), None
        except GclmError as exc:
            return vid, None, str(exc)

    if threads == 1:
        results = [one(item) for item in rows]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, rows))

    out = {}
    for stat in statistics:
        entries = []
        excluded = []
        for vid, summary, reason in results:
            if summary is None:
                excluded.append((vid, reason))
            else:
                entries.append((vid, float(getattr(summary, stat))))
        entries.sort(key=_rank_sort_key(direction))
        out[stat] = RankedList(statistic=stat, entries=tuple(entries),
                               excluded=tuple(excluded), direction=direction)
    return out


def bottom_k(ranked: RankedList, k: int) -> tuple:
    """The k entries with smallest rank metric, in ascending metric order."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if k > len(ranked.entries):
        raise DomainError(
            f"k={k} exceeds the {len(ranked.entries)} ranked entries")
    ordered = sorted(ranked.entries, key=_rank_sort_key("ascending"))
    return tuple(ordered[:k])


def silverman_bandwidth(values: np.ndarray) -> float:
    """Rule-of-thumb Gaussian-kernel bandwidth 0.9 min(sd, IQR/1.34) n^(-1/5)."""
    values = np.asarray(values, dtype=float)
    sd = values.std(ddof=1)
    q75, q25 = np.percentile(values, [75.0, 25.0])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0.0:
        spread = sd if sd > 0.0 else 1.0
    return 0.9 * spread * values.size ** -0.2


def _kde_curve(values: np.ndarray, grid: np.ndarray, bandwidth: float) -> np.ndarray:
    z = (grid[:, None] - values[None, :]) / bandwidth
    return std_normal_pdf(z).sum(axis=1) / (values.size * bandwidth)


def export_marginal_plot_data(matrix: DataMatrix, variable_ids,
                              labels=None, grid_size: int = 512) -> dict:
    """Plot-ready marginal density document for selected variables.

    Per variable: raw values, a Gaussian-kernel density on a fixed grid
    (Silverman bandwidth), and per-class sub-densities scaled by class
    proportion.  All curves for one variable share the overall bandwidth
    so the sub-densities sum exactly to the overall density.
    """
    doc = {"grid_size": grid_size, "bandwidth_rule": "silverman", "variables": []}
    labels = None if labels is None else list(labels)
    if labels is not None and len(labels) != matrix.n:
        raise DomainError("labels length must equal the sample count")

    for vid in variable_ids:
        try:
            idx = matrix.variable_ids.index(vid)
        except ValueError:
            raise DomainError(f"unknown variable {vid!r}") from None
        keep = ~matrix.missing[idx]
        vals = matrix.values[idx][keep]
        bw = silverman_bandwidth(vals)
        lo, hi = vals.min() - 3.0 * bw, vals.max() + 3.0 * bw
        grid = np.linspace(lo, hi, grid_size)
        density = _kde_curve(vals, grid, bw)
        entry = {
            "variable_id": vid,
            "values": vals.tolist(),
            "bandwidth": float(bw),
            "grid": grid.tolist(),
            "density": density.tolist(),
            "classes": [],
        }
        if labels is not None:
            row_labels = [lab for lab, k in zip(labels, keep) if k]
            for cls in sorted(set(row_labels)):
                sub = vals[np.asarray([lab == cls for lab in row_labels])]
                weight = sub.size / vals.size
                entry["classes"].append({
                    "label": cls,
                    "count": int(sub.size),
                    "proportion": float(weight),
                    "sub_density": (weight * _kde_curve(sub, grid, bw)).tolist(),
                })
        doc["variables"].append(entry)
    return doc


def ranked_list_to_tsv(ranked: RankedList) -> str:
    lines = ["rank\tvariable_id\tmetric"]
    for rank, (vid, metric) in enumerate(ranked.entries, start=1):
        lines.append(f"{rank}\t{vid}\t{metric:.12g}")
    for vid, reason in ranked.excluded:
        lines.append(f"EXCLUDED\t{vid}\t{reason}")
    return "\n".join(lines) + "\n"


def ranked_list_to_json(ranked: RankedList) -> str:
    return json.dumps({
        "statistic": ranked.statistic,
        "direction": ranked.direction,
        "entries": [{"rank": i + 1, "variable_id": v, "metric": m}
                    for i, (v, m) in enumerate(ranked.entries)],
        "excluded": [{"variable_id": v, "reason": r} for v, r in ranked.excluded],
    }, indent=2)
