"""Gene-set enrichment analysis over ranked variable lists.

Implements the running-sum enrichment score with hit weights |r_j|^p
(p = 0 is the classic scoring scheme), a label-permutation null, the
pooled two-branch permutation FDR, and two-sided Fisher's exact tests
for comparing how many sets each statistic enriches.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .distributions import spawn_streams
from .errors import DomainError, ParseError
from .screening import DataMatrix, RankedList, screen

DEFAULT_PERMUTATIONS = 1000
DEFAULT_FDR_LEVELS = (0.05, 0.25)
DEFAULT_MIN_SIZE = 15
DEFAULT_MAX_SIZE = 10000


@dataclass(frozen=True)
class GeneSet:
    name: str
    description: str
    members: frozenset


@dataclass(frozen=True)
class GeneSetCollection:
    sets: tuple
    min_size: int = DEFAULT_MIN_SIZE
    max_size: int = DEFAULT_MAX_SIZE
    filtered_out: tuple = ()  # of (name, reason)

    def __post_init__(self):
        names = [s.name for s in self.sets]
        if len(set(names)) != len(names):
            raise DomainError("gene set names must be unique")

    def names(self) -> tuple:
        return tuple(s.name for s in self.sets)


def load_gmt(source, universe=None, min_size: int = DEFAULT_MIN_SIZE,
             max_size: int = DEFAULT_MAX_SIZE) -> GeneSetCollection:
    """Parse GMT text: name, description, then tab-separated member ids.

    Duplicate members within a set are deduplicated.  When a universe of
    variable ids is given, each set is restricted to it and the size
    filter applies to the intersection; undersized and oversized sets are
    moved to `filtered_out` with a reason.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    universe = None if universe is None else frozenset(universe)

    sets = []
    filtered = []
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ParseError("GMT line needs name, description and at least "
                             "one member", line=lineno)
        name, desc = parts[0].strip(), parts[1].strip()
        if name == "":
            raise ParseError("empty gene set name", line=lineno)
        if name in seen:
            raise ParseError(f"duplicate gene set name {name!r}", line=lineno)
        seen.add(name)
        members = frozenset(m.strip() for m in parts[2:] if m.strip() != "")
        if universe is not None:
            members = members & universe
        if len(members) < min_size:
            filtered.append((name, f"only {len(members)} members after filtering "
                                   f"(minimum {min_size})"))
            continue
        if len(members) > max_size:
            filtered.append((name, f"{len(members)} members exceeds maximum {max_size}"))
            continue
        sets.append(GeneSet(name, desc, members))
    return GeneSetCollection(tuple(sets), min_size, max_size, tuple(filtered))


@dataclass(frozen=True)
class EnrichmentResult:
    set_name: str
    es: float
    argmax_position: int      # 1-based index where |running ES| peaks
    p_value: float = math.nan
    fdr_q: float = math.nan
    degenerate: bool = False  # set covers the whole list: no miss mass

    @property
    def direction(self) -> int:
        return 1 if self.es > 0 else -1


def _es_sweep(hits: np.ndarray, weights: np.ndarray, p: int):
    """Running P_hit - P_miss over the list; returns (es, argmax, profile).

    hits marks set membership per position; weights are the |r_j| used
    for p = 1 scoring (ignored when p = 0).
    """
    n = hits.size
    if p == 0:
        hit_mass = hits.astype(float)
    else:
        hit_mass = np.where(hits, weights, 0.0)
    hit_total = hit_mass.sum()
    miss_total = float(n - np.count_nonzero(hits))
    if hit_total <= 0.0:
        raise DomainError("gene set does not intersect the ranked list")
    degenerate = miss_total == 0.0
    p_hit = np.cumsum(hit_mass) / hit_total
    p_miss = np.cumsum(~hits) / miss_total if not degenerate else np.zeros(n)
    profile = p_hit - p_miss
    arg = int(np.argmax(np.abs(profile)))
    return float(profile[arg]), arg + 1, profile, degenerate


def enrichment_score(ranked: RankedList, members, p: int = 0):
    """Signed enrichment score of a member set against a ranked list.

    Returns (EnrichmentResult, running profile).  p selects the hit
    weighting: 0 weights every hit equally (classic scoring), 1 weights
    by |rank metric|.
    """
    if p not in (0, 1):
        raise DomainError(f"weight exponent p must be 0 or 1, got {p}")
    members = frozenset(members)
    ids = ranked.variable_ids
    hits = np.asarray([v in members for v in ids])
    weights = np.abs(ranked.metrics)
    es, arg, profile, degenerate = _es_sweep(hits, weights, p)
    name = getattr(members, "name", "")
    return (EnrichmentResult(set_name=name, es=es, argmax_position=arg,
                             degenerate=degenerate), profile)


def _null_for_permutation(membership: np.ndarray, weights, p, rng):
    """ES of every set against one shared permutation of the gene labels.

    With fixed metrics, shuffling labels is the same as permuting each
    set's membership mask over positions; one permutation is shared by
    all sets so their null scores stay correlated as in the data.
    """
    perm = rng.permutation(membership.shape[1])
    out = np.empty(membership.shape[0])
    for s in range(membership.shape[0]):
        out[s], _, _, _ = _es_sweep(membership[s, perm], weights, p)
    return out


def permutation_null(ranked: RankedList, sets: GeneSetCollection, k: int = DEFAULT_PERMUTATIONS,
                     seed: int = 0, p: int = 0, threads: int = 1) -> np.ndarray:
    """k-by-num_sets matrix of ES values under label permutation.

    Each permutation uses its own generator spawned from the seed, so the
    matrix is identical for any thread count.
    """
    if k < 1:
        raise DomainError("permutation count must be >= 1")
    ids = ranked.variable_ids
    membership = np.asarray([[v in s.members for v in ids] for s in sets.sets])
    if membership.size == 0 or not membership.any(axis=1).all():
        raise DomainError("every gene set must intersect the ranked list")
    weights = np.abs(ranked.metrics)
    streams = spawn_streams(seed, k)

    def one(stream):
        rng = np.random.Generator(np.random.PCG64(stream))
        return _null_for_permutation(membership, weights, p, rng)

    if threads == 1:
        rows = [one(rng) for rng in streams]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, streams))
    return np.vstack(rows)


def permutation_p_values(observed, null_matrix: np.ndarray) -> np.ndarray:
    """Per-set permutation p-value: share of that set's null |ES| >= observed."""
    obs = np.asarray([r.es for r in observed])
    k = null_matrix.shape[0]
    return (1.0 + np.sum(np.abs(null_matrix) >= np.abs(obs)[None, :], axis=0)) / (k + 1.0)


def fdr(observed, null_matrix: np.ndarray) -> list:
    """Pooled two-branch permutation FDR.

    For a positive observed ES, q is the share of positive pooled null ES
    values at least as large; for nonpositive observed ES, the share of
    nonpositive null values at least as small.  An empty same-sign pool
    yields q = 1 with a warning.
    """
    pooled = null_matrix.ravel()
    pos = np.sort(pooled[pooled > 0.0])
    neg = np.sort(pooled[pooled <= 0.0])
    p_values = permutation_p_values(observed, null_matrix)
    out = []
    for res, pval in zip(observed, p_values):
        if res.es > 0.0:
            pool = pos
            count = pool.size - np.searchsorted(pool, res.es, side="left")
        else:
            pool = neg
            count = np.searchsorted(pool, res.es, side="right")
        if pool.size == 0:
            warnings.warn(f"no same-sign null scores for {res.set_name!r}; q set to 1",
                          stacklevel=2)
            q = 1.0
        else:
            q = count / pool.size
        out.append(replace(res, p_value=float(pval), fdr_q=float(min(1.0, q))))
    return out


def enrichment_report(ranked: RankedList, sets: GeneSetCollection,
                      k: int = DEFAULT_PERMUTATIONS, seed: int = 0, p: int = 0,
                      threads: int = 1,
                      fdr_levels=DEFAULT_FDR_LEVELS) -> list:
    """Full per-set enrichment analysis of one ranked list.

    Returns a list of dicts (set, es, n', p, q, enriched flags) sorted by
    q then set name.
    """
    observed = []
    for s in sets.sets:
        res, _ = enrichment_score(ranked, s.members, p=p)
        observed.append(replace(res, set_name=s.name))
    null = permutation_null(ranked, sets, k=k, seed=seed, p=p, threads=threads)
    results = fdr(observed, null)
    rows = []
    for res in results:
        row = {
            "set": res.set_name,
            "es": res.es,
            "argmax_position": res.argmax_position,
            "p_value": res.p_value,
            "fdr_q": res.fdr_q,
            "degenerate": res.degenerate,
        }
        for level in fdr_levels:
            row[f"enriched@{level:g}"] = bool(res.fdr_q <= level)
        rows.append(row)
    rows.sort(key=lambda r: (r["fdr_q"], r["set"]))
    return rows


def _log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def fisher_exact_two_sided(table) -> float:
    """Two-sided Fisher's exact p-value of a 2x2 contingency table.

    Sums hypergeometric point probabilities (computed in log space) of
    all tables with the same margins whose probability does not exceed
    the observed table's.
    """
    (a, b), (c, d) = table
    if min(a, b, c, d) < 0:
        raise DomainError("table counts must be nonnegative")
    row1, row2 = a + b, c + d
    col1 = a + c
    total = row1 + row2
    if total == 0:
        return 1.0

    def log_prob(x):
        return (_log_binomial(row1, x) + _log_binomial(row2, col1 - x)
                - _log_binomial(total, col1))

    lo = max(0, col1 - row2)
    hi = min(col1, row1)
    observed = log_prob(a)
    acc = 0.0
    for x in range(lo, hi + 1):
        lp = log_prob(x)
        if lp <= observed + 1e-9:  # tolerance guards ties against rounding
            acc += math.exp(lp)
    return min(1.0, acc)


def fisher_exact_comparison(count_a: int, count_b: int, total: int) -> float:
    """Two-sided Fisher p for enriched counts of two estimators over the
    same collection of gene sets."""
    if not 0 <= count_a <= total or not 0 <= count_b <= total:
        raise DomainError("counts must lie in [0, total]")
    return fisher_exact_two_sided(((count_a, total - count_a),
                                   (count_b, total - count_b)))


def compare_estimators(matrix: DataMatrix, sets: GeneSetCollection, statistics,
                       fdr_level: float = 0.25, k: int = DEFAULT_PERMUTATIONS,
                       seed: int = 0, p: int = 0, threads: int = 1,
                       direction: str = "descending", calculator=None) -> dict:
    """Enriched-set counts per statistic plus pairwise Fisher p-values.

    All statistics are screened from the same matrix and tested against
    the same permutation seed so the comparison is fair.
    """
    statistics = tuple(statistics)
    if len(statistics) < 2:
        raise DomainError("comparison needs at least two statistics")
    lists = screen(matrix, statistics, direction=direction,
                   calculator=calculator, threads=threads)
    counts = {}
    reports = {}
    for stat in statistics:
        report = enrichment_report(lists[stat], sets, k=k, seed=seed, p=p,
                                   threads=threads)
        reports[stat] = report
        counts[stat] = sum(1 for row in report if row["fdr_q"] <= fdr_level)
    total = len(sets.sets)
    pairwise = {}
    for i, sa in enumerate(statistics):
        for sb in statistics[i + 1:]:
            pairwise[f"{sa}|{sb}"] = fisher_exact_comparison(
                counts[sa], counts[sb], total)
    return {
        "fdr_level": fdr_level,
        "total_sets": total,
        "counts": counts,
        "pairwise_fisher_p": pairwise,
        "reports": reports,
    }
