"""Screen a simulated expression-like matrix and test set enrichment.

Builds a 200-variable x 150-sample matrix in which 25 "planted"
variables follow a left-skewed two-component mixture while the rest
are Gaussian with a few gross outliers.  Ranks all variables by
conventional and by L-moment skewness, then runs the permutation
enrichment test for the planted set against each ranking.  The
robust ranking concentrates the planted variables near the top; the
conventional one is diluted by the outliers.

Run:  python3 demos/02_screening_and_enrichment.py
"""

import io

import numpy as np

from gclm import (DataMatrix, enrichment_score, fdr, load_gmt,
                  permutation_null, screen)

rng = np.random.default_rng(11)
p, n, planted = 200, 150, 25
values = rng.standard_normal((p, n))
mix = rng.random((planted, n)) < 0.25
values[:planted] = np.where(mix, rng.normal(-2.5, 0.7, (planted, n)),
                            values[:planted])
for i in range(planted, p):
    idx = rng.choice(n, 3, replace=False)
    values[i, idx] = rng.choice([-8.0, 8.0], 3)

ids = tuple(f"g{i:03d}" for i in range(p))
matrix = DataMatrix(ids, tuple(f"s{j}" for j in range(n)), values,
                    np.zeros_like(values, dtype=bool))

gmt = io.StringIO("planted\tdemo\t" + "\t".join(ids[:planted]) + "\n")
sets = load_gmt(gmt, universe=ids)

lists = screen(matrix, ("skewness", "l_skewness"), direction="ascending")
for stat, ranked in lists.items():
    top = ranked.variable_ids[:planted]
    recovered = sum(1 for v in top if v in sets.sets[0].members)
    obs, _ = enrichment_score(ranked, sets.sets[0].members)
    null = permutation_null(ranked, sets, k=1000, seed=3)
    result = fdr([obs], null)[0]
    print(f"{stat:<12} planted in top {planted}: {recovered:>2}/{planted}"
          f"   ES={obs.es:+.3f}  p={result.p_value:.4f}  q={result.fdr_q:.4f}")
