"""Acceptance gate: one test per shipped guarantee, each printing a
single PASS/FAIL line.  Tolerances are pinned here and nowhere else."""

import io
import itertools
import math
import sys

import numpy as np
import pytest
from scipy import stats as sps

from gclm.distributions import standard_gaussian, tukey_gh, uniform
from gclm.gaussian import rl_polynomial_constants, rl_transform_constants
from gclm.gsea import (enrichment_score, fdr, load_gmt, permutation_null,
                       permutation_p_values)
from gclm.moments import (SummaryCalculator, hl_bias_correction,
                          sample_l_moments, theoretical_moment,
                          theoretical_moment_ratio)
from gclm.polynomials import eval_hermite
from gclm.robustness import (ContaminationSpec, growth_order,
                             influence_estimate, sif_equals_if_check)
from gclm.screening import DataMatrix, screen


_capman = None


@pytest.fixture(autouse=True)
def _expose_capture_manager(request):
    global _capman
    _capman = request.config.pluginmanager.getplugin("capturemanager")
    yield


def report(criterion: str, ok: bool, detail: str) -> None:
    # written past pytest's capture so each run shows one line per criterion
    line = f"\n[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}\n"
    if _capman is not None:
        with _capman.global_and_fixture_disabled():
            sys.stdout.write(line)
            sys.stdout.flush()
    else:
        sys.stdout.write(line)
    assert ok, f"{criterion}: {detail}"


# --------------------------------------------------------------------------
# 1. RL constants match their published four-decimal values
# --------------------------------------------------------------------------

def test_criterion_1_rl_constants():
    c = rl_polynomial_constants()
    slope = rl_transform_constants()["kurt_slope"]
    expected = {"c1": 0.8862, "c2": 1.1816, "c3": 3.4658, "c4": 1.3654}
    errs = {k: abs(c[k] - v) for k, v in expected.items()}
    errs["kurt_slope"] = abs(slope - 1.7560)
    ok = all(e <= 1e-4 for e in errs.values())
    report("criterion 1: RL constants", ok,
           f"c=({c['c1']:.4f},{c['c2']:.4f},{c['c3']:.4f},{c['c4']:.4f}) "
           f"slope={slope:.4f}, max |err|={max(errs.values()):.2e} (tol 1e-4)")


# --------------------------------------------------------------------------
# 2. Gaussian centering of the theoretical moment ratios
# --------------------------------------------------------------------------

def test_criterion_2_gaussian_centering():
    g = standard_gaussian()
    u = uniform()
    hl = [theoretical_moment_ratio(g, "HL", r) for r in (3, 4)]
    rl = [theoretical_moment_ratio(g, "RL", r) for r in (3, 4)]
    lam = [theoretical_moment(u, "L", r) for r in (3, 4)]
    ok = (max(abs(v) for v in hl + rl) <= 1e-8
          and max(abs(v) for v in lam) <= 1e-10)
    report("criterion 2: Gaussian centering", ok,
           f"HL ratios {hl[0]:.2e},{hl[1]:.2e}; RL ratios {rl[0]:.2e},{rl[1]:.2e} "
           f"(tol 1e-8); uniform L-moments {lam[0]:.2e},{lam[1]:.2e} (tol 1e-10)")


# --------------------------------------------------------------------------
# 3. Monte-Carlo HL bias values at n = 20 and n = 50
# --------------------------------------------------------------------------

def test_criterion_3_hl_bias_values():
    b20 = hl_bias_correction(20, 4, replicates=10_000)
    b50 = hl_bias_correction(50, 4, replicates=10_000)
    ok = abs(b20 - (-0.2833)) <= 0.01 and abs(b50 - (-0.1733)) <= 0.01
    report("criterion 3: HL bias values", ok,
           f"n=20: {b20:.4f} (want -0.2833±0.01); n=50: {b50:.4f} (want -0.1733±0.01)")


# --------------------------------------------------------------------------
# 4. Efficient L-moments equal brute-force U-statistic enumeration
# --------------------------------------------------------------------------

def _u_statistic_l_moment(x, r):
    x = np.sort(np.asarray(x, dtype=float))
    total = 0.0
    for subset in itertools.combinations(range(x.size), r):
        total += sum((-1.0) ** k * math.comb(r - 1, k) * x[subset[r - 1 - k]]
                     for k in range(r)) / r
    return total / math.comb(x.size, r)


def test_criterion_4_l_moment_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(4, 13))
        x = rng.standard_normal(n) * rng.uniform(0.5, 3.0)
        lam = sample_l_moments(x, max_r=4)
        for r in (1, 2, 3, 4):
            worst = max(worst, abs(lam[r - 1] - _u_statistic_l_moment(x, r)))
    ok = worst <= 1e-12
    report("criterion 4: L-moment oracle equivalence", ok,
           f"200 samples, n<=12, r<=4; worst |difference| {worst:.2e} (tol 1e-12)")


# --------------------------------------------------------------------------
# 5. Influence functions at the Gaussian match their Hermite closed forms
# --------------------------------------------------------------------------

def test_criterion_5_influence_functions_at_gaussian():
    g = standard_gaussian()
    worst = 0.0
    details = []
    for x in (0.5, 1.0, 2.0, 4.0):
        iv = influence_estimate(ContaminationSpec(g, x), "skewness").value
        sv = influence_estimate(ContaminationSpec(g, x, symmetric=True),
                                "kurtosis").value
        e1 = abs(iv - eval_hermite(3, x)) / abs(eval_hermite(3, x))
        e2 = abs(sv - eval_hermite(4, x)) / abs(eval_hermite(4, x))
        worst = max(worst, e1, e2)
        details.append(f"x={x:g}: {max(e1, e2):.2%}")
    ok = worst <= 0.02
    report("criterion 5: influence functions at Gaussian", ok,
           f"worst relative error {worst:.2%} (tol 2%); " + ", ".join(details))


# --------------------------------------------------------------------------
# 6. Influence growth orders over the h = 0.2 Tukey family
# --------------------------------------------------------------------------

def test_criterion_6_growth_orders():
    base = tukey_gh(0.0, 0.2)
    grid = np.geomspace(1.0, 100.0, 12)
    # the kurtosis influence at this base only enters its quartic regime
    # around x ~ 40 (the quadratic term carries the large base kurtosis),
    # so its fit points concentrate in the top half-decade
    kurt_grid = np.concatenate([np.geomspace(1.0, 30.0, 4),
                                np.geomspace(40.0, 100.0, 8)])
    expected = {"bowley_skewness": 0.0, "ruppert_kurtosis": 0.0,
                "l_skewness": 1.0, "l_kurtosis": 1.0,
                "rl_skewness": 1.0, "rl_kurtosis": 1.0,
                "skewness": 3.0, "kurtosis": 4.0}
    lines = []
    ok = True
    for stat, order in expected.items():
        res = growth_order(stat, base, kurt_grid if stat == "kurtosis" else grid)
        good = abs(res.exponent - order) <= 0.3
        ok = ok and good
        lines.append(f"{stat}={res.exponent:.2f} (want {order:g}±0.3)")
    for stat, conventional in (("hl_skewness", 3.0), ("hl_kurtosis", 4.0)):
        res = growth_order(stat, base, grid)
        log_fit = res.exponent - res.corrected_exponent
        good = 1.0 <= res.exponent <= conventional and log_fit > 0.0
        ok = ok and good
        lines.append(f"{stat}={res.exponent:.2f} (want in [1,{conventional:g}], "
                     f"log-correction fit {log_fit:+.2f})")
    report("criterion 6: growth orders at Tukey h=0.2", ok, "; ".join(lines))


# --------------------------------------------------------------------------
# 7. Symmetric and one-sided influence coincide for fourth-order ratios
# --------------------------------------------------------------------------

def test_criterion_7_sif_equals_if():
    points = (0.5, 1.0, 2.0, 3.0)
    lines = []
    ok = True
    for label, base in (("Gaussian", standard_gaussian()),
                        ("Tukey h=0.2", tukey_gh(0.0, 0.2))):
        for stat in ("l_kurtosis", "rl_kurtosis", "hl_kurtosis"):
            good = sif_equals_if_check(stat, base, points)
            ok = ok and good
            lines.append(f"{stat}@{label}: {'ok' if good else 'MISMATCH'}")
    report("criterion 7: SIF equals IF for fourth-order ratios", ok,
           "; ".join(lines))


# --------------------------------------------------------------------------
# 8. GSEA micro-oracles and permutation p-value uniformity
# --------------------------------------------------------------------------

def test_criterion_8_gsea_micro_oracle():
    from gclm.screening import RankedList
    five = RankedList("s", tuple((f"g{i}", 5.0 - i) for i in range(5)))
    top, _ = enrichment_score(five, {"g0"}, p=0)
    bottom, _ = enrichment_score(five, {"g4"}, p=0)
    exact_ok = (top.es == 1.0 and top.argmax_position == 1
                and bottom.es == -1.0 and bottom.argmax_position == 4)

    ids = [f"v{i:03d}" for i in range(60)]
    sets = load_gmt(io.StringIO("a\td\t" + "\t".join(ids[:18]) + "\n"),
                    universe=ids)
    gen = np.random.default_rng(88)
    pvals = []
    for _ in range(60):
        metrics = gen.standard_normal(60)
        order = np.argsort(-metrics)
        ranked = RankedList("x", tuple((ids[i], float(metrics[i])) for i in order))
        null = permutation_null(ranked, sets, k=1000,
                                seed=int(gen.integers(1 << 30)))
        obs = [enrichment_score(ranked, s.members)[0] for s in sets.sets]
        pvals.append(permutation_p_values(obs, null)[0])
    ks_p = sps.kstest(pvals, "uniform").pvalue
    ok = exact_ok and ks_p > 0.01
    report("criterion 8: GSEA micro-oracle", ok,
           f"hand-computed ES exact: {exact_ok}; null p-value KS p={ks_p:.3f} "
           f"(need > 0.01, K=1000)")


# --------------------------------------------------------------------------
# 9. Planted-signal screening benchmark
# --------------------------------------------------------------------------

def _planted_matrix(seed: int, p: int = 500, n: int = 300, planted: int = 50):
    """Planted variables are left-skewed two-component mixtures; the
    control group is Gaussian with occasional gross outliers, which fool
    conventional skewness but not the robust statistics."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((p, n))
    component = rng.random((planted, n)) < 0.25
    values[:planted] = np.where(component,
                                rng.normal(-2.5, 0.7, (planted, n)),
                                values[:planted])
    n_out = 4
    for i in range(planted, p):
        idx = rng.choice(n, size=n_out, replace=False)
        values[i, idx] = rng.choice([-12.0, 12.0], size=n_out) \
            + rng.standard_normal(n_out)
    ids = tuple(f"g{i:04d}" for i in range(p))
    samples = tuple(f"s{j}" for j in range(n))
    return DataMatrix(ids, samples, values,
                      np.zeros_like(values, dtype=bool)), ids[:50]


def test_criterion_9_planted_signal_benchmark():
    stats_tested = ("skewness", "l_skewness", "hl_skewness")
    calc = SummaryCalculator()
    beats = {"l_skewness": 0, "hl_skewness": 0}
    enriched = {"l_skewness": 0, "hl_skewness": 0}
    n_seeds = 10
    for seed in range(n_seeds):
        matrix, planted_ids = _planted_matrix(seed)
        gmt = io.StringIO("planted\tdesc\t" + "\t".join(planted_ids) + "\n")
        sets = load_gmt(gmt, universe=matrix.variable_ids)
        lists = screen(matrix, stats_tested, direction="ascending",
                       calculator=calc)
        abs_es = {}
        for stat in stats_tested:
            obs, _ = enrichment_score(lists[stat], sets.sets[0].members, p=0)
            abs_es[stat] = abs(obs.es)
            if stat in enriched:
                null = permutation_null(lists[stat], sets, k=1000, seed=seed)
                q = fdr([obs], null)[0].fdr_q
                if q <= 0.25:
                    enriched[stat] += 1
        for stat in beats:
            if abs_es[stat] > abs_es["skewness"]:
                beats[stat] += 1
    ok = all(v >= 9 for v in beats.values()) and all(v >= 9 for v in enriched.values())
    report("criterion 9: planted-signal benchmark", ok,
           f"|ES| beats conventional in {beats} of {n_seeds}; "
           f"enriched at FDR 0.25 in {enriched} of {n_seeds} (need >= 9)")


# --------------------------------------------------------------------------
# 10. Byte-identical CLI outputs across thread counts
# --------------------------------------------------------------------------

def test_criterion_10_thread_determinism(tmp_path):
    from gclm.cli import main
    rng = np.random.default_rng(55)
    p, n = 30, 80
    values = rng.standard_normal((p, n))
    matrix = tmp_path / "m.tsv"
    with open(matrix, "w") as fh:
        fh.write("id\t" + "\t".join(f"s{j}" for j in range(n)) + "\n")
        for i in range(p):
            fh.write(f"v{i:02d}\t" + "\t".join(f"{x:.6f}" for x in values[i]) + "\n")
    gmt = tmp_path / "sets.gmt"
    gmt.write_text("a\td\t" + "\t".join(f"v{i:02d}" for i in range(15)) + "\n"
                   "b\td\t" + "\t".join(f"v{i:02d}" for i in range(15, 30)) + "\n")

    digests = []
    for threads in ("1", "4", "8"):
        out = tmp_path / f"t{threads}"
        assert main(["stats", "--input", str(matrix), "--threads", threads,
                     "--out-dir", str(out)]) == 0
        assert main(["screen", "--input", str(matrix), "--stat", "l_skewness",
                     "--threads", threads, "--out-dir", str(out)]) == 0
        assert main(["gsea", "--input", str(matrix), "--gmt", str(gmt),
                     "--stat", "l_skewness", "--permutations", "200",
                     "--seed", "4", "--threads", threads,
                     "--out-dir", str(out)]) == 0
        # the resolved-config artifact records the thread count itself and
        # is the one file allowed to differ
        blob = {f.name: f.read_bytes() for f in sorted(out.iterdir())
                if not f.name.endswith("_config.json")}
        digests.append(blob)
    ok = digests[0] == digests[1] == digests[2]
    report("criterion 10: thread-count determinism", ok,
           f"{len(digests[0])} output files byte-identical across threads 1/4/8")


# --------------------------------------------------------------------------
# 11. Sample L-kurtosis ratio respects its sharp algebraic bounds
# --------------------------------------------------------------------------

def test_criterion_11_l_kurtosis_bound():
    from gclm.moments import sample_l_moment_ratios
    rng = np.random.default_rng(99)
    draws = [lambda n: rng.standard_normal(n),
             lambda n: rng.exponential(size=n),
             lambda n: rng.standard_cauchy(n),
             lambda n: rng.uniform(size=n),
             lambda n: rng.lognormal(size=n)]
    worst_slack = np.inf
    violations = 0
    for i in range(10_000):
        n = int(rng.integers(20, 200))
        tau3, tau4 = sample_l_moment_ratios(draws[i % len(draws)](n))
        lower = 0.25 * (5.0 * tau3 ** 2 - 1.0)
        if not (lower <= tau4 < 1.0):
            violations += 1
        worst_slack = min(worst_slack, tau4 - lower, 1.0 - tau4)
    ok = violations == 0
    report("criterion 11: L-kurtosis bounds", ok,
           f"0 violations required over 10000 samples (n >= 20), got "
           f"{violations}; smallest slack {worst_slack:.3e}")
