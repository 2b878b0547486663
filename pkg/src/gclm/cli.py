"""Command-line interface.

Subcommands: stats (summary table for every variable of a matrix),
screen (ranked list + bottom-k + marginal plot data), gsea (enrichment
report or multi-statistic comparison), robustness (influence growth-
order sweep).  Every run writes a resolved-config JSON next to its
outputs and is byte-identical across thread counts for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import GclmError
from .gsea import (DEFAULT_FDR_LEVELS, DEFAULT_PERMUTATIONS, compare_estimators,
                   enrichment_report, enrichment_score, load_gmt)
from .moments import STATISTIC_IDS, SummaryCalculator
from .robustness import EXPECTED_GROWTH_ORDERS, growth_order
from .distributions import tukey_gh
from .screening import (bottom_k, export_marginal_plot_data, load_matrix,
                        ranked_list_to_json, ranked_list_to_tsv, screen)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULTS = {
    "hl_estimator": "sample",
    "permutations": DEFAULT_PERMUTATIONS,
    "fdr_levels": list(DEFAULT_FDR_LEVELS),
    "seed": 0,
    "threads": 1,
    "k": 7,
    "direction": "ascending",
    "delimiter": "\t",
    "weight_exponent": 0,
}


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError:
        # fall back to simple key=value lines
        cfg = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            cfg[key.strip()] = value.strip()
    if not isinstance(cfg, dict):
        raise GclmError("config file must hold a key-value mapping")
    return cfg


def _resolve_config(args) -> dict:
    """Defaults, overridden by --config file, overridden by flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        for key, value in file_cfg.items():
            if key in ("permutations", "seed", "threads", "k", "weight_exponent"):
                value = int(value)
            elif key == "fdr_levels" and isinstance(value, str):
                value = [float(v) for v in value.split(",")]
            cfg[key] = value
    for key in list(cfg):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if getattr(args, "fdr_levels", None) is not None:
        cfg["fdr_levels"] = [float(v) for v in args.fdr_levels.split(",")]
    return cfg


def _emit_run_header(name: str, cfg: dict) -> None:
    pairs = " ".join(f"{k}={v!r}" for k, v in sorted(cfg.items()))
    print(f"[gclm {name}] {pairs}", file=sys.stderr)


def _out_dir(args) -> Path:
    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}", file=sys.stderr)


def _write_resolved_config(out: Path, name: str, cfg: dict) -> None:
    doc = {"subcommand": name, **{k: cfg[k] for k in sorted(cfg)}}
    _write(out / f"{name}_config.json", json.dumps(doc, indent=2) + "\n")


def _summary_tsv(matrix, calculator) -> str:
    header = "variable_id\t" + "\t".join(STATISTIC_IDS)
    lines = [header]
    for idx, vid in enumerate(matrix.variable_ids):
        vals = matrix.values[idx][~matrix.missing[idx]]
        try:
            s = calculator.summary(vals)
            cells = [f"{getattr(s, name):.12g}" for name in STATISTIC_IDS]
            lines.append(vid + "\t" + "\t".join(cells))
        except GclmError as exc:
            lines.append(vid + "\tEXCLUDED: " + str(exc))
    return "\n".join(lines) + "\n"


def cmd_stats(args) -> int:
    cfg = _resolve_config(args)
    _emit_run_header("stats", cfg)
    matrix = load_matrix(args.input, delimiter=cfg["delimiter"])
    calculator = SummaryCalculator(hl_estimator=cfg["hl_estimator"])
    out = _out_dir(args)
    _write(out / "summary_statistics.tsv", _summary_tsv(matrix, calculator))
    _write_resolved_config(out, "stats", cfg)
    return EXIT_OK


def cmd_screen(args) -> int:
    cfg = _resolve_config(args)
    _emit_run_header("screen", cfg)
    matrix = load_matrix(args.input, delimiter=cfg["delimiter"])
    calculator = SummaryCalculator(hl_estimator=cfg["hl_estimator"])
    stat = args.stat
    ranked = screen(matrix, [stat], direction=cfg["direction"],
                    calculator=calculator, threads=int(cfg["threads"]))[stat]
    k = min(int(cfg["k"]), len(ranked.entries))
    selection = bottom_k(ranked, k)
    out = _out_dir(args)
    _write(out / f"ranked_{stat}.tsv", ranked_list_to_tsv(ranked))
    _write(out / f"ranked_{stat}.json", ranked_list_to_json(ranked))
    sel_lines = ["variable_id\tmetric"]
    sel_lines += [f"{vid}\t{metric:.12g}" for vid, metric in selection]
    _write(out / f"bottom_{k}_{stat}.tsv", "\n".join(sel_lines) + "\n")
    plot = export_marginal_plot_data(matrix, [vid for vid, _ in selection])
    _write(out / f"marginals_{stat}.json", json.dumps(plot, indent=2) + "\n")
    _write_resolved_config(out, "screen", cfg)
    return EXIT_OK


def cmd_gsea(args) -> int:
    cfg = _resolve_config(args)
    _emit_run_header("gsea", cfg)
    matrix = load_matrix(args.input, delimiter=cfg["delimiter"])
    calculator = SummaryCalculator(hl_estimator=cfg["hl_estimator"])
    sets = load_gmt(args.gmt, universe=matrix.variable_ids)
    if not sets.sets:
        print("error: no gene set survives size filtering against the matrix",
              file=sys.stderr)
        return EXIT_FAILURE
    out = _out_dir(args)
    threads = int(cfg["threads"])
    seed = int(cfg["seed"])
    k = int(cfg["permutations"])
    p = int(cfg["weight_exponent"])

    stats_list = [s.strip() for s in (args.stats or args.stat or "").split(",")
                  if s.strip()]
    if len(stats_list) >= 2:
        table = compare_estimators(
            matrix, sets, stats_list, fdr_level=max(cfg["fdr_levels"]),
            k=k, seed=seed, p=p, threads=threads,
            direction=cfg["direction"], calculator=calculator)
        table = {key: val for key, val in table.items() if key != "reports"}
        _write(out / "comparison.json", json.dumps(table, indent=2) + "\n")
        _write_resolved_config(out, "gsea", cfg)
        return EXIT_OK

    stat = stats_list[0] if stats_list else "l_skewness"
    ranked = screen(matrix, [stat], direction=cfg["direction"],
                    calculator=calculator, threads=threads)[stat]
    report = enrichment_report(ranked, sets, k=k, seed=seed, p=p,
                               threads=threads, fdr_levels=cfg["fdr_levels"])
    header = ["set", "es", "argmax_position", "p_value", "fdr_q"]
    header += [f"enriched@{lvl:g}" for lvl in cfg["fdr_levels"]]
    lines = ["\t".join(header)]
    for row in report:
        lines.append("\t".join(str(row[col]) for col in header))
    _write(out / f"enrichment_{stat}.tsv", "\n".join(lines) + "\n")
    _write(out / f"enrichment_{stat}.json", json.dumps(report, indent=2) + "\n")

    # running-ES profiles of the top sets, for external plotting
    members_by_name = {s.name: s.members for s in sets.sets}
    profiles = {}
    for row in report[:5]:
        _, profile = enrichment_score(ranked, members_by_name[row["set"]], p=p)
        profiles[row["set"]] = profile.tolist()
    _write(out / f"es_profiles_{stat}.json", json.dumps(profiles, indent=2) + "\n")
    _write_resolved_config(out, "gsea", cfg)
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg = _resolve_config(args)
    _emit_run_header("robustness", cfg)
    h_values = [float(v) for v in (args.h_values or "0.2").split(",") if v.strip()]
    if not h_values:
        print("error: at least one h value is required", file=sys.stderr)
        return EXIT_USAGE
    if any(h <= 0.0 for h in h_values):
        print("error: h values must be positive", file=sys.stderr)
        return EXIT_USAGE
    stats_list = [s.strip() for s in (args.stats or "").split(",") if s.strip()]
    if not stats_list:
        stats_list = list(EXPECTED_GROWTH_ORDERS)
    unknown = [s for s in stats_list if s not in EXPECTED_GROWTH_ORDERS]
    if unknown:
        print(f"error: unknown statistics {unknown}; available: "
              f"{sorted(EXPECTED_GROWTH_ORDERS)}", file=sys.stderr)
        return EXIT_USAGE

    grid = np.geomspace(float(args.x_min), float(args.x_max), int(args.x_points))
    out = _out_dir(args)
    lines = ["statistic\th\texpected_order\tfitted_exponent\tcorrected_exponent"
             "\tr_squared\tfit_lo\tfit_hi\tstatus"]
    for h in h_values:
        base = tukey_gh(0.0, h)
        for stat in stats_list:
            expected = EXPECTED_GROWTH_ORDERS[stat]
            try:
                res = growth_order(stat, base, grid)
                ok = abs(res.corrected_exponent - expected) <= 0.3
                lines.append("\t".join([
                    stat, f"{h:g}", f"{expected:g}", f"{res.exponent:.4f}",
                    f"{res.corrected_exponent:.4f}", f"{res.r_squared:.4f}",
                    f"{res.fit_range[0]:.4g}", f"{res.fit_range[1]:.4g}",
                    "pass" if ok else "fail"]))
            except GclmError as exc:
                lines.append("\t".join([stat, f"{h:g}", f"{expected:g}",
                                        "nan", "nan", "nan", "nan", "nan",
                                        f"error: {exc}"]))
    _write(out / "growth_orders.tsv", "\n".join(lines) + "\n")
    _write_resolved_config(out, "robustness", cfg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gclm",
        description="Robust Gaussian-centered summary statistics, variable "
                    "screening, and enrichment analysis.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, input_required=True):
        if input_required:
            p.add_argument("--input", required=True, help="matrix TSV path")
        p.add_argument("--hl-estimator", dest="hl_estimator",
                       choices=("sample", "bh", "plugin"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--delimiter", default=None)
        p.add_argument("--config", default=None, help="JSON or key=value file")

    p_stats = sub.add_parser("stats", help="summary statistics for every variable")
    common(p_stats)
    p_stats.set_defaults(func=cmd_stats)

    p_screen = sub.add_parser("screen", help="ranked list and bottom-k selection")
    common(p_screen)
    p_screen.add_argument("--stat", default="l_skewness", choices=STATISTIC_IDS)
    p_screen.add_argument("--k", type=int, default=None)
    p_screen.add_argument("--direction", choices=("ascending", "descending"),
                          default=None)
    p_screen.set_defaults(func=cmd_screen)

    p_gsea = sub.add_parser("gsea", help="enrichment analysis of ranked lists")
    common(p_gsea)
    p_gsea.add_argument("--gmt", required=True, help="gene-set GMT path")
    p_gsea.add_argument("--stat", default=None)
    p_gsea.add_argument("--stats", default=None,
                        help="comma-separated statistics for comparison mode")
    p_gsea.add_argument("--permutations", type=int, default=None)
    p_gsea.add_argument("--fdr-levels", dest="fdr_levels", default=None,
                        help="comma-separated FDR levels")
    p_gsea.add_argument("--direction", choices=("ascending", "descending"),
                        default=None)
    p_gsea.set_defaults(func=cmd_gsea)

    p_rob = sub.add_parser("robustness", help="influence growth-order sweep")
    common(p_rob, input_required=False)
    p_rob.add_argument("--stats", default=None,
                       help="comma-separated functional ids")
    p_rob.add_argument("--h-values", dest="h_values", default=None,
                       help="comma-separated positive h values")
    p_rob.add_argument("--x-min", dest="x_min", default=1.0, type=float)
    p_rob.add_argument("--x-max", dest="x_max", default=100.0, type=float)
    p_rob.add_argument("--x-points", dest="x_points", default=12, type=int)
    p_rob.set_defaults(func=cmd_robustness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except GclmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
