"""Command-line entry point: regenerate the tables and figure data.

    prophet-lab <table1|heatmap|regret|convergence|competition|simulate|verify>
                [--config cfg.json] [--out path] [--seed u64]
                [--format csv|json] [--no-plot]

Configuration is a single JSON document; command-line flags override config
fields, which override built-in defaults.  All numeric output is rendered
with 7 significant digits; CSV uses comma separators, '.' decimals, LF line
endings, and a mandatory header row.  Report commands additionally render a
PNG figure next to the delimited output unless --no-plot is given.
PROPHET_LAB_THREADS caps grid parallelism.  Every command is deterministic
given its config.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import distributions as dist
from . import plots
from .asymptotics import (
    acr_dp,
    apx_ce,
    ce_coefficients,
    competition_complexity,
    dp_coefficients,
    large_k_approx,
    ratio_grid,
    worst_case_sweep,
)
from .numerics import ConvergenceError
from .simulation import PolicySpec, run_policy, run_prophet
from .values import ce_values, dp_table, dp_values, prophet_asymptotic, prophet_value
from .verify import run_suite


class ConfigError(ValueError):
    """Bad or missing run-configuration field."""


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".7g")


def parse_grid(spec) -> list[float]:
    """Grid spec "start:stop:step" (inclusive stop) or an explicit list."""
    if isinstance(spec, (list, tuple)):
        values = [float(v) for v in spec]
    elif isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec must be 'start:stop:step', got {spec!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"non-numeric grid field in {spec!r}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"grid spec {spec!r} must have step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        values = [start + i * step for i in range(count) if start + i * step <= stop + step * 1e-9]
    else:
        raise ConfigError(f"grid must be a list or 'start:stop:step' string, got {spec!r}")
    if not values:
        raise ConfigError("grid is empty")
    return values


def _grid_step(values: list[float]) -> float:
    if len(values) < 2:
        return math.inf
    return min(b - a for a, b in zip(values, values[1:]))


def _write_rows(header, rows, out, fmt):
    """Rows to CSV or JSON; stdout when out is None.  Returns the text."""
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps(payload, indent=2, default=float) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return text


def _maybe_plot(render, rows, out, no_plot) -> str | None:
    if no_plot or out is None or not rows:
        return None
    return render(rows, Path(out).with_suffix(".png"))


_TABLE1_HEADER = [
    "k",
    "worst_acr_dp",
    "gamma_star_dp",
    "worst_apx_ce",
    "gamma_star_ce",
    "worst_ce_over_dp",
    "gamma_star_ratio",
]


def cmd_table1(config: dict, out=None, fmt="csv", no_plot=False) -> list:
    k_list = config.get("k_list", [1, 2, 3, 5, 10, 20, 50, 100, 200])
    grid = parse_grid(config.get("gamma_grid", "0.001:0.999:0.001"))
    if _grid_step(grid) > 0.05:
        warnings.warn(
            "gamma grid step exceeds 0.05: boundary minima near 0.999 may be missed",
            stacklevel=2,
        )
    rows = worst_case_sweep(k_list, grid)
    table = [
        (r.k, r.worst_acr, r.gamma_star_dp, r.worst_apx, r.gamma_star_ce,
         r.worst_ce_over_dp, r.gamma_star_ratio)
        for r in rows
    ]
    _write_rows(_TABLE1_HEADER, table, out, fmt)
    _maybe_plot(plots.render_table1, rows, out, no_plot)
    return table


_HEATMAP_HEADER = ["k", "gamma", "acr_dp", "apx_ce", "ratio_ce_dp"]


def cmd_heatmap(config: dict, out=None, fmt="csv", no_plot=False) -> list:
    k_list = config.get("k_list", list(range(1, 51)))
    grid = parse_grid(config.get("gamma_grid", "0.025:0.975:0.025"))
    rows = ratio_grid(k_list, grid)
    _write_rows(_HEATMAP_HEADER, rows, out, fmt)
    _maybe_plot(plots.render_heatmap, rows, out, no_plot)
    return rows


_REGRET_HEADER = ["alpha", "n", "k", "v_dp", "v_ce", "gap", "gap_scaled"]


def cmd_regret_scaling(config: dict, out=None, fmt="csv", no_plot=False) -> list:
    spec = config.get("distribution", {"family": "pareto", "gamma": 0.7})
    d = dist.from_config(spec)
    if d.family != "pareto":
        raise ConfigError("regret scaling runs on the pareto family, whose "
                          "closed-form tail integrals keep the recursions exact")
    alphas = [float(a) for a in config.get("alpha", [0.4, 0.6, 0.8])]
    n_grid = sorted(int(n) for n in config.get("n_grid", [2**e for e in range(10, 18)]))
    rows = []
    for alpha in alphas:
        if not (0.0 < alpha <= 1.0):
            raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
        budgets = {n: (n if alpha == 1.0 else int(n**alpha)) for n in n_grid}
        usable = [n for n in n_grid if budgets[n] >= 1]
        for n in n_grid:
            if budgets[n] < 1:
                warnings.warn(f"skipping n={n}: budget floor(n^{alpha:g}) is zero", stacklevel=2)
        if not usable:
            continue
        k_max = budgets[usable[-1]]
        dp_rows = dp_values(d, usable[-1], k_max, checkpoints=usable)
        ce_rows = ce_values(d, usable[-1], k_max, checkpoints=usable)
        for n in usable:
            k = budgets[n]
            v_dp = float(dp_rows[n][k])
            v_ce = float(ce_rows[n][k])
            gap = v_dp - v_ce
            rows.append({
                "alpha": alpha, "n": n, "k": k, "v_dp": v_dp, "v_ce": v_ce,
                "gap": gap, "gap_scaled": gap / (n / k) ** d.gamma,
            })
    table = [[r[h] for h in _REGRET_HEADER] for r in rows]
    _write_rows(_REGRET_HEADER, table, out, fmt)
    _maybe_plot(plots.render_regret, rows, out, no_plot)
    return rows


_CONVERGENCE_HEADER = [
    "n", "k", "v_dp_scaled", "v_ce_scaled", "ratio_dp", "ratio_ce",
    "target_acr", "target_apx", "prophet", "gap_prophet_dp",
]


def cmd_convergence(config: dict, out=None, fmt="csv", no_plot=False) -> list:
    spec = config.get("distribution", {"family": "pareto", "gamma": 0.5})
    d = dist.from_config(spec)
    k = int(config.get("k", 1))
    n_grid = sorted(int(n) for n in config.get("n_grid", [10**e for e in range(2, 6)]))
    g = d.gamma
    target_acr = acr_dp(g, k)
    target_apx = apx_ce(g, k)
    rows = []
    dp_rows = dp_values(d, n_grid[-1], k, checkpoints=n_grid)
    ce_rows = ce_values(d, n_grid[-1], k, checkpoints=n_grid)
    for n in n_grid:
        u_n, _ = d.evt_scales(n)
        v_dp = float(dp_rows[n][k])
        v_ce = float(ce_rows[n][k])
        try:
            mu = prophet_value(d, n, k).value
        except ConvergenceError:
            mu = prophet_asymptotic(d, n, k)
        rows.append({
            "n": n, "k": k, "v_dp_scaled": v_dp / u_n, "v_ce_scaled": v_ce / u_n,
            "ratio_dp": v_dp / mu, "ratio_ce": v_ce / mu,
            "target_acr": target_acr, "target_apx": target_apx,
            "prophet": mu, "gap_prophet_dp": mu - v_dp,
        })
    table = [[r[h] for h in _CONVERGENCE_HEADER] for r in rows]
    _write_rows(_CONVERGENCE_HEADER, table, out, fmt)
    _maybe_plot(plots.render_convergence, rows, out, no_plot)
    return rows


_COMPETITION_HEADER = ["k", "gamma", "cc_dp", "cc_ce", "cc_large_k_dp"]


def cmd_competition(config: dict, out=None, fmt="csv", no_plot=False) -> list:
    k_list = sorted(set(int(k) for k in config.get("k_list", [1, 2, 5, 10, 20, 50, 100, 200])))
    grid = parse_grid(config.get("gamma_grid", [0.25, 0.5, 0.75]))
    rows = []
    for k in k_list:
        for g in grid:
            cc_dp = competition_complexity(g, k, "dp")
            cc_ce = competition_complexity(g, k, "ce")
            approx = large_k_approx(g, k, "cc_dp") if 0.0 < g < 1.0 else 1.0
            rows.append({"k": k, "gamma": g, "cc_dp": cc_dp, "cc_ce": cc_ce,
                         "cc_large_k_dp": approx})
    table = [[r[h] for h in _COMPETITION_HEADER] for r in rows]
    _write_rows(_COMPETITION_HEADER, table, out, fmt)
    _maybe_plot(plots.render_competition, rows, out, no_plot)
    return rows


def cmd_simulate(config: dict, out=None, fmt="json", no_plot=False) -> dict:
    spec = config.get("distribution", {"family": "pareto", "gamma": 0.5})
    d = dist.from_config(spec)
    n = int(config.get("n", 10))
    k = int(config.get("k", 2))
    reps = int(config.get("reps", 100_000))
    seed = int(config.get("seed", 1))
    policy_name = config.get("policy", "ce")
    dump_path = config.get("dump_replications")
    collect = dump_path is not None
    if policy_name == "dp":
        policy = PolicySpec.dp_thresholds(dp_table(d, n, k))
    elif policy_name == "ce":
        policy = PolicySpec.ce_quantiles()
    elif policy_name == "fixed":
        if "threshold" not in config:
            raise ConfigError("fixed policy requires a 'threshold' field")
        policy = PolicySpec.fixed_threshold(float(config["threshold"]))
    elif policy_name == "prophet":
        policy = None
    else:
        raise ConfigError(f"unknown policy {policy_name!r}")
    if policy is None:
        result = run_prophet(d, n, k, reps, seed, collect=collect)
    else:
        result = run_policy(d, policy, n, k, reps, seed, collect=collect)
    if collect:
        est, values = result
        lines = ["replication,value"]
        lines += [f"{i},{_fmt(v)}" for i, v in enumerate(values)]
        Path(dump_path).write_text("\n".join(lines) + "\n")
    else:
        est = result
    payload = est.to_dict()
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return payload


def cmd_verify(config: dict, out=None, fmt="json", no_plot=False) -> dict:
    report = run_suite(config)
    text = json.dumps(report, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    return report


_COMMANDS = {
    "table1": cmd_table1,
    "heatmap": cmd_heatmap,
    "regret": cmd_regret_scaling,
    "convergence": cmd_convergence,
    "competition": cmd_competition,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prophet-lab",
        description="Finite-horizon selection laboratory: tables, figure data, verification",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", type=Path, default=None, help="JSON config document")
    parser.add_argument("--out", type=Path, default=None, help="output path (stdout if omitted)")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    parser.add_argument("--format", choices=["csv", "json"], default=None)
    parser.add_argument("--no-plot", action="store_true", help="skip the PNG next to the output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = {}
    if args.config is not None:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 2
    if args.seed is not None:
        config["seed"] = args.seed
    fmt = args.format or config.get("format") or ("json" if args.command in ("simulate", "verify") else "csv")
    try:
        result = _COMMANDS[args.command](config, out=args.out, fmt=fmt, no_plot=args.no_plot)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify" and not result["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
