"""Command-line entry point.

Subcommands:
  run       execute a Monte Carlo campaign, write CSV + JSON results
  sweep     run paired campaigns along one scenario axis
  validate  run the numerical property suite and the derived-values ledger
  oracle    exhaustive phase-grid search on a tiny instance

Exit codes: 0 success, 1 usage, 2 configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, active, gain, oracle, passive, repro, sdp, sim
from .channel import build_statistics
from .config import ConfigError, ScenarioConfig, coerce_value, load_config
from .geometry import place_nodes

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _output_dir(args) -> Path:
    out = os.environ.get("CFIRS_OUTPUT_DIR") or args.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_with_overrides(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    if args.override:
        updates = {}
        for item in args.override:
            if "=" not in item:
                raise ConfigError(f"override must look like key=value: {item!r}")
            key, raw = item.split("=", 1)
            leaf = key.rsplit(".", 1)[-1]
            updates[leaf] = coerce_value(leaf, raw)
        config = config.replace(**updates)
    return config


def _write_error_report(outdir: Path, kind: str, message: str) -> None:
    try:
        with open(outdir / "error.json", "w") as fh:
            json.dump({"error": kind, "message": message}, fh, indent=2)
    except OSError:
        pass


def cmd_run(args) -> int:
    outdir = _output_dir(args)
    try:
        config = _load_with_overrides(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _write_error_report(outdir, "config", str(exc))
        return EXIT_CONFIG
    try:
        result = sim.run_campaign(
            config, drops=args.drops, schemes=args.schemes, seed=args.seed,
            T=args.realizations, sdp_gap=args.sdp_gap, jobs=args.jobs,
            progress=not args.quiet)
    except (sim.CampaignError, Exception) as exc:  # numerical / runtime
        print(f"campaign failed: {exc}", file=sys.stderr)
        _write_error_report(outdir, "numerical", str(exc))
        return EXIT_NUMERICAL
    result.to_csv(outdir / "min_rates.csv")
    result.to_json(outdir / "summary.json")
    if not args.quiet:
        for scheme in result.schemes:
            print(f"{scheme}: median={result.medians[scheme]:.4f} "
                  f"mean={result.means[scheme]:.4f} bits/s/Hz")
    return EXIT_OK


def cmd_sweep(args) -> int:
    outdir = _output_dir(args)
    try:
        config = _load_with_overrides(args)
        values = [coerce_value({"P_bar": "P_bar_dbm"}.get(args.axis, args.axis),
                               v) for v in args.values]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _write_error_report(outdir, "config", str(exc))
        return EXIT_CONFIG
    try:
        results = sim.sweep(config, args.axis, values, drops=args.drops,
                            schemes=args.schemes, seed=args.seed,
                            T=args.realizations, sdp_gap=args.sdp_gap,
                            jobs=args.jobs)
    except Exception as exc:  # noqa: BLE001
        print(f"sweep failed: {exc}", file=sys.stderr)
        _write_error_report(outdir, "numerical", str(exc))
        return EXIT_NUMERICAL
    table = []
    for value, res in zip(values, results):
        tag = f"{args.axis}_{value:g}"
        res.to_csv(outdir / f"min_rates_{tag}.csv")
        res.to_json(outdir / f"summary_{tag}.json")
        row = {"value": value}
        row.update({f"mean_{s}": res.means[s] for s in res.schemes})
        table.append(row)
    with open(outdir / "sweep_table.json", "w") as fh:
        json.dump({"axis": args.axis, "rows": table}, fh, indent=2)
    if not args.quiet:
        for row in table:
            print(row)
    return EXIT_OK


def _validate_properties(config: ScenarioConfig, rng: np.random.Generator):
    """Fast numerical property suite; yields (name, passed, margin)."""
    # ZF identity on random channels
    H = (rng.standard_normal((16, 4)) + 1j * rng.standard_normal((16, 4)))
    err = np.abs(active.zf_precoder(H, 4).W.conj().T @ H - np.eye(4)).max()
    yield "zf-identity", err < 1e-9, err
    # closed-form gain vs Monte Carlo
    cfg = ScenarioConfig(L=2, R=2, K=2, M=2, N=4)
    stats = build_statistics(cfg, place_nodes(cfg, 11))
    forms = gain.build_all_forms(stats)
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.R * cfg.N))
    from .channel import assemble_overall, draw_realization
    acc = np.zeros(cfg.K)
    T = 20000
    for _ in range(T):
        Hs = assemble_overall(draw_realization(stats, rng), theta)
        acc += np.sum(np.abs(Hs) ** 2, axis=0) / T
    rel = max(abs(forms[k].value(theta) - acc[k]) / acc[k]
              for k in range(cfg.K))
    yield "gain-closed-form-vs-mc", rel < 0.05, rel
    # SDR upper-bounds the exhaustive grid at R*N = 4
    toy = ScenarioConfig(L=2, R=2, K=2, M=2, N=2)
    tstats = build_statistics(toy, place_nodes(toy, 3))
    tforms = gain.build_all_forms(tstats)
    problem = passive.build_p2(tforms)
    sol = sdp.solve(problem, method="splitting")
    grid = oracle.grid_search(tforms, levels=16)
    slack = (sol.objective - grid.value) / abs(grid.value)
    yield "sdr-upper-bounds-grid", sol.objective >= grid.value * (1 - 1e-6), slack
    theta_hat = passive.extract_theta(sol, tforms, 200, rng)
    achieved = passive.min_gain(tforms, theta_hat.theta)
    base = min(qf.c for qf in tforms)
    frac = (achieved - base) / max(grid.value - base, 1e-300)
    yield "extraction-reaches-90pct-of-grid", frac >= 0.9, frac


def cmd_validate(args) -> int:
    rng = np.random.default_rng(args.seed)
    failed = 0
    for name, ok, margin in _validate_properties(ScenarioConfig(), rng):
        print(f"{'PASS' if ok else 'FAIL'} {name} (margin {margin:.3e})")
        failed += 0 if ok else 1
    try:
        report = repro.regenerate_derived_values()
    except FileNotFoundError:
        print("FAIL derived-values ledger missing")
        failed += 1
    else:
        for entry in report:
            ok = entry["status"] == "pass"
            print(f"{'PASS' if ok else 'FAIL'} derived:{entry['id']} "
                  f"({entry['status']})")
            failed += 0 if ok else 1
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def cmd_oracle(args) -> int:
    if args.rn > oracle.MAX_DIMENSION or args.levels > oracle.MAX_LEVELS:
        print(f"instance too large: rn <= {oracle.MAX_DIMENSION}, "
              f"levels <= {oracle.MAX_LEVELS}", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    forms = []
    for _ in range(args.ues):
        X = rng.standard_normal((args.rn, args.rn)) \
            + 1j * rng.standard_normal((args.rn, args.rn))
        A = X @ X.conj().T / args.rn
        b = (rng.standard_normal(args.rn)
             + 1j * rng.standard_normal(args.rn)) * 0.3
        forms.append(gain.QuadraticForm(A=A, b=b, c=1.0))
    grid = oracle.grid_search(forms, levels=args.levels)
    sol = sdp.solve(passive.build_p2(forms), method="splitting")
    theta_hat = passive.extract_theta(sol, forms, 200, rng)
    out = {
        "grid_optimum": grid.value,
        "evaluations": grid.evaluations,
        "sdp_objective": sol.objective,
        "extracted_objective": passive.min_gain(forms, theta_hat.theta),
    }
    print(json.dumps(out, indent=2))
    outdir = _output_dir(args)
    with open(outdir / "oracle.json", "w") as fh:
        json.dump(out, fh, indent=2)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="cfirs",
                     description="IRS-assisted cell-free MIMO max-min "
                                 "rate simulation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML scenario configuration file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--drops", type=int, default=sim.DEFAULT_DROPS)
        p.add_argument("--realizations", type=int,
                       default=sim.DEFAULT_REALIZATIONS)
        p.add_argument("--schemes", nargs="+", default=list(sim.SCHEMES),
                       choices=list(sim.SCHEMES))
        p.add_argument("--sdp-gap", type=float, default=sim.CAMPAIGN_SDP_GAP)
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for drops")
        p.add_argument("--output-dir", default="results",
                       help="overridden by $CFIRS_OUTPUT_DIR")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="dotted-key config override")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="run one campaign")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one scenario axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=sim.SWEEP_AXES)
    p_sweep.add_argument("--values", nargs="+", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="numerical property suite")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=cmd_validate)

    p_or = sub.add_parser("oracle", help="exhaustive phase-grid search")
    p_or.add_argument("--rn", type=int, default=4, help="total IRS elements")
    p_or.add_argument("--levels", type=int, default=16)
    p_or.add_argument("--ues", type=int, default=2)
    p_or.add_argument("--seed", type=int, default=0)
    p_or.add_argument("--output-dir", default="results")
    p_or.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
