"""Command line entry point: ``signfv {run,sweep,bounds,verify}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import montecarlo
from .bounds import exponent_report, lemma1_sweep
from .config import ConfigError, ExperimentConfig, load_config
from .simulate import run, summarize, sweep, synthetic_crossover

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_DIVERGED = 2
EXIT_BAD_CONFIG = 3


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if getattr(args, "set", None):
        changes = {}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            changes[key.strip()] = _parse_value(value.strip())
        data = cfg.to_dict()
        data.update(changes)
        cfg = ExperimentConfig.from_mapping(data)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    result = run(cfg)
    csv_path, meta_path = result.write(args.out)
    md = result.metadata
    print(f"rounds={md['rounds_completed']} final_loss={md['final_loss']} "
          f"mean_err={md['mean_err_after_initial_phase']} bits={md['bits_total']}")
    print(f"wrote {csv_path} and {meta_path}")
    if result.diverged:
        print("divergence detected", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    any_diverged = False
    grid = sweep(base, args.batch_modes, args.workers, args.decoders, args.seeds)
    for over, result in grid:
        tag = "_".join(f"{k}{v}" for k, v in over.items())
        result.write(out / tag)
        row = summarize(over, result)
        rows.append(row)
        any_diverged |= result.diverged
        print(", ".join(f"{k}={v}" for k, v in row.items()))
    if rows:
        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return EXIT_DIVERGED if any_diverged else EXIT_OK


def cmd_bounds(args) -> int:
    cfg = _load(args)
    batches = cfg.batch_sizes
    sigma = args.sigma if args.sigma is not None else cfg.sigma
    if cfg.channel == "synthetic":
        p = synthetic_crossover(cfg, cfg.dimension).mean(axis=1)
    else:
        # computing-error bound per worker
        p = np.minimum(sigma / np.sqrt(np.asarray(batches, dtype=float)), 1.0)
    report = exponent_report(p, batches, sigma if sigma > 0 else None, args.delta_min, args.delta_max)
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK


def cmd_verify(args) -> int:
    wmv = montecarlo.verify_wmv_bound(args.trials, count=args.configs, seed=args.seed)
    imperfect = montecarlo.verify_imperfect_bound(args.trials, args.delta, args.delta, count=args.configs, seed=args.seed)
    lemma2 = montecarlo.verify_lemma2(trials=args.trials, seed=args.seed)
    cor1 = montecarlo.verify_corollary1(samples=args.samples, seed=args.seed)
    lemma1 = lemma1_sweep()

    print(montecarlo.format_table(wmv, "WMV bound"))
    print()
    print(montecarlo.format_table(imperfect, f"Imperfect-weight bound (delta = {args.delta})"))
    print()
    print(montecarlo.format_table(lemma2, "Computing-error bound (M column is 1)"))
    print()
    for c in cor1:
        print(f"asymptotic exponent a={c.a}: closed {c.closed_form:.6f} sampled {c.sample_mean:.6f} "
              f"+/- {c.sigma3:.1e} {'agrees' if c.agrees else 'DISAGREES'}")
    print(f"large-deviation sweep: max lhs/rhs = {lemma1['max_ratio']:.15f} over {lemma1['points']} points")

    if args.json:
        payload = json.loads(montecarlo.to_json(wmv=wmv, imperfect=imperfect, lemma2=lemma2, corollary1=cor1))
        payload["lemma1"] = lemma1
        Path(args.json).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    failed = any(not c.passed for c in wmv + imperfect + lemma2)
    failed |= not all(c.agrees for c in cor1)
    failed |= lemma1["max_ratio"] > 1.0 + 1e-12
    print("FAIL" if failed else "PASS")
    return EXIT_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="signfv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="TOML or JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")

    p = sub.add_parser("run", help="run one experiment")
    with_config(p)
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over batch modes, worker counts, decoders and seeds")
    with_config(p)
    p.add_argument("--out", default="sweep", help="output directory (default: sweep)")
    p.add_argument("--batch-modes", type=_int_list)
    p.add_argument("--workers", type=_int_list)
    p.add_argument("--decoders", type=_str_list)
    p.add_argument("--seeds", type=_int_list)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="print the error-exponent report for a config")
    with_config(p)
    p.add_argument("--sigma", type=float, help="normalized gradient noise (default: config sigma)")
    p.add_argument("--delta-min", type=float, default=0.0)
    p.add_argument("--delta-max", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="Monte Carlo checks of the analytic bounds")
    p.add_argument("--trials", type=int, default=montecarlo.DEFAULT_TRIALS)
    p.add_argument("--configs", type=int, default=100)
    p.add_argument("--samples", type=int, default=1_000_000, help="draws for the asymptotic exponent check")
    p.add_argument("--delta", type=float, default=0.2, help="weight perturbation for the imperfect-weight check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", metavar="PATH", help="also write every check as JSON")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
