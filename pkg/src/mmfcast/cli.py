"""Command-line entry point: ``mmfcast --config cfg.json [--sweep sweep.json] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SystemConfig
from .experiments import (DEFAULT_DROPS, SweepSpec, emit_results, iter_schemes, load_json,
                          recommend_ensemble, run_sweep)

log = logging.getLogger("mmfcast")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mmfcast",
        description="Max-min fair multicast precoding sweeps for single-cell massive MIMO.")
    ap.add_argument("--config", required=True, help="flat JSON scenario document")
    ap.add_argument("--sweep", help="JSON sweep document (variable, grid, ...); "
                                    "without it the config itself is evaluated")
    ap.add_argument("--scheme", default="all",
                    help="scheme name, comma-separated list, or 'all' (default)")
    ap.add_argument("--seed", type=int, help="base seed (overrides the sweep file)")
    ap.add_argument("--drops", type=int, help=f"user drops per grid point "
                                              f"(default {DEFAULT_DROPS})")
    ap.add_argument("--mc-samples", type=int, default=0,
                    help="Monte Carlo samples for bound validation; 0 disables it")
    ap.add_argument("--omnicast", action="store_true", help="add the omnicast column")
    ap.add_argument("--workers", type=int, default=1, help="processes for the drop loop")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--recommend", action="store_true",
                    help="print the recommended scheme for the config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = SystemConfig.from_dict(load_json(args.config))
        if args.recommend:
            rec = recommend_ensemble(config, args.drops or DEFAULT_DROPS, args.seed or 0,
                                     args.workers)
            json.dump({"best_scheme": rec.best_scheme.name,
                       "margin": rec.margin,
                       "per_scheme_se": {s.name: v for s, v in rec.per_scheme_se.items()}},
                      sys.stdout, indent=2)
            sys.stdout.write("\n")
            return 0
        doc = load_json(args.sweep) if args.sweep else {
            "variable": "n_antennas", "grid": [config.n_antennas]}
        doc.setdefault("schemes", list(s.name for s in iter_schemes(args.scheme)))
        if args.scheme != "all":
            doc["schemes"] = [s.name for s in iter_schemes(args.scheme)]
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.drops is not None:
            doc["n_drops"] = args.drops
        if args.mc_samples:
            doc["mc_validate"] = True
            doc["mc_samples"] = args.mc_samples
        if args.omnicast:
            doc["omnicast"] = True
        spec = SweepSpec.from_dict(doc)
        log.info("sweeping %s over %d points, %d drops", spec.variable, len(spec.grid),
                 spec.n_drops)
        table = run_sweep(spec, config, workers=args.workers)
        text = emit_results(table, args.out, args.format)
        if args.out is None:
            sys.stdout.write(text)
    except (ValueError, TypeError, OSError, KeyError) as exc:
        print(f"mmfcast: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
