"""Command-line interface.

Subcommands: ``simulate`` (one grid point of a config), ``sweep`` (full
grid), ``bound`` (evaluate a set-size bound from a JSON query) and
``report`` (records CSV to SVG + markdown).  Worker count for sweeps is
controlled by the ``CPBOUNDS_WORKERS`` environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .bounds import (
    BoundQuery,
    SlackSpec,
    classification_set_size_bound,
    expected_set_size_bound,
    regression_set_size_bound,
)
from .cdf_models import grid_cdf, step_cdf_from_scores
from .harness import (
    RECORD_CSV_COLUMNS,
    SweepError,
    load_config,
    render_report,
    run_sweep,
    run_trial,
)
from .scores import GammaDensity

__all__ = ["main"]


def _parse_slack(doc: dict) -> SlackSpec:
    doc = doc or {"mode": "oracle"}
    return SlackSpec(
        mode=doc.get("mode", "oracle"),
        c=float(doc.get("c", 1.0)),
        delta=float(doc.get("delta", 0.1)),
        value=float(doc.get("value", 0.0)),
    )


def _parse_cdf(doc: dict, r_max: float):
    kind = doc.get("kind", "step")
    if kind == "step":
        return step_cdf_from_scores(np.asarray(doc["scores"], dtype=float), r_max, source="analytic")
    if kind == "grid":
        return grid_cdf(doc["r"], doc["value"], r_max)
    raise ValueError(f"unknown cdf kind {kind!r}")


def _parse_gamma(doc: dict, r_max: float) -> GammaDensity:
    kind = doc["kind"]
    if kind == "atoms":
        return GammaDensity(
            kind="atoms",
            r_max=r_max,
            values=np.asarray(doc["values"], dtype=float),
            masses=np.asarray(doc["masses"], dtype=float),
        )
    if kind == "power_law":
        return GammaDensity(kind="power_law", r_max=r_max, p=float(doc["p"]), width=float(doc["width"]))
    if kind == "tabulated":
        return GammaDensity(
            kind="tabulated",
            r_max=r_max,
            bin_edges=np.asarray(doc["bin_edges"], dtype=float),
            densities=np.asarray(doc["densities"], dtype=float),
        )
    raise ValueError(f"unknown density kind {kind!r}")


def _evaluate_bound_query(doc: dict):
    """Evaluate a bound query document; see README for the schema."""
    family = doc.get("family", "general")
    slack = _parse_slack(doc.get("slack"))
    n_tr = int(doc["n_tr"])
    n_cal = int(doc["n_cal"])
    alpha = float(doc["alpha"])
    if family == "classification":
        return classification_set_size_bound(
            float(doc["p_tr_hat"]), int(doc["n_labels"]), n_cal, alpha, slack, n_tr
        )
    if family == "regression":
        lo, hi = float(doc["lo"]), float(doc["hi"])
        p = float(doc.get("p", 2.0))
        cdf = _parse_cdf(doc["cdf"], (hi - lo) ** p)
        return regression_set_size_bound(
            cdf, p, lo, hi, n_cal, alpha, slack, n_tr, doc.get("tail_mode", "integral")
        )
    if family == "general":
        r_max = float(doc["r_max"])
        return expected_set_size_bound(
            BoundQuery(
                n_tr=n_tr,
                n_cal=n_cal,
                alpha=alpha,
                cdf=_parse_cdf(doc["cdf"], r_max),
                gamma=_parse_gamma(doc["gamma"], r_max),
                slack=slack,
                r_max=r_max,
                tail_mode=doc.get("tail_mode", "integral"),
            )
        )
    raise ValueError(f"unknown bound family {family!r}")


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    n_tr = args.n_tr if args.n_tr is not None else cfg.n_tr[0]
    n_cal = args.n_cal if args.n_cal is not None else cfg.n_cal[0]
    alpha = args.alpha if args.alpha is not None else cfg.alphas[0]
    records = run_trial(cfg, (n_tr, n_cal, alpha), cfg.seed)
    print(json.dumps([r.as_dict() for r in records], indent=2))
    if args.out is not None:
        from pathlib import Path

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = [",".join(RECORD_CSV_COLUMNS)] + [",".join(r.csv_row()) for r in records]
        (out / "records.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    try:
        records, _summary = run_sweep(cfg)
    except SweepError as exc:
        print(f"sweep finished with failures: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(records)} records to {cfg.out_dir}/records.csv")
    return 0


def _cmd_bound(args) -> int:
    if args.query == "-":
        doc = json.load(sys.stdin)
    else:
        with open(args.query, encoding="utf-8") as fh:
            doc = json.load(fh)
    result = _evaluate_bound_query(doc)
    print(result.to_json())
    return 0


def _cmd_report(args) -> int:
    paths = render_report(args.records, args.out)
    print(f"wrote {paths['svg']} and {paths['markdown']}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cpbounds",
        description="Split conformal prediction experiments and set-size bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one grid point of a config")
    sim.add_argument("--config", required=True, help="JSON or TOML experiment config")
    sim.add_argument("--n-tr", type=int, default=None, help="training-set size (default: first grid entry)")
    sim.add_argument("--n-cal", type=int, default=None, help="calibration-set size (default: first grid entry)")
    sim.add_argument("--alpha", type=float, default=None, help="miscoverage level (default: first grid entry)")
    sim.add_argument("--seed", type=int, default=None, help="override master seed")
    sim.add_argument("--out", default=None, help="override output directory")
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run the full experiment grid")
    swp.add_argument("--config", required=True, help="JSON or TOML experiment config")
    swp.add_argument("--seed", type=int, default=None, help="override master seed")
    swp.add_argument("--out", default=None, help="override output directory")
    swp.set_defaults(func=_cmd_sweep)

    bnd = sub.add_parser("bound", help="evaluate a set-size bound from a JSON query")
    bnd.add_argument("--query", required=True, help="query JSON file, or - for stdin")
    bnd.set_defaults(func=_cmd_bound)

    rep = sub.add_parser("report", help="render SVG + markdown from a records CSV")
    rep.add_argument("--records", required=True, help=f"CSV with columns {','.join(RECORD_CSV_COLUMNS)}")
    rep.add_argument("--out", required=True, help="output directory")
    rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
