"""``degcorr`` command line interface.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import DegcorrError, EdgeListFormatError, InvalidConfig
from .experiment import ExperimentConfig, run_experiment
from .graph import read_edge_list, write_edge_list
from .limits import LimitLaw, evaluate_limit, lens_volume, p_conn
from .metrics import G_TRANSFORMS, compute_report
from .models import RggParams, WeightLaw, sample_irg, sample_rgg
from .oracles import lens_volume_mc, moment_quadrature, p_conn_mc

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class _UsageError(Exception):
    pass


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["irg", "rgg"], required=True)
    p.add_argument("--weight", default="const:2.0", help="IRG weight law, e.g. const:2.0, exp:1.0, pareto:3.0:1.0")
    p.add_argument("--normalization", choices=["n", "total_weight"], default="n",
                   help="IRG: divide W_i W_j by n (default) or by the total weight")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--p", type=float, default=1.0, help="RGG edge retention probability")


def _weight(text: str) -> WeightLaw:
    try:
        return WeightLaw.parse(text)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _rgg_params(args) -> RggParams:
    try:
        return RggParams(args.dim, args.radius, args.p)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _emit(payload, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_generate(args) -> int:
    if args.model == "irg":
        sampled = sample_irg(args.n, _weight(args.weight), args.seed, normalization=args.normalization)
    else:
        sampled = sample_rgg(args.n, _rgg_params(args), args.seed)
    out = Path(args.out)
    write_edge_list(sampled.graph, out, comment=f"{sampled.model_tag} n={args.n} seed={args.seed}")
    meta = sampled.meta()
    if sampled.positions is not None:
        pos_path = out.with_name(out.name + ".positions.csv")
        header = ",".join(f"x{i}" for i in range(sampled.positions.shape[1]))
        np.savetxt(pos_path, sampled.positions, delimiter=",", header=header, comments="", fmt="%.17g")
        meta["positions"] = pos_path.name
    _emit(meta, str(out.with_name(out.name + ".meta.json")))
    return EXIT_OK


def cmd_metrics(args) -> int:
    try:
        g = read_edge_list(args.edges)
    except (OSError, EdgeListFormatError) as exc:
        raise _UsageError(str(exc)) from exc
    _emit(compute_report(g, args.g).to_json(), args.out)
    return EXIT_OK


def cmd_limits(args) -> int:
    if args.model == "irg":
        law = LimitLaw.irg_for_normalization(_weight(args.weight), args.normalization)
    else:
        law = LimitLaw.from_rgg(_rgg_params(args))
    if args.metric in ("annd", "annr", "annd_mc") and args.k is None:
        raise _UsageError(f"--k is required for {args.metric}")
    val = evaluate_limit(law, args.metric, k=args.k, g=args.g, mc_samples=args.samples, seed=args.seed)
    _emit(val.to_json(), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
        cfg.validate()
    res = run_experiment(cfg, args.out)
    for row in res.summary:
        k = "" if row["k"] is None else f"[k={row['k']}]"
        med = "nan" if row["median"] is None else f"{row['median']:.4f}"
        lim = "n/a" if row["limit"] is None else f"{row['limit']:.4f}"
        print(f"n={row['size']:>8} {row['metric']}{k:<8} median={med} limit={lim}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.oracle == "lens":
        value, se = lens_volume_mc(args.dim, args.radius, args.r, args.samples, args.seed)
        exact = lens_volume(args.dim, args.radius, args.r)
        payload = {"monte_carlo": value, "stderr": se, "formula": exact,
                   "relative_error": abs(value - exact) / exact if exact else abs(value)}
    elif args.oracle == "pconn":
        value, se = p_conn_mc(args.dim, args.samples, args.seed)
        exact = p_conn(args.dim)
        payload = {"monte_carlo": value, "stderr": se, "quadrature": exact, "abs_error": abs(value - exact)}
    else:
        w = _weight(args.weight)
        payload = {}
        for order in range(1, args.max_order + 1):
            try:
                closed = w.moment(order)
            except DegcorrError:
                closed = float("inf")
            payload[f"E[W^{order}]"] = {"closed_form": closed, "quadrature": moment_quadrature(w, order)}
    _emit(payload, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="degcorr", description="Degree-degree correlations and their local limits")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an IRG or RGG and write an edge list")
    _add_model_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("metrics", help="compute all measures of an edge-list file")
    p.add_argument("edges")
    p.add_argument("--g", choices=sorted(G_TRANSFORMS), default="identity")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("limits", help="limit value of a measure under the local limit")
    _add_model_args(p)
    p.add_argument("--metric", required=True,
                   choices=["pearson", "spearman", "kendall", "ddist", "annd", "annr", "annd_mc"])
    p.add_argument("--k", type=int)
    p.add_argument("--g", choices=sorted(G_TRANSFORMS), default="identity")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("experiment", help="run a convergence experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="Monte Carlo cross-checks of closed forms")
    osub = p.add_subparsers(dest="oracle", required=True)
    o = osub.add_parser("lens")
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--radius", type=float, default=1.0)
    o.add_argument("--r", type=float, required=True)
    o.add_argument("--samples", type=int, default=10**7)
    o.add_argument("--seed", type=int, default=0)
    o = osub.add_parser("pconn")
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--samples", type=int, default=10**7)
    o.add_argument("--seed", type=int, default=0)
    o = osub.add_parser("moments")
    o.add_argument("--weight", required=True)
    o.add_argument("--max-order", type=int, default=2)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (_UsageError, InvalidConfig) as exc:
        print(f"degcorr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DegcorrError, ValueError, OSError) as exc:
        print(f"degcorr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
