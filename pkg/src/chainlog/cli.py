"""Command-line entry point: ``chainlog <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import markov
from .errors import ChainlogError
from .hierarchy import load_hierarchy
from .ingest import IngestConfig, load_user_list, parse_changelog, validate_changelog
from .paths import PathKind, SessionConfig, build_paths, read_paths_jsonl, write_paths_jsonl
from .report import AnalysisConfig, report_dict, run_analyze

KINDS = [k.value for k in PathKind]


def _ingest_config(args):
    bots = load_user_list(args.bots) if getattr(args, "bots", None) else frozenset()
    return IngestConfig(bot_users=bots, obfuscate_users=getattr(args, "obfuscate", False))


def cmd_validate(args):
    log = parse_changelog(args.log, args.format, _ingest_config(args), sort=False)
    hierarchy = load_hierarchy(args.hierarchy) if args.hierarchy else None
    report = validate_changelog(log, hierarchy=hierarchy)
    result = report.to_dict()
    result["n_records"] = len(log)
    result["source_digest"] = log.source_digest
    print(json.dumps(result, indent=2))
    return 0 if report.ok else 1


def cmd_paths(args):
    log = parse_changelog(args.log, args.format, _ingest_config(args))
    hierarchy = load_hierarchy(args.hierarchy) if args.hierarchy else None
    paths = build_paths(log, args.kind, hierarchy, SessionConfig(break_threshold=args.break_secs))
    write_paths_jsonl(paths, args.out)
    print(f"wrote {len(paths)} paths to {args.out}")
    return 0


def cmd_analyze(args):
    cfg = AnalysisConfig(
        log_path=args.log,
        path_kind=args.kind,
        out_dir=args.out,
        hierarchy_path=args.hierarchy,
        log_format=args.format,
        order=args.order,
        alpha=args.alpha,
        break_secs=args.break_secs,
        min_user_changes=args.min_user_changes,
        obfuscate=args.obfuscate,
        bots_path=args.bots,
        root=args.root,
    )
    bundle = run_analyze(cfg)
    summary = report_dict(bundle)
    summary.pop("top_transitions")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_fit(args):
    model = markov.fit(read_paths_jsonl(args.paths), order=args.order, alpha=args.alpha)
    model.save(args.out)
    print(f"fitted order-{model.order} model: {len(model.states)} states, "
          f"{model.n_transitions} transitions -> {args.out}")
    return 0


def _parse_history(text, order):
    parts = [p.strip() for p in text.split(",")] if order > 1 else [text]
    return tuple(parts)


def cmd_predict(args):
    model = markov.TransitionModel.load(args.model)
    history = _parse_history(args.history, model.order)
    for label, p in markov.predict_top_k(model, history, args.top):
        print(f"{label}\t{p:.9f}")
    return 0


def cmd_sample(args):
    model = markov.TransitionModel.load(args.model)
    seed = int(os.environ.get("CHAINLOG_SEED", args.seed))
    paths = markov.sample_paths(model, args.n_paths, args.length, seed=seed)
    write_paths_jsonl(paths, args.out)
    print(f"wrote {len(paths)} sampled paths to {args.out} (seed {seed})")
    return 0


def cmd_loglik(args):
    model = markov.TransitionModel.load(args.model)
    ll = markov.log_likelihood(model, read_paths_jsonl(args.paths))
    print("-inf" if math.isinf(ll) else f"{ll:.9f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="chainlog", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def log_args(p, hierarchy=True):
        p.add_argument("--log", required=True, type=Path)
        p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
        p.add_argument("--bots", type=Path, help="file with one bot username per line")
        p.add_argument("--obfuscate", action="store_true")
        if hierarchy:
            p.add_argument("--hierarchy", type=Path, help="child,parent CSV edge list")

    p = sub.add_parser("validate", help="check a change log")
    log_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="build interaction paths")
    log_args(p)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--break-secs", type=float, default=300.0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("analyze", help="full pipeline with CSV/JSON/SVG outputs")
    log_args(p)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--break-secs", type=float, default=300.0)
    p.add_argument("--min-user-changes", type=int, default=0)
    p.add_argument("--root", help="root class of the hierarchy")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit a model to a paths JSONL file")
    p.add_argument("--paths", required=True, type=Path)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="rank next states for a history")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--history", required=True, help="state label; comma-separated for order > 1")
    p.add_argument("--top", type=int, default=3)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sample", help="draw random paths from a model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--n-paths", type=int, default=1)
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("loglik", help="log-likelihood of paths under a model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--paths", required=True, type=Path)
    p.set_defaults(func=cmd_loglik)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ChainlogError, ValueError, OSError) as exc:
        print(f"chainlog: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
