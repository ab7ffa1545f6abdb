"""Command-line front end: ``dynnmf {fit,cv,communities,gen,export}``.

Exit codes: 0 success, 1 bad input or arguments, 2 numerical failure.
Every command writes ``manifest.json`` next to its outputs.
"""
import argparse
import hashlib
import os
import re
import sys
import time
from importlib import metadata

import numpy as np

from . import io as dio
from .community import (agreement_rate, edge_decomposition, edge_labels, membership_from_U,
                        membership_from_edges, normalize_for_display)
from .dynamic import fit_dynamic_nmf
from .factors import FactorPair, FitConfig, NumericalError
from .graph import aggregate_cumulative, load_edge_list, log_transform, write_edge_list
from .selection import cv_rank_selection
from .synthetic import (PaGrowthConfig, PlantedConfig, gen_planted_communities,
                        gen_preferential_attachment, gen_ring, gen_star)
from .graph import GraphSequence

OUTPUT_ENV = "DYNNMF_OUTPUT_DIR"
GENERATORS = ("star", "ring", "pa", "planted")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def parse_grid(text):
    """``"A..B"`` (inclusive) or ``"A,B,C"``."""
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ValueError(f"empty rank range {text!r}")
        return list(range(lo, hi + 1))
    try:
        grid = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"cannot parse rank grid {text!r}") from None
    if not grid:
        raise ValueError(f"empty rank grid {text!r}")
    return grid


def parse_folds(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise ValueError(f"folds must look like KxL, got {text!r}")
    k, l = int(m.group(1)), int(m.group(2))
    if k < 2 or l < 2:
        raise ValueError(f"need at least 2 row and 2 column folds, got {text!r}")
    return k, l


def _add_common(p, rank=True):
    p.add_argument("--output-dir", default=None,
                   help=f"output directory (default ${OUTPUT_ENV} or .)")
    p.add_argument("--seed", type=int, default=0)
    if rank:
        p.add_argument("--max-iter", type=int, default=500)
        p.add_argument("--tol", type=float, default=1e-6)


def _add_input(p, required=True):
    p.add_argument("--input", required=required, help="edge-list file")
    p.add_argument("--sort-tags", action="store_true",
                   help="order snapshots by tag instead of first appearance")
    p.add_argument("--undirected", action="store_true",
                   help="treat each record as an edge in both directions")
    p.add_argument("--default-weight", type=float, default=1.0)
    p.add_argument("--cumulative", action="store_true",
                   help="aggregate snapshots cumulatively before fitting")
    p.add_argument("--log-offset", type=float, default=None,
                   help="apply log(1 + w / offset) to the weights")


def build_parser():
    parser = _Parser(prog="dynnmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("fit", help="fit penalized NMF to a graph sequence")
    _add_input(p)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--lambda-s", type=float, default=0.0)
    p.add_argument("--lambda-t", type=float, default=0.0)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--normalize", action="store_true",
                   help="unit-norm U columns in the written factors")
    _add_common(p)

    p = sub.add_parser("cv", help="choose the rank by two-dimensional cross-validation")
    _add_input(p)
    p.add_argument("--grid", default="1..6")
    p.add_argument("--folds", default="5x5")
    p.add_argument("--restarts", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("communities", help="memberships and edge shares from fitted factors")
    p.add_argument("--factors", required=True, help="factor JSON written by 'fit'")
    _add_input(p, required=False)
    p.add_argument("--rule", choices=("u", "edges"), default="u")
    p.add_argument("--min-predicted", type=float, default=0.5,
                   help="without --input, export shares for pairs predicted at least this heavy")
    _add_common(p, rank=False)

    p = sub.add_parser("gen", help="write a synthetic graph as an edge list")
    p.add_argument("generator", help="one of: " + ", ".join(GENERATORS))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--snapshots", type=int, default=10)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--p-in", type=float, default=0.5)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--T", type=int, default=5)
    p.add_argument("--churn", type=float, default=0.0)
    p.add_argument("--weighted", action="store_true")
    _add_common(p, rank=False)

    p = sub.add_parser("export", help="plot-ready CSVs from a factor JSON")
    p.add_argument("--factors", required=True)
    p.add_argument("--normalize", action="store_true")
    _add_common(p, rank=False)
    return parser


def _output_dir(args):
    out = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out, args, inputs, started):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {p: _digest(p) for p in inputs},
        "seed": args.seed,
        "version": _version(),
        "duration_seconds": time.perf_counter() - started,
    }
    dio.write_json(manifest, os.path.join(out, "manifest.json"))


def _load_sequence(args):
    try:
        with open(args.input, "rb") as fh:
            seq = load_edge_list(fh, directed=not args.undirected,
                                 default_weight=args.default_weight, sort_tags=args.sort_tags)
    except OSError as exc:
        raise ValueError(f"{args.input}: {exc.strerror}") from None
    except ValueError as exc:
        raise ValueError(f"{args.input}: {exc}") from None
    if args.cumulative:
        seq = aggregate_cumulative(seq)
    if args.log_offset is not None:
        seq = log_transform(seq, args.log_offset)
    return seq


def cmd_fit(args):
    seq = _load_sequence(args)
    cfg = FitConfig(K=args.rank, lambda_s=args.lambda_s, lambda_t=args.lambda_t,
                    window=args.window, max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    fs, report = fit_dynamic_nmf(seq, cfg)
    if args.normalize:
        fs = normalize_for_display(fs)
    out = _output_dir(args)
    tags = seq.tags()
    dio.write_json(dio.factor_sequence_dict(fs, seq.labels, tags, report.objective_trace),
                   os.path.join(out, "factors.json"))
    dio.write_timeplot_csv(os.path.join(out, "timeplot.csv"), fs, seq.labels, tags)
    dio.write_heatmap_csv(os.path.join(out, "heatmap.csv"), fs, seq.labels, tags)
    print(f"fitted T={seq.T} n={seq.n} K={cfg.K}: {report.iterations_run} iterations, "
          f"objective {report.objective_trace[-1]:.6g}"
          + ("" if report.converged else " (not converged)"))
    return out, [args.input]


def cmd_cv(args):
    seq = _load_sequence(args)
    grid = parse_grid(args.grid)
    k, l = parse_folds(args.folds)
    if k > seq.n or l > seq.n:
        raise ValueError(f"folds {args.folds} exceed the node count {seq.n}")
    cfg = FitConfig(max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    report = cv_rank_selection(seq, grid, k, l, cfg, restarts=args.restarts)
    out = _output_dir(args)
    dio.write_json(report.to_dict(), os.path.join(out, "cv_report.json"))
    dio.write_cv_csv(os.path.join(out, "cv_report.csv"), report)
    print(report.chosen_K)
    return out, [args.input]


def _pair_rows(tag, labels, f, A, min_predicted):
    if A is not None:
        rows, cols, _ = edge_labels(A, f)
        W = A.weights
        pairs = zip(rows, cols)
    else:
        W = None
        pred = f.U @ f.V.T
        pairs = zip(*np.nonzero(pred >= min_predicted))
    for i, j in pairs:
        es = edge_decomposition(f, int(i), int(j))
        obs = W[i, j] if W is not None else 0.0
        yield tag, labels[i], labels[j], obs, es.predicted_weight, es.shares


def cmd_communities(args):
    if args.rule == "edges" and not args.input:
        raise ValueError("--rule edges needs the original edge list (--input)")
    try:
        labels, tags, fs, _ = dio.read_factors(args.factors)
    except OSError as exc:
        raise ValueError(f"{args.factors}: {exc.strerror}") from None
    seq = None
    if args.input:
        seq = _load_sequence(args)
        if seq.T != fs.T:
            raise ValueError(f"{args.input} has {seq.T} snapshots but the factors have {fs.T}")
        seq = _align(seq, labels)

    by_u = [membership_from_U(p.U) for p in fs]
    chosen = by_u
    if seq is not None:
        by_edges = [membership_from_edges(A, p) for A, p in zip(seq, fs)]
        rates = [agreement_rate(a, b) for a, b in zip(by_u, by_edges)]
        print(f"agreement between rules: {np.nanmean(rates):.4f}")
        if args.rule == "edges":
            chosen = by_edges
    out = _output_dir(args)
    dio.write_membership_csv(os.path.join(out, "membership.csv"),
                             ((tag, labels, m) for tag, m in zip(tags, chosen)))

    def rows():
        for t, (tag, p) in enumerate(zip(tags, fs)):
            A = seq[t] if seq is not None else None
            yield from _pair_rows(tag, labels, p, A, args.min_predicted)

    dio.write_edge_share_csv(os.path.join(out, "edge_shares.csv"), rows(), fs.K)
    return out, [args.factors] + ([args.input] if args.input else [])


def _align(seq, labels):
    """Reorder the loaded graph's nodes to match the factor file's labels."""
    if list(seq.labels) == list(labels):
        return seq
    pos = {lab: i for i, lab in enumerate(seq.labels)}
    if set(pos) != set(labels):
        raise ValueError("edge-list nodes do not match the factor file's labels")
    perm = np.array([pos[lab] for lab in labels])
    mats = [s.weights[np.ix_(perm, perm)] for s in seq]
    return GraphSequence.from_matrices(mats, labels, seq.timestamps)


def cmd_gen(args):
    name = args.generator
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
    truth = None
    if name == "star":
        seq = GraphSequence([gen_star(args.n or 5)], ["1"])
    elif name == "ring":
        seq = GraphSequence([gen_ring(args.n or 5)], ["1"])
    elif name == "pa":
        seq = gen_preferential_attachment(
            PaGrowthConfig(args.n or 1000, args.snapshots, args.m, args.seed))
    else:
        seq, truth = gen_planted_communities(
            PlantedConfig(args.n or 60, args.k, args.p_in, args.p_out, args.T, args.churn,
                          args.seed, args.weighted))
    out = _output_dir(args)
    with open(os.path.join(out, "graph.edges"), "w", encoding="utf-8") as fh:
        write_edge_list(seq, fh)
    if truth is not None:
        dio.write_truth_csv(os.path.join(out, "truth.csv"), truth, seq.labels, seq.tags())
    return out, []


def cmd_export(args):
    try:
        labels, tags, fs, _ = dio.read_factors(args.factors)
    except OSError as exc:
        raise ValueError(f"{args.factors}: {exc.strerror}") from None
    if args.normalize:
        fs = normalize_for_display(fs)
    out = _output_dir(args)
    dio.write_timeplot_csv(os.path.join(out, "timeplot.csv"), fs, labels, tags)
    dio.write_heatmap_csv(os.path.join(out, "heatmap.csv"), fs, labels, tags)
    return out, [args.factors]


COMMANDS = {
    "fit": cmd_fit,
    "cv": cmd_cv,
    "communities": cmd_communities,
    "gen": cmd_gen,
    "export": cmd_export,
}


def main(argv=None):
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        out, inputs = COMMANDS[args.command](args)
        _write_manifest(out, args, inputs, started)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
