"""JSON and CSV serialization of factors, CV reports and memberships.

Floats are written with 17 significant digits so files round-trip exactly;
key and column orders are fixed.
"""
import csv
import json
import math

import numpy as np

from .factors import FactorPair, FactorSequence


def _render(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _render(obj.tolist())
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite value {x}")
        return format(x, ".17g")
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return _render(obj) + "\n"


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def _fmt(x):
    return format(float(x), ".17g")


def factor_pair_dict(f, labels, trace=()):
    return {
        "labels": list(labels),
        "K": f.K,
        "U": f.U,
        "V": f.V,
        "objective_trace": list(trace),
    }


def factor_sequence_dict(fs, labels, timestamps, trace=()):
    return {
        "labels": list(labels),
        "K": fs.K,
        "timestamps": list(timestamps),
        "factors": [{"t": tag, "U": p.U, "V": p.V} for tag, p in zip(timestamps, fs)],
        "objective_trace": list(trace),
    }


def read_factors(path):
    """Load a factor file of either layout.

    Returns ``(labels, timestamps, FactorSequence, objective_trace)``; a
    single-pair file becomes a one-element sequence tagged ``"1"``.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        labels = [str(x) for x in data["labels"]]
        if "factors" in data:
            tags = [str(e["t"]) for e in data["factors"]]
            pairs = [FactorPair(e["U"], e["V"]) for e in data["factors"]]
        else:
            tags = ["1"]
            pairs = [FactorPair(data["U"], data["V"])]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a factor file ({exc})") from None
    fs = FactorSequence(pairs)
    if fs.n != len(labels):
        raise ValueError(f"{path}: {len(labels)} labels for {fs.n} factor rows")
    return labels, tags, fs, [float(x) for x in data.get("objective_trace", [])]


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_timeplot_csv(path, fs, labels, timestamps):
    """Rows ``(node_label, t, sum_k U_t[i, k])``: per-node trajectories."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["node_label", "t", "u_total"])
        for i, label in enumerate(labels):
            for tag, p in zip(timestamps, fs):
                w.writerow([label, tag, _fmt(p.U[i].sum())])


def write_heatmap_csv(path, fs, labels, timestamps):
    """Rows ``(node_label, t, k, V_t[i, k])`` with 1-based ``k``."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["node_label", "t", "k", "v"])
        for i, label in enumerate(labels):
            for tag, p in zip(timestamps, fs):
                for k in range(p.K):
                    w.writerow([label, tag, k + 1, _fmt(p.V[i, k])])


def write_cv_csv(path, report):
    fh, w = _writer(path)
    with fh:
        w.writerow(["K", "fold", "test_error"])
        for g, K in enumerate(report.grid):
            for f in range(report.folds):
                w.writerow([K, f, _fmt(report.errors[g, f])])


def write_membership_csv(path, rows):
    """``rows`` yields ``(t, labels, Membership)``; hard labels are exported 1-based."""
    fh, w = _writer(path)
    with fh:
        header = None
        for tag, labels, mem in rows:
            if header is None:
                header = ["t", "node_label", "hard_label"] + [f"soft_{k + 1}" for k in range(mem.K)]
                w.writerow(header)
            for i, label in enumerate(labels):
                hard = "unassigned" if mem.hard[i] < 0 else int(mem.hard[i]) + 1
                w.writerow([tag, label, hard] + [_fmt(x) for x in mem.soft[i]])


def write_edge_share_csv(path, rows, K):
    """``rows`` yields ``(t, source, target, observed, predicted, shares)``;
    undefined shares are written as empty cells."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "source", "target", "observed_weight", "predicted_weight"]
                   + [f"share_{k + 1}" for k in range(K)])
        for tag, src, dst, obs, pred, shares in rows:
            cells = [""] * K if shares is None else [_fmt(x) for x in shares]
            w.writerow([tag, src, dst, _fmt(obs), _fmt(pred)] + cells)


def write_truth_csv(path, labels_per_t, node_labels, timestamps):
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "node_label", "true_label"])
        for tag, labels in zip(timestamps, labels_per_t):
            for node, lab in zip(node_labels, labels):
                w.writerow([tag, node, int(lab) + 1])
