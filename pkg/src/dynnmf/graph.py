"""Directed, non-negatively weighted network snapshots and their sequences."""
import io
import math
from collections.abc import Sequence

import numpy as np
from scipy import sparse


class EdgeListError(ValueError):
    """Malformed edge-list input. ``lineno`` is 1-based, or None."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


def _default_labels(n):
    return tuple(str(i + 1) for i in range(n))


class GraphSnapshot:
    """One adjacency matrix with node labels.

    Entry ``(i, j)`` is the weight of the directed edge ``i -> j``. The
    weights may be backed by a dense array or a scipy sparse matrix;
    :attr:`weights` always returns the dense view.
    """

    __slots__ = ("_matrix", "_labels", "_dense")

    def __init__(self, weights, labels=None):
        if sparse.issparse(weights):
            mat = sparse.csr_matrix(weights, dtype=np.float64, copy=True)
            mat.sum_duplicates()
            values = mat.data
            shape = mat.shape
        else:
            mat = np.array(weights, dtype=np.float64, copy=True)
            if mat.ndim != 2:
                raise ValueError("weights must be a 2-d matrix")
            values = mat
            shape = mat.shape
            mat.setflags(write=False)
        if shape[0] != shape[1]:
            raise ValueError(f"adjacency matrix must be square, got {shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("weights must be finite")
        if np.any(values < 0):
            raise ValueError("weights must be non-negative")
        n = shape[0]
        labels = _default_labels(n) if labels is None else tuple(str(x) for x in labels)
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise ValueError("node labels must be unique")
        self._matrix = mat
        self._labels = labels
        self._dense = None

    @property
    def n(self):
        return len(self._labels)

    @property
    def labels(self):
        return self._labels

    @property
    def is_sparse(self):
        return sparse.issparse(self._matrix)

    @property
    def matrix(self):
        """The backing store (dense array or CSR matrix); treat as read-only."""
        return self._matrix

    @property
    def weights(self):
        if not self.is_sparse:
            return self._matrix
        if self._dense is None:
            dense = self._matrix.toarray()
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    @property
    def nnz(self):
        if self.is_sparse:
            return int(np.count_nonzero(self._matrix.data))
        return int(np.count_nonzero(self._matrix))

    def with_weights(self, weights):
        return GraphSnapshot(weights, self._labels)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"GraphSnapshot(n={self.n}, nnz={self.nnz}, {kind})"


class GraphSequence(Sequence):
    """Ordered snapshots over one shared, identically ordered node set."""

    def __init__(self, snapshots, timestamps=None):
        snapshots = tuple(snapshots)
        if not snapshots:
            raise ValueError("a graph sequence needs at least one snapshot")
        labels = snapshots[0].labels
        for s in snapshots[1:]:
            if s.labels != labels:
                raise ValueError("all snapshots must share the same node labels and order")
        if timestamps is not None:
            timestamps = tuple(str(t) for t in timestamps)
            if len(timestamps) != len(snapshots):
                raise ValueError("one timestamp per snapshot is required")
            if len(set(timestamps)) != len(timestamps):
                raise ValueError("timestamps must be distinct")
        self._snapshots = snapshots
        self._timestamps = timestamps

    @classmethod
    def from_matrices(cls, matrices, labels=None, timestamps=None):
        return cls([GraphSnapshot(m, labels) for m in matrices], timestamps)

    def __getitem__(self, idx):
        return self._snapshots[idx]

    def __len__(self):
        return len(self._snapshots)

    @property
    def T(self):
        return len(self._snapshots)

    @property
    def n(self):
        return self._snapshots[0].n

    @property
    def labels(self):
        return self._snapshots[0].labels

    @property
    def snapshots(self):
        return self._snapshots

    @property
    def timestamps(self):
        return self._timestamps

    def tags(self):
        """Timestamps, or 1-based positions when the sequence has none."""
        if self._timestamps is not None:
            return list(self._timestamps)
        return [str(t + 1) for t in range(self.T)]

    def matrices(self):
        return [s.matrix for s in self._snapshots]

    def dense(self):
        return np.stack([s.weights for s in self._snapshots])

    def _replace(self, matrices):
        return GraphSequence([GraphSnapshot(m, self.labels) for m in matrices], self._timestamps)

    def __repr__(self):
        return f"GraphSequence(T={self.T}, n={self.n})"


def _parse_number(text, lineno, what):
    try:
        value = float(text)
    except ValueError:
        raise EdgeListError(f"cannot parse {what} {text!r}", lineno) from None
    if not math.isfinite(value):
        raise EdgeListError(f"{what} must be finite, got {text!r}", lineno)
    return value


def _tag_key(tags):
    try:
        nums = [float(t) for t in tags]
    except ValueError:
        return sorted(tags)
    return [t for _, t in sorted(zip(nums, tags))]


def load_edge_list(source, directed=True, default_weight=1.0, sort_tags=False):
    """Parse ``time_tag source target [weight]`` records into a sequence.

    ``source`` is a binary stream, ``bytes``, or a path. Repeated
    ``(tag, source, target)`` records sum their weights. Every node seen at
    any time gets a (possibly all-zero) row and column in every snapshot.
    Snapshots follow first-seen tag order unless ``sort_tags`` is set, in
    which case tags sort numerically when all of them parse as numbers and
    lexicographically otherwise. With ``directed=False`` each record also adds
    the reverse edge.
    """
    if default_weight < 0 or not math.isfinite(default_weight):
        raise ValueError("default_weight must be a finite non-negative number")
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    else:
        with open(source, "rb") as fh:
            raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EdgeListError(f"input is not valid UTF-8 ({exc.reason})") from None

    tag_index = {}
    node_index = {}
    rows, cols, vals, tids = [], [], [], []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) not in (3, 4):
            raise EdgeListError(f"expected 3 or 4 columns, got {len(parts)}", lineno)
        tag, src, dst = parts[:3]
        if len(parts) == 4:
            w = _parse_number(parts[3], lineno, "weight")
            if w < 0:
                raise EdgeListError(f"negative weight {parts[3]!r}", lineno)
        else:
            w = default_weight
        t = tag_index.setdefault(tag, len(tag_index))
        i = node_index.setdefault(src, len(node_index))
        j = node_index.setdefault(dst, len(node_index))
        rows.append(i)
        cols.append(j)
        vals.append(w)
        tids.append(t)
        if not directed and i != j:
            rows.append(j)
            cols.append(i)
            vals.append(w)
            tids.append(t)

    if not tag_index:
        raise EdgeListError("no edge records found")

    tags = list(tag_index)
    order = _tag_key(tags) if sort_tags else tags
    labels = list(node_index)
    n = len(labels)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    tids = np.asarray(tids, dtype=np.int64)
    snapshots = []
    for tag in order:
        mask = tids == tag_index[tag]
        mat = sparse.coo_matrix((vals[mask], (rows[mask], cols[mask])), shape=(n, n)).tocsr()
        snapshots.append(GraphSnapshot(mat, labels))
    return GraphSequence(snapshots, order)


def write_edge_list(seq, stream, precision=17):
    """Write ``seq`` in the edge-list format ``load_edge_list`` reads."""
    labels = seq.labels
    for tag, snap in zip(seq.tags(), seq):
        coo = sparse.coo_matrix(snap.matrix)
        order = np.lexsort((coo.col, coo.row))
        for idx in order:
            w = coo.data[idx]
            if w == 0:
                continue
            stream.write(f"{tag} {labels[coo.row[idx]]} {labels[coo.col[idx]]} {w:.{precision}g}\n")


def aggregate_cumulative(seq):
    """Snapshot ``t`` of the result is the elementwise sum of snapshots ``1..t``."""
    out = []
    total = None
    for m in seq.matrices():
        total = m.copy() if total is None else total + m
        out.append(total)
    return seq._replace(out)


def log_transform(seq, offset=1.0):
    """Map each weight ``w`` to ``log(1 + w / offset)``; zeros stay zero."""
    if not offset > 0:
        raise ValueError("offset must be positive")
    out = []
    for m in seq.matrices():
        if sparse.issparse(m):
            m = m.copy()
            m.data = np.log1p(m.data / offset)
        else:
            m = np.log1p(m / offset)
        out.append(m)
    return seq._replace(out)
