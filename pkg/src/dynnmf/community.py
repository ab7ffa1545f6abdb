"""Reading communities, edge shares and node importance off fitted factors.

Community indices are 0-based here; exports add 1. Ties always go to the
smallest index.
"""
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .factors import FactorPair, FactorSequence, FitConfig
from .graph import GraphSnapshot
from .static import fit_sparse_nmf

UNASSIGNED = -1


class ConvergenceError(RuntimeError):
    """Power iteration hit ``max_iter``; ``last`` holds the final iterates."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class EdgeShares:
    """Per-community contributions to one predicted edge weight.

    ``shares`` is None when the predicted weight is (numerically) zero.
    """

    shares: np.ndarray | None
    predicted_weight: float

    @property
    def defined(self):
        return self.shares is not None


@dataclass(frozen=True)
class Membership:
    """Soft (row-stochastic) and hard community assignments.

    Rows flagged unassigned have an all-zero soft row and hard label -1.
    """

    soft: np.ndarray
    hard: np.ndarray

    @property
    def assigned(self):
        return self.hard != UNASSIGNED

    @property
    def K(self):
        return self.soft.shape[1]


def edge_decomposition(f, i, j, eps=1e-12):
    n_rows, n_cols = f.U.shape[0], f.V.shape[0]
    if not (0 <= i < n_rows and 0 <= j < n_cols):
        raise IndexError(f"edge ({i}, {j}) out of range for {n_rows} x {n_cols} factors")
    contrib = f.U[i] * f.V[j]
    total = float(contrib.sum())
    if total < eps:
        return EdgeShares(None, total)
    return EdgeShares(contrib / total, total)


def edge_share_matrix(f, eps=1e-12):
    """Shares for every (i, j) at once: ``(n, n, K)`` array plus predicted weights.

    Undefined cells (predicted weight below ``eps``) hold NaN shares.
    """
    contrib = f.U[:, None, :] * f.V[None, :, :]
    total = contrib.sum(axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        shares = contrib / total[:, :, None]
    shares[total < eps] = np.nan
    return shares, total


def _membership_from_counts(counts, eps):
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=1)
    keep = totals >= eps
    soft = np.zeros_like(counts)
    soft[keep] = counts[keep] / totals[keep, None]
    hard = np.full(counts.shape[0], UNASSIGNED, dtype=np.int64)
    hard[keep] = np.argmax(soft[keep], axis=1)
    return Membership(soft, hard)


def membership_from_U(U, eps=1e-12):
    """Node i belongs to community k in proportion to ``U[i, k]``."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or np.any(U < 0):
        raise ValueError("U must be a non-negative 2-d matrix")
    return _membership_from_counts(U, eps)


def edge_labels(A, f):
    """Dominant community of each observed edge.

    Returns ``(rows, cols, labels)`` for the entries with ``A[i, j] > 0``.
    """
    M = A.matrix if isinstance(A, GraphSnapshot) else A
    coo = sparse.coo_matrix(M)
    mask = coo.data > 0
    rows, cols = coo.row[mask], coo.col[mask]
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    contrib = f.U[rows] * f.V[cols]
    return rows, cols, np.argmax(contrib, axis=1)


def membership_from_edges(A, f):
    """Label each observed edge by its dominant community, then give each node
    the label proportions over its incident (incoming and outgoing) edges."""
    n = f.U.shape[0]
    rows, cols, labels = edge_labels(A, f)
    counts = np.zeros((n, f.K))
    np.add.at(counts, (rows, labels), 1.0)
    np.add.at(counts, (cols, labels), 1.0)
    return _membership_from_counts(counts, 0.5)


def agreement_rate(a, b):
    """Fraction of nodes assigned under both rules that receive the same hard label."""
    both = a.assigned & b.assigned
    if not np.any(both):
        return float("nan")
    return float(np.mean(a.hard[both] == b.hard[both]))


def _power(M, x, tol, max_iter, what):
    x = x / np.linalg.norm(x)
    for _ in range(max_iter):
        y = M @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise ValueError(f"{what} iteration collapsed to zero")
        y /= norm
        if np.linalg.norm(y - x) < tol:
            return y
        x = y
    raise ConvergenceError(f"{what} power iteration did not converge in {max_iter} steps", last=x)


def _fix_sign(x):
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    return x


def hub_authority(A, tol=1e-12, max_iter=100000, seed=0):
    """Kleinberg hub and authority scores by power iteration.

    Hubs are the leading eigenvector of ``A A^T``, authorities of ``A^T A``;
    both are returned with unit L2 norm and non-negative orientation.
    """
    W = A.weights if isinstance(A, GraphSnapshot) else np.asarray(A, dtype=np.float64)
    if np.any(W < 0):
        raise ValueError("adjacency matrix must be non-negative")
    if not np.any(W):
        raise ValueError("hub/authority scores are undefined for a graph without edges")
    rng = np.random.default_rng(seed)
    n = W.shape[0]
    start = rng.uniform(0.5, 1.5, size=n)
    try:
        hub = _power(W @ W.T, start, tol, max_iter, "hub")
    except ConvergenceError as exc:
        raise ConvergenceError(str(exc), last=(exc.last, None)) from None
    try:
        auth = _power(W.T @ W, start, tol, max_iter, "authority")
    except ConvergenceError as exc:
        raise ConvergenceError(str(exc), last=(hub, exc.last)) from None
    return _fix_sign(hub), _fix_sign(auth)


@dataclass(frozen=True)
class Rank1Report:
    hub_cosine: float
    authority_cosine: float
    U: np.ndarray
    V: np.ndarray
    hub: np.ndarray
    authority: np.ndarray


def _unit(x):
    norm = np.linalg.norm(x)
    return x / norm if norm > 0 else x


def rank1_equivalence_check(A, cfg=None, tol=1e-12, max_iter=100000):
    """Compare a rank-1 unpenalized fit with hub/authority scores (cosines).

    Without ``cfg`` the fit runs to a tight tolerance, since the comparison
    concerns the converged solution.
    """
    cfg = FitConfig(K=1, tol=1e-13, max_iter=100000) if cfg is None else cfg
    if cfg.K != 1 or cfg.lambda_s != 0:
        raise ValueError("rank-1 equivalence needs K = 1 and lambda_s = 0")
    f, _ = fit_sparse_nmf(A, cfg)
    u = _unit(f.U[:, 0])
    v = _unit(f.V[:, 0])
    hub, auth = hub_authority(A, tol=tol, max_iter=max_iter, seed=cfg.seed)
    return Rank1Report(float(u @ hub), float(v @ auth), u, v, hub, auth)


def normalize_pair(f):
    """Unit-L2 U columns, with the removed scale moved onto V."""
    U = f.U.copy()
    V = f.V.copy()
    norms = np.linalg.norm(U, axis=0)
    nz = norms > 0
    U[:, nz] /= norms[nz]
    V[:, nz] *= norms[nz]
    return FactorPair(U, V)


def normalize_for_display(fs):
    if isinstance(fs, FactorPair):
        return normalize_pair(fs)
    return FactorSequence(normalize_pair(p) for p in fs)
