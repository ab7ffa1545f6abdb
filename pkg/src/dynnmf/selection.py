"""Rank selection by two-dimensional (bi-)cross-validation.

Rows are split into ``k`` groups and columns into ``l`` groups; each of the
``k * l`` row-group x column-group blocks is held out in turn, identically
in every snapshot. For a held-out block ``(R, C)`` the factors fitted on the
training block ``(not R, not C)`` are extended to the rows ``R`` (V fixed)
and to the columns ``C`` (U fixed), and their product predicts the block.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .factors import FitConfig, NumericalError
from .graph import GraphSequence


@dataclass(frozen=True)
class HoldoutPlan:
    row_groups: tuple
    col_groups: tuple
    seed: int = 0

    @property
    def k(self):
        return len(self.row_groups)

    @property
    def l(self):
        return len(self.col_groups)

    def folds(self):
        """``(fold, rows, cols)`` in row-major canonical order."""
        for a, rows in enumerate(self.row_groups):
            for b, cols in enumerate(self.col_groups):
                yield a * self.l + b, rows, cols


def make_holdout(n, k=5, l=5, seed=0):
    """Seeded random partition of rows into ``k`` and columns into ``l`` groups
    whose sizes differ by at most one."""
    if not (2 <= k <= n and 2 <= l <= n):
        raise ValueError(f"fold counts must satisfy 2 <= k, l <= n={n}; got k={k}, l={l}")
    rng = np.random.default_rng(seed)
    rows = rng.permutation(n)
    cols = rng.permutation(n)
    row_groups = tuple(np.sort(g) for g in np.array_split(rows, k))
    col_groups = tuple(np.sort(g) for g in np.array_split(cols, l))
    return HoldoutPlan(row_groups, col_groups, seed)


def _complement(n, idx):
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(idx, dtype=np.int64)] = False
    return np.flatnonzero(mask)


def _block(A, rows, cols):
    B = A[np.ix_(rows, cols)] if not hasattr(A, "tocsr") else A.tocsr()[rows][:, cols]
    return kernels.as_operand(B)


def _fit_training_block(blocks, K, cfg, rng, restarts, backend):
    """Unpenalized fit of every training block; keeps the best restart per block.

    Without penalties the snapshots decouple, so each block is fitted and
    restarted independently.
    """
    best = []
    for B in blocks:
        sq = kernels.squared_norm(B)
        best_f, best_pair = np.inf, None
        for _ in range(restarts):
            U = rng.uniform(0.1, 1.1, size=(B.shape[0], K))
            V = rng.uniform(0.1, 1.1, size=(B.shape[1], K))
            f, it, _ = kernels.mu_fit(B, U, V, 0.0, cfg.eps, cfg.tol, cfg.max_iter, sq,
                                      backend=backend)
            if not np.isfinite(f):
                raise NumericalError("training fit became non-finite", iteration=it)
            if f < best_f:
                best_f, best_pair = f, (U, V)
        best.append(best_pair)
    return best


def _solve(B, F, rng, cfg, backend):
    X = rng.uniform(0.1, 1.1, size=(B.shape[0], F.shape[1]))
    F = np.ascontiguousarray(F)
    f, it, _ = kernels.mu_solve_factor(B, F, X, cfg.eps, cfg.tol, cfg.max_iter,
                                       kernels.squared_norm(B), backend=backend)
    if not np.isfinite(f):
        raise NumericalError("held-out factor solve became non-finite", iteration=it)
    return X


def cv_fold_error(seq, K, rows, cols, cfg=None, restarts=1, backend=None):
    """Test error of rank ``K`` on the held-out block ``(rows, cols)``.

    Returns the sum over snapshots of ``||A_t[rows, cols] - U_t V_t^T||_F^2``
    where ``U_t`` solves the rows-block against the training V and ``V_t``
    the columns-block against the training U. All fits are unpenalized and
    seeded from ``cfg.seed``.
    """
    if not isinstance(seq, GraphSequence):
        seq = GraphSequence.from_matrices(seq)
    cfg = FitConfig(K=K) if cfg is None else cfg
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    n = seq.n
    rows = np.unique(np.asarray(rows, dtype=np.int64))
    cols = np.unique(np.asarray(cols, dtype=np.int64))
    if rows.size == 0 or cols.size == 0:
        raise ValueError("held-out row and column sets must be non-empty")
    if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n:
        raise ValueError("held-out indices out of range")
    keep_r = _complement(n, rows)
    keep_c = _complement(n, cols)
    if keep_r.size == 0 or keep_c.size == 0:
        raise ValueError("the training block is empty")

    rng = np.random.default_rng(cfg.seed)
    mats = [s.matrix for s in seq]
    train = [_block(A, keep_r, keep_c) for A in mats]
    factors = _fit_training_block(train, K, cfg, rng, restarts, backend)
    error = 0.0
    for A, (U_tr, V_tr) in zip(mats, factors):
        U_new = _solve(_block(A, rows, keep_c), V_tr, rng, cfg, backend)
        V_new = _solve(_block(A, keep_r, cols).T.copy(), U_tr, rng, cfg, backend)
        test = _block(A, rows, cols)
        test = test.toarray() if hasattr(test, "toarray") else test
        R = test - U_new @ V_new.T
        error += float(np.sum(R * R))
    return error


@dataclass(frozen=True)
class CvReport:
    """Fold errors as a ``(len(grid), folds)`` array in canonical fold order."""

    grid: tuple
    folds: int
    errors: np.ndarray
    mean_test_error: np.ndarray
    chosen_K: int

    def to_dict(self):
        return {
            "grid": [int(K) for K in self.grid],
            "folds": int(self.folds),
            "errors": [
                {"K": int(K), "fold": int(f), "test_error": float(self.errors[g, f])}
                for g, K in enumerate(self.grid)
                for f in range(self.folds)
            ],
            "mean": [
                {"K": int(K), "mean_test_error": float(m)}
                for K, m in zip(self.grid, self.mean_test_error)
            ],
            "chosen_K": int(self.chosen_K),
        }


def cv_rank_selection(seq, K_grid, k=5, l=5, cfg=None, restarts=3, plan=None,
                      backend=None):
    """Evaluate every fold for every rank; pick the lowest mean test error.

    Ties go to the smaller rank. The holdout plan is drawn from ``cfg.seed``
    unless given.
    """
    if not isinstance(seq, GraphSequence):
        seq = GraphSequence.from_matrices(seq)
    grid = tuple(int(K) for K in K_grid)
    if not grid:
        raise ValueError("the rank grid is empty")
    if min(grid) < 1 or max(grid) > seq.n:
        raise ValueError(f"ranks must lie in 1..{seq.n}")
    cfg = FitConfig() if cfg is None else cfg
    if plan is None:
        plan = make_holdout(seq.n, k, l, cfg.seed)
    folds = list(plan.folds())
    errors = np.empty((len(grid), len(folds)))
    for g, K in enumerate(grid):
        for f, rows, cols in folds:
            errors[g, f] = cv_fold_error(seq, K, rows, cols, cfg, restarts, backend)
    means = errors.mean(axis=1)
    best = min(range(len(grid)), key=lambda g: (means[g], grid[g]))
    return CvReport(grid, len(folds), errors, means, grid[best])
