"""Sparse NMF of a single snapshot; classical NMF is the zero-penalty case."""
import dataclasses

import numpy as np
from scipy import sparse

from . import kernels
from ._driver import init_factors, run_sweeps
from .factors import FactorPair, FitConfig, FitReport
from .graph import GraphSnapshot


def _matrix(A):
    if isinstance(A, GraphSnapshot):
        return A.matrix
    if sparse.issparse(A):
        return A
    return np.asarray(A, dtype=np.float64)


def residual(A, f):
    """Squared Frobenius norm of ``A - U V^T``."""
    M = _matrix(A)
    if M.shape != (f.U.shape[0], f.V.shape[0]):
        raise ValueError(f"factors of shape {f.U.shape}, {f.V.shape} do not conform with {M.shape}")
    if sparse.issparse(M):
        cross = float(np.sum(np.asarray(M @ f.V) * f.U))
        quad = float(np.sum((f.U.T @ f.U) * (f.V.T @ f.V)))
        return max(kernels.squared_norm(M) - 2.0 * cross + quad, 0.0)
    R = M - f.U @ f.V.T
    return float(np.sum(R * R))


def objective_static(A, f, lambda_s=0.0):
    """Reconstruction error plus ``lambda_s`` times the entry sum of V."""
    if lambda_s < 0:
        raise ValueError("lambda_s must be >= 0")
    return residual(A, f) + lambda_s * float(f.V.sum())


def fit_sparse_nmf(A, cfg, init=None, backend=None):
    """Fit ``A ~ U V^T`` with an L1 penalty on V by multiplicative updates.

    Parameters
    ----------
    A : GraphSnapshot or array_like
        Non-negative n x n adjacency matrix.
    cfg : FitConfig
        Rank, ``lambda_s`` and iteration controls (``lambda_t`` is ignored).
    init : FactorPair, optional
        Starting factors; drawn from ``cfg.seed`` when omitted.
    backend : {"compiled", "python"}, optional
        Force a sweep implementation; defaults to :data:`kernels.BACKEND`.

    Returns
    -------
    (FactorPair, FitReport)
        Unnormalized factors and the per-sweep objective trace.
    """
    if not isinstance(A, GraphSnapshot):
        A = GraphSnapshot(A)
    if cfg.K > A.n:
        raise ValueError(f"rank K={cfg.K} exceeds node count n={A.n}")
    M = kernels.as_operand(A.matrix)
    if init is None:
        Us, Vs = init_factors([M.shape], cfg.K, np.random.default_rng(cfg.seed))
    else:
        if init.U.shape != (A.n, cfg.K) or init.V.shape != (A.n, cfg.K):
            raise ValueError("initial factors do not match the data and rank")
        Us, Vs = [init.U.copy()], [init.V.copy()]
    trace, its, conv = run_sweeps(
        [M], Us, Vs,
        lambda_t=0.0, lambda_s=cfg.lambda_s, window=cfg.window,
        max_iter=cfg.max_iter, tol=cfg.tol, eps=cfg.eps, backend=backend,
    )
    return FactorPair(Us[0], Vs[0]), FitReport(trace, its, conv)


def fit_classical_nmf(A, K, cfg=None, init=None, backend=None):
    """Unpenalized NMF: :func:`fit_sparse_nmf` with ``lambda_s = 0``."""
    cfg = FitConfig(K=K) if cfg is None else dataclasses.replace(cfg, K=K, lambda_s=0.0)
    return fit_sparse_nmf(A, cfg, init=init, backend=backend)
