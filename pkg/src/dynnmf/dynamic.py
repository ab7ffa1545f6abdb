"""Temporal NMF: per-snapshot factors coupled by a windowed smoothness penalty."""
import numpy as np

from . import kernels
from ._driver import init_factors, run_sweeps, temporal_penalty
from .factors import FactorPair, FactorSequence, FitReport, WindowSpec
from .graph import GraphSequence
from .static import residual


def _window(win):
    return win.W if isinstance(win, WindowSpec) else int(win)


def temporal_term(fs, window=2):
    """Unweighted smoothness term: sum over t, s in N(t) of ||U_t - U_s||^2."""
    return temporal_penalty([p.U for p in fs], _window(window))


def objective_dynamic(seq, fs, lambda_t=0.0, lambda_s=0.0, win=2):
    """Total reconstruction error plus temporal and L1 penalties.

    ``win`` is a :class:`WindowSpec` or the even window width. Neighbour sets
    are truncated at the sequence ends.
    """
    if len(seq) != len(fs):
        raise ValueError(f"sequence has {len(seq)} snapshots but {len(fs)} factor pairs")
    if lambda_t < 0 or lambda_s < 0:
        raise ValueError("penalties must be >= 0")
    fit = sum(residual(A, f) for A, f in zip(seq, fs))
    l1 = sum(float(f.V.sum()) for f in fs)
    return fit + lambda_t * temporal_term(fs, win) + lambda_s * l1


def fit_dynamic_nmf(seq, cfg, init=None, backend=None):
    """Fit one factor pair per snapshot with temporal and sparsity penalties.

    Each outer iteration sweeps t = 1..T, updating U_t then V_t; neighbour
    sums use the freshest U available (Gauss-Seidel). Near the ends of the
    sequence the window is truncated and the U_t self-coupling shrinks to
    the number of in-range neighbours.

    Returns ``(FactorSequence, FitReport)``.
    """
    if not isinstance(seq, GraphSequence):
        seq = GraphSequence.from_matrices(seq)
    if cfg.K > seq.n:
        raise ValueError(f"rank K={cfg.K} exceeds node count n={seq.n}")
    mats = [kernels.as_operand(m) for m in seq.matrices()]
    if init is None:
        Us, Vs = init_factors([m.shape for m in mats], cfg.K, np.random.default_rng(cfg.seed))
    else:
        if len(init) != len(seq) or init.n != seq.n or init.K != cfg.K:
            raise ValueError("initial factors do not match the data and rank")
        Us = [p.U.copy() for p in init]
        Vs = [p.V.copy() for p in init]
    trace, its, conv = run_sweeps(
        mats, Us, Vs,
        lambda_t=cfg.lambda_t, lambda_s=cfg.lambda_s, window=cfg.window,
        max_iter=cfg.max_iter, tol=cfg.tol, eps=cfg.eps, backend=backend,
    )
    fs = FactorSequence(FactorPair(U, V) for U, V in zip(Us, Vs))
    return fs, FitReport(trace, its, conv)


def smoothness_profile(fs):
    """``||U_{t+1} - U_t||_F`` for t = 1..T-1."""
    if len(fs) < 2:
        raise ValueError("smoothness profile needs at least two time points")
    return [float(np.linalg.norm(fs[t + 1].U - fs[t].U)) for t in range(len(fs) - 1)]
