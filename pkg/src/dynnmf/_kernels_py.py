"""Pure numpy/scipy implementation of the multiplicative-update sweep.

Used when the compiled extension is unavailable, and always for sparse
snapshots (the compiled kernel only handles dense C-contiguous blocks).
"""
import numpy as np


def mu_sweep(A, U, V, S, c_t, m, c_s, eps, sq_norm):
    """One U-then-V multiplicative sweep, in place.

    ``A`` may be a dense array or a scipy sparse matrix. ``S`` is the sum of
    neighbouring U blocks, or None when the temporal term is inactive.
    Returns ``(residual, l1)`` for the updated factors.
    """
    AV = np.asarray(A @ V)
    G = V.T @ V
    den = U @ G
    if S is not None:
        num = AV + c_t * S
        den = den + c_t * m * U + eps
    else:
        num = AV
        den = den + eps
    U[...] = U * num / den

    AtU = np.asarray(A.T @ U)
    H = U.T @ U
    V[...] = V * AtU / (V @ H + c_s + eps)

    if isinstance(A, np.ndarray):
        R = A - U @ V.T
        resid = float(np.sum(R * R))
    else:
        # sparse: ||A||^2 - 2 <A^T U, V> + <U^T U, V^T V> avoids densifying
        resid = max(float(sq_norm - 2.0 * np.sum(AtU * V) + np.sum(H * (V.T @ V))), 0.0)
    return resid, float(V.sum())


def _settled(prev, f, tol):
    return abs(prev - f) / max(prev, 1e-30) < tol


def mu_fit(A, U, V, c_s, eps, tol, max_iter, sq_norm, lambda_s):
    """Sweep one uncoupled block until the relative objective change is below
    ``tol``. Returns ``(objective, iterations, converged)``."""
    prev = f = 0.0
    for it in range(1, max_iter + 1):
        resid, l1 = mu_sweep(A, U, V, None, 0.0, 0.0, c_s, eps, sq_norm)
        f = resid + lambda_s * l1
        if not np.isfinite(f):
            return f, it, False
        if it > 1 and _settled(prev, f, tol):
            return f, it, True
        prev = f
    return f, max_iter, False


def mu_solve_factor(B, F, X, eps, tol, max_iter, sq_norm):
    """Minimize ``||B - X F^T||^2`` over ``X >= 0`` with ``F`` fixed, in place.

    Returns ``(residual, iterations, converged)``.
    """
    BF = np.asarray(B @ F)
    G = F.T @ F
    prev = f = 0.0
    for it in range(1, max_iter + 1):
        X[...] = X * BF / (X @ G + eps)
        f = max(float(sq_norm - 2.0 * np.sum(BF * X) + np.sum((X.T @ X) * G)), 0.0)
        if not np.isfinite(f):
            return f, it, False
        if it > 1 and _settled(prev, f, tol):
            return f, it, True
        prev = f
    return f, max_iter, False
