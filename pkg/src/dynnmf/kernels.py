"""Backend selection for the multiplicative-update sweep.

The compiled extension handles small dense blocks, where per-call overhead
dominates numpy; larger blocks go to numpy, whose BLAS products win there.
Set the environment variable ``DYNNMF_BACKEND=python`` before import to
disable the extension entirely.
"""
import os

import numpy as np
from scipy import sparse

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if os.environ.get("DYNNMF_BACKEND", "").lower() == "python":
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

# Sparse blocks denser than this are densified before fitting.
DENSE_FRACTION = 0.05

# Largest dense block (cells) sent to the compiled kernel by default.
COMPILED_MAX_CELLS = 64 * 64


def available_backends():
    return ["compiled", "python"] if _compiled is not None else ["python"]


def as_operand(A):
    """Return the matrix form the sweep should multiply with."""
    if sparse.issparse(A):
        nr, nc = A.shape
        if A.nnz >= DENSE_FRACTION * nr * nc:
            return np.ascontiguousarray(A.toarray(), dtype=np.float64)
        return sparse.csr_matrix(A, dtype=np.float64)
    return np.ascontiguousarray(A, dtype=np.float64)


def squared_norm(A):
    # overflow surfaces later as a non-finite objective
    with np.errstate(over="ignore"):
        if sparse.issparse(A):
            return float(A.multiply(A).sum())
        return float(np.sum(A * A))


def _impl(A, backend):
    if backend is None:
        small = not sparse.issparse(A) and A.size <= COMPILED_MAX_CELLS
        backend = BACKEND if small else "python"
    if backend == "compiled" and not sparse.issparse(A):
        if _compiled is None:
            raise RuntimeError("compiled backend is not available")
        return _compiled
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    return _kernels_py


def mu_sweep(A, U, V, S, c_t, m, c_s, eps, sq_norm, backend=None):
    """One in-place U-then-V sweep; returns ``(residual, l1)``."""
    return _impl(A, backend).mu_sweep(A, U, V, S, c_t, m, c_s, eps, sq_norm)


def mu_fit(A, U, V, lambda_s, eps, tol, max_iter, sq_norm, backend=None):
    """Uncoupled single-block fit; returns ``(objective, iterations, converged)``."""
    return _impl(A, backend).mu_fit(A, U, V, 0.5 * lambda_s, eps, tol, max_iter, sq_norm,
                                    lambda_s)


def mu_solve_factor(B, F, X, eps, tol, max_iter, sq_norm, backend=None):
    """Non-negative least squares for ``X`` in ``B ~ X F^T`` by multiplicative updates."""
    return _impl(B, backend).mu_solve_factor(B, F, X, eps, tol, max_iter, sq_norm)
