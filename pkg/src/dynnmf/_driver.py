"""Shared sweep loop behind the static and dynamic fits.

Penalty coefficients inside the multiplicative updates are derived from the
objective actually reported: each unordered pair of neighbouring times is
counted twice by the temporal sum, so U_t sees a quadratic coupling of
``2 * lambda_t`` per neighbour, and the L1 term contributes ``lambda_s / 2``
to the halved gradient of V. With these coefficients every sweep is a
majorize-minimize step and the reported objective cannot increase.
"""
import warnings

import numpy as np

from . import kernels
from .factors import DegenerateSolutionWarning, NumericalError, WindowSpec


def update_coefficients(lambda_t, lambda_s):
    """Map objective penalties to the (temporal, sparsity) update coefficients."""
    return 2.0 * lambda_t, 0.5 * lambda_s


def init_factors(shapes, K, rng):
    """Dense positive starting factors, drawn U_1, V_1, U_2, V_2, ..."""
    Us, Vs = [], []
    for nr, nc in shapes:
        Us.append(rng.uniform(0.1, 1.1, size=(nr, K)))
        Vs.append(rng.uniform(0.1, 1.1, size=(nc, K)))
    return Us, Vs


def temporal_penalty(Us, window):
    """Sum over t and s in N(t) of ||U_t - U_s||_F^2 (each pair counted twice)."""
    win = WindowSpec(window, len(Us))
    total = 0.0
    for t in range(len(Us)):
        for s in win.neighbors(t):
            d = Us[t] - Us[s]
            total += float(np.sum(d * d))
    return total


def run_sweeps(mats, Us, Vs, *, lambda_t, lambda_s, window, max_iter, tol, eps,
               backend=None, warn_degenerate=True):
    """Gauss-Seidel sweeps over t until the objective settles.

    ``Us`` and ``Vs`` are updated in place. Returns
    ``(objective_trace, iterations_run, converged)``.
    """
    T = len(mats)
    win = WindowSpec(window, T)
    c_t, c_s = update_coefficients(lambda_t, lambda_s)
    neighbors = [win.neighbors(t) for t in range(T)]
    sq_norms = [kernels.squared_norm(A) for A in mats]
    coupled = c_t > 0 and T > 1

    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        total = 0.0
        for t in range(T):
            S = None
            m = 0.0
            if coupled:
                nb = neighbors[t]
                S = Us[nb[0]].copy()
                for s in nb[1:]:
                    S += Us[s]
                m = float(len(nb))
            resid, l1 = kernels.mu_sweep(mats[t], Us[t], Vs[t], S, c_t, m, c_s, eps,
                                         sq_norms[t], backend=backend)
            total += resid + lambda_s * l1
        if coupled:
            total += lambda_t * temporal_penalty(Us, window)
        if not np.isfinite(total):
            raise NumericalError("objective became non-finite", iteration=it)
        trace.append(total)
        if len(trace) > 1:
            prev = trace[-2]
            if abs(prev - total) / max(prev, 1e-30) < tol:
                converged = True
                break

    if warn_degenerate:
        for t, V in enumerate(Vs):
            if np.any(np.all(V < eps, axis=0)):
                warnings.warn(
                    f"a column of V at time index {t} collapsed to zero; "
                    "the penalties are likely too large for this data",
                    DegenerateSolutionWarning,
                    stacklevel=3,
                )
                break
    return trace, it, converged
