"""Factor containers, fit configuration and fit diagnostics."""
from dataclasses import dataclass, field

import numpy as np


class NumericalError(ArithmeticError):
    """A fit produced a non-finite value."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


class DegenerateSolutionWarning(RuntimeWarning):
    """A whole column of some V_t collapsed to zero (penalty set too large)."""


def _check_factor(name, X):
    X = np.array(X, dtype=np.float64, copy=True)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} must be finite")
    if np.any(X < 0):
        raise ValueError(f"{name} must be non-negative")
    return X


class FactorPair:
    """Non-negative factors with ``A ~ U @ V.T``; both have ``K`` columns."""

    __slots__ = ("U", "V")

    def __init__(self, U, V):
        U = _check_factor("U", U)
        V = _check_factor("V", V)
        if U.shape[1] != V.shape[1] or U.shape[1] < 1:
            raise ValueError(f"U and V need the same number (>= 1) of columns, got {U.shape}, {V.shape}")
        self.U = U
        self.V = V

    @property
    def K(self):
        return self.U.shape[1]

    @property
    def n(self):
        return self.U.shape[0]

    def reconstruct(self):
        return self.U @ self.V.T

    def copy(self):
        return FactorPair(self.U, self.V)

    def __repr__(self):
        return f"FactorPair(n={self.n}, K={self.K})"


class FactorSequence:
    """One :class:`FactorPair` per snapshot, uniform in ``n`` and ``K``."""

    def __init__(self, pairs):
        pairs = tuple(pairs)
        if not pairs:
            raise ValueError("a factor sequence needs at least one pair")
        shape = (pairs[0].U.shape, pairs[0].V.shape)
        if any((p.U.shape, p.V.shape) != shape for p in pairs):
            raise ValueError("all factor pairs must have identical dimensions")
        self.pairs = pairs

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, t):
        return self.pairs[t]

    def __iter__(self):
        return iter(self.pairs)

    @property
    def T(self):
        return len(self.pairs)

    @property
    def K(self):
        return self.pairs[0].K

    @property
    def n(self):
        return self.pairs[0].n

    @property
    def U(self):
        """Stacked ``(T, n, K)`` array of the U factors."""
        return np.stack([p.U for p in self.pairs])

    @property
    def V(self):
        return np.stack([p.V for p in self.pairs])


@dataclass(frozen=True)
class FitConfig:
    """Rank, penalties and iteration controls shared by all fits.

    ``window`` is the even smoothing window W; static fits ignore it and
    ``lambda_t``. Convergence is declared when the relative change of the
    objective between sweeps drops below ``tol``.
    """

    K: int = 1
    lambda_s: float = 0.0
    lambda_t: float = 0.0
    window: int = 2
    max_iter: int = 500
    tol: float = 1e-6
    seed: int = 0
    eps: float = 1e-12

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if not self.lambda_s >= 0 or not np.isfinite(self.lambda_s):
            raise ValueError("lambda_s must be a finite value >= 0")
        if not self.lambda_t >= 0 or not np.isfinite(self.lambda_t):
            raise ValueError("lambda_t must be a finite value >= 0")
        if int(self.window) != self.window or self.window < 2 or self.window % 2:
            raise ValueError(f"window must be an even integer >= 2, got {self.window}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def to_dict(self):
        return {
            "K": int(self.K),
            "lambda_s": float(self.lambda_s),
            "lambda_t": float(self.lambda_t),
            "window": int(self.window),
            "max_iter": int(self.max_iter),
            "tol": float(self.tol),
            "seed": int(self.seed),
            "eps": float(self.eps),
        }


@dataclass
class FitReport:
    objective_trace: list = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False


@dataclass(frozen=True)
class WindowSpec:
    """In-range neighbours ``N(t)`` of each time index for window ``W``.

    Indices are 0-based: ``N(t) = {s != t : |s - t| <= W/2, 0 <= s < T}``.
    """

    W: int
    T: int

    def __post_init__(self):
        if int(self.W) != self.W or self.W < 2 or self.W % 2:
            raise ValueError(f"W must be an even integer >= 2, got {self.W}")
        if self.T < 1:
            raise ValueError("T must be >= 1")

    def neighbors(self, t):
        h = self.W // 2
        return [s for s in range(max(0, t - h), min(self.T, t + h + 1)) if s != t]

    def size(self, t):
        return len(self.neighbors(t))
