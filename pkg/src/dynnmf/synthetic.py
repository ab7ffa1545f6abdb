"""Seeded graph generators used to validate the factorizations."""
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse, special

from .graph import GraphSequence, GraphSnapshot


def gen_star(n):
    """Node 1 points at every other node; nothing else."""
    if n < 2:
        raise ValueError("a star needs at least 2 nodes")
    A = np.zeros((n, n))
    A[0, 1:] = 1.0
    return GraphSnapshot(A)


def gen_ring(n):
    """Symmetric cycle: edges i <-> i+1 (mod n)."""
    if n < 3:
        raise ValueError("a ring needs at least 3 nodes")
    A = np.zeros((n, n))
    idx = np.arange(n)
    A[idx, (idx + 1) % n] = 1.0
    A[(idx + 1) % n, idx] = 1.0
    return GraphSnapshot(A)


@dataclass(frozen=True)
class PaGrowthConfig:
    """Preferential-attachment growth observed at evenly spaced node counts."""

    n_total: int
    snapshots: int
    m: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.snapshots < 1:
            raise ValueError("snapshots must be >= 1")
        if self.n_total % self.snapshots:
            raise ValueError("n_total must be divisible by snapshots")
        if self.n_total // self.snapshots < self.m + 1:
            raise ValueError("each snapshot must hold at least the m + 1 seed nodes")

    @property
    def step(self):
        return self.n_total // self.snapshots


def pa_growth_events(cfg):
    """Edge events of the growth process, in order.

    Returns ``(sources, targets)`` arrays. The first ``m (m + 1) / 2`` events
    form the seed clique on nodes ``0..m``; afterwards node ``v`` contributes
    ``m`` events ``v -> target`` with targets drawn without repetition,
    proportionally to their current (undirected) degree.
    """
    rng = np.random.default_rng(cfg.seed)
    m = cfg.m
    src, dst = [], []
    # every edge endpoint appears once here, so a uniform pick is degree-biased
    endpoints = []
    for i in range(1, m + 1):
        for j in range(i):
            src.append(i)
            dst.append(j)
            endpoints += [i, j]
    for v in range(m + 1, cfg.n_total):
        chosen = []
        while len(chosen) < m:
            cand = endpoints[rng.integers(len(endpoints))]
            if cand not in chosen:
                chosen.append(cand)
        for c in chosen:
            src.append(v)
            dst.append(c)
            endpoints += [v, c]
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def gen_preferential_attachment(cfg):
    """Snapshots after ``s * n_total / snapshots`` nodes have arrived.

    All snapshots share the full node set (labels ``1..n_total`` in arrival
    order); nodes that have not arrived yet are zero rows and columns. Edges
    point from the newer node to its target.
    """
    src, dst = pa_growth_events(cfg)
    n = cfg.n_total
    snaps = []
    tags = []
    for s in range(1, cfg.snapshots + 1):
        present = s * cfg.step
        mask = src < present
        mat = sparse.csr_matrix(
            (np.ones(int(mask.sum())), (src[mask], dst[mask])), shape=(n, n))
        snaps.append(GraphSnapshot(mat))
        tags.append(str(s))
    return GraphSequence(snaps, tags)


def fit_power_law_exponent(degrees, x_min=4):
    """Discrete power-law exponent of the degree tail by maximum likelihood.

    Maximizes ``-n log zeta(a, x_min) - a sum(log d)`` over the ``n`` degrees
    ``d >= x_min`` (Hurwitz zeta normalization). The default ``x_min`` skips
    the low-degree range where growth models with one edge per arrival
    deviate most from a pure power law.
    """
    d = np.asarray(degrees, dtype=np.float64)
    d = d[d >= x_min]
    if d.size < 2:
        raise ValueError("need at least two degrees at or above x_min")
    count = d.size
    log_sum = float(np.log(d).sum())

    def nll(a):
        return count * np.log(special.zeta(a, x_min)) + a * log_sum

    res = optimize.minimize_scalar(nll, bounds=(1.0 + 1e-6, 20.0), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x)


@dataclass(frozen=True)
class PlantedConfig:
    """Directed planted-partition sequence with optional label churn.

    With ``weighted`` set, present edges carry Gamma(2, 1/2) weights (mean 1)
    instead of 1.
    """

    n: int
    K: int
    p_in: float
    p_out: float
    T: int = 1
    churn: float = 0.0
    seed: int = 0
    weighted: bool = False

    def __post_init__(self):
        if not 0 <= self.p_out < self.p_in <= 1:
            raise ValueError("need 0 <= p_out < p_in <= 1")
        if not 0 <= self.churn <= 1:
            raise ValueError("churn must lie in [0, 1]")
        if self.K < 1 or self.K > self.n:
            raise ValueError("need 1 <= K <= n")
        if self.T < 1:
            raise ValueError("T must be >= 1")


def sample_planted(labels, p_in, p_out, rng, weighted=False):
    """One directed snapshot given 0-based node labels; no self-loops."""
    labels = np.asarray(labels)
    n = labels.size
    P = np.where(labels[:, None] == labels[None, :], p_in, p_out)
    A = (rng.random((n, n)) < P).astype(np.float64)
    np.fill_diagonal(A, 0.0)
    if weighted:
        A *= rng.gamma(2.0, 0.5, size=(n, n))
    return A


def gen_planted_communities(cfg):
    """Planted-community sequence and its ground truth.

    Initial labels are balanced (``i mod K``) and shuffled. Between
    consecutive snapshots ``round(churn * n)`` uniformly chosen nodes get a
    fresh uniform label. Returns ``(GraphSequence, labels)`` with ``labels``
    a ``(T, n)`` array of 0-based community indices.
    """
    rng = np.random.default_rng(cfg.seed)
    labels = rng.permutation(np.arange(cfg.n) % cfg.K)
    n_move = int(round(cfg.churn * cfg.n))
    truth = []
    mats = []
    for t in range(cfg.T):
        if t > 0 and n_move:
            labels = labels.copy()
            who = rng.choice(cfg.n, size=n_move, replace=False)
            labels[who] = rng.integers(cfg.K, size=n_move)
        truth.append(labels)
        mats.append(sample_planted(labels, cfg.p_in, cfg.p_out, rng, cfg.weighted))
    seq = GraphSequence.from_matrices(mats, timestamps=[str(t + 1) for t in range(cfg.T)])
    return seq, np.stack(truth)
