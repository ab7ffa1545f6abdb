import numpy as np
import pytest

from dynnmf import (PaGrowthConfig, PlantedConfig, fit_power_law_exponent,
                    gen_planted_communities, gen_preferential_attachment, gen_ring, gen_star)
from dynnmf.synthetic import pa_growth_events


class TestStarRing:
    def test_star(self):
        W = gen_star(5).weights
        expected = np.zeros((5, 5))
        expected[0, 1:] = 1
        np.testing.assert_array_equal(W, expected)
        np.testing.assert_array_equal(gen_star(2).weights, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(gen_star(7).weights.sum(axis=1), [6, 0, 0, 0, 0, 0, 0])

    def test_ring(self):
        W = gen_ring(5).weights
        expected = np.array([[0, 1, 0, 0, 1], [1, 0, 1, 0, 0], [0, 1, 0, 1, 0],
                             [0, 0, 1, 0, 1], [1, 0, 0, 1, 0]])
        np.testing.assert_array_equal(W, expected)
        np.testing.assert_array_equal(gen_ring(9).weights.sum(axis=1), 2)
        np.testing.assert_array_equal(gen_ring(6).weights, gen_ring(6).weights.T)

    def test_sizes(self):
        with pytest.raises(ValueError):
            gen_star(1)
        with pytest.raises(ValueError):
            gen_ring(2)


class TestPA:
    @pytest.mark.parametrize("kw", [dict(n_total=10, snapshots=3), dict(n_total=10, snapshots=2, m=0),
                                    dict(n_total=10, snapshots=10, m=1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PaGrowthConfig(**kw)

    def test_growth(self):
        cfg = PaGrowthConfig(200, 10, 1, seed=3)
        seq = gen_preferential_attachment(cfg)
        assert seq.T == 10 and seq.n == 200
        active = []
        prev = None
        for s, snap in enumerate(seq, start=1):
            W = snap.weights
            deg = (W.sum(axis=0) + W.sum(axis=1)) > 0
            active.append(int(deg.sum()))
            # m = 1: one edge per node beyond the first
            assert snap.nnz == s * cfg.step - 1
            if prev is not None:
                assert np.all(W[prev > 0] > 0)
            prev = W
        assert active == sorted(active) and active[-1] == 200

    def test_edges_point_backwards(self):
        src, dst = pa_growth_events(PaGrowthConfig(100, 5, 2, seed=1))
        assert np.all(src > dst)
        pairs = set(zip(src.tolist(), dst.tolist()))
        assert len(pairs) == len(src)  # distinct targets per arrival

    def test_m_edges_per_arrival(self):
        m = 3
        src, _ = pa_growth_events(PaGrowthConfig(60, 3, m, seed=0))
        counts = np.bincount(src)
        assert np.all(counts[m + 1:] == m)

    def test_deterministic(self):
        a = gen_preferential_attachment(PaGrowthConfig(100, 4, seed=5))
        b = gen_preferential_attachment(PaGrowthConfig(100, 4, seed=5))
        np.testing.assert_array_equal(a.dense(), b.dense())

    def test_power_law_tail(self):
        exps = []
        for seed in range(10):
            src, dst = pa_growth_events(PaGrowthConfig(2000, 20, 1, seed=seed))
            deg = np.bincount(np.concatenate([src, dst]), minlength=2000)
            exps.append(fit_power_law_exponent(deg))
        assert all(2.5 <= g <= 3.5 for g in exps), exps


def test_power_law_recovers_known_exponent():
    from scipy import stats
    sample = stats.zipf.rvs(2.7, size=20000, random_state=1)
    assert fit_power_law_exponent(sample, x_min=1) == pytest.approx(2.7, abs=0.05)


class TestPlanted:
    def test_block_diagonal(self):
        seq, truth = gen_planted_communities(PlantedConfig(20, 2, 0.6, 0.0, T=3, seed=1))
        for t, snap in enumerate(seq):
            lab = truth[t]
            W = snap.weights
            assert not np.any(W[lab[:, None] != lab[None, :]])

    def test_no_churn_constant(self):
        _, truth = gen_planted_communities(PlantedConfig(30, 3, 0.5, 0.1, T=4, seed=2))
        assert np.all(truth == truth[0])

    def test_churn_moves(self):
        _, truth = gen_planted_communities(PlantedConfig(100, 4, 0.5, 0.1, T=3, churn=0.3, seed=2))
        assert np.any(truth[1] != truth[0])

    def test_density(self):
        seq, truth = gen_planted_communities(PlantedConfig(60, 3, 0.4, 0.1, T=5, seed=0))
        inside, across = [], []
        for t, snap in enumerate(seq):
            same = truth[t][:, None] == truth[t][None, :]
            np.fill_diagonal(same, False)
            diff = truth[t][:, None] != truth[t][None, :]
            inside.append(snap.weights[same].mean())
            across.append(snap.weights[diff].mean())
        assert np.mean(inside) > np.mean(across)

    def test_weighted(self):
        seq, _ = gen_planted_communities(PlantedConfig(20, 2, 0.5, 0.1, seed=0, weighted=True))
        vals = seq[0].weights[seq[0].weights > 0]
        assert len(np.unique(vals)) > 1

    @pytest.mark.parametrize("kw", [dict(p_in=0.1, p_out=0.2), dict(p_in=1.5, p_out=0.1),
                                    dict(p_in=0.5, p_out=-0.1), dict(churn=2.0)])
    def test_invalid(self, kw):
        base = dict(n=10, K=2, p_in=0.5, p_out=0.1)
        base.update(kw)
        with pytest.raises(ValueError):
            PlantedConfig(**base)

    def test_deterministic(self):
        a, ta = gen_planted_communities(PlantedConfig(15, 3, 0.5, 0.1, T=2, churn=0.2, seed=9))
        b, tb = gen_planted_communities(PlantedConfig(15, 3, 0.5, 0.1, T=2, churn=0.2, seed=9))
        np.testing.assert_array_equal(a.dense(), b.dense())
        np.testing.assert_array_equal(ta, tb)
