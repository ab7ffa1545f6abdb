import numpy as np
import pytest

from dynnmf import (FitConfig, GraphSequence, PlantedConfig, cv_fold_error, cv_rank_selection,
                    gen_planted_communities, make_holdout)
from dynnmf.selection import _complement


class TestHoldout:
    def test_even_split(self):
        plan = make_holdout(4, 2, 2, seed=0)
        assert [len(g) for g in plan.row_groups] == [2, 2]
        assert [len(g) for g in plan.col_groups] == [2, 2]
        assert sorted(np.concatenate(plan.row_groups)) == [0, 1, 2, 3]

    def test_leave_one_out(self):
        plan = make_holdout(5, 5, 2)
        assert all(len(g) == 1 for g in plan.row_groups)

    def test_deterministic(self):
        a, b = make_holdout(11, 3, 4, 7), make_holdout(11, 3, 4, 7)
        assert all(np.array_equal(x, y) for x, y in zip(a.row_groups, b.row_groups))
        assert all(np.array_equal(x, y) for x, y in zip(a.col_groups, b.col_groups))

    @pytest.mark.parametrize("k,l", [(1, 2), (2, 1), (6, 2), (2, 6)])
    def test_out_of_range(self, k, l):
        with pytest.raises(ValueError):
            make_holdout(5, k, l)

    @pytest.mark.parametrize("n,k,l,seed", [(7, 3, 2, 0), (13, 5, 5, 3), (10, 4, 3, 9)])
    def test_tiling(self, n, k, l, seed):
        plan = make_holdout(n, k, l, seed)
        sizes = [len(g) for g in plan.row_groups]
        assert max(sizes) - min(sizes) <= 1
        cover = np.zeros((n, n), dtype=int)
        for _, rows, cols in plan.folds():
            cover[np.ix_(rows, cols)] += 1
        assert np.all(cover == 1)
        assert [f for f, _, _ in plan.folds()] == list(range(k * l))


class TestFoldError:
    def test_zero_data(self):
        seq = GraphSequence.from_matrices([np.zeros((6, 6))] * 2)
        for K in (1, 2):
            assert cv_fold_error(seq, K, [0, 1], [2, 3]) == 0

    def test_rank1_beats_zero_predictor(self, rng):
        u, v = rng.uniform(0.5, 1.5, 8), rng.uniform(0.5, 1.5, 8)
        A = np.outer(u, v)
        seq = GraphSequence.from_matrices([A] * 3)
        rows, cols = [0, 3], [1, 5]
        err = cv_fold_error(seq, 1, rows, cols, FitConfig(tol=1e-10, max_iter=5000))
        baseline = 3 * float(np.sum(A[np.ix_(rows, cols)] ** 2))
        assert err < baseline
        assert err < 1e-6

    def test_empty_training_block(self):
        seq = GraphSequence.from_matrices([np.ones((3, 3))])
        with pytest.raises(ValueError, match="training block"):
            cv_fold_error(seq, 1, [0, 1, 2], [0])
        with pytest.raises(ValueError):
            cv_fold_error(seq, 1, [], [0])

    @pytest.mark.parametrize("T", [1, 3])
    def test_held_out_cells_unused(self, rng, T):
        # filling the held-out block with a constant c gives
        # err(c) = sum (c - P)^2 with P independent of c when the prediction
        # never sees those cells; the second difference is then 2 * |block| * T
        mats = [rng.uniform(0, 1, (8, 8)) for _ in range(T)]
        rows, cols = [1, 4, 5], [0, 6]
        errs = []
        for c in (0.0, 1.0, 2.0):
            filled = []
            for A in mats:
                B = A.copy()
                B[np.ix_(rows, cols)] = c
                filled.append(B)
            errs.append(cv_fold_error(GraphSequence.from_matrices(filled), 2, rows, cols,
                                      FitConfig(seed=5)))
        second = errs[2] - 2 * errs[1] + errs[0]
        assert second == pytest.approx(2 * len(rows) * len(cols) * T, rel=1e-9)


class TestRankSelection:
    def test_singleton_grid(self, rng):
        seq = GraphSequence.from_matrices([rng.uniform(0, 1, (6, 6))])
        rep = cv_rank_selection(seq, [1], 2, 2)
        assert rep.chosen_K == 1
        assert rep.errors.shape == (1, 4)

    def test_mean_is_mean(self, rng):
        seq = GraphSequence.from_matrices([rng.uniform(0, 1, (8, 8))] * 2)
        rep = cv_rank_selection(seq, [1, 2, 3], 2, 3, restarts=1)
        np.testing.assert_allclose(rep.mean_test_error, rep.errors.mean(axis=1), rtol=1e-12)
        assert np.all(rep.errors >= 0) and np.all(np.isfinite(rep.errors))
        assert rep.chosen_K in rep.grid

    def test_tie_breaks_small(self):
        seq = GraphSequence.from_matrices([np.zeros((6, 6))])
        assert cv_rank_selection(seq, [3, 1, 2], 2, 2).chosen_K == 1

    def test_bad_grid(self, rng):
        seq = GraphSequence.from_matrices([rng.uniform(0, 1, (4, 4))])
        with pytest.raises(ValueError):
            cv_rank_selection(seq, [], 2, 2)
        with pytest.raises(ValueError):
            cv_rank_selection(seq, [5], 2, 2)

    def test_report_layout(self, rng):
        seq = GraphSequence.from_matrices([rng.uniform(0, 1, (6, 6))])
        d = cv_rank_selection(seq, [1, 2], 2, 2, restarts=1).to_dict()
        assert list(d) == ["grid", "folds", "errors", "mean", "chosen_K"]
        assert d["folds"] == 4 and len(d["errors"]) == 8
        assert set(d["errors"][0]) == {"K", "fold", "test_error"}

    def test_planted_three(self):
        hits = 0
        for seed in range(3):
            seq, _ = gen_planted_communities(PlantedConfig(60, 3, 0.5, 0.05, T=5, seed=seed))
            hits += cv_rank_selection(seq, range(1, 7), cfg=FitConfig(seed=seed)).chosen_K == 3
        assert hits >= 2

    def test_deterministic(self, rng):
        seq = GraphSequence.from_matrices([rng.uniform(0, 1, (7, 7))])
        a = cv_rank_selection(seq, [1, 2], 2, 2, FitConfig(seed=4))
        b = cv_rank_selection(seq, [1, 2], 2, 2, FitConfig(seed=4))
        assert np.array_equal(a.errors, b.errors)


def test_complement():
    assert list(_complement(5, [1, 3])) == [0, 2, 4]


@pytest.mark.slow
def test_planted_six_weighted():
    hits = 0
    for seed in range(10):
        seq, _ = gen_planted_communities(
            PlantedConfig(180, 6, 0.5, 0.05, T=4, seed=seed, weighted=True))
        hits += cv_rank_selection(seq, range(4, 9), cfg=FitConfig(seed=seed)).chosen_K == 6
    assert hits >= 6
