import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from dynnmf import (EdgeListError, GraphSequence, GraphSnapshot, aggregate_cumulative,
                    load_edge_list, log_transform, write_edge_list)


def load(text, **kw):
    return load_edge_list(text.encode(), **kw)


class TestSnapshot:
    def test_defaults(self):
        g = GraphSnapshot([[0, 1], [2, 0]])
        assert g.n == 2
        assert g.labels == ("1", "2")
        assert not g.is_sparse

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="non-negative"):
            GraphSnapshot([[0, -1], [0, 0]])

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            GraphSnapshot([[0, np.nan], [0, 0]])

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            GraphSnapshot(np.zeros((2, 3)))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError, match="unique"):
            GraphSnapshot(np.zeros((2, 2)), ["a", "a"])

    def test_immutable_copy(self):
        W = np.zeros((2, 2))
        g = GraphSnapshot(W)
        W[0, 1] = 5
        assert g.weights[0, 1] == 0
        with pytest.raises(ValueError):
            g.weights[0, 0] = 1

    def test_sparse_backing(self):
        g = GraphSnapshot(sparse.csr_matrix(np.array([[0, 2.0], [0, 0]])))
        assert g.is_sparse
        np.testing.assert_array_equal(g.weights, [[0, 2], [0, 0]])
        assert g.nnz == 1


class TestSequence:
    def test_label_mismatch(self):
        a = GraphSnapshot(np.zeros((2, 2)), ["a", "b"])
        b = GraphSnapshot(np.zeros((2, 2)), ["b", "a"])
        with pytest.raises(ValueError, match="labels"):
            GraphSequence([a, b])

    def test_duplicate_timestamps(self):
        with pytest.raises(ValueError, match="distinct"):
            GraphSequence.from_matrices([np.zeros((2, 2))] * 2, timestamps=["x", "x"])

    def test_empty(self):
        with pytest.raises(ValueError):
            GraphSequence([])

    def test_tags(self):
        seq = GraphSequence.from_matrices([np.zeros((2, 2))] * 3)
        assert seq.tags() == ["1", "2", "3"]


class TestLoader:
    def test_default_weight(self):
        seq = load("d1 a b\nd1 b a\n")
        assert seq.T == 1 and seq.n == 2
        np.testing.assert_array_equal(seq[0].weights, [[0, 1], [1, 0]])

    def test_duplicates_sum(self):
        seq = load("d1 a b 2\nd1 a b 3\n")
        assert seq[0].weights[0, 1] == 5
        assert seq[0].nnz == 1

    def test_shared_node_set(self):
        seq = load("d1 a c\nd2 a b\nd3 b a\n")
        assert seq.T == 3
        c = seq.labels.index("c")
        assert seq[1].weights[c].sum() == 0 and seq[1].weights[:, c].sum() == 0
        assert seq[1].n == 3

    def test_comments_and_blank_lines(self):
        seq = load("# header\n\n d1 a b 1\n")
        assert seq.T == 1

    def test_first_seen_order(self):
        seq = load("10 a b\n2 a b\n")
        assert seq.timestamps == ("10", "2")

    def test_sort_tags_numeric(self):
        seq = load("10 a b\n2 a b\n", sort_tags=True)
        assert seq.timestamps == ("2", "10")

    def test_sort_tags_lexicographic(self):
        seq = load("b a b\na a b\n", sort_tags=True)
        assert seq.timestamps == ("a", "b")

    def test_undirected(self):
        seq = load("1 a b 2\n", directed=False)
        np.testing.assert_array_equal(seq[0].weights, [[0, 2], [2, 0]])

    def test_custom_default_weight(self):
        seq = load("1 a b\n", default_weight=0.5)
        assert seq[0].weights[0, 1] == 0.5

    @pytest.mark.parametrize("text,line", [
        ("d1 a b 1\nd1 a\n", 2),
        ("d1 a b -1\n", 1),
        ("d1 a b x\n", 1),
        ("# c\nd1 a b 1 2\n", 2),
        ("d1 a b inf\n", 1),
    ])
    def test_malformed_names_line(self, text, line):
        with pytest.raises(EdgeListError, match=f"line {line}") as err:
            load(text)
        assert err.value.lineno == line

    def test_empty_input(self):
        with pytest.raises(ValueError):
            load("")
        with pytest.raises(ValueError):
            load("# only a comment\n")

    def test_stream_and_path(self, tmp_path):
        p = tmp_path / "g.edges"
        p.write_text("1 a b 2\n")
        a = load_edge_list(str(p))
        b = load_edge_list(io.BytesIO(b"1 a b 2\n"))
        np.testing.assert_array_equal(a[0].weights, b[0].weights)

    def test_deterministic(self):
        text = "t1 x y 1\nt2 y z 2\nt1 z x 0.5\n"
        a, b = load(text), load(text)
        assert a.labels == b.labels
        np.testing.assert_array_equal(a.dense(), b.dense())

    def test_roundtrip(self):
        seq = load("t1 x y 0.1\nt2 y z 2\nt1 z x 0.5\n")
        buf = io.StringIO()
        write_edge_list(seq, buf)
        again = load(buf.getvalue())
        assert again.timestamps == seq.timestamps
        # node order can differ; compare as labelled edge sets
        def edges(s):
            return {(t, s.labels[i], s.labels[j], s[k].weights[i, j])
                    for k, t in enumerate(s.tags()) for i, j in zip(*np.nonzero(s[k].weights))}
        assert edges(again) == edges(seq)


class TestAggregate:
    def test_running_sum(self):
        A = [[0, 1], [0, 0]]
        out = aggregate_cumulative(GraphSequence.from_matrices([A, A]))
        np.testing.assert_array_equal(out[0].weights, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(out[1].weights, [[0, 2], [0, 0]])

    def test_single(self):
        seq = GraphSequence.from_matrices([[[0, 3], [1, 0]]])
        np.testing.assert_array_equal(aggregate_cumulative(seq)[0].weights, seq[0].weights)

    def test_zero(self):
        out = aggregate_cumulative(GraphSequence.from_matrices([np.zeros((3, 3))] * 3))
        assert not out.dense().any()

    def test_keeps_labels_and_tags(self):
        seq = GraphSequence.from_matrices([np.eye(2)] * 2, ["p", "q"], ["a", "b"])
        out = aggregate_cumulative(seq)
        assert out.labels == ("p", "q") and out.timestamps == ("a", "b")

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**31))
    def test_monotone(self, T, n, seed):
        r = np.random.default_rng(seed)
        seq = GraphSequence.from_matrices([r.uniform(0, 1, (n, n)) * (r.random((n, n)) < 0.5)
                                           for _ in range(T)])
        out = aggregate_cumulative(seq).dense()
        assert np.all(np.diff(out, axis=0) >= 0)
        np.testing.assert_allclose(out[-1], seq.dense().sum(axis=0))


class TestLogTransform:
    def test_values(self):
        seq = GraphSequence.from_matrices([[[0, 2.0], [math.e - 1, 0]]])
        out = log_transform(seq, 2.0)
        assert out[0].weights[0, 0] == 0
        assert out[0].weights[0, 1] == pytest.approx(math.log(2))
        out1 = log_transform(seq, 1.0)
        assert out1[0].weights[1, 0] == pytest.approx(1.0)

    @pytest.mark.parametrize("offset", [0, -1])
    def test_bad_offset(self, offset):
        with pytest.raises(ValueError):
            log_transform(GraphSequence.from_matrices([np.eye(2)]), offset)

    def test_sparse_zero_preserved(self):
        seq = GraphSequence([GraphSnapshot(sparse.csr_matrix(np.array([[0, 5.0], [0, 0]])))])
        out = log_transform(seq, 1.0)
        assert out[0].nnz == 1
        assert out[0].weights[0, 1] == pytest.approx(math.log(6))
