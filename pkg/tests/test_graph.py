"""Graph/ProbMatrix types, edge-list parsing, and matrix serialization."""

import io

import numpy as np
import pytest

from netmix import (
    Graph,
    ParseError,
    ProbMatrix,
    clip_unit,
    dumps_edge_list,
    graph_stats,
    load_edge_list,
    parse_edge_list,
    prob_matrix_from_csv,
    prob_matrix_to_csv,
    read_prob_matrix,
    write_prob_matrix,
)


class TestEdgeListParsing:
    def test_basic(self):
        g = load_edge_list("0 1\n1 2")
        assert g.n == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_dedupe_and_self_loop(self):
        g, stats = parse_edge_list("0 1\n1 0\n2 2")
        assert g.n == 3
        assert g.edges == frozenset({(0, 1)})
        assert stats.self_loops_dropped == 1
        assert stats.duplicates_dropped == 1

    def test_empty_with_override(self):
        g = load_edge_list("", n_override=5)
        assert g.n == 5
        assert g.edges == frozenset()

    def test_comments_and_blanks(self):
        g = load_edge_list("# header\n0 1  # inline\n\n  \n1 2\n")
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_malformed_line_reports_number(self):
        with pytest.raises(ParseError) as err:
            load_edge_list("0 1\nnot numbers\n")
        assert err.value.line_number == 2

    def test_wrong_token_count(self):
        with pytest.raises(ParseError):
            load_edge_list("0 1 2")

    def test_negative_index(self):
        with pytest.raises(ParseError):
            load_edge_list("-1 2")

    def test_bounds_error_with_override(self):
        with pytest.raises(ValueError, match="out of bounds"):
            load_edge_list("0 7", n_override=5)

    def test_roundtrip_is_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            pair_count = int(rng.integers(0, n * (n - 1) // 2 + 1))
            iu, ju = np.triu_indices(n, 1)
            pick = rng.choice(len(iu), size=pair_count, replace=False)
            g = Graph(n, np.column_stack([iu[pick], ju[pick]]))
            assert load_edge_list(dumps_edge_list(g), n_override=n) == g


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 3)])

    def test_normalizes_order(self):
        assert Graph(3, [(2, 0)]).edges == frozenset({(0, 2)})

    def test_adjacency_matches_edges(self):
        g = Graph(4, [(0, 1), (2, 3)])
        a = g.adjacency()
        assert a[0, 1] == a[1, 0] == 1.0
        assert a[2, 3] == a[3, 2] == 1.0
        assert a.sum() == 4.0
        assert np.trace(a) == 0.0

    def test_degrees(self):
        g = Graph(3, [(0, 1), (1, 2)])
        assert g.degrees().tolist() == [1, 2, 1]


class TestGraphStats:
    def test_triangle(self):
        stats = graph_stats(Graph(3, [(0, 1), (1, 2), (0, 2)]))
        assert stats.avg_degree == 2.0
        assert stats.density == 1.0

    def test_empty(self):
        stats = graph_stats(Graph(4))
        assert stats.avg_degree == 0.0
        assert stats.density == 0.0

    def test_path(self):
        stats = graph_stats(Graph(3, [(0, 1), (1, 2)]))
        assert stats.avg_degree == pytest.approx(4.0 / 3.0)
        assert stats.density == pytest.approx(2.0 / 3.0)

    def test_avg_degree_is_mean_of_degree_sequence(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(2, 40))
            iu, ju = np.triu_indices(n, 1)
            pick = rng.random(len(iu)) < 0.3
            g = Graph(n, np.column_stack([iu[pick], ju[pick]]))
            assert graph_stats(g).avg_degree == pytest.approx(g.degrees().mean())

    def test_zero_nodes_rejected(self):
        with pytest.raises(ValueError):
            graph_stats(Graph(0))


def _random_symmetric(rng, n, low=-1.0, high=2.0):
    raw = rng.uniform(low, high, size=(n, n))
    sym = (raw + raw.T) / 2.0
    np.fill_diagonal(sym, 0.0)
    return sym


class TestProbMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            ProbMatrix([[0.0, 0.2], [0.5, 0.0]])

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            ProbMatrix(np.zeros((2, 3)))

    def test_diagonal_forced_to_zero(self):
        p = ProbMatrix([[0.7, 0.2], [0.2, 0.7]])
        assert p.values[0, 0] == 0.0 and p.values[1, 1] == 0.0

    def test_values_read_only(self):
        p = ProbMatrix(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            p.values[0, 1] = 1.0


class TestClipUnit:
    def test_clips_above(self):
        p = ProbMatrix([[0.0, 1.3], [1.3, 0.0]])
        assert clip_unit(p).values[0, 1] == 1.0

    def test_clips_below(self):
        p = ProbMatrix([[0.0, -0.2], [-0.2, 0.0]])
        assert clip_unit(p).values[0, 1] == 0.0

    def test_identity_inside_unit_interval(self):
        rng = np.random.default_rng(3)
        values = np.abs(_random_symmetric(rng, 6, 0.0, 1.0))
        p = ProbMatrix(values)
        assert np.array_equal(clip_unit(p).values, p.values)

    def test_idempotent_and_monotone(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a = _random_symmetric(rng, 5)
            b = a + np.abs(_random_symmetric(rng, 5))  # b >= a entrywise
            ca = clip_unit(ProbMatrix(a))
            cb = clip_unit(ProbMatrix(b))
            assert np.array_equal(clip_unit(ca).values, ca.values)
            assert (cb.values >= ca.values).all()


class TestMatrixSerialization:
    def test_csv_roundtrip(self):
        rng = np.random.default_rng(9)
        p = ProbMatrix(_random_symmetric(rng, 7, 0.0, 1.0))
        buf = io.StringIO()
        prob_matrix_to_csv(p, buf)
        buf.seek(0)
        q = prob_matrix_from_csv(buf)
        assert np.array_equal(p.values, q.values)

    def test_binary_roundtrip(self):
        rng = np.random.default_rng(10)
        p = ProbMatrix(_random_symmetric(rng, 12, 0.0, 1.0))
        buf = io.BytesIO()
        write_prob_matrix(p, buf)
        buf.seek(0)
        q = read_prob_matrix(buf)
        assert np.array_equal(p.values, q.values)

    def test_binary_layout(self):
        p = ProbMatrix([[0.0, 0.25, 0.5], [0.25, 0.0, 0.75], [0.5, 0.75, 0.0]])
        buf = io.BytesIO()
        write_prob_matrix(p, buf)
        raw = buf.getvalue()
        assert raw[:4] == b"NMX1"
        assert int.from_bytes(raw[4:8], "little") == 3
        triangle = np.frombuffer(raw[8:], dtype="<f8")
        assert triangle.tolist() == [0.25, 0.5, 0.75]

    def test_binary_bad_magic(self):
        with pytest.raises(ParseError):
            read_prob_matrix(io.BytesIO(b"XXXX" + b"\x00" * 8))
