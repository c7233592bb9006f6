import io
import warnings

import numpy as np
import pytest

from oracles import tail_sum_bruteforce
from nodedp.graph import (
    Graph,
    GraphError,
    ParseError,
    ThresholdWarning,
    alpha_decay_holds,
    check_threshold,
    decay_grid,
    degree_distribution,
    degree_list,
    generate,
    padded_l1,
    parse_edge_list,
    read_edge_list,
    remove_node,
    serialize_edge_list,
    tail_excess,
    write_edge_list,
)


def random_graphs(rng, count, max_n=50):
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        kind = i % 3
        if kind == 0:
            yield generate("erdos-renyi", n, int(rng.integers(2**31)), p=float(rng.uniform(0, 0.6)))
        elif kind == 1:
            yield generate("chung-lu", n, int(rng.integers(2**31)), alpha=float(rng.uniform(1.2, 3)), avg_degree=3.0)
        else:
            yield generate("star", n, 0)


class TestGraphType:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(GraphError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(0, 2)])

    def test_edges_are_canonical_and_frozen(self):
        g = Graph.from_edges(4, [(3, 1), (2, 0), (1, 0)])
        assert g.edges.tolist() == [[0, 1], [0, 2], [1, 3]]
        with pytest.raises(ValueError):
            g.edges[0, 0] = 5

    def test_equality_and_hash(self, k3):
        other = Graph.from_edges(3, [(1, 2), (0, 2), (0, 1)])
        assert k3 == other and hash(k3) == hash(other)

    def test_average_degree(self, p3):
        assert p3.average_degree == pytest.approx(4 / 3)


class TestParse:
    def test_basic(self):
        g = parse_edge_list(b"3 2\n0 1\n1 2\n")
        assert g.node_count == 3 and g.edges.tolist() == [[0, 1], [1, 2]]

    def test_no_edges(self):
        g = parse_edge_list("1 0\n")
        assert g.node_count == 1 and g.edge_count == 0

    def test_self_loop_names_line(self):
        with pytest.raises(ParseError) as exc:
            parse_edge_list("2 1\n0 0\n")
        assert exc.value.lineno == 2 and "self-loop" in str(exc.value)

    def test_comments_skipped(self):
        g = parse_edge_list("# a graph\n2 1\n# edge follows\n0 1\n")
        assert g.edge_count == 1

    @pytest.mark.parametrize(
        "text, line",
        [
            ("3 2\n0 1\n1 0\n", 3),
            ("2 1\n0 5\n", 2),
            ("x y\n", 1),
            ("2 1\n0  1\n", 2),
            ("2 1\n0\t1\n", 2),
            ("2 2\n0 1\n", 3),
            ("2 0\n0 1\n", 2),
            ("", 1),
        ],
    )
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            parse_edge_list(text)
        assert exc.value.lineno == line

    def test_file_object(self):
        assert parse_edge_list(io.StringIO("2 1\n0 1\n")).edge_count == 1

    def test_roundtrip(self, rng):
        for g in random_graphs(rng, 40):
            assert parse_edge_list(serialize_edge_list(g)) == g

    def test_serialization_sorted(self):
        g = Graph.from_edges(4, [(2, 3), (0, 3), (0, 1)])
        assert serialize_edge_list(g) == "4 3\n0 1\n0 3\n2 3\n"

    def test_file_roundtrip(self, tmp_path, star4):
        path = tmp_path / "g.el"
        write_edge_list(star4, path, comment="star")
        assert path.read_bytes().startswith(b"# star\n5 4\n")
        assert read_edge_list(path) == star4


class TestDegreeStats:
    def test_degree_lists(self, p3, k3, star4):
        assert degree_list(p3).tolist() == [2, 1, 1]
        assert degree_list(k3).tolist() == [2, 2, 2]
        assert degree_list(star4).tolist() == [4, 1, 1, 1, 1]

    @pytest.mark.parametrize(
        "a, b, d", [((2, 1), (2, 1), 0), ((2, 1, 1), (2, 1), 1), ((3, 1), (1, 1, 1), 3)]
    )
    def test_padded_l1(self, a, b, d):
        assert padded_l1(a, b) == d
        assert padded_l1(b, a) == d

    def test_padded_l1_metric(self, rng):
        for _ in range(500):
            a, b, c = (rng.uniform(0, 5, rng.integers(0, 8)) for _ in range(3))
            assert padded_l1(a, b) >= 0
            assert padded_l1(a, b) == padded_l1(b, a)
            assert padded_l1(a, c) <= padded_l1(a, b) + padded_l1(b, c) + 1e-12
            assert padded_l1(a, a) == 0

    def test_distributions(self, p3, k3, star4):
        assert degree_distribution(p3).pmf.tolist() == pytest.approx([0, 2 / 3, 1 / 3])
        assert degree_distribution(k3).pmf.tolist() == [0, 0, 1]
        d = degree_distribution(star4)
        assert d.pmf[1] == pytest.approx(0.8) and d.pmf[4] == pytest.approx(0.2)

    def test_distribution_properties(self, rng):
        for g in random_graphs(rng, 60):
            d = degree_distribution(g)
            assert abs(d.pmf.sum() - 1) <= 1e-12
            assert d.cdf_tail[0] == pytest.approx(1.0)
            assert np.all(np.diff(d.cdf_tail) <= 1e-15)
            assert np.allclose(d.cdf_tail, np.cumsum(d.pmf[::-1])[::-1])

    def test_empty_distribution_rejected(self):
        with pytest.raises(GraphError):
            degree_distribution(Graph.empty(0))


class TestRemoveNode:
    def test_k3(self, k3):
        assert remove_node(k3, 0) == Graph.from_edges(2, [(0, 1)])

    def test_star_center(self, star4):
        assert remove_node(star4, 0) == Graph.empty(4)

    def test_path_middle(self, p3):
        assert remove_node(p3, 1) == Graph.empty(2)

    def test_shift_down(self):
        g = Graph.from_edges(4, [(0, 3), (2, 3)])
        assert remove_node(g, 1).edges.tolist() == [[0, 2], [1, 2]]

    def test_out_of_range(self, k3):
        with pytest.raises(GraphError):
            remove_node(k3, 3)

    def test_sorted_degree_sensitivity(self, rng):
        for g in random_graphs(rng, 80):
            if g.node_count == 0:
                continue
            v = int(rng.integers(g.node_count))
            d = padded_l1(degree_list(g), degree_list(remove_node(g, v)))
            assert d <= 2 * g.max_degree


class TestTailExcess:
    @pytest.mark.parametrize("D, expected", [(2, 2), (1, 3)])
    def test_star(self, star4, D, expected):
        assert tail_excess(star4, D) == expected

    def test_bounded(self, k3):
        assert tail_excess(k3, 2) == 0

    def test_matches_tail_sum(self, rng):
        for g in random_graphs(rng, 120, max_n=50):
            if g.node_count == 0:
                continue
            for D in (1, 2, 3, 5, 8):
                assert tail_excess(g, D) == tail_sum_bruteforce(g, D)


class TestAlphaDecay:
    def test_markov_holds_for_everything(self, rng):
        for g in random_graphs(rng, 40):
            if g.edge_count == 0:
                continue
            assert alpha_decay_holds(g, 1.0)
            assert alpha_decay_holds(g, 1.0, np.linspace(1.01, 50, 400))

    def test_regular(self):
        g = generate("regular", 20, 3, d=4)
        assert alpha_decay_holds(g, 10.0, [1.01, 2, 10])

    def test_big_star_fails(self):
        g = generate("star", 100, 0)
        assert g.average_degree == pytest.approx(1.98)
        assert not alpha_decay_holds(g, 3.0, [10.0])

    def test_default_grid_is_breakpoints(self, star4):
        t = decay_grid(star4)
        assert np.all(t > 1)
        assert np.allclose(t * star4.average_degree, np.arange(2, 5))

    def test_grid_must_exceed_one(self, k3):
        with pytest.raises(ValueError):
            alpha_decay_holds(k3, 2.0, [0.5])


class TestGenerators:
    def test_star(self, star4):
        assert generate("star", 5, 99) == star4

    def test_empty_gnp(self):
        assert generate("erdos-renyi", 10, 1, p=0.0).edge_count == 0

    def test_complete_gnp(self):
        assert generate("erdos-renyi", 7, 1, p=1.0).edge_count == 21

    def test_gnp_density(self):
        g = generate("erdos-renyi", 400, 5, p=0.05)
        m = 400 * 399 / 2 * 0.05
        assert abs(g.edge_count - m) < 5 * np.sqrt(m)

    @pytest.mark.parametrize("model, params", [
        ("erdos-renyi", {"p": 0.1}),
        ("chung-lu", {"alpha": 2.0, "avg_degree": 4.0}),
        ("regular", {"d": 3}),
        ("random-bounded", {"D": 3}),
    ])
    def test_deterministic(self, model, params):
        assert generate(model, 60, 42, **params) == generate(model, 60, 42, **params)
        assert generate(model, 60, 42, **params) != generate(model, 60, 43, **params)

    def test_chung_lu_average_degree(self):
        means = [generate("chung-lu-powerlaw", 10_000, 7 + s, alpha=2.0, avg_degree=4.0).average_degree for s in range(20)]
        assert abs(np.mean(means) - 4.0) <= 0.4

    def test_chung_lu_alias(self):
        assert generate("chung-lu", 100, 1, alpha=2.0, avg_degree=3.0) == generate(
            "chung-lu-powerlaw", 100, 1, alpha=2.0, avg_degree=3.0
        )

    def test_regular(self):
        g = generate("regular", 30, 2, d=5)
        assert np.all(g.degrees == 5)

    def test_regular_parity(self):
        with pytest.raises(ValueError):
            generate("regular", 5, 1, d=3)

    def test_random_bounded(self):
        for s in range(10):
            assert generate("random-bounded", 80, s, D=4).max_degree <= 4

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            generate("erdos-renyi", 5, 1, p=1.5)
        with pytest.raises(ValueError):
            generate("nope", 5, 1)
        with pytest.raises(ValueError):
            generate("chung-lu", 5, 1, alpha=2.0)


class TestThreshold:
    def test_rejects_nonpositive(self, k3):
        with pytest.raises(ValueError):
            check_threshold(k3, 0)

    def test_warns_when_not_below_n(self, k3):
        with pytest.warns(ThresholdWarning):
            check_threshold(k3, 3)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            check_threshold(k3, 2)
