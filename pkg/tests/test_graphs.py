import numpy as np
import pytest

from conftest import random_digraph
from digraph_ot.errors import InputError
from digraph_ot.graphs import (
    DiGraph,
    Reachability,
    analyze_reachability,
    from_edge_list,
    read_edge_list_csv,
    read_manifest,
    regularize,
    write_edge_list_csv,
    write_manifest,
)


class TestFromEdgeList:
    def test_symmetric_two_cycle(self):
        g = from_edge_list([("a", "b", 1.0), ("b", "a", 1.0)])
        assert g.labels == ("a", "b")
        assert np.array_equal(g.weights, [[0, 1], [1, 0]])

    def test_empty_rejected(self):
        with pytest.raises(InputError, match="empty graph"):
            from_edge_list([])

    def test_duplicate_rows_sum(self):
        g = from_edge_list([("a", "b", 0.5), ("a", "b", 0.5)])
        assert g.weights[0, 1] == 1.0
        assert g.n_edges == 1

    def test_negative_weight_names_row(self):
        with pytest.raises(InputError, match="row 1"):
            from_edge_list([("a", "b", 1.0), ("b", "c", -2.0)])

    def test_unparseable_row(self):
        with pytest.raises(InputError, match="row 0"):
            from_edge_list([("a", "b", "not-a-number")])

    def test_label_order_is_first_appearance(self):
        g = from_edge_list([("x", "a", 1.0), ("a", "b", 1.0), ("b", "x", 1.0)])
        assert g.labels == ("x", "a", "b")


class TestDiGraphInvariants:
    def test_duplicate_labels_rejected(self):
        with pytest.raises(InputError, match="unique"):
            DiGraph(("a", "a"), np.zeros((2, 2)))

    def test_negative_weights_rejected(self):
        with pytest.raises(InputError, match="nonnegative"):
            DiGraph(("a", "b"), np.array([[0.0, -1.0], [0.0, 0.0]]))

    def test_weights_immutable(self):
        g = from_edge_list([("a", "b", 1.0)])
        with pytest.raises(ValueError):
            g.weights[0, 1] = 2.0

    def test_self_loops_preserved(self):
        g = from_edge_list([("a", "a", 2.0), ("a", "b", 1.0)])
        assert g.weights[0, 0] == 2.0


class TestReachability:
    def test_directed_three_cycle(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])
        assert analyze_reachability(g) == Reachability(True, True)

    def test_path_has_globally_reachable_sink(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", 1)])
        r = analyze_reachability(g)
        assert not r.strongly_connected
        assert r.has_globally_reachable_node

    def test_two_disjoint_cycles(self):
        g = from_edge_list([("a", "b", 1), ("b", "a", 1), ("c", "d", 1), ("d", "c", 1)])
        r = analyze_reachability(g)
        assert not r.strongly_connected
        assert not r.has_globally_reachable_node

    def test_matches_transitive_closure_on_small_random_graphs(self):
        rng = np.random.default_rng(7)
        for trial in range(1000):
            n = int(rng.integers(2, 6))
            g = random_digraph(rng, n, density=float(rng.uniform(0.1, 0.9)))
            reach = np.asarray(g.weights) > 0
            closure = reach | np.eye(n, dtype=bool)
            for _ in range(n):
                closure = closure | (closure @ closure)
            sc = bool(closure.all())
            globally_reachable = bool(closure.all(axis=0).any())
            r = analyze_reachability(g)
            assert r.strongly_connected == sc, f"trial {trial}"
            assert r.has_globally_reachable_node == globally_reachable, f"trial {trial}"


class TestRegularize:
    def test_alpha_one_is_row_normalization(self):
        g = from_edge_list([("a", "b", 2.0), ("b", "a", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
        r = regularize(g, 1.0)
        assert np.allclose(r.weights.sum(axis=1), 1.0, atol=1e-12)
        assert analyze_reachability(r).strongly_connected == analyze_reachability(g).strongly_connected

    def test_hand_mixing_example(self):
        g = from_edge_list([("a", "b", 1.0)])
        r = regularize(g, 0.85)
        assert np.allclose(r.weights[0], [0.075, 0.925], atol=1e-15)
        assert np.allclose(r.weights[1], [0.5, 0.5], atol=1e-15)

    def test_output_strongly_connected_for_alpha_below_one(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 8))
            g = random_digraph(rng, n, density=0.3)
            r = regularize(g, float(rng.uniform(0.1, 0.99)))
            assert analyze_reachability(r) == Reachability(True, True)

    def test_rows_sum_to_one(self, rng):
        for _ in range(20):
            g = random_digraph(rng, int(rng.integers(2, 10)), density=0.4)
            r = regularize(g, 0.85)
            assert np.abs(r.weights.sum(axis=1) - 1.0).max() <= 1e-12

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.2, np.inf])
    def test_alpha_out_of_range(self, alpha):
        g = from_edge_list([("a", "b", 1.0)])
        with pytest.raises(InputError):
            regularize(g, alpha)

    def test_alpha_recorded_in_meta(self):
        g = from_edge_list([("a", "b", 1.0)])
        assert regularize(g, 0.7).meta["regularize_alpha"] == 0.7


class TestFileFormats:
    def test_edge_list_round_trip(self, tmp_path, rng):
        g = random_digraph(rng, 6, density=0.5)
        path = tmp_path / "g.csv"
        write_edge_list_csv(g, path)
        g2 = read_edge_list_csv(path)
        assert set(g2.labels) <= set(g.labels)
        for s, t, w in g.edges():
            assert g2.weights[g2.index(s), g2.index(t)] == w
        assert g2.n_edges == g.n_edges

    def test_comments_and_header(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("# a comment\nsource,target,weight\n# another\na,b,1.5\n", encoding="utf-8")
        g = read_edge_list_csv(path)
        assert g.edges() == [("a", "b", 1.5)]

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("from,to,w\na,b,1\n", encoding="utf-8")
        with pytest.raises(InputError, match="header"):
            read_edge_list_csv(path)

    def test_manifest_round_trip(self, tmp_path):
        entries = [
            {"id": "g0", "path": "g0.csv", "label": "healthy"},
            {"id": "g1", "path": "g1.csv"},
        ]
        path = tmp_path / "manifest.json"
        write_manifest(entries, path)
        loaded = read_manifest(path)
        assert [e["id"] for e in loaded] == ["g0", "g1"]
        assert loaded[0]["label"] == "healthy"
        assert loaded[1]["label"] is None
        assert loaded[0]["path"] == tmp_path / "g0.csv"

    def test_manifest_missing_fields(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text('{"graphs": [{"id": "g0"}]}', encoding="utf-8")
        with pytest.raises(InputError, match="graphs\\[0\\]"):
            read_manifest(path)
