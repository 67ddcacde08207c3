"""Network ingestion, surgery, and stats."""

import warnings

import numpy as np
import pytest

from embridge.corpus import (
    DocumentNetwork,
    default_tokenizer,
    hide_content,
    hide_links,
    load_content,
    load_edge_list,
    stats,
)
from embridge.errors import InputError, ParseError


def test_default_tokenizer_lowercases_and_splits():
    assert default_tokenizer("The  QUICK brown\tFox") == ["the", "quick", "brown", "fox"]
    assert default_tokenizer("   ") == []


class TestLoadEdgeList:
    def test_first_appearance_indexing(self):
        net = load_edge_list(["b\ta", "c\tb", "a\tc"])
        assert net.ids == ("b", "a", "c")
        assert net.edge_index == ((0, 1), (1, 2), (2, 0))

    def test_comments_and_blanks_skipped(self):
        net = load_edge_list(["# header", "", "x\ty", "   ", "# more"])
        assert net.ids == ("x", "y")
        assert net.edge_index == ((0, 1),)

    def test_self_loops_dropped_with_warning(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            net = load_edge_list(["a\ta", "a\tb", "b\tb"])
        assert net.edge_index == ((0, 1),)
        assert any("self-loop" in str(w.message) for w in caught)

    def test_duplicate_edges_collapse(self):
        net = load_edge_list(["a\tb", "a\tb", "b\ta"])
        assert net.edge_index == ((0, 1), (1, 0))

    def test_malformed_line_reports_position(self):
        with pytest.raises(ParseError) as err:
            load_edge_list(["a\tb", "justone"])
        assert "line 2" in str(err.value)

    def test_missing_file_is_input_error(self, tmp_path):
        with pytest.raises(OSError):
            load_edge_list(tmp_path / "nope.tsv")

    def test_round_trip_from_file(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("# c\nn1\tn2\nn2\tn3\n", encoding="utf-8")
        net = load_edge_list(p)
        assert net.ids == ("n1", "n2", "n3")
        assert len(net.edge_index) == 2


class TestLoadContent:
    def test_tokenized_lowercase(self):
        content = load_content(["d1\tAlpha Beta", "d2\tGamma"])
        assert content == {"d1": ("alpha", "beta"), "d2": ("gamma",)}

    def test_duplicate_id_rejected(self):
        with pytest.raises(ParseError) as err:
            load_content(["d1\ta", "d1\tb"])
        assert "line 2" in str(err.value)

    def test_text_may_contain_tabs(self):
        content = load_content(["d1\ta\tb c"])
        assert content["d1"] == ("a", "b", "c")

    def test_missing_text_column(self):
        with pytest.raises(ParseError):
            load_content(["justid"])

    def test_custom_tokenizer(self):
        content = load_content(["d1\tA-B"], tokenizer=lambda s: s.split("-"))
        assert content["d1"] == ("A", "B")


class TestDocumentNetwork:
    def test_rejects_duplicate_ids(self):
        with pytest.raises(InputError):
            DocumentNetwork(("a", "a"), ())

    def test_rejects_self_loop(self):
        with pytest.raises(InputError):
            DocumentNetwork(("a", "b"), ((0, 0),))

    def test_rejects_unknown_content_id(self):
        with pytest.raises(InputError):
            DocumentNetwork(("a",), (), {"b": ("x",)})

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(InputError):
            DocumentNetwork(("a", "b"), ((0, 2),))

    def test_degree_counts_both_directions(self, tiny_net):
        assert tiny_net.degree("p0") == 2
        assert tiny_net.degree("p2") == 3
        assert tiny_net.degree("p4") == 0

    def test_neighbor_ids_sorted_by_index(self, tiny_net):
        assert tiny_net.neighbor_ids("p2") == ("p0", "p1", "p3")
        assert tiny_net.neighbor_ids("p4") == ()

    def test_unknown_id_raises(self, tiny_net):
        with pytest.raises(InputError):
            tiny_net.index_of("nope")
        with pytest.raises(InputError):
            tiny_net.neighbor_ids("nope")

    def test_has_content_requires_tokens(self, tiny_net):
        assert tiny_net.has_content("p0")
        assert not tiny_net.has_content("p3")

    def test_with_content_warns_on_unknown_ids(self, tiny_net):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            net2 = tiny_net.with_content({"p0": ("x",), "ghost": ("y",)})
        assert net2.content["p0"] == ("x",)
        assert "ghost" not in net2.content
        assert any("not in the network" in str(w.message) for w in caught)

    def test_edges_id_view(self, tiny_net):
        assert ("p0", "p1") in tiny_net.edges
        assert len(tiny_net.edges) == 4


class TestSurgery:
    def test_hide_links_removes_incident_edges_only(self, tiny_net):
        hidden = hide_links(tiny_net, "p2")
        assert hidden.ids == tiny_net.ids
        assert hidden.edge_index == ((0, 1),)
        assert hidden.degree("p2") == 0
        assert hidden.content == tiny_net.content

    def test_hide_links_unknown_doc(self, tiny_net):
        with pytest.raises(InputError):
            hide_links(tiny_net, "ghost")

    def test_hide_content_removes_one_entry(self, tiny_net):
        hidden = hide_content(tiny_net, "p0")
        assert "p0" not in hidden.content
        assert hidden.content["p1"] == tiny_net.content["p1"]
        assert hidden.edge_index == tiny_net.edge_index

    def test_hide_content_requires_content(self, tiny_net):
        with pytest.raises(InputError):
            hide_content(tiny_net, "p3")

    def test_original_untouched(self, tiny_net):
        hide_links(tiny_net, "p0")
        hide_content(tiny_net, "p0")
        assert tiny_net.degree("p0") == 2
        assert "p0" in tiny_net.content


def test_stats_counts(tiny_net):
    s = stats(tiny_net)
    assert s.as_dict() == {
        "n_documents": 5,
        "n_links": 4,
        "n_with_content": 4,
        "n_isolated": 1,
    }


def test_stats_randomized_against_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 15))
        ids = tuple(f"v{i}" for i in range(n))
        pool = [(i, j) for i in range(n) for j in range(n) if i != j]
        k = int(rng.integers(0, len(pool) + 1))
        chosen = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
        seen, edges = set(), []
        for e in sorted(chosen):
            if e not in seen:
                seen.add(e)
                edges.append(e)
        with_content = {ids[i]: ("w",) for i in range(n) if rng.random() < 0.5}
        net = DocumentNetwork(ids, tuple(edges), with_content)
        s = stats(net)
        touched = {v for e in edges for v in e}
        assert s.n_documents == n
        assert s.n_links == len(edges)
        assert s.n_with_content == len(with_content)
        assert s.n_isolated == n - len(touched)
