import pytest
import hypothesis.strategies as st
from hypothesis import given

from graphs import GRAPH_MM, build_graph
from umt.corpus import load_fixture
from umt.errors import ModelError, ParseError
from umt.metamodel import parse_metamodel
from umt.model import (Coll, ModelState, ObjectId, isomorphic, parse_model, serialize_model,
                       snapshot)

TWO_NODE_LISTING = load_fixture("reverse_edges").text("input.model")
MIGRATION_MM = load_fixture("migration").metamodel()
SEQ_MM = parse_metamodel("entity L { xs : seq(I); } entity I { v : Int; }")


def test_two_node_listing_roundtrips_exactly():
    state = parse_model(TWO_NODE_LISTING, GRAPH_MM)
    assert serialize_model(state) == TWO_NODE_LISTING
    assert len(TWO_NODE_LISTING.splitlines()) == 11


def test_extents_include_subtypes():
    s = ModelState(MIGRATION_MM)
    n = s.create("Node2")
    e = s.create("Edge2")
    assert s.extent("ModelElement2") == [n, e]
    assert s.extent("Node2") == [n]


def test_fresh_labels_avoid_existing_names():
    s = parse_model("node1 : Node\n", GRAPH_MM)
    assert s.create("Node") == ObjectId("node2")
    assert s.create("Edge") == ObjectId("edge1")


def test_defaults_for_unset_attributes():
    s = ModelState(parse_metamodel("entity A { s : String; i : Int; r : opt(A); }"))
    a = s.create("A")
    assert (s.get(a, "s"), s.get(a, "i"), s.get(a, "r")) == ("", 0, Coll())
    assert not s.is_set(a, "s")


def test_insert_is_idempotent_on_sets_and_appends_on_seqs():
    s = build_graph(["a"], [])
    g, n = s.extent("Graph")[0], s.extent("Node")[0]
    assert s.insert(g, "nodes", n) is False
    lst = ModelState(SEQ_MM)
    l, i = lst.create("L"), lst.create("I")
    assert lst.insert(l, "xs", i) and lst.insert(l, "xs", i)
    assert list(lst.get(l, "xs")) == [i, i]


def test_opt_overfill():
    s = build_graph(["a", "b"], [(0, 1)])
    e = s.extent("Edge")[0]
    with pytest.raises(ModelError):
        s.insert(e, "src", s.extent("Node")[1])


def test_delete_unlinks_without_cascade():
    s = build_graph(["a", "b"], [(0, 1)])
    a = s.extent("Node")[0]
    s.delete([a])
    e = s.extent("Edge")[0]
    assert a not in s
    assert s.get(e, "src") == Coll() and len(s.get(e, "trg")) == 1
    assert len(s.get(s.extent("Graph")[0], "nodes")) == 1


def test_key_index_follows_updates_and_deletes():
    s = ModelState(MIGRATION_MM)
    n = s.create("Node2")
    s.set_attr(n, "id2", "x")
    assert s.key_lookup("ModelElement2", "x") == Coll([n])
    s.set_attr(n, "id2", "y")
    assert s.key_lookup("Node2", Coll(["x", "y"])) == Coll([n])
    dup = s.create("Edge2")
    s.set_attr(dup, "id2", "y")
    assert s.validate() == ["duplicate key 'y' in extent of ModelElement2: node21, edge21"]
    s.delete([n])
    assert s.validate() == [] and s.key_lookup("Node2", "y") == Coll()


def test_snapshot_is_frozen_and_independent():
    s = build_graph(["a"], [])
    pre = snapshot(s)
    s.set_attr(s.extent("Node")[0], "name", "b")
    assert pre.get(pre.extent("Node")[0], "name") == "a"
    with pytest.raises(ModelError):
        pre.create("Node")


@pytest.mark.parametrize("text, message", [
    ("x : Nope", "unknown entity"),
    ("x : ModelElement2", "abstract"),
    ("n : Node1\nn.id1 = 3", "type mismatch"),
    ("n : Node1\nn.colour = \"r\"", "no feature"),
    ("e : Edge1\nn : e.src1", "not declared"),
    ("n : Node1\nn : Node1", "already used"),
    ("what is this", "unrecognised"),
    ("n : Node1\nm : Node1\ne : Edge1\nn : e.src1\nm : e.src1", "already filled"),
])
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_model(text, MIGRATION_MM)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_model("g : Graph\n\n   bogus", GRAPH_MM)
    assert (info.value.line, info.value.column) == (3, 4)


def test_repeated_attribute_last_write_wins():
    s = parse_model('n : Node\nn.name = "a"\nn.name = "b"\n', GRAPH_MM)
    assert s.get(ObjectId("n"), "name") == "b"
    assert serialize_model(s) == 'n : Node\nn.name = "b"\n'


def test_unwritable_string_rejected():
    s = build_graph(['say "hi"'], [])
    with pytest.raises(ModelError):
        serialize_model(s)


def test_isomorphism_ignores_labels_only():
    a = parse_model(TWO_NODE_LISTING, GRAPH_MM)
    relabeled = "\n".join([
        "g : Graph", "p : Node", 'p.name = "n1"', "p : g.nodes",
        "n2 : Node", 'n2.name = "n2"', "n2 : g.nodes",
        "q : Edge", "p : q.src", "n2 : q.trg", "q : g.edges"])
    b = parse_model(relabeled, GRAPH_MM)
    assert ObjectId("p") in b and ObjectId("q") in b
    assert isomorphic(a, b)
    b.set_attr(ObjectId("p"), "name", "other")
    assert not isomorphic(a, b)


NAMES = st.text("abc -_1'\\", max_size=5)


@st.composite
def graphs(draw):
    nodes = draw(st.lists(NAMES, max_size=6))
    ends = st.one_of(st.none(), st.integers(0, max(len(nodes) - 1, 0))) if nodes else st.none()
    edges = draw(st.lists(st.tuples(ends, ends), max_size=8))
    return nodes, edges


@given(graphs())
def test_serialize_parse_roundtrip(graph):
    state = build_graph(*graph)
    text = serialize_model(state)
    again = parse_model(text, GRAPH_MM)
    assert isomorphic(state, again)
    assert serialize_model(again) == text


@given(st.lists(st.integers(0, 4), max_size=8))
def test_seq_roundtrip(order):
    s = ModelState(SEQ_MM)
    l = s.create("L")
    items = [s.create("I") for _ in range(5)]
    for i, it in enumerate(items):
        s.set_attr(it, "v", i - 2)
    for k in order:
        s.insert(l, "xs", items[k])
    again = parse_model(serialize_model(s), SEQ_MM)
    assert [o.label for o in again.get(l, "xs")] == [items[k].label for k in order]
    assert isomorphic(s, again)
