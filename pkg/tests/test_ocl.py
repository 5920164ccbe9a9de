import pytest
import hypothesis.strategies as st
from hypothesis import given

from graphs import GRAPH_MM, build_graph
from umt.errors import EvalError, ParseError, ResolveError
from umt.lexer import EOF, tokenize
from umt.model import Coll, ObjectId, snapshot
from umt.ocl import QUERY, VERIFY, Env, evaluate, parse_expr, resolve, unparse, values_equal
from umt.ocl.ast import (AtPre, Binary, EmptySet, Exists, IntLit, KeyLookup, Name, Nav,
                         Param, Select, SizeOf, StrLit, Var)
from umt.ocl.footprint import EXTENT, ReadItem, identity_atoms, read_footprint
from umt.ocl.resolve import Scope


# -- lexer -------------------------------------------------------------------

def test_tokenize_operators_and_comments():
    toks = tokenize('a->size() /= 3 -- trailing\n"s" <: b \\/ c => d@pre')
    texts = [t.text for t in toks if t.kind != EOF]
    assert texts == ["a", "->", "size", "(", ")", "/=", "3", "s", "<:", "b", "\\/", "c",
                     "=>", "d", "@", "pre"]


def test_tokenize_positions():
    toks = tokenize("x\n  yy")
    assert (toks[1].line, toks[1].column) == (2, 3)


def test_unterminated_string():
    with pytest.raises(ParseError):
        tokenize('"abc')


# -- parser ------------------------------------------------------------------

def test_precedence():
    e = parse_expr("a : b \\/ c & d = e - f => g or h")
    assert e == Binary("=>",
                       Binary("&", Binary(":", Name("a"), Binary("\\/", Name("b"), Name("c"))),
                              Binary("=", Name("d"), Binary("-", Name("e"), Name("f")))),
                       Binary("or", Name("g"), Name("h")))


def test_implication_is_right_associative():
    assert parse_expr("a => b => c") == Binary("=>", Name("a"), Binary("=>", Name("b"), Name("c")))


def test_keyword_synonyms():
    assert parse_expr("a and b implies c") == parse_expr("a & b => c")


def test_postfix_forms():
    e = parse_expr("E[x.k]->select(v | v.n = 1)->size()")
    assert e == SizeOf(Select(KeyLookup("E", Nav(Name("x"), "k")), "v",
                              Binary("=", Nav(Name("v"), "n"), IntLit(1))))
    assert parse_expr("s->select(n = 1)").implicit


@pytest.mark.parametrize("text", ["a +", "a.(b)", "x->frob()", "(a", "a b", ""])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_expr(text)


NAMES = st.sampled_from(["a", "b", "src", "trg", "nodes", "E"])
OPS = st.sampled_from(["=>", "or", "&", "=", "/=", ":", "<:", "\\/", "-"])


def exprs():
    leaves = st.one_of(NAMES.map(Name), st.integers(0, 99).map(IntLit),
                       st.text("xyz ", max_size=3).map(StrLit), st.just(EmptySet()))
    return st.recursive(leaves, lambda inner: st.one_of(
        st.builds(Nav, inner, NAMES),
        st.builds(AtPre, inner),
        st.builds(SizeOf, inner),
        st.builds(Binary, OPS, inner, inner),
        st.builds(Select, inner, st.just("v"), inner),
        st.builds(Exists, inner, st.just("w"), inner),
    ), max_leaves=12)


@given(exprs())
def test_unparse_parse_roundtrip(e):
    assert parse_expr(unparse(e)) == e


# -- resolution and evaluation ----------------------------------------------

TWO_NODES = build_graph(["n1", "n2"], [(0, 1)])


def ev(text, context="Graph", state=TWO_NODES, mode=QUERY, params=None, bindings=None):
    scope = Scope(state.mm, context, {k: None for k in (params or {})})
    e = resolve(parse_expr(text), scope)
    env = Env(dict(bindings or {}), dict(params or {}), snapshot(state), mode)
    if context is not None:
        env = env.bind("self", state.extent(context)[0])
    return evaluate(e, env, state)


def test_self_features_and_alias():
    assert ev("nodes->size()") == 2
    assert ev("g.nodes->size()") == 2
    assert ev("self.edges.src.name") == Coll(["n1"])


def test_navigation_flattens():
    assert ev("edges.src \\/ edges.trg") == Coll(TWO_NODES.extent("Node"))


def test_singleton_coercion():
    assert ev('edges.src.name = "n1"')
    assert values_equal(Coll([3]), 3)
    assert not values_equal(Coll([3, 4]), 3)


def test_unset_defaults():
    s = build_graph(["n1"], [])
    s.create("Node", "blank")
    assert ev('Node->select(name = "")->size()', state=s) == 1


def test_select_implicit_and_explicit_agree():
    assert ev("nodes->select(name = \"n2\")") == ev("nodes->select(v | v.name = \"n2\")")


def test_set_operations():
    assert ev("(nodes - edges.trg).name") == Coll(["n1"])
    assert ev("edges.src <: nodes")
    assert ev("{} <: nodes")


def test_key_lookup():
    from umt.corpus import load_fixture
    mm, _, state = load_fixture("migration").load()
    assert ev('Node1["n2"].name', context=None, state=state) == Coll(["second"])
    assert ev('Node1[Edge1.trg1.id1].name', context=None, state=state) == Coll(["second"])


def test_key_lookup_requires_key():
    with pytest.raises(ResolveError):
        ev('Node["x"]')


def test_params():
    assert ev("nodes->select(name = p)->size()", params={"p": "n2"}) == 1


def test_at_pre_reads_snapshot():
    s = build_graph(["n1"], [])
    scope = Scope(s.mm, "Node")
    e = resolve(parse_expr("name@pre = name"), scope)
    pre = snapshot(s)
    node = s.extent("Node")[0]
    s.set_attr(node, "name", "changed")
    assert evaluate(e, Env({"self": node}, {}, pre), s) is False


def test_nested_at_pre_rejected():
    with pytest.raises(ResolveError):
        ev("(edges@pre.src)@pre")


def test_query_mode_rejects_effects():
    with pytest.raises(EvalError, match="effectful expression in query context"):
        ev("Node->exists(n | n.name = \"x\")")
    with pytest.raises(EvalError, match="effectful expression in query context"):
        ev("nodes->isDeleted()")


def test_verify_mode_quantifies_over_extent():
    assert ev('Node->exists(n | n.name = "n2")', mode=VERIFY)
    assert not ev('Node->exists1(n | n.name /= "zz")', mode=VERIFY)
    assert not ev("nodes->isDeleted()", mode=VERIFY)


@pytest.mark.parametrize("text", ["nodes & edges", "nodes : 3", "frob", "self.frob",
                                  "nodes->select(v | 3)"])
def test_resolve_errors(text):
    with pytest.raises(ResolveError):
        ev(text)


# -- footprints ---------------------------------------------------------------

def test_read_footprint():
    # @pre binds to the postfix operand only: .src is navigated in the live state
    e = resolve(parse_expr("edges@pre.src->select(name = \"a\")"), Scope(GRAPH_MM, "Graph"))
    assert read_footprint(e) == {ReadItem("Graph", "edges", True), ReadItem("Edge", "src", False),
                                 ReadItem("Node", "name", False)}
    ext = resolve(parse_expr("Node->size()"), Scope(GRAPH_MM, None))
    assert read_footprint(ext) == {ReadItem("Node", EXTENT)}


def test_identity_atoms_split():
    scope = Scope(GRAPH_MM, "Graph")
    scope.bind("e1", resolve(parse_expr("edges"), scope).ty.elem)
    e = resolve(parse_expr("Edge->exists1(e3 | e3.src = e1.src & e3 : edges & e3.trg = e3.src)"), scope)
    ident, rest = identity_atoms(e)
    assert [unparse(a) for a in ident] == ["e3.src = e1.src"]
    assert [unparse(a) for a in rest] == ["e3 : edges", "e3.trg = e3.src"]


@given(st.lists(st.integers(0, 5)), st.lists(st.integers(0, 5)))
def test_coll_set_semantics(xs, ys):
    a, b = Coll(xs), Coll(ys)
    assert set(a.union(b)) == set(xs) | set(ys)
    assert set(a.minus(b)) == set(xs) - set(ys)
    assert a.issubset(b) == (set(xs) <= set(ys))
    assert (a == b) == (set(xs) == set(ys))
    assert list(a) == list(dict.fromkeys(xs))


def test_ordered_coll_keeps_duplicates_order():
    c = Coll([ObjectId("b"), ObjectId("a"), ObjectId("b")], ordered=True)
    assert [o.label for o in c] == ["b", "a", "b"]
    assert c != Coll([ObjectId("a"), ObjectId("b"), ObjectId("b")], ordered=True)


def test_unknown_param_value_at_runtime():
    with pytest.raises(EvalError):
        evaluate(Param("p"), Env(), TWO_NODES)
    with pytest.raises(EvalError):
        evaluate(Var("nope"), Env(), TWO_NODES)
