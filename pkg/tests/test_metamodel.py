import pytest
import hypothesis.strategies as st
from hypothesis import given

from umt.corpus import load_fixture
from umt.errors import ParseError
from umt.metamodel import (MANY, OPT, AssociationEnd, Attribute, Entity, Metamodel,
                           format_metamodel, key_attribute, lookup_feature, merge,
                           parse_metamodel, validate)

TARGET = load_fixture("migration").file("target.mm").read_text()


def rules(text, context=()):
    return [d.rule for d in validate(parse_metamodel(text), list(context))]


def test_parse_target_metamodel():
    mm = parse_metamodel(TARGET)
    assert mm.name == "Graph2"
    assert mm.entity("ModelElement2").abstract
    assert mm.entity("Edge2").parent == "ModelElement2"
    assert lookup_feature(mm, "Edge2", "id2") == Attribute("id2", "String", True)
    assert lookup_feature(mm, "Edge2", "src2") == AssociationEnd("src2", "Node2", OPT)
    assert key_attribute(mm, "Graph2").name == "id2"
    assert validate(mm) == []


def test_subtyping():
    mm = parse_metamodel(TARGET)
    assert mm.is_subtype("Node2", "ModelElement2")
    assert not mm.is_subtype("ModelElement2", "Node2")
    assert mm.overlaps("ModelElement2", "Edge2") and mm.overlaps("Edge2", "ModelElement2")
    assert not mm.overlaps("Node2", "Edge2")


def test_multiple_inheritance_is_a_syntax_error():
    with pytest.raises(ParseError, match="multiple inheritance"):
        parse_metamodel("entity A {} entity B {} entity C extends A, B {}")


@pytest.mark.parametrize("text, rule", [
    ("entity A extends Z {}", "unresolved-parent"),
    ("abstract entity A extends B {} abstract entity B extends A {}", "acyclic-inheritance"),
    ("entity A {} entity B extends A {}", "abstract-non-leaf"),
    ("entity A { r : set(Q); }", "unresolved-target"),
    ("entity A { k : Int (key); }", "string-key"),
    ("entity A { x : String; x : Int; }", "unique-feature"),
    ("abstract entity A { x : String; } entity B extends A { x : Int; }", "unique-feature"),
    ("entity A { k : String (key); j : String (key); }", "single-key"),
])
def test_validation_rules(text, rule):
    assert rule in rules(text)


def test_duplicate_entities():
    with pytest.raises(ParseError, match="duplicate entity"):
        parse_metamodel("entity A {} entity A {}")
    built = Metamodel("", [Entity("A", False, None, (), ()), Entity("A", False, None, (), ())])
    assert [d.rule for d in validate(built)] == ["unique-entity"]


def test_cross_metamodel_targets_resolve_with_context():
    src = "entity A { b : opt(B); }"
    assert rules(src) == ["unresolved-target"]
    assert rules(src, [parse_metamodel("entity B {}")]) == []


def test_merge_rejects_clashing_names():
    a = parse_metamodel("entity A {}")
    with pytest.raises(Exception):
        merge([a, parse_metamodel("entity A {}")])
    assert merge([a, parse_metamodel("entity B {}")]).entity_names() == ["A", "B"]


IDENTS = st.sampled_from(["a", "b", "name", "id", "xs"])


@st.composite
def metamodels(draw):
    n = draw(st.integers(1, 5))
    names = [f"E{i}" for i in range(n)]
    entities = []
    for name in names:
        fields = draw(st.lists(IDENTS, unique=True, max_size=4))
        attrs, ends = [], []
        for f in fields:
            if draw(st.booleans()):
                attrs.append(Attribute(f, draw(st.sampled_from(["String", "Int"]))))
            else:
                mult = draw(st.sampled_from([OPT, MANY]))
                ordered = mult == MANY and draw(st.booleans())
                ends.append(AssociationEnd(f, draw(st.sampled_from(names)), mult, ordered))
        entities.append(Entity(name, draw(st.booleans()), None, tuple(attrs), tuple(ends)))
    return Metamodel(draw(st.sampled_from(["", "M"])), entities)


@given(metamodels())
def test_format_parse_roundtrip(mm):
    assert parse_metamodel(format_metamodel(mm)) == mm
