"""Textual metamodels: entities, single inheritance, attributes and association ends.

Grammar (``--`` line comments)::

    [metamodel Name]
    [abstract] entity Name [extends Parent] {
        ident : String [(key)] ;
        ident : Int ;
        ident : set(Entity) ;   -- many, unordered
        ident : opt(Entity) ;   -- 0..1
        ident : seq(Entity) ;   -- many, ordered
    }
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ModelError, ParseError
from .lexer import EOF, TokenStream, tokenize

VALUE_TYPES = ("String", "Int")
OPT, MANY = "opt", "many"


@dataclass(frozen=True)
class Attribute:
    name: str
    value_type: str
    is_key: bool = False


@dataclass(frozen=True)
class AssociationEnd:
    name: str
    target: str
    multiplicity: str = MANY
    ordered: bool = False

    @property
    def keyword(self):
        if self.multiplicity == OPT:
            return "opt"
        return "seq" if self.ordered else "set"


Feature = Union[Attribute, AssociationEnd]


@dataclass(frozen=True)
class Entity:
    name: str
    abstract: bool = False
    parent: Optional[str] = None
    attributes: tuple = ()
    ends: tuple = ()

    def own_features(self):
        return self.attributes + self.ends


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message} [{self.rule}]"


@dataclass
class Metamodel:
    name: str = ""
    entities: list = field(default_factory=list)

    def __post_init__(self):
        self.entities = tuple(self.entities)
        self._by_name = {}
        for e in self.entities:
            self._by_name.setdefault(e.name, e)

    def __eq__(self, other):
        if not isinstance(other, Metamodel):
            return NotImplemented
        return self.name == other.name and self.entities == other.entities

    def __contains__(self, name):
        return name in self._by_name

    def entity(self, name) -> Entity:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown entity {name!r}") from None

    def entity_names(self):
        return [e.name for e in self.entities]

    def ancestors(self, name):
        """``name`` followed by its parent chain (stops on cycles or dangling parents)."""
        chain, seen = [], set()
        current = name
        while current is not None and current in self._by_name and current not in seen:
            seen.add(current)
            chain.append(current)
            current = self._by_name[current].parent
        return chain

    def is_subtype(self, sub, sup):
        return sup in self.ancestors(sub)

    def overlaps(self, a, b):
        """True when the extents of ``a`` and ``b`` may share objects."""
        return self.is_subtype(a, b) or self.is_subtype(b, a)

    def descendants(self, name):
        return [e.name for e in self.entities if self.is_subtype(e.name, name)]

    def children(self, name):
        return [e.name for e in self.entities if e.parent == name]

    def all_features(self, name):
        """Own plus inherited features, nearest declaration first."""
        out = []
        for anc in self.ancestors(name):
            out.extend(self._by_name[anc].own_features())
        return out


def lookup_feature(mm, entity, feature) -> Optional[Feature]:
    """The feature named ``feature`` on ``entity`` or its nearest ancestor, or None."""
    mm.entity(entity)
    for anc in mm.ancestors(entity):
        for f in mm.entity(anc).own_features():
            if f.name == feature:
                return f
    return None


def key_attribute(mm, entity) -> Optional[Attribute]:
    mm.entity(entity)
    for anc in mm.ancestors(entity):
        for a in mm.entity(anc).attributes:
            if a.is_key:
                return a
    return None


def merge(metamodels, name=None):
    """Load several metamodels side by side; entity names must be globally unique."""
    entities, seen = [], {}
    for mm in metamodels:
        for e in mm.entities:
            if e.name in seen:
                raise ModelError(
                    f"entity {e.name!r} declared in both {seen[e.name] or '<unnamed>'}"
                    f" and {mm.name or '<unnamed>'}")
            seen[e.name] = mm.name
            entities.append(e)
    if name is None:
        name = "+".join(mm.name for mm in metamodels if mm.name)
    return Metamodel(name, entities)


# -- parsing -----------------------------------------------------------------

def parse_metamodel(text) -> Metamodel:
    ts = TokenStream(tokenize(text))
    name = ""
    if ts.accept_word("metamodel"):
        name = ts.expect_ident("metamodel name").text
        ts.accept_op(";")
    entities, names = [], set()
    while not ts.at_end():
        start = ts.current
        entity = _parse_entity(ts)
        if entity.name in names:
            raise ParseError(f"duplicate entity {entity.name!r}", start.line, start.column)
        names.add(entity.name)
        entities.append(entity)
    return Metamodel(name, entities)


def _parse_entity(ts):
    abstract = ts.accept_word("abstract") is not None
    ts.expect_word("entity")
    name = ts.expect_ident("entity name").text
    parent = None
    if ts.accept_word("extends"):
        parent = ts.expect_ident("parent entity").text
        if ts.current.is_op(","):
            raise ts.error("multiple inheritance is not supported")
    ts.expect_op("{")
    attributes, ends = [], []
    while not ts.accept_op("}"):
        if ts.current.kind == EOF:
            raise ts.error("expected '}'")
        fname = ts.expect_ident("feature name").text
        ts.expect_op(":")
        tok = ts.expect_ident("feature type")
        if tok.text in VALUE_TYPES:
            is_key = False
            if ts.accept_op("("):
                ts.expect_word("key")
                ts.expect_op(")")
                is_key = True
            attributes.append(Attribute(fname, tok.text, is_key))
        elif tok.text in ("set", "opt", "seq"):
            ts.expect_op("(")
            target = ts.expect_ident("target entity").text
            ts.expect_op(")")
            mult = OPT if tok.text == "opt" else MANY
            ends.append(AssociationEnd(fname, target, mult, tok.text == "seq"))
        else:
            raise ts.error("expected String, Int, set(..), opt(..) or seq(..)", tok)
        ts.expect_op(";")
    return Entity(name, abstract, parent, tuple(attributes), tuple(ends))


def format_metamodel(mm) -> str:
    lines = []
    if mm.name:
        lines += [f"metamodel {mm.name}", ""]
    for e in mm.entities:
        head = ("abstract " if e.abstract else "") + f"entity {e.name}"
        if e.parent:
            head += f" extends {e.parent}"
        lines.append(head + " {")
        for a in e.attributes:
            lines.append(f"  {a.name} : {a.value_type}{' (key)' if a.is_key else ''};")
        for end in e.ends:
            lines.append(f"  {end.name} : {end.keyword}({end.target});")
        lines.append("}")
    return "\n".join(lines) + "\n" if lines else ""


# -- validation --------------------------------------------------------------

def validate(mm, context=None):
    """Check the structural rules; returns a sorted list of Diagnostics.

    ``context`` lists further metamodels whose entities may be targeted by
    association ends (source/target pairs loaded together).
    """
    known = {e.name for e in mm.entities}
    for other in context or ():
        known |= {e.name for e in other.entities}
    diags = set()
    counts = {}
    for e in mm.entities:
        counts[e.name] = counts.get(e.name, 0) + 1
    for name, n in counts.items():
        if n > 1:
            diags.add(Diagnostic("unique-entity", name, "duplicate entity name"))

    for e in mm.entities:
        if e.parent is not None:
            if e.parent not in mm:
                diags.add(Diagnostic("unresolved-parent", e.name,
                                     f"parent {e.parent!r} is not declared"))
            elif _has_cycle(mm, e.name):
                diags.add(Diagnostic("acyclic-inheritance", e.name,
                                     "inheritance cycle"))
        if mm.children(e.name) and not e.abstract:
            diags.add(Diagnostic("abstract-non-leaf", e.name,
                                 "non-leaf entity must be abstract"))
        for end in e.ends:
            if end.target not in known:
                diags.add(Diagnostic("unresolved-target", f"{e.name}.{end.name}",
                                     f"end target {end.target!r} is not declared"))
        for a in e.attributes:
            if a.is_key and a.value_type != "String":
                diags.add(Diagnostic("string-key", f"{e.name}.{a.name}",
                                     "key attribute must be String"))
        names, keys = set(), []
        for f in mm.all_features(e.name):
            if f.name in names:
                diags.add(Diagnostic("unique-feature", f"{e.name}.{f.name}",
                                     "duplicate feature name"))
            names.add(f.name)
            if isinstance(f, Attribute) and f.is_key:
                keys.append(f.name)
        if len(keys) > 1:
            diags.add(Diagnostic("single-key", e.name,
                                 f"more than one key attribute: {', '.join(sorted(keys))}"))
    return sorted(diags, key=lambda d: (d.location, d.rule, d.message))


def _has_cycle(mm, name):
    seen = set()
    current = name
    while current is not None and current in mm:
        if current in seen:
            return True
        seen.add(current)
        current = mm.entity(current).parent
    return False
