"""Object models: extents, slots, links, key indexes and pre-state snapshots.

Values are plain Python ``int``/``str`` for attributes, :class:`ObjectId`
for references and :class:`Coll` for association-end contents.  Booleans
only ever appear inside the evaluator.
"""

import re
from dataclasses import dataclass

from .errors import ModelError, ParseError
from .metamodel import Attribute, AssociationEnd, OPT, key_attribute, lookup_feature


@dataclass(frozen=True)
class ObjectId:
    label: str

    def __repr__(self):
        return f"<{self.label}>"


class Coll:
    """Immutable collection value.

    Unordered collections have set semantics (duplicates dropped, equality
    under permutation) but keep first-insertion order so iteration is
    deterministic.  Ordered collections compare positionally.
    """

    __slots__ = ("items", "ordered")

    def __init__(self, items=(), ordered=False):
        items = tuple(items)
        if not ordered:
            items = tuple(dict.fromkeys(items))
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "ordered", ordered)

    def __setattr__(self, name, value):
        raise AttributeError("Coll is immutable")

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __contains__(self, item):
        return item in self.items

    def __eq__(self, other):
        if not isinstance(other, Coll):
            return NotImplemented
        if self.ordered and other.ordered:
            return self.items == other.items
        return set(self.items) == set(other.items)

    def __hash__(self):
        return hash(frozenset(self.items))

    def __repr__(self):
        inner = ", ".join(map(repr, self.items))
        return f"[{inner}]" if self.ordered else f"{{{inner}}}"

    def union(self, other):
        ordered = self.ordered and other.ordered
        return Coll(self.items + other.items, ordered)

    def minus(self, other):
        drop = set(other.items)
        return Coll((x for x in self.items if x not in drop), self.ordered)

    def issubset(self, other):
        return set(self.items) <= set(other.items)


EMPTY = Coll()


def as_coll(value):
    """Singleton coercion of a scalar; collections pass through."""
    return value if isinstance(value, Coll) else Coll((value,))


def default_value(feature):
    if isinstance(feature, AssociationEnd):
        return Coll((), feature.ordered)
    return 0 if feature.value_type == "Int" else ""


class ModelState:
    """Mutable object store conforming to a metamodel.

    ``extents`` maps every entity to the insertion-ordered objects that are
    instances of it (an object is listed under its type and every ancestor).
    ``slots`` holds set attributes and all end contents.
    """

    def __init__(self, mm):
        self.mm = mm
        self.types = {}            # ObjectId -> entity, creation order
        self.extents = {e.name: [] for e in mm.entities}
        self.slots = {}            # (ObjectId, feature) -> value
        self.key_index = {}        # (entity, key) -> [ObjectId]
        self.frozen = False
        self._used_labels = set()
        self._counters = {}

    # -- inspection ---------------------------------------------------------

    def __contains__(self, obj):
        return obj in self.types

    def __len__(self):
        return len(self.types)

    def objects(self):
        return list(self.types)

    def type_of(self, obj):
        try:
            return self.types[obj]
        except KeyError:
            raise ModelError(f"unknown object {obj.label!r}") from None

    def extent(self, entity):
        self.mm.entity(entity)
        return list(self.extents[entity])

    def by_label(self, label):
        obj = ObjectId(label)
        if obj not in self.types:
            raise ModelError(f"unknown object {label!r}")
        return obj

    def feature(self, obj, name, entity=None):
        entity = entity or self.type_of(obj)
        f = lookup_feature(self.mm, entity, name)
        if f is None:
            raise ModelError(f"entity {entity} has no feature {name!r}")
        return f

    def is_set(self, obj, name):
        return (obj, name) in self.slots

    def get(self, obj, name, entity=None):
        """Read a slot; unset attributes read as ``""``/``0``.

        Objects absent from this state (deleted, or created after a
        snapshot was taken) read as defaults for the static ``entity``.
        """
        if obj in self.types:
            f = self.feature(obj, name)
        else:
            if entity is None:
                raise ModelError(f"unknown object {obj.label!r}")
            f = self.feature(obj, name, entity)
        try:
            return self.slots[(obj, name)]
        except KeyError:
            return default_value(f)

    # -- mutation -----------------------------------------------------------

    def _check_mutable(self):
        if self.frozen:
            raise ModelError("snapshot is read-only")

    def fresh_label(self, entity):
        base = entity.lower()
        n = self._counters.get(base, 0)
        while True:
            n += 1
            label = f"{base}{n}"
            if label not in self._used_labels:
                self._counters[base] = n
                return label

    def create(self, entity, label=None):
        self._check_mutable()
        e = self.mm.entity(entity)
        if e.abstract:
            raise ModelError(f"cannot instantiate abstract entity {entity}")
        if label is None:
            label = self.fresh_label(entity)
        elif label in self._used_labels:
            raise ModelError(f"object name {label!r} already used")
        obj = ObjectId(label)
        self._used_labels.add(label)
        self.types[obj] = entity
        for anc in self.mm.ancestors(entity):
            self.extents[anc].append(obj)
        for f in self.mm.all_features(entity):
            if isinstance(f, AssociationEnd):
                self.slots[(obj, f.name)] = Coll((), f.ordered)
        return obj

    def delete(self, targets):
        """Delete objects, unlinking every reference to them (no cascade)."""
        self._check_mutable()
        doomed = set(targets)
        for obj in doomed:
            self.type_of(obj)
        if not doomed:
            return
        for obj in doomed:
            entity = self.types.pop(obj)
            for anc in self.mm.ancestors(entity):
                self.extents[anc].remove(obj)
        for key in list(self.slots):
            owner, _ = key
            if owner in doomed:
                del self.slots[key]
                continue
            value = self.slots[key]
            if isinstance(value, Coll) and any(x in doomed for x in value):
                self.slots[key] = Coll((x for x in value if x not in doomed), value.ordered)
        for key in list(self.key_index):
            rest = [o for o in self.key_index[key] if o not in doomed]
            if rest:
                self.key_index[key] = rest
            else:
                del self.key_index[key]

    def set_attr(self, obj, name, value):
        self._check_mutable()
        f = self.feature(obj, name)
        if not isinstance(f, Attribute):
            raise ModelError(f"{name!r} is an association end, not an attribute")
        if isinstance(value, Coll):
            if len(value) != 1:
                raise ModelError(
                    f"cannot assign a collection of size {len(value)} to attribute {name!r}")
            value = value.items[0]
        expected = int if f.value_type == "Int" else str
        if type(value) is bool or not isinstance(value, expected):
            raise ModelError(
                f"type mismatch: {self.types[obj]}.{name} is {f.value_type}, got {value!r}")
        if f.is_key:
            self._unindex(obj, name)
        self.slots[(obj, name)] = value
        if f.is_key:
            self._index(obj, value)

    def set_end(self, obj, name, value):
        """Replace an end's contents; a single ObjectId is wrapped as a singleton."""
        self._check_mutable()
        f = self.feature(obj, name)
        if not isinstance(f, AssociationEnd):
            raise ModelError(f"{name!r} is an attribute, not an association end")
        members = list(value) if isinstance(value, (list, tuple)) else list(as_coll(value))
        for m in members:
            self._check_target(f, m)
        coll = Coll(members, f.ordered)
        if f.multiplicity == OPT and len(coll) > 1:
            raise ModelError(f"0..1 end {self.types[obj]}.{name} cannot hold {len(coll)} objects")
        self.slots[(obj, name)] = coll

    def insert(self, obj, name, member):
        """Add ``member`` to an end; idempotent on unordered ends, appends on ordered ones."""
        self._check_mutable()
        f = self.feature(obj, name)
        if not isinstance(f, AssociationEnd):
            raise ModelError(f"{name!r} is an attribute, not an association end")
        self._check_target(f, member)
        current = self.get(obj, name)
        if not f.ordered and member in current:
            return False
        if f.multiplicity == OPT and len(current) >= 1:
            raise ModelError(f"0..1 end {self.types[obj]}.{name} is already filled")
        self.slots[(obj, name)] = Coll(current.items + (member,), f.ordered)
        return True

    def _check_target(self, f, member):
        if not isinstance(member, ObjectId):
            raise ModelError(f"end {f.name!r} holds objects, got {member!r}")
        etype = self.type_of(member)
        if not self.mm.is_subtype(etype, f.target):
            raise ModelError(f"end {f.name!r} expects {f.target}, got {etype} {member.label!r}")

    def _key_owners(self, obj):
        entity = self.types[obj]
        return [anc for anc in self.mm.ancestors(entity) if key_attribute(self.mm, anc)]

    def _index(self, obj, key):
        for entity in self._key_owners(obj):
            self.key_index.setdefault((entity, key), []).append(obj)

    def _unindex(self, obj, name):
        old = self.slots.get((obj, name))
        if old is None:
            return
        for entity in self._key_owners(obj):
            bucket = self.key_index.get((entity, old), [])
            if obj in bucket:
                bucket.remove(obj)
            if not bucket:
                self.key_index.pop((entity, old), None)

    # -- queries ------------------------------------------------------------

    def key_lookup(self, entity, keys):
        """Instances of ``entity`` whose key value lies in ``keys``."""
        if key_attribute(self.mm, entity) is None:
            raise ModelError(f"entity {entity} has no key attribute")
        found = []
        for k in as_coll(keys):
            found.extend(self.key_index.get((entity, k), ()))
        return Coll(found)

    def copy(self, frozen=False):
        other = ModelState.__new__(ModelState)
        other.mm = self.mm
        other.types = dict(self.types)
        other.extents = {k: list(v) for k, v in self.extents.items()}
        other.slots = dict(self.slots)
        other.key_index = {k: list(v) for k, v in self.key_index.items()}
        other.frozen = frozen
        other._used_labels = set(self._used_labels)
        other._counters = dict(self._counters)
        return other

    def validate(self):
        """Consistency problems that parsing/mutation cannot rule out (duplicate keys)."""
        problems = []
        for (entity, key), objs in sorted(self.key_index.items()):
            if len(objs) > 1:
                labels = ", ".join(o.label for o in objs)
                problems.append(f"duplicate key {key!r} in extent of {entity}: {labels}")
        return problems


def snapshot(state):
    """Frozen, independent copy used as the @pre baseline."""
    return state.copy(frozen=True)


# -- isomorphism -----------------------------------------------------------------

def canonical_form(state):
    """Label-free description of a state.

    Objects are numbered by creation order; two states with equal canonical
    forms are isomorphic under the order-preserving relabeling.
    """
    index = {obj: i for i, obj in enumerate(state.types)}
    out = []
    for obj, entity in state.types.items():
        attrs, ends = [], []
        for f in state.mm.all_features(entity):
            if isinstance(f, Attribute):
                if state.is_set(obj, f.name):
                    attrs.append((f.name, state.slots[(obj, f.name)]))
            else:
                members = [index[m] for m in state.get(obj, f.name)]
                ends.append((f.name, tuple(members if f.ordered else sorted(members))))
        out.append((entity, tuple(sorted(attrs)), tuple(sorted(ends))))
    return tuple(out)


def isomorphic(a, b):
    return canonical_form(a) == canonical_form(b)


# -- text format -----------------------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_DECL = re.compile(rf"^({_IDENT})\s*:\s*({_IDENT})$")
_MEMBER = re.compile(rf"^({_IDENT})\s*:\s*({_IDENT})\s*\.\s*({_IDENT})$")
_ASSIGN = re.compile(rf'^({_IDENT})\s*\.\s*({_IDENT})\s*=\s*("[^"]*"|-?[0-9]+)$')


def parse_model(text, mm):
    """Read the line-oriented model format into a fresh ModelState.

    Statement forms: ``x : Entity``, ``x.attr = "s"`` / ``x.attr = 5``,
    ``x : y.role``.  Blank lines are ignored.
    """
    state = ModelState(mm)

    def obj_named(name, lineno, col):
        obj = ObjectId(name)
        if obj not in state.types:
            raise ParseError(f"{name!r} is not declared (forward reference?)", lineno, col)
        return obj

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        col = raw.index(line[0]) + 1
        try:
            m = _MEMBER.match(line)
            if m:
                member = obj_named(m.group(1), lineno, col)
                owner = obj_named(m.group(2), lineno, col)
                f = state.feature(owner, m.group(3))
                if not isinstance(f, AssociationEnd):
                    raise ModelError(f"{m.group(3)!r} is an attribute; use '{m.group(2)}.{m.group(3)} = ...'")
                state.insert(owner, m.group(3), member)
                continue
            m = _DECL.match(line)
            if m:
                if m.group(2) not in mm:
                    raise ModelError(f"unknown entity {m.group(2)!r}")
                state.create(m.group(2), m.group(1))
                continue
            m = _ASSIGN.match(line)
            if m:
                obj = obj_named(m.group(1), lineno, col)
                literal = m.group(3)
                value = literal[1:-1] if literal.startswith('"') else int(literal)
                state.set_attr(obj, m.group(2), value)
                continue
        except ModelError as exc:
            raise ParseError(str(exc), lineno, col) from None
        raise ParseError(f"unrecognised statement {line!r}", lineno, col)
    return state


def _literal(value):
    if not isinstance(value, str):
        return str(value)
    if '"' in value or "\n" in value or "\r" in value:
        # the format has no escape sequences, so such a string cannot be written back
        raise ModelError(f"string {value!r} cannot be written in the model format")
    return f'"{value}"'


def serialize_model(state):
    """Write ``state`` back in the model text format.

    Each object is declared in creation order followed by its attributes;
    a link is written as soon as both its endpoints are declared (ordered
    ends are written as a block once all members exist, to keep order).
    """
    order = {obj: i for i, obj in enumerate(state.types)}
    pending = {}  # trigger position -> list of (sort key, lines)
    for obj, entity in state.types.items():
        for rank, f in enumerate(state.mm.all_features(entity)):
            if not isinstance(f, AssociationEnd):
                continue
            members = list(state.get(obj, f.name))
            if not members:
                continue
            if f.ordered:
                trigger = max([order[obj]] + [order[m] for m in members])
                lines = [f"{m.label} : {obj.label}.{f.name}" for m in members]
                pending.setdefault(trigger, []).append(
                    (_link_key(obj, trigger, order, rank, members[0]), lines))
            else:
                for m in members:
                    trigger = max(order[obj], order[m])
                    pending.setdefault(trigger, []).append(
                        (_link_key(obj, trigger, order, rank, m),
                         [f"{m.label} : {obj.label}.{f.name}"]))

    out = []
    for obj, entity in state.types.items():
        out.append(f"{obj.label} : {entity}")
        for f in state.mm.all_features(entity):
            if isinstance(f, Attribute) and state.is_set(obj, f.name):
                out.append(f"{obj.label}.{f.name} = {_literal(state.slots[(obj, f.name)])}")
        for _, lines in sorted(pending.get(order[obj], ()), key=lambda item: item[0]):
            out.extend(lines)
    return "\n".join(out) + "\n" if out else ""


def _link_key(owner, trigger, order, rank, member):
    # links owned by the newly declared object first, then by owner position
    return (order[owner] != trigger, order[owner], rank, order[member])
