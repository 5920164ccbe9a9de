"""Static read and write footprints of resolved expressions."""

from dataclasses import dataclass

from ..errors import ResolveError
from .ast import (AtPre, Binary, IsDeleted, KeyLookup, Nav, TypeExtent, Var,
                  children, conjuncts, is_creation, unparse, walk)
from .resolve import ObjTy, element_type

EXTENT = "<extent>"


@dataclass(frozen=True, order=True)
class ReadItem:
    entity: str
    feature: str  # a feature name or EXTENT
    at_pre: bool = False

    def __str__(self):
        what = "extent" if self.feature == EXTENT else self.feature
        return f"({self.entity}, {what}, {'pre' if self.at_pre else 'live'})"


@dataclass(frozen=True, order=True)
class CreateExtent:
    entity: str

    def __str__(self):
        return f"CreateExtent({self.entity})"


@dataclass(frozen=True, order=True)
class AssignFeature:
    entity: str
    feature: str
    new_only: bool = False

    def __str__(self):
        return f"AssignFeature({self.entity}, {self.feature}, {'new' if self.new_only else 'existing'})"


@dataclass(frozen=True, order=True)
class InsertInto:
    entity: str
    feature: str

    def __str__(self):
        return f"InsertInto({self.entity}, {self.feature})"


@dataclass(frozen=True, order=True)
class DeleteFrom:
    entity: str

    def __str__(self):
        return f"DeleteFrom({self.entity})"


def read_footprint(e, key_attr=None, at_pre=False):
    """Every (entity, feature-or-extent, at_pre) datum evaluating ``e`` may consult.

    ``key_attr(entity)`` names the key attribute read by ``Entity[...]``
    lookups; when omitted only the extent read is recorded.
    """
    out = set()
    _reads(e, at_pre, out, key_attr)
    return out


def _reads(e, at_pre, out, key_attr):
    if isinstance(e, AtPre):
        _reads(e.inner, True, out, key_attr)
        return
    if isinstance(e, Nav):
        out.add(ReadItem(e.owner, e.feature, at_pre))
    elif isinstance(e, TypeExtent):
        out.add(ReadItem(e.entity, EXTENT, at_pre))
    elif isinstance(e, KeyLookup):
        out.add(ReadItem(e.entity, EXTENT, at_pre))
        if key_attr is not None:
            out.add(ReadItem(e.entity, key_attr(e.entity), at_pre))
    for c in children(e):
        _reads(c, at_pre, out, key_attr)


# -- postconditions ----------------------------------------------------------

def assignment_parts(atom, created=()):
    """Split ``v.f = expr`` into (target Nav, value expr), or None.

    The target is a single-hop navigation from a variable.  When both sides
    qualify, a side whose receiver is a freshly created object wins, then the
    left side.
    """
    if not (isinstance(atom, Binary) and atom.op == "="):
        return None

    def target(side):
        return (isinstance(side, Nav) and isinstance(side.receiver, Var)
                and isinstance(side.receiver.ty, ObjTy))

    lhs_ok, rhs_ok = target(atom.lhs), target(atom.rhs)
    if lhs_ok and rhs_ok and atom.rhs.receiver.name in created \
            and atom.lhs.receiver.name not in created:
        return atom.rhs, atom.lhs
    if lhs_ok:
        return atom.lhs, atom.rhs
    if rhs_ok:
        return atom.rhs, atom.lhs
    return None


def membership_parts(atom):
    """Split ``x : v.role`` into (member expr, target Nav), or None."""
    if not (isinstance(atom, Binary) and atom.op == ":"):
        return None
    nav = atom.rhs
    if isinstance(nav, Nav) and isinstance(nav.receiver, Var) and isinstance(nav.receiver.ty, ObjTy):
        return atom.lhs, nav
    return None


def walk_post(post, visit, created=()):
    """Drive ``visit(kind, atom, created)`` over the atoms of a postcondition.

    ``kind`` is one of ``create``, ``assign``, ``insert``, ``delete``;
    raises ResolveError on an atom with no constructive reading.
    """
    for atom in conjuncts(post):
        if is_creation(atom):
            visit("create", atom, created)
            walk_post(atom.body, visit, created + (atom.var,))
        elif isinstance(atom, IsDeleted):
            visit("delete", atom, created)
        elif membership_parts(atom) is not None:
            visit("insert", atom, created)
        elif assignment_parts(atom, created) is not None:
            visit("assign", atom, created)
        else:
            raise ResolveError(f"non-constructive atom in postcondition: {unparse(atom)}")


def write_footprint(post):
    out = set()

    def visit(kind, atom, created):
        if kind == "create":
            out.add(CreateExtent(atom.coll.entity))
        elif kind == "delete":
            out.add(DeleteFrom(element_type(atom.coll.ty).entity))
        elif kind == "insert":
            _, nav = membership_parts(atom)
            out.add(InsertInto(nav.owner, nav.feature))
        else:
            nav, _ = assignment_parts(atom, created)
            out.add(AssignFeature(nav.owner, nav.feature, nav.receiver.name in created))

    walk_post(post, visit)
    return out


def post_read_footprint(post, key_attr=None):
    """Reads performed while establishing ``post``.

    Returns ``(reads, deferred)``: ``deferred`` are the reads inside
    ``isDeleted`` arguments, which are evaluated before any delete of the
    same binding is applied.  Write targets (the created extent, the
    assigned or extended feature) are not reads.
    """
    reads, deferred = set(), set()

    def visit(kind, atom, created):
        if kind == "delete":
            _reads(atom.coll, False, deferred, key_attr)
        elif kind == "insert":
            member, nav = membership_parts(atom)
            _reads(member, False, reads, key_attr)
            _reads(nav.receiver, False, reads, key_attr)
        elif kind == "assign":
            nav, value = assignment_parts(atom, created)
            _reads(value, False, reads, key_attr)
            _reads(nav.receiver, False, reads, key_attr)

    walk_post(post, visit)
    return reads, deferred


def identity_atoms(creation):
    """Conjuncts ``v.f = expr`` of an exists1 body whose value side is creation-free
    and does not mention ``v``; they decide whether a matching object exists."""
    ident, rest = [], []
    for atom in conjuncts(creation.body):
        parts = assignment_parts(atom, (creation.var,))
        if parts is not None and parts[0].receiver.name == creation.var:
            _, value = parts
            mentions = any(isinstance(n, Var) and n.name == creation.var for n in walk(value))
            effectful = any(is_creation(n) or isinstance(n, IsDeleted) for n in walk(value))
            if not mentions and not effectful:
                ident.append(atom)
                continue
        rest.append(atom)
    return ident, rest

