"""Name resolution and light static typing.

Turns parser ``Name`` nodes into ``Var``/``Param``/``Nav``/``TypeExtent``
and annotates every node with a static type.  Resolution order for a bare
name: binders (innermost first), parameters, implicit ``select`` elements
(innermost first), the context object's features, entity names.
"""

from dataclasses import dataclass, replace
from typing import Optional

from ..errors import ResolveError
from ..metamodel import Attribute, key_attribute, lookup_feature
from .ast import (AtPre, Binary, Exists, Exists1, IsDeleted, KeyLookup, Name,
                  Nav, Param, Select, SizeOf, TypeExtent, Var, unparse)


@dataclass(frozen=True)
class ScalarTy:
    name: str  # Int, String, Bool

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ObjTy:
    entity: str

    def __str__(self):
        return self.entity


@dataclass(frozen=True)
class CollTy:
    elem: Optional[object]  # None for the empty-set literal
    ordered: bool = False

    def __str__(self):
        kind = "Sequence" if self.ordered else "Set"
        return f"{kind}({self.elem or '?'})"


INT, STR, BOOL = ScalarTy("Int"), ScalarTy("String"), ScalarTy("Bool")


def scalar_type(value_type):
    return INT if value_type == "Int" else STR


def feature_type(feature):
    if isinstance(feature, Attribute):
        return scalar_type(feature.value_type)
    return CollTy(ObjTy(feature.target), feature.ordered)


class Scope:
    """Static environment for one expression.

    ``binders`` is a list of (name, type) with the innermost last;
    ``implicit`` holds the synthetic variables of binder-less selects.
    """

    def __init__(self, mm, context=None, params=None, binders=None):
        self.mm = mm
        self.context = context
        self.params = dict(params or {})
        self.binders = list(binders or [])
        self.implicit = []
        self.in_pre = False
        self._fresh = 0

    def bind(self, name, ty):
        self.binders.append((name, ty))

    def unbind(self):
        self.binders.pop()

    def binder(self, name):
        for bname, ty in reversed(self.binders):
            if bname == name:
                return ty
        return None

    def fresh_var(self):
        self._fresh += 1
        return f"${self._fresh}"


def _err(e, message):
    if e.pos:
        return ResolveError(f"line {e.pos[0]}, column {e.pos[1]}: {message}")
    return ResolveError(message)


def element_type(ty):
    return ty.elem if isinstance(ty, CollTy) else ty


def resolve(expr, scope):
    """Return a resolved, type-annotated copy of ``expr``."""
    return _Resolver(scope).visit(expr)


class _Resolver:
    def __init__(self, scope):
        self.scope = scope
        self.mm = scope.mm

    def visit(self, e):
        method = getattr(self, "visit_" + type(e).__name__)
        return method(e)

    # -- leaves -------------------------------------------------------------

    def visit_IntLit(self, e):
        return replace(e, ty=INT)

    def visit_StrLit(self, e):
        return replace(e, ty=STR)

    def visit_EmptySet(self, e):
        return replace(e, ty=CollTy(None))

    def visit_Var(self, e):
        return e

    def visit_Param(self, e):
        return e

    def visit_TypeExtent(self, e):
        return e

    def visit_Name(self, e):
        s = self.scope
        if e.name == "self":
            if s.context is None:
                raise _err(e, "'self' used outside a context entity")
            return Var("self", pos=e.pos, ty=ObjTy(s.context))
        ty = s.binder(e.name)
        if ty is not None:
            return Var(e.name, pos=e.pos, ty=ty)
        if e.name in s.params:
            return Param(e.name, pos=e.pos, ty=s.params[e.name])
        for var, entity in reversed(s.implicit):
            if lookup_feature(self.mm, entity, e.name) is not None:
                return self._nav(Var(var, ty=ObjTy(entity)), e.name, e)
        if s.context is not None and lookup_feature(self.mm, s.context, e.name) is not None:
            return self._nav(Var("self", ty=ObjTy(s.context)), e.name, e)
        if e.name in self.mm:
            return TypeExtent(e.name, pos=e.pos, ty=CollTy(ObjTy(e.name)))
        raise _err(e, f"unresolved name {e.name!r}")

    # -- navigation ---------------------------------------------------------

    def _nav(self, receiver, feature, e):
        rty = receiver.ty
        entity = element_type(rty)
        if not isinstance(entity, ObjTy):
            raise _err(e, f"cannot navigate .{feature} from {rty}")
        f = lookup_feature(self.mm, entity.entity, feature)
        if f is None:
            raise _err(e, f"entity {entity.entity} has no feature {feature!r}")
        fty = feature_type(f)
        if isinstance(rty, CollTy):
            ordered = rty.ordered and getattr(f, "ordered", False)
            ty = CollTy(element_type(fty), ordered)
        else:
            ty = fty
        return Nav(receiver, feature, entity.entity, pos=e.pos, ty=ty)

    def visit_Nav(self, e):
        s = self.scope
        if isinstance(e.receiver, Name) and self._unresolvable(e.receiver.name):
            # `g.edges` in a constraint on Graph: an otherwise unknown receiver
            # name stands for the context object
            if s.context is not None and lookup_feature(self.mm, s.context, e.feature):
                return self._nav(Var("self", ty=ObjTy(s.context)), e.feature, e)
        receiver = self.visit(e.receiver)
        return self._nav(receiver, e.feature, e)

    def _unresolvable(self, name):
        s = self.scope
        if name == "self" or s.binder(name) is not None or name in s.params or name in self.mm:
            return False
        if any(lookup_feature(self.mm, ent, name) for _, ent in s.implicit):
            return False
        return not (s.context and lookup_feature(self.mm, s.context, name))

    def visit_AtPre(self, e):
        if self.scope.in_pre:
            raise _err(e, "@pre cannot be nested inside @pre")
        self.scope.in_pre = True
        try:
            inner = self.visit(e.inner)
        finally:
            self.scope.in_pre = False
        return AtPre(inner, pos=e.pos, ty=inner.ty)

    def visit_KeyLookup(self, e):
        if e.entity not in self.mm:
            raise _err(e, f"unknown entity {e.entity!r}")
        if key_attribute(self.mm, e.entity) is None:
            raise _err(e, f"entity {e.entity} has no key attribute")
        index = self.visit(e.index)
        if element_type(index.ty) not in (STR, None):
            raise _err(e, f"key lookup index must be String, got {index.ty}")
        return KeyLookup(e.entity, index, pos=e.pos, ty=CollTy(ObjTy(e.entity)))

    # -- operators ----------------------------------------------------------

    def visit_Binary(self, e):
        lhs, rhs = self.visit(e.lhs), self.visit(e.rhs)
        op = e.op
        if op in ("&", "or", "=>"):
            for side in (lhs, rhs):
                if side.ty != BOOL:
                    raise _err(side, f"operand of {op!r} must be Boolean: {unparse(side)}")
            ty = BOOL
        elif op in ("=", "/="):
            ty = BOOL
        elif op == ":":
            if isinstance(lhs.ty, CollTy):
                raise _err(e, f"left side of ':' must be a single value: {unparse(lhs)}")
            if not isinstance(rhs.ty, CollTy):
                raise _err(e, f"right side of ':' must be a collection: {unparse(rhs)}")
            ty = BOOL
        elif op == "<:":
            ty = BOOL
        else:  # \/ and -
            le, re = element_type(lhs.ty), element_type(rhs.ty)
            elem = le if le is not None else re
            ordered = (isinstance(lhs.ty, CollTy) and lhs.ty.ordered
                       and isinstance(rhs.ty, CollTy) and rhs.ty.ordered)
            if op == "-":
                ordered = isinstance(lhs.ty, CollTy) and lhs.ty.ordered
            ty = CollTy(elem, ordered)
        return Binary(op, lhs, rhs, pos=e.pos, ty=ty)

    def visit_SizeOf(self, e):
        return SizeOf(self.visit(e.coll), pos=e.pos, ty=INT)

    def visit_IsDeleted(self, e):
        coll = self.visit(e.coll)
        if not isinstance(element_type(coll.ty), ObjTy):
            raise _err(e, "isDeleted() needs a collection of objects")
        return IsDeleted(coll, pos=e.pos, ty=BOOL)

    def _iterate(self, e, coll, var):
        elem = element_type(coll.ty)
        if elem is None:
            raise _err(e, "cannot iterate over an untyped empty collection")
        self.scope.bind(var, elem)
        return elem

    def visit_Select(self, e):
        coll = self.visit(e.coll)
        s = self.scope
        if e.var is None:
            elem = element_type(coll.ty)
            if not isinstance(elem, ObjTy):
                raise _err(e, "select without a binder needs a collection of objects")
            var = s.fresh_var()
            s.bind(var, elem)
            s.implicit.append((var, elem.entity))
            try:
                pred = self.visit(e.pred)
            finally:
                s.implicit.pop()
                s.unbind()
            implicit = True
        else:
            var = e.var
            self._iterate(e, coll, var)
            try:
                pred = self.visit(e.pred)
            finally:
                s.unbind()
            implicit = False
        if pred.ty != BOOL:
            raise _err(e, "select predicate must be Boolean")
        ty = coll.ty if isinstance(coll.ty, CollTy) else CollTy(coll.ty)
        return Select(coll, var, pred, implicit, pos=e.pos, ty=ty)

    def _quantifier(self, e, cls):
        coll = self.visit(e.coll)
        self._iterate(e, coll, e.var)
        try:
            body = self.visit(e.body)
        finally:
            self.scope.unbind()
        if body.ty != BOOL:
            raise _err(e, "quantifier body must be Boolean")
        return cls(coll, e.var, body, pos=e.pos, ty=BOOL)

    def visit_Exists(self, e):
        return self._quantifier(e, Exists)

    def visit_Exists1(self, e):
        return self._quantifier(e, Exists1)

