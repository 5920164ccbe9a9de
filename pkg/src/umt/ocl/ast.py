"""Expression tree for the OCL subset.

Nodes are frozen dataclasses.  ``pos`` (line, column) and ``ty`` (static
type, filled in by :mod:`umt.ocl.resolve`) never take part in equality.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple


@dataclass(frozen=True)
class Expr:
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False, kw_only=True, repr=False)
    ty: object = field(default=None, compare=False, kw_only=True, repr=False)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class StrLit(Expr):
    value: str


@dataclass(frozen=True)
class EmptySet(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    """Unresolved identifier; the resolver turns it into one of the nodes below."""
    name: str


@dataclass(frozen=True)
class Var(Expr):
    """Bound variable.  ``self`` is the context object."""
    name: str


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Nav(Expr):
    """``receiver.feature``; ``owner`` is the receiver's static entity once resolved."""
    receiver: Expr
    feature: str
    owner: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class AtPre(Expr):
    inner: Expr


@dataclass(frozen=True)
class TypeExtent(Expr):
    entity: str


@dataclass(frozen=True)
class KeyLookup(Expr):
    entity: str
    index: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class SizeOf(Expr):
    coll: Expr


@dataclass(frozen=True)
class Select(Expr):
    """``coll->select(v | pred)``; ``implicit`` marks the binder-less shorthand."""
    coll: Expr
    var: Optional[str]
    pred: Expr
    implicit: bool = False


@dataclass(frozen=True)
class Exists(Expr):
    coll: Expr
    var: str
    body: Expr


@dataclass(frozen=True)
class Exists1(Expr):
    coll: Expr
    var: str
    body: Expr


@dataclass(frozen=True)
class IsDeleted(Expr):
    coll: Expr


COMPARISONS = ("=", "/=", ":", "<:")
LOGICAL = ("&", "or", "=>")

# lowest binds loosest
PRECEDENCE = {"=>": 1, "or": 2, "&": 3, "=": 4, "/=": 4, ":": 4, "<:": 4, "\\/": 5, "-": 6}


def children(e):
    if isinstance(e, (Nav,)):
        return (e.receiver,)
    if isinstance(e, (AtPre,)):
        return (e.inner,)
    if isinstance(e, KeyLookup):
        return (e.index,)
    if isinstance(e, Binary):
        return (e.lhs, e.rhs)
    if isinstance(e, (SizeOf, IsDeleted)):
        return (e.coll,)
    if isinstance(e, Select):
        return (e.coll, e.pred)
    if isinstance(e, (Exists, Exists1)):
        return (e.coll, e.body)
    return ()


def walk(e):
    yield e
    for c in children(e):
        yield from walk(c)


def conjuncts(e):
    """Flatten a tree of ``&`` into its operands, left to right."""
    if isinstance(e, Binary) and e.op == "&":
        return conjuncts(e.lhs) + conjuncts(e.rhs)
    return [e]


def conjoin(parts):
    parts = list(parts)
    if not parts:
        return None
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&", out, p)
    return out


def is_creation(e):
    return isinstance(e, (Exists, Exists1)) and isinstance(e.coll, TypeExtent)


def unparse(e, parent_prec=0):
    """Render an expression in the ASCII surface syntax."""
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return f'"{e.value}"'
    if isinstance(e, EmptySet):
        return "{}"
    if isinstance(e, (Name, Var, Param, TypeExtent)):
        return getattr(e, "name", None) or e.entity
    if isinstance(e, Nav):
        if isinstance(e.receiver, Var) and (e.receiver.name == "self" or e.receiver.name.startswith("$")):
            return e.feature
        return f"{_postfix(e.receiver)}.{e.feature}"
    if isinstance(e, AtPre):
        return f"{_postfix(e.inner)}@pre"
    if isinstance(e, KeyLookup):
        return f"{e.entity}[{unparse(e.index)}]"
    if isinstance(e, SizeOf):
        return f"{_postfix(e.coll)}->size()"
    if isinstance(e, IsDeleted):
        return f"{_postfix(e.coll)}->isDeleted()"
    if isinstance(e, Select):
        binder = "" if e.implicit or e.var is None else f"{e.var} | "
        return f"{_postfix(e.coll)}->select({binder}{unparse(e.pred)})"
    if isinstance(e, (Exists, Exists1)):
        name = "exists" if isinstance(e, Exists) else "exists1"
        return f"{_postfix(e.coll)}->{name}({e.var} | {unparse(e.body)})"
    if isinstance(e, Binary):
        prec = PRECEDENCE[e.op]
        # =>: right associative; everything else left associative
        if e.op == "=>":
            text = f"{unparse(e.lhs, prec + 1)} => {unparse(e.rhs, prec)}"
        else:
            text = f"{unparse(e.lhs, prec)} {e.op} {unparse(e.rhs, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"cannot unparse {e!r}")


def _postfix(e):
    if isinstance(e, Binary):
        return f"({unparse(e)})"
    return unparse(e)
