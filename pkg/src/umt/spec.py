"""Transformation specifications: assumptions plus ordered constraints.

File grammar (``--`` comments)::

    transformation Name [( param : String|Int , ... )]
    assumption [Label] [on Entity] : expr [;]
    constraint [Label] [on Entity] : [antecedent =>] succedent [;]

Antecedent conjuncts ``v : coll`` with an unbound ``v`` become iterators.
"""

from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, ResolveError, UmtError
from .lexer import IDENT, TokenStream, tokenize
from .metamodel import key_attribute, lookup_feature
from .model import ObjectId, as_coll, snapshot
from .ocl.ast import (Binary, IsDeleted, Name, Var, conjoin, conjuncts, is_creation,
                      unparse, walk)
from .ocl.evaluator import VERIFY, Env, evaluate
from .ocl.footprint import walk_post
from .ocl.parser import parse_expression
from .ocl.resolve import BOOL, CollTy, Scope, element_type, resolve, scalar_type

CREATION = "Creation"
UPDATE_IN_PLACE = "UpdateInPlace"
DELETION = "Deletion"
STATIC = "Static"


@dataclass(frozen=True)
class Iterator:
    var: str
    domain: object  # resolved Expr

    def __str__(self):
        return f"{self.var} : {unparse(self.domain)}"


@dataclass
class Constraint:
    label: str
    context: Optional[str]
    iterators: list
    antecedent: Optional[object]
    succedent: object
    text: str = ""
    kind: Optional[str] = None
    index: int = 0

    def iterator_vars(self):
        return [it.var for it in self.iterators]

    def declarative(self):
        """The whole constraint as one expression, iterators re-conjoined as memberships."""
        parts = [Binary(":", Var(it.var, ty=element_type(it.domain.ty)), it.domain, ty=BOOL)
                 for it in self.iterators]
        if self.antecedent is not None:
            parts.append(self.antecedent)
        ante = conjoin(parts)
        if ante is None:
            return self.succedent
        return Binary("=>", ante, self.succedent, ty=BOOL)


@dataclass
class TransformationSpec:
    name: str
    parameters: list = field(default_factory=list)   # [(name, "String"|"Int")]
    assumptions: list = field(default_factory=list)  # [Constraint] with kind None
    constraints: list = field(default_factory=list)
    mm: object = None

    def constraint(self, label):
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def coerce_params(self, raw):
        """Convert textual ``name=value`` parameters to typed values; all must be given."""
        out = {}
        for name, ptype in self.parameters:
            if name not in raw:
                raise UmtError(f"missing value for parameter {name!r}")
            value = raw[name]
            if ptype == "Int" and not isinstance(value, int):
                try:
                    value = int(value)
                except ValueError:
                    raise UmtError(f"parameter {name!r} expects an Int, got {value!r}") from None
            out[name] = value
        extra = set(raw) - {n for n, _ in self.parameters}
        if extra:
            raise UmtError(f"unknown parameter(s): {', '.join(sorted(extra))}")
        return out


# -- parsing -------------------------------------------------------------------

def parse_spec(text, mm):
    ts = TokenStream(tokenize(text))
    ts.expect_word("transformation")
    name = ts.expect_ident("transformation name").text
    params = []
    if ts.accept_op("("):
        if not ts.current.is_op(")"):
            while True:
                pname = ts.expect_ident("parameter name").text
                ts.expect_op(":")
                ptype = ts.expect_ident("parameter type")
                if ptype.text not in ("String", "Int"):
                    raise ts.error("parameter type must be String or Int", ptype)
                params.append((pname, ptype.text))
                if not ts.accept_op(","):
                    break
        ts.expect_op(")")
    ts.accept_op(";")
    spec = TransformationSpec(name, params, mm=mm)
    param_types = {n: scalar_type(t) for n, t in params}
    labels = set()
    while not ts.at_end():
        tok = ts.current
        if tok.is_word("assumption"):
            block = "assumption"
        elif tok.is_word("constraint"):
            block = "constraint"
        else:
            raise ts.error("expected 'assumption' or 'constraint'")
        ts.advance()
        label = None
        if ts.current.kind == IDENT and not ts.current.is_word("on"):
            label = ts.advance().text
        context = None
        if ts.accept_word("on"):
            ctx_tok = ts.expect_ident("context entity")
            context = ctx_tok.text
            if context not in mm:
                raise ParseError(f"unknown context entity {context!r}", ctx_tok.line, ctx_tok.column)
        ts.expect_op(":")
        raw = parse_expression(ts)
        body_text = unparse(raw)
        ts.accept_op(";")
        if block == "assumption":
            label = label or f"Asm{len(spec.assumptions)}"
        else:
            label = label or f"C{len(spec.constraints) + 1}"
        if label in labels:
            raise ParseError(f"duplicate label {label!r}", tok.line, tok.column)
        labels.add(label)
        try:
            c = build_constraint(raw, mm, context, param_types, label, body_text)
            if block == "constraint":
                c.kind = classify(c)
                c.index = len(spec.constraints)
                spec.constraints.append(c)
            else:
                _check_query_only(c.succedent, label, allow_quantifiers=True)
                spec.assumptions.append(c)
        except ResolveError as exc:
            raise ParseError(f"{block} {label}: {exc}", tok.line, tok.column) from None
    return spec


def build_constraint(raw, mm, context, param_types, label="C", text=""):
    """Resolve a parsed constraint body and extract its iterators."""
    scope = Scope(mm, context, param_types)
    if isinstance(raw, Binary) and raw.op == "=>":
        ante_parts, succ = conjuncts(raw.lhs), raw.rhs
    else:
        ante_parts, succ = [], raw
    iterators, residual = [], []
    for part in ante_parts:
        var = _iterator_var(part, scope)
        if var is None:
            residual.append(part)
            continue
        domain = resolve(part.rhs, scope)
        if not isinstance(domain.ty, CollTy):
            raise ResolveError(f"iterator {var} ranges over a non-collection: {unparse(domain)}")
        elem = element_type(domain.ty)
        if elem is None:
            raise ResolveError(f"iterator {var} ranges over an untyped empty collection")
        iterators.append(Iterator(var, domain))
        scope.bind(var, elem)
    antecedent = None
    if residual:
        antecedent = resolve(conjoin(residual), scope)
        if antecedent.ty != BOOL:
            raise ResolveError(f"antecedent is not Boolean: {unparse(antecedent)}")
        _check_query_only(antecedent, label)
    for it in iterators:
        _check_query_only(it.domain, label)
    succedent = resolve(succ, scope)
    if succedent.ty != BOOL:
        raise ResolveError(f"succedent is not Boolean: {unparse(succedent)}")
    return Constraint(label, context, iterators, antecedent, succedent, text or unparse(raw))


def _iterator_var(part, scope):
    if not (isinstance(part, Binary) and part.op == ":" and isinstance(part.lhs, Name)):
        return None
    name = part.lhs.name
    if name == "self" or scope.binder(name) is not None or name in scope.params:
        return None
    if name in scope.mm:
        return None
    if scope.context is not None:
        if lookup_feature(scope.mm, scope.context, name) is not None:
            return None
    return name


def _check_query_only(e, label, allow_quantifiers=False):
    """Reject effectful forms where the engine evaluates in query mode.

    Assumptions are read declaratively, so they may quantify over extents.
    """
    for node in walk(e):
        if isinstance(node, IsDeleted):
            raise ResolveError(f"{label}: isDeleted() is only allowed in a succedent")
        if is_creation(node) and not allow_quantifiers:
            raise ResolveError(
                f"{label}: {unparse(node)} creates objects and cannot appear in an antecedent")


def classify(c):
    """Creation, UpdateInPlace, Deletion, or Static (no context entity)."""
    kinds = []

    def visit(kind, atom, created):
        if not created:
            kinds.append(kind)

    walk_post(c.succedent, visit)
    if "delete" in kinds and set(kinds) != {"delete"}:
        raise ResolveError(f"{c.label}: deletions cannot be mixed with other updates")
    if c.context is None:
        return STATIC
    if "delete" in kinds:
        return DELETION
    if "create" in kinds:
        return CREATION
    return UPDATE_IN_PLACE


# -- declarative checking ------------------------------------------------------

def bindings(c, state, env):
    """Enumerate the environments of ``c``: context object, then iterators in order.

    Every domain is materialised before its loop starts, so mutation during
    iteration cannot change it.
    """
    if c.context is None:
        roots = [env]
    else:
        roots = [env.bind("self", obj) for obj in state.extent(c.context)]
    for root in roots:
        yield from _nest(c.iterators, 0, state, root)


def _nest(iterators, i, state, env):
    if i == len(iterators):
        yield env
        return
    it = iterators[i]
    domain = list(as_coll(evaluate(it.domain, env, state)))
    for value in domain:
        yield from _nest(iterators, i + 1, state, env.bind(it.var, value))


def describe_binding(env):
    out = {}
    for name, value in env.bindings.items():
        if name.startswith("$"):
            continue
        out[name] = value.label if isinstance(value, ObjectId) else value
    return out


def find_violation(c, state, pre, params, mode=VERIFY):
    """First binding under which ``c`` is false, as a label dict; None if it holds."""
    env = Env(params=params, pre=pre, mode=mode)
    for b in bindings(c, state, env):
        if c.antecedent is not None and not evaluate(c.antecedent, b, state):
            continue
        if not evaluate(c.succedent, b, state):
            return describe_binding(b)
    return None


@dataclass(frozen=True)
class AssumptionVerdict:
    label: str
    ok: bool
    witness: Optional[dict] = None
    text: str = ""

    def __str__(self):
        if self.ok:
            return f"assumption {self.label}: pass"
        who = ", ".join(f"{k}={v}" for k, v in (self.witness or {}).items()) or "<no binding>"
        return f"assumption {self.label}: FAIL at {who}: {self.text}"


def check_assumptions(spec, state, params=None):
    pre = snapshot(state)
    out = []
    for a in spec.assumptions:
        witness = find_violation(a, state, pre, params or {})
        out.append(AssumptionVerdict(a.label, witness is None, witness, a.text))
    return out


def key_attr_name(mm):
    return lambda entity: key_attribute(mm, entity).name

