"""Evaluation of resolved expressions against a ModelState.

Two modes share one evaluator:

``query``
    Side-effect free reading.  Creation quantifiers (``exists``/``exists1``
    over an entity extent) and ``isDeleted`` are rejected.
``verify``
    Declarative reading used to check constraints after a run: creation
    quantifiers range over the existing extent and ``isDeleted`` holds when
    none of the selected objects (selected in the pre-state or now) survive.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import EvalError, ModelError
from ..model import Coll, ObjectId, as_coll
from .ast import IsDeleted, is_creation, unparse

QUERY, VERIFY = "query", "verify"


@dataclass
class Env:
    bindings: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    pre: Optional[object] = None
    mode: str = QUERY

    def bind(self, name, value):
        return replace(self, bindings={**self.bindings, name: value})


def values_equal(a, b):
    """``=`` with singleton coercion when exactly one side is a collection."""
    if isinstance(a, Coll) or isinstance(b, Coll):
        return as_coll(a) == as_coll(b)
    if type(a) is bool or type(b) is bool:
        return a == b
    return type(a) is type(b) and a == b


def evaluate(e, env, state):
    return _Evaluator(env).eval(e, state)


class _Evaluator:
    def __init__(self, env):
        self.env = env

    def eval(self, e, state, env=None):
        env = env or self.env
        method = getattr(self, "eval_" + type(e).__name__, None)
        if method is None:
            raise EvalError(f"cannot evaluate {type(e).__name__}: {unparse(e)}")
        return method(e, state, env)

    def truth(self, e, state, env):
        value = self.eval(e, state, env)
        if not isinstance(value, bool):
            raise EvalError(f"expected a Boolean: {unparse(e)}")
        return value

    # -- leaves -------------------------------------------------------------

    def eval_IntLit(self, e, state, env):
        return e.value

    def eval_StrLit(self, e, state, env):
        return e.value

    def eval_EmptySet(self, e, state, env):
        return Coll()

    def eval_Var(self, e, state, env):
        try:
            return env.bindings[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None

    def eval_Param(self, e, state, env):
        try:
            return env.params[e.name]
        except KeyError:
            raise EvalError(f"no value supplied for parameter {e.name!r}") from None

    def eval_TypeExtent(self, e, state, env):
        return Coll(state.extent(e.entity))

    # -- navigation ---------------------------------------------------------

    def eval_Nav(self, e, state, env):
        receiver = self.eval(e.receiver, state, env)
        try:
            if isinstance(receiver, ObjectId):
                return state.get(receiver, e.feature, e.owner)
            if isinstance(receiver, Coll):
                out, ordered = [], receiver.ordered
                for obj in receiver:
                    value = state.get(obj, e.feature, e.owner)
                    if isinstance(value, Coll):
                        ordered = ordered and value.ordered
                        out.extend(value)
                    else:
                        ordered = False
                        out.append(value)
                return Coll(out, ordered)
        except ModelError as exc:
            raise EvalError(f"{unparse(e)}: {exc}") from None
        raise EvalError(f"cannot navigate .{e.feature} from {receiver!r}")

    def eval_AtPre(self, e, state, env):
        if env.pre is None:
            raise EvalError(f"{unparse(e)}: no pre-state snapshot available")
        return self.eval(e.inner, env.pre, env)

    def eval_KeyLookup(self, e, state, env):
        keys = self.eval(e.index, state, env)
        return state.key_lookup(e.entity, keys)

    # -- operators ----------------------------------------------------------

    def eval_Binary(self, e, state, env):
        op = e.op
        if op == "&":
            return self.truth(e.lhs, state, env) and self.truth(e.rhs, state, env)
        if op == "or":
            return self.truth(e.lhs, state, env) or self.truth(e.rhs, state, env)
        if op == "=>":
            return (not self.truth(e.lhs, state, env)) or self.truth(e.rhs, state, env)
        lhs, rhs = self.eval(e.lhs, state, env), self.eval(e.rhs, state, env)
        if op == "=":
            return values_equal(lhs, rhs)
        if op == "/=":
            return not values_equal(lhs, rhs)
        if op == ":":
            return lhs in as_coll(rhs)
        if op == "<:":
            return as_coll(lhs).issubset(as_coll(rhs))
        if op == "\\/":
            return as_coll(lhs).union(as_coll(rhs))
        if op == "-":
            return as_coll(lhs).minus(as_coll(rhs))
        raise EvalError(f"unknown operator {op!r}")

    def eval_SizeOf(self, e, state, env):
        return len(as_coll(self.eval(e.coll, state, env)))

    def eval_Select(self, e, state, env):
        coll = as_coll(self.eval(e.coll, state, env))
        kept = [x for x in coll if self.truth(e.pred, state, env.bind(e.var, x))]
        return Coll(kept, coll.ordered)

    def _matches(self, e, state, env):
        coll = as_coll(self.eval(e.coll, state, env))
        return sum(1 for x in coll if self.truth(e.body, state, env.bind(e.var, x)))

    def eval_Exists(self, e, state, env):
        self._check_effect_free(e, env)
        coll = as_coll(self.eval(e.coll, state, env))
        return any(self.truth(e.body, state, env.bind(e.var, x)) for x in coll)

    def eval_Exists1(self, e, state, env):
        self._check_effect_free(e, env)
        return self._matches(e, state, env) == 1

    def eval_IsDeleted(self, e, state, env):
        self._check_effect_free(e, env)
        if env.pre is None:
            raise EvalError(f"{unparse(e)}: no pre-state snapshot available")
        selected = list(as_coll(self.eval(e.coll, env.pre, env)))
        selected += list(as_coll(self.eval(e.coll, state, env)))
        return not any(obj in state for obj in selected)

    def _check_effect_free(self, e, env):
        if env.mode == VERIFY:
            return
        if isinstance(e, IsDeleted) or is_creation(e):
            raise EvalError(f"effectful expression in query context: {unparse(e)}")

