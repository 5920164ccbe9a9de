"""Phase execution, constructive postconditions and post-hoc verification."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import EvalError, ExecutionError, ModelError, ResolveError
from .metamodel import AssociationEnd
from .model import Coll, ObjectId, as_coll, snapshot
from .ocl.ast import Exists1, IsDeleted, conjuncts, is_creation, unparse
from .ocl.evaluator import QUERY, VERIFY, Env, evaluate, values_equal
from .ocl.footprint import assignment_parts, identity_atoms, membership_parts
from .spec import DELETION, bindings, describe_binding, find_violation

CREATE, ASSIGN, INSERT, DELETE = "create", "assign", "insert", "delete"


@dataclass(frozen=True)
class Effect:
    phase: int
    binding: tuple      # ((var, label), ...)
    kind: str
    target: str         # object label, or entity name for creations
    feature: Optional[str] = None
    value: object = None

    def __str__(self):
        where = ", ".join(f"{k}={v}" for k, v in self.binding)
        if self.kind == CREATE:
            what = f"create {self.value} : {self.target}"
        elif self.kind == DELETE:
            what = f"delete {self.target}"
        elif self.kind == INSERT:
            what = f"insert {self.value.label} into {self.target}.{self.feature}"
        else:
            what = f"{self.target}.{self.feature} := {self.value!r}"
        return f"[phase {self.phase}] {what}" + (f"  ({where})" if where else "")


@dataclass
class PhaseStats:
    label: str
    iterations: int = 0
    fired: int = 0


@dataclass
class RunResult:
    final_state: object
    pre_state: object
    trace: list = field(default_factory=list)
    created: Counter = field(default_factory=Counter)
    deleted: Counter = field(default_factory=Counter)
    stats: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def created_by(self, label):
        """Objects created by the phase of constraint ``label``, in creation order."""
        index = next(i for i, s in enumerate(self.stats, 1) if s.label == label)
        return [ObjectId(e.value) for e in self.trace if e.phase == index and e.kind == CREATE]


class _Executor:
    def __init__(self, state, pre, params):
        self.state = state
        self.pre = pre
        self.params = params
        self.trace = []
        self.created = Counter()
        self.deleted = Counter()
        self.phase = 0
        self.binding = ()

    def env(self):
        return Env(params=self.params, pre=self.pre, mode=QUERY)

    def eval(self, e, env):
        return evaluate(e, env, self.state)

    def log(self, kind, target, feature=None, value=None):
        self.trace.append(Effect(self.phase, self.binding, kind, target, feature, value))

    # -- phases -------------------------------------------------------------

    def run_phase(self, index, phase):
        c = phase.constraint
        self.phase = index
        stats = PhaseStats(c.label)
        # all domains are evaluated before any effect of this phase
        envs = list(bindings(c, self.state, self.env()))
        for env in envs:
            stats.iterations += 1
            self.binding = tuple(describe_binding(env).items())
            if c.antecedent is not None and not self.eval(c.antecedent, env):
                continue
            stats.fired += 1
            self.establish(c.succedent, env, deferred=c.kind == DELETION)
        return stats

    # -- postconditions -----------------------------------------------------

    def establish(self, post, env, deferred=False, created=()):
        atoms = conjuncts(post)
        doomed = {}
        if deferred:
            # evaluate every isDeleted argument before applying any delete
            for i, atom in enumerate(atoms):
                if isinstance(atom, IsDeleted):
                    doomed[i] = list(as_coll(self.eval(atom.coll, env)))
        for i, atom in enumerate(atoms):
            self.establish_atom(atom, env, created, doomed.get(i))

    def establish_atom(self, atom, env, created=(), doomed=None):
        if isinstance(atom, Exists1) and is_creation(atom):
            self._exists1(atom, env, created)
        elif is_creation(atom):
            obj = self._create(atom.coll.entity)
            self.establish(atom.body, env.bind(atom.var, obj), created=created + (atom.var,))
        elif isinstance(atom, IsDeleted):
            if doomed is None:
                doomed = list(as_coll(self.eval(atom.coll, env)))
            self._delete([o for o in doomed if o in self.state])
        elif membership_parts(atom) is not None:
            member, nav = membership_parts(atom)
            self._insert(self.eval(nav.receiver, env), nav.feature, self.eval(member, env))
        elif assignment_parts(atom, created) is not None:
            nav, value = assignment_parts(atom, created)
            self._assign(self.eval(nav.receiver, env), nav.feature, self.eval(value, env))
        else:
            raise ExecutionError(f"non-constructive atom: {unparse(atom)}")

    def _exists1(self, atom, env, created):
        """Bind to an instance agreeing on every identity atom, else create one."""
        ident, rest = identity_atoms(atom)
        wanted = []
        for a in ident:
            nav, value = assignment_parts(a, (atom.var,))
            wanted.append((nav.feature, self.eval(value, env)))
        inner_created = created + (atom.var,)
        for obj in self.state.extent(atom.coll.entity):
            if all(values_equal(self.state.get(obj, f), v) for f, v in wanted):
                inner = env.bind(atom.var, obj)
                for a in rest:
                    self.establish_atom(a, inner, inner_created)
                return
        obj = self._create(atom.coll.entity)
        inner = env.bind(atom.var, obj)
        for f, v in wanted:
            self._assign(obj, f, v)
        for a in rest:
            self.establish_atom(a, inner, inner_created)

    # -- primitive effects --------------------------------------------------

    def _create(self, entity):
        try:
            obj = self.state.create(entity)
        except ModelError as exc:
            raise ExecutionError(str(exc)) from None
        self.created[entity] += 1
        self.log(CREATE, entity, value=obj.label)
        return obj

    def _delete(self, objs):
        for obj in objs:
            self.deleted[self.state.type_of(obj)] += 1
            self.log(DELETE, obj.label)
        self.state.delete(objs)

    def _assign(self, obj, feature, value):
        if not isinstance(obj, ObjectId):
            raise ExecutionError(f"cannot assign .{feature} on {obj!r}")
        try:
            f = self.state.feature(obj, feature)
            if isinstance(f, AssociationEnd):
                value = Coll(as_coll(value), f.ordered)
                if self.state.get(obj, feature) == value:
                    return
                self.state.set_end(obj, feature, value)
            else:
                if isinstance(value, Coll) and len(value) == 1:
                    value = value.items[0]
                if self.state.is_set(obj, feature) and values_equal(self.state.get(obj, feature), value):
                    return
                self.state.set_attr(obj, feature, value)
        except ModelError as exc:
            raise ExecutionError(str(exc)) from None
        self.log(ASSIGN, obj.label, feature, self.state.get(obj, feature))

    def _insert(self, owner, feature, member):
        if not isinstance(owner, ObjectId) or not isinstance(member, ObjectId):
            raise ExecutionError(f"cannot insert {member!r} into {owner!r}.{feature}")
        try:
            changed = self.state.insert(owner, feature, member)
        except ModelError as exc:
            raise ExecutionError(str(exc)) from None
        if changed:
            self.log(INSERT, owner.label, feature, member)


def run(plan, state, params=None, force=False):
    """Execute ``plan`` on a copy of ``state``; the input is left untouched.

    The @pre baseline is a single snapshot taken before the first phase.
    """
    if not force:
        rejected = [p for p in plan.phases if not p.verdict.ok]
        if rejected:
            raise ExecutionError(
                "interference: " + "; ".join(f"{p.label}: {p.verdict}" for p in rejected))
    params = dict(params or {})
    pre = snapshot(state)
    work = state.copy()
    ex = _Executor(work, pre, params)
    stats = []
    try:
        for index, phase in enumerate(plan.phases, 1):
            stats.append(ex.run_phase(index, phase))
    except (EvalError, ModelError, ResolveError) as exc:
        raise ExecutionError(f"phase {ex.phase}: {exc}") from None
    return RunResult(work, pre, ex.trace, ex.created, ex.deleted, stats, params)


def establish_post(post, env, state):
    """Constructively establish ``post`` on ``state`` under ``env`` (no trace kept)."""
    ex = _Executor(state, env.pre, env.params)
    ex.establish(post, env)
    return ex.trace


def replay(pre, trace):
    """Re-apply a trace to a copy of ``pre``; reproduces the run's final state."""
    state = pre.copy()
    for eff in trace:
        if eff.kind == CREATE:
            state.create(eff.target, eff.value)
        elif eff.kind == DELETE:
            state.delete([ObjectId(eff.target)])
        elif eff.kind == INSERT:
            state.insert(ObjectId(eff.target), eff.feature, eff.value)
        else:
            obj = ObjectId(eff.target)
            if isinstance(state.feature(obj, eff.feature), AssociationEnd):
                state.set_end(obj, eff.feature, eff.value)
            else:
                state.set_attr(obj, eff.feature, eff.value)
    return state


# -- verification ------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintVerdict:
    label: str
    ok: bool
    witness: Optional[dict] = None
    text: str = ""
    error: Optional[str] = None

    def __str__(self):
        if self.ok:
            return f"constraint {self.label}: pass"
        if self.error:
            return f"constraint {self.label}: ERROR {self.error}"
        who = ", ".join(f"{k}={v}" for k, v in (self.witness or {}).items()) or "<no binding>"
        return f"constraint {self.label}: FAIL at {who}: {self.text}"


def verify_cons(spec, final_state, pre_state, params=None):
    """Evaluate every constraint declaratively over (final, pre)."""
    out = []
    for c in spec.constraints:
        try:
            witness = find_violation(c, final_state, pre_state, params or {}, VERIFY)
        except (EvalError, ModelError) as exc:
            out.append(ConstraintVerdict(c.label, False, None, c.text, str(exc)))
            continue
        out.append(ConstraintVerdict(c.label, witness is None, witness, c.text))
    return out


def verify_result(spec, result):
    return verify_cons(spec, result.final_state, result.pre_state, result.params)


def eval_query(expr, state, pre=None, params=None):
    """Side-effect free evaluation of a resolved expression."""
    return evaluate(expr, Env(params=dict(params or {}), pre=pre, mode=QUERY), state)


def unsatisfied_count(c, state, pre, params=None):
    """Number of bindings of ``c`` whose antecedent holds but whose succedent does not.

    For an improvement transformation this is its quality measure: the
    transitive-edge constraint counts composable pre-edge pairs that still
    lack a shortcut edge.
    """
    env = Env(params=dict(params or {}), pre=pre, mode=VERIFY)
    n = 0
    for b in bindings(c, state, env):
        if c.antecedent is not None and not evaluate(c.antecedent, b, state):
            continue
        if not evaluate(c.succedent, b, state):
            n += 1
    return n
