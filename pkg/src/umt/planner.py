"""Phase planning: entity ordering, phase sort and the non-interference check."""

import heapq
from dataclasses import dataclass, field

from .errors import PlanningError
from .metamodel import AssociationEnd, lookup_feature
from .ocl.ast import TypeExtent
from .ocl.footprint import (EXTENT, AssignFeature, CreateExtent, DeleteFrom, InsertInto,
                            ReadItem, post_read_footprint, read_footprint, write_footprint)
from .spec import key_attr_name


@dataclass(frozen=True)
class Conflict:
    read: ReadItem
    write: object

    def __str__(self):
        return f"{self.write} conflicts with read {self.read}"


@dataclass(frozen=True)
class Verdict:
    conflicts: tuple = ()

    @property
    def ok(self):
        return not self.conflicts

    def __str__(self):
        if self.ok:
            return "Ok"
        return "Rejected: " + "; ".join(map(str, self.conflicts))


OK = Verdict()


@dataclass
class Phase:
    constraint: object
    verdict: Verdict

    @property
    def label(self):
        return self.constraint.label

    def iteration_spec(self):
        c = self.constraint
        parts = [f"self : {c.context}"] if c.context else ["once"]
        parts += [str(it) for it in c.iterators]
        return ", ".join(parts)


@dataclass
class Plan:
    phases: list
    order: set = field(default_factory=set)

    @property
    def ok(self):
        return all(p.verdict.ok for p in self.phases)

    def format(self):
        lines = []
        for i, p in enumerate(self.phases, 1):
            c = p.constraint
            lines.append(f"{i}. {c.label} on {c.context or '-'} [{c.kind}] "
                         f"for {p.iteration_spec()}: {p.verdict}")
        for t1, t2 in sorted(self.order):
            lines.append(f"{t1} < {t2}")
        return "\n".join(lines) + "\n"


# -- footprints of whole constraints ------------------------------------------

def constraint_reads(c, mm):
    """(reads, deferred) of a constraint.

    ``deferred`` reads sit inside ``isDeleted`` arguments and are evaluated
    before the deletes of the same binding are applied.
    """
    key_attr = key_attr_name(mm)
    reads = set()
    if c.context is not None:
        reads.add(ReadItem(c.context, EXTENT))
    for it in c.iterators:
        reads |= read_footprint(it.domain, key_attr)
    if c.antecedent is not None:
        reads |= read_footprint(c.antecedent, key_attr)
    post_reads, deferred = post_read_footprint(c.succedent, key_attr)
    return reads | post_reads, deferred


def iterated_entities(c):
    """Entities whose live extent is iterated: the context and TypeExtent domains."""
    out = set()
    if c.context is not None:
        out.add(c.context)
    for it in c.iterators:
        if isinstance(it.domain, TypeExtent):
            out.add(it.domain.entity)
    return out


def created_entities(c):
    return {w.entity for w in write_footprint(c.succedent) if isinstance(w, CreateExtent)}


# -- non-interference ----------------------------------------------------------

def non_interference(c, mm):
    """Check that ``c``'s updates cannot disturb what it reads or iterates."""
    reads, deferred = constraint_reads(c, mm)
    writes = write_footprint(c.succedent)
    iterated = iterated_entities(c)
    live = sorted(r for r in reads if not r.at_pre)
    conflicts = []
    for w in sorted(writes, key=lambda w: (type(w).__name__, str(w))):
        if isinstance(w, CreateExtent):
            for r in live:
                if r.feature == EXTENT and mm.overlaps(r.entity, w.entity):
                    conflicts.append(Conflict(r, w))
            for e in sorted(iterated):
                if mm.overlaps(e, w.entity) and ReadItem(e, EXTENT) not in live:
                    conflicts.append(Conflict(ReadItem(e, EXTENT), w))
        elif isinstance(w, AssignFeature):
            if w.new_only:
                continue
            for r in live:
                if r.feature == w.feature and mm.overlaps(r.entity, w.entity):
                    conflicts.append(Conflict(r, w))
        elif isinstance(w, InsertInto):
            for r in live:
                if r.feature == w.feature and mm.overlaps(r.entity, w.entity):
                    conflicts.append(Conflict(r, w))
        elif isinstance(w, DeleteFrom):
            for r in live:
                if mm.overlaps(r.entity, w.entity):
                    conflicts.append(Conflict(r, w))
            for e in sorted(iterated):
                if mm.overlaps(e, w.entity) and ReadItem(e, EXTENT) not in live:
                    conflicts.append(Conflict(ReadItem(e, EXTENT), w))
    # deferred reads never conflict with deletes, but still do with other writes
    for w in writes:
        if isinstance(w, (AssignFeature, InsertInto)) and not getattr(w, "new_only", False):
            for r in sorted(deferred):
                if not r.at_pre and r.feature == w.feature and mm.overlaps(r.entity, w.entity):
                    conflicts.append(Conflict(r, w))
    return Verdict(tuple(dict.fromkeys(conflicts)))


# -- ordering -------------------------------------------------------------------

def _read_entities(c, mm):
    """Entities whose instances ``c`` consults live (receivers and end targets)."""
    reads, deferred = constraint_reads(c, mm)
    out = set()
    for r in reads | deferred:
        if r.at_pre:
            continue
        if c.context is not None and r == ReadItem(c.context, EXTENT):
            continue
        out.add(r.entity)
        if r.feature != EXTENT:
            f = lookup_feature(mm, r.entity, r.feature)
            if isinstance(f, AssociationEnd):
                out.add(f.target)
    return out


def entity_order(spec):
    """Pairs (T1, T2): T1 instances are read to define features of T2 instances."""
    mm = spec.mm
    creators = {c.label: created_entities(c) for c in spec.constraints}
    relation = set()
    for c in spec.constraints:
        if not creators[c.label]:
            continue
        read = _read_entities(c, mm)
        for other in spec.constraints:
            if other is c:
                continue
            for t1 in creators[other.label]:
                if any(mm.overlaps(t1, r) for r in read):
                    for t2 in creators[c.label]:
                        if t1 != t2:
                            relation.add((t1, t2))
    _check_acyclic(relation)
    return relation


def _check_acyclic(relation):
    succ = {}
    for a, b in relation:
        succ.setdefault(a, set()).add(b)
    state = {}

    def visit(node, path):
        state[node] = 1
        for nxt in sorted(succ.get(node, ())):
            if state.get(nxt) == 1:
                cycle = path[path.index(nxt):] + [nxt]
                raise PlanningError("entity dependency cycle: " + " < ".join(cycle))
            if nxt not in state:
                visit(nxt, path + [nxt])
        state[node] = 2

    for node in sorted(succ):
        if node not in state:
            visit(node, [node])


def derive_plan(spec):
    """Topologically sort constraints into phases; ties keep file order."""
    mm = spec.mm
    order = entity_order(spec)
    constraints = spec.constraints
    created = [created_entities(c) for c in constraints]
    preds = {i: set() for i in range(len(constraints))}
    for i in range(len(constraints)):
        for j in range(len(constraints)):
            if i == j:
                continue
            # phase i creates T1, phase j creates T2, T1 < T2  =>  i before j
            if any((t1, t2) in order for t1 in created[i] for t2 in created[j]):
                preds[j].add(i)
    remaining = {i: len(p) for i, p in preds.items()}
    ready = [i for i, n in remaining.items() if n == 0]
    heapq.heapify(ready)
    sequence = []
    while ready:
        i = heapq.heappop(ready)
        sequence.append(i)
        for j, p in preds.items():
            if i in p:
                remaining[j] -= 1
                if remaining[j] == 0:
                    heapq.heappush(ready, j)
    if len(sequence) != len(constraints):
        stuck = [constraints[i].label for i in range(len(constraints)) if i not in sequence]
        raise PlanningError("phase dependency cycle among " + ", ".join(stuck))
    phases = [Phase(constraints[i], non_interference(constraints[i], mm)) for i in sequence]
    return Plan(phases, order)

