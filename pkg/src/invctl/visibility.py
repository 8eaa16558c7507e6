"""Feature and clause visibility, the visibility preorder, invariant slicing,
and the local/remote invariant split."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from . import ast_nodes as A
from .resolver import ResolvedProgram

ALL = "ALL"  # top element of the visibility lattice
VisibilitySet = Union[str, frozenset]


def vis_leq(a: VisibilitySet, b: VisibilitySet) -> bool:
    """Subset test with ALL as the top element."""
    if b == ALL:
        return True
    if a == ALL:
        return False
    return frozenset(a) <= frozenset(b)


def vis_intersect(a: VisibilitySet, b: VisibilitySet) -> VisibilitySet:
    if a == ALL:
        return b
    if b == ALL:
        return a
    return frozenset(a) & frozenset(b)


def render_vis(v: VisibilitySet) -> str:
    if v == ALL:
        return "ALL"
    return "{" + ", ".join(sorted(v)) + "}"


def feature_visibility(rp: ResolvedProgram, class_name: str, feature: str) -> VisibilitySet:
    feat = rp.feature(class_name, feature)
    spec = feat.export_spec
    if spec == A.ALL_CLIENTS:
        return ALL
    vis = frozenset(spec)
    if rp.include_self_in_visibility:
        vis = vis | {class_name}
    return vis


def clause_queries(rp: ResolvedProgram, class_name: str, clause: A.AssertionClause) -> set[str]:
    """Queries of an invariant clause: features of the declaring class that
    appear by themselves or as targets of calls; features applied to other
    targets, and forall binders, are excluded."""
    queries: set[str] = set()

    def walk(e: A.Expr):
        if isinstance(e, A.NameRef):
            if e.binding == "feature":
                queries.add(e.name)
            return
        if isinstance(e, A.UnqualCallExpr):
            queries.add(e.name)
            for a in e.args:
                walk(a)
            return
        if isinstance(e, A.QualRead):
            walk(e.target)  # the applied feature itself is not a query here
            for a in e.args:
                walk(a)
            return
        if isinstance(e, (A.Eq, A.Ne, A.Gt, A.Plus, A.Minus)):
            walk(e.left)
            walk(e.right)
            return
        if isinstance(e, A.Not):
            walk(e.operand)
            return
        if isinstance(e, A.BinBool):
            walk(e.left)
            walk(e.right)
            return
        if isinstance(e, A.OldExpr):
            walk(e.operand)
            return
        if isinstance(e, A.ForallExpr):
            walk(e.seq)
            walk(e.body)
            return
        # literals, Current, Void

    walk(clause.expr)
    return queries


def clause_visibility(rp: ResolvedProgram, class_name: str, clause: A.AssertionClause) -> VisibilitySet:
    """Intersection of the visibilities of the clause's queries; a clause with
    no queries has full visibility (empty intersection convention)."""
    vis: VisibilitySet = ALL
    for q in sorted(clause_queries(rp, class_name, clause)):
        vis = vis_intersect(vis, feature_visibility(rp, class_name, q))
    return vis


@dataclass(frozen=True)
class SlicedInvariant:
    class_name: str
    routine: str
    retained: tuple[str, ...]  # tags, declaration order
    dropped: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "class": self.class_name,
            "routine": self.routine,
            "retained": list(self.retained),
            "dropped": list(self.dropped),
        }


def slice_invariant(rp: ResolvedProgram, class_name: str, routine: str) -> SlicedInvariant:
    """INV restricted to the clauses with no more visibility than the routine."""
    rvis = feature_visibility(rp, class_name, routine)
    retained, dropped = [], []
    for tag, clause in rp.invariant_clauses(class_name):
        if vis_leq(clause_visibility(rp, class_name, clause), rvis):
            retained.append(tag)
        else:
            dropped.append(tag)
    return SlicedInvariant(class_name, routine, tuple(retained), tuple(dropped))


def is_remote_clause(rp: ResolvedProgram, class_name: str, clause: A.AssertionClause) -> bool:
    """A clause is remote iff some subexpression applies a query to a
    reference-valued expression (directly or through a forall binder)."""

    def deref(e: A.Expr) -> bool:
        if isinstance(e, A.QualRead):
            tt = rp.type_of(e.target)
            if isinstance(tt, A.TRef) and tt.class_name not in ("$void$", "$error$"):
                return True
            return deref(e.target) or any(deref(a) for a in e.args)
        if isinstance(e, (A.Eq, A.Ne, A.Gt, A.Plus, A.Minus)):
            return deref(e.left) or deref(e.right)
        if isinstance(e, A.Not):
            return deref(e.operand)
        if isinstance(e, A.BinBool):
            return deref(e.left) or deref(e.right)
        if isinstance(e, A.OldExpr):
            return deref(e.operand)
        if isinstance(e, A.ForallExpr):
            return deref(e.seq) or deref(e.body)
        if isinstance(e, A.UnqualCallExpr):
            return any(deref(a) for a in e.args)
        return False

    return deref(clause.expr)


@dataclass(frozen=True)
class InvariantSplit:
    class_name: str
    local: tuple[str, ...]
    remote: tuple[str, ...]

    def to_json(self) -> dict:
        return {"class": self.class_name, "local": list(self.local), "remote": list(self.remote)}


def split_local_remote(rp: ResolvedProgram, class_name: str) -> InvariantSplit:
    local, remote = [], []
    for tag, clause in rp.invariant_clauses(class_name):
        (remote if is_remote_clause(rp, class_name, clause) else local).append(tag)
    return InvariantSplit(class_name, tuple(local), tuple(remote))


def definedness_warnings(rp: ResolvedProgram, class_name: str, routine: str) -> list[str]:
    """Cheap lint: warn when a sliced-away clause textually precedes a retained
    clause that dereferences a reference expression (the retained clause may
    have lost a guard it relied on)."""
    sliced = slice_invariant(rp, class_name, routine)
    dropped_seen = False
    warnings = []
    for tag, clause in rp.invariant_clauses(class_name):
        if tag in sliced.dropped:
            dropped_seen = True
        elif dropped_seen and is_remote_clause(rp, class_name, clause):
            warnings.append(
                f"{class_name}: clause {tag} retained by slice for {routine} follows a "
                f"dropped clause and dereferences a reference; it may be undefined"
            )
    return warnings


def slice_to_json(s: SlicedInvariant) -> str:
    return json.dumps(s.to_json(), indent=2, sort_keys=True)
