"""Ground entailment engine: congruence closure over a node store with
reified predicates, disequalities, small-clause case splitting, and the
sequence theory (membership, counts restricted to +-1 steps, universal
facts over sequences).

Design notes:
  - Values are nodes; field reads are materialized lazily into a heap map
    keyed by (representative, attribute). Assignments bind a fresh node and
    record the defining equality as a labeled fact, so dropping the fact in
    a core computation genuinely disconnects the value.
  - Boolean structure is reified: not/and/or/eq/gt/has become nodes whose
    truth propagates through saturation rules; undetermined nodes are
    branched on. `proved` answers are refutations (facts plus negated goal
    are unsatisfiable in every branch) and therefore sound; `unproven` is
    not a falsity claim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

MAX_BRANCH_VARS = 14


class Unsat(Exception):
    pass


@dataclass
class ForallFact:
    label: Optional[str]
    seq: int  # node
    binder: str
    body: object  # Expr AST
    env: dict  # free name -> node
    cur: int  # node playing Current in the body
    class_name: str  # class whose vocabulary the body uses
    elem_class: Optional[str] = None
    deps: tuple = ()  # labels this fact depends on (foreach side conditions)


class State:
    """One symbolic state: congruence structure + heap + facts."""

    def __init__(self, evaluator=None):
        self.parent: list[int] = []
        self.int_value: list[Optional[int]] = []
        self.non_void: list[bool] = []
        self.is_object: list[bool] = []
        self.node_class: list[Optional[str]] = []
        self.creation_log: list[tuple] = []  # per-node attrs at creation time
        self.apply_table: dict[tuple, int] = {}  # (op, *arg reps) -> node
        self.apply_sig: dict[int, tuple] = {}  # node -> (op, *arg nodes)
        self.raw_index: dict[tuple, int] = {}  # (op, *arg nodes) -> node
        self.heap: dict[tuple[int, str], int] = {}  # (rep, attr) -> node
        self.diseq: set[frozenset] = set()
        self.facts: list[tuple[Optional[str], tuple]] = []  # (label, formula)
        self.ambient: list[tuple] = []  # unlabeled structural formulas
        self.foralls: list[ForallFact] = []
        self.seq_ext: dict[int, tuple[int, int]] = {}  # S' -> (S, elem)
        self.seq_sub: dict[int, int] = {}  # S' -> S (multiset subset)
        self.members: dict[int, set[int]] = {}  # seq rep -> element nodes
        self.inst_done: set[tuple[int, int]] = set()
        self.evaluator = evaluator  # callback for forall body evaluation
        self.TRUE = self.new_node()
        self.FALSE = self.new_node()
        self.VOID = self.new_node()
        self.add_diseq(self.TRUE, self.FALSE)
        self._int_literals: dict[int, int] = {}

    # -- basic structure -----------------------------------------------------

    def new_node(
        self,
        int_value: Optional[int] = None,
        non_void: bool = False,
        is_object: bool = False,
        node_class: Optional[str] = None,
    ) -> int:
        n = len(self.parent)
        self.parent.append(n)
        self.int_value.append(int_value)
        self.non_void.append(non_void)
        self.is_object.append(is_object)
        self.node_class.append(node_class)
        self.creation_log.append((int_value, non_void, is_object, node_class))
        return n

    def assert_ambient(self, f: tuple):
        self.ambient.append(f)
        self._apply_formula(f)

    def int_literal(self, value: int) -> int:
        if value not in self._int_literals:
            self._int_literals[value] = self.new_node(int_value=value)
        return self._int_literals[value]

    def find(self, n: int) -> int:
        while self.parent[n] != n:
            self.parent[n] = self.parent[self.parent[n]]
            n = self.parent[n]
        return n

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def add_diseq(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            raise Unsat()
        self.diseq.add(frozenset((ra, rb)))

    def disequal(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if frozenset((ra, rb)) in self.diseq:
            return True
        va, vb = self.int_value[ra], self.int_value[rb]
        if va is not None and vb is not None and va != vb:
            return True
        if self.non_void[ra] and rb == self.find(self.VOID):
            return True
        if self.non_void[rb] and ra == self.find(self.VOID):
            return True
        return False

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.disequal(ra, rb):
            raise Unsat()
        # keep the older node as representative: heap keys stay stable
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        va, vb = self.int_value[ra], self.int_value[rb]
        if va is None:
            self.int_value[ra] = vb
        elif vb is not None and va != vb:
            raise Unsat()
        self.non_void[ra] = self.non_void[ra] or self.non_void[rb]
        self.is_object[ra] = self.is_object[ra] or self.is_object[rb]
        if self.node_class[ra] is None:
            self.node_class[ra] = self.node_class[rb]
        # rebuild disequalities mentioning rb
        new_diseq = set()
        for pair in self.diseq:
            pair = frozenset(self.find(x) for x in pair)
            if len(pair) == 1:
                raise Unsat()
            new_diseq.add(pair)
        self.diseq = new_diseq
        # heap congruence: merge field rows (nested unions may have already
        # consumed entries, so tolerate missing keys)
        for (base, attr) in [k for k in self.heap if k[0] == rb]:
            val = self.heap.pop((base, attr), None)
            if val is None:
                continue
            target = (self.find(ra), attr)
            if target in self.heap:
                self.union(self.heap[target], val)
            else:
                self.heap[target] = val
        # apply-term congruence
        for key in [k for k in self.apply_table if rb in k[1:]]:
            node = self.apply_table.pop(key, None)
            if node is None:
                continue
            new_key = (key[0],) + tuple(self.find(x) for x in key[1:])
            if new_key in self.apply_table:
                if not self.same(self.apply_table[new_key], node):
                    self.union(self.apply_table[new_key], node)
            else:
                self.apply_table[new_key] = node
        # membership sets
        if rb in self.members:
            elems = self.members.pop(rb)
            self.members.setdefault(ra, set()).update(elems)

    def apply(self, op: str, *args: int) -> int:
        """Node for an applied term. Syntactically distinct applications get
        distinct nodes even when currently congruent; congruence merges them
        via the canonical key, and restricted states re-derive the merge only
        from the facts they retain (keeps facts_used attribution honest)."""
        raw = (op,) + tuple(args)
        if raw in self.raw_index:
            return self.raw_index[raw]
        key = (op,) + tuple(self.find(a) for a in args)
        n = self.new_node()
        self.raw_index[raw] = n
        self.apply_sig[n] = raw
        if key in self.apply_table:
            self.union(self.apply_table[key], n)
        else:
            self.apply_table[key] = n
        return n

    def read(self, base: int, attr: str) -> int:
        rb = self.find(base)
        if (rb, attr) not in self.heap:
            self.heap[(rb, attr)] = self.new_node()
        return self.heap[(rb, attr)]

    def write(self, base: int, attr: str, value: int):
        self.heap[(self.find(base), attr)] = value

    def havoc(self, base: int, attr: str):
        self.heap.pop((self.find(base), attr), None)

    # -- cloning ---------------------------------------------------------------

    def clone(self) -> "State":
        s = State.__new__(State)
        s.parent = list(self.parent)
        s.int_value = list(self.int_value)
        s.non_void = list(self.non_void)
        s.is_object = list(self.is_object)
        s.node_class = list(self.node_class)
        s.creation_log = self.creation_log  # append-only; shared is fine for clones
        s.apply_table = dict(self.apply_table)
        s.apply_sig = dict(self.apply_sig)
        s.raw_index = dict(self.raw_index)
        s.heap = dict(self.heap)
        s.diseq = set(self.diseq)
        s.facts = list(self.facts)
        s.ambient = list(self.ambient)
        s.foralls = list(self.foralls)
        s.seq_ext = dict(self.seq_ext)
        s.seq_sub = dict(self.seq_sub)
        s.members = {k: set(v) for k, v in self.members.items()}
        s.inst_done = set(self.inst_done)
        s.evaluator = self.evaluator
        s.TRUE = self.TRUE
        s.FALSE = self.FALSE
        s.VOID = self.VOID
        s._int_literals = dict(self._int_literals)
        return s

    def restricted_to(self, labels: Optional[set]) -> "State":
        """Rebuild this state keeping structure (nodes, heap, apply terms,
        sequence provenance, ambient formulas) but only the labeled facts in
        `labels` (None keeps all). Used for facts_used core computation."""
        s = State(self.evaluator)
        for attrs in self.creation_log[3:]:  # TRUE/FALSE/VOID already exist
            s.new_node(*attrs)
        s._int_literals = dict(self._int_literals)
        for node, sig in sorted(self.apply_sig.items()):
            s.apply_sig[node] = sig
            s.raw_index[sig] = node
            key = (sig[0],) + tuple(s.find(a) for a in sig[1:])
            if key in s.apply_table:
                s.union(s.apply_table[key], node)
            else:
                s.apply_table[key] = node
        s.heap = dict(self.heap)
        s.seq_ext = dict(self.seq_ext)
        s.seq_sub = dict(self.seq_sub)
        for f in self.ambient:
            s.assert_ambient(f)
        for label, f in self.facts:
            if label is None or labels is None or label in labels:
                s.assert_formula(f, label)
        for ff in self.foralls:
            if ff.label is None or labels is None or ff.label in labels:
                s.foralls.append(ff)
        return s

    # -- formulas ---------------------------------------------------------------
    # formula := ("eq", a, b) | ("ne", a, b) | ("atom", n) | ("natom", n)

    def assert_formula(self, f: tuple, label: Optional[str] = None):
        if label is not None or f[0] != "noop":
            self.facts.append((label, f))
        self._apply_formula(f)

    def _apply_formula(self, f: tuple):
        kind = f[0]
        if kind == "eq":
            self.union(f[1], f[2])
        elif kind == "ne":
            self.add_diseq(f[1], f[2])
        elif kind == "atom":
            self.union(f[1], self.TRUE)
        elif kind == "natom":
            self.union(f[1], self.FALSE)
        else:
            raise ValueError(f"bad formula {f!r}")

    def negated(self, f: tuple) -> tuple:
        kind = f[0]
        if kind == "eq":
            return ("ne", f[1], f[2])
        if kind == "ne":
            return ("eq", f[1], f[2])
        if kind == "atom":
            return ("natom", f[1])
        return ("atom", f[1])

    def holds(self, f: tuple) -> bool:
        kind = f[0]
        if kind == "eq":
            return self.same(f[1], f[2])
        if kind == "ne":
            return self.disequal(f[1], f[2])
        if kind == "atom":
            return self.same(f[1], self.TRUE)
        return self.same(f[1], self.FALSE)

    def refuted(self, f: tuple) -> bool:
        return self.holds(self.negated(f))

    # -- saturation -------------------------------------------------------------

    def saturate(self):
        for _ in range(60):
            if not self._saturate_once():
                return
        # saturation is bounded; desk-scale states converge in a few passes

    def _saturate_once(self) -> bool:
        changed = False
        for key, node in list(self.apply_table.items()):
            op = key[0]
            args = key[1:]
            if self._rule(op, args, node):
                changed = True
        if self._instantiate_foralls():
            changed = True
        return changed

    def _set(self, node: int, truth: int) -> bool:
        if self.same(node, truth):
            return False
        self.union(node, truth)
        return True

    def _rule(self, op: str, args: tuple, node: int) -> bool:
        t, f = self.TRUE, self.FALSE
        changed = False
        if op == "not":
            (a,) = args
            if self.same(a, t):
                changed |= self._set(node, f)
            elif self.same(a, f):
                changed |= self._set(node, t)
            if self.same(node, t):
                changed |= self._set(a, f)
            elif self.same(node, f):
                changed |= self._set(a, t)
        elif op == "and":
            a, b = args
            if self.same(a, t) and self.same(b, t):
                changed |= self._set(node, t)
            if self.same(a, f) or self.same(b, f):
                changed |= self._set(node, f)
            if self.same(node, t):
                changed |= self._set(a, t)
                changed |= self._set(b, t)
            if self.same(node, f):
                if self.same(a, t):
                    changed |= self._set(b, f)
                if self.same(b, t):
                    changed |= self._set(a, f)
        elif op == "or":
            a, b = args
            if self.same(a, f) and self.same(b, f):
                changed |= self._set(node, f)
            if self.same(a, t) or self.same(b, t):
                changed |= self._set(node, t)
            if self.same(node, f):
                changed |= self._set(a, f)
                changed |= self._set(b, f)
            if self.same(node, t):
                if self.same(a, f):
                    changed |= self._set(b, t)
                if self.same(b, f):
                    changed |= self._set(a, t)
        elif op == "eqv":
            a, b = args
            if self.same(a, b):
                changed |= self._set(node, t)
            elif self.disequal(a, b):
                changed |= self._set(node, f)
            if self.same(node, t) and not self.same(a, b):
                self.union(a, b)
                changed = True
            if self.same(node, f) and not self.disequal(a, b):
                self.add_diseq(a, b)
                changed = True
        elif op == "gt":
            a, b = args
            va, vb = self.int_value[self.find(a)], self.int_value[self.find(b)]
            if va is not None and vb is not None:
                changed |= self._set(node, t if va > vb else f)
            elif self.same(a, b):
                changed |= self._set(node, f)
        elif op == "has":
            s, e = args
            changed |= self._has_rule(s, e, node)
        elif op in ("plus", "minus"):
            a, b = args
            va, vb = self.int_value[self.find(a)], self.int_value[self.find(b)]
            if va is not None and vb is not None:
                value = va + vb if op == "plus" else va - vb
                lit = self.int_literal(value)
                if not self.same(node, lit):
                    self.union(node, lit)
                    changed = True
        elif op == "count":
            (s,) = args
            rs = self.find(s)
            if rs in self.seq_ext:
                base, _ = self.seq_ext[rs]
                succ = self.apply("plus", self.apply("count", base), self.int_literal(1))
                if not self.same(node, succ):
                    self.union(node, succ)
                    changed = True
            if rs in self.seq_sub:
                base = self.seq_sub[rs]
                pred = self.apply("minus", self.apply("count", base), self.int_literal(1))
                if not self.same(node, pred):
                    self.union(node, pred)
                    changed = True
        return changed

    def _has_rule(self, s: int, e: int, node: int) -> bool:
        t, f = self.TRUE, self.FALSE
        changed = False
        rs = self.find(s)
        if self._seq_empty(rs):
            changed |= self._set(node, f)
        if rs in self.seq_ext:
            base, elem = self.seq_ext[rs]
            if self.same(e, elem):
                changed |= self._set(node, t)
            elif self.disequal(e, elem):
                inner = self.apply("has", base, e)
                if not self.same(node, inner):
                    self.union(node, inner)
                    changed = True
            # membership in the base carries over to the extension
            if self.same(self.apply("has", base, e), t):
                changed |= self._set(node, t)
        if rs in self.seq_sub and self.same(node, t):
            changed |= self._set(self.apply("has", self.seq_sub[rs], e), t)
        if self.same(node, t):
            if e not in self.members.setdefault(rs, set()):
                self.members[rs].add(e)
                changed = True
        return changed

    def _seq_empty(self, seq: int) -> bool:
        count = self.apply("count", seq)
        return self.int_value[self.find(count)] == 0

    def _instantiate_foralls(self) -> bool:
        if self.evaluator is None:
            return False
        changed = False
        for idx, ff in enumerate(self.foralls):
            rs = self.find(ff.seq)
            elems = set()
            for seq_rep, ms in self.members.items():
                if self.find(seq_rep) == rs:
                    elems |= ms
            for e in list(elems):
                key = (idx, e)
                if key in self.inst_done:
                    continue
                self.inst_done.add(key)
                try:
                    self.evaluator(self, ff, e)
                except Unsat:
                    raise
                changed = True
        return changed

    # -- satisfiability ----------------------------------------------------------

    def _undetermined(self) -> list[int]:
        out = []
        seen = set()
        for key, node in self.apply_table.items():
            if key[0] in ("not", "and", "or", "eqv", "gt", "has"):
                r = self.find(node)
                if r in seen:
                    continue
                if not self.same(node, self.TRUE) and not self.same(node, self.FALSE):
                    seen.add(r)
                    out.append(node)
        return out

    def unsat(self, depth: int = 0) -> bool:
        """True iff the state is contradictory in every branch."""
        try:
            self.saturate()
        except Unsat:
            return True
        if depth >= MAX_BRANCH_VARS:
            return False
        for node in self._undetermined():
            results = []
            for truth in (self.TRUE, self.FALSE):
                branch = self.clone()
                try:
                    branch.union(node, truth)
                    results.append(branch.unsat(depth + 1))
                except Unsat:
                    results.append(True)
            if all(results):
                return True
            if not any(results):
                # both branches are consistent; splitting elsewhere cannot
                # make this node decisive, move on
                continue
        return False


# -----------------------------------------------------------------------------
# Entailment over a fact list (used for core computation and re-checking)


def formula_key(f: tuple) -> tuple:
    if f[0] in ("eq", "ne"):
        return (f[0],) + tuple(sorted(f[1:]))
    return f


@dataclass
class Entailment:
    proved: bool
    facts_used: list[str] = field(default_factory=list)


def refutes(state: State, formula: tuple) -> bool:
    """True iff state plus the negation of `formula` is unsatisfiable."""
    branch = state.clone()
    try:
        branch.assert_formula(branch.negated(formula))
    except Unsat:
        return True
    return branch.unsat()


def _fact_labels(state: State) -> list[str]:
    labels: list[str] = []
    for label, _ in state.facts:
        if label is not None and label not in labels:
            labels.append(label)
    for ff in state.foralls:
        if ff.label is not None and ff.label not in labels:
            labels.append(ff.label)
    return labels


def shrink_core(state: State, check) -> list[str]:
    """Greedy minimal label set such that `check(restricted_state)` holds.
    `check` takes a State and returns bool. Deterministic: labels are tried
    for removal in assertion order."""
    labels = _fact_labels(state)
    kept = list(labels)
    for label in labels:
        trial = [x for x in kept if x != label]
        try:
            restricted = state.restricted_to(set(trial))
            ok = check(restricted)
        except Unsat:
            ok = True
        if ok:
            kept = trial
    return kept


def entails(state: State, formula: tuple) -> Entailment:
    """Sound ground entailment: proved only if the goal holds in every model
    of the state's facts. Incomplete by design; unproven is not falsity."""
    if not refutes(state, formula):
        return Entailment(False)
    core = shrink_core(state, lambda s: refutes(s, formula))
    return Entailment(True, core)
