"""Brute-force model enumeration oracle for ground entailment.

Independent of the engine: formulas are tiny first-order trees over object
constants, reference fields and boolean fields; models are exhaustively
enumerated field assignments. Used to confirm every `proved` verdict of the
entailment engine on small vocabularies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

VOID = "void"


@dataclass(frozen=True)
class Path:
    root: str  # object constant name
    fields: tuple[str, ...] = ()


# formulas: ("eq", p, q) | ("bool", p) | ("not", f) | ("and", f, g)
#           | ("or", f, g) | ("implies", f, g)
# where p/q are Path or the string VOID


@dataclass(frozen=True)
class Vocabulary:
    objects: tuple[str, ...]
    ref_fields: tuple[str, ...]
    bool_fields: tuple[str, ...]


class Model:
    def __init__(self, vocab: Vocabulary, refs: dict, bools: dict):
        self.vocab = vocab
        self.refs = refs  # (obj, field) -> obj | VOID
        self.bools = bools  # (obj, field) -> bool

    def eval_path(self, p):
        # total semantics: dereferencing void propagates void, boolean fields
        # of void read as False (the engine never proves anything about such
        # reads, so any total choice keeps the soundness comparison valid)
        if p == VOID:
            return VOID
        value = p.root
        for f in p.fields:
            if f in self.vocab.ref_fields:
                value = VOID if value == VOID else self.refs[(value, f)]
            else:
                return False if value == VOID else self.bools[(value, f)]
        return value

    def eval(self, f) -> bool:
        kind = f[0]
        if kind == "eq":
            return self.eval_path(f[1]) == self.eval_path(f[2])
        if kind == "bool":
            v = self.eval_path(f[1])
            assert isinstance(v, bool), f
            return v
        if kind == "not":
            return not self.eval(f[1])
        if kind == "and":
            return self.eval(f[1]) and self.eval(f[2])
        if kind == "or":
            return self.eval(f[1]) or self.eval(f[2])
        if kind == "implies":
            return (not self.eval(f[1])) or self.eval(f[2])
        raise ValueError(f)


def all_models(vocab: Vocabulary):
    ref_slots = [(o, f) for o in vocab.objects for f in vocab.ref_fields]
    bool_slots = [(o, f) for o in vocab.objects for f in vocab.bool_fields]
    ref_values = list(vocab.objects) + [VOID]
    for ref_choice in itertools.product(ref_values, repeat=len(ref_slots)):
        refs = dict(zip(ref_slots, ref_choice))
        for bool_choice in itertools.product((False, True), repeat=len(bool_slots)):
            bools = dict(zip(bool_slots, bool_choice))
            yield Model(vocab, refs, bools)


def oracle_entails(vocab: Vocabulary, facts: list, goal) -> bool:
    """True iff the goal holds in every model satisfying all facts.

    A model "satisfies" a fact only when the fact evaluates to True;
    undefined facts discard the model (vacuous). An undefined goal counts
    as a counterexample, so `True` here really means valid.
    """
    for m in all_models(vocab):
        values = [m.eval(f) for f in facts]
        if any(v is not True for v in values):
            continue
        if m.eval(goal) is not True:
            return False
    return True


def has_satisfying_model(vocab: Vocabulary, facts: list) -> bool:
    for m in all_models(vocab):
        if all(m.eval(f) is True for f in facts):
            return True
    return False
