"""Abstract syntax for the contract language.

Expression and instruction nodes keep their source location so later stages
(diagnostics, obligations, the runtime monitor) can point back at code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import SourceLoc

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TInt:
    def __str__(self):
        return "INTEGER"


@dataclass(frozen=True)
class TBool:
    def __str__(self):
        return "BOOLEAN"


@dataclass(frozen=True)
class TRef:
    class_name: str

    def __str__(self):
        return self.class_name


@dataclass(frozen=True)
class TGen:
    """The single unconstrained generic parameter of the enclosing class."""

    param: str

    def __str__(self):
        return self.param


@dataclass(frozen=True)
class TSeq:
    """Built-in sequence of references (LIST/ARRAYED_LIST/SEQUENCE [...])."""

    elem: "Type"

    def __str__(self):
        return f"SEQUENCE [{self.elem}]"


Type = Union[TInt, TBool, TRef, TGen, TSeq]

# ---------------------------------------------------------------------------
# Expressions


@dataclass
class Expr:
    loc: SourceLoc


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class VoidLit(Expr):
    pass


@dataclass
class CurrentExpr(Expr):
    pass


@dataclass
class NameRef(Expr):
    """A bare name: formal argument, attribute/query of the current class,
    or a forall binder. ``binding`` is filled by the resolver."""

    name: str
    binding: Optional[str] = None  # "formal" | "feature" | "binder"


@dataclass
class QualRead(Expr):
    """Qualified query application ``target.name (args)``; covers attribute
    reads, function calls and the builtin sequence queries has/count."""

    target: Expr
    name: str
    args: list[Expr] = field(default_factory=list)
    builtin: bool = False  # has / count


@dataclass
class UnqualCallExpr(Expr):
    """Unqualified query call with arguments, applied to the current object."""

    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class Eq(Expr):
    left: Expr
    right: Expr


@dataclass
class Ne(Expr):
    left: Expr
    right: Expr


@dataclass
class Gt(Expr):
    left: Expr
    right: Expr


@dataclass
class Plus(Expr):
    left: Expr
    right: Expr


@dataclass
class Minus(Expr):
    left: Expr
    right: Expr


@dataclass
class Not(Expr):
    operand: Expr


@dataclass
class BinBool(Expr):
    op: str  # "and" | "or" | "and then" | "implies"
    left: Expr
    right: Expr


@dataclass
class OldExpr(Expr):
    operand: Expr


@dataclass
class ForallExpr(Expr):
    binder: str
    seq: Expr
    body: Expr


# ---------------------------------------------------------------------------
# Assertions


@dataclass
class AssertionClause:
    tag: Optional[str]
    expr: Expr
    loc: SourceLoc


# ---------------------------------------------------------------------------
# Instructions


@dataclass
class Instruction:
    loc: SourceLoc


@dataclass
class Assign(Instruction):
    target: str  # attribute of the current class (or a formal: flagged later)
    expr: Expr


@dataclass
class UnqualCall(Instruction):
    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class QualCall(Instruction):
    target: Expr
    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class BuiltinSeqCall(Instruction):
    """extend / remove_item / new_empty on a sequence-valued expression."""

    seq: Expr
    op: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class Creation(Instruction):
    target: str  # attribute receiving the new object
    creation_name: Optional[str]  # None for default creation
    args: list[Expr] = field(default_factory=list)
    explicit_type: Optional[str] = None  # create {TYPE} x.make (...)


@dataclass
class If(Instruction):
    cond: Expr
    then_branch: list[Instruction] = field(default_factory=list)
    else_branch: list[Instruction] = field(default_factory=list)


@dataclass
class Foreach(Instruction):
    binder: str
    seq: Expr
    body: list[Instruction] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Declarations


ALL_CLIENTS = "ALL"  # export spec sentinel


@dataclass
class Feature:
    name: str
    kind: str  # "attribute" | "procedure" | "function"
    loc: SourceLoc
    formals: list[tuple[str, Type]] = field(default_factory=list)
    result_type: Optional[Type] = None
    pre_clauses: list[AssertionClause] = field(default_factory=list)
    post_clauses: list[AssertionClause] = field(default_factory=list)
    body: list[Instruction] = field(default_factory=list)
    export_spec: Union[str, frozenset] = ALL_CLIENTS  # ALL or a set of names


@dataclass
class ClassDecl:
    name: str
    loc: SourceLoc
    generic_param: Optional[str] = None
    creation_names: frozenset = frozenset()
    features: list[Feature] = field(default_factory=list)  # declaration order
    invariant_clauses: list[AssertionClause] = field(default_factory=list)


@dataclass
class Program:
    classes: list[ClassDecl] = field(default_factory=list)

    def class_names(self) -> list[str]:
        return [c.name for c in self.classes]
