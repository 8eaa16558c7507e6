"""Name resolution and type checking.

Produces a ResolvedProgram: every name reference bound, every expression
typed, every feature annotated with its visibility. Resolution is a pure
function of the parsed program; the result is treated as immutable by all
later stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import ast_nodes as A
from .diagnostics import Diagnostic

# Error sentinel type: compatible with everything to avoid cascading reports.
_TERR = A.TRef("$error$")


def _is_err(t: A.Type) -> bool:
    return isinstance(t, A.TRef) and t.class_name == "$error$"


@dataclass
class ClassInfo:
    decl: A.ClassDecl
    features: dict[str, A.Feature] = field(default_factory=dict)
    attributes: dict[str, A.Type] = field(default_factory=dict)
    invariant_tags: list[str] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.decl.name

    def queries(self) -> set[str]:
        return {
            f.name
            for f in self.decl.features
            if f.kind in ("attribute", "function")
        }

    def is_creation(self, feature: str) -> bool:
        return feature in self.decl.creation_names


@dataclass
class ResolvedProgram:
    program: A.Program
    classes: dict[str, ClassInfo]
    expr_types: dict[int, A.Type]
    include_self_in_visibility: bool = False

    def class_info(self, name: str) -> ClassInfo:
        return self.classes[name]

    def feature(self, class_name: str, feature_name: str) -> A.Feature:
        return self.classes[class_name].features[feature_name]

    def type_of(self, expr: A.Expr) -> A.Type:
        return self.expr_types.get(id(expr), _TERR)

    def invariant_clauses(self, class_name: str) -> list[tuple[str, A.AssertionClause]]:
        """Invariant clauses of a class, paired with their effective tags."""
        info = self.classes[class_name]
        return list(zip(info.invariant_tags, info.decl.invariant_clauses))


class _Resolver:
    def __init__(self, program: A.Program, include_self: bool):
        self.program = program
        self.include_self = include_self
        self.diags: list[Diagnostic] = []
        self.classes: dict[str, ClassInfo] = {}
        self.expr_types: dict[int, A.Type] = {}

    def error(self, rule: str, loc, msg: str):
        self.diags.append(Diagnostic("error", rule, loc, msg))

    # -- top level -----------------------------------------------------------

    def run(self):
        for cls in self.program.classes:
            info = ClassInfo(decl=cls)
            for f in cls.features:
                if f.name in info.features:
                    self.error(
                        "DUPLICATE_FEATURE",
                        f.loc,
                        f"feature {f.name} declared twice in {cls.name}",
                    )
                info.features[f.name] = f
                if f.kind == "attribute":
                    info.attributes[f.name] = f.result_type
            for k, clause in enumerate(cls.invariant_clauses, start=1):
                info.invariant_tags.append(clause.tag or f"inv_{k}")
            self.classes[cls.name] = info

        for cls in self.program.classes:
            info = self.classes[cls.name]
            for name in cls.creation_names:
                feat = info.features.get(name)
                if feat is None or feat.kind != "procedure":
                    self.error(
                        "BAD_CREATION_NAME",
                        cls.loc,
                        f"creation name {name} is not a procedure of {cls.name}",
                    )
            for f in cls.features:
                self.resolve_feature(info, f)
            for clause in cls.invariant_clauses:
                t = self.resolve_expr(clause.expr, info, {}, {}, allow_old=False)
                self._require_bool(t, clause.loc, "invariant clause")

    # -- features ------------------------------------------------------------

    def resolve_feature(self, info: ClassInfo, f: A.Feature):
        if f.kind == "attribute":
            self._check_type(f.result_type, info, f.loc)
            return
        formals = dict(f.formals)
        for _, t in f.formals:
            self._check_type(t, info, f.loc)
        if f.result_type is not None:
            self._check_type(f.result_type, info, f.loc)
        for clause in f.pre_clauses:
            t = self.resolve_expr(clause.expr, info, formals, {}, allow_old=False)
            self._require_bool(t, clause.loc, "precondition")
        for instr in f.body:
            self.resolve_instr(instr, info, formals)
        for clause in f.post_clauses:
            t = self.resolve_expr(clause.expr, info, formals, {}, allow_old=True)
            self._require_bool(t, clause.loc, "postcondition")

    def _check_type(self, t: A.Type, info: ClassInfo, loc):
        if isinstance(t, A.TRef) and not _is_err(t):
            if t.class_name not in self.classes and t.class_name != "ANY":
                self.error("UNKNOWN_NAME", loc, f"unknown class {t.class_name}")
        elif isinstance(t, A.TSeq):
            self._check_type(t.elem, info, loc)

    def _require_bool(self, t: A.Type, loc, what: str):
        if not isinstance(t, A.TBool) and not _is_err(t):
            self.error("TYPE_MISMATCH", loc, f"{what} must be boolean, got {t}")

    # -- expressions ---------------------------------------------------------

    def resolve_expr(
        self,
        e: A.Expr,
        info: ClassInfo,
        formals: dict[str, A.Type],
        binders: dict[str, A.Type],
        allow_old: bool,
    ) -> A.Type:
        t = self._expr(e, info, formals, binders, allow_old)
        self.expr_types[id(e)] = t
        return t

    def _expr(self, e, info, formals, binders, allow_old) -> A.Type:
        if isinstance(e, A.IntLit):
            return A.TInt()
        if isinstance(e, A.BoolLit):
            return A.TBool()
        if isinstance(e, A.VoidLit):
            return A.TRef("$void$")
        if isinstance(e, A.CurrentExpr):
            return A.TRef(info.name)
        if isinstance(e, A.NameRef):
            if e.name in binders:
                e.binding = "binder"
                return binders[e.name]
            if e.name in formals:
                e.binding = "formal"
                return formals[e.name]
            feat = info.features.get(e.name)
            if feat is not None and feat.kind in ("attribute", "function"):
                e.binding = "feature"
                if feat.kind == "function" and feat.formals:
                    self.error("ARITY", e.loc, f"{e.name} expects arguments")
                return feat.result_type
            self.error("UNKNOWN_NAME", e.loc, f"unknown name {e.name}")
            return _TERR
        if isinstance(e, A.UnqualCallExpr):
            feat = info.features.get(e.name)
            if feat is None or feat.kind != "function":
                self.error("UNKNOWN_NAME", e.loc, f"unknown function {e.name}")
                return _TERR
            self._check_args(e.name, feat.formals, e.args, info, formals, binders, allow_old, e.loc)
            return feat.result_type
        if isinstance(e, A.QualRead):
            tt = self.resolve_expr(e.target, info, formals, binders, allow_old)
            return self._qual_read_type(e, tt, info, formals, binders, allow_old)
        if isinstance(e, (A.Eq, A.Ne)):
            lt = self.resolve_expr(e.left, info, formals, binders, allow_old)
            rt = self.resolve_expr(e.right, info, formals, binders, allow_old)
            if not _compatible(lt, rt):
                self.error(
                    "TYPE_MISMATCH",
                    e.loc,
                    f"cannot compare {lt} with {rt}",
                )
            return A.TBool()
        if isinstance(e, A.Gt):
            for side in (e.left, e.right):
                t = self.resolve_expr(side, info, formals, binders, allow_old)
                if not isinstance(t, A.TInt) and not _is_err(t):
                    self.error("TYPE_MISMATCH", e.loc, f"> expects integers, got {t}")
            return A.TBool()
        if isinstance(e, (A.Plus, A.Minus)):
            for side in (e.left, e.right):
                t = self.resolve_expr(side, info, formals, binders, allow_old)
                if not isinstance(t, A.TInt) and not _is_err(t):
                    self.error("TYPE_MISMATCH", e.loc, f"arithmetic expects integers, got {t}")
            return A.TInt()
        if isinstance(e, A.Not):
            t = self.resolve_expr(e.operand, info, formals, binders, allow_old)
            self._require_bool(t, e.loc, "operand of not")
            return A.TBool()
        if isinstance(e, A.BinBool):
            for side in (e.left, e.right):
                t = self.resolve_expr(side, info, formals, binders, allow_old)
                self._require_bool(t, e.loc, f"operand of {e.op}")
            return A.TBool()
        if isinstance(e, A.OldExpr):
            if not allow_old:
                self.error("OLD_CONTEXT", e.loc, "old is only allowed in postconditions")
            return self.resolve_expr(e.operand, info, formals, binders, allow_old)
        if isinstance(e, A.ForallExpr):
            ts = self.resolve_expr(e.seq, info, formals, binders, allow_old)
            if not isinstance(ts, A.TSeq):
                self.error("FORALL_RANGE", e.loc, "forall ranges over sequences")
                elem: A.Type = _TERR
            else:
                elem = ts.elem
            inner = dict(binders)
            inner[e.binder] = elem
            bt = self.resolve_expr(e.body, info, formals, inner, allow_old)
            self._require_bool(bt, e.loc, "forall body")
            return A.TBool()
        raise TypeError(f"unhandled expression {e!r}")

    def _qual_read_type(self, e: A.QualRead, tt, info, formals, binders, allow_old):
        if _is_err(tt):
            return _TERR
        if isinstance(tt, A.TSeq):
            if e.name == "has":
                if len(e.args) != 1:
                    self.error("ARITY", e.loc, "has expects one argument")
                for a in e.args:
                    self.resolve_expr(a, info, formals, binders, allow_old)
                e.builtin = True
                return A.TBool()
            if e.name == "count":
                if e.args:
                    self.error("ARITY", e.loc, "count expects no arguments")
                e.builtin = True
                return A.TInt()
            self.error("UNKNOWN_NAME", e.loc, f"unknown sequence query {e.name}")
            return _TERR
        if isinstance(tt, A.TRef):
            target_info = self.classes.get(tt.class_name)
            if target_info is None:
                self.error("UNKNOWN_NAME", e.loc, f"unknown class {tt.class_name}")
                return _TERR
            feat = target_info.features.get(e.name)
            if feat is None or feat.kind not in ("attribute", "function"):
                self.error(
                    "UNKNOWN_NAME",
                    e.loc,
                    f"unknown query {e.name} of class {tt.class_name}",
                )
                return _TERR
            self._check_args(
                e.name, feat.formals, e.args, info, formals, binders, allow_old, e.loc
            )
            return _subst_generic(feat.result_type, tt)
        self.error("TYPE_MISMATCH", e.loc, f"cannot apply {e.name} to {tt}")
        return _TERR

    def _check_args(self, name, fs, args, info, formals, binders, allow_old, loc):
        if len(fs) != len(args):
            self.error(
                "ARITY",
                loc,
                f"{name} expects {len(fs)} argument(s), got {len(args)}",
            )
        for (fname, ftype), arg in zip(fs, args):
            at = self.resolve_expr(arg, info, formals, binders, allow_old)
            if not _assignable(ftype, at):
                self.error(
                    "TYPE_MISMATCH",
                    loc,
                    f"argument {fname} of {name}: expected {ftype}, got {at}",
                )

    # -- instructions ---------------------------------------------------------

    def resolve_instr(self, i: A.Instruction, info: ClassInfo, formals):
        if isinstance(i, A.Assign):
            target_t = None
            if i.target in info.attributes:
                target_t = info.attributes[i.target]
            elif i.target in formals:
                # structurally resolvable; flagged by the ARG_ASSIGN check
                target_t = formals[i.target]
            else:
                self.error("UNKNOWN_NAME", i.loc, f"unknown assignment target {i.target}")
            et = self.resolve_expr(i.expr, info, formals, {}, allow_old=False)
            if target_t is not None and not _assignable(target_t, et):
                self.error(
                    "TYPE_MISMATCH",
                    i.loc,
                    f"cannot assign {et} to {i.target}: {target_t}",
                )
            return
        if isinstance(i, A.UnqualCall):
            feat = info.features.get(i.name)
            if feat is None or feat.kind != "procedure":
                self.error("UNKNOWN_NAME", i.loc, f"unknown procedure {i.name}")
                return
            self._check_args(i.name, feat.formals, i.args, info, formals, {}, False, i.loc)
            return
        if isinstance(i, A.QualCall):
            tt = self.resolve_expr(i.target, info, formals, {}, allow_old=False)
            if _is_err(tt):
                return
            if not isinstance(tt, A.TRef):
                self.error("TYPE_MISMATCH", i.loc, f"call target must be a reference, got {tt}")
                return
            target_info = self.classes.get(tt.class_name)
            if target_info is None:
                self.error("UNKNOWN_NAME", i.loc, f"unknown class {tt.class_name}")
                return
            feat = target_info.features.get(i.name)
            if feat is None or feat.kind != "procedure":
                self.error(
                    "UNKNOWN_NAME",
                    i.loc,
                    f"unknown procedure {i.name} of class {tt.class_name}",
                )
                return
            self._check_args(i.name, feat.formals, i.args, info, formals, {}, False, i.loc)
            return
        if isinstance(i, A.BuiltinSeqCall):
            st = self.resolve_expr(i.seq, info, formals, {}, allow_old=False)
            if not isinstance(st, A.TSeq) and not _is_err(st):
                self.error("TYPE_MISMATCH", i.loc, f"{i.op} applies to sequences, got {st}")
            arity = {"extend": 1, "remove_item": 1, "new_empty": 0}[i.op]
            if len(i.args) != arity:
                self.error("ARITY", i.loc, f"{i.op} expects {arity} argument(s)")
            for a in i.args:
                self.resolve_expr(a, info, formals, {}, allow_old=False)
            return
        if isinstance(i, A.Creation):
            if i.target in info.attributes:
                tt = info.attributes[i.target]
            elif i.target in formals:
                # structurally resolvable; flagged by the ARG_ASSIGN check
                tt = formals[i.target]
            else:
                self.error("UNKNOWN_NAME", i.loc, f"unknown creation target {i.target}")
                return
            if isinstance(tt, A.TSeq):
                return  # creating a sequence attribute: builtin new_empty semantics
            if not isinstance(tt, A.TRef):
                self.error("TYPE_MISMATCH", i.loc, f"cannot create value of type {tt}")
                return
            target_info = self.classes.get(tt.class_name)
            if target_info is None:
                self.error("UNKNOWN_NAME", i.loc, f"unknown class {tt.class_name}")
                return
            if i.creation_name is not None:
                feat = target_info.features.get(i.creation_name)
                if feat is None or feat.kind != "procedure":
                    self.error(
                        "UNKNOWN_NAME",
                        i.loc,
                        f"unknown creation procedure {i.creation_name}",
                    )
                    return
                self._check_args(
                    i.creation_name, feat.formals, i.args, info, formals, {}, False, i.loc
                )
            return
        if isinstance(i, A.If):
            ct = self.resolve_expr(i.cond, info, formals, {}, allow_old=False)
            self._require_bool(ct, i.loc, "if condition")
            for sub in i.then_branch:
                self.resolve_instr(sub, info, formals)
            for sub in i.else_branch:
                self.resolve_instr(sub, info, formals)
            return
        if isinstance(i, A.Foreach):
            st = self.resolve_expr(i.seq, info, formals, {}, allow_old=False)
            if not isinstance(st, A.TSeq):
                if not _is_err(st):
                    self.error("FORALL_RANGE", i.loc, "across ranges over sequences")
                return
            for sub in i.body:
                # binder behaves like an extra formal inside the loop body
                inner = dict(formals)
                inner[i.binder] = st.elem
                self.resolve_instr(sub, info, inner)
            return
        raise TypeError(f"unhandled instruction {i!r}")


def _subst_generic(t: A.Type, owner: A.TRef) -> A.Type:
    """Generic results are opaque values; type suffices for equality checks."""
    if isinstance(t, A.TGen):
        return A.TGen(f"{owner.class_name}.{t.param}")
    return t


def _compatible(a: A.Type, b: A.Type) -> bool:
    if _is_err(a) or _is_err(b):
        return True
    void = lambda t: isinstance(t, A.TRef) and t.class_name == "$void$"
    if void(a) or void(b):
        return isinstance(a, (A.TRef, A.TSeq)) and isinstance(b, (A.TRef, A.TSeq))
    if isinstance(a, A.TInt) and isinstance(b, A.TInt):
        return True
    if isinstance(a, A.TBool) and isinstance(b, A.TBool):
        return True
    if isinstance(a, A.TGen) and isinstance(b, A.TGen):
        return True
    if isinstance(a, A.TRef) and isinstance(b, A.TRef):
        return a.class_name == b.class_name
    return False


def _assignable(target: A.Type, value: A.Type) -> bool:
    return _compatible(target, value)


def resolve(program: A.Program, include_self_in_visibility: bool = False):
    """Resolve a parsed program. Returns (ResolvedProgram, []) on success or
    (None, diagnostics) when any error diagnostic was produced."""
    r = _Resolver(program, include_self_in_visibility)
    r.run()
    diags = r.diags
    if any(d.severity == "error" for d in diags):
        return None, diags
    return (
        ResolvedProgram(
            program=program,
            classes=r.classes,
            expr_types=r.expr_types,
            include_self_in_visibility=include_self_in_visibility,
        ),
        diags,
    )
