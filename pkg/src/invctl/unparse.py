"""Canonical ASCII renderer for parsed programs.

Round-trip guarantee: reparsing the output yields a structurally equal tree
(source locations aside).
"""

from __future__ import annotations

from dataclasses import fields, is_dataclass

from . import ast_nodes as A

_PREC = {
    "forall": 0,
    "implies": 1,
    "or": 2,
    "and": 3,
    "and then": 3,
    "not": 4,
    "cmp": 5,
    "add": 6,
    "postfix": 7,
}


def unparse_expr(e: A.Expr) -> str:
    return _expr(e, 0)


def _paren(text: str, prec: int, outer: int) -> str:
    return f"({text})" if prec < outer else text


def _expr(e: A.Expr, outer: int) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, A.VoidLit):
        return "Void"
    if isinstance(e, A.CurrentExpr):
        return "Current"
    if isinstance(e, A.NameRef):
        return e.name
    if isinstance(e, A.UnqualCallExpr):
        return f"{e.name} ({', '.join(_expr(a, 0) for a in e.args)})"
    if isinstance(e, A.QualRead):
        target = _expr(e.target, _PREC["postfix"])
        if not isinstance(
            e.target, (A.NameRef, A.QualRead, A.CurrentExpr, A.UnqualCallExpr)
        ):
            target = f"({_expr(e.target, 0)})"
        call = f"{target}.{e.name}"
        if e.args:
            call += f" ({', '.join(_expr(a, 0) for a in e.args)})"
        return call
    if isinstance(e, A.Eq):
        t = f"{_expr(e.left, _PREC['add'])} = {_expr(e.right, _PREC['add'])}"
        return _paren(t, _PREC["cmp"], outer)
    if isinstance(e, A.Ne):
        t = f"{_expr(e.left, _PREC['add'])} /= {_expr(e.right, _PREC['add'])}"
        return _paren(t, _PREC["cmp"], outer)
    if isinstance(e, A.Gt):
        t = f"{_expr(e.left, _PREC['add'])} > {_expr(e.right, _PREC['add'])}"
        return _paren(t, _PREC["cmp"], outer)
    if isinstance(e, A.Plus):
        t = f"{_expr(e.left, _PREC['add'])} + {_expr(e.right, _PREC['postfix'])}"
        return _paren(t, _PREC["add"], outer)
    if isinstance(e, A.Minus):
        t = f"{_expr(e.left, _PREC['add'])} - {_expr(e.right, _PREC['postfix'])}"
        return _paren(t, _PREC["add"], outer)
    if isinstance(e, A.Not):
        t = f"not {_expr(e.operand, _PREC['not'])}"
        return _paren(t, _PREC["not"], outer)
    if isinstance(e, A.BinBool):
        p = _PREC[e.op]
        t = f"{_expr(e.left, p)} {e.op} {_expr(e.right, p + 1 if e.op == 'implies' else p)}"
        # implies is right associative; and/or chains are left associative
        if e.op == "implies":
            t = f"{_expr(e.left, p + 1)} implies {_expr(e.right, p)}"
        return _paren(t, p, outer)
    if isinstance(e, A.OldExpr):
        inner = _expr(e.operand, _PREC["postfix"])
        t = f"old {inner}"
        return f"({t})" if outer >= _PREC["postfix"] else t
    if isinstance(e, A.ForallExpr):
        t = f"forall {e.binder}: {_expr(e.seq, _PREC['postfix'])} | {_expr(e.body, 1)}"
        return _paren(t, 0, outer)
    raise TypeError(f"unknown expression node {e!r}")


def _clauses(clauses: list[A.AssertionClause]) -> str:
    parts = []
    for c in clauses:
        tag = f"{c.tag}: " if c.tag else ""
        parts.append(f"{tag}{_expr(c.expr, 0)}")
    return "; ".join(parts)


def _type(t: A.Type) -> str:
    return str(t)


def _instr(i: A.Instruction, indent: str) -> list[str]:
    if isinstance(i, A.Assign):
        return [f"{indent}{i.target} := {_expr(i.expr, 0)}"]
    if isinstance(i, A.UnqualCall):
        args = f" ({', '.join(_expr(a, 0) for a in i.args)})" if i.args else ""
        return [f"{indent}{i.name}{args}"]
    if isinstance(i, A.QualCall):
        args = f" ({', '.join(_expr(a, 0) for a in i.args)})" if i.args else ""
        return [f"{indent}{_expr(i.target, _PREC['postfix'])}.{i.name}{args}"]
    if isinstance(i, A.BuiltinSeqCall):
        args = f" ({', '.join(_expr(a, 0) for a in i.args)})" if i.args else ""
        return [f"{indent}{_expr(i.seq, _PREC['postfix'])}.{i.op}{args}"]
    if isinstance(i, A.Creation):
        text = f"{indent}create "
        if i.explicit_type:
            text += f"{{{i.explicit_type}}} "
        text += i.target
        if i.creation_name:
            text += f".{i.creation_name}"
            if i.args:
                text += f" ({', '.join(_expr(a, 0) for a in i.args)})"
        return [text]
    if isinstance(i, A.If):
        lines = [f"{indent}if {_expr(i.cond, 0)} then"]
        for sub in i.then_branch:
            lines.extend(_instr(sub, indent + "  "))
        if i.else_branch:
            lines.append(f"{indent}else")
            for sub in i.else_branch:
                lines.extend(_instr(sub, indent + "  "))
        lines.append(f"{indent}end")
        return lines
    if isinstance(i, A.Foreach):
        lines = [f"{indent}across {_expr(i.seq, _PREC['postfix'])} as {i.binder} loop"]
        for sub in i.body:
            lines.extend(_instr(sub, indent + "  "))
        lines.append(f"{indent}end")
        return lines
    raise TypeError(f"unknown instruction node {i!r}")


def _feature(f: A.Feature) -> list[str]:
    if f.kind == "attribute":
        return [f"  {f.name}: {_type(f.result_type)}"]
    sig = f"  {f.name}"
    if f.formals:
        groups = ", ".join(f"{n}: {_type(t)}" for n, t in f.formals)
        sig += f" ({groups})"
    if f.kind == "function":
        sig += f": {_type(f.result_type)}"
    lines = [sig]
    if f.pre_clauses:
        lines.append(f"    require {_clauses(f.pre_clauses)}")
    lines.append("    do")
    for i in f.body:
        lines.extend(_instr(i, "      "))
    if f.post_clauses:
        lines.append(f"    ensure {_clauses(f.post_clauses)}")
    lines.append("    end")
    return lines


def unparse(program: A.Program) -> str:
    lines: list[str] = []
    for cls in program.classes:
        header = f"class {cls.name}"
        if cls.generic_param:
            header += f" [{cls.generic_param}]"
        if cls.creation_names:
            header += " create " + ", ".join(sorted(cls.creation_names))
        lines.append(header)
        # regroup features by export spec, preserving declaration order
        current_spec = object()
        for f in cls.features:
            if f.export_spec != current_spec:
                current_spec = f.export_spec
                if f.export_spec == A.ALL_CLIENTS:
                    lines.append("feature")
                elif not f.export_spec:
                    lines.append("feature {NONE}")
                else:
                    lines.append("feature {" + ", ".join(sorted(f.export_spec)) + "}")
            lines.extend(_feature(f))
        if cls.invariant_clauses:
            lines.append(f"invariant {_clauses(cls.invariant_clauses)}")
        lines.append("end")
        lines.append("")
    return "\n".join(lines)


def ast_equal(a, b) -> bool:
    """Structural equality ignoring source locations and resolver bindings."""
    if is_dataclass(a) and is_dataclass(b):
        if type(a) is not type(b):
            return False
        for fld in fields(a):
            if fld.name in ("loc", "binding"):
                continue
            if not ast_equal(getattr(a, fld.name), getattr(b, fld.name)):
                return False
        return True
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    return a == b
