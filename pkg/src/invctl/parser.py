"""Recursive-descent parser for the contract language.

Clause and instruction sequences accept semicolons as separators but do not
require them: a sequence continues as long as the next token can start a new
item and is not a closing keyword, which matches how the corpus programs are
laid out.
"""

from __future__ import annotations

from typing import Optional, Union

from . import ast_nodes as A
from .diagnostics import Diagnostic, SourceLoc
from .lexer import LexError, Token, tokenize

SEQ_TYPE_NAMES = {"LIST", "ARRAYED_LIST", "SEQUENCE"}
BUILTIN_SEQ_COMMANDS = {"extend", "remove_item", "new_empty"}

_EXPR_START = {
    "IDENT",
    "INT",
    "True",
    "False",
    "Void",
    "Current",
    "NOT",
    "not",
    "FORALL",
    "old",
    "LPAREN",
}

_INSTR_START = {"IDENT", "Current", "create", "if", "across"}

_BLOCK_END = {
    "end",
    "ensure",
    "else",
    "loop",
    "then",
    "do",
    "require",
    "feature",
    "invariant",
    "class",
    "EOF",
}


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(str(diag))
        self.diag = diag


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.generic_param: Optional[str] = None

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                Diagnostic(
                    "error",
                    "SYNTAX",
                    tok.loc,
                    f"expected {kind}, found {tok.text!r}",
                )
            )
        return self.advance()

    def skip_semis(self):
        while self.at("SEMI"):
            self.advance()

    # -- program ------------------------------------------------------------

    def parse_program(self) -> A.Program:
        classes = []
        self.skip_semis()
        while not self.at("EOF"):
            classes.append(self.parse_class())
            self.skip_semis()
        return A.Program(classes)

    def parse_class(self) -> A.ClassDecl:
        loc = self.expect("class").loc
        name = self.expect("IDENT").text
        generic = None
        if self.at("LBRACKET"):
            self.advance()
            generic = self.expect("IDENT").text
            self.expect("RBRACKET")
        self.generic_param = generic
        creation_names = []
        if self.at("create"):
            self.advance()
            creation_names.append(self.expect("IDENT").text)
            while self.at("COMMA"):
                self.advance()
                creation_names.append(self.expect("IDENT").text)
        features: list[A.Feature] = []
        while self.at("feature"):
            features.extend(self.parse_feature_block())
        invariant = []
        if self.at("invariant"):
            self.advance()
            invariant = self.parse_clause_seq()
        self.expect("end")
        self.generic_param = None
        return A.ClassDecl(
            name=name,
            loc=loc,
            generic_param=generic,
            creation_names=frozenset(creation_names),
            features=features,
            invariant_clauses=invariant,
        )

    # -- features -----------------------------------------------------------

    def parse_feature_block(self) -> list[A.Feature]:
        self.expect("feature")
        export: Union[str, frozenset] = A.ALL_CLIENTS
        if self.at("LBRACE"):
            self.advance()
            names = []
            if self.at("IDENT"):
                names.append(self.advance().text)
                while self.at("COMMA"):
                    self.advance()
                    names.append(self.expect("IDENT").text)
            self.expect("RBRACE")
            if names == ["NONE"]:
                export = frozenset()
            elif names == ["ANY"]:
                export = A.ALL_CLIENTS
            else:
                export = frozenset(names)
        feats = []
        self.skip_semis()
        while self.at("IDENT"):
            for f in self.parse_feature_decl():
                f.export_spec = export
                feats.append(f)
            self.skip_semis()
        return feats

    def parse_feature_decl(self) -> list[A.Feature]:
        loc = self.peek().loc
        names = [self.expect("IDENT").text]
        while self.at("COMMA"):
            self.advance()
            names.append(self.expect("IDENT").text)
        if self.at("LPAREN"):
            if len(names) != 1:
                raise ParseError(
                    Diagnostic("error", "SYNTAX", loc, "routine takes one name")
                )
            return [self.parse_routine(names[0], loc)]
        if self.at("COLON"):
            self.advance()
            typ = self.parse_type()
            if self.at("require", "do") and len(names) == 1:
                # function without arguments
                return [self.parse_routine_tail(names[0], loc, [], typ)]
            return [
                A.Feature(name=n, kind="attribute", loc=loc, result_type=typ)
                for n in names
            ]
        if self.at("require", "do"):
            if len(names) != 1:
                raise ParseError(
                    Diagnostic("error", "SYNTAX", loc, "routine takes one name")
                )
            return [self.parse_routine_tail(names[0], loc, [], None)]
        raise ParseError(
            Diagnostic(
                "error",
                "SYNTAX",
                self.peek().loc,
                f"expected feature declaration near {self.peek().text!r}",
            )
        )

    def parse_routine(self, name: str, loc: SourceLoc) -> A.Feature:
        self.expect("LPAREN")
        formals: list[tuple[str, A.Type]] = []
        while not self.at("RPAREN"):
            group = [self.expect("IDENT").text]
            while self.at("COMMA"):
                self.advance()
                group.append(self.expect("IDENT").text)
            self.expect("COLON")
            typ = self.parse_type()
            formals.extend((g, typ) for g in group)
            if self.at("SEMI"):
                self.advance()
        self.expect("RPAREN")
        result = None
        if self.at("COLON"):
            self.advance()
            result = self.parse_type()
        return self.parse_routine_tail(name, loc, formals, result)

    def parse_routine_tail(self, name, loc, formals, result) -> A.Feature:
        pre = []
        if self.at("require"):
            self.advance()
            pre = self.parse_clause_seq()
        self.expect("do")
        body = self.parse_instr_seq()
        post = []
        if self.at("ensure"):
            self.advance()
            post = self.parse_clause_seq()
        self.expect("end")
        kind = "function" if result is not None else "procedure"
        return A.Feature(
            name=name,
            kind=kind,
            loc=loc,
            formals=formals,
            result_type=result,
            pre_clauses=pre,
            post_clauses=post,
            body=body,
        )

    def parse_type(self) -> A.Type:
        if self.at("detachable"):
            self.advance()  # accepted and ignored; all references are Void-able
        name = self.expect("IDENT").text
        inner = None
        if self.at("LBRACKET"):
            self.advance()
            inner = self.parse_type()
            self.expect("RBRACKET")
        if name == "INTEGER":
            return A.TInt()
        if name == "BOOLEAN":
            return A.TBool()
        if name in SEQ_TYPE_NAMES:
            return A.TSeq(inner if inner is not None else A.TRef("ANY"))
        if self.generic_param is not None and name == self.generic_param:
            return A.TGen(name)
        return A.TRef(name)

    # -- assertions ---------------------------------------------------------

    def parse_clause_seq(self) -> list[A.AssertionClause]:
        clauses = [self.parse_clause()]
        while True:
            self.skip_semis()
            if self.peek().kind in _BLOCK_END:
                break
            if self.peek().kind not in _EXPR_START:
                break
            clauses.append(self.parse_clause())
        return clauses

    def parse_clause(self) -> A.AssertionClause:
        loc = self.peek().loc
        tag = None
        if self.at("IDENT") and self.peek(1).kind == "COLON":
            tag = self.advance().text
            self.advance()
        expr = self.parse_expr()
        return A.AssertionClause(tag=tag, expr=expr, loc=loc)

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        if self.at("FORALL"):
            loc = self.advance().loc
            binder = self.expect("IDENT").text
            self.expect("COLON")
            seq = self.parse_implies()
            self.expect("BAR")
            body = self.parse_expr()
            return A.ForallExpr(loc=loc, binder=binder, seq=seq, body=body)
        return self.parse_implies()

    def parse_implies(self) -> A.Expr:
        left = self.parse_or()
        if self.at("IMPLIES"):
            loc = self.advance().loc
            right = self.parse_implies()
            return A.BinBool(loc=loc, op="implies", left=left, right=right)
        return left

    def parse_or(self) -> A.Expr:
        left = self.parse_and()
        while self.at("or", "OR"):
            loc = self.advance().loc
            right = self.parse_and()
            left = A.BinBool(loc=loc, op="or", left=left, right=right)
        return left

    def parse_and(self) -> A.Expr:
        left = self.parse_not()
        while self.at("and", "AND"):
            loc = self.advance().loc
            op = "and"
            if self.at("then"):
                self.advance()
                op = "and then"
            right = self.parse_not()
            left = A.BinBool(loc=loc, op=op, left=left, right=right)
        return left

    def parse_not(self) -> A.Expr:
        if self.at("not", "NOT"):
            loc = self.advance().loc
            return A.Not(loc=loc, operand=self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> A.Expr:
        left = self.parse_additive()
        if self.at("EQ"):
            loc = self.advance().loc
            return A.Eq(loc=loc, left=left, right=self.parse_additive())
        if self.at("NEQ"):
            loc = self.advance().loc
            return A.Ne(loc=loc, left=left, right=self.parse_additive())
        if self.at("GT"):
            loc = self.advance().loc
            return A.Gt(loc=loc, left=left, right=self.parse_additive())
        if self.at("LT"):
            loc = self.advance().loc
            right = self.parse_additive()
            return A.Gt(loc=loc, left=right, right=left)
        return left

    def parse_additive(self) -> A.Expr:
        left = self.parse_postfix()
        while self.at("PLUS", "MINUS"):
            tok = self.advance()
            right = self.parse_postfix()
            cls = A.Plus if tok.kind == "PLUS" else A.Minus
            left = cls(loc=tok.loc, left=left, right=right)
        return left

    def parse_postfix(self) -> A.Expr:
        expr = self.parse_primary()
        while self.at("DOT"):
            loc = self.advance().loc
            name = self.expect("IDENT").text
            args = self.parse_args() if self.at("LPAREN") else []
            builtin = name in ("has", "count")
            expr = A.QualRead(
                loc=loc, target=expr, name=name, args=args, builtin=builtin
            )
        return expr

    def parse_args(self) -> list[A.Expr]:
        self.expect("LPAREN")
        args = []
        if not self.at("RPAREN"):
            args.append(self.parse_expr())
            while self.at("COMMA"):
                self.advance()
                args.append(self.parse_expr())
        self.expect("RPAREN")
        return args

    def parse_primary(self) -> A.Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return A.IntLit(loc=tok.loc, value=int(tok.text))
        if tok.kind == "True":
            self.advance()
            return A.BoolLit(loc=tok.loc, value=True)
        if tok.kind == "False":
            self.advance()
            return A.BoolLit(loc=tok.loc, value=False)
        if tok.kind == "Void":
            self.advance()
            return A.VoidLit(loc=tok.loc)
        if tok.kind == "Current":
            self.advance()
            return A.CurrentExpr(loc=tok.loc)
        if tok.kind == "old":
            self.advance()
            operand = self.parse_postfix()
            return A.OldExpr(loc=tok.loc, operand=operand)
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_expr()
            self.expect("RPAREN")
            return inner
        if tok.kind == "IDENT":
            self.advance()
            if self.at("LPAREN"):
                args = self.parse_args()
                return A.UnqualCallExpr(loc=tok.loc, name=tok.text, args=args)
            return A.NameRef(loc=tok.loc, name=tok.text)
        raise ParseError(
            Diagnostic(
                "error", "SYNTAX", tok.loc, f"expected expression, found {tok.text!r}"
            )
        )

    # -- instructions -------------------------------------------------------

    def parse_instr_seq(self) -> list[A.Instruction]:
        instrs = []
        while True:
            self.skip_semis()
            if self.peek().kind in _BLOCK_END:
                break
            if self.peek().kind not in _INSTR_START:
                break
            instrs.append(self.parse_instr())
        return instrs

    def parse_instr(self) -> A.Instruction:
        tok = self.peek()
        if tok.kind == "create":
            return self.parse_creation()
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "across":
            return self.parse_across()
        loc = tok.loc
        expr = self.parse_postfix()
        if self.at("ASSIGN"):
            self.advance()
            if not isinstance(expr, A.NameRef):
                raise ParseError(
                    Diagnostic(
                        "error", "SYNTAX", loc, "assignment target must be a name"
                    )
                )
            return A.Assign(loc=loc, target=expr.name, expr=self.parse_expr())
        return self._expr_to_call(expr, loc)

    def _expr_to_call(self, expr: A.Expr, loc: SourceLoc) -> A.Instruction:
        if isinstance(expr, A.NameRef):
            return A.UnqualCall(loc=loc, name=expr.name, args=[])
        if isinstance(expr, A.UnqualCallExpr):
            return A.UnqualCall(loc=loc, name=expr.name, args=expr.args)
        if isinstance(expr, A.QualRead):
            if expr.name in BUILTIN_SEQ_COMMANDS:
                return A.BuiltinSeqCall(
                    loc=loc, seq=expr.target, op=expr.name, args=expr.args
                )
            return A.QualCall(loc=loc, target=expr.target, name=expr.name, args=expr.args)
        raise ParseError(
            Diagnostic("error", "SYNTAX", loc, "expected an instruction")
        )

    def parse_creation(self) -> A.Instruction:
        loc = self.expect("create").loc
        explicit = None
        if self.at("LBRACE"):
            self.advance()
            start = self.pos
            self.parse_type()
            explicit = " ".join(t.text for t in self.tokens[start : self.pos])
            self.expect("RBRACE")
        target = self.expect("IDENT").text
        creation_name = None
        args: list[A.Expr] = []
        if self.at("DOT"):
            self.advance()
            creation_name = self.expect("IDENT").text
            if self.at("LPAREN"):
                args = self.parse_args()
        return A.Creation(
            loc=loc,
            target=target,
            creation_name=creation_name,
            args=args,
            explicit_type=explicit,
        )

    def parse_if(self) -> A.Instruction:
        loc = self.expect("if").loc
        cond = self.parse_expr()
        self.expect("then")
        then_branch = self.parse_instr_seq()
        else_branch = []
        if self.at("else"):
            self.advance()
            else_branch = self.parse_instr_seq()
        self.expect("end")
        return A.If(loc=loc, cond=cond, then_branch=then_branch, else_branch=else_branch)

    def parse_across(self) -> A.Instruction:
        loc = self.expect("across").loc
        seq = self.parse_postfix()
        self.expect("as")
        binder = self.expect("IDENT").text
        self.expect("loop")
        body = self.parse_instr_seq()
        self.expect("end")
        return A.Foreach(loc=loc, binder=binder, seq=seq, body=body)


def parse_program(text: str, filename: str = "<input>"):
    """Parse source text. Returns (Program, []) or (None, diagnostics)."""
    try:
        tokens = tokenize(text, filename)
        parser = Parser(tokens)
        program = parser.parse_program()
    except (LexError, ParseError) as exc:
        return None, [exc.diag]
    # duplicate class names are a parse-level error
    seen: dict[str, A.ClassDecl] = {}
    diags = []
    for cls in program.classes:
        if cls.name in seen:
            diags.append(
                Diagnostic(
                    "error",
                    "DUPLICATE_CLASS",
                    cls.loc,
                    f"class {cls.name} declared twice",
                )
            )
        seen[cls.name] = cls
    if diags:
        return None, diags
    return program, []
