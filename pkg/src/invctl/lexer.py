"""Tokenizer for the contract language.

Unicode operators are accepted alongside their ASCII spellings and are
normalized to one canonical token kind each.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, SourceLoc

KEYWORDS = {
    "class",
    "create",
    "feature",
    "require",
    "do",
    "ensure",
    "end",
    "invariant",
    "if",
    "then",
    "else",
    "across",
    "as",
    "loop",
    "old",
    "forall",
    "not",
    "and",
    "or",
    "implies",
    "True",
    "False",
    "Void",
    "Current",
    "detachable",
}

# Unicode operator -> canonical token kind
UNICODE_OPS = {
    "≠": "NEQ",
    "∀": "FORALL",
    "⇒": "IMPLIES",
    "¬": "NOT",
    "∧": "AND",
    "∨": "OR",
}

PUNCT = {
    ":=": "ASSIGN",
    "/=": "NEQ",
    "(": "LPAREN",
    ")": "RPAREN",
    "{": "LBRACE",
    "}": "RBRACE",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ":": "COLON",
    ";": "SEMI",
    ",": "COMMA",
    ".": "DOT",
    "=": "EQ",
    ">": "GT",
    "<": "LT",
    "+": "PLUS",
    "-": "MINUS",
    "|": "BAR",
}


@dataclass(frozen=True)
class Token:
    kind: str  # keyword name, op kind, "IDENT", "INT", "EOF"
    text: str
    loc: SourceLoc


class LexError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(str(diag))
        self.diag = diag


def _ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _ident_part(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        loc = SourceLoc(filename, line, col)
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in UNICODE_OPS:
            tokens.append(Token(UNICODE_OPS[ch], ch, loc))
            i += 1
            col += 1
            continue
        two = text[i : i + 2]
        if two in PUNCT:
            tokens.append(Token(PUNCT[two], two, loc))
            i += 2
            col += 2
            continue
        if ch in PUNCT:
            tokens.append(Token(PUNCT[ch], ch, loc))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], loc))
            col += j - i
            i = j
            continue
        if _ident_start(ch):
            j = i
            while j < n and _ident_part(text[j]):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            # normalize keyword aliases onto operator kinds
            alias = {"forall": "FORALL", "implies": "IMPLIES"}
            kind = alias.get(word, kind)
            tokens.append(Token(kind, word, loc))
            col += j - i
            i = j
            continue
        raise LexError(
            Diagnostic("error", "SYNTAX", loc, f"unexpected character {ch!r}")
        )
    tokens.append(Token("EOF", "", SourceLoc(filename, line, col)))
    return tokens
