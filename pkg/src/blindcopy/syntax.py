"""Reader and writer for the line-oriented clause format.

    fun f/2.  pred P/1.
    P(f(x1,a)) | -Q(x1).
    false.

Variables match ``x[0-9]+``.  Comments run from ``#`` to end of line.
Undeclared symbols get their arity from first use; later uses must agree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from .terms import Atom, Clause, Literal, Signature, Term, app, var

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<state>\{[^}\n]*\})
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:@"[^"\n]*")?)
  | (?P<num>[0-9]+)
  | (?P<punct>->|[()|,./\-:])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"x([0-9]+)$")


class ParseError(Exception):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(Token(kind, s, line, col))
            col += len(s)
        i = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


@dataclass
class ClauseFile:
    signature: Signature = field(default_factory=Signature)
    clauses: List[Clause] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str, signature: Optional[Signature] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = signature.copy() if signature else Signature()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(t.line, t.col, msg)

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text:
            raise self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text:
            self.i += 1
            return True
        return False

    def file(self) -> ClauseFile:
        out = ClauseFile(self.sig)
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text in ("fun", "pred") and self.toks[self.i + 1].kind == "ident" \
                    and self.toks[self.i + 2].text == "/":
                self.declaration()
            elif t.kind == "ident" and t.text == "false" and self.toks[self.i + 1].text == ".":
                self.i += 2
                out.clauses.append(Clause())
            else:
                out.clauses.append(self.clause())
        return out

    def declaration(self) -> None:
        kind = self.tok.text
        self.i += 1
        name_tok = self.tok
        self.i += 1
        self.expect("/")
        if self.tok.kind != "num":
            raise self.error("expected an arity")
        n = int(self.tok.text)
        self.i += 1
        self.expect(".")
        table = self.sig.functions if kind == "fun" else self.sig.predicates
        if name_tok.text in table and table[name_tok.text] != n:
            raise self.error(f"{name_tok.text} redeclared with arity {n}", name_tok)
        table[name_tok.text] = n

    def clause(self) -> Clause:
        lits = [self.literal()]
        while self.accept("|"):
            lits.append(self.literal())
        self.expect(".")
        return Clause(lits)

    def literal(self) -> Literal:
        positive = not self.accept("-")
        t = self.tok
        if t.kind not in ("ident", "state"):
            raise self.error("expected a predicate symbol")
        self.i += 1
        args: Tuple[Term, ...] = ()
        if self.accept("("):
            args = tuple(self.args())
            self.expect(")")
        n = self.sig.predicates.setdefault(t.text, len(args))
        if n != len(args):
            raise self.error(f"predicate {t.text} has arity {n}, used with {len(args)}", t)
        return Literal(positive, Atom(t.text, args))

    def args(self) -> List[Term]:
        out = [self.term()]
        while self.accept(","):
            out.append(self.term())
        return out

    def term(self) -> Term:
        t = self.tok
        if t.kind != "ident" or "@" in t.text:
            raise self.error("expected a term")
        self.i += 1
        m = _VAR.match(t.text)
        if m and self.tok.text != "(":
            idx = int(m.group(1))
            if idx < 1:
                raise self.error("variable indices start at 1", t)
            return var(idx)
        args: List[Term] = []
        if self.accept("("):
            args = self.args()
            self.expect(")")
        n = self.sig.functions.setdefault(t.text, len(args))
        if n != len(args):
            raise self.error(f"function {t.text} has arity {n}, used with {len(args)}", t)
        return app(t.text, *args)


def parse_clauses(text: str, signature: Optional[Signature] = None) -> ClauseFile:
    return _Parser(text, signature).file()


def parse_clause(text: str, signature: Optional[Signature] = None) -> Clause:
    text = text.strip()
    if not text.endswith("."):
        text += "."
    cf = parse_clauses(text, signature)
    if len(cf.clauses) != 1:
        raise ValueError(f"expected exactly one clause in {text!r}")
    return cf.clauses[0]


def parse_term(text: str, signature: Optional[Signature] = None) -> Term:
    p = _Parser(text, signature)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error("trailing input after term")
    return t


def parse_atom(text: str, signature: Optional[Signature] = None) -> Atom:
    p = _Parser(text, signature)
    lit = p.literal()
    if p.tok.kind != "eof" or not lit.positive:
        raise p.error("expected a single positive atom")
    return lit.atom


def read_clause_file(path: str) -> ClauseFile:
    with open(path, encoding="utf-8") as fh:
        return parse_clauses(fh.read())


def format_clause(c: Clause) -> str:
    return f"{c}."


def format_clauses(clauses: Iterable[Clause], signature: Optional[Signature] = None) -> str:
    lines = []
    if signature is not None:
        for f, n in sorted(signature.functions.items()):
            lines.append(f"fun {f}/{n}.")
        for p, n in sorted(signature.predicates.items()):
            if "@" in p or p.startswith("{"):
                continue
            lines.append(f"pred {p}/{n}.")
    lines.extend(format_clause(c) for c in clauses)
    return "\n".join(lines) + "\n"
