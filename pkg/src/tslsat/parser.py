"""Recursive-descent parser for the TSL surface syntax.

Precedence from tightest to loosest: unary (``!`` ``X`` ``F`` ``G``),
``U``/``R``, ``&&``, ``||``, ``->``, ``<->``.  ``U``, ``R`` and ``->`` are
right associative; ``&&``, ``||`` and ``<->`` associate to the left.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import formula as fm
from .terms import KEYWORDS, Signature, SignatureError, Term, app, cell, is_reserved, pred


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><->|<-|->|&&|\|\||[!\[\](),])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "op"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, signature: Signature | None):
        self.toks = tokenize(text)
        self.i = 0
        self.strict = signature is not None
        self.sig = signature.copy() if signature is not None else Signature()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            self.fail(f"expected '{text}' but found {self._describe(tok)}")
        return tok

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else f"'{tok.text}'"

    def parse(self) -> fm.Formula:
        if self.tok.kind == "eof":
            self.fail("empty formula")
        phi = self.iff()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self._describe(self.tok)}")
        return phi

    def iff(self) -> fm.Formula:
        left = self.imp()
        while self.accept("<->"):
            left = fm.Iff(left, self.imp())
        return left

    def imp(self) -> fm.Formula:
        left = self.disj()
        if self.accept("->"):
            return fm.Implies(left, self.imp())
        return left

    def disj(self) -> fm.Formula:
        left = self.conj()
        while self.accept("||"):
            left = fm.Or(left, self.conj())
        return left

    def conj(self) -> fm.Formula:
        left = self.binary_temporal()
        while self.accept("&&"):
            left = fm.And(left, self.binary_temporal())
        return left

    def binary_temporal(self) -> fm.Formula:
        left = self.unary()
        if self.accept("U"):
            return fm.Until(left, self.binary_temporal())
        if self.accept("R"):
            return fm.Release(left, self.binary_temporal())
        return left

    def unary(self) -> fm.Formula:
        if self.accept("!"):
            return fm.Not(self.unary())
        if self.accept("X"):
            return fm.Next(self.unary())
        if self.accept("F"):
            return fm.Eventually(self.unary())
        if self.accept("G"):
            return fm.Globally(self.unary())
        return self.atom()

    def atom(self) -> fm.Formula:
        tok = self.tok
        if self.accept("true"):
            return fm.TRUE
        if self.accept("false"):
            return fm.false()
        if self.accept("("):
            phi = self.iff()
            self.expect(")")
            return phi
        if self.accept("["):
            target = self.tok
            name = self.name()
            self.declare(target, "cell", name, 0)
            self.expect("<-")
            rhs = self.term()
            self.expect("]")
            return fm.Update(cell(name), rhs)
        if tok.kind == "ident":
            name = self.name()
            if self.tok.text != "(":
                self.fail(f"'{name}' is not a formula (predicates need an argument list)", tok)
            args = self.args()
            self.declare(tok, "predicate", name, len(args))
            return fm.Pred(pred(name, *args))
        self.fail(f"expected a formula but found {self._describe(tok)}")

    def name(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            self.fail(f"expected a name but found {self._describe(tok)}")
        if tok.text in KEYWORDS:
            self.fail(f"keyword '{tok.text}' cannot be used as a name")
        if is_reserved(tok.text):
            self.fail(f"'{tok.text}' is a reserved name")
        self.i += 1
        return tok.text

    def args(self) -> list[Term]:
        self.expect("(")
        out: list[Term] = []
        if self.accept(")"):
            return out
        out.append(self.term())
        while self.accept(","):
            out.append(self.term())
        self.expect(")")
        return out

    def term(self) -> Term:
        tok = self.tok
        name = self.name()
        if self.tok.text == "(":
            args = self.args()
            self.declare(tok, "function", name, len(args))
            return app(name, *args)
        self.declare(tok, "cell", name, 0)
        return cell(name)

    def declare(self, tok: Token, kind: str, name: str, arity: int) -> None:
        table = {"cell": None, "function": self.sig.functions, "predicate": self.sig.predicates}[kind]
        known = name in self.sig.cells if table is None else name in table
        if self.strict and not known:
            self.fail(f"undeclared {kind} '{name}'", tok)
        try:
            match kind:
                case "cell":
                    self.sig.declare_cell(name)
                case "function":
                    self.sig.declare_function(name, arity)
                case "predicate":
                    self.sig.declare_predicate(name, arity)
        except SignatureError as e:
            raise ParseError(str(e), tok.line, tok.col) from None


def parse_formula(text: str, signature: Signature | None = None) -> tuple[fm.Formula, Signature]:
    """Parse surface syntax into a desugared formula and its signature.

    Without a signature, symbols are declared on first use and every later use
    must agree in kind and arity.  With a signature, every symbol must already
    be declared there.
    """
    p = _Parser(text, signature)
    return p.parse(), p.sig


def parse_term(text: str, signature: Signature | None = None) -> Term:
    p = _Parser(text, signature)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p._describe(p.tok)}")
    return t
