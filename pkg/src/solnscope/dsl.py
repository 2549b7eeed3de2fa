"""Parser for the function DSL.

    expr   := term ("+" term)*
    term   := [rational "*"] atom
    atom   := lin(r, ..., r) | abs(xi) | norm1() | exp(aff) | neglog(aff)
            | hinge(aff) | hinge_expdiff(xi, xj) | quadshift(xi, r) | hypind(xi, xj)
    aff    := ["-"] aterm (("+" | "-") aterm)*
    aterm  := rational | xi | rational "*" xi

Coordinates are 1-based in the text (x1, x2, ...) and 0-based in the tree.
``render_expr`` in funcat writes the same grammar back out.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import funcat as FC


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class UnknownAtom(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>x\d+)|(?P<name>[a-z_][a-z0-9_]*)|(?P<op>[-+*(),]))")

ATOMS = ("lin", "abs", "norm1", "exp", "neglog", "hinge", "hinge_expdiff", "quadshift", "hypind")


@dataclass
class _Tok:
    kind: str
    text: str
    col: int  # 1-based


def _tokenize(text: str, line: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", line, col)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, line: int, col0: int):
        self.toks = _tokenize(text, line)
        self.i = 0
        self.line = line
        self.col0 = col0  # offset of the expression inside its line

    def err(self, msg, tok=None, cls=ParseError):
        tok = tok or self.peek()
        return cls(msg, self.line, self.col0 + tok.col - 1)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind=None, text=None) -> _Tok:
        tok = self.peek()
        if (kind and tok.kind != kind) or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            got = "end of input" if tok.kind == "end" else repr(tok.text)
            raise self.err(f"expected {want}, found {got}")
        self.i += 1
        return tok

    def at(self, text) -> bool:
        return self.peek().text == text

    # grammar --------------------------------------------------------------

    def expr(self) -> FC.FuncExpr:
        terms = [self.term()]
        while self.at("+"):
            self.take()
            terms.append(self.term())
        self.take("end")
        return terms[0] if len(terms) == 1 else FC.Sum(tuple(terms))

    def rational(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        return sign * Fraction(self.take("num").text)

    def var(self) -> int:
        tok = self.take("var")
        k = int(tok.text[1:])
        if k < 1:
            raise self.err("coordinates start at x1", tok)
        return k - 1

    def term(self) -> FC.FuncExpr:
        weight = None
        if self.peek().kind == "num" or self.at("-"):
            weight = self.rational()
            self.take("op", "*")
        atom = self.atom()
        return atom if weight is None else FC.Scaled(weight, atom)

    def atom(self) -> FC.FuncExpr:
        tok = self.peek()
        if tok.kind != "name":
            raise self.err("expected an atom name")
        if tok.text not in ATOMS:
            raise self.err(f"unknown atom {tok.text!r}", tok, UnknownAtom)
        self.take()
        open_tok = self.take("op", "(")
        name = tok.text
        if name == "lin":
            coeffs = [self.rational()]
            while self.at(","):
                self.take()
                coeffs.append(self.rational())
            out = FC.Linear(tuple(coeffs))
        elif name == "abs":
            out = FC.Abs(self.var())
        elif name == "norm1":
            out = FC.Norm1()
        elif name in ("exp", "neglog", "hinge"):
            aff = self.affine()
            out = {"exp": FC.Exp, "neglog": FC.NegLog, "hinge": FC.Hinge}[name](aff)
        elif name in ("hinge_expdiff", "hypind"):
            i = self.var()
            self.take("op", ",")
            j = self.var()
            out = FC.HingeExpDiff(i, j) if name == "hinge_expdiff" else FC.HyperbolaIndicator(i, j)
        else:
            i = self.var()
            self.take("op", ",")
            out = FC.QuadShift(i, self.rational())
        if not self.at(")"):
            if self.peek().kind == "end":
                raise self.err("unclosed parenthesis", open_tok)
            self.take("op", ")")
        self.take("op", ")")
        return out

    def affine(self) -> FC.Affine:
        coeffs, const = [], Fraction(0)
        sign = 1
        if self.at("-"):
            self.take()
            sign = -1
        while True:
            tok = self.peek()
            if tok.kind == "var":
                coeffs.append((self.var(), Fraction(sign)))
            elif tok.kind == "num":
                q = Fraction(self.take().text)
                if self.at("*"):
                    self.take()
                    coeffs.append((self.var(), sign * q))
                else:
                    const += sign * q
            else:
                raise self.err("expected a number or a coordinate")
            if self.at("+"):
                sign = 1
            elif self.at("-"):
                sign = -1
            else:
                break
            self.take()
        return FC.Affine(tuple(coeffs), const)


def parse_function(text: str, line: int = 1, col: int = 1) -> FC.FuncExpr:
    """Parse DSL text; errors carry positions relative to the enclosing file."""
    return _Parser(text, line, col).expr()
