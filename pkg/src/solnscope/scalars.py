"""Exact scalars: rationals plus symbolic constants such as e and log(2).

Rationals stay ``Fraction``.  Anything irrational is a sympy expression,
and every order comparison between numbers goes through a 128-bit
interval enclosure (mpmath.iv).  If the enclosure cannot separate the two
sides and sympy cannot prove them equal, ``Undecidable`` is raised instead
of guessing.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Union

import mpmath
import sympy as sp
from sympy.printing.str import StrPrinter

PREC_BITS = 128

Scalar = Union[Fraction, sp.Expr]


class Undecidable(ArithmeticError):
    """An exact comparison could not be certified."""


class _Infinity:
    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"

    def __neg__(self):
        return NEG_INF if self.sign > 0 else POS_INF

    def __reduce__(self):
        return (_inf_of, (self.sign,))


def _inf_of(sign):
    return POS_INF if sign > 0 else NEG_INF


POS_INF = _Infinity(1)
NEG_INF = _Infinity(-1)


def is_inf(x) -> bool:
    return isinstance(x, _Infinity)


def to_sym(x) -> sp.Expr:
    if isinstance(x, Fraction):
        return sp.Rational(x.numerator, x.denominator)
    if isinstance(x, int):
        return sp.Integer(x)
    if isinstance(x, sp.Basic):
        return x
    if is_inf(x):
        return sp.oo if x.sign > 0 else -sp.oo
    raise TypeError(f"not an exact scalar: {x!r}")


def norm(x) -> Scalar:
    """Canonical form: Fraction when rational, sympy expression otherwise."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, sp.Basic):
        if x.is_Rational:
            return Fraction(int(x.p), int(x.q))
        if x is sp.oo:
            return POS_INF
        if x is -sp.oo:
            return NEG_INF
        return x
    if is_inf(x):
        return x
    raise TypeError(f"not an exact scalar: {x!r}")


def is_rational(x) -> bool:
    return isinstance(norm(x), Fraction)


def is_symbolic(x) -> bool:
    x = norm(x)
    return isinstance(x, sp.Basic) and bool(x.free_symbols)


def add(a, b) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return norm(to_sym(a) + to_sym(b))


def sub(a, b) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a - b
    return norm(to_sym(a) - to_sym(b))


def mul(a, b) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    return norm(to_sym(a) * to_sym(b))


def div(a, b) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a / b
    return norm(to_sym(a) / to_sym(b))


def neg(a) -> Scalar:
    if isinstance(a, Fraction):
        return -a
    return norm(-to_sym(a))


def exp(a) -> Scalar:
    return norm(sp.exp(to_sym(a)))


def log(a) -> Scalar:
    return norm(sp.log(to_sym(a)))


def sqrt(a) -> Scalar:
    return norm(sp.sqrt(to_sym(a)))


def vadd(u, v) -> tuple:
    return tuple(add(a, b) for a, b in zip(u, v))


def vsub(u, v) -> tuple:
    return tuple(sub(a, b) for a, b in zip(u, v))


def vdot(u, v) -> Scalar:
    total: Scalar = Fraction(0)
    for a, b in zip(u, v):
        if a != 0 and b != 0:
            total = add(total, mul(a, b))
    return total


def is_rational_vec(v) -> bool:
    return all(isinstance(norm(a), Fraction) for a in v)


# --------------------------------------------------------------------------
# certified comparison

iv = mpmath.iv


def _lambertw_enclosure(y):
    """Enclosure of W₀ on an interval y ⊂ (−1/e, ∞)."""
    out = []
    for end in (y.a, y.b):
        with mpmath.workprec(PREC_BITS + 40):
            w = mpmath.lambertw(mpmath.mpf(end)).real
        eps = mpmath.mpf(2) ** (-PREC_BITS + 8)
        lo, hi = iv.mpf(w) - eps, iv.mpf(w) + eps
        # w·e^w is increasing on [−1, ∞); check lo·e^lo ≤ end ≤ hi·e^hi
        if not ((lo * iv.exp(lo)).b <= end.b and (hi * iv.exp(hi)).a >= end.a):
            raise Undecidable("could not enclose LambertW")
        out.append((lo, hi))
    return iv.mpf([out[0][0].a, out[1][1].b])


def enclose(x):
    """A 128-bit interval containing the exact value of x."""
    x = norm(x)
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    if is_inf(x):
        raise Undecidable("cannot enclose an infinity")
    old = iv.prec
    iv.prec = PREC_BITS
    try:
        return _enc(x)
    finally:
        iv.prec = old


def _enc(e):
    if e.free_symbols:
        raise Undecidable(f"expression has free symbols: {e}")
    if e.is_Rational:
        return iv.mpf(int(e.p)) / iv.mpf(int(e.q))
    if e is sp.E:
        return iv.e
    if e is sp.pi:
        return iv.pi
    if isinstance(e, sp.Add):
        total = iv.mpf(0)
        for a in e.args:
            total = total + _enc(a)
        return total
    if isinstance(e, sp.Mul):
        total = iv.mpf(1)
        for a in e.args:
            total = total * _enc(a)
        return total
    if isinstance(e, sp.Pow):
        base, ex = e.args
        b = _enc(base)
        if ex.is_Integer:
            k = int(ex)
            if k >= 0:
                return b ** k
            return iv.mpf(1) / (b ** (-k))
        if ex == sp.Rational(1, 2):
            return iv.sqrt(b)
        return iv.exp(_enc(ex) * iv.log(b))
    if isinstance(e, sp.exp):
        return iv.exp(_enc(e.args[0]))
    if isinstance(e, sp.log):
        a = _enc(e.args[0])
        if a.a <= 0:
            raise Undecidable(f"log argument not certified positive: {e}")
        return iv.log(a)
    if isinstance(e, sp.LambertW) and len(e.args) == 1:
        return _lambertw_enclosure(_enc(e.args[0]))
    if isinstance(e, sp.Abs):
        a = _enc(e.args[0])
        if a.a >= 0:
            return a
        if a.b <= 0:
            return -a
        return iv.mpf([0, max(-a.a, a.b)])
    raise Undecidable(f"no interval rule for {type(e).__name__}")


def sign(x) -> int:
    x = norm(x)
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    if is_inf(x):
        return x.sign
    box = enclose(x)
    if box.a > 0:
        return 1
    if box.b < 0:
        return -1
    if sp.simplify(x) == 0:
        return 0
    raise Undecidable(f"sign of {x} not certified at {PREC_BITS} bits")


def cmp(a, b) -> int:
    if is_inf(a) or is_inf(b):
        if is_inf(a) and is_inf(b):
            return (a.sign > b.sign) - (a.sign < b.sign)
        return a.sign if is_inf(a) else -b.sign
    return sign(sub(a, b))


def lt(a, b) -> bool:
    return cmp(a, b) < 0


def le(a, b) -> bool:
    return cmp(a, b) <= 0


def eq(a, b) -> bool:
    return cmp(a, b) == 0


def smin(a, b):
    return a if le(a, b) else b


def smax(a, b):
    return a if le(b, a) else b


def to_float(x) -> float:
    x = norm(x)
    if isinstance(x, Fraction):
        return float(x)
    if is_inf(x):
        return float("inf") if x.sign > 0 else float("-inf")
    return float(sp.N(x, 30))


# --------------------------------------------------------------------------
# rendering


class _Printer(StrPrinter):
    def _print_Exp1(self, expr):
        return "e"

    def _print_Rational(self, expr):
        return f"{expr.p}/{expr.q}"


_printer = _Printer({"order": "none"})


def render(x) -> str:
    if is_inf(x):
        return "inf" if x.sign > 0 else "-inf"
    x = norm(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return _printer.doprint(x).replace(" ", "")


def render_vec(v) -> str:
    return "(" + ",".join(render(a) for a in v) + ")"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())
