"""Exact linear programming over the rationals.

Dense two-phase tableau simplex with Bland's rule (so it cannot cycle),
plus Fourier–Motzkin elimination for projecting H-polyhedra.  Variables
are free unless stated otherwise; inequality rows may be strict, which is
how relative interiors and open intervals are handled.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: tuple | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(T: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    row = T[r]
    piv = row[c]
    if piv != 1:
        inv = 1 / piv
        row = [a * inv if a else a for a in row]
        T[r] = row
    nz = [j for j, a in enumerate(row) if a]
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
    f = obj[c]
    if f:
        for j in nz:
            obj[j] -= f * row[j]


def _simplex(T, obj, basis, allowed) -> str:
    """Minimize; obj holds reduced costs with obj[-1] = -(current value)."""
    ncols = len(obj) - 1
    while True:
        enter = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        r = best[1]
        _pivot(T, obj, r, enter)
        basis[r] = enter


def linprog(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    nonneg: Sequence[bool] | None = None,
    maximize: bool = False,
) -> LPResult:
    """Optimize c·x subject to A_ub x ≤ b_ub, A_eq x = b_eq.

    Variables are free by default; pass ``nonneg`` to mark some as ≥ 0.
    """
    n = len(c)
    if nonneg is None:
        nonneg = [False] * n
    # column layout: for each original variable either one column (x ≥ 0) or two (x⁺, x⁻)
    colmap: list[tuple[int, ...]] = []
    k = 0
    for j in range(n):
        if nonneg[j]:
            colmap.append((k,))
            k += 1
        else:
            colmap.append((k, k + 1))
            k += 2
    nx = k
    n_ub, n_eq = len(A_ub), len(A_eq)
    nslack = n_ub
    m = n_ub + n_eq

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(n_ub):
        row = [ZERO] * (nx + nslack)
        for j, a in enumerate(A_ub[i]):
            if a:
                cols = colmap[j]
                row[cols[0]] = Fraction(a)
                if len(cols) == 2:
                    row[cols[1]] = -Fraction(a)
        row[nx + i] = ONE
        rows.append(row)
        rhs.append(Fraction(b_ub[i]))
    for i in range(n_eq):
        row = [ZERO] * (nx + nslack)
        for j, a in enumerate(A_eq[i]):
            if a:
                cols = colmap[j]
                row[cols[0]] = Fraction(a)
                if len(cols) == 2:
                    row[cols[1]] = -Fraction(a)
        rows.append(row)
        rhs.append(Fraction(b_eq[i]))

    # artificial variables only where the slack cannot start in the basis
    basis: list[int] = []
    art_rows: list[int] = []
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
        if i < n_ub and rows[i][nx + i] == 1:
            basis.append(nx + i)
        else:
            basis.append(-1)
            art_rows.append(i)
    nart = len(art_rows)
    ncols = nx + nslack + nart
    T = []
    for i in range(m):
        row = rows[i] + [ZERO] * nart + [rhs[i]]
        T.append(row)
    for a_idx, i in enumerate(art_rows):
        T[i][nx + nslack + a_idx] = ONE
        basis[i] = nx + nslack + a_idx

    allowed = [True] * ncols
    if nart:
        obj = [ZERO] * (ncols + 1)
        for i in art_rows:
            for j in range(ncols + 1):
                obj[j] -= T[i][j]
        for a_idx in range(nart):
            obj[nx + nslack + a_idx] = ZERO
        _simplex(T, obj, basis, allowed)
        if -obj[-1] != 0:
            return LPResult("infeasible")
        # drive remaining artificials out of the basis
        for i in range(len(T) - 1, -1, -1):
            if basis[i] >= nx + nslack:
                j = next((j for j in range(nx + nslack) if T[i][j] != 0), None)
                if j is None:
                    del T[i]
                    del basis[i]
                else:
                    _pivot(T, [ZERO] * (ncols + 1), i, j)
                    basis[i] = j
        for a_idx in range(nart):
            allowed[nx + nslack + a_idx] = False

    # phase 2
    cost = [ZERO] * (ncols + 1)
    sign = -1 if maximize else 1
    for j in range(n):
        cj = sign * Fraction(c[j])
        cols = colmap[j]
        cost[cols[0]] = cj
        if len(cols) == 2:
            cost[cols[1]] = -cj
    obj = list(cost)
    for i, bj in enumerate(basis):
        f = obj[bj]
        if f:
            obj = [o - f * t for o, t in zip(obj, T[i])]
    status = _simplex(T, obj, basis, allowed)
    if status == "unbounded":
        return LPResult("unbounded")
    z = [ZERO] * ncols
    for i, bj in enumerate(basis):
        z[bj] = T[i][-1]
    x = []
    for j in range(n):
        cols = colmap[j]
        x.append(z[cols[0]] - (z[cols[1]] if len(cols) == 2 else 0))
    value = sum((Fraction(cj) * xj for cj, xj in zip(c, x)), ZERO)
    return LPResult("optimal", tuple(x), value)


def feasible_point(n, A_ub=(), b_ub=(), A_eq=(), b_eq=(), strict=(), b_strict=()):
    """A point satisfying the system (strict rows strictly), or None.

    Strict rows are handled by maximizing a common slack s ≤ 1; the system
    is feasible iff the optimal slack is positive.
    """
    if not strict:
        res = linprog([ZERO] * n, A_ub, b_ub, A_eq, b_eq)
        return res.x if res.ok else None
    A = [list(r) + [ZERO] for r in A_ub]
    A += [list(r) + [ONE] for r in strict]
    A.append([ZERO] * n + [ONE])
    b = list(b_ub) + list(b_strict) + [ONE]
    E = [list(r) + [ZERO] for r in A_eq]
    res = linprog([ZERO] * n + [ONE], A, b, E, b_eq, maximize=True)
    if not res.ok or res.value <= 0:
        return None
    return res.x[:n]


# --------------------------------------------------------------------------
# Fourier–Motzkin elimination

Row = tuple  # (coeffs tuple, rhs, strict flag) meaning coeffs·x ≤ rhs (or <)


def _normalize(row: Row) -> Row:
    a, b, s = row
    scale = next((abs(v) for v in a if v != 0), None)
    if scale is None or scale == 1:
        return (tuple(a), b, s)
    return (tuple(v / scale for v in a), b / scale, s)


def _dedupe(rows: list[Row]) -> list[Row]:
    best: dict[tuple, tuple[Fraction, bool]] = {}
    for a, b, s in map(_normalize, rows):
        if a in best:
            b0, s0 = best[a]
            if b < b0 or (b == b0 and s and not s0):
                best[a] = (b, s)
        else:
            best[a] = (b, s)
    return [(a, b, s) for a, (b, s) in best.items()]


def remove_redundant(rows: list[Row], eqs: Sequence[tuple] = ()) -> list[Row]:
    """Drop inequality rows implied by the others (LP check, closure-sound)."""
    rows = _dedupe(rows)
    trivial = [r for r in rows if all(v == 0 for v in r[0])]
    rows = [r for r in rows if not all(v == 0 for v in r[0])]
    bad = [r for r in trivial if r[1] < 0 or (r[1] == 0 and r[2])]
    if bad:
        return bad[:1]
    n = len(rows[0][0]) if rows else 0
    kept = list(rows)
    i = 0
    A_eq = [e[0] for e in eqs]
    b_eq = [e[1] for e in eqs]
    while i < len(kept):
        a, b, s = kept[i]
        others = kept[:i] + kept[i + 1:]
        res = linprog(a, [o[0] for o in others], [o[1] for o in others], A_eq, b_eq, maximize=True)
        redundant = False
        if res.status == "infeasible":
            redundant = False
        elif res.ok and (res.value < b or (res.value == b and not s)):
            redundant = True
        if redundant:
            kept.pop(i)
        else:
            i += 1
    return kept


def fourier_motzkin(
    n: int,
    ineqs: Sequence[Row],
    eqs: Sequence[tuple],
    eliminate: Sequence[int],
    prune: bool = True,
) -> tuple[list[Row], list[tuple]]:
    """Project {x : ineqs, eqs} onto the coordinates not in ``eliminate``.

    Returns (inequalities, equalities) over the kept coordinates in their
    original order.
    """
    ineqs = [(tuple(Fraction(v) for v in a), Fraction(b), bool(s)) for a, b, s in ineqs]
    eqs = [(tuple(Fraction(v) for v in a), Fraction(b)) for a, b in eqs]
    todo = list(eliminate)
    # substitute equalities first
    for j in list(todo):
        piv = next((e for e in eqs if e[0][j] != 0), None)
        if piv is None:
            continue
        pa, pb = piv
        c = pa[j]

        def subst(a, b, pa=pa, pb=pb, c=c, j=j):
            f = a[j] / c
            if not f:
                return a, b
            return tuple(x - f * y for x, y in zip(a, pa)), b - f * pb

        eqs = [subst(a, b) for (a, b) in eqs if (a, b) is not piv]
        ineqs = [(*subst(a, b), s) for a, b, s in ineqs]
        todo.remove(j)
    # an equality reduced to 0 = c ≠ 0 means infeasible
    infeasible = any(not any(a) and b != 0 for a, b in eqs)
    eqs = [(a, b) for a, b in eqs if any(a)]
    if infeasible:
        ineqs = [(tuple(ZERO for _ in range(n)), Fraction(-1), False)]
    for j in todo:
        pos = [r for r in ineqs if r[0][j] > 0]
        neg = [r for r in ineqs if r[0][j] < 0]
        rest = [r for r in ineqs if r[0][j] == 0]
        for ap, bp, sp in pos:
            for an, bn, sn in neg:
                fp, fn = ap[j], -an[j]
                a = tuple(fn * x + fp * y for x, y in zip(ap, an))
                rest.append((a, fn * bp + fp * bn, sp or sn))
        ineqs = _dedupe(rest)
        if prune and len(ineqs) > 2 * n:
            ineqs = remove_redundant(ineqs, eqs)
    keep = [j for j in range(n) if j not in set(eliminate)]
    out_ineqs = [(tuple(a[j] for j in keep), b, s) for a, b, s in ineqs]
    out_eqs = [(tuple(a[j] for j in keep), b) for a, b in eqs]
    out_ineqs = _dedupe(out_ineqs)
    if prune:
        out_ineqs = remove_redundant(out_ineqs, out_eqs)
    return out_ineqs, out_eqs
