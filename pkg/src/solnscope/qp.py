"""Exact convex quadratic programs.

    minimize ½ zᵀQz + q·z   subject to  G z ≤ h,  E z = e

with Q positive semidefinite and rational data.  A floating-point solve
(scipy SLSQP) proposes the active set; the KKT system for that active set is
then an LP feasibility problem in (z, λ, μ) which the exact simplex settles.
If the float guess is wrong, nearby active sets are tried, then (for small
problems) an exhaustive search over active sets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import lp

ENUMERATION_LIMIT = 14  # rows; 2^14 active sets at most


class QPError(Exception):
    pass


@dataclass(frozen=True)
class QP:
    Q: tuple  # n×n
    q: tuple
    G: tuple = ()
    h: tuple = ()
    E: tuple = ()
    e: tuple = ()

    @property
    def n(self) -> int:
        return len(self.q)

    def objective(self, z) -> Fraction:
        quad = sum(self.Q[i][j] * z[i] * z[j] for i in range(self.n) for j in range(self.n) if self.Q[i][j])
        return quad / 2 + sum(a * b for a, b in zip(self.q, z))


def _float_solution(p: QP):
    Q = np.array(p.Q, dtype=float)
    q = np.array(p.q, dtype=float)
    cons = []
    if p.G:
        G = np.array(p.G, dtype=float)
        h = np.array(p.h, dtype=float)
        cons.append({"type": "ineq", "fun": lambda z: h - G @ z, "jac": lambda z: -G})
    if p.E:
        E = np.array(p.E, dtype=float)
        e = np.array(p.e, dtype=float)
        cons.append({"type": "eq", "fun": lambda z: E @ z - e, "jac": lambda z: E})
    res = minimize(
        lambda z: 0.5 * z @ Q @ z + q @ z,
        np.zeros(p.n),
        jac=lambda z: Q @ z + q,
        constraints=cons,
        method="SLSQP",
        options={"maxiter": 1000, "ftol": 1e-13},
    )
    return res.x


def _kkt_for_active(p: QP, active: Sequence[int]):
    """Exact z satisfying KKT with multipliers supported on ``active``, or None."""
    n, k, me = p.n, len(active), len(p.E)
    nv = n + k + me
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    # stationarity: Qz + q + G_Sᵀλ + Eᵀμ = 0
    for i in range(n):
        row = [Fraction(0)] * nv
        for j in range(n):
            row[j] = p.Q[i][j]
        for t, r in enumerate(active):
            row[n + t] = p.G[r][i]
        for t in range(me):
            row[n + k + t] = p.E[t][i]
        A_eq.append(row)
        b_eq.append(-p.q[i])
    for r in range(len(p.G)):
        row = list(p.G[r]) + [Fraction(0)] * (k + me)
        if r in active:
            A_eq.append(row)
            b_eq.append(p.h[r])
        else:
            A_ub.append(row)
            b_ub.append(p.h[r])
    for t in range(me):
        A_eq.append(list(p.E[t]) + [Fraction(0)] * (k + me))
        b_eq.append(p.e[t])
    for t in range(k):
        row = [Fraction(0)] * nv
        row[n + t] = Fraction(-1)
        A_ub.append(row)
        b_ub.append(Fraction(0))
    sol = lp.feasible_point(nv, A_ub, b_ub, A_eq, b_eq)
    return None if sol is None else tuple(sol[:n])


def solve(p: QP, tol: float = 1e-7) -> tuple:
    """An exact minimizer; raises QPError if none is found."""
    z = _float_solution(p)
    slack = [float(hh) - float(np.dot(np.array(g, dtype=float), z)) for g, hh in zip(p.G, p.h)]
    tried = set()
    for t in (tol, 1e-5, 1e-3, 1e-9):
        active = tuple(i for i, s in enumerate(slack) if s <= t)
        if active in tried:
            continue
        tried.add(active)
        sol = _kkt_for_active(p, active)
        if sol is not None:
            return sol
    if len(p.G) > ENUMERATION_LIMIT:
        raise QPError("float-guided active sets failed and the problem is too large to enumerate")
    order = sorted(range(len(p.G)), key=lambda i: slack[i])
    for size in range(len(p.G) + 1):
        for active in itertools.combinations(order, size):
            active = tuple(sorted(active))
            if active in tried:
                continue
            sol = _kkt_for_active(p, active)
            if sol is not None:
                return sol
    raise QPError("no KKT point: the QP is infeasible or unbounded")


def min_norm_point(n: int, G=(), h=(), E=(), e=()) -> tuple:
    """The exact Euclidean projection of the origin onto {Gx ≤ h, Ex = e}."""
    Q = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    return solve(QP(Q, (Fraction(0),) * n, tuple(G), tuple(h), tuple(E), tuple(e)))
