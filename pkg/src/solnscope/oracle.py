"""Brute-force reference solvers used to cross-check the exact diagnostics.

Three independent routes:

* ``lasso_enumerate``: exact sign-pattern enumeration for w·‖x‖₁ + ½‖Ax−b‖².
* ``grid_minimize``: refined grid search for desk-scale 2-D objectives, with
  flags for minimizers that hug the box or objectives that keep decreasing
  along ker A.
* ``prox_grad``: proximal gradient for separable piecewise-linear-quadratic f.

Only the first is exact.  The other two work in floating point and their
claims are only ever checked against stated tolerances.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import funcat as FC
from .ratlin import RationalMatrix, SizeError, solve, rank

LASSO_MAX_N = 8
MAX_GRID_POINTS = 10**7
CANDIDATE_TOL = 1e-6


class OracleError(Exception):
    pass


class AllInfinite(OracleError):
    pass


class NoProx(OracleError):
    pass


# --------------------------------------------------------------------------
# exact lasso enumeration


@dataclass(frozen=True)
class LassoEnumeration:
    solutions: tuple  # optimal vertices x (exact)
    patterns: tuple  # their sign patterns
    objective: Fraction
    fitted: tuple  # A x⋆, shared by all solutions


def lasso_objective(A: RationalMatrix, b, x, weight=Fraction(1)) -> Fraction:
    res = [bi - ai for ai, bi in zip(A.matvec(x), b)]
    return weight * sum(abs(v) for v in x) + sum(r * r for r in res) / 2


def lasso_enumerate(A: RationalMatrix, b: Sequence, weight=Fraction(1)) -> LassoEnumeration:
    """All optimal sign-pattern vertices of min w‖x‖₁ + ½‖Ax − b‖².

    For each pattern s the support equations A_Sᵀ A_S x_S = A_Sᵀ b − w s_S
    are solved exactly; supports with dependent columns are skipped, since
    some vertex with independent columns attains the same optimum.
    """
    m, n = A.shape
    if n > LASSO_MAX_N:
        raise SizeError(f"lasso enumeration needs n ≤ {LASSO_MAX_N}, got {n}")
    b = tuple(Fraction(v) for v in b)
    weight = Fraction(weight)
    cols = [A.col(j) for j in range(n)]
    found = []
    for support_size in range(min(n, m) + 1):
        for support in itertools.combinations(range(n), support_size):
            sub = RationalMatrix.from_rows([[A.row(i)[j] for j in support] for i in range(m)]) if support else None
            if support and rank(sub) < len(support):
                continue
            for signs in itertools.product((-1, 1), repeat=len(support)):
                x = [Fraction(0)] * n
                if support:
                    gram = sub.T() @ sub
                    rhs = [a - weight * s for a, s in zip(sub.rmatvec(b), signs)]
                    xs = solve(gram, rhs)
                    if xs is None or any((v > 0) != (s > 0) or v == 0 for v, s in zip(xs, signs)):
                        continue
                    for j, v in zip(support, xs):
                        x[j] = v
                r = [bi - ai for ai, bi in zip(A.matvec(x), b)]
                corr = [sum(c[i] * r[i] for i in range(m)) for c in cols]
                if any(abs(corr[j]) > weight for j in range(n) if j not in support):
                    continue
                pattern = tuple(0 if j not in support else signs[support.index(j)] for j in range(n))
                found.append((tuple(x), pattern))
    if not found:
        raise OracleError("no KKT vertex found; the enumeration is incomplete")
    values = [lasso_objective(A, b, x, weight) for x, _ in found]
    best = min(values)
    sols = [(x, p) for (x, p), v in zip(found, values) if v == best]
    fitted = {tuple(A.matvec(x)) for x, _ in sols}
    if len(fitted) != 1:
        raise OracleError("optimal vertices disagree on Ax")
    return LassoEnumeration(tuple(x for x, _ in sols), tuple(p for _, p in sols), best, fitted.pop())


# --------------------------------------------------------------------------
# float evaluation of catalog objectives


def float_objective(f: FC.FuncExpr, A: RationalMatrix, b: Sequence, constrained: bool = False) -> Callable:
    """x ↦ f(x) + ½‖Ax − b‖² on a (k, n) array of points (inf outside dom f).

    With ``constrained`` the quadratic is dropped; callers restrict to Ax = b.
    """
    m, n = A.shape
    nf = FC.normal_form(f, n)
    Af = np.array([[float(v) for v in A.row(i)] for i in range(m)]) if m else np.zeros((0, n))
    bf = np.array([float(v) for v in b])
    cf = np.array([float(v) for v in nf.c])

    def value(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = X @ cf
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for t in nf.terms:
                w = float(t.weight)
                if t.kind == "const":
                    total = total + w
                elif t.kind == "abs":
                    total = total + w * np.abs(X[:, t.coords[0]])
                elif t.kind == "hinge":
                    arg = X @ np.array([float(v) for v in t.aff.vector(n)]) + float(t.aff.const)
                    total = total + w * np.maximum(arg, 0.0)
                elif t.kind == "exp":
                    total = total + w * np.exp(float(t.alpha) * X[:, t.coords[0]] + float(t.beta))
                elif t.kind == "neglog":
                    arg = float(t.alpha) * X[:, t.coords[0]] + float(t.beta)
                    total = total + np.where(arg > 0, -w * np.log(np.where(arg > 0, arg, 1.0)), np.inf)
                elif t.kind == "quad":
                    total = total + 0.5 * w * (X[:, t.coords[0]] - float(t.beta)) ** 2
                elif t.kind == "hexp":
                    i, j = t.coords
                    total = total + w * np.maximum(np.exp(X[:, j]) - X[:, i], 0.0)
                elif t.kind == "hyp":
                    i, j = t.coords
                    ok = (X[:, i] >= 0) & (X[:, j] >= 0) & (X[:, i] * X[:, j] >= 1)
                    total = total + np.where(ok, 0.0, np.inf)
            if not constrained and m:
                res = X @ Af.T - bf
                total = total + 0.5 * np.sum(res * res, axis=1)
        return total

    return value


# --------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class GridSpec:
    box: tuple  # ((lo, hi), ...) per coordinate
    resolution: int = 121
    refinement_rounds: int = 3

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("resolution must be at least 3")
        if self.resolution ** len(self.box) > MAX_GRID_POINTS:
            raise ValueError(f"grid exceeds {MAX_GRID_POINTS} points")
        if any(lo >= hi for lo, hi in self.box):
            raise ValueError("every box factor needs lo < hi")


@dataclass
class OracleResult:
    minimizer_candidates: list
    objective_value: float
    certified_gap: float
    flags: set = field(default_factory=set)
    pitch: tuple = ()

    @property
    def diverges(self) -> bool:
        return "diverges-along-kernel" in self.flags

    @property
    def boundary(self) -> bool:
        return "boundary" in self.flags


def _grid(box, resolution):
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    pitch = tuple((hi - lo) / (resolution - 1) for lo, hi in box)
    return pts, pitch


def grid_minimize(
    objective: Callable,
    spec: GridSpec,
    kernel: Sequence[Sequence[float]] = (),
    lipschitz: float | None = None,
) -> OracleResult:
    """Refined grid search.

    ``kernel`` lists directions of ker A.  If the objective keeps strictly
    decreasing along one of them from the incumbent, the infimum is not
    attained (or is −∞) and no candidate is reported.
    """
    box = [tuple(map(float, f)) for f in spec.box]
    outer = [tuple(f) for f in box]
    best_val = math.inf
    cands = np.zeros((0, len(box)))
    pitch = ()
    for _ in range(spec.refinement_rounds):
        pts, pitch = _grid(box, spec.resolution)
        vals = objective(pts)
        finite = np.isfinite(vals)
        if not finite.any():
            raise AllInfinite("objective is +inf on the whole grid")
        best_val = float(vals[finite].min())
        cands = pts[finite & (vals <= best_val + CANDIDATE_TOL)]
        lo_c, hi_c = cands.min(axis=0), cands.max(axis=0)
        new_box = []
        for k, (lo, hi) in enumerate(box):
            width = hi - lo
            half = max((hi_c[k] - lo_c[k]) / 2 + pitch[k], width / 20)
            mid = (hi_c[k] + lo_c[k]) / 2
            new_box.append((max(outer[k][0], mid - half), min(outer[k][1], mid + half)))
        if all(abs(a - c) < 1e-15 and abs(b - d) < 1e-15 for (a, b), (c, d) in zip(new_box, box)):
            break
        box = new_box

    flags = set()
    for k, (lo, hi) in enumerate(outer):
        tol = pitch[k] * 0.5
        if np.any(cands[:, k] <= lo + tol) or np.any(cands[:, k] >= hi - tol):
            flags.add("boundary")
    incumbent = cands[0]
    for d in kernel:
        d = np.asarray(d, dtype=float)
        d = d / np.linalg.norm(d)
        for sgn in (1.0, -1.0):
            ts = [0.0] + [10.0**k for k in range(0, 5)]
            vals = objective(np.array([incumbent + sgn * t * d for t in ts]))
            if np.all(np.isfinite(vals)) and vals[1] < vals[0] - 1e-12 and np.all(np.diff(vals) <= 1e-12):
                flags.add("diverges-along-kernel")
    if "boundary" in flags:
        # a minimizer that only hugs the box is fine; one that improves when the box grows is not
        wide = []
        for lo, hi in outer:
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            wide.append((mid - 10 * half, mid + 10 * half))
        pts, _ = _grid(wide, spec.resolution)
        vals = objective(pts)
        finite = np.isfinite(vals)
        if finite.any() and float(vals[finite].min()) < best_val - 1e-9:
            flags.add("diverges-along-kernel")
    gap = CANDIDATE_TOL if lipschitz is None else lipschitz * float(np.linalg.norm(pitch)) / 2
    out = [tuple(map(float, c)) for c in cands]
    if "diverges-along-kernel" in flags:
        out = []
    return OracleResult(out, best_val, gap, flags, tuple(pitch))


# --------------------------------------------------------------------------
# proximal gradient


def _coordinate_model(f: FC.FuncExpr, n: int):
    """Per coordinate: (kinks, slopes, quad weight, quad centre) or NoProx."""
    nf = FC.normal_form(f, n)
    by_coord: dict[int, list] = {i: [] for i in range(n)}
    for t in nf.terms:
        if t.kind == "const":
            continue
        if t.kind not in ("abs", "hinge", "quad") or len(t.coords) != 1:
            raise NoProx(f"no catalog prox for a {t.kind} term")
        by_coord[t.coords[0]].append(t)
    models = []
    for i in range(n):
        terms = by_coord[i]
        pl = [t for t in terms if t.kind != "quad"]
        quads = [t for t in terms if t.kind == "quad"]
        qw = sum((t.weight for t in quads), Fraction(0))
        centre = sum((t.weight * t.beta for t in quads), Fraction(0)) / qw if qw else Fraction(0)
        if pl:
            kinks, slopes, *_ = FC._pl1_profile(FC.Block("pl1", (i,), tuple(pl)))
        else:
            kinks, slopes = [], [Fraction(0)]
        slopes = [float(s + nf.c[i]) for s in slopes]
        models.append(([float(k) for k in kinks], slopes, float(qw), float(centre)))
    return models


def _prox_1d(y: float, gamma: float, model) -> float:
    kinks, slopes, qw, centre = model
    denom = 1.0 + gamma * qw
    for j, s in enumerate(slopes):
        x = (y + gamma * qw * centre - gamma * s) / denom
        lo = kinks[j - 1] if j > 0 else -math.inf
        hi = kinks[j] if j < len(kinks) else math.inf
        if lo < x < hi:
            return x
    for j, k in enumerate(kinks):
        resid = (y - k - gamma * qw * (k - centre)) / gamma
        if slopes[j] <= resid <= slopes[j + 1]:
            return k
    # rounding put y between regions; the nearest kink is the answer
    return min(kinks, key=lambda k: abs(k - y)) if kinks else (y + gamma * qw * centre - gamma * slopes[0]) / denom


def prox_grad(
    f: FC.FuncExpr,
    A: RationalMatrix,
    b: Sequence,
    steps: int = 100_000,
    stepsize: float | None = None,
    x0: Sequence[float] | None = None,
    tol: float = 1e-15,
) -> OracleResult:
    """x ← prox_{γf}(x − γAᵀ(Ax − b)), stopping early once iterates stall."""
    m, n = A.shape
    models = _coordinate_model(f, n)
    Af = np.array([[float(v) for v in A.row(i)] for i in range(m)])
    bf = np.array([float(v) for v in b])
    L = float(np.linalg.norm(Af.T @ Af, 2)) if m else 0.0
    if stepsize is None:
        stepsize = 1.0 / L if L > 0 else 1.0
    if L > 0 and stepsize > 1.0 / L * (1 + 1e-12):
        raise ValueError("stepsize must not exceed 1/||A^T A||")
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    last_move = math.inf
    for _ in range(steps):
        y = x - stepsize * (Af.T @ (Af @ x - bf))
        nxt = np.array([_prox_1d(y[i], stepsize, models[i]) for i in range(n)])
        last_move = float(np.linalg.norm(nxt - x))
        x = nxt
        if last_move <= tol:
            break
    value = float(float_objective(f, A, b)(x[None, :])[0])
    return OracleResult([tuple(map(float, x))], value, last_move / stepsize if stepsize else 0.0)
