"""Exact rational linear algebra.

Everything here works over ``fractions.Fraction``; there is no tolerance
anywhere.  Matrices are small (desk scale), so plain Gaussian elimination
with first-nonzero pivoting is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
Vector = tuple  # tuple of Fraction

MAX_ENTRIES = 10_000


class DimensionError(ValueError):
    pass


class SizeError(ValueError):
    pass


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # floats only enter through explicit rationalization in the oracle
        raise TypeError("refusing to convert float to an exact rational")
    return Fraction(value)


def vec(values: Iterable) -> Vector:
    return tuple(as_rational(v) for v in values)


def zeros(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise DimensionError(f"dot of lengths {len(u)} and {len(v)}")
    total = Fraction(0)
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total


def add(u: Sequence, v: Sequence) -> Vector:
    if len(u) != len(v):
        raise DimensionError(f"add of lengths {len(u)} and {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> Vector:
    if len(u) != len(v):
        raise DimensionError(f"sub of lengths {len(u)} and {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Sequence) -> Vector:
    return tuple(c * a for a in v)


def is_zero(v: Sequence) -> bool:
    return all(a == 0 for a in v)


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: tuple  # tuple of row tuples

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative dimension")
        if self.rows * self.cols > MAX_ENTRIES:
            raise SizeError(f"{self.rows}x{self.cols} exceeds {MAX_ENTRIES} entries")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionError("entries do not match the declared shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RationalMatrix":
        rows = [vec(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionError("column count needed for a matrix with no rows")
            cols = len(rows[0])
        return cls(len(rows), cols, tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, tuple(zeros(cols) for _ in range(rows)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def T(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows, tuple(self.col(j) for j in range(self.cols)))

    def matvec(self, x: Sequence) -> Vector:
        if len(x) != self.cols:
            raise DimensionError(f"matrix has {self.cols} columns, vector has {len(x)} entries")
        return tuple(dot(r, x) for r in self.entries)

    def rmatvec(self, y: Sequence) -> Vector:
        """Aᵀy without forming the transpose."""
        if len(y) != self.rows:
            raise DimensionError(f"matrix has {self.rows} rows, vector has {len(y)} entries")
        out = [Fraction(0)] * self.cols
        for yi, r in zip(y, self.entries):
            if yi:
                for j, a in enumerate(r):
                    if a:
                        out[j] += yi * a
        return tuple(out)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.cols)]
        return RationalMatrix(
            self.rows, other.cols, tuple(tuple(dot(r, c) for c in cols) for r in self.entries)
        )

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return RationalMatrix(
            self.rows, self.cols, tuple(add(r, s) for r, s in zip(self.entries, other.entries))
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {self.shape} and {other.shape}")
        return RationalMatrix(
            self.rows, self.cols, tuple(sub(r, s) for r, s in zip(self.entries, other.entries))
        )

    def is_zero(self) -> bool:
        return all(is_zero(r) for r in self.entries)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [list(vec(r)) for r in rows]
    if ncols is None:
        ncols = len(M[0]) if M else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        if piv != 1:
            M[r] = [a / piv for a in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M[: len(pivots)], pivots


def rank(A: RationalMatrix | Sequence[Sequence]) -> int:
    rows = A.entries if isinstance(A, RationalMatrix) else A
    return len(rref(rows)[1])


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: tuple  # tuple of vectors; empty means {0}

    def __post_init__(self):
        for v in self.basis:
            if len(v) != self.ambient_dim:
                raise DimensionError("basis vector has the wrong length")
        if self.basis and rank(self.basis) != len(self.basis):
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        """Subspace spanned by arbitrary (possibly dependent) vectors."""
        vs = [vec(v) for v in vectors]
        if not vs:
            return cls(ambient_dim, ())
        R, _ = rref(vs, ambient_dim)
        return cls(ambient_dim, tuple(tuple(r) for r in R))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(RationalMatrix.identity(n).entries))

    @classmethod
    def trivial(cls, n: int) -> "Subspace":
        return cls(n, ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        if not self.basis:
            return is_zero(v)
        return rank(list(self.basis) + [vec(v)]) == self.dim

    def complement(self) -> "Subspace":
        if not self.basis:
            return Subspace.full(self.ambient_dim)
        return kernel_basis(RationalMatrix.from_rows(self.basis, self.ambient_dim))

    def constraint_rows(self) -> list[Vector]:
        """Rows N with W = {x : N x = 0}."""
        return list(self.complement().basis)

    def project(self, v: Sequence) -> Vector:
        """Orthogonal projection onto the subspace."""
        if not self.basis:
            return zeros(self.ambient_dim)
        V = RationalMatrix.from_rows(self.basis, self.ambient_dim)  # rows are basis vectors
        gram = V @ V.T()
        coeffs = solve(gram, V.matvec(vec(v)))
        return V.rmatvec(coeffs)

    def same_as(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return all(self.contains(v) for v in other.basis)


def kernel_basis(A: RationalMatrix) -> Subspace:
    R, pivots = rref(A.entries, A.cols)
    free = [j for j in range(A.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * A.cols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return Subspace(A.cols, tuple(basis))


def rowspace_basis(A: RationalMatrix) -> Subspace:
    R, _ = rref(A.entries, A.cols)
    return Subspace(A.cols, tuple(tuple(r) for r in R))


def column_space(A: RationalMatrix) -> Subspace:
    return rowspace_basis(A.T())


def solve(A: RationalMatrix, rhs: Sequence) -> Vector | None:
    """One solution of A x = rhs (free variables set to 0), or None if inconsistent."""
    rhs = vec(rhs)
    if len(rhs) != A.rows:
        raise DimensionError("right-hand side length does not match rows")
    aug = [list(r) + [c] for r, c in zip(A.entries, rhs)]
    R, pivots = rref(aug, A.cols + 1)
    if A.cols in pivots:
        return None
    x = [Fraction(0)] * A.cols
    for row, p in zip(R, pivots):
        x[p] = row[-1]
    return tuple(x)


def inverse(A: RationalMatrix) -> RationalMatrix:
    if A.rows != A.cols:
        raise DimensionError("only square matrices have inverses")
    n = A.rows
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A.entries)]
    R, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return RationalMatrix(n, n, tuple(tuple(r[n:]) for r in R))


def pseudoinverse(A: RationalMatrix) -> RationalMatrix:
    """Moore–Penrose inverse via a full-rank factorization A = C F."""
    R, pivots = rref(A.entries, A.cols)
    if not pivots:
        return RationalMatrix.zero(A.cols, A.rows)
    F = RationalMatrix.from_rows(R, A.cols)
    C = RationalMatrix.from_rows([[A.entries[i][p] for p in pivots] for i in range(A.rows)], len(pivots))
    Ft, Ct = F.T(), C.T()
    return Ft @ inverse(F @ Ft) @ inverse(Ct @ C) @ Ct


def decompose(A: RationalMatrix, x: Sequence) -> tuple[Vector, Vector]:
    """Split x into its ran Aᵀ and ker A components."""
    x = vec(x)
    if len(x) != A.cols:
        raise DimensionError(f"x has {len(x)} entries, A has {A.cols} columns")
    x_r = rowspace_basis(A).project(x)
    return x_r, sub(x, x_r)


def fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
