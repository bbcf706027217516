"""Small exact linear algebra over ``Fraction``.

Only what the root-system code needs: Gaussian elimination for square
systems and vector helpers on tuples.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Vec = tuple[Fraction, ...]


def vec(*xs) -> Vec:
    return tuple(Fraction(x) for x in xs)


def zeros(n: int) -> Vec:
    return (Fraction(0),) * n


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Vec, v: Vec) -> Vec:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vec, v: Vec) -> Vec:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * a for a in u)


def combine(coeffs: Sequence, vectors: Sequence[Vec]) -> Vec:
    """Linear combination ``sum(c * v)``; ``vectors`` must be nonempty."""
    out = [Fraction(0)] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        if c:
            for k, x in enumerate(v):
                out[k] += c * x
    return tuple(out)


def is_zero(u: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in u)


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve a nonsingular square system exactly."""
    n = len(matrix)
    rows = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular system")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [rows[r][n] for r in range(n)]


def inverse(matrix: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(matrix)
    cols = [solve(matrix, [int(i == k) for i in range(n)]) for k in range(n)]
    return [[cols[k][i] for k in range(n)] for i in range(n)]


def gram(vectors: Sequence[Vec]) -> list[list[Fraction]]:
    return [[dot(u, v) for v in vectors] for u in vectors]


def project_out(x: Vec, basis: Sequence[Vec]) -> Vec:
    """Orthogonal projection of ``x`` onto the orthocomplement of span(basis)."""
    if not basis:
        return tuple(x)
    coeffs = solve(gram(basis), [dot(b, x) for b in basis])
    return sub(tuple(x), combine(coeffs, basis))


def fmt(x: Fraction) -> str:
    """Canonical ``p/q`` rendering (lowest terms, positive denominator)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())
