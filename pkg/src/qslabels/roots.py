"""Exact root systems in Bourbaki coordinates.

Every system is stored by its ordered simple roots (vectors with
``Fraction`` entries in a Euclidean ambient space). Roots themselves are
generated in simple-root coordinates from the Cartan matrix, so all
combinatorics is integer arithmetic and vectors are only materialised on
demand.

Simple-root numbering follows Bourbaki:

====  ==========================================================
A_n   a_i = e_i - e_{i+1}  (in R^{n+1})
B_n   a_i = e_i - e_{i+1},  a_n = e_n          (a_n short, norm 1)
C_n   a_i = e_i - e_{i+1},  a_n = 2 e_n        (a_n long, norm 4)
D_n   a_i = e_i - e_{i+1},  a_n = e_{n-1} + e_n
E_8   a_1 = (e1+e8-e2-...-e7)/2, a_2 = e1+e2, a_k = e_{k-1}-e_{k-2}
E_7   first seven E_8 simple roots; E_6 first six
F_4   a_1 = e2-e3, a_2 = e3-e4, a_3 = e4, a_4 = (e1-e2-e3-e4)/2
G_2   a_1 = e1-e2 (short), a_2 = -2e1+e2+e3 (long)
====  ==========================================================
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

from ._linalg import Vec, combine, dot, gram, inverse, scale, solve, sub, vec

MAX_RANK = 12

_MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 3}
_EXCEPTIONAL = {"E": (6, 7, 8), "F": (4,), "G": (2,)}

ROOT_COUNTS = {"E6": 72, "E7": 126, "E8": 240, "F4": 48, "G2": 12}


class RootSystemError(ValueError):
    """Invalid label, non-root argument or inconsistent root data."""


@dataclass(frozen=True, order=True)
class CartanLabel:
    series: str
    rank: int

    def __post_init__(self):
        s, n = self.series, self.rank
        if not isinstance(n, int) or n < 1:
            raise RootSystemError(f"rank must be a positive integer, got {n!r}")
        if s in _MIN_RANK:
            if n < _MIN_RANK[s]:
                raise RootSystemError(f"{s}{n}: rank must be >= {_MIN_RANK[s]}")
        elif s in _EXCEPTIONAL:
            if n not in _EXCEPTIONAL[s]:
                allowed = ", ".join(str(r) for r in _EXCEPTIONAL[s])
                raise RootSystemError(f"{s}{n}: rank must be one of {allowed}")
        else:
            raise RootSystemError(f"unknown series {s!r}")

    def __str__(self) -> str:
        return f"{self.series}{self.rank}"

    @classmethod
    def parse(cls, text: str) -> "CartanLabel":
        text = text.strip()
        if len(text) < 2 or not text[1:].isdigit():
            raise RootSystemError(f"malformed Cartan label {text!r}")
        return cls(text[0].upper(), int(text[1:]))

    def root_count(self) -> int:
        s, n = self.series, self.rank
        if s == "A":
            return n * (n + 1)
        if s in "BC":
            return 2 * n * n
        if s == "D":
            return 2 * n * (n - 1)
        return ROOT_COUNTS[str(self)]


def _e(n: int, *entries: tuple[int, object]) -> Vec:
    v = [Fraction(0)] * n
    for k, x in entries:
        v[k] += Fraction(x)
    return tuple(v)


def bourbaki_simple_roots(label: CartanLabel) -> tuple[Vec, ...]:
    s, n = label.series, label.rank
    h = Fraction(1, 2)
    if s == "A":
        return tuple(_e(n + 1, (i, 1), (i + 1, -1)) for i in range(n))
    if s in "BCD":
        chain = [_e(n, (i, 1), (i + 1, -1)) for i in range(n - 1)]
        last = {
            "B": _e(n, (n - 1, 1)),
            "C": _e(n, (n - 1, 2)),
            "D": _e(n, (n - 2, 1), (n - 1, 1)),
        }[s]
        return tuple(chain + [last])
    if s == "E":
        e8 = [
            vec(h, -h, -h, -h, -h, -h, -h, h),
            _e(8, (0, 1), (1, 1)),
        ] + [_e(8, (k - 2, 1), (k - 3, -1)) for k in range(3, 9)]
        return tuple(e8[:n])
    if s == "F":
        return (
            _e(4, (1, 1), (2, -1)),
            _e(4, (2, 1), (3, -1)),
            _e(4, (3, 1)),
            vec(h, -h, -h, -h),
        )
    if s == "G":
        return (_e(3, (0, 1), (1, -1)), _e(3, (0, -2), (1, 1), (2, 1)))
    raise RootSystemError(f"no realization for {label}")


def cartan_matrix(simple: Sequence[Vec]) -> list[list[int]]:
    """``A[i][j] = <a_i, a_j^vee> = 2 (a_i, a_j) / (a_j, a_j)``."""
    g = gram(simple)
    out = []
    for i in range(len(simple)):
        row = []
        for j in range(len(simple)):
            x = 2 * g[i][j] / g[j][j]
            if x.denominator != 1:
                raise RootSystemError("simple roots have non-integral Cartan numbers")
            row.append(int(x))
        out.append(row)
    return out


def positive_root_coords(cartan: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Positive roots in simple-root coordinates via root strings.

    Sorted by height, then lexicographically.
    """
    n = len(cartan)
    units = [tuple(int(i == k) for i in range(n)) for k in range(n)]
    found = set(units)
    layer = list(units)
    while layer:
        nxt = []
        for r in layer:
            for k in range(n):
                p = 0
                t = list(r)
                while True:
                    t[k] -= 1
                    if tuple(t) in found:
                        p += 1
                    else:
                        break
                q = p - sum(r[l] * cartan[l][k] for l in range(n))
                if q > 0:
                    new = r[:k] + (r[k] + 1,) + r[k + 1:]
                    if new not in found:
                        found.add(new)
                        nxt.append(new)
        layer = nxt
    return tuple(sorted(found, key=lambda c: (sum(c), c)))


def _components(cartan: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(cartan)
    seen: set[int] = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        comp, todo = [], [start]
        seen.add(start)
        while todo:
            u = todo.pop()
            comp.append(u)
            for v in range(n):
                if v != u and cartan[u][v] != 0 and v not in seen:
                    seen.add(v)
                    todo.append(v)
        comps.append(sorted(comp))
    return comps


def _classify_connected(cartan, nodes: list[int]) -> str:
    r = len(nodes)
    nbrs = {u: [v for v in nodes if v != u and cartan[u][v] != 0] for u in nodes}
    bonds = {
        (u, v): cartan[u][v] * cartan[v][u] for u in nodes for v in nbrs[u] if u < v
    }
    if any(m == 3 for m in bonds.values()):
        return "G2"
    doubles = [e for e, m in bonds.items() if m == 2]
    if doubles:
        u, v = doubles[0]
        if r == 2:
            return "B2"
        if r == 4 and len(nbrs[u]) == 2 and len(nbrs[v]) == 2:
            return "F4"
        end, other = (u, v) if len(nbrs[u]) == 1 else (v, u)
        end_is_long = abs(cartan[end][other]) > abs(cartan[other][end])
        return f"{'C' if end_is_long else 'B'}{r}"
    branch = [u for u in nodes if len(nbrs[u]) == 3]
    if not branch:
        return f"A{r}"
    center = branch[0]
    arms = []
    for start in nbrs[center]:
        length, prev, cur = 1, center, start
        while True:
            nxt = [w for w in nbrs[cur] if w != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        arms.append(length)
    arms.sort()
    if arms[:2] == [1, 1]:
        return f"D{r}"
    return {(1, 2, 2): "E6", (1, 2, 3): "E7", (1, 2, 4): "E8"}[tuple(arms)]


def classify_cartan(cartan: Sequence[Sequence[int]]) -> list[tuple[str, tuple[int, ...]]]:
    """Decompose a Cartan matrix into (type name, node indices) per component.

    Names are canonical: ``A3`` for D3, ``B2`` for C2, ``A1`` for B1.
    """
    return [(_classify_connected(cartan, comp), tuple(comp)) for comp in _components(cartan)]


def _factor_key(name: str):
    body = name.lstrip("~236")
    return (-int(body[1:]), body[0], name)


def type_string(names: Iterable[str]) -> str:
    """Render a multiset of factor names, e.g. ``D4xA1``; ``T`` if empty."""
    names = sorted(names, key=_factor_key)
    return "x".join(names) if names else "T"


def fundamental_weight(within: Sequence[Vec], alpha: Vec) -> Vec:
    """Fundamental weight of ``alpha`` for the simple system ``within``.

    The result lies in span(within) and pairs as a Kronecker delta with the
    coroots of ``within``.
    """
    within = [tuple(w) for w in within]
    alpha = tuple(alpha)
    if alpha not in within:
        raise RootSystemError("alpha is not one of the given simple roots")
    g = gram(within)
    rhs = [g[k][k] / 2 if w == alpha else Fraction(0) for k, w in enumerate(within)]
    return combine(solve(g, rhs), within)


def opposition_involution(simple: Sequence[Vec]) -> tuple[int, ...]:
    """Permutation ``k -> sigma(k)`` with ``-w0(a_k) = a_sigma(k)``."""
    return opposition_from_cartan(cartan_matrix(simple))


def opposition_from_cartan(a: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Opposition involution from a Cartan matrix.

    ``w0`` is found as a reflection word carrying the dominant regular
    element rho to the antidominant chamber.
    """
    n = len(a)
    if n == 0:
        return ()
    # rho in fundamental-weight coordinates; reflecting by a_k subtracts p_k times row k
    p = [1] * n
    word = []
    while True:
        k = next((k for k in range(n) if p[k] > 0), None)
        if k is None:
            break
        pk = p[k]
        p = [x - pk * y for x, y in zip(p, a[k])]
        word.append(k)
    sigma = []
    for k in range(n):
        v = [0] * n
        v[k] = 1
        for m in word:
            v[m] -= sum(v[l] * a[l][m] for l in range(n))
        neg = [-t for t in v]
        if sorted(neg) != [0] * (n - 1) + [1]:
            raise RootSystemError("reflection word did not produce the longest element")
        sigma.append(neg.index(1))
    return tuple(sigma)


@dataclass(frozen=True, eq=False)
class RootSystem:
    """A reduced root system given by ordered simple roots.

    ``label`` is the Cartan label when the system is irreducible and was
    built from one; ``type_name`` is always available from classification.
    """

    simple_roots: tuple[Vec, ...]
    label: CartanLabel | None = None

    def __post_init__(self):
        dims = {len(v) for v in self.simple_roots}
        if len(dims) > 1:
            raise RootSystemError("simple roots live in different dimensions")

    @property
    def rank(self) -> int:
        return len(self.simple_roots)

    @property
    def dim(self) -> int:
        return len(self.simple_roots[0])

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        return gram(self.simple_roots)

    @cached_property
    def _gram_inv(self):
        return inverse(self.gram)

    @cached_property
    def cartan(self) -> list[list[int]]:
        return cartan_matrix(self.simple_roots)

    @cached_property
    def _int_gram(self) -> list[list[int]]:
        den = lcm(*(x.denominator for row in self.gram for x in row))
        return [[int(x * den) for x in row] for row in self.gram]

    def _iform(self, c: Sequence[int], d: Sequence[int]) -> int:
        g = self._int_gram
        return sum(ci * sum(gij * dj for gij, dj in zip(row, d)) for ci, row in zip(c, g) if ci)

    def cartan_of(self, simples: Sequence[Sequence[int]]) -> list[list[int]]:
        """Cartan matrix of roots given by coordinates."""
        g = [[self._iform(x, y) for y in simples] for x in simples]
        return [[2 * g[i][j] // g[j][j] for j in range(len(simples))] for i in range(len(simples))]

    def reflection_coords(self, s: Sequence[int]):
        """The reflection in the root with coordinates ``s``, acting on coordinates."""
        gs = [sum(gij * sj for gij, sj in zip(row, s)) for row in self._int_gram]
        ss = sum(x * y for x, y in zip(s, gs))

        def apply(c: Sequence[int]) -> tuple[int, ...]:
            k, r = divmod(2 * sum(x * y for x, y in zip(c, gs)), ss)
            if r:
                raise RootSystemError("non-integral pairing between roots")
            return tuple(x - k * y for x, y in zip(c, s))

        return apply

    def reflect_coords(self, c: Sequence[int], s: Sequence[int]) -> tuple[int, ...]:
        """Reflection of the root with coordinates ``c`` in the root with coordinates ``s``."""
        return self.reflection_coords(s)(c)

    @cached_property
    def components(self) -> list[tuple[str, tuple[int, ...]]]:
        return classify_cartan(self.cartan)

    @property
    def type_name(self) -> str:
        return type_string(name for name, _ in self.components)

    @cached_property
    def positive_coords(self) -> tuple[tuple[int, ...], ...]:
        return positive_root_coords(self.cartan)

    @cached_property
    def positive_roots(self) -> tuple[Vec, ...]:
        return tuple(self.vector(c) for c in self.positive_coords)

    @cached_property
    def roots(self) -> frozenset[Vec]:
        pos = self.positive_roots
        return frozenset(pos) | frozenset(scale(-1, v) for v in pos)

    @cached_property
    def _coord_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.positive_coords)

    def is_root_coords(self, coords: Sequence[int]) -> bool:
        c = tuple(coords)
        return c in self._coord_set or tuple(-x for x in c) in self._coord_set

    def vector(self, coords: Sequence) -> Vec:
        return combine(list(coords), self.simple_roots)

    def coords(self, v: Vec) -> tuple[Fraction, ...]:
        """Simple-root coordinates of a vector in the span of the roots."""
        rhs = [dot(a, v) for a in self.simple_roots]
        c = tuple(sum((gi * r for gi, r in zip(row, rhs)), Fraction(0)) for row in self._gram_inv)
        if self.vector(c) != tuple(v):
            raise RootSystemError("vector is not in the span of the roots")
        return c

    def norm(self, v: Vec) -> Fraction:
        return dot(v, v)

    def pair(self, lam: Vec, v: Vec) -> Fraction:
        """Exact evaluation of the invariant form ``(lam, v)``."""
        if len(lam) != self.dim or len(v) != self.dim:
            raise RootSystemError(
                f"dimension mismatch: expected {self.dim}, got {len(lam)} and {len(v)}"
            )
        return dot(lam, v)

    def coroot(self, beta: Vec) -> Vec:
        beta = tuple(beta)
        if beta not in self.roots:
            raise RootSystemError(f"{beta} is not a root")
        return scale(2 / dot(beta, beta), beta)

    def coroot_pairing(self, lam: Vec, beta: Vec) -> Fraction:
        """``<lam, beta^vee> = 2 (lam, beta) / (beta, beta)``."""
        return self.pair(lam, self.coroot(beta))

    def reflect(self, x: Vec, beta: Vec) -> Vec:
        return sub(tuple(x), scale(self.coroot_pairing(x, beta), beta))

    def simple_root(self, index: int) -> Vec:
        """1-based Bourbaki index."""
        if not 1 <= index <= self.rank:
            raise RootSystemError(f"simple root index {index} out of range 1..{self.rank}")
        return self.simple_roots[index - 1]

    def fundamental_weight(self, index: int, within: Iterable[int] | None = None) -> Vec:
        within = sorted(within) if within is not None else list(range(1, self.rank + 1))
        if index not in within:
            raise RootSystemError(f"alpha_{index} is not in the chosen subsystem")
        return fundamental_weight([self.simple_root(k) for k in within], self.simple_root(index))

    def opposition_involution(self, subset: Iterable[int] | None = None) -> dict[int, int]:
        subset = sorted(subset) if subset is not None else list(range(1, self.rank + 1))
        sigma = opposition_involution([self.simple_root(k) for k in subset])
        return {subset[k]: subset[sigma[k]] for k in range(len(subset))}

    def orbit(self, beta: Vec) -> frozenset[Vec]:
        beta = tuple(beta)
        if beta not in self.roots:
            raise RootSystemError(f"{beta} is not a root")
        cache = self.__dict__.setdefault("_orbits", {})
        if beta in cache:
            return cache[beta]
        seen = {beta}
        todo = deque([beta])
        while todo:
            x = todo.popleft()
            for a in self.simple_roots:
                y = self.reflect(x, a)
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        orbit = frozenset(seen)
        for x in orbit:
            cache[x] = orbit
        return orbit

    def are_weyl_conjugate(self, beta: Vec, other: Vec) -> bool:
        if tuple(other) not in self.roots:
            raise RootSystemError(f"{other} is not a root")
        return tuple(other) in self.orbit(beta)

    def squared_lengths(self) -> list[Fraction]:
        return sorted({dot(v, v) for v in self.positive_roots})

    @property
    def kappa(self) -> Fraction:
        """Long/short squared-length ratio (1 when simply laced)."""
        lengths = self.squared_lengths()
        return lengths[-1] / lengths[0]


def build_root_system(label: CartanLabel | str) -> RootSystem:
    if isinstance(label, str):
        label = CartanLabel.parse(label)
    sys = RootSystem(bourbaki_simple_roots(label), label)
    if 2 * len(sys.positive_coords) != label.root_count():
        raise RootSystemError(f"{label}: generated {2 * len(sys.positive_coords)} roots")
    return sys


