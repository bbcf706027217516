"""Levi subsystems of a relative root system and their rank-2 quotients.

Everything here works in integer coordinates with respect to the relative
simple roots. A corank-2 Levi obtained by removing simple roots ``i < j``
sends each positive root ``c`` outside the Levi to the pair ``(c_i, c_j)``,
which is its projection written in the basis of projected removed simple
roots. Twisted type names are read off from the absolute roots lying over
the Levi: ``~X`` for a Galois orbit of several components, ``2X``/``3X`` for
a single component on which the diagram automorphism acts nontrivially.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from ._linalg import Vec, combine, solve
from .roots import (
    RootSystemError,
    cartan_matrix,
    classify_cartan,
    opposition_from_cartan,
    type_string,
)
from .twisted import RelativeSystem

Coords = tuple[int, ...]


class LeviError(RootSystemError):
    pass


def _unit(n: int, k: int) -> Coords:
    return tuple(int(t == k - 1) for t in range(n))


def _indecomposables(positive: Iterable[Coords]) -> list[Coords]:
    pos = sorted(set(positive), key=lambda c: (sum(c), c))
    pset = set(pos)
    out = []
    for c in pos:
        if not any(
            tuple(x - y for x, y in zip(c, d)) in pset for d in pos if sum(d) < sum(c)
        ):
            out.append(c)
    return out


@dataclass(frozen=True, eq=False)
class LeviDatum:
    """A Levi subsystem of ``ambient`` given by its simple roots.

    ``removed`` lists the ambient simple indices (1-based) that are not simple
    roots of the Levi. For an envelope, ``marked`` is the simple root added to
    the inner Levi.
    """

    ambient: RelativeSystem
    removed: frozenset[int]
    levi_simples: tuple[Coords, ...]
    levi_positive: tuple[Coords, ...]
    marked: Coords | None = None

    def __post_init__(self):
        if not self.removed:
            raise LeviError("removed set must be nonempty")

    def is_closed(self) -> bool:
        """Positive roots map to roots under every simple reflection of the Levi."""
        pset = set(self.levi_positive)
        for s in self.levi_simples:
            refl = self.ambient.system.reflection_coords(s)
            for c in self.levi_positive:
                rc = refl(c)
                if rc not in pset and tuple(-x for x in rc) not in pset:
                    return False
        return True

    @property
    def rank(self) -> int:
        return len(self.levi_simples)

    @property
    def corank(self) -> int:
        return self.ambient.system.rank - self.rank

    @cached_property
    def is_standard(self) -> bool:
        return all(sum(c) == 1 for c in self.levi_simples)

    def vector(self, coords: Sequence[int]) -> Vec:
        return self.ambient.system.vector(coords)

    @cached_property
    def simple_vectors(self) -> tuple[Vec, ...]:
        return tuple(self.vector(c) for c in self.levi_simples)

    @cached_property
    def type_name(self) -> str:
        return type_string(name for name, _ in self.named_components)

    @cached_property
    def named_components(self) -> list[tuple[str, tuple[Coords, ...]]]:
        """(name, relative simple roots) per Galois orbit of absolute components."""
        return _named_components(self.ambient, self.levi_positive)

    def component_of(self, coords: Coords) -> tuple[str, tuple[Coords, ...]]:
        for name, simples in self.named_components:
            if coords in simples:
                return name, simples
        raise LeviError(f"{coords} is not a simple root of this Levi")


def standard_levi(ambient: RelativeSystem, removed: Iterable[int]) -> LeviDatum:
    sysm = ambient.system
    removed = frozenset(removed)
    if not removed or any(not 1 <= k <= sysm.rank for k in removed):
        raise LeviError(f"invalid removed set {sorted(removed)} for rank {sysm.rank}")
    simples = tuple(_unit(sysm.rank, k) for k in range(1, sysm.rank + 1) if k not in removed)
    positive = tuple(
        c for c in sysm.positive_coords if all(c[k - 1] == 0 for k in removed)
    )
    return LeviDatum(ambient, removed, simples, positive)


def corank2_levis(ambient: RelativeSystem) -> list[LeviDatum]:
    n = ambient.system.rank
    if n < 2:
        raise LeviError("corank-2 Levis need ambient rank >= 2")
    return [standard_levi(ambient, (i, j)) for i in range(1, n) for j in range(i + 1, n + 1)]


def _pair(levi: LeviDatum, c: Coords) -> tuple[int, int]:
    i, j = sorted(levi.removed)
    return c[i - 1], c[j - 1]


def _require_corank2(levi: LeviDatum) -> None:
    if len(levi.removed) != 2 or not levi.is_standard:
        raise LeviError("a standard corank-2 Levi is required")


@dataclass(frozen=True)
class QuotientRootSet:
    """Positive quotient roots as pairs ``(a, b)`` meaning ``a*abar_i + b*abar_j``."""

    roots: tuple[tuple[int, int], ...]
    type_label: str
    long_root: tuple[int, int] | None
    short_root: tuple[int, int] | None


SigmaMu = QuotientRootSet


def _projected_coords(levi: LeviDatum, coords: Sequence[int]) -> tuple[Fraction, ...]:
    """Coordinates of the projection of a root away from the Levi span."""
    g = levi.ambient.system._int_gram
    m = levi.levi_simples
    if not m:
        return tuple(Fraction(x) for x in coords)

    def form(x, y):
        return sum(xi * g[r][c] * yj for r, xi in enumerate(x) if xi for c, yj in enumerate(y) if yj)

    x = solve([[form(a, b) for b in m] for a in m], [form(a, coords) for a in m])
    out = [Fraction(t) for t in coords]
    for xk, a in zip(x, m):
        for r, ar in enumerate(a):
            out[r] -= xk * ar
    return tuple(out)


def projected_vector(levi: LeviDatum, coords: Sequence[int]) -> Vec:
    """Orthogonal projection of a relative root onto the complement of the Levi span."""
    return levi.vector(_projected_coords(levi, coords))


def _quotient_gram(levi: LeviDatum) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    _require_corank2(levi)
    cache = levi.__dict__
    if "_qgram" not in cache:
        n = levi.ambient.system.rank
        sysm = levi.ambient.system
        g = sysm._int_gram
        scale = sysm.gram[0][0] / g[0][0]
        i, j = sorted(levi.removed)
        pi = _projected_coords(levi, _unit(n, i))
        pj = _projected_coords(levi, _unit(n, j))

        def form(x, y):
            return sum(xi * g[r][c] * yj for r, xi in enumerate(x) if xi for c, yj in enumerate(y) if yj)

        cache["_qgram"] = tuple(tuple(scale * form(x, y) for y in (pi, pj)) for x in (pi, pj))
    return cache["_qgram"]


def quotient_basis(levi: LeviDatum) -> tuple[Vec, Vec]:
    """Projections of the two removed simple roots."""
    _require_corank2(levi)
    n = levi.ambient.system.rank
    i, j = sorted(levi.removed)
    return projected_vector(levi, _unit(n, i)), projected_vector(levi, _unit(n, j))


def quotient_vector(levi: LeviDatum, pair: tuple[int, int]) -> Vec:
    bi, bj = quotient_basis(levi)
    return combine(pair, [bi, bj])


def quotient_form(levi: LeviDatum, p: Sequence, q: Sequence) -> Fraction:
    """Invariant form on quotient roots written as pairs."""
    g = _quotient_gram(levi)
    return sum(p[r] * g[r][c] * q[c] for r in range(2) for c in range(2))


def _rays(levi: LeviDatum) -> dict[tuple[int, int], tuple[int, int]]:
    """Primitive direction -> least occurring pair on that ray."""
    best: dict[tuple[int, int], tuple[int, int]] = {}
    for c in levi.ambient.system.positive_coords:
        a, b = _pair(levi, c)
        if a < 0 or b < 0:
            raise LeviError("negative coefficient in a positive root")
        if a == 0 and b == 0:
            continue
        g = gcd(a, b)
        key = (a // g, b // g)
        if key not in best or (a, b) < best[key]:
            best[key] = (a, b)
    return best


def _slope(p: tuple[int, int]) -> Fraction:
    return Fraction(p[1], p[0] + p[1])


# Positive roots of the rank-2 types in a base (a, b) with a long, b short.
_PATTERNS = {
    "A2": {(1, 0), (0, 1), (1, 1)},
    "B2": {(1, 0), (0, 1), (1, 1), (1, 2)},
    "G2": {(1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3)},
}


def _in_base(p, lo, hi) -> tuple[Fraction, Fraction]:
    det = lo[0] * hi[1] - lo[1] * hi[0]
    return Fraction(p[0] * hi[1] - p[1] * hi[0], det), Fraction(lo[0] * p[1] - lo[1] * p[0], det)


def classify_rays(levi: LeviDatum, pairs: Sequence[tuple[int, int]]) -> QuotientRootSet:
    """Combinatorial type of a set of positive quotient roots.

    The base is formed by the two extreme rays; the type is read off from
    the coefficients of the other roots in that base. The long base root is
    the one with coefficient 1 in every root, as in the B2 and G2 patterns.
    """
    pairs = tuple(sorted(pairs, key=_slope))
    n = len(pairs)
    if n == 0:
        return QuotientRootSet((), "T", None, None)
    if n == 1:
        return QuotientRootSet(pairs, "A1", None, None)
    lo, hi = pairs[0], pairs[-1]
    coeffs = [_in_base(p, lo, hi) for p in pairs]
    if n == 2:
        return QuotientRootSet(pairs, "A1xA1", None, None)
    label = "irregular"
    long_root = short_root = None
    for name, pattern in _PATTERNS.items():
        if {(c[0], c[1]) for c in coeffs} == pattern:
            label, long_root, short_root = name, lo, hi
        elif {(c[1], c[0]) for c in coeffs} == pattern:
            label, long_root, short_root = name, hi, lo
    if label == "A2":
        long_root = short_root = None
    return QuotientRootSet(pairs, label, long_root, short_root)


def is_root_system(levi: LeviDatum, pairs: Sequence[tuple[int, int]]) -> bool:
    """Whether the quotient roots are closed under their own reflections."""
    signed = set(pairs) | {(-a, -b) for a, b in pairs}
    for x in pairs:
        xx = quotient_form(levi, x, x)
        for y in pairs:
            k = 2 * quotient_form(levi, x, y) / xx
            if (y[0] - k * x[0], y[1] - k * x[1]) not in signed:
                return False
    return True


def quotient_roots(levi: LeviDatum) -> QuotientRootSet:
    _require_corank2(levi)
    return classify_rays(levi, list(_rays(levi).values()))


def envelope_levi(levi: LeviDatum, pair: tuple[int, int]) -> LeviDatum:
    """Smallest Levi containing ``levi`` whose roots project onto the ray of ``pair``."""
    _require_corank2(levi)
    rays = _rays(levi)
    if tuple(pair) not in rays.values():
        raise LeviError(f"{pair} is not a quotient root")
    a, b = pair
    positive = tuple(
        c for c in levi.ambient.system.positive_coords
        if _pair(levi, c)[0] * b == _pair(levi, c)[1] * a
    )
    simples = _indecomposables(positive)
    added = [c for c in simples if c not in levi.levi_simples]
    if len(added) != 1 or _pair(levi, added[0]) != tuple(pair):
        raise LeviError("envelope is not of corank one over the inner Levi")
    inner = set(levi.levi_simples)
    ordered = tuple(c for c in simples if c in inner) + (added[0],)
    return LeviDatum(levi.ambient, levi.removed, ordered, positive, marked=added[0])


def is_self_conjugate(inner: LeviDatum, envelope: LeviDatum) -> bool:
    """Whether -w0 of the envelope preserves the inner simple roots."""
    if envelope.marked is None or envelope.rank != inner.rank + 1:
        raise LeviError("envelope must be a corank-one extension of inner")
    if not set(inner.levi_simples) <= set(envelope.levi_simples):
        raise LeviError("inner Levi is not contained in the envelope")
    sigma = opposition_from_cartan(envelope.ambient.system.cartan_of(envelope.levi_simples))
    k = envelope.levi_simples.index(envelope.marked)
    return sigma[k] == k


def sigma_mu(levi: LeviDatum) -> SigmaMu:
    quot = quotient_roots(levi)
    keep = [p for p in quot.roots if is_self_conjugate(levi, envelope_levi(levi, p))]
    return classify_rays(levi, keep)


def is_relevant(levi: LeviDatum) -> bool:
    return sigma_mu(levi).type_label in ("B2", "G2")


def _named_components(
    rel: RelativeSystem, positive: Sequence[Coords]
) -> list[tuple[str, tuple[Coords, ...]]]:
    form = rel.form
    absolute = form.absolute
    pset = set(positive)
    over = []
    for c in absolute.positive_coords:
        r = form.relative_coords(c)
        half = tuple(x // 2 for x in r) if all(x % 2 == 0 for x in r) else None
        if r in pset or half in pset:
            over.append(c)
    simples = _indecomposables(over)
    if not simples:
        return []
    comps = classify_cartan(cartan_matrix([absolute.vector(c) for c in simples]))
    comp_sets = [frozenset(simples[k] for k in nodes) for _, nodes in comps]
    seen: set[int] = set()
    out = []
    for idx, (name, _) in enumerate(comps):
        if idx in seen:
            continue
        orbit = [idx]
        cur = comp_sets[idx]
        while True:
            cur = frozenset(form.apply_coords(c) for c in cur)
            k = comp_sets.index(cur)
            if k == idx:
                break
            orbit.append(k)
        seen.update(orbit)
        roots = comp_sets[idx]
        if len(orbit) > 1:
            label = "~" + name
        else:
            moved = any(form.apply_coords(c) != c for c in roots)
            if not moved:
                label = name
            else:
                img = {c: form.apply_coords(c) for c in roots}
                order = 2
                if any(img.get(img[c], c) != c for c in roots):
                    order = 6 if form.full_group_s3 else 3
                label = f"{order}{name}"
        members = set()
        for k in orbit:
            members |= comp_sets[k]
        rel_simples = tuple(sorted({form.relative_coords(c) for c in members}))
        out.append((label, rel_simples))
    return out


def type_of_roots(rel: RelativeSystem, positive: Sequence[Coords]) -> str:
    """Twisted type name of the Levi with the given positive relative roots."""
    return type_string(name for name, _ in _named_components(rel, positive))
