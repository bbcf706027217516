"""Quasi-split forms and their relative root systems.

A form is an absolute root system with a diagram automorphism ``theta``
permuting the simple roots. Restriction to the theta-fixed subspace is the
orbit average. The relative simple roots are the restrictions of one
representative per theta-orbit, numbered in Bourbaki order for the
relative type, e.g. for 2E6 (relative F4)::

    relative a1 <- {a2}, a2 <- {a4}, a3 <- {a3, a5}, a4 <- {a1, a6}
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from ._linalg import Vec
from .roots import CartanLabel, RootSystem, RootSystemError, build_root_system

_TWISTS = (1, 2, 3, 6)


class FormError(RootSystemError):
    pass


@dataclass(frozen=True, order=True)
class FormLabel:
    """``twist`` is the order of the Galois image in the diagram automorphisms.

    ``degree > 1`` marks a restriction of scalars of the split base.
    """

    twist: int
    base: CartanLabel
    degree: int = 1

    def __post_init__(self):
        t, s, n = self.twist, self.base.series, self.base.rank
        if t not in _TWISTS:
            raise FormError(f"twist must be one of 1, 2, 3, 6; got {t}")
        if t == 2 and not ((s == "A" and n >= 2) or s == "D" or (s == "E" and n == 6)):
            raise FormError(f"no order-2 diagram automorphism on {self.base}")
        if t in (3, 6) and (s, n) != ("D", 4):
            raise FormError(f"twist {t} exists only for D4")
        if self.degree < 1:
            raise FormError("degree must be >= 1")
        if self.degree > 1 and t != 1:
            raise FormError("restriction of scalars is only built from split bases")

    def __str__(self) -> str:
        if self.degree > 1:
            return f"Res{self.degree}({self.base})"
        return f"{'' if self.twist == 1 else self.twist}{self.base}"

    @property
    def is_split(self) -> bool:
        return self.twist == 1 and self.degree == 1


def _orbits(label: FormLabel) -> tuple[tuple[int, ...], ...]:
    s, m, t = label.base.series, label.base.rank, label.twist
    if label.degree > 1:
        return tuple(tuple(k + c * m for c in range(label.degree)) for k in range(1, m + 1))
    if t == 1:
        return tuple((k,) for k in range(1, m + 1))
    if s == "A":
        return tuple(tuple(sorted({i, m + 1 - i})) for i in range(1, (m + 1) // 2 + 1))
    if s == "D" and t == 2:
        return tuple((i,) for i in range(1, m - 1)) + ((m - 1, m),)
    if s == "E":
        return ((2,), (4,), (3, 5), (1, 6))
    return ((1, 3, 4), (2,))


def _generator(label: FormLabel) -> tuple[int, ...]:
    """theta on 1-based simple indices, as a tuple ``perm[k-1] = theta(k)``."""
    s, m, t = label.base.series, label.base.rank, label.twist
    if label.degree > 1:
        d = label.degree
        return tuple(((k - 1 + m) % (m * d)) + 1 for k in range(1, m * d + 1))
    if t == 1:
        return tuple(range(1, m + 1))
    if s == "A":
        return tuple(m + 1 - k for k in range(1, m + 1))
    if s == "D" and t == 2:
        return tuple(range(1, m - 1)) + (m, m - 1)
    if s == "E":
        return (6, 2, 5, 4, 3, 1)
    return (3, 2, 4, 1)


@dataclass(frozen=True, eq=False)
class GaloisForm:
    label: FormLabel
    absolute: RootSystem
    diagram_perm: tuple[int, ...]
    full_group_s3: bool = False

    def __post_init__(self):
        a = self.absolute.cartan
        p = self.diagram_perm
        n = len(p)
        if sorted(p) != list(range(1, n + 1)):
            raise FormError("diagram_perm is not a permutation")
        for i in range(n):
            for j in range(n):
                if a[p[i] - 1][p[j] - 1] != a[i][j]:
                    raise FormError("diagram_perm does not preserve the Cartan matrix")

    @property
    def order(self) -> int:
        k, q = 1, self.diagram_perm
        ident = tuple(range(1, len(q) + 1))
        while q != ident:
            q = tuple(self.diagram_perm[x - 1] for x in q)
            k += 1
        return k

    @cached_property
    def orbits(self) -> tuple[tuple[int, ...], ...]:
        return _orbits(self.label)

    def apply_coords(self, coords: Sequence) -> tuple:
        """theta acting on simple-root coordinates."""
        out = [0] * len(coords)
        for k, c in enumerate(coords):
            out[self.diagram_perm[k] - 1] = c
        return tuple(out)

    def average_coords(self, coords: Sequence) -> tuple[Fraction, ...]:
        total = [Fraction(0)] * len(coords)
        cur = tuple(coords)
        o = self.order
        for _ in range(o):
            for k, c in enumerate(cur):
                total[k] += c
            cur = self.apply_coords(cur)
        return tuple(x / o for x in total)

    def restrict(self, v: Vec) -> Vec:
        """Orthogonal projection of a vector in the root span onto the fixed space."""
        return self.absolute.vector(self.average_coords(self.absolute.coords(v)))

    def restrict_root(self, beta: Vec) -> Vec:
        if tuple(beta) not in self.absolute.roots:
            raise FormError(f"{beta} is not an absolute root")
        return self.restrict(beta)

    def projected_coroot(self, beta: Vec) -> Vec:
        return self.restrict(self.absolute.coroot(beta))

    def relative_coords(self, abs_coords: Sequence[int]) -> tuple[int, ...]:
        """Coordinates of the restriction in relative simple roots."""
        return tuple(sum(abs_coords[k - 1] for k in orb) for orb in self.orbits)


def build_form(label: FormLabel | str) -> GaloisForm:
    if isinstance(label, str):
        from .cli import parse_form_spec

        label = parse_form_spec(label)
    if label.degree > 1:
        return restriction_of_scalars(build_root_system(label.base), label.degree)
    absolute = build_root_system(label.base)
    return GaloisForm(label, absolute, _generator(label), full_group_s3=label.twist == 6)


def restriction_of_scalars(base: RootSystem, d: int) -> GaloisForm:
    """d orthogonal copies of ``base``, cyclically permuted."""
    if d < 1:
        raise FormError("degree must be >= 1")
    if base.label is None:
        raise FormError("restriction of scalars needs a labelled base system")
    if d == 1:
        return GaloisForm(FormLabel(1, base.label), base, tuple(range(1, base.rank + 1)))
    dim = base.dim
    simple = []
    for c in range(d):
        for a in base.simple_roots:
            v = [Fraction(0)] * (dim * d)
            v[c * dim:(c + 1) * dim] = a
            simple.append(tuple(v))
    label = FormLabel(1, base.label, degree=d)
    return GaloisForm(label, RootSystem(tuple(simple)), _generator(label))


@dataclass(frozen=True, eq=False)
class RelativeSystem:
    """Reduced relative root system of a form.

    ``system`` has the restricted simple roots as its simple roots, so all
    relative roots carry integer coordinates. ``fibers`` maps each positive
    relative root (coords) to the absolute positive roots restricting to it.
    """

    form: GaloisForm
    system: RootSystem
    fibers: dict = field(repr=False)

    @property
    def type_label(self) -> str:
        return self.system.type_name

    @property
    def roots(self) -> frozenset[Vec]:
        return self.system.roots

    def section(self, rel_coords: Sequence[int]) -> tuple[int, ...]:
        """Lexicographically least absolute positive root restricting exactly to it."""
        fiber = self.fibers.get(tuple(rel_coords))
        if not fiber:
            raise FormError(f"no absolute root restricts to {tuple(rel_coords)}")
        return min(fiber)

    def section_vector(self, rel_coords: Sequence[int]) -> Vec:
        return self.form.absolute.vector(self.section(rel_coords))

    def projected_coroot(self, rel_coords: Sequence[int]) -> Vec:
        return self.form.projected_coroot(self.section_vector(rel_coords))

    @cached_property
    def projected_coroots(self) -> dict:
        return {c: self.projected_coroot(c) for c in self.system.positive_coords}


def relative_root_system(form: GaloisForm) -> RelativeSystem:
    absolute = form.absolute
    simple = tuple(
        form.restrict(absolute.simple_root(orb[0])) for orb in form.orbits
    )
    system = RootSystem(simple, None)
    restricted: dict[tuple[int, ...], list] = {}
    for c in absolute.positive_coords:
        r = form.relative_coords(c)
        if not any(r):
            raise FormError("an absolute root restricts to zero")
        restricted.setdefault(r, []).append(c)
    kept = {
        r for r in restricted
        if not all(x % 2 == 0 for x in r) or tuple(x // 2 for x in r) not in restricted
    }
    if kept != set(system.positive_coords):
        raise FormError(f"{form.label}: restricted roots do not form the expected system")
    fibers = {r: tuple(restricted[r]) for r in system.positive_coords}
    return RelativeSystem(form, system, fibers)


def split_relative(system: RootSystem) -> RelativeSystem:
    """The relative system of a split form is the absolute system itself."""
    return relative_root_system(restriction_of_scalars(system, 1))
