"""Formal products of factors ``(1 - q^(a + b s))^(+-1)``.

``q > 1`` stays symbolic: a factor vanishes at a real ``s`` exactly when its
exponent ``a + b s`` does, so zero and pole orders are decided by exponent
arithmetic alone. Real zeros and poles can only sit at the finitely many
points ``-a/b``, which is where the sign predicates are evaluated.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from ._linalg import Vec, dot, fmt, parse_fraction, scale
from .roots import RootSystem, RootSystemError


class QFactorError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class QFactor:
    a: Fraction
    b: Fraction
    exp: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.exp not in (1, -1):
            raise QFactorError("exp must be +1 or -1")

    def vanishes_at(self, s) -> bool:
        return self.a + self.b * Fraction(s) == 0

    def zero_location(self) -> Fraction | None:
        return None if self.b == 0 else -self.a / self.b

    def to_json(self) -> dict:
        return {"a": fmt(self.a), "b": fmt(self.b), "exp": self.exp}

    @classmethod
    def from_json(cls, d: Mapping) -> "QFactor":
        return cls(parse_fraction(d["a"]), parse_fraction(d["b"]), int(d["exp"]))


class QProduct:
    """A multiset of factors; multiplication adds multiplicities."""

    __slots__ = ("_factors",)

    def __init__(self, factors: Iterable[QFactor] = ()):
        self._factors = Counter(factors)

    @property
    def factors(self) -> Counter:
        return Counter(self._factors)

    def __iter__(self):
        return iter(sorted(self._factors.elements()))

    def __len__(self) -> int:
        return sum(self._factors.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, QProduct) and self._factors == other._factors

    def __hash__(self):
        return hash(frozenset(self._factors.items()))

    def __repr__(self) -> str:
        return f"QProduct({list(self)!r})"

    def __mul__(self, other: "QProduct") -> "QProduct":
        return QProduct((self._factors + other._factors).elements())

    def __truediv__(self, other: "QProduct") -> "QProduct":
        if other._factors - self._factors:
            raise QFactorError("divisor is not a sub-multiset of the product")
        return QProduct((self._factors - other._factors).elements())

    def map(self, fn: Callable[[QFactor], QFactor]) -> "QProduct":
        return QProduct(fn(f) for f in self._factors.elements())

    def candidate_points(self) -> list[Fraction]:
        return sorted({z for f in self._factors if (z := f.zero_location()) is not None})

    def to_json(self) -> list[dict]:
        return [f.to_json() for f in self]

    @classmethod
    def from_json(cls, items: Iterable[Mapping]) -> "QProduct":
        return cls(QFactor.from_json(d) for d in items)


def _check_degenerate(p: QProduct) -> None:
    for f in p.factors:
        if f.a == 0 and f.b == 0:
            raise QFactorError("factor with identically vanishing exponent")


def zero_pole_counts(p: QProduct, s0) -> tuple[int, int]:
    zn = zp = 0
    for f, m in p.factors.items():
        if f.vanishes_at(s0):
            if f.exp > 0:
                zn += m
            else:
                zp += m
    return zn, zp


def is_holomorphic_negative(p: QProduct) -> bool:
    _check_degenerate(p)
    for s0 in p.candidate_points():
        if s0 < 0:
            zn, zp = zero_pole_counts(p, s0)
            if zn < zp:
                return False
    return True


def is_nonvanishing_positive(p: QProduct) -> bool:
    _check_degenerate(p)
    for s0 in p.candidate_points():
        if s0 > 0:
            zn, zp = zero_pole_counts(p, s0)
            if zn > zp:
                return False
    return True


@dataclass(frozen=True)
class AffineWeight:
    """``base + s * direction``."""

    base: Vec
    direction: Vec


def _coroot_pairing(lam: Vec, beta: Vec) -> Fraction:
    return 2 * dot(lam, beta) / dot(beta, beta)


def _pairings(nu, beta: Vec) -> tuple[Fraction, Fraction]:
    if isinstance(nu, AffineWeight):
        return _coroot_pairing(nu.base, beta), _coroot_pairing(nu.direction, beta)
    return _coroot_pairing(nu, beta), Fraction(0)


class LabelAssignment:
    """Positive labels on roots, with ``label(-b) == label(b)``."""

    def __init__(self, values: Mapping[Vec, Fraction]):
        vals = {}
        for r, v in values.items():
            v = Fraction(v)
            if v <= 0:
                raise QFactorError("labels must be positive")
            vals[tuple(r)] = v
            vals[tuple(-x for x in r)] = v
        self._values = vals

    def __call__(self, beta: Vec) -> Fraction:
        try:
            return self._values[tuple(beta)]
        except KeyError:
            raise QFactorError(f"no label for {tuple(beta)}") from None

    def roots(self) -> list[Vec]:
        return list(self._values)

    def values(self) -> set[Fraction]:
        return set(self._values.values())

    @classmethod
    def uniform(cls, roots: Iterable[Vec], value) -> "LabelAssignment":
        return cls({tuple(r): Fraction(value) for r in roots})

    @classmethod
    def by_length(cls, roots: Iterable[Vec], short, long=None) -> "LabelAssignment":
        roots = [tuple(r) for r in roots]
        lengths = sorted({dot(r, r) for r in roots})
        if len(lengths) > 2:
            raise QFactorError("more than two root lengths")
        long = short if long is None else long
        return cls({r: Fraction(short if dot(r, r) == lengths[0] else long) for r in roots})

    def is_conjugation_invariant(self, system: RootSystem) -> bool:
        return all(self(system.reflect(r, a)) == self(r) for r in system.roots for a in system.simple_roots)

    def scaled(self, c) -> "LabelAssignment":
        c = Fraction(c)
        return LabelAssignment({r: v * c for r, v in self._values.items()})


def mu_product(roots: Iterable[Vec], eps: LabelAssignment, nu) -> QProduct:
    """Product over ``roots`` of (1-q^<nu,b>) / (1-q^(-1/eps_b + <nu,b>))."""
    out = []
    for beta in roots:
        a, b = _pairings(nu, beta)
        out.append(QFactor(a, b, 1))
        out.append(QFactor(a - 1 / eps(beta), b, -1))
    return QProduct(out)


def _outside(positive: Iterable[Vec], levi_positive: Iterable[Vec]) -> list[Vec]:
    inner = {tuple(r) for r in levi_positive}
    return [tuple(r) for r in positive if tuple(r) not in inner]


def c_function_over(roots: Iterable[Vec], eps: LabelAssignment, nu_base: Vec, omega: Vec) -> QProduct:
    out = []
    for beta in roots:
        x = _coroot_pairing(nu_base, beta)
        y = _coroot_pairing(omega, beta)
        out.append(QFactor(-x, -y, 1))
        out.append(QFactor(x - 1 / eps(beta), y, -1))
    return QProduct(out)


def c_function(
    positive: Iterable[Vec],
    levi_positive: Iterable[Vec],
    eps: LabelAssignment,
    nu_base: Vec,
    omega: Vec,
) -> QProduct:
    """C(s) over the positive roots outside the Levi."""
    return c_function_over(_outside(positive, levi_positive), eps, nu_base, omega)


def gamma_index(beta: Vec, eps: LabelAssignment, omega: Vec) -> Fraction:
    return eps(beta) * _coroot_pairing(omega, beta)


def gamma_indices(positive, levi_positive, eps: LabelAssignment, omega: Vec) -> list[Fraction]:
    return sorted({gamma_index(b, eps, omega) for b in _outside(positive, levi_positive)})


def gamma_i(positive, levi_positive, eps: LabelAssignment, nu_base: Vec, omega: Vec, i) -> QProduct:
    i = Fraction(i)
    roots = [b for b in _outside(positive, levi_positive) if gamma_index(b, eps, omega) == i]
    return c_function_over(roots, eps, nu_base, omega)


def rescale(eps: LabelAssignment, nu: Vec, c=None) -> tuple[LabelAssignment, Vec]:
    """Equal labels ``e`` become ``e / c`` and ``nu`` becomes ``c * nu`` (default ``c = e``)."""
    vals = eps.values()
    if len(vals) != 1:
        raise QFactorError("rescaling needs all labels equal")
    c = next(iter(vals)) if c is None else Fraction(c)
    if c <= 0:
        raise QFactorError("scale must be positive")
    return eps.scaled(1 / c), scale(c, nu)


def rescale_product(p: QProduct, c) -> QProduct:
    """The product rewritten in the variable ``s' = c s`` after rescaling by ``c``."""
    c = Fraction(c)
    return p.map(lambda f: QFactor(c * f.a, f.b, f.exp))


@dataclass(frozen=True)
class KappaTransform:
    roots: dict  # original root -> transformed root
    labels: LabelAssignment
    kappa: Fraction
    system: RootSystem

    @property
    def type_name(self) -> str:
        return self.system.type_name


def kappa_transform(system: RootSystem, eps: LabelAssignment) -> KappaTransform:
    """Divide long roots by the length ratio so that all labels become the short label."""
    lengths = system.squared_lengths()
    if len(lengths) != 2:
        raise QFactorError("kappa transform needs a system with two root lengths")
    short, long = lengths
    kappa = long / short
    s_lab = {eps(r) for r in system.roots if dot(r, r) == short}
    l_lab = {eps(r) for r in system.roots if dot(r, r) == long}
    if len(s_lab) != 1 or len(l_lab) != 1:
        raise QFactorError("labels must be constant on each root length")
    es, el = s_lab.pop(), l_lab.pop()
    if el / es != kappa:
        raise QFactorError(f"label ratio {el / es} differs from the length ratio {kappa}")

    def tr(r: Vec) -> Vec:
        return scale(1 / kappa, r) if dot(r, r) == long else tuple(r)

    mapping = {r: tr(r) for r in system.roots}
    new_system = RootSystem(tuple(tr(a) for a in system.simple_roots))
    return KappaTransform(mapping, LabelAssignment.uniform(mapping.values(), es), kappa, new_system)


def weight_from_pairings(system: RootSystem, pairings: Sequence) -> Vec:
    """The weight in the root span with given pairings against the simple coroots."""
    if len(pairings) != system.rank:
        raise QFactorError(f"expected {system.rank} pairings, got {len(pairings)}")
    vec = tuple(Fraction(0) for _ in range(system.dim))
    for k, p in enumerate(pairings, start=1):
        if p:
            w = system.fundamental_weight(k)
            vec = tuple(x + Fraction(p) * y for x, y in zip(vec, w))
    return vec


def steinberg_point(system: RootSystem, eps: LabelAssignment) -> Vec:
    return weight_from_pairings(system, [1 / eps(a) for a in system.simple_roots])


def residue_index(system: RootSystem, eps: LabelAssignment, nu: Vec) -> int:
    """#{b > 0 : <nu,b^vee> = 1/eps_b} - #{b > 0 : <nu,b^vee> = 0}."""
    try:
        system.coords(nu)
    except RootSystemError:
        raise QFactorError("nu is not in the span of the roots") from None
    hits = zeros = 0
    for beta in system.positive_roots:
        x = _coroot_pairing(nu, beta)
        if x == 1 / eps(beta):
            hits += 1
        elif x == 0:
            zeros += 1
    return hits - zeros


def is_residue_point(system: RootSystem, eps: LabelAssignment, nu: Vec) -> bool:
    return residue_index(system, eps, nu) == system.rank
