"""Labels on roots and on quotient roots.

For a quotient root ``bbar`` of a corank-2 Levi ``M`` with envelope ``E``
(a Levi of corank one over ``M``), write ``b`` for the absolute root chosen
over the added simple root of ``E``. Then

* ``btilde`` is the fundamental weight of that simple root inside ``E``,
  scaled so that ``<btilde, b^vee> = 1``;
* ``bbar = k * btilde`` with ``k = (b, b) / (2 (btilde, btilde))``;
* the quotient label is ``eps_bar = <bbar, b^vee> / 2 * eps``.

The two resulting formulas for a ratio of quotient labels are kept as
separate code paths so that they can be checked against each other.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

from ._linalg import Vec, dot, scale
from .levi import (
    LeviDatum,
    LeviError,
    envelope_levi,
    quotient_vector,
    type_of_roots,
)
from .roots import fundamental_weight, type_string


class LabelError(ValueError):
    pass


def _section(levi: LeviDatum, envelope: LeviDatum) -> Vec:
    return levi.ambient.section_vector(envelope.marked)


def tilde_vector(levi: LeviDatum, pair: tuple[int, int], envelope: LeviDatum | None = None) -> Vec:
    if envelope is None:
        envelope = envelope_levi(levi, pair)
    if envelope.marked is None:
        raise LeviError("envelope has no marked simple root")
    omega = fundamental_weight(envelope.simple_vectors, levi.vector(envelope.marked))
    b = _section(levi, envelope)
    p = 2 * dot(omega, b) / dot(b, b)
    if p == 0:
        raise LabelError("fundamental weight is orthogonal to the chosen absolute root")
    return scale(1 / p, omega)


def tilde_norm(levi: LeviDatum, pair: tuple[int, int]) -> Fraction:
    t = tilde_vector(levi, pair)
    return dot(t, t)


def absolute_norm(levi: LeviDatum, pair: tuple[int, int]) -> Fraction:
    b = _section(levi, envelope_levi(levi, pair))
    return dot(b, b)


def bar_from_tilde(levi: LeviDatum, pair: tuple[int, int]) -> Fraction:
    """The scalar ``k`` with ``bbar = k * btilde``, read off from the vectors."""
    bbar = quotient_vector(levi, pair)
    t = tilde_vector(levi, pair)
    k = dot(bbar, t) / dot(t, t)
    if scale(k, t) != bbar:
        raise LabelError(f"quotient root {pair} is not proportional to its tilde vector")
    return k


def bar_scalar_predicted(levi: LeviDatum, pair: tuple[int, int]) -> Fraction:
    return absolute_norm(levi, pair) / (2 * tilde_norm(levi, pair))


def epsilon_bar(levi: LeviDatum, pair: tuple[int, int], eps) -> Fraction:
    """Quotient label from the pairing of ``bbar`` with the absolute coroot."""
    bbar = quotient_vector(levi, pair)
    b = _section(levi, envelope_levi(levi, pair))
    return Fraction(eps) * dot(bbar, b) / dot(b, b)


def epsilon_bar_ratio(levi: LeviDatum, pair_p, pair, eps_p, eps) -> Fraction:
    """``eps_bar(pair_p) / eps_bar(pair)`` from norms of absolute and tilde vectors."""
    num = Fraction(eps_p) * absolute_norm(levi, pair_p) * tilde_norm(levi, pair)
    den = Fraction(eps) * absolute_norm(levi, pair) * tilde_norm(levi, pair_p)
    return num / den


# (envelope component, inner Levi of that component); a label over such a
# corank-one pair is always 1 because the second L-function is constant.
_CONSTANT_SECOND_L = frozenset(
    {
        ("D5", "A2xA1xA1"),
        ("D7", "D4xA2"),
        ("C3", "A2"),
        ("2A5", "~A2"),
        ("2D4", "A2"),
    }
)


def _canon(t: str) -> str:
    return type_string(x for x in t.split("x") if x and x != "T")


def second_l_function_constant(envelope_type: str, inner_type: str) -> bool:
    return (_canon(envelope_type), _canon(inner_type)) in _CONSTANT_SECOND_L


def envelope_pair_types(levi: LeviDatum, pair: tuple[int, int]) -> tuple[str, str]:
    """Type of the envelope component holding the added root, and of its inner part."""
    env = envelope_levi(levi, pair)
    name, simples = env.component_of(env.marked)
    units = {c.index(1) for c in simples if c != env.marked and sum(c) == 1}
    inner = [c for c in levi.levi_positive if all(k in units for k, x in enumerate(c) if x)]
    return name, type_of_roots(levi.ambient, inner)


def forced_one(levi: LeviDatum, pair: tuple[int, int]) -> bool:
    return second_l_function_constant(*envelope_pair_types(levi, pair))


def check_hypothesis(norms: Mapping, labels: Mapping) -> bool:
    """Equal labels, or long/short label ratio equal to the squared-length ratio.

    ``norms`` and ``labels`` are keyed by the roots of one irreducible system;
    roots of equal length are conjugate and must carry equal labels.
    """
    if set(norms) != set(labels):
        raise LabelError("norms and labels must be given on the same roots")
    by_len: dict[Fraction, set] = {}
    for r, n in norms.items():
        by_len.setdefault(Fraction(n), set()).add(Fraction(labels[r]))
    if any(len(v) != 1 for v in by_len.values()):
        raise LabelError("labels are not constant on conjugacy classes")
    if len(by_len) > 2:
        raise LabelError("more than two root lengths")
    values = {next(iter(v)) for v in by_len.values()}
    if len(values) == 1:
        return True
    short, long_ = sorted(by_len)
    ratio = next(iter(by_len[long_])) / next(iter(by_len[short]))
    return ratio == long_ / short


@dataclass(frozen=True)
class EpsilonRecord:
    case: str
    root: tuple[int, int]
    allowed: frozenset[Fraction] | None
    forced_one: bool
    source: str

    @property
    def unconstrained(self) -> bool:
        return self.allowed is None


@lru_cache(maxsize=None)
def epsilon_table() -> dict[tuple[str, tuple[int, int]], EpsilonRecord]:
    raw = json.loads(resources.files("qslabels.data").joinpath("epsilon.json").read_text())
    out = {}
    for rec in raw["records"]:
        root = tuple(int(x) for x in rec["root"].split(","))
        allowed = frozenset(Fraction(x) for x in rec["allowed"])
        if not allowed:
            raise LabelError(f"{rec['case']}: empty allowed set")
        if rec["forced_one"] and allowed != {1}:
            raise LabelError(f"{rec['case']}: forced label must be exactly 1")
        out[(rec["case"], root)] = EpsilonRecord(
            rec["case"], root, allowed, rec["forced_one"], rec["source"]
        )
    return out


def allowed_labels(case: str, root: tuple[int, int]) -> EpsilonRecord:
    rec = epsilon_table().get((case, tuple(root)))
    if rec is None:
        return EpsilonRecord(case, tuple(root), None, False, "no stated constraint")
    return rec


def label_combinations(records: Iterable[EpsilonRecord]) -> list[tuple[Fraction, ...]]:
    """Cartesian product of allowed label sets, in the order given."""
    combos: list[tuple[Fraction, ...]] = [()]
    for rec in records:
        if rec.allowed is None:
            raise LabelError(f"{rec.case}: labels are unconstrained")
        combos = [c + (x,) for c in combos for x in sorted(rec.allowed)]
    return combos
