"""Corank-2 case catalog: enumeration, reference table and diff.

Every standard corank-2 Levi of every form is turned into a ``CaseRecord``.
Relevant cases (those where the self-conjugate quotient roots form B2 or G2)
additionally carry per-root data and hypothesis verdicts for each admissible
label combination. ``verify_against_reference`` compares records field by
field with the shipped table in ``data/reference.json``.
"""
from __future__ import annotations

import ast
import json
import operator
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._linalg import fmt, parse_fraction
from .labels import (
    LabelError,
    absolute_norm,
    allowed_labels,
    bar_from_tilde,
    bar_scalar_predicted,
    check_hypothesis,
    envelope_pair_types,
    second_l_function_constant,
    epsilon_bar,
    epsilon_bar_ratio,
    tilde_norm,
)
from .levi import (
    LeviDatum,
    corank2_levis,
    envelope_levi,
    quotient_form,
    quotient_roots,
    sigma_mu,
    standard_levi,
)
from .roots import CartanLabel, type_string
from .twisted import FormLabel, RelativeSystem, build_form, relative_root_system

Pair = tuple[int, int]

RELEVANT_TYPES = ("B2", "G2")


class CatalogError(ValueError):
    pass


# ---------------------------------------------------------------- forms


def all_forms(max_rank: int = 12) -> list[FormLabel]:
    """Every form covered by the catalog whose absolute rank is at most ``max_rank``."""
    out = []
    for s, lo in (("A", 1), ("B", 2), ("C", 3), ("D", 4)):
        out += [FormLabel(1, CartanLabel(s, n)) for n in range(lo, max_rank + 1)]
    for s, n in (("E", 6), ("E", 7), ("E", 8), ("F", 4), ("G", 2)):
        if n <= max_rank:
            out.append(FormLabel(1, CartanLabel(s, n)))
    out += [FormLabel(2, CartanLabel("A", m)) for m in range(3, max_rank + 1)]
    out += [FormLabel(2, CartanLabel("D", m)) for m in range(4, max_rank + 1)]
    if max_rank >= 4:
        out += [FormLabel(3, CartanLabel("D", 4)), FormLabel(6, CartanLabel("D", 4))]
    if max_rank >= 6:
        out.append(FormLabel(2, CartanLabel("E", 6)))
    return sorted(out)


def family_of(label: FormLabel) -> str:
    """Name of the catalog family a form belongs to."""
    if label.degree > 1:
        return family_of(FormLabel(1, label.base))
    s, m = label.base.series, label.base.rank
    if label.twist == 1:
        return s if s in "ABCD" else str(label.base)
    if label.twist == 2 and s == "A":
        return "2A_odd" if m % 2 else "2A_even"
    if label.twist == 2 and s == "D":
        return "2D"
    return str(label)


@lru_cache(maxsize=None)
def relative_system(label: FormLabel) -> RelativeSystem:
    return relative_root_system(build_form(label))


# ---------------------------------------------------------------- records


@dataclass(frozen=True)
class RootData:
    """Data attached to one designated root of a relevant case."""

    envelope: str
    envelope_component: str
    inner: str
    tilde_norm: Fraction
    abs_norm: Fraction
    quotient_norm: Fraction
    bar_scalar: Fraction
    bar_predicted: Fraction
    forced_one: bool
    stated: frozenset[Fraction] | None
    source: str

    @property
    def allowed(self) -> frozenset[Fraction] | None:
        if self.stated is None:
            return None
        return self.stated & {Fraction(1)} if self.forced_one else self.stated

    @property
    def bar_consistent(self) -> bool:
        return self.bar_scalar == self.bar_predicted


@dataclass(frozen=True)
class Verdict:
    eps: tuple[tuple[Pair, Fraction], ...]
    eps_bar: tuple[tuple[Pair, Fraction], ...]
    ratio: Fraction
    ratio_formula: Fraction
    kappa: Fraction
    candidates: tuple[tuple[str, bool], ...]

    @property
    def routes_agree(self) -> bool:
        return self.ratio == self.ratio_formula

    @property
    def outside(self) -> bool:
        """Whether the long/short ratio on the full system is neither 1 nor kappa."""
        return self.ratio not in (1, self.kappa)

    @property
    def satisfied(self) -> bool:
        return any(ok for _, ok in self.candidates)


@dataclass(frozen=True)
class CaseRecord:
    form: FormLabel
    family: str
    n: int
    removed: Pair
    levi_type: str
    quotient: tuple[Pair, ...]
    quotient_type: str
    quotient_long: Pair | None
    sigma_mu: tuple[Pair, ...]
    sigma_type: str
    relevant: bool
    conditions: tuple[str, ...] = ()
    case_id: str | None = None
    long: Pair | None = None
    short: Pair | None = None
    kappa: Fraction | None = None
    roots: tuple[tuple[Pair, RootData], ...] = ()
    verdicts: tuple[Verdict, ...] = ()

    @property
    def root_data(self) -> dict[Pair, RootData]:
        return dict(self.roots)

    @property
    def unconstrained(self) -> bool:
        return self.relevant and any(d.allowed is None for _, d in self.roots)

    def to_json(self) -> dict:
        return record_to_json(self)


# Arithmetic relations reported for relevant cases of parametric families.
_RELATIONS = (
    ("j=2i", lambda i, j, n: j == 2 * i),
    ("n=2i", lambda i, j, n: n == 2 * i),
)

_PARAMETRIC = {"A", "B", "C", "D", "2A_odd", "2A_even", "2D"}


def detect_conditions(family: str, i: int, j: int, n: int) -> tuple[str, ...]:
    if family not in _PARAMETRIC:
        return ("always",)
    hits = tuple(name for name, rel in _RELATIONS if rel(i, j, n))
    return hits or ("none",)


def _candidate_sets(sigma_type: str, long: Pair, short: Pair) -> list[tuple[str, tuple[Pair, ...]]]:
    out = [("A1 long", (long,)), ("A1 short", (short,))]
    if sigma_type == "G2":
        out += [("A2 long", (long,)), ("A2 short", (short,))]
    out.append((sigma_type, (long, short)))
    return out


def _root_data(levi: LeviDatum, pair: Pair, case_id: str | None) -> RootData:
    env = envelope_levi(levi, pair)
    component, inner = envelope_pair_types(levi, pair)
    forced = second_l_function_constant(component, inner)
    rec = allowed_labels(case_id or "", pair)
    return RootData(
        envelope=env.type_name,
        envelope_component=component,
        inner=inner,
        tilde_norm=tilde_norm(levi, pair),
        abs_norm=absolute_norm(levi, pair),
        quotient_norm=quotient_form(levi, pair, pair),
        bar_scalar=bar_from_tilde(levi, pair),
        bar_predicted=bar_scalar_predicted(levi, pair),
        forced_one=forced,
        stated=rec.allowed,
        source=rec.source,
    )


def _verdicts(levi: LeviDatum, rec: CaseRecord, data: Mapping[Pair, RootData]) -> tuple[Verdict, ...]:
    long, short = rec.long, rec.short
    if any(data[p].allowed is None for p in (long, short)):
        return ()
    norms = {p: data[p].quotient_norm for p in (long, short)}
    out = []
    for el, es in product(sorted(data[long].allowed), sorted(data[short].allowed)):
        bl = epsilon_bar(levi, long, el)
        bs = epsilon_bar(levi, short, es)
        ratio = bl / bs
        formula = epsilon_bar_ratio(levi, long, short, el, es)
        labels = {long: bl, short: bs}
        cands = []
        for name, members in _candidate_sets(rec.sigma_type, long, short):
            try:
                ok = check_hypothesis({p: norms[p] for p in members}, {p: labels[p] for p in members})
            except LabelError:
                ok = False
            cands.append((name, ok))
        out.append(
            Verdict(
                eps=((long, el), (short, es)),
                eps_bar=((long, bl), (short, bs)),
                ratio=ratio,
                ratio_formula=formula,
                kappa=rec.kappa,
                candidates=tuple(cands),
            )
        )
    return tuple(out)


def build_record(label: FormLabel, levi: LeviDatum, table: "ReferenceTable | None" = None) -> CaseRecord:
    table = default_table() if table is None else table
    family = family_of(label)
    n = levi.ambient.system.rank
    i, j = sorted(levi.removed)
    quot = quotient_roots(levi)
    smu = sigma_mu(levi)
    relevant = smu.type_label in RELEVANT_TYPES
    ref = table.match(family, n, (i, j))
    rec = CaseRecord(
        form=label,
        family=family,
        n=n,
        removed=(i, j),
        levi_type=levi.type_name,
        quotient=quot.roots,
        quotient_type=quot.type_label,
        quotient_long=quot.long_root,
        sigma_mu=smu.roots,
        sigma_type=smu.type_label,
        relevant=relevant,
        case_id=ref.id if ref else None,
    )
    if not relevant:
        return rec
    data = {p: _root_data(levi, p, rec.case_id) for p in (smu.long_root, smu.short_root)}
    kappa = data[smu.long_root].quotient_norm / data[smu.short_root].quotient_norm
    rec = replace(
        rec,
        conditions=detect_conditions(family, i, j, n),
        long=smu.long_root,
        short=smu.short_root,
        kappa=kappa,
        roots=tuple(sorted(data.items())),
    )
    return replace(rec, verdicts=_verdicts(levi, rec, data))


def enumerate_cases(form: FormLabel | str, max_rank: int = 12) -> list[CaseRecord]:
    """Records for every corank-2 standard Levi of ``form``.

    Forms of absolute rank above ``max_rank`` give an empty list.
    """
    if isinstance(form, str):
        from .cli import parse_form_spec

        form = parse_form_spec(form)
    if form.base.rank * form.degree > max_rank:
        return []
    rel = relative_system(form)
    if rel.system.rank < 2:
        return []
    return [build_record(form, levi) for levi in corank2_levis(rel)]


def case_record(form: FormLabel | str, removed: Iterable[int]) -> CaseRecord:
    if isinstance(form, str):
        from .cli import parse_form_spec

        form = parse_form_spec(form)
    removed = tuple(sorted(removed))
    if len(removed) != 2:
        raise CatalogError("exactly two simple roots must be removed")
    return build_record(form, standard_levi(relative_system(form), removed))


@dataclass(frozen=True)
class Report:
    records: tuple[CaseRecord, ...]

    @property
    def relevant(self) -> list[CaseRecord]:
        return [r for r in self.records if r.relevant]

    def relevant_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            counts.setdefault(str(r.form), 0)
            counts[str(r.form)] += r.relevant
        return counts

    def outside_ratios(self) -> list[tuple[CaseRecord, Verdict]]:
        return [(r, v) for r in self.records for v in r.verdicts if v.outside]


def _enumerate_one(args) -> list[CaseRecord]:
    form, max_rank = args
    return enumerate_cases(form, max_rank)


def full_report(
    max_rank: int = 12,
    forms: Sequence[FormLabel] | None = None,
    workers: int | None = None,
) -> Report:
    """All records over ``forms`` (default: every catalog form), sorted by form then removed."""
    forms = sorted(all_forms(max_rank) if forms is None else forms)
    jobs = [(f, max_rank) for f in forms]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_enumerate_one, jobs))
    else:
        chunks = [_enumerate_one(job) for job in jobs]
    records = [r for chunk in chunks for r in chunk]
    return Report(tuple(sorted(records, key=lambda r: (r.form, r.removed))))


# ---------------------------------------------------------------- expressions

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: lambda a, b: Fraction(a) / Fraction(b),
}
_CMPOPS = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


@lru_cache(maxsize=None)
def _parse_expr(expr: str) -> ast.Expression:
    return ast.parse(expr.strip(), mode="eval")


def evaluate(expr: str | int, env: Mapping[str, int]):
    """Exact evaluation of a small arithmetic/boolean expression language."""
    if isinstance(expr, (int, Fraction)):
        return expr
    tree = _parse_expr(expr)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, bool)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise CatalogError(f"unknown name {node.id!r} in {expr!r}")
            return env[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return not ev(node.operand)
        if isinstance(node, ast.BoolOp):
            vals = (ev(v) for v in node.values)
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        if isinstance(node, ast.Compare):
            left = ev(node.left)
            for op, right_node in zip(node.ops, node.comparators):
                right = ev(right_node)
                if type(op) not in _CMPOPS or not _CMPOPS[type(op)](left, right):
                    return False
                left = right
            return True
        raise CatalogError(f"unsupported expression {expr!r}")

    value = ev(tree)
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    return value


_BRACES = re.compile(r"\{([^{}]*)\}")
_FACTOR = re.compile(r"^(~|[236])?([A-G])(-?\d+)$")


def expand_pattern(pattern: str, env: Mapping[str, int]) -> str:
    def sub(m):
        v = evaluate(m.group(1), env)
        if isinstance(v, Fraction):
            raise CatalogError(f"non-integral rank in {pattern!r}")
        return str(v)

    return _BRACES.sub(sub, pattern)


def _canonical_factor(prefix: str, series: str, rank: int) -> list[str]:
    if rank <= 0 or (series == "D" and rank == 1):
        return []
    if series in "BC" and rank == 1:
        series = "A"
    if series == "C" and rank == 2:
        series = "B"
    if series == "D" and rank == 2:
        return [f"{prefix}A1"] if prefix == "~" else (["~A1"] if prefix == "2" else ["A1", "A1"])
    if series == "D" and rank == 3:
        series = "A"
    if prefix == "2" and series == "A" and rank == 1:
        prefix = ""
    return [f"{prefix}{series}{rank}"]


def canonical_type(text: str) -> str:
    """Normal form of a product type string such as ``A0xA2x2D3``."""
    names: list[str] = []
    for part in text.split("x"):
        part = part.strip()
        if not part or part == "T":
            continue
        m = _FACTOR.match(part)
        if not m:
            raise CatalogError(f"malformed type factor {part!r}")
        names += _canonical_factor(m.group(1) or "", m.group(2), int(m.group(3)))
    return type_string(names)


def _parse_pair(text: str) -> Pair:
    a, b = (int(x) for x in text.split(","))
    return a, b


def _pair_str(p: Pair | None) -> str | None:
    return None if p is None else f"{p[0]},{p[1]}"


# ---------------------------------------------------------------- reference


@dataclass(frozen=True)
class ReferenceRecord:
    id: str
    family: str
    source: str
    removed: tuple
    domain: str | None
    condition: str
    condition_label: str
    fields: Mapping = field(repr=False, compare=False, hash=False)

    def env(self, n: int, removed: Pair) -> dict[str, int] | None:
        """Variable binding that instantiates this record at ``removed``, if any."""
        if self.domain is None:
            return {"n": n} if tuple(removed) == tuple(self.removed) else None
        env = {"n": n, "i": removed[0], "j": removed[1]}
        if any(evaluate(e, env) != v for e, v in zip(self.removed, removed)):
            return None
        return env if evaluate(self.domain, env) else None

    def get(self, key, default=None):
        return self.fields.get(key, default)


@dataclass(frozen=True)
class ReferenceTable:
    records: tuple[ReferenceRecord, ...]
    exhaustive: frozenset[str]

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ReferenceTable":
        recs = []
        for r in raw["records"]:
            if not r.get("source"):
                raise CatalogError(f"reference record {r.get('id')!r} has no case identifier")
            recs.append(
                ReferenceRecord(
                    id=r["id"],
                    family=r["family"],
                    source=r["source"],
                    removed=tuple(r["removed"]),
                    domain=r.get("domain"),
                    condition=r.get("condition", "True"),
                    condition_label=r.get("condition_label", "always"),
                    fields=_freeze(r),
                )
            )
        fams = frozenset(k for k, v in raw.get("families", {}).items() if v.get("exhaustive"))
        return cls(tuple(recs), fams)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ReferenceTable":
        if path is None:
            text = resources.files("qslabels.data").joinpath("reference.json").read_text()
        else:
            text = Path(path).read_text()
        return cls.from_dict(json.loads(text))

    @property
    def families(self) -> set[str]:
        return {r.family for r in self.records}

    def match(self, family: str, n: int, removed: Pair) -> ReferenceRecord | None:
        hits = [r for r in self.records if r.family == family and r.env(n, removed) is not None]
        if len(hits) > 1:
            raise CatalogError(f"ambiguous reference match for {family} {removed}: {[h.id for h in hits]}")
        return hits[0] if hits else None

    def expected_relevant(self, family: str, n: int) -> list[tuple[str, Pair]]:
        """Instantiations with a true condition for a family member of relative rank ``n``."""
        out = []
        for r in self.records:
            if r.family != family:
                continue
            for i in range(1, n):
                for j in range(i + 1, n + 1):
                    env = r.env(n, (i, j))
                    if env is not None and evaluate(r.condition, env):
                        out.append((r.id, (i, j)))
        return out


def _freeze(obj):
    from types import MappingProxyType

    if isinstance(obj, dict):
        return MappingProxyType({k: _freeze(v) for k, v in obj.items()})
    if isinstance(obj, list):
        return tuple(_freeze(v) for v in obj)
    return obj


@lru_cache(maxsize=None)
def default_table() -> ReferenceTable:
    return ReferenceTable.load()


# ---------------------------------------------------------------- diff


@dataclass(frozen=True)
class Diff:
    form: str
    removed: Pair | None
    case_id: str | None
    field: str
    computed: str
    expected: str

    def __str__(self) -> str:
        where = f"{self.form} {self.removed}" if self.removed else self.form
        case = f" [{self.case_id}]" if self.case_id else ""
        return f"{where}{case} {self.field}: computed {self.computed}, expected {self.expected}"


@dataclass(frozen=True)
class DiffReport:
    diffs: tuple[Diff, ...]
    checked: int

    @property
    def empty(self) -> bool:
        return not self.diffs

    def __bool__(self) -> bool:
        return not self.empty

    def by_field(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for d in self.diffs:
            out[d.field] = out.get(d.field, 0) + 1
        return out

    def to_json(self) -> dict:
        return {
            "checked": self.checked,
            "empty": self.empty,
            "diffs": [
                {
                    "form": d.form,
                    "removed": list(d.removed) if d.removed else None,
                    "case": d.case_id,
                    "field": d.field,
                    "computed": d.computed,
                    "expected": d.expected,
                }
                for d in self.diffs
            ],
        }


def _show(x) -> str:
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, tuple) and x and isinstance(x[0], tuple):
        return "[" + " ".join(_pair_str(p) for p in x) + "]"
    if isinstance(x, tuple) and len(x) == 2 and all(isinstance(v, int) for v in x):
        return _pair_str(x)
    return str(x)


def _compare_case(rec: CaseRecord, ref: ReferenceRecord, env: Mapping[str, int]) -> list[Diff]:
    out: list[Diff] = []

    def diff(name, computed, expected):
        if computed != expected:
            out.append(Diff(str(rec.form), rec.removed, ref.id, name, _show(computed), _show(expected)))

    if ref.get("levi_type") is not None:
        diff("levi_type", canonical_type(rec.levi_type), canonical_type(expand_pattern(ref.get("levi_type"), env)))
    if ref.get("quotient") is not None:
        diff("quotient", tuple(sorted(rec.quotient)), tuple(sorted(_parse_pair(p) for p in ref.get("quotient"))))
    if ref.get("quotient_type") is not None:
        diff("quotient_type", rec.quotient_type, ref.get("quotient_type"))
    if ref.get("quotient_long") is not None:
        diff("quotient_long", rec.quotient_long, _parse_pair(ref.get("quotient_long")))
    expected_rel = bool(evaluate(ref.condition, env))
    diff("relevant", rec.relevant, expected_rel)
    if not (rec.relevant and expected_rel):
        return out
    if ref.condition_label not in rec.conditions:
        diff("condition", "|".join(rec.conditions), ref.condition_label)
    if ref.get("sigma_mu") is not None:
        diff("sigma_mu", tuple(sorted(rec.sigma_mu)), tuple(sorted(_parse_pair(p) for p in ref.get("sigma_mu"))))
    if ref.get("sigma_type") is not None:
        diff("sigma_type", rec.sigma_type, ref.get("sigma_type"))
    if ref.get("long") is not None:
        diff("long", rec.long, _parse_pair(ref.get("long")))
    if ref.get("short") is not None:
        diff("short", rec.short, _parse_pair(ref.get("short")))
    data = rec.root_data
    for key, pattern in (ref.get("envelopes") or {}).items():
        p = _parse_pair(key)
        d = data.get(p)
        want = canonical_type(expand_pattern(pattern, env))
        if d is None:
            diff(f"envelope {key}", "absent", want)
        elif want not in (canonical_type(d.envelope), canonical_type(d.envelope_component)):
            diff(f"envelope {key}", canonical_type(d.envelope), want)
    for name, attr in (("tilde_norms", "tilde_norm"), ("abs_norms", "abs_norm")):
        for key, expr in (ref.get(name) or {}).items():
            p = _parse_pair(key)
            d = data.get(p)
            want = Fraction(evaluate(expr, env))
            diff(f"{attr} {key}", getattr(d, attr) if d else "absent", want)
    if ref.get("same_length") is not None and rec.long in data and rec.short in data:
        same = data[rec.long].abs_norm == data[rec.short].abs_norm
        diff("abs_norms equal", same, bool(ref.get("same_length")))
    for key in ref.get("stated_forced") or ():
        d = data.get(_parse_pair(key))
        diff(f"forced_one {key}", d.forced_one if d else "absent", True)
    return out


def verify_against_reference(records: Iterable[CaseRecord], table: ReferenceTable | None = None) -> DiffReport:
    """Field-by-field exact comparison of computed records with the reference."""
    table = default_table() if table is None else table
    records = list(records)
    diffs: list[Diff] = []
    checked = 0
    seen: dict[tuple[str, int], set] = {}
    for rec in records:
        if rec.family not in table.families:
            continue
        seen.setdefault((rec.family, rec.n), set())
        ref = table.match(rec.family, rec.n, rec.removed)
        if ref is None:
            if rec.relevant and rec.family in table.exhaustive:
                diffs.append(
                    Diff(str(rec.form), rec.removed, None, "unlisted relevant case", rec.sigma_type, "no record")
                )
            continue
        env = ref.env(rec.n, rec.removed)
        checked += 1
        seen[(rec.family, rec.n)].add((ref.id, rec.removed))
        diffs += _compare_case(rec, ref, env)
    # fixed-position records whose form was enumerated must have been matched
    forms_by_family = {(r.family, r.n): str(r.form) for r in records}
    for (fam, n), hit in seen.items():
        for ref in table.records:
            if ref.family == fam and ref.domain is None and (ref.id, tuple(ref.removed)) not in hit:
                diffs.append(Diff(forms_by_family[(fam, n)], tuple(ref.removed), ref.id, "missing case", "absent", "present"))
    return DiffReport(tuple(diffs), checked)


# ---------------------------------------------------------------- serialization


def _root_data_json(d: RootData) -> dict:
    return {
        "envelope": d.envelope,
        "envelope_component": d.envelope_component,
        "inner": d.inner,
        "tilde_norm": fmt(d.tilde_norm),
        "abs_norm": fmt(d.abs_norm),
        "quotient_norm": fmt(d.quotient_norm),
        "bar_scalar": fmt(d.bar_scalar),
        "bar_predicted": fmt(d.bar_predicted),
        "forced_one": d.forced_one,
        "stated": None if d.stated is None else [fmt(x) for x in sorted(d.stated)],
        "allowed": None if d.allowed is None else [fmt(x) for x in sorted(d.allowed)],
        "source": d.source,
    }


def _root_data_from_json(d: Mapping) -> RootData:
    stated = d["stated"]
    return RootData(
        envelope=d["envelope"],
        envelope_component=d["envelope_component"],
        inner=d["inner"],
        tilde_norm=parse_fraction(d["tilde_norm"]),
        abs_norm=parse_fraction(d["abs_norm"]),
        quotient_norm=parse_fraction(d["quotient_norm"]),
        bar_scalar=parse_fraction(d["bar_scalar"]),
        bar_predicted=parse_fraction(d["bar_predicted"]),
        forced_one=d["forced_one"],
        stated=None if stated is None else frozenset(parse_fraction(x) for x in stated),
        source=d["source"],
    )


def _pair_map_json(items) -> dict:
    return {_pair_str(p): fmt(v) for p, v in items}


def _pair_map_from_json(d: Mapping) -> tuple:
    return tuple((_parse_pair(k), parse_fraction(v)) for k, v in d.items())


def record_to_json(rec: CaseRecord) -> dict:
    return {
        "form": str(rec.form),
        "family": rec.family,
        "n": rec.n,
        "removed": list(rec.removed),
        "levi_type": rec.levi_type,
        "quotient": [_pair_str(p) for p in rec.quotient],
        "quotient_type": rec.quotient_type,
        "quotient_long": _pair_str(rec.quotient_long),
        "sigma_mu": [_pair_str(p) for p in rec.sigma_mu],
        "sigma_type": rec.sigma_type,
        "relevant": rec.relevant,
        "conditions": list(rec.conditions),
        "case_id": rec.case_id,
        "long": _pair_str(rec.long),
        "short": _pair_str(rec.short),
        "kappa": None if rec.kappa is None else fmt(rec.kappa),
        "roots": {_pair_str(p): _root_data_json(d) for p, d in rec.roots},
        "verdicts": [
            {
                "eps": _pair_map_json(v.eps),
                "eps_bar": _pair_map_json(v.eps_bar),
                "ratio": fmt(v.ratio),
                "ratio_formula": fmt(v.ratio_formula),
                "kappa": fmt(v.kappa),
                "candidates": dict(v.candidates),
            }
            for v in rec.verdicts
        ],
    }


def record_from_json(d: Mapping) -> CaseRecord:
    from .cli import parse_form_spec

    def opt_pair(x):
        return None if x is None else _parse_pair(x)

    return CaseRecord(
        form=parse_form_spec(d["form"]),
        family=d["family"],
        n=d["n"],
        removed=tuple(d["removed"]),
        levi_type=d["levi_type"],
        quotient=tuple(_parse_pair(p) for p in d["quotient"]),
        quotient_type=d["quotient_type"],
        quotient_long=opt_pair(d["quotient_long"]),
        sigma_mu=tuple(_parse_pair(p) for p in d["sigma_mu"]),
        sigma_type=d["sigma_type"],
        relevant=d["relevant"],
        conditions=tuple(d["conditions"]),
        case_id=d["case_id"],
        long=opt_pair(d["long"]),
        short=opt_pair(d["short"]),
        kappa=None if d["kappa"] is None else parse_fraction(d["kappa"]),
        roots=tuple((_parse_pair(k), _root_data_from_json(v)) for k, v in d["roots"].items()),
        verdicts=tuple(
            Verdict(
                eps=_pair_map_from_json(v["eps"]),
                eps_bar=_pair_map_from_json(v["eps_bar"]),
                ratio=parse_fraction(v["ratio"]),
                ratio_formula=parse_fraction(v["ratio_formula"]),
                kappa=parse_fraction(v["kappa"]),
                candidates=tuple(v["candidates"].items()),
            )
            for v in d["verdicts"]
        ),
    )


def report_to_json(report: Report) -> dict:
    return {
        "summary": {
            "cases": len(report.records),
            "relevant": len(report.relevant),
            "relevant_by_form": report.relevant_counts(),
        },
        "records": [record_to_json(r) for r in report.records],
    }


def _md_row(cells) -> str:
    return "| " + " | ".join(str(c) for c in cells) + " |"


def _md_set(values) -> str:
    return "-" if values is None else "{" + ", ".join(fmt(x) for x in sorted(values)) + "}"


def report_to_markdown(report: Report) -> str:
    lines = []
    by_form: dict[str, list[CaseRecord]] = {}
    for r in report.records:
        by_form.setdefault(str(r.form), []).append(r)
    for form, recs in by_form.items():
        rel = [r for r in recs if r.relevant]
        lines.append(f"## {form}")
        lines.append("")
        lines.append(f"cases: {len(recs)}, relevant: {len(rel)}")
        lines.append("")
        lines.append(_md_row(["removed", "Levi", "quotient", "Sigma_mu", "relevant", "condition", "case"]))
        lines.append(_md_row(["---"] * 7))
        for r in recs:
            lines.append(
                _md_row(
                    [
                        f"{r.removed[0]},{r.removed[1]}",
                        r.levi_type,
                        r.quotient_type,
                        r.sigma_type,
                        "yes" if r.relevant else "no",
                        "|".join(r.conditions) or "-",
                        r.case_id or "-",
                    ]
                )
            )
        if rel:
            lines.append("")
            lines.append(
                _md_row(["removed", "root", "role", "envelope", "tilde norm", "abs norm", "bar scalar", "forced", "allowed eps"])
            )
            lines.append(_md_row(["---"] * 9))
            for r in rel:
                for p, d in r.roots:
                    role = "long" if p == r.long else "short"
                    lines.append(
                        _md_row(
                            [
                                f"{r.removed[0]},{r.removed[1]}",
                                _pair_str(p),
                                role,
                                d.envelope,
                                fmt(d.tilde_norm),
                                fmt(d.abs_norm),
                                fmt(d.bar_scalar),
                                "yes" if d.forced_one else "no",
                                _md_set(d.allowed),
                            ]
                        )
                    )
            vrows = [(r, v) for r in rel for v in r.verdicts]
            if vrows:
                lines.append("")
                lines.append(_md_row(["removed", "eps long", "eps short", "ratio", "kappa", "full system", "some candidate"]))
                lines.append(_md_row(["---"] * 7))
                for r, v in vrows:
                    full = dict(v.candidates)[r.sigma_type]
                    lines.append(
                        _md_row(
                            [
                                f"{r.removed[0]},{r.removed[1]}",
                                fmt(v.eps[0][1]),
                                fmt(v.eps[1][1]),
                                fmt(v.ratio),
                                fmt(v.kappa),
                                "yes" if full else "no",
                                "yes" if v.satisfied else "no",
                            ]
                        )
                    )
        lines.append("")
    total = len(report.relevant)
    lines.append(f"total relevant cases: {total}")
    return "\n".join(lines) + "\n"
