"""Command-line front end and the form/Levi spec grammar.

Form specs::

    FORM  := [TWIST] SERIES RANK
    TWIST := "2" | "3" | "6"
    SERIES:= "A" .. "G"
    RANK  := positive integer without leading zeros

Levi specs are comma-separated 1-based Bourbaki indices, e.g. ``7,8``.

Exit codes: 0 success (or empty diff), 1 verification mismatch, 2 parse or
usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .roots import CartanLabel, RootSystem, RootSystemError
from .twisted import FormLabel

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

_SERIES = "ABCDEFG"


class SpecError(ValueError):
    """Malformed spec text; ``position`` is the 0-based offending offset."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


@dataclass(frozen=True)
class FormSpec:
    raw: str
    parsed: FormLabel

    def render(self) -> str:
        return str(self.parsed)


@dataclass(frozen=True)
class LeviSpec:
    raw: str
    parsed: tuple[int, ...]


def parse_form_spec(text: str) -> FormLabel:
    pos = 0
    n = len(text)
    twist = 1
    if pos < n and text[pos].isdigit() and pos + 1 < n and text[pos + 1].isalpha():
        if text[pos] not in "236":
            raise SpecError(f"invalid twist {text[pos]!r}", text, pos)
        twist = int(text[pos])
        pos += 1
    if pos >= n or text[pos] not in _SERIES:
        raise SpecError("expected a series letter A-G", text, pos)
    series = text[pos]
    pos += 1
    start = pos
    while pos < n and text[pos].isdigit():
        pos += 1
    if pos == start:
        raise SpecError("expected a rank", text, pos)
    if text[start] == "0":
        raise SpecError("rank must be a positive integer without leading zeros", text, start)
    if pos != n:
        raise SpecError(f"unexpected character {text[pos]!r}", text, pos)
    try:
        return FormLabel(twist, CartanLabel(series, int(text[start:pos])))
    except RootSystemError as e:
        raise SpecError(f"invalid form ({e})", text, 0 if twist != 1 else start) from None


def parse_levi_spec(text: str, rank: int) -> tuple[int, ...]:
    """Sorted simple-root indices; each must lie in ``1..rank`` and appear once."""
    out: list[int] = []
    pos = 0
    for piece in text.split(","):
        stripped = piece.strip()
        at = pos + (len(piece) - len(piece.lstrip()))
        if not stripped.isdigit():
            raise SpecError("expected a positive integer index", text, at)
        k = int(stripped)
        if not 1 <= k <= rank:
            raise SpecError(f"index {k} outside 1..{rank}", text, at)
        if k in out:
            raise SpecError(f"duplicate index {k}", text, at)
        out.append(k)
        pos += len(piece) + 1
    return tuple(sorted(out))


def parse_rationals(text: str) -> list[Fraction]:
    out = []
    pos = 0
    for piece in text.split(","):
        try:
            out.append(Fraction(piece.strip()))
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"malformed rational {piece.strip()!r}", text, pos) from None
        pos += len(piece) + 1
    return out


def parse_labels(text: str, system: RootSystem):
    """``short=1,long=2``, ``all=1`` or ``K=value`` for the class of simple root K."""
    from .qfactors import LabelAssignment, QFactorError

    rules: list[tuple[str, Fraction, int]] = []
    pos = 0
    for piece in text.split(","):
        key, sep, val = piece.partition("=")
        key = key.strip()
        if not sep:
            raise SpecError("expected pattern=value", text, pos)
        try:
            value = Fraction(val.strip())
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"malformed label value {val.strip()!r}", text, pos + len(piece) - len(val)) from None
        if key not in ("short", "long", "all") and not (key.isdigit() and 1 <= int(key) <= system.rank):
            raise SpecError(f"unknown root pattern {key!r}", text, pos)
        rules.append((key, value, pos))
        pos += len(piece) + 1
    lengths = system.squared_lengths()
    values = {}
    for r in system.roots:
        chosen = None
        for key, value, _ in rules:
            if key.isdigit():
                hit = r in system.orbit(system.simple_root(int(key)))
            elif key == "all":
                hit = True
            else:
                norm = system.norm(r)
                hit = norm == (lengths[0] if key == "short" else lengths[-1])
            if hit:
                chosen = value
        if chosen is None:
            raise SpecError(f"no label given for root {tuple(map(str, r))}", text, 0)
        values[r] = chosen
    try:
        eps = LabelAssignment(values)
    except QFactorError as e:
        raise SpecError(str(e), text, 0) from None
    if not eps.is_conjugation_invariant(system):
        raise SpecError("labels are not conjugation invariant", text, 0)
    return eps


# ---------------------------------------------------------------- commands


def _forms(spec: str, max_rank: int):
    from .catalog import all_forms

    if spec == "all":
        return all_forms(max_rank)
    return [parse_form_spec(spec)]


def _emit(obj, fmt_name: str, md: str | None = None) -> None:
    if fmt_name == "md" and md is not None:
        sys.stdout.write(md)
    else:
        sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_catalog(args) -> int:
    from .catalog import full_report, report_to_json, report_to_markdown

    report = full_report(args.max_rank, _forms(args.form, args.max_rank), workers=args.workers)
    _emit(report_to_json(report), args.format, report_to_markdown(report))
    return EXIT_OK


def cmd_case(args) -> int:
    from .catalog import Report, case_record, relative_system, report_to_markdown

    form = parse_form_spec(args.form)
    removed = parse_levi_spec(args.remove, relative_system(form).system.rank)
    if len(removed) != 2:
        raise SpecError("exactly two indices are required", args.remove, 0)
    rec = case_record(form, removed)
    _emit(rec.to_json(), args.format, report_to_markdown(Report((rec,))))
    return EXIT_OK


def cmd_check(args) -> int:
    from .catalog import ReferenceTable, full_report, verify_against_reference

    table = ReferenceTable.load(args.reference) if args.reference else None
    report = full_report(args.max_rank, _forms(args.form, args.max_rank), workers=args.workers)
    diff = verify_against_reference(report.records, table)
    if args.format == "json":
        _emit(diff.to_json(), "json")
    else:
        for d in diff.diffs:
            print(f"DIFF {d}")
        print(f"checked {diff.checked} cases, {len(report.relevant)} relevant, {len(diff.diffs)} differences")
    return EXIT_OK if diff.empty else EXIT_MISMATCH


def _levi_subsystem(system: RootSystem, indices: Sequence[int]) -> RootSystem:
    return RootSystem(tuple(system.simple_root(k) for k in indices))


def _nu(text: str, levi: RootSystem, eps):
    from .qfactors import steinberg_point, weight_from_pairings

    if text.strip() == "steinberg":
        return steinberg_point(levi, eps)
    vals = parse_rationals(text)
    if len(vals) != levi.rank:
        raise SpecError(f"expected {levi.rank} pairings", text, 0)
    return weight_from_pairings(levi, vals)


def cmd_gamma(args) -> int:
    from ._linalg import fmt
    from .catalog import relative_system
    from .qfactors import (
        LabelAssignment,
        c_function,
        gamma_i,
        gamma_indices,
        is_holomorphic_negative,
        is_nonvanishing_positive,
    )

    form = parse_form_spec(args.form)
    system = relative_system(form).system
    removed = parse_levi_spec(args.remove, system.rank)
    if len(removed) != 1:
        raise SpecError("C(s) needs exactly one removed simple root", args.remove, 0)
    eps = parse_labels(args.labels, system)
    kept = [k for k in range(1, system.rank + 1) if k not in removed]
    levi = _levi_subsystem(system, kept)
    levi_pos = [r for r in system.positive_roots if all(c == 0 for c in _coords_at(system, r, removed))]
    eps_m = LabelAssignment({r: eps(r) for r in levi.roots})
    nu = _nu(args.nu, levi, eps_m) if kept else tuple(Fraction(0) for _ in range(system.dim))
    omega = system.fundamental_weight(removed[0])
    c = c_function(system.positive_roots, levi_pos, eps, nu, omega)
    gammas = {
        i: gamma_i(system.positive_roots, levi_pos, eps, nu, omega, i)
        for i in gamma_indices(system.positive_roots, levi_pos, eps, omega)
    }
    out = {
        "form": str(form),
        "removed": list(removed),
        "C": c.to_json(),
        "C_holomorphic_negative": is_holomorphic_negative(c),
        "gamma": {fmt(i): g.to_json() for i, g in gammas.items()},
        "gamma_nonvanishing_positive": {fmt(i): is_nonvanishing_positive(g) for i, g in gammas.items()},
    }
    _emit(out, "json")
    return EXIT_OK


def _coords_at(system: RootSystem, r, indices):
    c = system.coords(r)
    return [c[k - 1] for k in indices]


def cmd_residue(args) -> int:
    from .catalog import relative_system
    from .qfactors import LabelAssignment, residue_index

    form = parse_form_spec(args.form)
    system = relative_system(form).system
    kept = parse_levi_spec(args.levi, system.rank)
    levi = _levi_subsystem(system, kept)
    eps_full = parse_labels(args.labels, system)
    eps = LabelAssignment({r: eps_full(r) for r in levi.roots})
    nu = _nu(args.nu, levi, eps)
    idx = residue_index(levi, eps, nu)
    _emit(
        {"form": str(form), "levi": list(kept), "rank": levi.rank, "index": idx, "residue_point": idx == levi.rank},
        "json",
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qslabels", description="Corank-2 Levi case catalog for quasi-split groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, form_default=None):
        sp.add_argument("--form", required=form_default is None, default=form_default)
        sp.add_argument("--max-rank", type=int, default=12)
        sp.add_argument("--workers", type=int, default=None)

    sp = sub.add_parser("catalog", help="enumerate corank-2 cases")
    common(sp, "all")
    sp.add_argument("--format", choices=("json", "md"), default="json")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("case", help="one corank-2 case")
    sp.add_argument("--form", required=True)
    sp.add_argument("--remove", required=True)
    sp.add_argument("--format", choices=("json", "md"), default="json")
    sp.set_defaults(func=cmd_case)

    sp = sub.add_parser("check", help="diff the catalog against the reference table")
    common(sp, "all")
    sp.add_argument("--reference", default=None, help="alternative reference table (JSON)")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("gamma", help="C(s) and gamma_i(s) factor products")
    sp.add_argument("--form", required=True)
    sp.add_argument("--remove", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--nu", required=True, help="pairings with the Levi simple coroots, or 'steinberg'")
    sp.set_defaults(func=cmd_gamma)

    sp = sub.add_parser("residue", help="residue index of a point")
    sp.add_argument("--form", required=True)
    sp.add_argument("--levi", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--nu", required=True, help="pairings with the Levi simple coroots, or 'steinberg'")
    sp.set_defaults(func=cmd_residue)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "max_rank", 1) < 1:
        print("error: --max-rank must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SpecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RootSystemError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
