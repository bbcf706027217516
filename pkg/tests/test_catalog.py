import json
import re
from fractions import Fraction as F
from importlib import resources
from pathlib import Path

import pytest

import oracle

from qslabels.catalog import (
    CatalogError,
    ReferenceTable,
    all_forms,
    canonical_type,
    case_record,
    default_table,
    detect_conditions,
    enumerate_cases,
    evaluate,
    expand_pattern,
    family_of,
    full_report,
    record_from_json,
    record_to_json,
    report_to_json,
    report_to_markdown,
    verify_against_reference,
)
from qslabels.cli import parse_form_spec as form

DATA = Path(__file__).parent / "data"


def raw_reference():
    return json.loads(resources.files("qslabels.data").joinpath("reference.json").read_text())


def relevant_removed(form):
    return [r.removed for r in enumerate_cases(form, 12) if r.relevant]


def test_exceptional_relevant_sets():
    assert relevant_removed("E6") == [(2, 4)]
    assert relevant_removed("E7") == [(1, 3), (1, 6), (4, 6)]
    e8 = relevant_removed("E8")
    assert len(e8) == 7
    assert (7, 8) in e8 and (1, 5) in e8
    assert relevant_removed("F4") == [(1, 2), (1, 4), (3, 4)]


def test_e6_case_is_g2():
    (rec,) = [r for r in enumerate_cases("E6") if r.relevant]
    assert rec.sigma_type == "G2" and rec.quotient_type == "G2"


@pytest.mark.parametrize("n", range(1, 12))
def test_type_a_has_no_relevant_case(n):
    assert relevant_removed(f"A{n}") == []


def test_triality_forms_have_one_case():
    for form in ("3D4", "6D4"):
        recs = enumerate_cases(form)
        assert len(recs) == 1 and recs[0].relevant


def test_e8_first_case_norms():
    rec = case_record("E8", (1, 5))
    data = rec.root_data
    # alpha_5 alone, then alpha_1 + alpha_5
    assert data[(0, 1)].tilde_norm == 4
    assert data[(1, 1)].tilde_norm == 2


def test_f4_first_case_envelopes():
    data = case_record("F4", (1, 2)).root_data
    assert {d.envelope for d in data.values()} == {"A2xA1", "C3"}


def test_f4_second_case_norms():
    rec = case_record("F4", (1, 4))
    assert rec.quotient_type == "B2"
    assert sorted(d.tilde_norm for d in rec.root_data.values()) == [F(1, 2), 1]


def test_relevant_records_are_b2_or_g2(report12):
    for r in report12.relevant:
        assert r.sigma_type in ("B2", "G2")
        assert r.quotient_type in (r.sigma_type, "irregular")
        assert r.long is not None and r.short is not None


@pytest.mark.parametrize("removed", [(1, 5), (2, 5), (4, 6), (4, 7)])
def test_e8_large_quotients(removed):
    rec = case_record("E8", removed)
    assert rec.quotient_type == "irregular" and rec.sigma_type == "B2"
    assert len(rec.quotient) == len(oracle.analyse("E8", *removed)["rays"]) == 8


def test_bar_identity_holds(report12):
    for r in report12.relevant:
        for p, d in r.roots:
            assert d.bar_consistent, (r.form, r.removed, p)


def test_ratio_routes_agree(report12):
    for r in report12.relevant:
        for v in r.verdicts:
            assert v.routes_agree, (r.form, r.removed)


def test_every_verdict_has_a_candidate(report12):
    for r in report12.relevant:
        for v in r.verdicts:
            assert v.satisfied, (r.form, r.removed, v.eps)


def test_outside_ratios_match_frozen_list(report12):
    frozen = json.loads((DATA / "outside_ratios.json").read_text())
    expected = {
        (e["form"], tuple(e["removed"]), e["long"], e["short"], F(e["eps_long"]), F(e["eps_short"]), F(e["ratio"]))
        for e in frozen
    }
    got = set()
    for rec, v in report12.outside_ratios():
        eps = dict(v.eps)
        pair = lambda p: f"{p[0]},{p[1]}"
        got.add((str(rec.form), rec.removed, pair(rec.long), pair(rec.short), eps[rec.long], eps[rec.short], v.ratio))
    assert got == expected


def test_total_relevant_count_matches_reference(report12):
    table = default_table()
    expected = 0
    seen = {(r.family, r.n) for r in report12.records}
    for fam, n in seen:
        if fam not in table.families:
            continue
        expected += len(table.expected_relevant(fam, n))
    got = sum(1 for r in report12.relevant if r.family in table.families)
    assert got == expected


def test_reference_diff_is_empty(report12):
    diff = verify_against_reference(report12.records)
    assert diff.checked > 0
    assert diff.empty, diff.by_field()


def test_exceptional_reference_fields_agree():
    recs = [r for f in ("E6", "E7", "E8", "F4", "2E6") for r in enumerate_cases(f)]
    diff = verify_against_reference(recs)
    assert diff.by_field().keys() <= {"tilde_norm"}


def test_corrupted_reference_is_detected():
    raw = raw_reference()
    for rec in raw["records"]:
        if rec["id"] == "E8:7":
            rec["sigma_type"] = "B2"
    diff = verify_against_reference(enumerate_cases("E8"), ReferenceTable.from_dict(raw))
    assert any(d.case_id == "E8:7" and d.field == "sigma_type" for d in diff.diffs)


def test_missing_reference_case_is_detected():
    raw = raw_reference()
    raw["records"] = [r for r in raw["records"] if r["id"] != "E7:2"]
    diff = verify_against_reference(enumerate_cases("E7"), ReferenceTable.from_dict(raw))
    assert [d.field for d in diff.diffs] == ["unlisted relevant case"]


def test_reference_records_carry_sources():
    for r in default_table().records:
        assert r.source and r.id


def test_evaluate():
    env = {"n": 8, "i": 2, "j": 4}
    assert evaluate("j == 2*i", env) is True
    assert evaluate("n/4", env) == 2
    assert evaluate("j/2 + 1", {"j": 3}) == F(5, 2)
    assert evaluate("i >= 2 and j < n", env)
    assert evaluate(3, env) == 3
    with pytest.raises(CatalogError):
        evaluate("__import__('os')", env)


def test_expand_and_canonical():
    assert expand_pattern("A{i-1}xB{n-j}", {"i": 3, "j": 4, "n": 6}) == "A2xB2"
    assert canonical_type("A0xB2") == "B2"
    assert canonical_type("C2") == "B2"
    assert canonical_type("B1xA2") == "A2xA1"
    assert canonical_type("D3") == "A3"
    assert canonical_type("D2") == "A1xA1"


def test_detect_conditions():
    assert detect_conditions("E8", 7, 8, 8) == ("always",)
    assert detect_conditions("B", 2, 4, 6) == ("j=2i",)
    assert detect_conditions("2A_odd", 2, 3, 4) == ("n=2i",)
    assert detect_conditions("C", 1, 3, 5) == ("none",)


def test_forms_and_families():
    forms = all_forms(8)
    assert form("E8") in forms and form("6D4") in forms
    assert form("E7") in all_forms(7) and form("E8") not in all_forms(7)
    assert all(f.base.rank <= 8 for f in forms)
    assert family_of(form("2A5")) == "2A_odd"
    assert family_of(form("2A4")) == "2A_even"
    assert family_of(form("2D5")) == "2D"
    assert enumerate_cases("E8", max_rank=7) == []


def test_json_round_trip(report12):
    for r in report12.records[::7] + tuple(report12.relevant):
        d = record_to_json(r)
        back = record_from_json(json.loads(json.dumps(d)))
        assert back == r


_RAT = re.compile(r"-?\d+/\d+")


def test_markdown_and_json_share_numbers():
    report = full_report(12, forms=[form("F4"), form("E7")])
    md = report_to_markdown(report)
    js = report_to_json(report)
    md_nums = sorted(_RAT.findall(md))
    js_nums = []
    for rec in js["records"]:
        for d in rec["roots"].values():
            js_nums += [d["tilde_norm"], d["abs_norm"], d["bar_scalar"]]
            js_nums += d["allowed"] or []
        for v in rec["verdicts"]:
            js_nums += [v["eps"][rec["long"]], v["eps"][rec["short"]], v["ratio"], v["kappa"]]
    assert md_nums == sorted(js_nums)
    assert js["summary"]["relevant"] == 6


def test_report_order_is_deterministic():
    report = full_report(6)
    keys = [(r.form, r.removed) for r in report.records]
    assert keys == sorted(keys)
    assert report.relevant_counts()["G2"] == 1
