import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from qslabels.roots import build_root_system
from qslabels.twisted import (
    FormError,
    FormLabel,
    build_form,
    relative_root_system,
    restriction_of_scalars,
    split_relative,
)
from qslabels.roots import CartanLabel


def test_diagram_permutations():
    assert build_form("E8").diagram_perm == tuple(range(1, 9))
    assert build_form("2A5").diagram_perm == (5, 4, 3, 2, 1)
    p = build_form("3D4").diagram_perm
    assert p[1] == 2 and {p[0], p[2], p[3]} == {1, 3, 4} and p[0] != 1
    assert build_form("3D4").order == 3
    assert build_form("6D4").full_group_s3


@pytest.mark.parametrize(
    "label, rel",
    [("2A3", "B2"), ("2A4", "B2"), ("2A5", "C3"), ("2A6", "B3"), ("2A7", "C4"),
     ("2D4", "B3"), ("2D5", "B4"), ("2E6", "F4"), ("3D4", "G2"), ("6D4", "G2")],
)
def test_relative_types(label, rel):
    assert relative_root_system(build_form(label)).type_label == rel


@pytest.mark.parametrize("n", range(2, 7))
def test_2a_odd_pairing_is_c(n):
    rel = relative_root_system(build_form(f"2A{2 * n - 1}")).system
    c = build_root_system(f"C{n}") if n > 2 else build_root_system("C2")
    assert rel.cartan == c.cartan


def test_restriction_examples():
    f = build_form("2A3")
    a = f.absolute
    assert f.restrict_root(a.simple_root(1)) == f.restrict_root(a.simple_root(3))
    assert f.restrict_root(a.simple_root(2)) == a.simple_root(2)
    expected = tuple((x + y) / 2 for x, y in zip(a.coroot(a.simple_root(1)), a.coroot(a.simple_root(3))))
    assert f.projected_coroot(a.simple_root(1)) == expected
    t = build_form("3D4")
    b = t.absolute
    images = {t.restrict_root(b.simple_root(k)) for k in (1, 3, 4)}
    assert len(images) == 1
    rel = relative_root_system(t).system
    assert b.norm(images.pop()) == min(rel.squared_lengths())


def test_projection_adjoint():
    f = build_form("2A5")
    a = f.absolute
    lam = f.restrict(a.fundamental_weight(2))
    for beta in a.positive_roots:
        assert a.pair(lam, f.projected_coroot(beta)) == a.coroot_pairing(lam, beta)


def test_split_relative_is_absolute():
    s = build_root_system("F4")
    rel = split_relative(s)
    assert rel.system.roots == s.roots
    for c in rel.system.positive_coords:
        assert rel.projected_coroot(c) == s.coroot(s.vector(c))


@pytest.mark.parametrize("label", ["A2", "B2", "G2", "A3", "C3", "B3", "D4", "F4", "A5", "D5", "B6"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_restriction_of_scalars_keeps_type(label, d):
    base = build_root_system(label)
    rel = relative_root_system(restriction_of_scalars(base, d))
    assert rel.type_label == base.type_name
    assert rel.system.cartan == base.cartan


def test_restriction_of_scalars_ratios_unchanged():
    from qslabels.catalog import case_record

    one = case_record("E6", (2, 4))
    two = case_record(FormLabel(1, CartanLabel("E", 6), degree=2), (2, 4))
    r1 = [(d.tilde_norm / d.abs_norm) for _, d in one.roots]
    r2 = [(d.tilde_norm / d.abs_norm) for _, d in two.roots]
    assert r1[0] / r1[1] == r2[0] / r2[1]
    assert [v.ratio for v in one.verdicts] == [v.ratio for v in two.verdicts]


@pytest.mark.parametrize("label", ["2A3", "2A4", "2A6", "2D5", "2E6", "3D4"])
def test_relative_structure(label):
    rel = relative_root_system(build_form(label))
    kept = set(rel.system.positive_coords)
    for c in kept:
        assert tuple(2 * x for x in c) not in kept
        assert rel.fibers[c]
        sec = rel.section(c)
        assert rel.form.relative_coords(sec) == c
        assert rel.form.restrict(rel.section_vector(c)) == rel.system.vector(c)
    # closure under the induced pairing
    s = rel.system
    for r in s.roots:
        for a in s.simple_roots:
            assert s.reflect(r, a) in s.roots


@pytest.mark.parametrize("label", ["2A5", "2A6", "2D6", "2E6", "3D4"])
def test_relative_roots_match_oracle(label):
    rel = relative_root_system(build_form(label)).system
    _, pos, _ = oracle.relative_data(label)
    assert sorted(rel.positive_coords) == sorted(pos)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["2A3", "2A5", "2D4", "2D5", "2E6", "3D4"]), st.data())
def test_section_fiber_independence(label, data):
    rel = relative_root_system(build_form(label))
    c = data.draw(st.sampled_from(sorted(rel.system.positive_coords)))
    norms = {rel.form.absolute.norm(rel.form.absolute.vector(x)) for x in rel.fibers[c]}
    assert len(norms) == 1


def test_invalid_forms():
    with pytest.raises(FormError):
        FormLabel(2, CartanLabel("B", 3))
    with pytest.raises(FormError):
        FormLabel(3, CartanLabel("D", 5))
    with pytest.raises(FormError):
        FormLabel(5, CartanLabel("A", 3))
