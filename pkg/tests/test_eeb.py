from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from softtiler import eeb
from softtiler import sphere_solver as ss
from softtiler.symmetry import nodal_transforms
from softtiler.tiling_core import reference_nodal_structure

SQ2, SQ3, SQ6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
F2 = np.array([1 / SQ2, 1 / SQ2, 0.0])
G2 = np.array([1 / SQ2, -1 / SQ2, 0.0])
H2 = np.array([0.5, -0.5, 1 / SQ2])
I2 = np.array([SQ3 / 2, SQ3 / 6, 1 / SQ6])
E1 = np.array([1.0, 0.0, 0.0])


def test_complete_systems_are_the_three_matchings():
    systems = eeb.enumerate_complete_systems()
    assert sorted(s.name for s in systems) == ["abcd", "acbd", "adbc"]
    vs = reference_nodal_structure().vertex_sets
    for s in systems:
        assert s.covers(vs)


def test_complete_systems_oracle():
    # brute force over all subsets of the six pairs: minimal covering forests
    vs = reference_nodal_structure().vertex_sets
    pairs = list(combinations(range(4), 2))
    covering = []
    for r in range(1, 7):
        for sub in combinations(pairs, r):
            if eeb.SofteningSystem(sub).covers(vs) and eeb._consistent(sub):
                covering.append(set(sub))
    minimal = [c for c in covering if not any(o < c for o in covering)]
    assert sorted(eeb.SofteningSystem(tuple(sorted(c))).name for c in minimal) == ["abcd", "acbd", "adbc"]


def test_single_pair_is_not_complete():
    vs = reference_nodal_structure().vertex_sets
    assert not eeb.SofteningSystem(((0, 1),)).covers(vs)
    assert not eeb.SofteningSystem(((2, 3),)).covers(vs)


def test_triangle_is_inconsistent():
    assert not eeb._consistent(((0, 1), (0, 2), (1, 2)))
    assert eeb._consistent(((0, 1), (2, 3)))


def test_system_solutions():
    sysm = {s.name: s for s in eeb.enumerate_complete_systems()}
    To, Tt = nodal_transforms("octahedral"), nodal_transforms("tetrahedral")
    x = eeb.solve_system(sysm["abcd"], To)
    assert isinstance(x, ss.AntipodalPair) and ss.AntipodalPair(G2).same_as(x)
    x = eeb.solve_system(sysm["acbd"], To)
    assert isinstance(x, ss.AntipodalPair) and ss.AntipodalPair(F2).same_as(x)
    x = eeb.solve_system(sysm["abcd"], Tt)
    assert isinstance(x, ss.GreatCircle) and ss.GreatCircle(F2).same_as(x)


def test_soft_and_standard_flags():
    assert eeb.is_soft(eeb.nodal_set(F2, "octahedral"))
    assert not eeb.is_soft(eeb.nodal_set(E1, "octahedral"))
    assert abs(eeb.min_pair_dot(eeb.nodal_set(E1, "octahedral")) + 0.5) < 1e-12
    N = eeb.nodal_set(F2, "octahedral")
    assert eeb.is_standard(N)
    assert np.abs(np.abs(N @ F2) - 1).max() < 1e-12
    N = eeb.nodal_set(G2, "octahedral")
    assert not eeb.is_standard(N)
    assert np.linalg.matrix_rank(N, tol=1e-9) == 2
    assert eeb.is_standard(eeb.nodal_set(H2, "tetrahedral"))
    assert not eeb.is_standard(eeb.nodal_set(I2, "tetrahedral"))


def test_planar_faces():
    assert "quad" in eeb.classify_planar_faces(F2, "octahedral")
    assert "hex2" in eeb.classify_planar_faces(I2, "tetrahedral")
    assert set(eeb.classify_planar_faces(E1, "tetrahedral")) == {"quad", "hex1", "hex2"}


def test_octahedral_catalogue(octahedral_soft):
    cat = octahedral_soft
    assert [s.name for s in cat.solutions] == ["g2", "f2"]
    np.testing.assert_allclose(cat.by_name("f2").a, F2, atol=1e-12)
    np.testing.assert_allclose(cat.by_name("g2").a, G2, atol=1e-12)
    with pytest.raises(KeyError):
        cat.by_name("z9")


def test_tetrahedral_catalogue(tetrahedral_planar_soft):
    cat = tetrahedral_planar_soft
    assert sorted(s.name for s in cat.solutions) == ["f2", "g2", "h2", "i2"]
    for name, a in [("f2", F2), ("g2", G2), ("h2", H2), ("i2", I2)]:
        np.testing.assert_allclose(cat.by_name(name).a, a, atol=1e-12)


def test_tetrahedral_without_soft_contains_e2():
    cat = eeb.run_catalogue("tetrahedral", require_planar_face=True, require_soft=False)
    np.testing.assert_allclose(cat.by_name("e2").a, E1, atol=1e-12)
    assert not cat.by_name("e2").soft


@pytest.mark.parametrize("mode,planar", [("octahedral", False), ("tetrahedral", True), ("tetrahedral", False)])
def test_catalogue_reverifies(mode, planar):
    cat = eeb.run_catalogue(mode, require_planar_face=planar, require_soft=True)
    systems = {s.name: s for s in eeb.enumerate_complete_systems()}
    fcs = {fc.name: fc for fc in eeb.face_constraints()}
    for s in cat.solutions:
        N = eeb.nodal_set(s.a, mode)
        for name in s.soft_systems:
            for i, j in systems[name].pairs:
                assert abs(N[i] @ N[j] + 1) < 1e-9
        for f in s.planar_faces:
            assert fcs[f].residual(s.a, mode) < 1e-9
        again = eeb.make_solution(s.a, mode, s.name)
        assert (again.soft, again.standard, again.planar_faces) == (s.soft, s.standard, s.planar_faces)


def test_catalogue_is_deterministic():
    a = eeb.run_catalogue("tetrahedral", require_planar_face=True).to_json()
    b = eeb.run_catalogue("tetrahedral", require_planar_face=True).to_json()
    assert a == b


def test_dedup_sanity():
    assert not eeb.equivalent(F2, G2, "octahedral")
    mirror = np.array([SQ3 / 2, SQ3 / 6, -1 / SQ6])
    assert eeb.equivalent(mirror, I2, "tetrahedral")
    np.testing.assert_allclose(eeb.representative(mirror, "tetrahedral"), I2, atol=1e-12)


@pytest.mark.parametrize("name", ["f2", "g2", "h2", "i2"])
def test_flags_invariant_under_dedup_action(name):
    s = eeb.named_solution(name)
    for b in eeb.class_members(s.a, s.mode):
        t = eeb.make_solution(b, s.mode)
        assert (t.soft, t.standard) == (s.soft, s.standard)
        assert eeb.equivalent(b, s.a, s.mode)


def test_kelvin():
    k = eeb.kelvin_solution()
    r = 2 * SQ2 - 3
    np.testing.assert_allclose(k.a, np.array([1, r, 0]) / np.sqrt(1 + r * r), atol=1e-12)
    assert abs(k.a[2]) < 1e-10
    assert "quad" in k.member_circles
    np.testing.assert_allclose(list(k.pair_dots.values()), -1 / 3, atol=1e-10)
    assert not k.soft


def test_pd():
    p = eeb.pd_solution()
    np.testing.assert_allclose(p.a, np.array([5, -1, SQ2]) / np.sqrt(28), atol=1e-12)
    d = p.pair_dots
    assert (d["ab"], d["ac"], d["bc"]) == pytest.approx((-3 / 7, 1 / 7, -5 / 7), abs=1e-12)
    assert (p.euler.phi, p.euler.theta) == pytest.approx((np.arccos(1 / np.sqrt(14)), np.arctan(-0.2)), abs=1e-12)
    assert not p.soft


def test_named_solution_lookup():
    assert eeb.named_solution("KELVIN").name == "kelvin"
    with pytest.raises(KeyError):
        eeb.named_solution("q7")


def test_quad_family_passes_through_named_points():
    quad = eeb.named_circles("octahedral")["quad"]
    for name in ("e2", "f2", "g2", "kelvin"):
        assert quad.contains(eeb.named_solution(name).a)


def test_abcd_family_soft_everywhere():
    circle = eeb.named_circles("tetrahedral")["abcd"]
    fam = eeb.family(circle, 100, "tetrahedral")
    assert len(fam) == 100
    assert all(p.solution.soft for p in fam)


def test_pd_family_endpoints():
    circle, start, end = eeb.family_circle("pd", "tetrahedral")
    fam = eeb.family(circle, 11, "tetrahedral", start=start, end=end)
    np.testing.assert_allclose(fam[0].solution.a, G2, atol=1e-12)
    np.testing.assert_allclose(fam[-1].solution.a, I2, atol=1e-12)


def test_family_argument_errors():
    c = eeb.named_circles("octahedral")["quad"]
    with pytest.raises(TypeError):
        eeb.family(ss.Empty(), 10, "octahedral")
    with pytest.raises(ValueError):
        eeb.family(c, 1, "octahedral")
    with pytest.raises(ValueError):
        eeb.family(c, 10, "octahedral", start=E1)
    with pytest.raises(ValueError):
        eeb.family(c, 10, "octahedral", start=E1, end=np.array([0, 0, 1.0]))
    with pytest.raises(KeyError):
        eeb.family_circle("nope", "octahedral")


def test_run_catalogue_rejects_bad_tol():
    with pytest.raises(ValueError):
        eeb.run_catalogue("octahedral", tol=0)


@given(st.floats(-np.pi, np.pi))
def test_quad_circle_softness_only_at_f2_g2(t):
    circle = eeb.named_circles("octahedral")["quad"]
    a = circle.point(t)
    soft = eeb.make_solution(a, "octahedral").soft
    near = min(np.abs(np.abs(a @ F2) - 1), np.abs(np.abs(a @ G2) - 1))
    if soft:
        assert near < 1e-8
