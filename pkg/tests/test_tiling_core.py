from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from softtiler.tiling_core import (
    FirstOrderCell,
    bcc_lattice,
    builtin_e2,
    cubic_lattice,
    face_translations,
    normalize,
    reference_nodal_structure,
    unit,
)

SQ2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def cell():
    return builtin_e2()


def test_tabulated_nodes(cell):
    assert cell.nodes.shape == (24, 3)
    np.testing.assert_allclose(cell.node(1), (0, 0, 0), atol=1e-15)
    np.testing.assert_allclose(cell.node(5), (-0.5, -0.5, 1 / SQ2), atol=1e-15)
    np.testing.assert_allclose(cell.node(21), (0, 0, 4 / SQ2), atol=1e-15)


def test_face_counts_and_named_faces(cell):
    kinds = [f.kind for f in cell.faces]
    assert kinds.count("quad") == 6 and kinds.count("hex") == 8
    cycles = {f.cycle for f in cell.faces}
    assert (1, 2, 3, 4) in cycles
    assert (1, 4, 8, 16, 9, 5) in cycles
    # the second hexagon through nodes 1 and 2, in hull-walk order
    hex12 = cell.find_face(1, 2, 6)
    assert set(hex12.cycle) == {1, 2, 6, 10, 11, 5}


def test_euler_characteristic(cell):
    assert len(cell.nodes) - len(cell.edges) + len(cell.faces) == 2


def test_edges_have_unit_length(cell):
    assert len(cell.edges) == 36
    L = [np.linalg.norm(cell.node(i) - cell.node(j)) for i, j in cell.edges]
    np.testing.assert_allclose(L, 1.0, atol=1e-12)


def test_vertex_figures_congruent(cell):
    figs = []
    for n in range(1, 25):
        p = cell.node(n)
        dirs = [normalize(cell.node(j) - p) for j in cell.neighbors(n)]
        assert len(dirs) == 3
        figs.append(sorted(float(u @ v) for u, v in combinations(dirs, 2)))
    np.testing.assert_allclose(figs, [figs[0]] * 24, atol=1e-9)


def test_hull_oracle_matches_faces(cell):
    # independent reconstruction: group hull simplices by plane
    hull = ConvexHull(cell.nodes)
    planes = {}
    for eq, simplex in zip(hull.equations, hull.simplices):
        key = tuple(np.round(eq, 9))
        planes.setdefault(key, set()).update(int(i) + 1 for i in simplex)
    ours = sorted(tuple(sorted(f.cycle)) for f in cell.faces)
    oracle = []
    for eq in planes:
        on = np.flatnonzero(np.abs(cell.nodes @ np.array(eq[:3]) + eq[3]) < 1e-8) + 1
        oracle.append(tuple(sorted(int(i) for i in on)))
    assert ours == sorted(set(oracle))


def test_face_cycles_follow_edges(cell):
    for f in cell.faces:
        c = f.cycle
        for k in range(len(c)):
            d = np.linalg.norm(cell.node(c[k]) - cell.node(c[(k + 1) % len(c)]))
            assert abs(d - 1.0) < 1e-12


def test_center():
    np.testing.assert_allclose(builtin_e2().center, (0.5, 0.5, SQ2), atol=1e-15)


def test_face_translations(cell):
    t = face_translations(cell)
    quad = cell.faces.index(cell.find_face(1, 2, 3, 4))
    np.testing.assert_allclose(t[quad], (0, 0, -2 * SQ2), atol=1e-12)
    hexa = cell.faces.index(cell.find_face(1, 2, 6, 10))
    np.testing.assert_allclose(t[hexa], (0, -2, -SQ2), atol=1e-12)


def test_translated_neighbours_share_exactly_one_face(cell):
    for f, t in zip(cell.faces, face_translations(cell)):
        moved = cell.nodes + t
        d = np.linalg.norm(moved[:, None] - cell.nodes[None], axis=2)
        shared = {int(j) + 1 for j in np.flatnonzero(d.min(axis=0) < 1e-9)}
        assert shared == set(f.cycle)


def test_bcc_lattice_contains_all_face_translations():
    lat = bcc_lattice()
    B = lat.basis
    for t in lat.translations:
        n = np.linalg.solve(B.T, t)
        np.testing.assert_allclose(n, np.round(n), atol=1e-9)
    # bcc: cubic sublattice of index 2
    Bc = cubic_lattice().basis
    assert abs(abs(np.linalg.det(Bc)) / abs(np.linalg.det(B)) - 2.0) < 1e-9


def test_cell_volume_equals_lattice_cell():
    cell = builtin_e2()
    assert abs(ConvexHull(cell.nodes).volume - abs(np.linalg.det(bcc_lattice().basis))) < 1e-9


def test_reference_nodal_structure():
    ns = reference_nodal_structure()
    assert (ns.K, ns.N) == (4, 4)
    assert sorted(ns.vertex_set_names()) == ["abc", "abd", "acd", "bcd"]
    a0, b0, c0, d0 = ns.polyhedral_directions
    np.testing.assert_allclose(a0, (1, 0, 0), atol=1e-15)
    np.testing.assert_allclose(c0, (-0.5, -0.5, 1 / SQ2), atol=1e-15)
    assert abs(c0 @ d0) < 1e-12 and abs(a0 @ b0) < 1e-12
    assert abs(a0 @ c0 + 0.5) < 1e-12


@pytest.mark.parametrize("node", [1, 7, 14, 22])
def test_every_node_has_degree_four(node):
    ns = reference_nodal_structure(node=node)
    assert ns.K == 4


def test_json_round_trip(cell):
    back = FirstOrderCell.from_json(cell.to_json())
    np.testing.assert_array_equal(back.nodes, cell.nodes)
    assert back.faces == cell.faces


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3))
def test_normalize_gives_unit_vectors(v):
    v = np.array(v)
    if np.linalg.norm(v) < 1e-6:
        return
    assert abs(np.linalg.norm(normalize(v)) - 1) < 1e-12
    unit(normalize(v))


def test_unit_rejects_bad_vectors():
    with pytest.raises(ValueError):
        unit((1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        unit((np.nan, 0, 0))
    with pytest.raises(ValueError):
        normalize((0, 0, 0))
