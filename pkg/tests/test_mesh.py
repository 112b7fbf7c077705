import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coolshape.mesh import (BoundaryTag, GeometryError, InversionError, Mesh, MeshError, TaggingError,
                            UnsupportedFormatError, cell_min_angles, deform, generate_channel_array, load_msh,
                            quality, rectangle, refine, signed_areas, unit_square, write_msh)

MINIMAL_MSH = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 3 3 1 2
2 1 2 2 2 2 3
3 1 2 3 3 3 4
4 1 2 1 1 4 1
5 2 2 4 4 1 2 3
6 2 2 5 5 1 3 4
$EndElements
"""


def _structure_ok(mesh: Mesh):
    assert np.all(mesh.areas > 0)
    counts = mesh._edge_data[2]
    boundary = {tuple(e) for e in mesh.edges[counts == 1]}
    tagged = [tuple(sorted(f)) for f in mesh.facets]
    assert len(tagged) == len(set(tagged))
    assert set(tagged) == boundary
    assert np.all(counts <= 2)
    for tag in BoundaryTag:
        assert mesh.tag_length(tag) > 0


def test_unit_grid_counts():
    m = generate_channel_array(1, 1, 0, None, None, 0.5)
    assert (m.n_vertices, m.n_cells) == (9, 8)
    assert not m.subdomain.any()


@given(st.sampled_from([1.0, 0.5, 0.25, 0.2, 1 / 7, 0.1]))
@settings(max_examples=6, deadline=None)
def test_euler_relation(h):
    m = generate_channel_array(1, 1, 0, None, None, h)
    assert m.n_vertices - len(m.edges) + m.n_cells == 1
    _structure_ok(m)


def test_fin_array_tags():
    m = generate_channel_array(2, 1, 3, 0.1, 0.6, 0.05)
    _structure_ok(m)
    assert m.tag_length(BoundaryTag.WALL) > 2 * 0.6
    # two plates of length 2 plus three fin outlines
    assert m.tag_length(BoundaryTag.WALL) == pytest.approx(4 + 3 * 2 * (0.1 + 0.6), abs=1e-12)
    assert m.area == pytest.approx(2 - 3 * 0.06, abs=1e-12)


def test_channel_subdomain_area():
    m = generate_channel_array(2, 1, 3, 0.1, 0.6, 0.05)
    # band between fin bottoms and tops, from the first fin's left edge to the last fin's right edge
    width = 1.5 + 0.05 - (0.5 - 0.05)
    band = 0.6 * width - 3 * 0.06
    assert m.areas[m.subdomain].sum() == pytest.approx(band, abs=1e-12)


@pytest.mark.parametrize("args", [(2, 1, 3, 0.6, 0.6, 0.1), (2, 1, 1, 0.1, 1.0, 0.1), (1, 1, 0, None, None, 0.0)])
def test_generator_rejects_bad_geometry(args):
    with pytest.raises(GeometryError):
        generate_channel_array(*args)


def test_load_minimal(tmp_path):
    p = tmp_path / "m.msh"
    p.write_text(MINIMAL_MSH)
    m = load_msh(p)
    assert m.n_vertices == 4 and m.n_cells == 2
    assert m.subdomain.tolist() == [True, False]
    assert sorted(m.facet_tags.tolist()) == [1, 2, 3, 3]


def test_load_untagged_line(tmp_path):
    p = tmp_path / "m.msh"
    p.write_text(MINIMAL_MSH.replace("4 1 2 1 1 4 1", "4 1 2 0 0 4 1"))
    with pytest.raises(TaggingError):
        load_msh(p)


def test_load_v4(tmp_path):
    p = tmp_path / "m.msh"
    p.write_text(MINIMAL_MSH.replace("2.2 0 8", "4.1 0 8"))
    with pytest.raises(UnsupportedFormatError):
        load_msh(p)


def test_msh_roundtrip(tmp_path):
    m = generate_channel_array(2, 1, 3, 0.1, 0.6, 0.125)
    write_msh(m, tmp_path / "c.msh")
    m2 = load_msh(tmp_path / "c.msh")
    assert np.array_equal(m.vertices, m2.vertices)
    assert np.array_equal(m.cells, m2.cells)
    assert np.array_equal(m.subdomain, m2.subdomain)
    assert np.array_equal(m.facet_tags, m2.facet_tags)


def test_deform_zero_is_identity():
    m = unit_square(4)
    d = deform(m, np.zeros_like(m.vertices))
    assert np.array_equal(d.vertices, m.vertices)
    assert np.array_equal(d.cells, m.cells)


def test_deform_translation_preserves_areas():
    m = rectangle(4, 4, 4.0, 4.0)
    inner = np.all((m.vertices > 0.5) & (m.vertices < 3.5), axis=1)
    # translate the interior vertices together with a ring of width one so no cell is sheared
    disp = np.zeros_like(m.vertices)
    disp[inner] = (0.1, 0.0)
    moved = deform(m, disp)
    keep = np.all(inner[m.cells], axis=1)
    assert keep.any()
    assert np.array_equal(moved.areas[keep], m.areas[keep])


def test_deform_inversion():
    m = unit_square(2)
    disp = np.zeros_like(m.vertices)
    centre = np.argmin(np.linalg.norm(m.vertices - 0.5, axis=1))
    disp[centre] = (2.0, 2.0)
    with pytest.raises(InversionError):
        deform(m, disp)


def test_deform_fixed_boundary():
    m = unit_square(2)
    disp = np.zeros_like(m.vertices)
    disp[m.tagged_vertices([BoundaryTag.INLET])[0]] = (0.0, 0.01)
    with pytest.raises(MeshError):
        deform(m, disp)


def test_quality_examples():
    eq = Mesh([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [1, 2, 3])
    assert quality(eq).min_angle == pytest.approx(60.0, abs=1e-12)
    rt = Mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [1, 2, 3])
    assert quality(rt).min_angle == pytest.approx(45.0, abs=1e-12)
    assert quality(unit_square(5)).min_angle == pytest.approx(45.0, abs=1e-12)


def test_refine_doubles_resolution():
    m = generate_channel_array(2, 1, 3, 0.1, 0.6, 0.125)
    r, parent = refine(m, return_parent=True)
    assert r.n_cells == 4 * m.n_cells
    assert r.area == pytest.approx(m.area, abs=1e-13)
    assert r.perimeter == pytest.approx(m.perimeter, abs=1e-13)
    assert r.subdomain.sum() == 4 * m.subdomain.sum()
    assert np.array_equal(r.subdomain, m.subdomain[parent])
    _structure_ok(r)


@given(st.lists(st.floats(-0.05, 0.05), min_size=2, max_size=2))
@settings(max_examples=20, deadline=None)
def test_small_interior_moves_keep_orientation(shift):
    m = unit_square(4)
    disp = np.zeros_like(m.vertices)
    interior = np.all((m.vertices > 0) & (m.vertices < 1), axis=1)
    disp[interior] = shift
    moved = deform(m, disp)
    assert np.all(signed_areas(moved.vertices, moved.cells) > 0)
    assert np.all(cell_min_angles(moved.vertices, moved.cells) > 0)
