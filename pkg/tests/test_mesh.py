"""Mesh generation, geometry queries, and the text format round trip."""

import numpy as np
import pytest

from biphasic import mesh as M
from biphasic.errors import ConfigError, GeometryError, MeshError, MeshParseError, QueryError
from biphasic.fem import TET10_EDGES
from biphasic.mesh import (
    MeshSpec,
    circumsphere_radius,
    circumsphere_radii,
    corner_volumes,
    generate_box,
    generate_quarter_cylinder,
    quadratic_volumes,
    read_mesh,
    reference_line_nodes,
    write_mesh,
)


def test_box_unit_cell_counts(unit_box):
    assert unit_box.n_elements == 6
    assert unit_box.n_nodes == 27


def test_box_volume_partition_exact():
    mesh = generate_box(MeshSpec(shape="box", lx=1, ly=1, lz=1, subdivisions=(2, 2, 2)))
    assert abs(corner_volumes(mesh).sum() - 1.0) < 1e-12
    assert abs(quadratic_volumes(mesh).sum() - 1.0) < 1e-12


def test_box_rejects_bad_spec():
    with pytest.raises(ConfigError):
        MeshSpec(shape="box", lx=1, ly=1, lz=1, subdivisions=(0, 1, 1))
    with pytest.raises(ConfigError):
        MeshSpec(shape="box", lx=0, ly=1, lz=1, subdivisions=(1, 1, 1))
    with pytest.raises(ConfigError):
        MeshSpec(shape="octagon", subdivisions=(1, 1, 1))


def test_box_positive_volumes_and_facets(small_box):
    assert np.all(corner_volumes(small_box) > 0)
    assert set(small_box.facet_sets) == {"top", "bottom", "x0", "x1", "y0", "y1"}


def test_box_midside_nodes_are_midpoints(small_box):
    for el in small_box.elements:
        for m, (a, b) in enumerate(TET10_EDGES):
            mid = small_box.coords[el[4 + m]]
            expect = 0.5 * (small_box.coords[el[a]] + small_box.coords[el[b]])
            assert np.linalg.norm(mid - expect) < 1e-9


def test_boundary_facets_cover_box_surface(small_box):
    # total facet area equals the analytic surface area of the box
    total = 0.0
    for rows in small_box.facet_sets.values():
        for row in rows:
            a, b, c = small_box.coords[row[:3]]
            total += 0.5 * np.linalg.norm(np.cross(b - a, c - a))
    assert abs(total - 6.0) < 1e-12


QC_SPEC = MeshSpec(
    shape="quarter_cylinder", radius=18.0, height=8.0, subdivisions=(3, 6, 3)
)


@pytest.fixture(scope="module")
def quarter_cyl():
    return generate_quarter_cylinder(QC_SPEC)


def test_quarter_cylinder_volume(quarter_cyl):
    analytic = np.pi * 18.0**2 * 8.0 / 4.0
    vol = quadratic_volumes(quarter_cyl).sum()
    assert abs(vol - analytic) / analytic < 0.005


def test_quarter_cylinder_volume_converges():
    analytic = np.pi * 18.0**2 * 8.0 / 4.0
    errs = []
    for subs in [(2, 4, 2), (4, 8, 3)]:
        mesh = generate_quarter_cylinder(
            MeshSpec(shape="quarter_cylinder", radius=18.0, height=8.0, subdivisions=subs)
        )
        errs.append(abs(quadratic_volumes(mesh).sum() - analytic) / analytic)
    assert errs[1] < errs[0]
    assert errs[0] < 0.005


def test_quarter_cylinder_symmetry_planes(quarter_cyl):
    sx = quarter_cyl.facet_nodes("sym_x")
    sy = quarter_cyl.facet_nodes("sym_y")
    assert np.abs(quarter_cyl.coords[sx, 0]).max() < 1e-9
    assert np.abs(quarter_cyl.coords[sy, 1]).max() < 1e-9


def test_quarter_cylinder_lateral_on_radius(quarter_cyl):
    lat = quarter_cyl.facet_nodes("lateral")
    r = np.hypot(quarter_cyl.coords[lat, 0], quarter_cyl.coords[lat, 1])
    assert np.abs(r - 18.0).max() < 1e-9


def test_quarter_cylinder_circumspheres_positive(quarter_cyl):
    radii = circumsphere_radii(quarter_cyl)
    assert np.all(np.isfinite(radii))
    assert np.all(radii > 0)


def test_quarter_cylinder_rejects_odd_arc_count():
    with pytest.raises(ConfigError):
        MeshSpec(shape="quarter_cylinder", radius=18, height=8, subdivisions=(2, 5, 2))


# ---------------------------------------------------------------------------
# circumsphere


def test_circumsphere_unit_right_corner():
    r = circumsphere_radius([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert r == pytest.approx(np.sqrt(3) / 2, abs=1e-14)


def test_circumsphere_regular_tet():
    a = 1.7
    corners = a * np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, np.sqrt(3) / 2, 0.0],
            [0.5, np.sqrt(3) / 6, np.sqrt(6) / 3],
        ]
    )
    assert circumsphere_radius(corners) == pytest.approx(a * np.sqrt(6) / 4, rel=1e-13)


def test_circumsphere_coplanar_raises():
    with pytest.raises(GeometryError):
        circumsphere_radius([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)])


def test_circumsphere_rigid_motion_invariance():
    rng = np.random.default_rng(11)
    corners = rng.standard_normal((4, 3))
    r0 = circumsphere_radius(corners)
    for _ in range(5):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        moved = corners @ q.T + rng.standard_normal(3)
        assert abs(circumsphere_radius(moved) - r0) / r0 < 1e-12


# ---------------------------------------------------------------------------
# reference line


def test_reference_line_structured_levels(quarter_cyl):
    nz = QC_SPEC.subdivisions[2]
    nodes = reference_line_nodes(quarter_cyl, (0, 0, 0), (0, 0, 1), 1e-6)
    z = quarter_cyl.coords[nodes, 2]
    expect = np.linspace(0.0, 8.0, 2 * nz + 1)
    assert np.allclose(np.sort(z), expect, atol=1e-12)
    assert np.all(np.diff(z) > 0)  # sorted by axial coordinate


def test_reference_line_zero_tolerance(quarter_cyl):
    exact = reference_line_nodes(quarter_cyl, (0, 0, 0), (0, 0, 1), 0.0)
    loose = reference_line_nodes(quarter_cyl, (0, 0, 0), (0, 0, 1), 1e-9)
    assert np.array_equal(np.sort(exact), np.sort(loose))


def test_reference_line_outside_mesh(quarter_cyl):
    with pytest.raises(QueryError):
        reference_line_nodes(quarter_cyl, (100.0, 100.0, 0.0), (0, 0, 1), 1e-6)


# ---------------------------------------------------------------------------
# file format


def test_mesh_round_trip(tmp_path, quarter_cyl):
    path = tmp_path / "m.mesh"
    write_mesh(quarter_cyl, path)
    back = read_mesh(path)
    assert np.array_equal(back.coords, quarter_cyl.coords)
    assert np.array_equal(back.elements, quarter_cyl.elements)
    assert set(back.facet_sets) == set(quarter_cyl.facet_sets)
    for name in quarter_cyl.facet_sets:
        assert np.array_equal(back.facet_sets[name], quarter_cyl.facet_sets[name])


def test_mesh_truncated_file(tmp_path, unit_box):
    path = tmp_path / "m.mesh"
    write_mesh(unit_box, path)
    text = path.read_text().splitlines()
    (tmp_path / "trunc.mesh").write_text("\n".join(text[: len(text) // 2]))
    with pytest.raises(MeshParseError):
        read_mesh(tmp_path / "trunc.mesh")


def test_mesh_bad_header(tmp_path):
    (tmp_path / "bad.mesh").write_text("other-format v2\n")
    with pytest.raises(MeshParseError):
        read_mesh(tmp_path / "bad.mesh")


def test_mesh_negative_volume_detected(tmp_path, unit_box):
    path = tmp_path / "m.mesh"
    write_mesh(unit_box, path)
    lines = path.read_text().splitlines()
    # swap two corner node ids of element 0 to invert it
    idx = next(i for i, ln in enumerate(lines) if ln.startswith("0 ") and i > 27)
    parts = lines[idx].split()
    parts[1], parts[2] = parts[2], parts[1]
    lines[idx] = " ".join(parts)
    bad = tmp_path / "bad.mesh"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(MeshError, match="element 0"):
        read_mesh(bad)


def test_mesh_comments_and_whitespace(tmp_path, unit_box):
    path = tmp_path / "m.mesh"
    write_mesh(unit_box, path)
    text = "# leading comment\n" + path.read_text().replace(
        "vertices 27", "vertices 27  # section"
    )
    (tmp_path / "c.mesh").write_text(text)
    back = read_mesh(tmp_path / "c.mesh")
    assert back.n_nodes == unit_box.n_nodes
