import math

import numpy as np
import pytest

from parking_garage import Configuration
from parking_garage.dihedral import Family, FamilySpec, closed_form, lift
from parking_garage.mesh import (
    FAMILY_F,
    FAMILY_F_PI,
    LimitSurfaceMesh,
    MeshParameterError,
    MeshParams,
    arg_increment,
    build_domain,
    build_limit_mesh,
    export_obj,
    midpoint_height_error,
    obj_text,
    read_obj,
)

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def two_point_mesh():
    a = 1 / math.sqrt(2)
    cfg = Configuration(np.array([a, -a], dtype=complex), np.array([-1, -1]))
    return cfg, build_limit_mesh(cfg, MeshParams(radial_resolution=4, angular_resolution=64))


def helicoid_mesh():
    cfg = Configuration(np.array([0j]), np.array([-1]))
    return build_limit_mesh(cfg, MeshParams(neck_radius=0.1, radial_resolution=4, angular_resolution=48))


def test_helicoid_heights_exact():
    mesh = helicoid_mesh()
    v = mesh.vertices
    r = np.hypot(v[:, 0], v[:, 1])
    sel = r > 1e-12
    # left helicoid z = -theta + c, where theta is defined modulo pi along lines through the axis
    d = v[sel, 2] + np.arctan2(v[sel, 1], v[sel, 0])
    d = d - d[0]
    dev = np.abs(d - math.pi * np.round(d / math.pi))
    assert dev.max() <= 1e-9


def test_helicoid_obj_round_trip(tmp_path):
    mesh = helicoid_mesh()
    path = tmp_path / "h.obj"
    export_obj(mesh, path)
    v, f, groups = read_obj(path)
    assert v.shape == mesh.vertices.shape and f.shape == mesh.triangles.shape
    assert np.array_equal(f, mesh.triangles)
    assert np.max(np.abs(v - mesh.vertices)) == 0.0
    assert groups == mesh.component_names()


def test_one_triangle_serialization():
    mesh = LimitSurfaceMesh(
        vertices=np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0.5]]),
        triangles=np.array([[0, 1, 2]]),
        sheet_count=1,
        neck_radius=0.1,
        component_tags=np.array(["multigraph_f"] * 3),
        vertex_sheet=np.zeros(3, dtype=np.int64),
        domain=None,
    )
    lines = obj_text(mesh).splitlines()
    assert sum(l.startswith("v ") for l in lines) == 3
    assert sum(l.startswith("f ") for l in lines) == 1
    assert "f 1 2 3" in lines


def test_slit_jump_is_two_pi_eps(two_point_mesh):
    cfg, mesh = two_point_mesh
    dom = mesh.domain
    t = dom.triangles
    edges = np.unique(np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1), axis=0)
    a, b = dom.points[edges[:, 0]], dom.points[edges[:, 1]]
    cont = dom.heights[edges[:, 0]] + arg_increment(cfg.points, a, b, cfg.charges)
    jump = dom.heights[edges[:, 1]] - cont
    crossing = np.abs(jump) > 1.0
    assert crossing.any()
    assert np.max(np.abs(jump[~crossing])) <= 1e-12
    for pj, ej, alpha in zip(cfg.points, cfg.charges, dom.slit_angles):
        u = np.exp(1j * alpha)
        ua, ub = (a - pj) * np.conj(u), (b - pj) * np.conj(u)
        here = crossing & ((ua.imag > 0) != (ub.imag > 0)) & (np.minimum(ua.real, ub.real) > 0)
        assert here.any()
        ccw = np.where(ub.imag > ua.imag, 1.0, -1.0)[here]
        np.testing.assert_allclose(jump[here], -TWO_PI * ej * ccw, rtol=0, atol=1e-12)


def test_stitched_triangles_are_continuous(two_point_mesh):
    cfg, mesh = two_point_mesh
    tags = mesh.triangle_tags()
    tri = mesh.triangles[tags == FAMILY_F]
    v = mesh.vertices
    z = v[tri, 2]
    xy = v[tri, 0] + 1j * v[tri, 1]
    for c in (1, 2):
        inc = arg_increment(cfg.points, xy[:, 0], xy[:, c], cfg.charges)
        assert np.max(np.abs(z[:, c] - z[:, 0] - inc)) <= 1e-12


def test_pi_offset_family(two_point_mesh):
    _, mesh = two_point_mesh
    f = mesh.vertices[mesh.component_tags == FAMILY_F]
    g = mesh.vertices[mesh.component_tags == FAMILY_F_PI]
    assert np.array_equal(f[:, :2], g[:, :2])
    assert np.max(np.abs(g[:, 2] - f[:, 2] - math.pi)) <= 1e-12


def test_sheets_offset_by_two_pi(two_point_mesh):
    _, mesh = two_point_mesh
    sel = mesh.component_tags == FAMILY_F
    z = mesh.vertices[sel, 2]
    s = mesh.vertex_sheet[sel]
    assert np.max(np.abs(z[s == 1] - z[s == 0] - TWO_PI)) <= 1e-12


def test_neck_boundaries_monotone(two_point_mesh):
    cfg, mesh = two_point_mesh
    for j, ej in enumerate(cfg.charges):
        v = mesh.vertices[mesh.component_tags == f"neck_{j + 1}"]
        ns, nt = 2 * 4 + 1, 64 * 2 + 1
        grid = v[:, 2].reshape(ns, nt)
        for row in (grid[0], grid[-1]):
            assert np.all(np.sign(np.diff(row)) == ej)


def test_edge_manifold(two_point_mesh):
    _, mesh = two_point_mesh
    t = mesh.triangles
    e = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    assert counts.max() <= 2
    assert len(np.unique(np.sort(t, axis=1), axis=0)) == len(t)


def test_domain_tiles_the_region(two_point_mesh):
    cfg, mesh = two_point_mesh
    dom = mesh.domain
    p = dom.points[dom.triangles]
    area = 0.5 * ((p[:, 1] - p[:, 0]) * np.conj(p[:, 2] - p[:, 0])).imag
    assert np.all(np.abs(area) > 0)

    def polygon_area(z):
        return 0.5 * abs(np.sum((z * np.conj(np.roll(z, -1))).imag))

    outer = dom.points[dom.counts["zone"] : dom.counts["zone"] + dom.counts["outer"]]
    holes = sum(polygon_area(dom.points[ring]) for ring in dom.inner_rings)
    assert abs(np.sum(np.abs(area)) - (polygon_area(outer) - holes)) <= 1e-9


def independent_lattice_count(points, zone, outer, h):
    m = int(math.ceil(outer / h)) + 1
    count = 0
    for j in range(-m - 1, m + 2):
        y = j * h * math.sqrt(3) / 2
        for i in range(-m - 1, m + 2):
            x = (i + 0.5 * (j % 2)) * h
            if math.hypot(x, y) > outer - 0.5 * h:
                continue
            if all(abs(complex(x, y) - pj) >= rj + 0.5 * h for pj, rj in zip(points, zone)):
                count += 1
    return count


@pytest.mark.parametrize("angular", [64, 128])
def test_two_point_counts_exact(angular):
    a = 1 / math.sqrt(2)
    cfg = Configuration(np.array([a, -a], dtype=complex), np.array([-1, -1]))
    S, M, rho = 2, 8, 0.1
    outer = a + 2
    d = min(2 * a, 2 * (outer - a))
    zone = [rho + 0.5 * (0.5 * d - rho)] * 2
    h = TWO_PI * zone[0] / angular
    n_outer = math.ceil(TWO_PI * outer / h)
    fill = independent_lattice_count(cfg.points, zone, outer, h)
    per_sheet = 2 * (M + 1) * angular + n_outer + fill
    expected_vertices = 2 * S * per_sheet + 2 * (2 * M + 1) * (angular * S + 1)

    mesh = build_limit_mesh(cfg, MeshParams(rho, S, M, angular))
    assert mesh.vertices.shape[0] == expected_vertices

    # Euler: a triangulated disk with n holes has 2V - B - 2 + 2n triangles
    boundary = 2 * angular + n_outer
    per_sheet_triangles = 2 * per_sheet - boundary - 2 + 2 * 2
    straddling = int(np.count_nonzero(np.any(mesh.domain.sheet_offsets != 0, axis=1)))
    expected_triangles = 2 * (S * per_sheet_triangles - straddling) + 2 * 4 * M * angular * S
    assert mesh.triangles.shape[0] == expected_triangles


def test_convergence_ratio():
    a = 1 / math.sqrt(2)
    cfg = Configuration(np.array([a, -a], dtype=complex), np.array([-1, -1]))
    errs = [
        midpoint_height_error(cfg, build_domain(cfg, MeshParams(radial_resolution=4, angular_resolution=A)))
        for A in (64, 128)
    ]
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_fischer_koch_mesh_builds():
    cfg = lift(closed_form(FamilySpec(Family.FISCHER_KOCH, 3, origin_charge=-1)))
    mesh = build_limit_mesh(cfg, MeshParams(neck_radius=0.1, radial_resolution=3, angular_resolution=32))
    assert mesh.component_names()[-1] == "neck_4"


@pytest.mark.parametrize(
    "params",
    [
        MeshParams(neck_radius=0.0),
        MeshParams(neck_radius=0.8),
        MeshParams(sheets=0),
        MeshParams(angular_resolution=4),
        MeshParams(outer_radius=1.0),
    ],
)
def test_bad_parameters(params, two_point):
    with pytest.raises(MeshParameterError):
        build_limit_mesh(two_point, params)


def test_export_to_missing_directory(tmp_path):
    with pytest.raises(OSError, match="missing"):
        export_obj(helicoid_mesh(), tmp_path / "missing" / "x.obj")


def test_deterministic(two_point):
    p = MeshParams(radial_resolution=2, angular_resolution=32)
    assert obj_text(build_limit_mesh(two_point, p)) == obj_text(build_limit_mesh(two_point, p))
