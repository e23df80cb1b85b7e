"""Triangle mesh of the limit object: two multigraphs of f joined by helicoidal necks.

f(z) = sum_j eps_j arg(z - p_j) is the real part of the integral of dh0.  The
domain {|z| <= R} minus small disks around the p_j is triangulated once
(structured polar annuli around each neck, constrained Delaunay elsewhere),
cut by one radial slit per neck, and given single-valued heights by exact
edgewise integration along a spanning tree that never crosses a slit.  Sheets
are copies shifted by 2 pi m; triangles straddling a slit are stitched to the
neighbouring sheet, so the height jump across slit j is exactly 2 pi eps_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Sequence

import numpy as np
import triangle as tr
from numpy.typing import NDArray
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .config import Configuration, min_pairwise_distance

TWO_PI = 2 * np.pi
FAMILY_F = "multigraph_f"
FAMILY_F_PI = "multigraph_f_plus_pi"


class MeshParameterError(ValueError):
    pass


@dataclass(frozen=True)
class MeshParams:
    neck_radius: float = 0.1
    sheets: int = 2
    radial_resolution: int = 8
    angular_resolution: int = 96
    outer_radius: float | None = None  # default: max|p_j| + 2

    def resolved_outer(self, config: Configuration) -> float:
        if self.outer_radius is not None:
            return float(self.outer_radius)
        return float(np.max(np.abs(config.points)) + 2.0)


@dataclass(frozen=True)
class PlanarDomain:
    """Single-sheet triangulation of the slit domain with its height branch."""

    points: NDArray[np.complex128]
    triangles: NDArray[np.int64]
    heights: NDArray[np.float64]
    sheet_offsets: NDArray[np.int64]  # per triangle corner, relative to corner 0
    slit_angles: NDArray[np.float64]
    zone_radii: NDArray[np.float64]
    inner_rings: NDArray[np.int64]  # (n, A) vertex ids of the rings at the neck radius
    neck_phases: NDArray[np.float64]
    counts: dict[str, int]


@dataclass(frozen=True)
class LimitSurfaceMesh:
    vertices: NDArray[np.float64]
    triangles: NDArray[np.int64]
    sheet_count: int
    neck_radius: float
    component_tags: NDArray[np.str_]
    vertex_sheet: NDArray[np.int64]  # sheet index for multigraph vertices, -1 on necks
    domain: PlanarDomain = field(repr=False)

    def component_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for t in self.component_tags:
            seen.setdefault(str(t), None)
        return list(seen)

    def triangle_tags(self) -> NDArray[np.str_]:
        return self.component_tags[self.triangles[:, 0]]


# ---------------------------------------------------------------------------
# geometry helpers


def arg_increment(points: np.ndarray, a: np.ndarray, b: np.ndarray, charges: np.ndarray) -> np.ndarray:
    """sum_j eps_j * (change of arg(z - p_j) along the straight segment a -> b)."""
    ratio = (b[..., None] - points) / (a[..., None] - points)
    return np.angle(ratio) @ charges.astype(float)


def _segments_cross_ray(a: np.ndarray, b: np.ndarray, origin: complex, direction: complex) -> np.ndarray:
    """Whether segments a->b cross the ray origin + s*direction, s > 0."""
    # rotate so the ray is the positive real axis
    rot = np.conj(direction) / abs(direction)
    ua = (a - origin) * rot
    ub = (b - origin) * rot
    opposite = (ua.imag > 0) != (ub.imag > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = ua.real - ua.imag * (ub.real - ua.real) / (ub.imag - ua.imag)
    return opposite & (x > 0)


def _ray_hits_disk(origin: complex, direction: complex, center: complex, radius: float) -> bool:
    u = direction / abs(direction)
    s = max(((center - origin) * np.conj(u)).real, 0.0)
    return abs(origin + s * u - center) < radius


def _rays_intersect(o1: complex, d1: complex, o2: complex, d2: complex) -> bool:
    m = np.array([[d1.real, -d2.real], [d1.imag, -d2.imag]])
    det = np.linalg.det(m)
    if abs(det) < 1e-14:
        # parallel: collinear overlap only
        w = o2 - o1
        if abs((w * np.conj(d1)).imag) > 1e-12:
            return False
        return (w * np.conj(d1)).real > 0 or (-w * np.conj(d2)).real > 0
    s, u = np.linalg.solve(m, np.array([(o2 - o1).real, (o2 - o1).imag]))
    return s > 0 and u > 0


def choose_slits(config: Configuration, zone_radii: np.ndarray, angular: int) -> np.ndarray:
    """Slit angles: outward from the centroid, snapped between spokes, perturbed to avoid conflicts."""
    p = config.points
    centroid = p.mean()
    step = TWO_PI / angular
    angles: list[float] = []
    for j, pj in enumerate(p):
        away = pj - centroid
        base = math.atan2(away.imag, away.real) if abs(away) > 1e-9 else 0.0
        base = (math.floor(base / step) + 0.5) * step
        for m in range(angular):
            shift = (m + 1) // 2 * (1 if m % 2 else -1)
            alpha = base + shift * step
            d = complex(math.cos(alpha), math.sin(alpha))
            if any(
                _ray_hits_disk(pj, d, p[k], zone_radii[k] * 1.05) for k in range(config.n) if k != j
            ):
                continue
            if any(
                _rays_intersect(pj, d, p[k], complex(math.cos(angles[k]), math.sin(angles[k])))
                for k in range(j)
            ):
                continue
            angles.append(alpha)
            break
        else:
            raise MeshParameterError(f"no admissible slit direction for point {j}")
    return np.array(angles)


def _lattice_fill(config: Configuration, zone_radii: np.ndarray, outer: float, h: float) -> np.ndarray:
    """Triangular-lattice points kept at least h/2 away from every zone and from the outer circle."""
    m = int(math.ceil(outer / h)) + 1
    jj = np.arange(-m - 1, m + 2)
    ii = np.arange(-m - 1, m + 2)
    I, J = np.meshgrid(ii, jj)
    z = (I + 0.5 * (J % 2)) * h + 1j * J * h * math.sqrt(3) / 2
    z = z.reshape(-1)
    keep = np.abs(z) <= outer - 0.5 * h
    for pj, rj in zip(config.points, zone_radii):
        keep &= np.abs(z - pj) >= rj + 0.5 * h
    return z[keep]


def zone_radii_for(config: Configuration, neck_radius: float, outer: float) -> np.ndarray:
    p = config.points
    d = 2 * (outer - np.abs(p))
    if config.n > 1:
        diff = np.abs(p[:, None] - p[None, :])
        np.fill_diagonal(diff, np.inf)
        d = np.minimum(d, diff.min(axis=1))
    return neck_radius + 0.5 * (0.5 * d - neck_radius)


# ---------------------------------------------------------------------------
# planar domain


def build_domain(config: Configuration, params: MeshParams) -> PlanarDomain:
    rho = float(params.neck_radius)
    outer = params.resolved_outer(config)
    M, A = int(params.radial_resolution), int(params.angular_resolution)
    p = config.points
    eps = config.charges
    n = config.n
    if rho <= 0:
        raise MeshParameterError("neck_radius must be positive")
    if n > 1 and not rho < 0.5 * min_pairwise_distance(p):
        raise MeshParameterError("neck_radius must be below half the minimum pairwise distance")
    if not outer > np.max(np.abs(p)) + 1:
        raise MeshParameterError("outer_radius must exceed max|p_j| + 1")
    if M < 1 or A < 8:
        raise MeshParameterError("need radial_resolution >= 1 and angular_resolution >= 8")
    if params.sheets < 1:
        raise MeshParameterError("sheets must be >= 1")

    zone = zone_radii_for(config, rho, outer)
    h = TWO_PI * float(zone.min()) / A
    n_outer = int(math.ceil(TWO_PI * outer / h))

    # vertices: neck zones (ring-major), outer circle, lattice fill
    theta = TWO_PI * np.arange(A) / A
    zone_pts = []
    for pj, rj in zip(p, zone):
        radii = rho + (rj - rho) * np.arange(M + 1) / M
        zone_pts.append((pj + radii[:, None] * np.exp(1j * theta)[None, :]).reshape(-1))
    outer_pts = outer * np.exp(1j * TWO_PI * np.arange(n_outer) / n_outer)
    fill = _lattice_fill(config, zone, outer, h)
    points = np.concatenate(zone_pts + [outer_pts, fill])
    per_zone = (M + 1) * A
    outer_start = n * per_zone
    fill_start = outer_start + n_outer

    # structured annuli
    tris = []
    ring = np.arange(A)
    nxt = (ring + 1) % A
    for j in range(n):
        base = j * per_zone
        for i in range(M):
            a0 = base + i * A + ring
            a1 = base + i * A + nxt
            b0 = base + (i + 1) * A + ring
            b1 = base + (i + 1) * A + nxt
            tris.append(np.column_stack([a0, b0, b1]))
            tris.append(np.column_stack([a0, b1, a1]))

    # constrained triangulation of the rest
    cdt_ids = np.concatenate(
        [np.arange(j * per_zone + M * A, (j + 1) * per_zone) for j in range(n)]
        + [np.arange(outer_start, points.size)]
    )
    local = {int(g): i for i, g in enumerate(cdt_ids)}
    segs = []
    for j in range(n):
        ids = j * per_zone + M * A + ring
        segs.append(np.column_stack([ids, j * per_zone + M * A + nxt]))
    oid = outer_start + np.arange(n_outer)
    segs.append(np.column_stack([oid, outer_start + (np.arange(n_outer) + 1) % n_outer]))
    segs = np.concatenate(segs)
    pslg = {
        "vertices": np.column_stack([points[cdt_ids].real, points[cdt_ids].imag]),
        "segments": np.vectorize(local.get)(segs),
        "holes": np.column_stack([p.real, p.imag]),
    }
    out = tr.triangulate(pslg, "pYQ")
    if out["vertices"].shape[0] != cdt_ids.size:
        raise MeshParameterError("triangulation inserted unexpected vertices")
    tris.append(cdt_ids[out["triangles"]])
    triangles = np.concatenate(tris).astype(np.int64)

    # slits and single-valued heights along a spanning tree avoiding them
    slits = choose_slits(config, zone, A)
    edges = np.unique(np.sort(np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]), axis=1), axis=0)
    ea, eb = points[edges[:, 0]], points[edges[:, 1]]
    crossing = np.zeros(edges.shape[0], dtype=bool)
    for pj, alpha in zip(p, slits):
        crossing |= _segments_cross_ray(ea, eb, pj, np.exp(1j * alpha))
    keep = edges[~crossing]
    nv = points.size
    graph = coo_matrix((np.ones(keep.shape[0]), (keep[:, 0], keep[:, 1])), shape=(nv, nv)).tocsr()
    order, pred = breadth_first_order(graph, 0, directed=False, return_predecessors=True)
    if order.size != nv:
        raise MeshParameterError("slits disconnect the domain; try another resolution")
    heights = np.empty(nv)
    heights[0] = float(np.angle(points[0] - p) @ eps.astype(float))
    rest = order[1:]
    inc = np.zeros(nv)
    inc[rest] = arg_increment(p, points[pred[rest]], points[rest], eps)
    for v in rest:
        heights[v] = heights[pred[v]] + inc[v]

    # per-triangle stitching offsets relative to corner 0
    offsets = np.zeros(triangles.shape, dtype=np.int64)
    z0 = points[triangles[:, 0]]
    for c in (1, 2):
        zc = points[triangles[:, c]]
        cont = heights[triangles[:, 0]] + arg_increment(p, z0, zc, eps)
        offsets[:, c] = np.rint((cont - heights[triangles[:, c]]) / TWO_PI).astype(np.int64)

    inner = np.array([j * per_zone + ring for j in range(n)])
    phases = np.empty(n)
    for j in range(n):
        branch = slits[j] + np.mod(theta - slits[j], TWO_PI)
        phases[j] = float(np.mean(heights[inner[j]] - eps[j] * branch))

    counts = {
        "zone": n * per_zone,
        "outer": n_outer,
        "fill": int(fill.size),
        "per_sheet": int(nv),
        "cdt_triangles": int(out["triangles"].shape[0]),
    }
    return PlanarDomain(points, triangles, heights, offsets, slits, zone, inner, phases, counts)


def midpoint_height_error(config: Configuration, domain: PlanarDomain) -> float:
    """Max over domain edges of |linear interpolant - f| at the edge midpoint.

    Both values are continued from the first endpoint, so no branch choice
    enters; this is the discretization error of the piecewise-linear sheet.
    """
    t = domain.triangles
    edges = np.unique(np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1), axis=0)
    a = domain.points[edges[:, 0]]
    b = domain.points[edges[:, 1]]
    full = arg_increment(config.points, a, b, config.charges)
    half = arg_increment(config.points, a, 0.5 * (a + b), config.charges)
    return float(np.max(np.abs(0.5 * full - half)))


# ---------------------------------------------------------------------------
# full mesh


def neck_samples(params: MeshParams) -> tuple[int, int]:
    """(radial samples across the neck, angular samples along it)."""
    return 2 * params.radial_resolution + 1, params.angular_resolution * params.sheets + 1


def _neck_patch(pj: complex, eps: int, rho: float, slit: float, phase: float, params: MeshParams):
    ns, nt = neck_samples(params)
    S = params.sheets
    s = np.linspace(-rho, rho, ns)
    if eps > 0:
        th = slit + TWO_PI * S * np.arange(nt) / (nt - 1)
    else:
        th = slit - TWO_PI * (S - 1) + TWO_PI * S * np.arange(nt) / (nt - 1)
    S_, T_ = np.meshgrid(s, th, indexing="ij")
    xy = pj + S_ * np.exp(1j * T_)
    z = eps * T_ + phase
    verts = np.column_stack([xy.real.ravel(), xy.imag.ravel(), z.ravel()])
    idx = np.arange(ns * nt).reshape(ns, nt)
    a0, a1 = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    b0, b1 = idx[1:, :-1].ravel(), idx[1:, 1:].ravel()
    tris = np.concatenate([np.column_stack([a0, b0, b1]), np.column_stack([a0, b1, a1])])
    return verts, tris


def build_limit_mesh(config: Configuration, params: MeshParams = MeshParams()) -> LimitSurfaceMesh:
    """Mesh of the two multigraphs (f and f + pi) over ``params.sheets`` sheets plus necks."""
    dom = build_domain(config, params)
    S = params.sheets
    nv = dom.points.size
    verts, tris, tags, vsheet = [], [], [], []
    offset = 0
    for shift, tag in ((0.0, FAMILY_F), (np.pi, FAMILY_F_PI)):
        start = offset
        for m in range(S):
            z = dom.heights + TWO_PI * m + shift
            verts.append(np.column_stack([dom.points.real, dom.points.imag, z]))
            tags.append(np.full(nv, tag))
            vsheet.append(np.full(nv, m))
        offset += S * nv
        for m in range(S):
            sheet = m + dom.sheet_offsets
            ok = np.all((sheet >= 0) & (sheet < S), axis=1)
            tris.append(start + sheet[ok] * nv + dom.triangles[ok])
    for j, (pj, eps) in enumerate(zip(config.points, config.charges)):
        v, t = _neck_patch(pj, int(eps), params.neck_radius, dom.slit_angles[j], dom.neck_phases[j], params)
        verts.append(v)
        tris.append(t + offset)
        tags.append(np.full(v.shape[0], f"neck_{j + 1}"))
        vsheet.append(np.full(v.shape[0], -1))
        offset += v.shape[0]
    return LimitSurfaceMesh(
        vertices=np.concatenate(verts),
        triangles=np.concatenate(tris).astype(np.int64),
        sheet_count=S,
        neck_radius=float(params.neck_radius),
        component_tags=np.concatenate(tags),
        vertex_sheet=np.concatenate(vsheet).astype(np.int64),
        domain=dom,
    )


def expected_vertex_count(n: int, per_sheet: int, params: MeshParams) -> int:
    """2 * sheets * per_sheet multigraph vertices plus n neck grids."""
    ns, nt = neck_samples(params)
    return 2 * params.sheets * per_sheet + n * ns * nt


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def obj_text(mesh: LimitSurfaceMesh) -> str:
    """Wavefront OBJ with one ``o <tag>`` group per component (vertices are contiguous per tag)."""
    tags = mesh.component_tags
    tri_tags = mesh.triangle_tags()
    lines: list[str] = []
    for name in mesh.component_names():
        lines.append(f"o {name}")
        for x, y, z in mesh.vertices[tags == name]:
            lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        for a, b, c in mesh.triangles[tri_tags == name] + 1:
            lines.append(f"f {a} {b} {c}")
    return "\n".join(lines) + "\n"


def export_obj(mesh: LimitSurfaceMesh, destination: str | PathLike) -> None:
    text = obj_text(mesh)
    try:
        with open(destination, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write OBJ to {destination}: {exc}") from exc


def read_obj(path: str | PathLike) -> tuple[np.ndarray, np.ndarray, list[str]]:
    verts, faces, groups = [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
            elif parts[0] == "o":
                groups.append(parts[1])
    return np.array(verts), np.array(faces, dtype=np.int64), groups


def export_height_csv(mesh: LimitSurfaceMesh, destination: str | PathLike) -> None:
    """Samples (x, y, sheet, height) of the f multigraph."""
    sel = mesh.component_tags == FAMILY_F
    with open(destination, "w") as fh:
        fh.write("x,y,sheet,height\n")
        for (x, y, z), s in zip(mesh.vertices[sel], mesh.vertex_sheet[sel]):
            fh.write(f"{_fmt(x)},{_fmt(y)},{s},{_fmt(z)}\n")
