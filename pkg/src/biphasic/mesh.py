"""Structured ten-node tetrahedral meshes with tagged boundary facets.

Both generators build a 2D cross-section (rectangle grid, or a butterfly
quarter disk: square core plus a ring mapped onto the arc), triangulate
its quads, extrude along z into prisms, and split each prism into three
tetrahedra. Face diagonals always pass through the smallest global node
id of the face, which makes the split conforming across every interior
face without bookkeeping.

Tet10 node order follows fem.TET10_EDGES: corners 0-3, then midpoints of
edges (0,1), (1,2), (2,0), (0,3), (1,3), (2,3). Midside nodes are exact
edge midpoints except on the curved lateral surface of the cylinder,
where they are projected radially onto the true radius.

Mesh file format (whitespace-separated, '#' comments):

    biphasic-mesh v1
    vertices N
    <id> <x> <y> <z>          # repeated N times, full precision
    tet10 M
    <id> <n0> ... <n9> <region>
    facet_set <name> K
    <6 node ids per triangle> # repeated K times
    node_set <name> K
    <K ids>
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError, MeshError, MeshParseError, QueryError
from .fem import TET10_EDGES

# Outward-oriented corner faces of a positively oriented tetrahedron.
TET_FACES = ((0, 2, 1), (0, 1, 3), (1, 2, 3), (2, 0, 3))

_FORMAT_HEADER = "biphasic-mesh v1"

# Core square half-size of the butterfly cross-section, as a fraction of
# the radius. Balances core and ring element sizes at the resolutions used.
_CORE_FRACTION = 0.5


@dataclass(frozen=True)
class Vertex:
    """A mesh vertex: dense integer id and coordinates in mm."""

    id: int
    coords: np.ndarray


@dataclass(frozen=True)
class Tet10:
    """Ten-node tetrahedron: 4 corners then 6 edge midpoints."""

    nodes: np.ndarray
    region_tag: int = 0


@dataclass(frozen=True)
class MeshSpec:
    """Generation request for one of the structured shapes.

    box: dimensions (lx, ly, lz) mm, subdivisions (nx, ny, nz).
    quarter_cylinder: radius/height mm, subdivisions (nr, nc, nz) =
    (ring radial cells, cells along the arc [even], axial cells).
    """

    shape: str
    radius: float = 0.0
    height: float = 0.0
    lx: float = 0.0
    ly: float = 0.0
    lz: float = 0.0
    subdivisions: tuple = (1, 1, 1)

    def __post_init__(self):
        if self.shape not in ("box", "quarter_cylinder"):
            raise ConfigError(f"unknown mesh shape {self.shape!r}")
        subs = tuple(int(s) for s in self.subdivisions)
        object.__setattr__(self, "subdivisions", subs)
        if any(s < 1 for s in subs):
            raise ConfigError(f"subdivisions must be >= 1, got {subs}")
        if self.shape == "box":
            if min(self.lx, self.ly, self.lz) <= 0.0:
                raise ConfigError(
                    f"box dimensions must be > 0, got "
                    f"({self.lx}, {self.ly}, {self.lz})"
                )
        else:
            if self.radius <= 0.0 or self.height <= 0.0:
                raise ConfigError(
                    f"radius and height must be > 0, got "
                    f"({self.radius}, {self.height})"
                )
            if subs[1] % 2 != 0:
                raise ConfigError(
                    f"quarter-cylinder arc subdivisions must be even, got {subs[1]}"
                )


@dataclass(eq=False)
class Mesh:
    """Immutable Tet10 mesh with tagged boundary facets.

    coords: (N, 3) float64; elements: (M, 10) int32; region_tags: (M,);
    facet_sets: name -> (K, 6) int32 (3 corners + 3 edge midpoints);
    node_sets: name -> (K,) int32.
    """

    coords: np.ndarray
    elements: np.ndarray
    region_tags: np.ndarray
    facet_sets: dict = field(default_factory=dict)
    node_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int32)
        self.region_tags = np.ascontiguousarray(self.region_tags, dtype=np.int32)
        self.facet_sets = {
            k: np.ascontiguousarray(v, dtype=np.int32).reshape(-1, 6)
            for k, v in self.facet_sets.items()
        }
        self.node_sets = {
            k: np.ascontiguousarray(v, dtype=np.int32)
            for k, v in self.node_sets.items()
        }
        for arr in (self.coords, self.elements, self.region_tags):
            arr.flags.writeable = False
        for d in (self.facet_sets, self.node_sets):
            for arr in d.values():
                arr.flags.writeable = False

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def corner_nodes(self) -> np.ndarray:
        """Sorted unique ids of corner (pressure-carrying) nodes."""
        return np.unique(self.elements[:, :4])

    def vertex(self, i: int) -> Vertex:
        return Vertex(id=i, coords=self.coords[i])

    def tet10(self, e: int) -> Tet10:
        return Tet10(nodes=self.elements[e], region_tag=int(self.region_tags[e]))

    def facet_nodes(self, name: str) -> np.ndarray:
        """Sorted unique node ids appearing in a facet set."""
        if name not in self.facet_sets:
            raise ConfigError(f"facet set {name!r} does not exist")
        return np.unique(self.facet_sets[name])


def corner_volumes(mesh_or_coords, elements=None) -> np.ndarray:
    """Signed volumes of the corner tetrahedra, mm^3."""
    if elements is None:
        coords, elements = mesh_or_coords.coords, mesh_or_coords.elements
    else:
        coords = mesh_or_coords
    c = coords[elements[:, :4]]
    e = c[:, 1:] - c[:, :1]
    return np.linalg.det(e) / 6.0


def quadratic_volumes(mesh: Mesh) -> np.ndarray:
    """Element volumes via the quadratic isoparametric map (4-pt rule)."""
    from .fem import _DN10_Q, _QUAD, _det3  # internal reuse, same conventions

    X = mesh.coords[mesh.elements]  # (n,10,3)
    vols = np.zeros(mesh.n_elements)
    for q in range(4):
        jac = np.matmul(X.transpose(0, 2, 1), _DN10_Q[q])
        vols += _QUAD.weights[q] * _det3(jac)
    return vols


def circumsphere_radius(corners) -> float:
    """Radius of the sphere through 4 non-degenerate points, mm."""
    c = np.asarray(corners, dtype=float).reshape(4, 3)
    e = c[1:] - c[0]
    vol6 = np.linalg.det(e)
    if abs(vol6) / 6.0 <= 1e-12:
        raise GeometryError("degenerate tetrahedron: |signed volume| <= 1e-12")
    rhs = 0.5 * (np.sum(c[1:] ** 2, axis=1) - np.sum(c[0] ** 2))
    center = np.linalg.solve(e, rhs)
    return float(np.linalg.norm(center - c[0]))


def circumsphere_radii(mesh: Mesh) -> np.ndarray:
    """Circumsphere radius of every element's corner tetrahedron."""
    c = mesh.coords[mesh.elements[:, :4]]
    e = c[:, 1:] - c[:, :1]
    rhs = 0.5 * (np.sum(c[:, 1:] ** 2, axis=2) - np.sum(c[:, :1] ** 2, axis=2))
    centers = np.linalg.solve(e, rhs[..., None])[..., 0]
    return np.linalg.norm(centers - c[:, 0], axis=1)


def reference_line_nodes(mesh: Mesh, point, direction, tol: float) -> np.ndarray:
    """Node ids within tol of a line, sorted by the axial coordinate.

    point, direction: 3-vectors defining the line (direction need not be
    normalized). Raises QueryError when fewer than 2 nodes are found.
    """
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    nd = np.linalg.norm(d)
    if nd == 0.0:
        raise ConfigError("line direction must be nonzero")
    d = d / nd
    rel = mesh.coords - p
    t = rel @ d
    dist = np.linalg.norm(rel - t[:, None] * d, axis=1)
    ids = np.nonzero(dist <= tol)[0]
    if ids.size < 2:
        raise QueryError(
            f"reference line query found {ids.size} node(s) within tol={tol}"
        )
    order = np.argsort(t[ids], kind="stable")
    return ids[order].astype(np.int32)


# ---------------------------------------------------------------------------
# generation


def _triangulate_quads(quads: np.ndarray) -> np.ndarray:
    """Split CCW quads (n,4) into 2 CCW triangles each.

    The diagonal passes through the quad's smallest global node id, so
    neighbouring cells agree on shared-face diagonals by construction.
    """
    tris = np.empty((2 * len(quads), 3), dtype=np.int64)
    for i, (a, b, c, d) in enumerate(quads):
        if min(a, c) < min(b, d):
            tris[2 * i] = (a, b, c)
            tris[2 * i + 1] = (a, c, d)
        else:
            tris[2 * i] = (b, c, d)
            tris[2 * i + 1] = (b, d, a)
    return tris


_PRISM_ROT = {
    0: (0, 1, 2, 3, 4, 5),
    1: (1, 2, 0, 4, 5, 3),
    2: (2, 0, 1, 5, 3, 4),
    3: (3, 5, 4, 0, 2, 1),
    4: (4, 3, 5, 1, 0, 2),
    5: (5, 4, 3, 2, 1, 0),
}


def _prism_to_tets(ids) -> list:
    """Split a prism (bottom CCW triangle 0-2, top 3-5) into 3 tets.

    Every quad-face diagonal emanates from the face's smallest global id,
    making adjacent prisms conforming.
    """
    ids = list(ids)
    m = ids.index(min(ids))
    w = [ids[i] for i in _PRISM_ROT[m]]
    if min(w[1], w[5]) < min(w[2], w[4]):
        local = ((0, 1, 2, 5), (0, 1, 5, 4), (0, 4, 5, 3))
    else:
        local = ((0, 1, 2, 4), (0, 4, 2, 5), (0, 4, 5, 3))
    return [tuple(w[i] for i in t) for t in local]


def _extrude(tris2d: np.ndarray, n2d: int, nz: int) -> np.ndarray:
    """Extrude 2D triangles through nz layers of prisms, split to tet4."""
    tets = []
    for k in range(nz):
        lo = k * n2d
        hi = (k + 1) * n2d
        for a, b, c in tris2d:
            tets.extend(_prism_to_tets((lo + a, lo + b, lo + c, hi + a, hi + b, hi + c)))
    return np.asarray(tets, dtype=np.int64)


def _insert_midside(coords4: np.ndarray, tets4: np.ndarray):
    """Upgrade a tet4 mesh to tet10; returns (coords, conn, edge_map)."""
    edge_map = {}
    conn = np.empty((len(tets4), 10), dtype=np.int64)
    mid_coords = []
    next_id = len(coords4)
    for e, tet in enumerate(tets4):
        conn[e, :4] = tet
        for m, (a, b) in enumerate(TET10_EDGES):
            key = (min(tet[a], tet[b]), max(tet[a], tet[b]))
            nid = edge_map.get(key)
            if nid is None:
                nid = next_id
                next_id += 1
                edge_map[key] = nid
                mid_coords.append(0.5 * (coords4[key[0]] + coords4[key[1]]))
            conn[e, 4 + m] = nid
    coords = np.vstack([coords4, np.asarray(mid_coords)]) if mid_coords else coords4
    return coords, conn, edge_map


def _boundary_faces(tets4: np.ndarray):
    """(element, local_face) pairs of faces owned by exactly one element."""
    count = {}
    for e, tet in enumerate(tets4):
        for f, face in enumerate(TET_FACES):
            key = tuple(sorted((tet[face[0]], tet[face[1]], tet[face[2]])))
            count.setdefault(key, []).append((e, f))
    return [owners[0] for owners in count.values() if len(owners) == 1]


def _facet_rows(conn10: np.ndarray, boundary) -> np.ndarray:
    """6-node facet rows (3 oriented corners + 3 edge midpoints)."""
    edge_slot = {tuple(sorted(e)): 4 + m for m, e in enumerate(TET10_EDGES)}
    rows = np.empty((len(boundary), 6), dtype=np.int64)
    for i, (e, f) in enumerate(boundary):
        la, lb, lc = TET_FACES[f]
        el = conn10[e]
        rows[i, :3] = (el[la], el[lb], el[lc])
        for j, (p, q) in enumerate(((la, lb), (lb, lc), (lc, la))):
            rows[i, 3 + j] = el[edge_slot[tuple(sorted((p, q)))]]
    return rows


def _tag_facets(coords: np.ndarray, rows: np.ndarray, predicates: dict) -> dict:
    sets = {name: [] for name in predicates}
    untagged = []
    for row in rows:
        pts = coords[row]
        hit = False
        for name, pred in predicates.items():
            if pred(pts):
                sets[name].append(row)
                hit = True
                break
        if not hit:
            untagged.append(row)
    if untagged:
        raise MeshError(
            f"{len(untagged)} boundary facet(s) not covered by any facet-set "
            "predicate; generator geometry is inconsistent"
        )
    return {
        name: np.asarray(rows_, dtype=np.int64).reshape(-1, 6)
        for name, rows_ in sets.items()
    }


def _check_midpoints(coords, conn, edge_map, skip=frozenset()):
    for (a, b), mid in edge_map.items():
        if mid in skip:
            continue
        err = np.linalg.norm(coords[mid] - 0.5 * (coords[a] + coords[b]))
        if err > 1e-9:
            raise MeshError(
                f"midside node {mid} off edge ({a},{b}) midpoint by {err:.3e} mm"
            )


def _finalize(coords, conn, facet_sets, node_sets=None) -> Mesh:
    mesh = Mesh(
        coords=coords,
        elements=conn,
        region_tags=np.zeros(len(conn), dtype=np.int32),
        facet_sets=facet_sets,
        node_sets=node_sets or {},
    )
    validate_mesh(mesh)
    return mesh


def generate_box(spec: MeshSpec) -> Mesh:
    """Structured box mesh with facet sets top/bottom/x0/x1/y0/y1."""
    if spec.shape != "box":
        raise ConfigError(f"generate_box needs shape 'box', got {spec.shape!r}")
    nx, ny, nz = spec.subdivisions
    lx, ly, lz = spec.lx, spec.ly, spec.lz

    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    pts2d = np.array([(x, y) for y in ys for x in xs])
    vid = lambda i, j: j * (nx + 1) + i
    quads = np.array(
        [
            (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
            for j in range(ny)
            for i in range(nx)
        ]
    )
    tris = _triangulate_quads(quads)

    zs = np.linspace(0.0, lz, nz + 1)
    n2d = len(pts2d)
    coords4 = np.array([(x, y, z) for z in zs for x, y in pts2d])
    tets4 = _extrude(tris, n2d, nz)
    coords, conn, edge_map = _insert_midside(coords4, tets4)
    _check_midpoints(coords, conn, edge_map)

    tol = 1e-9 * max(1.0, lx, ly, lz)
    predicates = {
        "bottom": lambda p: np.all(np.abs(p[:, 2]) <= tol),
        "top": lambda p: np.all(np.abs(p[:, 2] - lz) <= tol),
        "x0": lambda p: np.all(np.abs(p[:, 0]) <= tol),
        "x1": lambda p: np.all(np.abs(p[:, 0] - lx) <= tol),
        "y0": lambda p: np.all(np.abs(p[:, 1]) <= tol),
        "y1": lambda p: np.all(np.abs(p[:, 1] - ly) <= tol),
    }
    facet_sets = _tag_facets(coords, _facet_rows(conn, _boundary_faces(tets4)), predicates)
    return _finalize(coords, conn, facet_sets)


def _butterfly_cross_section(radius: float, nr: int, nc: int):
    """Quarter-disk butterfly: graded square core + ring mapped to the arc.

    Returns (points (n,2), triangles (t,3)). Arc nodes sit exactly on the
    radius; the core occupies [0, c]^2 with c = _CORE_FRACTION * radius,
    graded so the core boundary coincides with the innermost ring layer.
    """
    c = _CORE_FRACTION * radius
    m2 = nc // 2
    theta = np.pi / 2 * np.arange(nc + 1) / nc

    # core grid, tan-graded so edge nodes match the ring inner boundary
    tgrade = np.tan(theta[: m2 + 1]) / np.tan(theta[m2])
    core_id = {}
    pts = []
    for b in range(m2 + 1):
        for a in range(m2 + 1):
            core_id[(a, b)] = len(pts)
            pts.append((c * tgrade[a], c * tgrade[b]))

    def square_boundary(j):
        # inner boundary point of ring spoke j, on the core square edge
        if j <= m2:
            return core_id[(m2, j)]
        return core_id[(nc - j, m2)]

    ring_id = {}
    for i in range(1, nr + 1):
        for j in range(nc + 1):
            q = np.asarray(pts[square_boundary(j)])
            arc = radius * np.array([np.cos(theta[j]), np.sin(theta[j])])
            ring_id[(i, j)] = len(pts)
            pts.append(tuple(q + (i / nr) * (arc - q)))

    def rid(i, j):
        return square_boundary(j) if i == 0 else ring_id[(i, j)]

    quads = []
    for b in range(m2):
        for a in range(m2):
            quads.append(
                (core_id[(a, b)], core_id[(a + 1, b)], core_id[(a + 1, b + 1)], core_id[(a, b + 1)])
            )
    for i in range(nr):
        for j in range(nc):
            quads.append((rid(i, j), rid(i + 1, j), rid(i + 1, j + 1), rid(i, j + 1)))

    return np.asarray(pts), _triangulate_quads(np.asarray(quads))


def generate_quarter_cylinder(spec: MeshSpec) -> Mesh:
    """Quarter cylinder (x, y >= 0) with facet sets top/bottom/lateral/sym_x/sym_y."""
    if spec.shape != "quarter_cylinder":
        raise ConfigError(
            f"generate_quarter_cylinder needs shape 'quarter_cylinder', got {spec.shape!r}"
        )
    nr, nc, nz = spec.subdivisions
    R, H = spec.radius, spec.height

    pts2d, tris = _butterfly_cross_section(R, nr, nc)
    n2d = len(pts2d)
    zs = np.linspace(0.0, H, nz + 1)
    coords4 = np.empty((n2d * (nz + 1), 3))
    for k, z in enumerate(zs):
        coords4[k * n2d : (k + 1) * n2d, :2] = pts2d
        coords4[k * n2d : (k + 1) * n2d, 2] = z
    tets4 = _extrude(tris, n2d, nz)
    coords, conn, edge_map = _insert_midside(coords4, tets4)

    # project lateral-surface midside nodes onto the true radius
    rtol = 1e-9 * R
    r4 = np.hypot(coords4[:, 0], coords4[:, 1])
    on_lateral4 = np.abs(r4 - R) <= rtol
    projected = set()
    coords = coords.copy()
    for (a, b), mid in edge_map.items():
        if on_lateral4[a] and on_lateral4[b]:
            rm = np.hypot(coords[mid, 0], coords[mid, 1])
            coords[mid, :2] *= R / rm
            projected.add(mid)
    _check_midpoints(coords, conn, edge_map, skip=projected)

    tol = 1e-9 * max(1.0, R, H)
    predicates = {
        "bottom": lambda p: np.all(np.abs(p[:, 2]) <= tol),
        "top": lambda p: np.all(np.abs(p[:, 2] - H) <= tol),
        "sym_x": lambda p: np.all(np.abs(p[:, 0]) <= tol),
        "sym_y": lambda p: np.all(np.abs(p[:, 1]) <= tol),
        "lateral": lambda p: np.all(np.abs(np.hypot(p[:, 0], p[:, 1]) - R) <= 1e-6 * R),
    }
    facet_sets = _tag_facets(coords, _facet_rows(conn, _boundary_faces(tets4)), predicates)
    return _finalize(coords, conn, facet_sets)


def generate(spec: MeshSpec) -> Mesh:
    if spec.shape == "box":
        return generate_box(spec)
    return generate_quarter_cylinder(spec)


# ---------------------------------------------------------------------------
# validation and IO


def validate_mesh(mesh: Mesh) -> None:
    """Enforce structural invariants; raises MeshError on violation."""
    n = mesh.n_nodes
    if mesh.elements.size and (mesh.elements.min() < 0 or mesh.elements.max() >= n):
        raise MeshError("element connectivity references nonexistent nodes")
    if not np.all(np.isfinite(mesh.coords)):
        raise MeshError("non-finite vertex coordinates")

    vols = corner_volumes(mesh)
    bad = np.nonzero(vols <= 0.0)[0]
    if bad.size:
        raise MeshError(
            f"element {int(bad[0])} has non-positive corner volume {vols[bad[0]]:.6e}"
        )

    referenced = np.zeros(n, dtype=bool)
    referenced[mesh.elements.ravel()] = True
    if not referenced.all():
        orphan = int(np.nonzero(~referenced)[0][0])
        raise MeshError(f"orphan node {orphan} not referenced by any element")

    # every facet-set triangle must be a boundary face (owned by exactly one element)
    count = {}
    for tet in mesh.elements[:, :4]:
        for face in TET_FACES:
            key = tuple(sorted((tet[face[0]], tet[face[1]], tet[face[2]])))
            count[key] = count.get(key, 0) + 1
    for name, rows in mesh.facet_sets.items():
        for row in rows:
            key = tuple(sorted(row[:3].tolist()))
            owners = count.get(key, 0)
            if owners != 1:
                raise MeshError(
                    f"facet set {name!r} triangle {key} owned by {owners} elements "
                    "(must be exactly 1)"
                )
    for name, ids in mesh.node_sets.items():
        if ids.size and (ids.min() < 0 or ids.max() >= n):
            raise MeshError(f"node set {name!r} references nonexistent nodes")


def write_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text format; coordinates keep full precision."""
    lines = [_FORMAT_HEADER]
    lines.append(f"vertices {mesh.n_nodes}")
    for i, (x, y, z) in enumerate(mesh.coords):
        lines.append(f"{i} {float(x)!r} {float(y)!r} {float(z)!r}")
    lines.append(f"tet10 {mesh.n_elements}")
    for e in range(mesh.n_elements):
        nodes = " ".join(str(int(v)) for v in mesh.elements[e])
        lines.append(f"{e} {nodes} {int(mesh.region_tags[e])}")
    for name, rows in mesh.facet_sets.items():
        lines.append(f"facet_set {name} {len(rows)}")
        for row in rows:
            lines.append(" ".join(str(int(v)) for v in row))
    for name, ids in mesh.node_sets.items():
        lines.append(f"node_set {name} {len(ids)}")
        for start in range(0, len(ids), 12):
            lines.append(" ".join(str(int(v)) for v in ids[start : start + 12]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class _TokenStream:
    def __init__(self, path):
        self.tokens = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                body = line.split("#", 1)[0]
                for tok in body.split():
                    self.tokens.append((tok, lineno))
        self.pos = 0
        self.last_line = 0

    def next(self, what: str) -> str:
        if self.pos >= len(self.tokens):
            raise MeshParseError(f"unexpected end of file, expected {what}", self.last_line or 1)
        tok, line = self.tokens[self.pos]
        self.pos += 1
        self.last_line = line
        return tok

    def next_int(self, what: str) -> int:
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise MeshParseError(f"expected integer {what}, got {tok!r}", self.last_line)

    def next_float(self, what: str) -> float:
        tok = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise MeshParseError(f"expected number {what}, got {tok!r}", self.last_line)

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None


def read_mesh(path) -> Mesh:
    """Read and validate a mesh file; raises MeshParseError with line numbers."""
    ts = _TokenStream(path)
    header = [ts.next("header"), ts.next("header")]
    if " ".join(header) != _FORMAT_HEADER:
        raise MeshParseError(
            f"bad header {' '.join(header)!r}, expected {_FORMAT_HEADER!r}", ts.last_line
        )

    kw = ts.next("'vertices'")
    if kw != "vertices":
        raise MeshParseError(f"expected 'vertices', got {kw!r}", ts.last_line)
    n = ts.next_int("vertex count")
    coords = np.empty((n, 3))
    for i in range(n):
        vid = ts.next_int("vertex id")
        if vid != i:
            raise MeshParseError(f"vertex ids must be dense, expected {i} got {vid}", ts.last_line)
        coords[i] = [ts.next_float("x"), ts.next_float("y"), ts.next_float("z")]

    kw = ts.next("'tet10'")
    if kw != "tet10":
        raise MeshParseError(f"expected 'tet10', got {kw!r}", ts.last_line)
    m = ts.next_int("element count")
    conn = np.empty((m, 10), dtype=np.int64)
    regions = np.empty(m, dtype=np.int64)
    for e in range(m):
        eid = ts.next_int("element id")
        if eid != e:
            raise MeshParseError(f"element ids must be dense, expected {e} got {eid}", ts.last_line)
        for j in range(10):
            conn[e, j] = ts.next_int("node id")
        regions[e] = ts.next_int("region tag")

    facet_sets = {}
    node_sets = {}
    while ts.peek() is not None:
        kw = ts.next("section keyword")
        if kw == "facet_set":
            name = ts.next("facet set name")
            k = ts.next_int("facet count")
            rows = np.empty((k, 6), dtype=np.int64)
            for i in range(k):
                for j in range(6):
                    rows[i, j] = ts.next_int("facet node id")
            facet_sets[name] = rows
        elif kw == "node_set":
            name = ts.next("node set name")
            k = ts.next_int("node count")
            node_sets[name] = np.array(
                [ts.next_int("node id") for _ in range(k)], dtype=np.int64
            )
        else:
            raise MeshParseError(f"unknown section {kw!r}", ts.last_line)

    mesh = Mesh(
        coords=coords,
        elements=conn,
        region_tags=regions,
        facet_sets=facet_sets,
        node_sets=node_sets,
    )
    validate_mesh(mesh)
    return mesh
