"""Simplicial meshes immersed in Euclidean ambient space.

Meshes carry global vertex coordinates, k-simplex cells and (k-1)-simplex
boundary facets.  Mean curvature is recovered at vertices by fitting a
quadratic graph over the tangent plane of the two-ring neighbourhood, which
works in any codimension; per-cell data (orthonormal tangent frames, linear
reconstruction of sampled scalar fields) is exact on each flat cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from ..errors import DegenerateGeometry, InsufficientStencil, InvalidArgument


@dataclass
class SimplicialMesh:
    """Vertex/cell/boundary arrays plus generator metadata.

    ``metadata`` records how the mesh was built (generator name, radius,
    center, in-plane axes, ...) so scalar-field factories can evaluate
    chart-like coordinates and exact boundary-vanishing factors.
    """

    vertices: np.ndarray          # (V, n)
    cells: np.ndarray             # (C, k+1) int
    boundary_facets: np.ndarray   # (B, k) int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.cells = np.asarray(self.cells, dtype=int)
        if self.boundary_facets is None or len(self.boundary_facets) == 0:
            self.boundary_facets = np.zeros((0, self.cells.shape[1] - 1), int)
        else:
            self.boundary_facets = np.asarray(self.boundary_facets, dtype=int)
        self._fit_cache = None

    @property
    def k(self) -> int:
        return self.cells.shape[1] - 1

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    # -- per-cell geometry ----------------------------------------------------

    def cell_corners(self, cid: int) -> np.ndarray:
        return self.vertices[self.cells[cid]]

    def cell_edges(self) -> np.ndarray:
        """(C, k, n) edge matrices relative to each cell's first vertex."""
        v = self.vertices[self.cells]
        return v[:, 1:, :] - v[:, :1, :]

    def cell_volumes(self) -> np.ndarray:
        e = self.cell_edges()
        gram = np.einsum("cin,cjn->cij", e, e)
        det = np.linalg.det(gram)
        if np.any(det <= 0):
            raise DegenerateGeometry("cell with nonpositive induced volume")
        return np.sqrt(det) / math.factorial(self.k)

    def cell_frames(self) -> np.ndarray:
        """(C, k, n) orthonormal tangent frames (flat cells, Euclidean metric)."""
        e = self.cell_edges()
        q, _ = np.linalg.qr(np.transpose(e, (0, 2, 1)))
        return np.transpose(q, (0, 2, 1))

    def reconstruct_gradients(self, vertex_values: np.ndarray) -> np.ndarray:
        """(C, n) in-plane gradients of the per-cell linear interpolant."""
        e = self.cell_edges()
        gram = np.einsum("cin,cjn->cij", e, e)
        dv = vertex_values[self.cells[:, 1:]] - vertex_values[self.cells[:, :1]]
        coef = np.linalg.solve(gram, dv[..., None])[..., 0]
        return np.einsum("ci,cin->cn", coef, e)

    # -- boundary ---------------------------------------------------------------

    def boundary_owners(self) -> np.ndarray:
        """Cell index owning each boundary facet."""
        facet_sets = [frozenset(f) for f in self.boundary_facets]
        lookup = {}
        for cid, cell in enumerate(self.cells):
            for sub in combinations(cell, self.k):
                lookup.setdefault(frozenset(sub), []).append(cid)
        owners = np.empty(len(facet_sets), dtype=int)
        for i, fs in enumerate(facet_sets):
            own = lookup.get(fs, [])
            if len(own) != 1:
                raise InvalidArgument(
                    f"boundary facet {sorted(fs)} owned by {len(own)} cells")
            owners[i] = own[0]
        return owners

    def boundary_conormals(self) -> np.ndarray:
        """(B, n) outward unit conormals in the owning cell's plane."""
        owners = self.boundary_owners()
        out = np.empty((len(owners), self.n))
        frames = self.cell_frames()
        for i, (facet, cid) in enumerate(zip(self.boundary_facets, owners)):
            cell = set(self.cells[cid])
            opposite = (cell - set(facet)).pop()
            fverts = self.vertices[facet]
            centroid = fverts.mean(axis=0)
            direction = centroid - self.vertices[opposite]
            # keep the in-plane component orthogonal to the facet
            frame = frames[cid]
            direction = frame.T @ (frame @ direction)
            for edge in fverts[1:] - fverts[0]:
                e = edge / np.linalg.norm(edge)
                direction = direction - np.dot(direction, e) * e
            norm = np.linalg.norm(direction)
            if norm == 0:
                raise DegenerateGeometry("degenerate boundary facet")
            out[i] = direction / norm
        return out

    # -- two-ring quadratic fit -------------------------------------------------

    def vertex_rings(self) -> list[set]:
        one = [set() for _ in range(len(self.vertices))]
        for cell in self.cells:
            for a in cell:
                one[a].update(int(b) for b in cell if b != a)
        two = []
        for v, ring in enumerate(one):
            acc = set(ring)
            for w in ring:
                acc.update(one[w])
            acc.discard(v)
            two.append(acc)
        return two

    def vertex_mean_curvature(self) -> np.ndarray:
        """(V, n) mean curvature vectors from local quadratic graph fits."""
        if self._fit_cache is not None:
            return self._fit_cache
        k, n = self.k, self.n
        if k == n:
            self._fit_cache = np.zeros_like(self.vertices)
            return self._fit_cache
        one_ring = [set() for _ in range(len(self.vertices))]
        for cell in self.cells:
            for a in cell:
                one_ring[a].update(int(b) for b in cell if b != a)
        rings = self.vertex_rings()
        nq = k * (k + 1) // 2
        ncols = 1 + k + nq
        out = np.zeros((len(self.vertices), n))
        for v, ring in enumerate(rings):
            ring = set(ring)
            grown = 0
            while len(ring) < ncols and grown < 3:
                # corner vertices of structured grids have short two-rings;
                # widen until the fit is determined
                extra = set()
                for w in ring:
                    extra.update(one_ring[w])
                extra.discard(v)
                if extra <= ring:
                    break
                ring |= extra
                grown += 1
            nbrs = np.fromiter(ring, int)
            if len(nbrs) < ncols:
                raise InsufficientStencil(
                    f"vertex {v} has {len(nbrs)} stencil neighbours, "
                    f"needs {ncols}")
            disp = self.vertices[nbrs] - self.vertices[v]
            # tangent estimate: principal directions of the displacement cloud
            _, _, vt = np.linalg.svd(disp, full_matrices=True)
            tan, nor = vt[:k], vt[k:]
            t = disp @ tan.T
            w = disp @ nor.T
            cols = [np.ones(len(nbrs))]
            cols.extend(t[:, i] for i in range(k))
            cols.extend(t[:, i] * t[:, j]
                        for i in range(k) for j in range(i, k))
            A = np.stack(cols, axis=1)
            coef, *_ = np.linalg.lstsq(A, w, rcond=None)
            grad = coef[1:1 + k]                      # (k, n-k)
            quad = np.zeros((n - k, k, k))
            pos = 1 + k
            for i in range(k):
                for j in range(i, k):
                    # x_i x_j column contributes to both symmetric slots
                    for m in range(n - k):
                        if i == j:
                            quad[m, i, i] = 2.0 * coef[pos, m]
                        else:
                            quad[m, i, j] = coef[pos, m]
                            quad[m, j, i] = coef[pos, m]
                    pos += 1
            # graph immersion t -> (t, f(t)): exact trace of the second
            # fundamental form of the fitted quadratic at the vertex
            g = np.eye(k) + grad @ grad.T
            ginv = np.linalg.inv(g)
            tangents = tan + grad @ nor               # (k, n)
            second = np.einsum("mij,mn->ijn", quad, nor)
            proj = second - np.einsum("ijn,lm,ln,mo->ijo",
                                      second, ginv, tangents, tangents)
            out[v] = np.einsum("ij,ijn->n", ginv, proj)
        self._fit_cache = out
        return out

    # -- refinement ---------------------------------------------------------------

    def refine(self) -> "SimplicialMesh":
        """Midpoint subdivision (k = 2); snaps to round metadata surfaces."""
        if self.k != 2:
            raise InvalidArgument("refine supports triangle meshes only")
        midpoint = {}
        new_vertices = list(self.vertices)

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in midpoint:
                p = 0.5 * (self.vertices[a] + self.vertices[b])
                midpoint[key] = len(new_vertices)
                new_vertices.append(p)
            return midpoint[key]

        cells = []
        for a, b, c in self.cells:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            cells.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        bfacets = []
        for a, b in self.boundary_facets:
            m = mid(a, b)
            bfacets.extend([[a, m], [m, b]])
        mesh = SimplicialMesh(np.array(new_vertices), np.array(cells),
                              np.array(bfacets) if bfacets else None,
                              metadata=dict(self.metadata))
        _snap_to_surface(mesh)
        return mesh


def _snap_to_surface(mesh: SimplicialMesh):
    meta = mesh.metadata
    if meta.get("generator") == "sphere":
        center = np.asarray(meta["center"], dtype=float)
        radius = meta["radius"]
        d = mesh.vertices - center
        mesh.vertices = center + radius * d / np.linalg.norm(d, axis=1)[:, None]
    elif meta.get("generator") == "disk" and len(mesh.boundary_facets):
        center = np.asarray(meta["center"], dtype=float)
        axes = np.asarray(meta["axes"], dtype=float)
        radius = meta["radius"]
        bverts = np.unique(mesh.boundary_facets)
        d = mesh.vertices[bverts] - center
        plane = d @ axes.T
        rho = np.linalg.norm(plane, axis=1)
        plane = plane * (radius / rho)[:, None]
        mesh.vertices[bverts] = center + plane @ axes
    elif meta.get("generator") == "graph":
        fn = meta["height_fn"]
        mesh.vertices[:, 2] = fn(mesh.vertices[:, 0], mesh.vertices[:, 1])


def detect_boundary(cells: np.ndarray) -> np.ndarray:
    """Facets appearing in exactly one cell."""
    k = cells.shape[1] - 1
    count = {}
    for cell in cells:
        for sub in combinations(sorted(cell), k):
            count[sub] = count.get(sub, 0) + 1
    facets = [list(f) for f, c in count.items() if c == 1]
    return np.array(facets, int) if facets else np.zeros((0, k), int)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def disk_mesh(radius: float = 1.0, rings: int = 8, center=(0.0, 0.0, 0.0),
              axes=None) -> SimplicialMesh:
    """Flat triangulated disk with concentric vertex rings.

    The disk center is a vertex; ring ``j`` holds ``6 j`` vertices at radius
    ``j * radius / rings``, so boundary vertices sit exactly on the rim
    circle.  ``axes`` gives the two in-plane unit vectors (default x, y).
    """
    if rings < 1:
        raise InvalidArgument("need at least one ring")
    center = np.asarray(center, dtype=float)
    if axes is None:
        axes = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    axes = np.asarray(axes, dtype=float)

    ring_ids = [[0]]
    plane_pts = [(0.0, 0.0)]
    for j in range(1, rings + 1):
        ids = []
        rr = radius * j / rings
        for i in range(6 * j):
            th = 2.0 * math.pi * i / (6 * j)
            ids.append(len(plane_pts))
            plane_pts.append((rr * math.cos(th), rr * math.sin(th)))
        ring_ids.append(ids)

    cells = []
    for j in range(1, rings + 1):
        inner, outer = ring_ids[j - 1], ring_ids[j]
        if j == 1:
            for i in range(6):
                cells.append([inner[0], outer[i], outer[(i + 1) % 6]])
            continue
        ni, no = len(inner), len(outer)
        ai = [2.0 * math.pi * i / ni for i in range(ni)]
        ao = [2.0 * math.pi * i / no for i in range(no)]
        i1 = i2 = 0
        # circular merge of the two rings by angle
        for _ in range(ni + no):
            next_i = ai[(i1 + 1) % ni] + (2 * math.pi if i1 + 1 >= ni else 0)
            next_o = ao[(i2 + 1) % no] + (2 * math.pi if i2 + 1 >= no else 0)
            if next_o <= next_i:
                cells.append([inner[i1 % ni], outer[i2 % no],
                              outer[(i2 + 1) % no]])
                i2 += 1
            else:
                cells.append([inner[i1 % ni], outer[i2 % no],
                              inner[(i1 + 1) % ni]])
                i1 += 1

    plane = np.array(plane_pts)
    verts = center + plane @ axes
    cells = np.array(cells, int)
    bfacets = detect_boundary(cells)
    through_pole = bool(np.linalg.norm(center) < 1e-14)
    meta = {"generator": "disk", "radius": radius, "center": center,
            "axes": axes, "through_pole": through_pole,
            "plane_origin": center}
    return SimplicialMesh(verts, cells, bfacets, metadata=meta)


def sphere_mesh(radius: float = 1.0, level: int = 3,
                center=(0.0, 0.0, 0.0)) -> SimplicialMesh:
    """Icosphere: subdivided icosahedron projected to the sphere."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    cells = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]], int)
    center = np.asarray(center, dtype=float)
    meta = {"generator": "sphere", "radius": radius, "center": center,
            "through_pole": False}
    mesh = SimplicialMesh(center + radius * verts, cells, None, metadata=meta)
    for _ in range(level):
        mesh = mesh.refine()
    return mesh


def graph_mesh(height_fn, half_width: float = 1.0, divisions: int = 8,
               center_xy=(0.0, 0.0)) -> SimplicialMesh:
    """Triangulated graph z = f(x, y) over a square grid."""
    m = divisions
    cx, cy = center_xy
    xs = np.linspace(cx - half_width, cx + half_width, m + 1)
    ys = np.linspace(cy - half_width, cy + half_width, m + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    zz = height_fn(xx, yy)
    verts = np.stack([xx.ravel(), yy.ravel(), np.asarray(zz).ravel()], axis=1)

    def vid(i, j):
        return i * (m + 1) + j

    cells = []
    for i in range(m):
        for j in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            cells.extend([[a, b, c], [a, c, d]])
    cells = np.array(cells, int)
    meta = {"generator": "graph", "height_fn": height_fn,
            "half_width": half_width, "center_xy": center_xy,
            "through_pole": bool(abs(cx) < 1e-14 and abs(cy) < 1e-14
                                 and abs(float(height_fn(0.0, 0.0))) < 1e-14)}
    return SimplicialMesh(verts, cells, detect_boundary(cells), metadata=meta)


# ---------------------------------------------------------------------------
# Text format: counts, coordinates, cells, boundary facets
# ---------------------------------------------------------------------------

def write_mesh(mesh: SimplicialMesh, path) -> None:
    lines = [f"{len(mesh.vertices)} {len(mesh.cells)} {len(mesh.boundary_facets)}"]
    for v in mesh.vertices:
        lines.append(" ".join(repr(float(x)) for x in v))
    for c in mesh.cells:
        lines.append(" ".join(str(int(i)) for i in c))
    for f in mesh.boundary_facets:
        lines.append(" ".join(str(int(i)) for i in f))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> SimplicialMesh:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    nv, nc, nb = (int(x) for x in rows[0])
    verts = np.array([[float(x) for x in row] for row in rows[1:1 + nv]])
    cells = np.array([[int(x) for x in row] for row in rows[1 + nv:1 + nv + nc]])
    bf = rows[1 + nv + nc:1 + nv + nc + nb]
    bfacets = np.array([[int(x) for x in row] for row in bf]) if bf else None
    return SimplicialMesh(verts, cells, bfacets,
                          metadata={"generator": "file", "path": str(path)})
