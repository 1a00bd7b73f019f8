"""Conforming P1 triangulations of convex polygons with uniform refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshError
from .geometry import Polygon

MAX_ANGLE_CAP = math.radians(150.0)


@dataclass
class Mesh:
    nodes: np.ndarray  # (n, 2)
    triangles: np.ndarray  # (m, 3) int
    boundary_mask: np.ndarray  # (n,) bool
    h: float  # longest element edge

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_interior(self) -> int:
        return int(np.sum(~self.boundary_mask))


def _boundary_distance(points: np.ndarray, polygon: Polygon) -> np.ndarray:
    """Distance from each point to the polygon boundary (segments)."""
    v = polygon.vertices
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a  # (e, 2)
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ap = points[:, None, :] - a[None, :, :]  # (p, e, 2)
    t = np.clip(np.einsum("pej,ej->pe", ap, ab) / ab2[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - closest, axis=2)
    return d.min(axis=1)


def _boundary_points(polygon: Polygon, target_h: float) -> np.ndarray:
    pts = []
    v = polygon.vertices
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        n_seg = max(1, int(math.ceil(np.linalg.norm(b - a) / target_h)))
        for j in range(n_seg):
            pts.append(a + (b - a) * (j / n_seg))
    return np.array(pts)


def triangulate(polygon: Polygon, target_h: float) -> Mesh:
    """Delaunay mesh of a convex polygon at characteristic size target_h.

    Interior points are laid on a staggered grid, dropping points too close
    to the boundary so boundary slivers cannot form. Convexity guarantees
    the Delaunay triangulation covers the polygon exactly.
    """
    if not polygon.is_convex():
        raise MeshError("only convex polygons are supported")
    bpts = _boundary_points(polygon, target_h)
    v = polygon.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    nx = max(2, int(math.ceil((hi[0] - lo[0]) / target_h)))
    ny = max(2, int(math.ceil((hi[1] - lo[1]) / (target_h * math.sqrt(3) / 2))))
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    gx[1::2] += (xs[1] - xs[0]) / 2.0  # stagger alternate rows
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    inside = _points_inside(grid, polygon)
    grid = grid[inside]
    if len(grid):
        grid = grid[_boundary_distance(grid, polygon) > 0.5 * target_h]
    nodes = np.vstack([bpts, grid]) if len(grid) else bpts
    tri = Delaunay(nodes)
    triangles = tri.simplices.copy()
    nodes = tri.points.copy()

    areas = _tri_areas(nodes, triangles)
    scale2 = polygon.diameter**2
    keep = areas > 1e-13 * scale2
    triangles = triangles[keep]
    # enforce counterclockwise element orientation
    flip = _tri_signed_areas(nodes, triangles) < 0
    triangles[flip] = triangles[flip][:, ::-1]

    boundary_mask = _boundary_distance(nodes, polygon) < 1e-9 * polygon.diameter
    mesh = Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary_mask=boundary_mask,
        h=_max_edge(nodes, triangles),
    )
    _check_quality(mesh)
    return mesh


def _points_inside(points: np.ndarray, polygon: Polygon, tol: float = 0.0) -> np.ndarray:
    v = polygon.vertices
    a = v
    b = np.roll(v, -1, axis=0)
    ab = b - a
    ap = points[:, None, :] - a[None, :, :]
    cr = ab[None, :, 0] * ap[:, :, 1] - ab[None, :, 1] * ap[:, :, 0]
    return np.all(cr >= -tol, axis=1)


def _tri_signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _tri_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    return np.abs(_tri_signed_areas(nodes, triangles))


def _max_edge(nodes: np.ndarray, triangles: np.ndarray) -> float:
    p = nodes[triangles]
    e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
    return float(np.max(np.linalg.norm(e, axis=2)))


def _check_quality(mesh: Mesh) -> None:
    p = mesh.nodes[mesh.triangles]
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        w = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.einsum("ij,ij->i", u, w) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1)
        )
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        if np.any(ang > MAX_ANGLE_CAP):
            raise MeshError(
                f"{int(np.sum(ang > MAX_ANGLE_CAP))} elements exceed the "
                f"{math.degrees(MAX_ANGLE_CAP):.0f} degree angle cap"
            )


def refine_uniform(mesh: Mesh, polygon: Polygon) -> Mesh:
    """Quadrisect every triangle; boundary mask is recomputed geometrically."""
    nodes = mesh.nodes
    tris = mesh.triangles
    edge_mid: dict[tuple[int, int], int] = {}
    new_nodes = [nodes]
    next_idx = len(nodes)

    def midpoint(i, j):
        nonlocal next_idx
        key = (i, j) if i < j else (j, i)
        if key not in edge_mid:
            edge_mid[key] = next_idx
            new_nodes.append(((nodes[i] + nodes[j]) / 2.0)[None, :])
            next_idx += 1
        return edge_mid[key]

    new_tris = np.empty((4 * len(tris), 3), dtype=tris.dtype)
    for k, (a, b, c) in enumerate(tris):
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_tris[4 * k : 4 * k + 4] = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]

    all_nodes = np.vstack(new_nodes)
    boundary_mask = _boundary_distance(all_nodes, polygon) < 1e-9 * polygon.diameter
    return Mesh(
        nodes=all_nodes,
        triangles=new_tris,
        boundary_mask=boundary_mask,
        h=mesh.h / 2.0,
    )
