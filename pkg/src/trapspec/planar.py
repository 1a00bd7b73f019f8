"""Small planar geometry kit: isometries, hulls, separation and distance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Isometry:
    """Affine isometry p -> A p + t with A orthogonal."""

    a: np.ndarray  # (2, 2)
    t: np.ndarray  # (2,)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def reflection(cls, p: np.ndarray, q: np.ndarray) -> "Isometry":
        """Reflection across the line through p and q."""
        u = q - p
        u = u / np.linalg.norm(u)
        a = np.array(
            [
                [u[0] * u[0] - u[1] * u[1], 2 * u[0] * u[1]],
                [2 * u[0] * u[1], u[1] * u[1] - u[0] * u[0]],
            ]
        )
        return cls(a, p - a @ p)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.a.T + self.t

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self.compose(other))(p) = self(other(p))."""
        return Isometry(self.a @ other.a, self.a @ other.t + self.t)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.a))

    @property
    def parity(self) -> int:
        return 1 if self.det > 0 else -1


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counterclockwise; handles degenerate inputs."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross2(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return np.array(hull) if len(hull) >= 2 else pts[:1]


def hulls_disjoint(pts_a: np.ndarray, pts_b: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the convex hulls of two point sets do not overlap.

    Separating-axis test over the edge normals of both hulls plus the
    point-difference axes of degenerate (0/1-d) hulls.
    """
    ha, hb = convex_hull(pts_a), convex_hull(pts_b)
    axes = []
    for h in (ha, hb):
        if len(h) >= 2:
            e = np.roll(h, -1, axis=0) - h
            axes.append(np.column_stack([-e[:, 1], e[:, 0]]))
    if len(ha) == 1 and len(hb) == 1:
        return bool(np.linalg.norm(ha[0] - hb[0]) > tol)
    if len(ha) == 1 or len(hb) == 1:
        # point vs segment/polygon also needs the edge directions as axes
        h = hb if len(ha) == 1 else ha
        e = np.roll(h, -1, axis=0) - h
        axes.append(e)
    for ax_block in axes:
        for ax in ax_block:
            n = np.linalg.norm(ax)
            if n == 0:
                continue
            ax = ax / n
            pa = pts_a @ ax
            pb = pts_b @ ax
            if pa.min() > pb.max() + tol or pb.min() > pa.max() + tol:
                return True
    return False


def _hull_pts(points):
    """Monotone-chain hull over (x, y) tuples; collinear points are dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while (
                len(out) >= 2
                and (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])
                <= 0
            ):
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return lower[:-1] + upper[:-1]


def hulls_separated(ha, hb, tol: float = 1e-12) -> bool:
    """Separating-axis test for two convex hull vertex lists of (x, y) tuples.

    Degenerate (point/segment) hulls contribute their own direction axes so
    collinear configurations separate correctly.
    """
    if len(ha) == 1 and len(hb) == 1:
        return math.hypot(ha[0][0] - hb[0][0], ha[0][1] - hb[0][1]) > tol
    axes = []
    for h in (ha, hb):
        m = len(h)
        for i in range(m if m > 2 else m - 1):
            ex = h[(i + 1) % m][0] - h[i][0]
            ey = h[(i + 1) % m][1] - h[i][1]
            axes.append((-ey, ex))
            if m == 2:
                axes.append((ex, ey))  # collinear segments need the direction axis
    for ax, ay in axes:
        n = math.hypot(ax, ay)
        if n == 0.0:
            continue
        ax, ay = ax / n, ay / n
        amin = amax = ha[0][0] * ax + ha[0][1] * ay
        for px, py in ha:
            v = px * ax + py * ay
            if v < amin:
                amin = v
            elif v > amax:
                amax = v
        bmin = bmax = hb[0][0] * ax + hb[0][1] * ay
        for px, py in hb:
            v = px * ax + py * ay
            if v < bmin:
                bmin = v
            elif v > bmax:
                bmax = v
        if amin > bmax + tol or bmin > amax + tol:
            return True
    return False


def hulls_disjoint_pts(pa, pb, tol: float = 1e-12) -> bool:
    """Hull separation test over raw lists of (x, y) tuples."""
    return hulls_separated(_hull_pts(pa), _hull_pts(pb), tol)


def seg_dist_pts(a0x, a0y, a1x, a1y, b0x, b0y, b1x, b1y) -> float:
    """Scalar segment-to-segment distance (pure Python, for tight loops)."""

    def pt_seg(px, py, qx, qy, rx, ry):
        dx, dy = rx - qx, ry - qy
        dd = dx * dx + dy * dy
        t = ((px - qx) * dx + (py - qy) * dy) / dd if dd > 1e-30 else 0.0
        t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
        return math.hypot(px - qx - t * dx, py - qy - t * dy)

    d1x, d1y = a1x - a0x, a1y - a0y
    d2x, d2y = b1x - b0x, b1y - b0y
    denom = d1x * d2y - d1y * d2x
    if abs(denom) > 1e-30:
        wx, wy = b0x - a0x, b0y - a0y
        s = (wx * d2y - wy * d2x) / denom
        t = (wx * d1y - wy * d1x) / denom
        if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
            return 0.0
    return min(
        pt_seg(a0x, a0y, b0x, b0y, b1x, b1y),
        pt_seg(a1x, a1y, b0x, b0y, b1x, b1y),
        pt_seg(b0x, b0y, a0x, a0y, a1x, a1y),
        pt_seg(b1x, b1y, a0x, a0y, a1x, a1y),
    )


def segment_distance(a0, a1, b0, b1) -> float:
    """Euclidean distance between two closed segments."""
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = d1 @ d1
    e = d2 @ d2
    f = d2 @ r
    if a <= 1e-30 and e <= 1e-30:
        return float(np.linalg.norm(r))
    if a <= 1e-30:
        s, t = 0.0, np.clip(f / e, 0.0, 1.0)
    else:
        c = d1 @ r
        if e <= 1e-30:
            t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
        else:
            b = d1 @ d2
            denom = a * e - b * b
            s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-30 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
            elif t > 1.0:
                t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    closest1 = a0 + s * d1
    closest2 = b0 + t * d2
    return float(np.linalg.norm(closest1 - closest2))


def point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = ab @ ab
    t = np.clip(((p - a) @ ab) / denom, 0.0, 1.0) if denom > 1e-30 else 0.0
    return float(np.linalg.norm(p - (a + t * ab)))


def segments_cross(p0, p1, q0, q1, tol: float = 0.0):
    """Intersection parameter pair (s, t) of open segments, or None.

    s parametrizes p0->p1, t parametrizes q0->q1; both must lie in
    (tol, 1 - tol) for a crossing.
    """
    d = p1 - p0
    e = q1 - q0
    denom = cross2(d, e)
    if abs(denom) < 1e-30:
        return None
    w = q0 - p0
    s = cross2(w, e) / denom
    t = cross2(w, d) / denom
    if tol < s < 1 - tol and tol < t < 1 - tol:
        return (float(s), float(t))
    return None
