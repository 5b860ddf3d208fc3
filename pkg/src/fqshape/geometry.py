"""Vectorized planar primitives shared by the domain model and the distance field."""
from __future__ import annotations

import numpy as np


def loop_edges(loop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start and end points of the closing edges of a vertex loop."""
    return loop, np.roll(loop, -1, axis=0)


def polyline_edges(line: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return line[:-1], line[1:]


def signed_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def edge_lengths(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])


def point_segment_distance(px, py, ax, ay, bx, by):
    """Broadcasting distance from points (px, py) to segments [a, b]."""
    dx = bx - ax
    dy = by - ay
    len2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        s = ((px - ax) * dx + (py - ay) * dy) / len2
    s = np.where(len2 > 0, np.clip(s, 0.0, 1.0), 0.0)
    return np.hypot(px - (ax + s * dx), py - (ay + s * dy))


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_intersect(a0, a1, b0, b1, eps: float = 0.0) -> np.ndarray:
    """Closed-segment intersection test, broadcasting over leading axes.

    Each argument is an array ``(..., 2)``. Touching and collinear overlap count
    as intersecting. ``eps`` widens the orientation tests for near-degenerate
    configurations.
    """
    o1 = _orient(a0[..., 0], a0[..., 1], a1[..., 0], a1[..., 1], b0[..., 0], b0[..., 1])
    o2 = _orient(a0[..., 0], a0[..., 1], a1[..., 0], a1[..., 1], b1[..., 0], b1[..., 1])
    o3 = _orient(b0[..., 0], b0[..., 1], b1[..., 0], b1[..., 1], a0[..., 0], a0[..., 1])
    o4 = _orient(b0[..., 0], b0[..., 1], b1[..., 0], b1[..., 1], a1[..., 0], a1[..., 1])
    proper = (o1 * o2 < -eps) & (o3 * o4 < -eps)

    def on_seg(p0, p1, q, o):
        return (
            (np.abs(o) <= eps)
            & (np.minimum(p0[..., 0], p1[..., 0]) - eps <= q[..., 0])
            & (q[..., 0] <= np.maximum(p0[..., 0], p1[..., 0]) + eps)
            & (np.minimum(p0[..., 1], p1[..., 1]) - eps <= q[..., 1])
            & (q[..., 1] <= np.maximum(p0[..., 1], p1[..., 1]) + eps)
        )

    touch = on_seg(a0, a1, b0, o1) | on_seg(a0, a1, b1, o2) | on_seg(b0, b1, a0, o3) | on_seg(b0, b1, a1, o4)
    return proper | touch


def first_self_intersection(loop: np.ndarray, eps: float = 0.0) -> tuple[int, int] | None:
    """Return a pair of non-adjacent intersecting edge indices of a closed loop, if any."""
    a, b = loop_edges(loop)
    n = len(a)
    if n < 3:
        return (0, 0)
    chunk = max(1, 2_000_000 // n)
    idx = np.arange(n)
    for start in range(0, n, chunk):
        i = idx[start:start + chunk, None]
        hit = segments_intersect(a[i[:, 0]][:, None, :], b[i[:, 0]][:, None, :], a[None, :, :], b[None, :, :], eps)
        j = idx[None, :]
        adjacent = (j == i) | (j == (i + 1) % n) | (j == (i - 1) % n)
        hit &= ~adjacent & (j > i)
        if hit.any():
            ii, jj = np.argwhere(hit)[0]
            return int(i[ii, 0]), int(jj)
    return None


def cross_intersections(a0, a1, b0, b1, eps: float = 0.0) -> np.ndarray:
    """All-pairs closed intersection matrix between two edge sets."""
    return segments_intersect(a0[:, None, :], a1[:, None, :], b0[None, :, :], b1[None, :, :], eps)


def point_in_loop(px: np.ndarray, py: np.ndarray, loop: np.ndarray) -> np.ndarray:
    """Even-odd ray casting for a modest number of points (no on-edge handling)."""
    inside = np.zeros(np.shape(px), dtype=bool)
    a, b = loop_edges(loop)
    for (x1, y1), (x2, y2) in zip(a, b):
        cond = (y1 > py) != (y2 > py)
        with np.errstate(invalid="ignore", divide="ignore"):
            xc = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= cond & (px < xc)
    return inside


def scanline_parity(loops: list[np.ndarray], xs: np.ndarray, ys: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Even-odd classification of the lattice ``xs x ys`` against a set of loops.

    Returns ``(inside, on_edge)`` boolean arrays of shape ``(len(ys), len(xs))``.
    Work is proportional to rows x edges instead of nodes x edges.
    """
    ny, nx = len(ys), len(xs)
    x0, hx = xs[0], (xs[-1] - xs[0]) / max(nx - 1, 1)
    y0, hy = ys[0], (ys[-1] - ys[0]) / max(ny - 1, 1)
    starts = np.concatenate([loop for loop in loops])
    ends = np.concatenate([np.roll(loop, -1, axis=0) for loop in loops])
    ya, yb = starts[:, 1], ends[:, 1]
    lo, hi = np.minimum(ya, yb), np.maximum(ya, yb)
    # candidate rows lo <= y_j < hi, widened by one; the half-open test below is exact
    j_lo = np.floor((lo - y0) / hy).astype(np.int64) - 1
    j_hi = np.ceil((hi - y0) / hy).astype(np.int64) + 1
    j_lo = np.clip(j_lo, 0, ny)
    j_hi = np.clip(j_hi, -1, ny - 1)
    counts = np.maximum(j_hi - j_lo + 1, 0)
    edge_id = np.repeat(np.arange(len(starts)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    rows = j_lo[edge_id] + offs
    py = ys[rows]
    keep = (ya[edge_id] > py) != (yb[edge_id] > py)
    edge_id, rows, py = edge_id[keep], rows[keep], py[keep]
    xa, xb = starts[edge_id, 0], ends[edge_id, 0]
    y1, y2 = ya[edge_id], yb[edge_id]
    xc = xa + (py - y1) * (xb - xa) / (y2 - y1)

    order = np.lexsort((xc, rows))
    rows, xc = rows[order], xc[order]
    row_start = np.searchsorted(rows, np.arange(ny), side="left")
    row_end = np.searchsorted(rows, np.arange(ny), side="right")

    inside = np.zeros((ny, nx), dtype=bool)
    on_edge = np.zeros((ny, nx), dtype=bool)
    for j in range(ny):
        s, e = row_start[j], row_end[j]
        if e == s:
            continue
        xr = xc[s:e]
        k = np.searchsorted(xr, xs, side="left")
        inside[j] = (k % 2) == 1
        # nearest crossing either side of each node
        left = np.abs(xs - xr[np.clip(k - 1, 0, len(xr) - 1)])
        right = np.abs(xs - xr[np.clip(k, 0, len(xr) - 1)])
        on_edge[j] = np.minimum(left, right) <= tol

    # horizontal edges lying on a row, and vertices landing on nodes
    horiz = np.abs(ya - yb) <= tol
    for s_pt, e_pt in zip(starts[horiz], ends[horiz]):
        j = int(round((s_pt[1] - y0) / hy))
        if 0 <= j < ny and abs(y0 + j * hy - s_pt[1]) <= tol:
            xl, xr_ = min(s_pt[0], e_pt[0]), max(s_pt[0], e_pt[0])
            on_edge[j] |= (xs >= xl - tol) & (xs <= xr_ + tol)
    vi = np.rint((starts[:, 0] - x0) / hx).astype(np.int64)
    vj = np.rint((starts[:, 1] - y0) / hy).astype(np.int64)
    ok = (vi >= 0) & (vi < nx) & (vj >= 0) & (vj < ny)
    ok &= np.abs(x0 + vi * hx - starts[:, 0]) <= tol
    ok &= np.abs(y0 + vj * hy - starts[:, 1]) <= tol
    on_edge[vj[ok], vi[ok]] = True
    return inside, on_edge


def segment_distance_field(xs: np.ndarray, ys: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray,
                           tile: int = 32) -> np.ndarray:
    """Exact Euclidean distance from every lattice node to a union of segments.

    Nodes are processed in square tiles; for each tile only the segments whose
    distance to the tile box can beat the best upper bound are examined.
    """
    ny, nx = len(ys), len(xs)
    out = np.empty((ny, nx))
    ax, ay, bx, by = seg_a[:, 0], seg_a[:, 1], seg_b[:, 0], seg_b[:, 1]
    sx_lo, sx_hi = np.minimum(ax, bx), np.maximum(ax, bx)
    sy_lo, sy_hi = np.minimum(ay, by), np.maximum(ay, by)
    for j0 in range(0, ny, tile):
        ty = ys[j0:j0 + tile]
        for i0 in range(0, nx, tile):
            tx = xs[i0:i0 + tile]
            bx_lo, bx_hi, by_lo, by_hi = tx[0], tx[-1], ty[0], ty[-1]
            # box-to-segment-bbox gap is a lower bound on node-to-segment distance
            gx = np.maximum(0.0, np.maximum(sx_lo - bx_hi, bx_lo - sx_hi))
            gy = np.maximum(0.0, np.maximum(sy_lo - by_hi, by_lo - sy_hi))
            lower = np.hypot(gx, gy)
            cx, cy = 0.5 * (bx_lo + bx_hi), 0.5 * (by_lo + by_hi)
            half_diag = 0.5 * np.hypot(bx_hi - bx_lo, by_hi - by_lo)
            center_d = point_segment_distance(cx, cy, ax, ay, bx, by)
            upper = center_d.min() + half_diag
            cand = np.nonzero(lower <= upper)[0]
            X, Y = np.meshgrid(tx, ty)
            d = point_segment_distance(X[..., None], Y[..., None], ax[cand], ay[cand], bx[cand], by[cand])
            out[j0:j0 + tile, i0:i0 + tile] = d.min(axis=-1)
    return out
