"""Polygonal planar domains with holes and zero-width slits.

A :class:`PlanarDomain` is the exact geometry; :func:`rasterize` turns it into
a :class:`RasterMask` on the lattice ``h * Z^2`` (all masks built with the same
``h`` share nodes, which the co-Hausdorff distance relies on).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import geometry as geo


class GeometryError(ValueError):
    """Invalid domain geometry; ``index`` names the offending loop or slit."""

    def __init__(self, message: str, kind: str = "", index: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.index = index


class ResolutionError(ValueError):
    pass


def _as_points(obj, what: str, index: int, min_len: int) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < min_len:
        raise GeometryError(f"{what} {index}: expected at least {min_len} [x, y] points", what, index)
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"{what} {index}: non-finite coordinate", what, index)
    # a repeated closing vertex is tolerated
    if what != "slit" and len(arr) > min_len and np.allclose(arr[0], arr[-1]):
        arr = arr[:-1]
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PlanarDomain:
    """Open set bounded by simple polygons, minus zero-width polyline slits.

    Outer loops are stored counterclockwise and holes clockwise whatever the
    input orientation. Construction validates the geometry and raises
    :class:`GeometryError` naming the offending loop.
    """

    outer_loops: tuple[np.ndarray, ...]
    hole_loops: tuple[np.ndarray, ...] = ()
    slits: tuple[np.ndarray, ...] = ()
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        outer = tuple(_orient(_as_points(l, "outer", i, 3), ccw=True) for i, l in enumerate(self.outer_loops))
        holes = tuple(_orient(_as_points(l, "hole", i, 3), ccw=False) for i, l in enumerate(self.hole_loops))
        slits = tuple(_as_points(s, "slit", i, 2) for i, s in enumerate(self.slits))
        if not outer:
            raise GeometryError("domain needs at least one outer loop", "outer", None)
        object.__setattr__(self, "outer_loops", outer)
        object.__setattr__(self, "hole_loops", holes)
        object.__setattr__(self, "slits", slits)
        if self.validate:
            _validate(self)

    # -- derived geometry -------------------------------------------------
    @property
    def loops(self) -> tuple[np.ndarray, ...]:
        return self.outer_loops + self.hole_loops

    @property
    def hole_count(self) -> int:
        return len(self.hole_loops)

    def bbox(self) -> tuple[float, float, float, float]:
        pts = np.concatenate(self.outer_loops)
        return float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())

    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Start/end arrays of every loop edge and slit segment."""
        a = [l for l in self.loops] + [s[:-1] for s in self.slits]
        b = [np.roll(l, -1, axis=0) for l in self.loops] + [s[1:] for s in self.slits]
        return np.concatenate(a), np.concatenate(b)

    def scaled(self, t: float) -> "PlanarDomain":
        return PlanarDomain(
            tuple(l * t for l in self.outer_loops),
            tuple(l * t for l in self.hole_loops),
            tuple(s * t for s in self.slits),
            validate=False,
        )

    def translated(self, dx: float, dy: float) -> "PlanarDomain":
        v = np.array([dx, dy])
        return PlanarDomain(
            tuple(l + v for l in self.outer_loops),
            tuple(l + v for l in self.hole_loops),
            tuple(s + v for s in self.slits),
            validate=False,
        )

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        def pts(arrs):
            return [[[float(x), float(y)] for x, y in a] for a in arrs]

        return {"outer": pts(self.outer_loops), "holes": pts(self.hole_loops), "slits": pts(self.slits)}

    @classmethod
    def from_json(cls, data: dict) -> "PlanarDomain":
        from .schema import validate_domain_json

        validate_domain_json(data)
        return cls(tuple(data["outer"]), tuple(data.get("holes", [])), tuple(data.get("slits", [])))

    @classmethod
    def load(cls, path: str | Path) -> "PlanarDomain":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _orient(loop: np.ndarray, ccw: bool) -> np.ndarray:
    if (geo.signed_area(loop) > 0) != ccw:
        loop = loop[::-1].copy()
        loop.setflags(write=False)
    return loop


def _validate(d: PlanarDomain) -> None:
    scale = max(d.diameter(), 1e-300)
    eps = 1e-12 * scale
    for kind, loops in (("outer", d.outer_loops), ("hole", d.hole_loops)):
        for i, loop in enumerate(loops):
            if abs(geo.signed_area(loop)) <= eps * scale:
                raise GeometryError(f"{kind} loop {i} has zero area", kind, i)
            hit = geo.first_self_intersection(loop, eps * scale)
            if hit is not None:
                raise GeometryError(f"{kind} loop {i} self-intersects (edges {hit[0]} and {hit[1]})", kind, i)

    tagged = [("outer", i, l) for i, l in enumerate(d.outer_loops)] + [("hole", i, l) for i, l in enumerate(d.hole_loops)]
    for p in range(len(tagged)):
        for q in range(p + 1, len(tagged)):
            ka, ia, la = tagged[p]
            kb, ib, lb = tagged[q]
            a0, a1 = geo.loop_edges(la)
            b0, b1 = geo.loop_edges(lb)
            if geo.cross_intersections(a0, a1, b0, b1, eps * scale).any():
                raise GeometryError(f"{kb} loop {ib} intersects {ka} loop {ia}", kb, ib)

    def contained(pt, loop):
        return bool(geo.point_in_loop(np.array(pt[0]), np.array(pt[1]), loop))

    for i, hole in enumerate(d.hole_loops):
        owners = [j for j, o in enumerate(d.outer_loops) if contained(hole[0], o)]
        nested = [j for j, o in enumerate(d.hole_loops) if j != i and contained(hole[0], o)]
        if len(owners) != 1 + len(nested) or nested:
            raise GeometryError(f"hole loop {i} is not strictly inside exactly one outer loop", "hole", i)
    for i, outer in enumerate(d.outer_loops):
        enclosing = sum(contained(outer[0], o) for j, o in enumerate(d.outer_loops) if j != i)
        in_holes = sum(contained(outer[0], h) for h in d.hole_loops)
        if enclosing != in_holes:
            raise GeometryError(f"outer loop {i} overlaps another outer loop", "outer", i)

    all_a = np.concatenate([l for l in d.loops])
    all_b = np.concatenate([np.roll(l, -1, axis=0) for l in d.loops])
    for i, s in enumerate(d.slits):
        if np.any(geo.edge_lengths(s[:-1], s[1:]) <= eps):
            raise GeometryError(f"slit {i} has a zero-length segment", "slit", i)
        s0, s1 = geo.polyline_edges(s)
        hits = geo.cross_intersections(s0, s1, all_a, all_b, eps * scale)
        for si, _ in np.argwhere(hits):
            ends = []
            if si == 0:
                ends.append(s[0])
            if si == len(s0) - 1:
                ends.append(s[-1])
            touching = any(
                geo.point_segment_distance(e[0], e[1], all_a[:, 0], all_a[:, 1], all_b[:, 0], all_b[:, 1]).min() <= 1e-9 * scale
                for e in ends
            )
            if not touching:
                raise GeometryError(f"slit {i} crosses a loop away from its endpoints", "slit", i)
        mids = 0.5 * (s[:-1] + s[1:])
        if not np.all(_region_contains(d, mids[:, 0], mids[:, 1])):
            raise GeometryError(f"slit {i} leaves the domain", "slit", i)


def _region_contains(d: PlanarDomain, px, py) -> np.ndarray:
    """Even-odd membership in the region bounded by all loops (slits ignored)."""
    parity = np.zeros(np.shape(px), dtype=bool)
    for loop in d.loops:
        parity ^= geo.point_in_loop(px, py, loop)
    return parity


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class MeasureReport:
    area: float
    perimeter: float
    boundary_h1: float
    slit_length: float
    pk_lower: float
    pk_upper: float

    def scaled(self, t: float) -> "MeasureReport":
        return MeasureReport(self.area * t * t, *(v * t for v in (self.perimeter, self.boundary_h1, self.slit_length,
                                                                    self.pk_lower, self.pk_upper)))


def measure(domain: PlanarDomain) -> MeasureReport:
    """Area, perimeter, H^1 of the boundary and the relaxed-perimeter bracket.

    Slits carry no area and no distributional perimeter but count once in
    H^1; the relaxed perimeter is only known to lie in
    ``[H^1, P + 2 * slit_length]``.
    """
    area = sum(geo.signed_area(l) for l in domain.loops)
    perimeter = float(sum(geo.edge_lengths(*geo.loop_edges(l)).sum() for l in domain.loops))
    slit = float(sum(geo.edge_lengths(*geo.polyline_edges(s)).sum() for s in domain.slits))
    h1 = perimeter + slit
    return MeasureReport(float(area), perimeter, h1, slit, h1, perimeter + 2.0 * slit)


def clearance(domain: PlanarDomain) -> float:
    """Smallest gap between distinct loops, and between slits and everything else.

    Slit gaps are measured from slit vertices that do not rest on a loop or
    another slit; the wedge where a slit meets a loop is an intended junction,
    not a gap. Returns ``inf`` for a single loop without slits.
    """
    best = math.inf
    loops = domain.loops
    for p in range(len(loops)):
        for q in range(len(loops)):
            if p == q:
                continue
            a0, a1 = geo.loop_edges(loops[q])
            d = geo.point_segment_distance(loops[p][:, 0:1], loops[p][:, 1:2], a0[:, 0], a0[:, 1], a1[:, 0], a1[:, 1])
            best = min(best, float(d.min()))
    if not domain.slits:
        return best
    tol = 1e-9 * domain.diameter()
    pieces = [geo.loop_edges(l) for l in loops] + [geo.polyline_edges(s) for s in domain.slits]
    owner = np.concatenate([np.full(len(a), -1) for a, _ in pieces[:len(loops)]]
                           + [np.full(len(s) - 1, i) for i, s in enumerate(domain.slits)])
    oa = np.concatenate([a for a, _ in pieces])
    ob = np.concatenate([b for _, b in pieces])
    for i, s in enumerate(domain.slits):
        other = owner != i
        d = geo.point_segment_distance(s[:, 0:1], s[:, 1:2], oa[other, 0], oa[other, 1], ob[other, 0], ob[other, 1])
        d = d.min(axis=1)
        free = d[d > tol]
        if len(free):
            best = min(best, float(free.min()))
    return best


# ---------------------------------------------------------------------------
# rasterization


@dataclass(frozen=True, eq=False)
class RasterMask:
    """Nodes of ``h * Z^2`` inside a domain, with slit-severed adjacencies.

    ``inside[j, i]`` refers to the point ``origin + h * (i, j)``.
    ``block_x[j, i]`` severs ``(j, i)-(j, i+1)`` and ``block_y[j, i]`` severs
    ``(j, i)-(j+1, i)``. ``lattice_offset`` is the global lattice index of
    node ``(0, 0)``.
    """

    h: float
    lattice_offset: tuple[int, int]
    inside: np.ndarray
    block_x: np.ndarray
    block_y: np.ndarray
    domain: PlanarDomain | None = None
    level: float = 0.0

    @property
    def origin(self) -> tuple[float, float]:
        return self.lattice_offset[0] * self.h, self.lattice_offset[1] * self.h

    @property
    def width(self) -> int:
        return self.inside.shape[1]

    @property
    def height(self) -> int:
        return self.inside.shape[0]

    @property
    def xs(self) -> np.ndarray:
        return (self.lattice_offset[0] + np.arange(self.width)) * self.h

    @property
    def ys(self) -> np.ndarray:
        return (self.lattice_offset[1] + np.arange(self.height)) * self.h

    @property
    def n_inside(self) -> int:
        return int(self.inside.sum())

    @property
    def counted_area(self) -> float:
        return self.n_inside * self.h * self.h

    @property
    def n_blocked(self) -> int:
        return int(self.block_x.sum() + self.block_y.sum())

    @property
    def slits(self) -> tuple[np.ndarray, ...]:
        return self.domain.slits if self.domain is not None else ()

    def blocked_edges(self) -> set[tuple[tuple[int, int], tuple[int, int]]]:
        """Severed adjacencies as pairs of global lattice indices ``(i, j)``."""
        ox, oy = self.lattice_offset
        out = set()
        for j, i in np.argwhere(self.block_x):
            out.add(((ox + i, oy + j), (ox + i + 1, oy + j)))
        for j, i in np.argwhere(self.block_y):
            out.add(((ox + i, oy + j), (ox + i, oy + j + 1)))
        return out

    def with_inside(self, inside: np.ndarray, level: float) -> "RasterMask":
        inside = inside.copy()
        inside.setflags(write=False)
        return RasterMask(self.h, self.lattice_offset, inside, self.block_x, self.block_y, None, level)


def rasterize(domain: PlanarDomain, h: float, margin: float | None = None) -> RasterMask:
    """Classify lattice nodes of spacing ``h`` against ``domain``.

    Nodes on a loop edge or on a slit are outside (open-set semantics). An
    adjacency between two inside nodes is severed when its segment meets a
    slit. ``margin`` (length) pads the frame; the default leaves room for
    small outer tubes.
    """
    h = float(h)
    if not h > 0 or not math.isfinite(h):
        raise ResolutionError(f"grid spacing must be positive, got {h}")
    x0, y0, x1, y1 = domain.bbox()
    extent = min(x1 - x0, y1 - y0)
    if h > extent / 4:
        raise ResolutionError(f"resolution too coarse: h={h:g} exceeds a quarter of the smallest extent {extent:g}")
    gap = clearance(domain)
    if h >= gap:
        raise ResolutionError(f"resolution too coarse: h={h:g} does not resolve the feature clearance {gap:g}")
    if margin is None:
        margin = max(4 * h, 0.1 * extent)
    pad = int(math.ceil(margin / h)) + 1
    i0 = int(math.floor(x0 / h)) - pad
    i1 = int(math.ceil(x1 / h)) + pad
    j0 = int(math.floor(y0 / h)) - pad
    j1 = int(math.ceil(y1 / h)) + pad
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(j0, j1 + 1) * h
    tol = 1e-9 * h
    inside, on_edge = geo.scanline_parity(list(domain.loops), xs, ys, tol)
    inside &= ~on_edge

    block_x = np.zeros((len(ys), len(xs) - 1), dtype=bool)
    block_y = np.zeros((len(ys) - 1, len(xs)), dtype=bool)
    for s in domain.slits:
        for (ax, ay), (bx, by) in zip(s[:-1], s[1:]):
            ia = max(int(math.floor((min(ax, bx) - xs[0]) / h)) - 1, 0)
            ib = min(int(math.ceil((max(ax, bx) - xs[0]) / h)) + 2, len(xs))
            ja = max(int(math.floor((min(ay, by) - ys[0]) / h)) - 1, 0)
            jb = min(int(math.ceil((max(ay, by) - ys[0]) / h)) + 2, len(ys))
            X, Y = np.meshgrid(xs[ia:ib], ys[ja:jb])
            on_slit = geo.point_segment_distance(X, Y, ax, ay, bx, by) <= tol
            inside[ja:jb, ia:ib] &= ~on_slit
            a = np.array([ax, ay])
            b = np.array([bx, by])
            # horizontal adjacencies in the window
            p = np.stack([X[:, :-1], Y[:, :-1]], axis=-1)
            q = np.stack([X[:, 1:], Y[:, 1:]], axis=-1)
            block_x[ja:jb, ia:ib - 1] |= geo.segments_intersect(p, q, a, b, tol * h)
            p = np.stack([X[:-1, :], Y[:-1, :]], axis=-1)
            q = np.stack([X[1:, :], Y[1:, :]], axis=-1)
            block_y[ja:jb - 1, ia:ib] |= geo.segments_intersect(p, q, a, b, tol * h)
    block_x &= inside[:, :-1] & inside[:, 1:]
    block_y &= inside[:-1, :] & inside[1:, :]
    if not inside.any():
        raise ResolutionError(f"resolution too coarse: no lattice node of spacing {h:g} lies inside the domain")
    for arr in (inside, block_x, block_y):
        arr.setflags(write=False)
    return RasterMask(h, (i0, j0), inside, block_x, block_y, domain)


# ---------------------------------------------------------------------------
# topology


@dataclass(frozen=True)
class TopologyReport:
    n_components: int
    n_complement_bounded: int
    n_boundary_components: int


def _inside_components(mask: RasterMask) -> tuple[int, np.ndarray]:
    if mask.n_blocked == 0:
        labels, n = ndimage.label(mask.inside)
        return n, labels
    ny, nx = mask.inside.shape
    ids = np.arange(ny * nx).reshape(ny, nx)
    ex = mask.inside[:, :-1] & mask.inside[:, 1:] & ~mask.block_x
    ey = mask.inside[:-1, :] & mask.inside[1:, :] & ~mask.block_y
    rows = np.concatenate([ids[:, :-1][ex], ids[:-1, :][ey]])
    cols = np.concatenate([ids[:, 1:][ex], ids[1:, :][ey]])
    g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(ny * nx, ny * nx)).tocsr()
    _, lab = connected_components(g, directed=False)
    lab = lab.reshape(ny, nx)
    labels = np.zeros((ny, nx), dtype=np.int64)
    uniq, inv = np.unique(lab[mask.inside], return_inverse=True)
    labels[mask.inside] = inv + 1
    return len(uniq), labels


def _merge_with_slits(labels: np.ndarray, n: int, mask: RasterMask, candidates: np.ndarray) -> tuple[int, np.ndarray]:
    """Union labelled complement pieces through slits; returns (count, root per label)."""
    parent = list(range(n + 1 + len(mask.slits)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    xs, ys, h = mask.xs, mask.ys, mask.h
    reach = h * math.sqrt(2) * (1 + 1e-9)
    for k, s in enumerate(mask.slits):
        node = n + 1 + k
        for (ax, ay), (bx, by) in zip(s[:-1], s[1:]):
            ia = max(int(math.floor((min(ax, bx) - xs[0]) / h)) - 2, 0)
            ib = min(int(math.ceil((max(ax, bx) - xs[0]) / h)) + 3, len(xs))
            ja = max(int(math.floor((min(ay, by) - ys[0]) / h)) - 2, 0)
            jb = min(int(math.ceil((max(ay, by) - ys[0]) / h)) + 3, len(ys))
            X, Y = np.meshgrid(xs[ia:ib], ys[ja:jb])
            near = geo.point_segment_distance(X, Y, ax, ay, bx, by) <= reach
            near &= candidates[ja:jb, ia:ib]
            for lab in np.unique(labels[ja:jb, ia:ib][near]):
                union(node, int(lab))
        for k2, s2 in enumerate(mask.slits[:k]):
            hit = geo.cross_intersections(s[:-1], s[1:], s2[:-1], s2[1:], 1e-12).any()
            if hit:
                union(node, n + 1 + k2)
    roots = np.array([find(a) for a in range(len(parent))])
    return len(set(roots[1:].tolist())), roots


def topology(mask: RasterMask) -> TopologyReport:
    """Component counts of the inside set, bounded complement and boundary.

    Inside nodes connect through unsevered 4-adjacencies; complement and
    boundary nodes through 8-adjacencies (the digital dual), with every slit
    joined to the complement nodes within one diagonal step of it.
    """
    if not mask.inside.any():
        return TopologyReport(0, 0, 0)
    n_comp, _ = _inside_components(mask)
    eight = np.ones((3, 3), dtype=bool)

    outside = ~mask.inside
    lab_c, n_c = ndimage.label(outside, structure=eight)
    _, roots = _merge_with_slits(lab_c, n_c, mask, outside)
    border = np.unique(np.concatenate([lab_c[0], lab_c[-1], lab_c[:, 0], lab_c[:, -1]]))
    border_roots = {int(roots[b]) for b in border if b > 0}
    all_roots = {int(r) for r in roots[1:]}
    n_bounded = len(all_roots - border_roots)

    inside = mask.inside
    touch = np.zeros_like(inside)
    touch[:, 1:] |= inside[:, :-1]
    touch[:, :-1] |= inside[:, 1:]
    touch[1:, :] |= inside[:-1, :]
    touch[:-1, :] |= inside[1:, :]
    bnd = outside & touch
    lab_b, n_b = ndimage.label(bnd, structure=eight)
    n_bnd, _ = _merge_with_slits(lab_b, n_b, mask, bnd)
    return TopologyReport(int(n_comp), int(n_bounded), int(n_bnd))


# ---------------------------------------------------------------------------
# Hausdorff distances


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two finite point sets ``(n, 2)``."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("Hausdorff distance needs two nonempty point sets")
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def _slit_samples(slits, step: float) -> np.ndarray:
    pts = []
    for s in slits:
        for p, q in zip(s[:-1], s[1:]):
            n = max(int(math.ceil(np.hypot(*(q - p)) / step)), 1)
            tt = np.linspace(0.0, 1.0, n + 1)[:, None]
            pts.append(p + tt * (q - p))
    return np.concatenate(pts) if pts else np.zeros((0, 2))


def co_hausdorff_distance(m1: RasterMask, m2: RasterMask) -> float:
    """Hausdorff distance between the complements of two masks on one lattice.

    Nodes outside both frames belong to both complements and contribute zero,
    so the union of the two frames stands in for the inflated bounding box.
    Slits enter the complement as sampled points.
    """
    if not math.isclose(m1.h, m2.h, rel_tol=1e-12):
        raise ValueError("co-Hausdorff distance needs masks on the same lattice")
    h = m1.h
    if not m1.inside.any() and not m2.inside.any():
        return 0.0
    i0 = min(m1.lattice_offset[0], m2.lattice_offset[0])
    j0 = min(m1.lattice_offset[1], m2.lattice_offset[1])
    i1 = max(m1.lattice_offset[0] + m1.width, m2.lattice_offset[0] + m2.width)
    j1 = max(m1.lattice_offset[1] + m1.height, m2.lattice_offset[1] + m2.height)

    def embed(m):
        out = np.zeros((j1 - j0 + 2, i1 - i0 + 2), dtype=bool)
        oi, oj = m.lattice_offset[0] - i0 + 1, m.lattice_offset[1] - j0 + 1
        out[oj:oj + m.height, oi:oi + m.width] = m.inside
        return out

    ins = [embed(m1), embed(m2)]
    xs = (i0 - 1 + np.arange(ins[0].shape[1])) * h
    ys = (j0 - 1 + np.arange(ins[0].shape[0])) * h
    samples = [_slit_samples(m.slits, h / 2) for m in (m1, m2)]

    def boundary_cloud(k):
        inside = ins[k]
        touch = ndimage.binary_dilation(inside)
        jj, ii = np.nonzero(touch & ~inside)
        pts = np.column_stack([xs[ii], ys[jj]])
        return np.concatenate([pts, samples[k]]) if len(samples[k]) else pts

    def nearest_inside(pts, inside):
        ii = np.clip(np.rint((pts[:, 0] - xs[0]) / h).astype(int), 0, len(xs) - 1)
        jj = np.clip(np.rint((pts[:, 1] - ys[0]) / h).astype(int), 0, len(ys) - 1)
        return inside[jj, ii]

    def directed(src, dst):
        # sup over the complement of `src` of the distance to the complement of `dst`
        cloud = boundary_cloud(dst)
        if len(cloud) == 0:
            return math.inf
        tree = cKDTree(cloud)
        jj, ii = np.nonzero(~ins[src] & ins[dst])
        pts = np.column_stack([xs[ii], ys[jj]])
        if len(samples[src]):
            sp = samples[src]
            pts = np.concatenate([pts, sp[nearest_inside(sp, ins[dst])]])
        if len(pts) == 0:
            return 0.0
        d, _ = tree.query(pts)
        return float(d.max())

    return max(directed(0, 1), directed(1, 0))
