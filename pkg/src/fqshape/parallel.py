"""Distance to the boundary, interior parallel sets and their area/length profiles.

The distance field is signed on the lattice: positive at inside nodes,
negative outside, zero on the boundary and on slits. Areas of the sets
``{d > t}`` are measured on the piecewise-linear interpolant of ``d`` over a
two-triangle split of every grid cell, which keeps ``A(t)`` smooth in ``t``
so that its differences can be taken safely.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .domain import PlanarDomain, RasterMask, co_hausdorff_distance, measure, rasterize, topology
from .geometry import segment_distance_field
from .reports import InequalityReport, compare

PROFILE_COLUMNS = ("t", "A", "L_diff", "L_contour", "g")


@dataclass(frozen=True, eq=False)
class DistanceField:
    mask: RasterMask
    d: np.ndarray   # signed, full frame

    @property
    def h(self) -> float:
        return self.mask.h

    def inside_values(self) -> np.ndarray:
        return self.d[self.mask.inside]


def distance_field(mask: RasterMask) -> DistanceField:
    """Euclidean distance from each node to the boundary, slits included.

    With the generating geometry available, distances are exact distances to
    the boundary segments. A mask without geometry (for instance a parallel
    set) falls back to the exact transform to its nearest non-inside node.
    """
    if not mask.inside.any():
        raise ValueError("distance field of an empty mask")
    if mask.domain is not None:
        a, b = mask.domain.segments()
        dist = segment_distance_field(mask.xs, mask.ys, a, b)
    else:
        # distance in lattice units to the nearest outside node
        dist = np.where(mask.inside, ndimage.distance_transform_edt(mask.inside), 0.0) * mask.h
        dist_out = ndimage.distance_transform_edt(~mask.inside) * mask.h
        dist = dist - dist_out
        dist.setflags(write=False)
        return DistanceField(mask, dist)
    d = np.where(mask.inside, dist, -dist)
    d.setflags(write=False)
    return DistanceField(mask, d)


def inradius(field: DistanceField) -> float:
    return float(field.inside_values().max())


# ---------------------------------------------------------------------------
# level-set measurement


class LevelAreas:
    """Exact area of ``{f > t}`` for the piecewise-linear interpolant of a grid function.

    Every cell is cut along its rising diagonal into two triangles of area
    ``h^2 / 2``. For a triangle with sorted vertex values ``a <= b <= c`` the
    superlevel area is a quadratic spline in ``t``; only triangles with
    ``a < t < c`` need explicit evaluation, and they are found by a window
    search over the sorted minima.
    """

    def __init__(self, f: np.ndarray, h: float, floor: float = -math.inf):
        f = np.asarray(f, dtype=float)
        v00, v10 = f[:-1, :-1], f[:-1, 1:]
        v01, v11 = f[1:, :-1], f[1:, 1:]
        tri = np.stack([
            np.stack([v00, v10, v11], axis=-1).reshape(-1, 3),
            np.stack([v00, v01, v11], axis=-1).reshape(-1, 3),
        ]).reshape(-1, 3)
        tri = tri[tri.max(axis=1) > floor]
        tri.sort(axis=1)
        order = np.argsort(tri[:, 0], kind="stable")
        tri = tri[order]
        self.a, self.b, self.c = tri[:, 0].copy(), tri[:, 1].copy(), tri[:, 2].copy()
        self.S = 0.5 * h * h
        self.span = float((self.c - self.a).max()) if len(self.a) else 0.0

    def __call__(self, t: float) -> float:
        a, b, c = self.a, self.b, self.c
        full = len(a) - np.searchsorted(a, t, side="left")   # a >= t
        lo = np.searchsorted(a, t - self.span, side="left")
        hi = np.searchsorted(a, t, side="left")
        aa, bb, cc = a[lo:hi], b[lo:hi], c[lo:hi]
        part = cc > t
        aa, bb, cc = aa[part], bb[part], cc[part]
        low = t <= bb
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(
                low,
                1.0 - (t - aa) ** 2 / ((bb - aa) * (cc - aa)),
                (cc - t) ** 2 / ((cc - aa) * (cc - bb)),
            )
        return self.S * (full + float(frac.sum()))

    def many(self, ts) -> np.ndarray:
        return np.array([self(float(t)) for t in ts])


def contour_length(f: np.ndarray, level: float, h: float) -> float:
    """Length of the marching-squares polyline of ``{f = level}``.

    Corners with ``f > level`` count as above. Crossings sit at the linear
    interpolation point of each cell edge; saddle cells are resolved by the
    mean of the four corners.
    """
    g = np.asarray(f, dtype=float) - level
    f00, f10 = g[:-1, :-1], g[:-1, 1:]
    f01, f11 = g[1:, :-1], g[1:, 1:]
    u00, u10, u01, u11 = f00 > 0, f10 > 0, f01 > 0, f11 > 0
    case = u00.astype(np.int8) + 2 * u10 + 4 * u11 + 8 * u01
    active = (case != 0) & (case != 15)
    if not active.any():
        return 0.0
    f00, f10, f01, f11 = f00[active], f10[active], f01[active], f11[active]
    u00, u10, u01, u11 = u00[active], u10[active], u01[active], u11[active]

    def cross(fa, fb):
        with np.errstate(divide="ignore", invalid="ignore"):
            return fa / (fa - fb)

    # crossing points in cell-local coordinates (x to the right, y up)
    bot = np.stack([cross(f00, f10), np.zeros_like(f00)], axis=-1)
    rgt = np.stack([np.ones_like(f00), cross(f10, f11)], axis=-1)
    top = np.stack([cross(f01, f11), np.ones_like(f00)], axis=-1)
    lft = np.stack([np.zeros_like(f00), cross(f00, f01)], axis=-1)
    has = {"b": u00 != u10, "r": u10 != u11, "t": u01 != u11, "l": u00 != u01}
    pts = {"b": bot, "r": rgt, "t": top, "l": lft}

    def seg(p, q):
        return np.hypot(*(pts[p] - pts[q]).T)

    n_cross = sum(v.astype(int) for v in has.values())
    total = np.zeros(len(f00))
    two = n_cross == 2
    for p, q in (("b", "r"), ("b", "t"), ("b", "l"), ("r", "t"), ("r", "l"), ("t", "l")):
        m = two & has[p] & has[q]
        total[m] += seg(p, q)[m]
    four = n_cross == 4
    if four.any():
        center = 0.25 * (f00 + f10 + f01 + f11)
        # corners on the side that is cut off are separated from the center
        cut_00 = np.where(center > 0, ~u00, u00)
        diag_a = seg("b", "l") + seg("r", "t")    # cut corners 00 and 11
        diag_b = seg("b", "r") + seg("t", "l")    # cut corners 10 and 01
        total[four] += np.where(cut_00, diag_a, diag_b)[four]
    return float(total.sum()) * h


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True, eq=False)
class ParallelProfile:
    t: np.ndarray
    A: np.ndarray
    L_diff: np.ndarray
    L_contour: np.ndarray
    g: np.ndarray
    rho: float
    alpha: int
    h: float
    perimeter: float      # P + 2 * slit length when geometry is known
    low_confidence: np.ndarray

    @property
    def L(self) -> np.ndarray:
        return self.L_diff

    @property
    def discrepancy(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.L_diff - self.L_contour) / np.maximum(np.abs(self.L_diff), 1e-300)

    @property
    def retained(self) -> np.ndarray:
        """Samples used for pass/fail judgments: those not flagged low-confidence."""
        return ~self.low_confidence

    def coarea_defect(self) -> float:
        """max |A(t) - int_t^rho L| over the samples, relative to |Omega|."""
        L = self.L_diff
        tail = np.concatenate([np.cumsum((0.5 * (L[1:] + L[:-1]) * np.diff(self.t))[::-1])[::-1], [0.0]])
        return float(np.max(np.abs(self.A - tail)) / self.A[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for row in zip(self.t, self.A, self.L_diff, self.L_contour, self.g):
            w.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def default_samples(rho: float, h: float, cap: int = 256) -> int:
    """Sample count giving a level spacing of at least one grid step (16 at minimum)."""
    return int(min(cap, max(16, math.floor(rho / h) + 1)))


def profile(field: DistanceField, n: int | None = None, alpha: int | None = None) -> ParallelProfile:
    """Sample ``A(t)`` and ``L(t)`` on ``n`` uniform levels in ``[0, rho]``.

    The default ``n`` keeps the level spacing at or above ``h``: the
    interpolated area carries an O(h^2) error that oscillates with period
    ``h`` in ``t``, and finer sampling turns it into large second differences.

    ``L_diff`` is ``-A'(t)`` by central differences (second-order one-sided at
    the ends); ``L_contour`` is the marching-squares length of ``{d = t}``.
    A sample is flagged when the two differ by more than 5%, and the last two
    samples are always flagged.
    """
    rho = inradius(field)
    if n is None:
        n = default_samples(rho, field.h)
    if n < 16:
        raise ValueError("a profile needs at least 16 samples")
    t = np.linspace(0.0, rho, n)
    areas = LevelAreas(field.d, field.h, floor=0.0)
    A = areas.many(t)
    A[-1] = 0.0
    L_diff = -np.gradient(A, t, edge_order=2)
    L_contour = np.array([contour_length(field.d, float(s), field.h) for s in t])
    if alpha is None:
        alpha = topology(field.mask).n_complement_bounded
    g = L_diff - 2 * math.pi * (alpha - 1) * t
    if field.mask.domain is not None:
        m = measure(field.mask.domain)
        perim = m.perimeter + 2 * m.slit_length
    else:
        perim = float(L_contour[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.abs(L_diff - L_contour) / np.abs(L_diff)
    flags = ~(disc <= 0.05)
    flags[-2:] = True
    for arr in (t, A, L_diff, L_contour, g, flags):
        arr.setflags(write=False)
    return ParallelProfile(t, A, L_diff, L_contour, g, rho, int(alpha), field.h, float(perim), flags)


def concavity_tolerance(prof: ParallelProfile) -> float:
    """Allowed increase of the slope of the Nagy function per sample: ``10 h P / rho``.

    The value has units of length, matching a difference quotient of ``phi``.
    """
    return 10.0 * prof.h * prof.perimeter / prof.rho


def nagy_function(prof: ParallelProfile) -> np.ndarray:
    return -prof.A - (prof.alpha - 1) * math.pi * prof.t ** 2


def nagy_slope_jumps(prof: ParallelProfile) -> np.ndarray:
    """Second central differences of ``-A - (alpha-1) pi t^2`` divided by dt.

    Entry ``i`` is the change in the difference quotient of ``phi`` across
    sample ``i + 1``; concavity makes every entry nonpositive.
    """
    phi = nagy_function(prof)
    dt = prof.t[1] - prof.t[0]
    return (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dt


def check_nagy(prof: ParallelProfile) -> InequalityReport:
    """Concavity of ``t -> -A(t) - (alpha-1) pi t^2`` at the retained interior samples."""
    keep = prof.retained
    jumps = nagy_slope_jumps(prof)[keep[:-2] & keep[1:-1] & keep[2:]]
    tol = concavity_tolerance(prof)
    worst = float(jumps.max())
    return compare("sz_nagy_concavity", "nagy_concavity", worst, "<=", 0.0, tol, equality_tol=tol)


def check_boundL(prof: ParallelProfile, m, k: int, rel_tol: float = 0.02) -> list[InequalityReport]:
    """Length bound on ``L(t)`` and the integrated area bound on ``A(t)``.

    Both are judged at the worst retained sample. Tolerances are relative to
    ``P + 2 * slit length`` (length) and to ``|Omega|`` (area).
    """
    p_eff = m.perimeter + 2 * m.slit_length
    keep = prof.retained
    t = prof.t[keep]
    L_rhs = p_eff + 2 * math.pi * (k - 1) * t
    L = prof.L_diff[keep]
    iL = int(np.argmin(L_rhs - L))
    rep_L = compare("length_bound", "parallel_length_bound", float(L[iL]), "<=", float(L_rhs[iL]),
                    rel_tol * p_eff, equality_tol=rel_tol * p_eff)
    A_rhs = p_eff * (prof.rho - t) + math.pi * (k - 1) * (prof.rho - t) ** 2
    A = prof.A[keep]
    iA = int(np.argmin(A_rhs - A))
    rep_A = compare("area_bound", "parallel_area_bound", float(A[iA]), "<=", float(A_rhs[iA]),
                    rel_tol * prof.A[0], equality_tol=rel_tol * prof.A[0])
    return [rep_L, rep_A]


# ---------------------------------------------------------------------------
# Minkowski-type quotients


@dataclass(frozen=True)
class MinkowskiEstimates:
    r: np.ndarray
    M: np.ndarray          # |{|d| <= r}| / 2r
    SM: np.ndarray         # |{-r <= d <= 0}| / r
    inner: np.ndarray      # (|Omega| - A(r)) / r
    M_limit: float
    SM_limit: float
    inner_limit: float
    h1: float
    perimeter: float
    perimeter_with_slits: float


def _extrapolate(r: np.ndarray, y: np.ndarray) -> float:
    """Intercept at r = 0 of the least-squares line through (r, y)."""
    if len(r) == 1:
        return float(y[0])
    slope, icept = np.polyfit(r, y, 1)
    return float(icept)


def minkowski_estimates(mask: RasterMask, r_values, field: DistanceField | None = None) -> MinkowskiEstimates:
    """Finite-r tube quotients and their linear extrapolation to r = 0."""
    if mask.domain is None:
        raise ValueError("Minkowski estimates need the generating geometry")
    r = np.asarray(list(r_values), dtype=float)
    if len(r) == 0:
        raise ValueError("no r values given")
    bad = r[r <= 2 * mask.h]
    if len(bad):
        raise ValueError(f"r values {bad.tolist()} do not exceed 2h = {2 * mask.h:g}")
    if np.any(np.diff(r) >= 0):
        raise ValueError("r values must be strictly decreasing")
    x0, y0, x1, y1 = mask.domain.bbox()
    reach = min(x0 - mask.xs[0], mask.xs[-1] - x1, y0 - mask.ys[0], mask.ys[-1] - y1)
    if r.max() > reach:
        raise ValueError(f"r = {r.max():g} exceeds the frame margin {reach:g}; rasterize with a larger margin")
    field = field or distance_field(mask)
    areas = LevelAreas(field.d, mask.h)
    a0 = areas(0.0)
    outer = np.array([areas(-x) for x in r])
    inner_area = np.array([areas(x) for x in r])
    M = (outer - inner_area) / (2 * r)
    SM = (outer - a0) / r
    inner = (a0 - inner_area) / r
    m = measure(mask.domain)
    return MinkowskiEstimates(r, M, SM, inner, _extrapolate(r, M), _extrapolate(r, SM), _extrapolate(r, inner),
                              m.boundary_h1, m.perimeter, m.perimeter + 2 * m.slit_length)


# ---------------------------------------------------------------------------
# inner parallel approximants


@dataclass(frozen=True, eq=False)
class Approximant:
    t: float
    mask: RasterMask
    perimeter: float
    n_complement_bounded: int
    n_components: int
    rho: float
    co_hausdorff: float


@dataclass(frozen=True, eq=False)
class ApproximantTable:
    rows: list[Approximant]
    rho: float
    alpha: int
    perimeter_limit: float      # linear extrapolation of P(Omega(t)) to t = 0
    reference: float            # P + 2 * slit length

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t", "perimeter", "n_complement_bounded", "n_components", "rho", "co_hausdorff"))
        for a in self.rows:
            w.writerow([f"{a.t:.12g}", f"{a.perimeter:.12g}", a.n_complement_bounded, a.n_components,
                        f"{a.rho:.12g}", f"{a.co_hausdorff:.12g}"])
        return buf.getvalue()


def inner_parallel_approximants(domain: PlanarDomain, t_list, h: float, with_distance: bool = True) -> ApproximantTable:
    """Masks of ``Omega(t) = {d > t}`` for each t, with perimeter and topology.

    The perimeter of ``Omega(t)`` is the contour length of ``{d = t}``.
    The inradius of ``Omega(t)`` is ``rho - t``; the co-Hausdorff distance to
    the full mask tracks the convergence ``Omega(t) -> Omega`` as t -> 0.
    """
    mask = rasterize(domain, h)
    field = distance_field(mask)
    rho = inradius(field)
    alpha = topology(mask).n_complement_bounded
    ts = [float(t) for t in t_list]
    if not ts:
        raise ValueError("no levels given")
    for t in ts:
        if not 0 < t < rho:
            raise ValueError(f"level t = {t:g} must lie in (0, rho = {rho:g})")
    rows = []
    for t in ts:
        sub = mask.with_inside(field.d > t, t)
        topo = topology(sub)
        dist = co_hausdorff_distance(mask, sub) if with_distance else math.nan
        rows.append(Approximant(t, sub, contour_length(field.d, t, h), topo.n_complement_bounded,
                                topo.n_components, rho - t, dist))
    ts_arr = np.array(ts)
    per = np.array([a.perimeter for a in rows])
    m = measure(domain)
    return ApproximantTable(rows, rho, alpha, _extrapolate(ts_arr, per), m.perimeter + 2 * m.slit_length)
