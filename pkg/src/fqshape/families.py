"""Parametric domain families and sequence runners.

Every generator returns a validated :class:`~fqshape.domain.PlanarDomain`.
Smooth boundaries are replaced by inscribed N-gons with N large enough that
the relative perimeter error stays below 1e-4.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import GeometryError, PlanarDomain, co_hausdorff_distance, measure, rasterize, topology

DEFAULT_SIDES = 512
FAMILIES = ("disc", "annulus", "rectangle", "square", "thin_triangle", "slit_disc", "radial_slit_disc",
            "wiggly_disc", "k_hole_disc", "two_discs", "channel_join")


def circle(radius: float, n: int = DEFAULT_SIDES, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    th = phase + 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])


def _sides_for(radius_ratio: float = 1.0) -> int:
    # inscribed n-gon perimeter error is about pi^2 / (6 n^2)
    return max(DEFAULT_SIDES, int(math.ceil(math.pi / math.sqrt(6e-4) * radius_ratio)))


def disc(radius: float = 1.0, n: int = DEFAULT_SIDES, center=(0.0, 0.0)) -> PlanarDomain:
    if radius <= 0:
        raise GeometryError("disc radius must be positive", "disc")
    return PlanarDomain((circle(radius, n, center),))


def annulus(r: float = 0.5, R: float = 1.0, n: int = DEFAULT_SIDES) -> PlanarDomain:
    if not 0 < r < R:
        raise GeometryError("annulus needs 0 < r < R", "annulus")
    return PlanarDomain((circle(R, n),), (circle(r, n),))


def rectangle(a: float = 1.0, b: float = 1.0) -> PlanarDomain:
    """Axis-aligned ``a x b`` rectangle with a corner at the origin."""
    if a <= 0 or b <= 0:
        raise GeometryError("rectangle sides must be positive", "rectangle")
    return PlanarDomain((np.array([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]]),))


def square(side: float = 1.0) -> PlanarDomain:
    return rectangle(side, side)


def thin_triangle(aspect: float = 10.0, base: float = 1.0) -> PlanarDomain:
    """Isosceles triangle with the given base and height ``aspect * base``."""
    if aspect <= 0 or base <= 0:
        raise GeometryError("triangle aspect and base must be positive", "thin_triangle")
    H = aspect * base
    return PlanarDomain((np.array([[0.0, 0.0], [H, base / 2], [0.0, base]]),))


def _ray_exit(loop: np.ndarray, angle: float) -> float:
    """Distance from the origin to the first crossing of a ray with a loop."""
    d = np.array([math.cos(angle), math.sin(angle)])
    a, b = loop, np.roll(loop, -1, axis=0)
    e = b - a
    den = e[:, 0] * d[1] - e[:, 1] * d[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (a[:, 0] * d[1] - a[:, 1] * d[0]) / -den
        r = (a[:, 0] * e[:, 1] - a[:, 1] * e[:, 0]) / -den
    ok = (den != 0) & (s >= -1e-12) & (s <= 1 + 1e-12) & (r > 0)
    return float(r[ok].min())


def slit_disc(n: int = 4, sides: int = DEFAULT_SIDES, phase: float = 0.0) -> PlanarDomain:
    """Unit disc minus the radial segments ``theta = 2 pi i / n``, ``r in [1/n, 1]``.

    The segments reach the rim, so the complement has no bounded component
    and the central core of radius ``1/n`` keeps the sectors joined.
    """
    if n < 2:
        raise GeometryError("slit_disc needs n >= 2", "slit_disc")
    rim = circle(1.0, sides)
    slits = []
    for i in range(n):
        th = phase + 2 * math.pi * i / n
        r_out = _ray_exit(rim, th)
        u = np.array([math.cos(th), math.sin(th)])
        slits.append(np.array([u / n, u * r_out]))
    return PlanarDomain((rim,), (), tuple(slits))


def radial_slit_disc(length: float = 0.9, sides: int = DEFAULT_SIDES, angle: float = 0.0) -> PlanarDomain:
    """Unit disc with one radial slit of the given length running in from the rim."""
    if not 0 < length < 1:
        raise GeometryError("radial slit length must lie in (0, 1)", "radial_slit_disc")
    rim = circle(1.0, sides)
    r_out = _ray_exit(rim, angle)
    u = np.array([math.cos(angle), math.sin(angle)])
    return PlanarDomain((rim,), (), (np.array([u * (r_out - length), u * r_out]),))


def diameter_slit_disc(sides: int = DEFAULT_SIDES) -> PlanarDomain:
    rim = circle(1.0, sides)
    return PlanarDomain((rim,), (), (np.array([[-_ray_exit(rim, math.pi), 0.0], [_ray_exit(rim, 0.0), 0.0]]),))


def wiggly_disc(amplitude: float = 0.2, frequency: int = 8, sides: int | None = None) -> PlanarDomain:
    """Star-shaped perturbation ``r = 1 + amplitude * sin(frequency * theta)``.

    ``|amplitude| < 1/2`` keeps ``B_{1/2}`` inside and the set inside ``B_2``.
    """
    if not abs(amplitude) < 0.5:
        raise GeometryError("wiggly_disc amplitude must satisfy |a| < 1/2 (B_1/2 in Omega in B_2)", "wiggly_disc")
    if frequency < 1:
        raise GeometryError("wiggly_disc frequency must be >= 1", "wiggly_disc")
    if sides is None:
        sides = max(DEFAULT_SIDES, 64 * frequency * max(1, int(math.ceil(4 * abs(amplitude)))))
    th = 2 * np.pi * np.arange(sides) / sides
    r = 1 + amplitude * np.sin(frequency * th)
    return PlanarDomain((np.column_stack([r * np.cos(th), r * np.sin(th)]),))


def k_hole_disc(k: int = 2, hole_radius: float = 0.1, ring: float = 0.5, sides: int = DEFAULT_SIDES) -> PlanarDomain:
    """Unit disc with ``k`` circular holes evenly spaced on a ring."""
    if k < 0:
        raise GeometryError("k_hole_disc needs k >= 0", "k_hole_disc")
    if k and (ring + hole_radius >= 1 or (k > 1 and 2 * hole_radius >= 2 * ring * math.sin(math.pi / k))):
        raise GeometryError("k_hole_disc holes overlap or leave the disc", "k_hole_disc")
    if k == 1:
        ring_pts = [(ring, 0.0)]
    else:
        ring_pts = [(ring * math.cos(2 * math.pi * i / k), ring * math.sin(2 * math.pi * i / k)) for i in range(k)]
    hsides = max(64, sides // 4)
    holes = tuple(circle(hole_radius, hsides, c) for c in ring_pts)
    return PlanarDomain((circle(1.0, sides),), holes)


def two_discs(radius: float = 0.5, gap: float = 0.5, sides: int = DEFAULT_SIDES) -> PlanarDomain:
    off = radius + gap / 2
    return PlanarDomain((circle(radius, sides, (-off, 0.0)), circle(radius, sides, (off, 0.0))))


def channel_join(distance: float = 1.0, eps: float = 0.01, side: float = 1.0) -> PlanarDomain:
    """Two squares ``distance`` apart joined by a straight corridor of width ``eps``.

    The joined set is connected and Lipschitz, so its perimeter equals H^1 of
    its boundary: ``8 side + 2 distance - 2 eps``.
    """
    if not 0 < eps < side:
        raise GeometryError("channel width must satisfy 0 < eps < side", "channel_join")
    if distance <= 0:
        raise GeometryError("channel_join distance must be positive", "channel_join")
    s, L = side, distance
    y0, y1 = s / 2 - eps / 2, s / 2 + eps / 2
    pts = [(0, 0), (s, 0), (s, y0), (s + L, y0), (s + L, 0), (2 * s + L, 0), (2 * s + L, s),
           (s + L, s), (s + L, y1), (s, y1), (s, s), (0, s)]
    return PlanarDomain((np.array(pts, dtype=float),))


_GENERATORS = {
    "disc": disc,
    "annulus": annulus,
    "rectangle": rectangle,
    "square": square,
    "thin_triangle": thin_triangle,
    "slit_disc": slit_disc,
    "radial_slit_disc": radial_slit_disc,
    "wiggly_disc": wiggly_disc,
    "k_hole_disc": k_hole_disc,
    "two_discs": two_discs,
    "channel_join": channel_join,
}


@dataclass(frozen=True)
class FamilySpec:
    """A family name, its parameters and the resolution policy.

    ``features_per_h`` is the number of grid spacings fitted into the
    smallest feature (slit spacing, channel width, inradius); ``h_max``
    caps the spacing from above.
    """

    name: str
    params: dict = field(default_factory=dict)
    features_per_h: float = 8.0
    h_max: float = 1 / 64

    def domain(self) -> PlanarDomain:
        return generate(self)

    def declared_holes(self) -> int:
        if self.name == "annulus":
            return 1
        if self.name == "k_hole_disc":
            return int(self.params.get("k", 2))
        return 0

    def feature_size(self) -> float:
        p = self.params
        if self.name == "slit_disc":
            return 1.0 / p.get("n", 4)
        if self.name == "channel_join":
            return p.get("eps", 0.01)
        if self.name == "annulus":
            return p.get("R", 1.0) - p.get("r", 0.5)
        if self.name == "k_hole_disc":
            k = p.get("k", 2)
            r, ring = p.get("hole_radius", 0.1), p.get("ring", 0.5)
            gaps = [1 - ring - r, ring - r]
            if k > 1:
                gaps.append(2 * ring * math.sin(math.pi / k) - 2 * r)
            return min(gaps + [2 * r])
        if self.name == "rectangle":
            return min(p.get("a", 1.0), p.get("b", 1.0))
        if self.name == "thin_triangle":
            return p.get("base", 1.0)
        if self.name == "wiggly_disc":
            return min(1.0, math.pi / p.get("frequency", 8))
        if self.name == "two_discs":
            return min(p.get("gap", 0.5), p.get("radius", 0.5))
        if self.name == "radial_slit_disc":
            return min(1.0 - p.get("length", 0.9), 0.5)
        return p.get("radius", p.get("side", 1.0))

    def resolution(self) -> float:
        """Grid spacing: a power-of-two fraction with ``h <= feature / features_per_h``."""
        target = min(self.feature_size() / self.features_per_h, self.h_max)
        return 2.0 ** math.floor(math.log2(target))


def generate(spec: FamilySpec | str, **params) -> PlanarDomain:
    """Build the domain for a family spec (or a family name plus keyword parameters)."""
    if isinstance(spec, str):
        spec = FamilySpec(spec, params)
    try:
        gen = _GENERATORS[spec.name]
    except KeyError:
        raise GeometryError(f"unknown family '{spec.name}'; choose from {', '.join(_GENERATORS)}", "family") from None
    try:
        return gen(**spec.params)
    except TypeError as exc:
        raise GeometryError(f"bad parameters for {spec.name}: {exc}", "family") from None


# ---------------------------------------------------------------------------
# sequence runner

TREND_COLUMNS = ("param", "area", "perimeter", "h1", "slit_length", "rho", "T", "T_coarse", "T_fine",
                 "F_q", "F_qk_lower", "F_qk_upper", "n_complement_bounded", "co_hausdorff_to_limit", "h")


@dataclass
class TrendTable:
    family: str
    param_name: str
    q: float
    k: int
    rows: list[dict]
    verdicts: dict[str, bool]
    error: str | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TREND_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in TREND_COLUMNS])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def _limit_distance(spec: FamilySpec, mask, rho: float) -> float:
    """co-Hausdorff distance from a member to the family's limit set, when one exists.

    Slit discs degenerate to the empty set, whose complement is the whole
    plane, so the distance equals the member's inradius. Wiggly discs are
    compared with the unperturbed unit disc.
    """
    if spec.name == "slit_disc":
        return rho
    if spec.name == "wiggly_disc":
        base = rasterize(disc(1.0), mask.h)
        return co_hausdorff_distance(mask, base)
    return math.nan


def _strictly(seq, sign: int) -> bool:
    d = np.diff(np.asarray(seq, dtype=float))
    return bool(np.all(sign * d > 0))


def run_sequence(family: str, param_name: str, ramp, q: float = 0.5, k: int | None = None,
                 base_params: dict | None = None, features_per_h: float = 8.0, h_max: float = 1 / 64,
                 rel_tol: float = 1e-8, threads: int = 1) -> TrendTable:
    """Evaluate a family along a parameter ramp.

    Each member is rasterized at its policy resolution, solved at ``h`` and
    ``h/2`` and extrapolated. Members are independent; with ``threads > 1``
    they run concurrently and the table is assembled in ramp order.
    """
    from .functionals import evaluate
    from .parallel import distance_field, inradius
    from .torsion import richardson_T

    ramp = list(ramp)
    if len(ramp) < 4:
        raise ValueError("a trend ramp needs at least 4 parameter values")
    base_params = dict(base_params or {})

    def member(value):
        spec = FamilySpec(family, {**base_params, param_name: value}, features_per_h, h_max)
        dom = spec.domain()
        h = spec.resolution()
        m = measure(dom)
        mask = rasterize(dom, h)
        topo = topology(mask)
        rho = inradius(distance_field(mask))
        rt = richardson_T(dom, h, rel_tol)
        kk = topo.n_complement_bounded if k is None else k
        fv = evaluate(m, rt.T, q, kk)
        return {
            "param": value, "area": m.area, "perimeter": m.perimeter, "h1": m.boundary_h1,
            "slit_length": m.slit_length, "rho": rho, "T": rt.T, "T_coarse": rt.T_coarse, "T_fine": rt.T_fine,
            "F_q": fv.F_q, "F_qk_lower": fv.F_qk_lower, "F_qk_upper": fv.F_qk_upper,
            "n_complement_bounded": topo.n_complement_bounded,
            "co_hausdorff_to_limit": _limit_distance(spec, mask, rho), "h": h,
        }

    rows: list[dict] = []
    error = None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(member, v) for v in ramp]
            for fut in futures:
                try:
                    rows.append(fut.result())
                except Exception as exc:  # abort with partial table
                    error = f"{type(exc).__name__}: {exc}"
                    break
    else:
        for v in ramp:
            try:
                rows.append(member(v))
            except Exception as exc:
                error = f"{type(exc).__name__}: {exc}"
                break

    T = [r["T"] for r in rows]
    F = [r["F_q"] for r in rows]
    P = [r["perimeter"] for r in rows]
    verdicts = {
        "T_strictly_decreasing": _strictly(T, -1),
        "T_strictly_increasing": _strictly(T, +1),
        "F_strictly_decreasing": _strictly(F, -1),
        "F_strictly_increasing": _strictly(F, +1),
        "P_strictly_increasing": _strictly(P, +1),
    }
    return TrendTable(family, param_name, q, -1 if k is None else k, rows, verdicts, error)
