"""Derivative-free search for shapes with small F_q.

Shapes are star-shaped radial Fourier curves, optionally stretched by an
area-preserving affine map and pierced by circular holes. The objective
normalizes every candidate to area pi before rasterizing, so one grid
spacing serves the whole search.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .domain import GeometryError, PlanarDomain, ResolutionError, measure
from .families import circle
from .functionals import evaluate, lipschitz_f_q_bound
from .reports import dumps
from .torsion import SolverError, richardson_T

log = logging.getLogger(__name__)

SENTINEL = 1e6
DEFAULT_J = 8
DEFAULT_VERTICES = 512
HOLE_SIDES = 128
R_MIN_FRACTION = 0.02
BOUND_SLACK = 0.02


class OptimizationError(RuntimeError):
    def __init__(self, message: str, history: list | None = None):
        super().__init__(message)
        self.history = history or []


@dataclass(frozen=True)
class ShapeParams:
    """Radial Fourier outline ``r(theta) = a0 + sum a_j cos(j theta) + b_j sin(j theta)``.

    ``log_stretch`` scales x by ``exp(s)`` and y by ``exp(-s)`` after the
    outline is built. Holes are ``(cx, cy, radius)`` circles given in the
    unstretched frame.
    """

    a0: float = 1.0
    a: tuple[float, ...] = (0.0,) * DEFAULT_J
    b: tuple[float, ...] = (0.0,) * DEFAULT_J
    log_stretch: float = 0.0
    holes: tuple[tuple[float, float, float], ...] = ()

    @property
    def J(self) -> int:
        return len(self.a)

    @classmethod
    def disc(cls, J: int = DEFAULT_J, holes=()) -> "ShapeParams":
        return cls(1.0, (0.0,) * J, (0.0,) * J, 0.0, tuple(tuple(map(float, hh)) for hh in holes))

    def vector(self) -> np.ndarray:
        """Search coordinates; ``a0`` is excluded because F_q is scale free."""
        parts = [self.a, self.b, [self.log_stretch]] + [list(hh) for hh in self.holes]
        return np.array([v for p in parts for v in p], dtype=float)

    def from_vector(self, x) -> "ShapeParams":
        x = [float(v) for v in x]
        J = self.J
        holes = tuple(tuple(x[2 * J + 1 + 3 * i: 2 * J + 4 + 3 * i]) for i in range(len(self.holes)))
        return replace(self, a=tuple(x[:J]), b=tuple(x[J:2 * J]), log_stretch=x[2 * J], holes=holes)

    def to_json(self) -> dict:
        return {"a0": self.a0, "a": list(self.a), "b": list(self.b), "log_stretch": self.log_stretch,
                "holes": [list(hh) for hh in self.holes]}

    @classmethod
    def from_json(cls, data: dict) -> "ShapeParams":
        return cls(float(data["a0"]), tuple(map(float, data["a"])), tuple(map(float, data["b"])),
                   float(data.get("log_stretch", 0.0)), tuple(tuple(map(float, hh)) for hh in data.get("holes", [])))


@dataclass(frozen=True)
class Decoded:
    domain: PlanarDomain | None
    feasible: bool
    reason: str = ""


def decode(params: ShapeParams, n_vertices: int = DEFAULT_VERTICES) -> Decoded:
    """Polygonize the outline and holes; invalid geometry yields ``feasible=False``."""
    if params.a0 <= 0:
        return Decoded(None, False, "a0 must be positive")
    th = 2 * np.pi * np.arange(n_vertices) / n_vertices
    j = np.arange(1, params.J + 1)[:, None]
    r = params.a0 + np.asarray(params.a) @ np.cos(j * th) + np.asarray(params.b) @ np.sin(j * th)
    if np.any(r <= 0):
        return Decoded(None, False, "radius function is not positive; the outline crosses itself")
    sx, sy = math.exp(params.log_stretch), math.exp(-params.log_stretch)
    outer = np.column_stack([r * np.cos(th) * sx, r * np.sin(th) * sy])
    r_min = R_MIN_FRACTION * params.a0
    holes = []
    for i, (cx, cy, rad) in enumerate(params.holes):
        if rad < r_min:
            return Decoded(None, False, f"hole {i} radius below r_min = {r_min:g}")
        # the hole must sit strictly inside the unstretched outline
        phi = math.atan2(cy, cx)
        jj = np.arange(1, params.J + 1)
        r_at = params.a0 + float(np.dot(params.a, np.cos(jj * phi)) + np.dot(params.b, np.sin(jj * phi)))
        if math.hypot(cx, cy) + rad >= r_at:
            return Decoded(None, False, f"hole {i} is not inside the outline")
        c = circle(rad, HOLE_SIDES, (cx, cy))
        holes.append(np.column_stack([c[:, 0] * sx, c[:, 1] * sy]))
    try:
        # a positive radial function traces a simple star-shaped curve, so
        # the pairwise edge test is only needed once holes are present
        dom = PlanarDomain((outer,), tuple(holes), validate=bool(holes))
    except GeometryError as exc:
        return Decoded(None, False, str(exc))
    return Decoded(dom, True)


def normalized(dom: PlanarDomain) -> PlanarDomain:
    """Rescale to area pi and center the bounding box at the origin."""
    m = measure(dom)
    s = math.sqrt(math.pi / m.area)
    d = dom.scaled(s)
    x0, y0, x1, y1 = d.bbox()
    return d.translated(-0.5 * (x0 + x1), -0.5 * (y0 + y1))


def objective(params: ShapeParams, q: float, k: int, h: float, relaxed: bool = False,
              n_vertices: int = DEFAULT_VERTICES) -> tuple[float, bool]:
    """F_q of the decoded shape at grid spacing ``h`` (area normalized to pi).

    Returns ``(value, feasible)``; infeasible shapes and solver failures give
    the sentinel ``1e6``. With ``relaxed`` the upper relaxed value is used.
    """
    if not 0 < q <= 0.5:
        raise ValueError(f"q must lie in (0, 1/2], got {q}")
    dec = decode(params, n_vertices)
    if not dec.feasible:
        return SENTINEL, False
    dom = normalized(dec.domain)
    try:
        rt = richardson_T(dom, h)
    except (ResolutionError, ValueError) as exc:
        log.debug("infeasible at h=%g: %s", h, exc)
        return SENTINEL, False
    except SolverError as exc:
        log.warning("solver failure, sentinel returned: %s", exc)
        return SENTINEL, False
    if not rt.T > 0:
        return SENTINEL, False
    fv = evaluate(measure(dom), rt.T, q, k)
    return (fv.F_qk_upper if relaxed else fv.F_q), True


@dataclass
class OptimizationRun:
    q: float
    k: int
    seed: int
    budget: int
    h_coarse: float
    h_fine: float
    init: ShapeParams
    best_params: ShapeParams
    best_value: float               # fine-grid value of the chosen finalist
    best_coarse_value: float
    history: list[tuple[float, bool]] = field(default_factory=list)
    restarts: int = 0
    finalists: list[tuple[float, float]] = field(default_factory=list)   # (coarse, fine)

    @property
    def bound(self) -> float:
        """Slit-free lower bound on F_q for the hole budget k."""
        return lipschitz_f_q_bound(self.q, self.k)

    @property
    def gap(self) -> float:
        return self.best_value - self.bound

    @property
    def bound_fault(self) -> bool:
        """True if a feasible evaluation fell below the bound by more than the solver slack."""
        floor = self.bound * (1 - BOUND_SLACK)
        return any(f and v < floor for v, f in self.history)

    def running_best(self) -> np.ndarray:
        vals = np.array([v for v, _ in self.history], dtype=float)
        return np.minimum.accumulate(vals) if len(vals) else vals

    def to_json(self) -> dict:
        return {
            "q": self.q, "k": self.k, "seed": self.seed, "budget": self.budget,
            "h_coarse": self.h_coarse, "h_fine": self.h_fine,
            "init": self.init.to_json(), "best_params": self.best_params.to_json(),
            "best_value": self.best_value, "best_coarse_value": self.best_coarse_value,
            "bound": self.bound, "gap": self.gap, "bound_fault": self.bound_fault,
            "restarts": self.restarts,
            "finalists": [list(f) for f in self.finalists],
            "history": [[v, bool(f)] for v, f in self.history],
        }

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "OptimizationRun":
        return cls(float(data["q"]), int(data["k"]), int(data["seed"]), int(data["budget"]),
                   float(data["h_coarse"]), float(data["h_fine"]), ShapeParams.from_json(data["init"]),
                   ShapeParams.from_json(data["best_params"]), float(data["best_value"]),
                   float(data["best_coarse_value"]), [(float(v), bool(f)) for v, f in data["history"]],
                   int(data.get("restarts", 0)), [tuple(map(float, f)) for f in data.get("finalists", [])])

    @classmethod
    def load(cls, path: str | Path) -> "OptimizationRun":
        return cls.from_json(json.loads(Path(path).read_text()))


class _BudgetExhausted(Exception):
    pass


def _initial_simplex(x0: np.ndarray, steps: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Axis simplex around ``x0`` with randomly signed, jittered steps."""
    n = len(x0)
    signs = rng.choice([-1.0, 1.0], size=n)
    jitter = rng.uniform(0.75, 1.25, size=n)
    simplex = np.tile(x0, (n + 1, 1))
    simplex[1:] += np.diag(signs * jitter * steps)
    return simplex


def _step_sizes(params: ShapeParams, scale: float) -> np.ndarray:
    J = params.J
    steps = [0.05] * (2 * J) + [0.3]
    for cx, cy, r in params.holes:
        steps += [0.1, 0.1, 0.25 * r]
    return scale * np.array(steps)


def minimize(q: float, k: int, init: ShapeParams | None = None, budget: int = 2000, seed: int = 0,
             h_coarse: float = 1 / 32, h_fine: float = 1 / 128, tol: float = 1e-4, n_finalists: int = 4,
             refine_fraction: float = 0.4, relaxed: bool = False,
             resume: OptimizationRun | None = None) -> OptimizationRun:
    """Nelder-Mead over :class:`ShapeParams`, restarting on stagnation.

    The first part of the budget runs at ``h_coarse``; the last
    ``refine_fraction`` continues from the best point at ``h_coarse / 2``,
    where grid noise is smaller. The best ``n_finalists`` distinct points of
    the last stage are then re-evaluated at ``h_fine`` and the lowest fine
    value wins. The run is deterministic for a given seed. ``resume``
    continues an earlier run from its best point in the refinement stage;
    ``budget`` then counts the earlier history too.
    """
    if not 0 < q <= 0.5:
        raise ValueError(f"q must lie in (0, 1/2], got {q}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not 0 <= refine_fraction <= 1:
        raise ValueError("refine_fraction must lie in [0, 1]")
    init = init or ShapeParams.disc()
    if len(init.holes) > k:
        raise ValueError(f"{len(init.holes)} holes exceed the budget k = {k}")
    history: list[tuple[float, bool]] = []
    restarts = 0
    start = init
    if resume is not None:
        history = list(resume.history)
        restarts = resume.restarts
        start = resume.best_params
        init = resume.init
        seed = resume.seed
        if budget <= len(history):
            raise ValueError(f"budget {budget} is already spent by the resumed run ({len(history)} evaluations)")
    dim = len(start.vector())
    if budget <= 0:
        raise OptimizationError("no feasible point found: the evaluation budget is zero", history)
    if budget < 50 * dim and resume is None:
        raise ValueError(f"budget {budget} is below 50 x dimension = {50 * dim}")

    n_coarse = budget - int(round(refine_fraction * budget))
    stages = [(h_coarse, n_coarse), (h_coarse / 2, budget)]
    if resume is not None:
        stages = [(h_coarse / 2, budget)]
    x_best = start.vector()
    points: list[tuple[float, np.ndarray]] = []
    for h, stop_at in stages:
        if len(history) >= stop_at:
            continue
        points = []

        def f(x, h=h, stop_at=stop_at):
            if len(history) >= stop_at:
                raise _BudgetExhausted
            v, ok = objective(start.from_vector(x), q, k, h, relaxed)
            history.append((float(v), bool(ok)))
            if ok:
                points.append((float(v), np.array(x, dtype=float)))
            return v

        scale = 1.0
        try:
            f(x_best)
            while len(history) < stop_at:
                rng = np.random.default_rng([seed, restarts])
                x_from = min(points, key=lambda t: t[0])[1] if points else x_best
                simplex = _initial_simplex(x_from, _step_sizes(start, scale), rng)
                scipy_minimize(f, x_from, method="Nelder-Mead",
                               options={"initial_simplex": simplex, "maxfev": stop_at - len(history),
                                        "xatol": tol, "fatol": tol, "adaptive": True})
                restarts += 1
                scale = max(0.1, scale * 0.5)
        except _BudgetExhausted:
            pass
        if points:
            x_best = min(points, key=lambda t: t[0])[1]
    if not points:
        raise OptimizationError(f"no feasible point found in {len(history)} evaluations", history)

    # distinct finalists by value, then re-scored on the fine grid
    ranked = sorted(points, key=lambda t: t[0])
    chosen: list[tuple[float, np.ndarray]] = []
    for v, x in ranked:
        if all(np.max(np.abs(x - y)) > 1e-3 for _, y in chosen):
            chosen.append((v, x))
        if len(chosen) == n_finalists:
            break
    finalists = []
    for v, x in chosen:
        fine, ok = objective(start.from_vector(x), q, k, h_fine, relaxed)
        finalists.append((v, fine if ok else SENTINEL, x))
    best = min(finalists, key=lambda t: t[1])
    return OptimizationRun(q, k, seed, budget, h_coarse, h_fine, init, start.from_vector(best[2]), best[1], best[0],
                           history, restarts, [(c, fv) for c, fv, _ in finalists])
