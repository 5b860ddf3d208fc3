"""Command-line entry point.

    fqshape compute  --family disc --q 0.5 --h 1/256
    fqshape verify   --domain shape.json --k 1
    fqshape profile  --family annulus --levels 0.02,0.04,0.06
    fqshape sweep    --family rectangle --aspect 10..100 --q 0.5
    fqshape optimize --q 0.45 --k 0 --budget 2000 --seed 7

Every command writes its artifacts into the output directory (``--out``,
else ``$FQSHAPE_OUT``, else ``./fqshape-out``) and prints the main JSON
document on stdout. Exit codes: 0 all checks pass, 1 an inequality or
bound check failed, 2 bad input, 3 solver or search failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

OUT_ENV = "FQSHAPE_OUT"
DEFAULT_OUT = "fqshape-out"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3

log = logging.getLogger("fqshape")

# parameter varied by `sweep` when --vary is not given
SWEEP_PARAM = {
    "disc": "radius", "square": "side", "rectangle": "a", "thin_triangle": "aspect", "annulus": "r",
    "slit_disc": "n", "radial_slit_disc": "length", "wiggly_disc": "amplitude", "k_hole_disc": "k",
    "two_discs": "gap", "channel_join": "eps",
}
INTEGER_PARAMS = {"n", "k", "frequency", "sides"}


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    params: dict = field(default_factory=dict)
    domain_path: str | None = None
    q: float = 0.5
    k: int | None = None
    h: float | None = None
    rel_tol: float = 0.02
    cg_tol: float = 1e-8
    seed: int = 0
    out: Path = Path(DEFAULT_OUT)
    threads: int = 1

    def source(self) -> dict:
        if self.domain_path:
            return {"domain": Path(self.domain_path).name}
        return {"family": self.family, "params": dict(sorted(self.params.items()))}


# ---------------------------------------------------------------------------
# argument parsing

def number(text: str) -> float:
    """Parse a decimal or a fraction such as ``1/256``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def positive(text: str) -> float:
    v = number(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _scalar(text: str):
    try:
        return int(text)
    except ValueError:
        return number(text)


def key_value(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), _scalar(v)


def number_list(text: str) -> list[float]:
    return [number(p) for p in text.split(",") if p.strip()]


def ramp(text: str, steps: int) -> list[float]:
    """``a..b`` (geometric, ``steps`` points) or a comma list."""
    if ".." in text:
        lo, hi = (number(p) for p in text.split("..", 1))
        if not (lo > 0 and hi > lo):
            raise InputError(f"ramp {text!r} needs 0 < start < end")
        if steps < 2:
            raise InputError("a ramp needs at least 2 steps")
        return [lo * (hi / lo) ** (i / (steps - 1)) for i in range(steps)]
    return number_list(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fqshape", description="Perimeter-torsion functional laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, q_default=0.5):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--family", help="named family (disc, annulus, rectangle, slit_disc, ...)")
        src.add_argument("--domain", help="domain JSON file (outer / holes / slits)")
        sp.add_argument("--set", dest="params", action="append", type=key_value, default=[],
                        metavar="KEY=VALUE", help="family parameter, repeatable")
        sp.add_argument("--q", type=number, default=q_default)
        sp.add_argument("--k", type=int, default=None, help="hole budget (default: holes found in the domain)")
        sp.add_argument("--h", type=positive, default=None, help="grid spacing, fractions allowed")
        sp.add_argument("--rel-tol", type=positive, default=0.02, help="relative tolerance of the checks")
        sp.add_argument("--cg-tol", type=positive, default=1e-8, help="relative residual target of the solver")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("compute", help="measures, torsional rigidity and F_q"))
    common(sub.add_parser("verify", help="run the inequality suite"))
    sp = sub.add_parser("profile", help="inner parallel set profile as CSV")
    common(sp)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--levels", type=number_list, default=None, help="t values for inner parallel approximants")
    sp.add_argument("--minkowski", type=number_list, default=None, help="decreasing tube radii r")
    sp.add_argument("--field", action="store_true", help="also write the torsion function as CSV")
    sp = sub.add_parser("sweep", help="evaluate a family along a parameter ramp")
    common(sp)
    sp.add_argument("--vary", default=None, help="parameter to ramp")
    sp.add_argument("--ramp", default=None, help="a..b or v1,v2,...")
    sp.add_argument("--aspect", default=None, help="shorthand ramp of the aspect ratio, e.g. 10..100")
    sp.add_argument("--steps", type=int, default=4)
    sp = sub.add_parser("optimize", help="search for shapes with small F_q")
    common(sp, q_default=0.45)
    sp.add_argument("--budget", type=int, default=2000)
    sp.add_argument("--modes", type=int, default=8, help="Fourier modes J")
    sp.add_argument("--holes", type=int, default=0, help="circular holes in the initial shape")
    sp.add_argument("--h-coarse", type=positive, default=1 / 32)
    sp.add_argument("--h-fine", type=positive, default=1 / 128)
    sp.add_argument("--relaxed", action="store_true", help="optimize the upper relaxed value")
    sp.add_argument("--resume", default=None, help="continue from a run artifact")
    return p


def config_from(args) -> RunConfig:
    out = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    if not 0 < args.q <= 0.5:
        raise InputError(f"--q must lie in (0, 1/2], got {args.q:g}")
    if args.k is not None and args.k < 0:
        raise InputError(f"--k must be nonnegative, got {args.k}")
    if args.threads < 1:
        raise InputError("--threads must be at least 1")
    return RunConfig(args.command, args.family, dict(args.params), args.domain, args.q, args.k, args.h,
                     args.rel_tol, args.cg_tol, args.seed, Path(out), args.threads)


# ---------------------------------------------------------------------------
# helpers

def _pow2_below(x: float) -> float:
    return 2.0 ** math.floor(math.log2(x))


def load_domain(cfg: RunConfig):
    """Return ``(domain, h)``; ``h`` follows the family policy unless given."""
    from .domain import PlanarDomain, clearance
    from .families import FamilySpec
    from .schema import SchemaError

    if cfg.domain_path:
        try:
            data = json.loads(Path(cfg.domain_path).read_text())
        except OSError as exc:
            raise InputError(f"cannot read {cfg.domain_path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{cfg.domain_path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
        try:
            dom = PlanarDomain.from_json(data)
        except SchemaError as exc:
            raise InputError(str(exc)) from None
        if cfg.h:
            return dom, cfg.h
        x0, y0, x1, y1 = dom.bbox()
        return dom, _pow2_below(min(1 / 64, clearance(dom) / 8, min(x1 - x0, y1 - y0) / 16))
    if not cfg.family:
        raise InputError("give --family or --domain")
    spec = FamilySpec(cfg.family, cfg.params)
    dom = spec.domain()
    return dom, cfg.h or spec.resolution()


def write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def measure_json(m) -> dict:
    return {"area": m.area, "perimeter": m.perimeter, "boundary_h1": m.boundary_h1,
            "slit_length": m.slit_length, "pk_lower": m.pk_lower, "pk_upper": m.pk_upper}


def torsion_json(rt) -> dict:
    return {"T": rt.T, "T_coarse": rt.T_coarse, "T_fine": rt.T_fine, "h": rt.h, "observed_change": rt.observed_change,
            "fine_residual": rt.fine.residual_norm, "fine_iterations": rt.fine.iterations}


# ---------------------------------------------------------------------------
# commands

def cmd_compute(cfg: RunConfig, args) -> int:
    from .domain import measure, rasterize, topology
    from .functionals import evaluate
    from .reports import dumps
    from .torsion import richardson_T

    dom, h = load_domain(cfg)
    m = measure(dom)
    topo = topology(rasterize(dom, h))
    k = topo.n_complement_bounded if cfg.k is None else cfg.k
    rt = richardson_T(dom, h, cfg.cg_tol)
    fv = evaluate(m, rt.T, cfg.q, k)
    doc = {"command": "compute", "source": cfg.source(), "h": h, "q": cfg.q, "k": k,
           "measure": measure_json(m),
           "topology": {"n_components": topo.n_components, "n_complement_bounded": topo.n_complement_bounded},
           "torsion": torsion_json(rt), "functional": fv.to_json()}
    text = dumps(doc)
    write(cfg, "compute.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    from .domain import measure, rasterize, topology
    from .functionals import (evaluate, verify_auxiliary, verify_F_half_bounds, verify_isoperimetric,
                              verify_polya, verify_saint_venant)
    from .parallel import check_boundL, check_nagy, distance_field, profile
    from .reports import dumps
    from .schema import validate_report_json
    from .torsion import SolverError, richardson_T, torsion_bounds

    dom, h = load_domain(cfg)
    m = measure(dom)
    mask = rasterize(dom, h)
    topo = topology(mask)
    k = topo.n_complement_bounded if cfg.k is None else cfg.k
    prof = profile(distance_field(mask), alpha=topo.n_complement_bounded)
    tol = cfg.rel_tol
    reports = [verify_isoperimetric(m), *verify_auxiliary(m, prof.rho, k, tol), check_nagy(prof),
               *check_boundL(prof, m, k, tol)]
    doc = {"command": "verify", "source": cfg.source(), "h": h, "q": cfg.q, "k": k, "rho": prof.rho,
           "alpha": prof.alpha, "measure": measure_json(m)}
    code = EXIT_OK
    try:
        rt = richardson_T(dom, h, cfg.cg_tol)
    except SolverError as exc:
        doc["error"] = str(exc)
        code = EXIT_SOLVER
    else:
        fv = evaluate(m, rt.T, cfg.q, k)
        bounds = torsion_bounds(prof, m, k)
        reports += [verify_saint_venant(m, rt.T, tol), *verify_polya(m, rt.T, prof.rho, k, tol),
                    *verify_F_half_bounds(fv, k, tol), *bounds.chain_reports(rt.T, tol)]
        doc["torsion"] = torsion_json(rt)
        doc["functional"] = fv.to_json()
        doc["bounds"] = {"T_parallel_lb": bounds.T_parallel_lb, "T_polya_lb": bounds.T_polya_lb, "D_k": bounds.D_k}
    doc["reports"] = [r.to_json() for r in reports]
    doc["all_pass"] = code == EXIT_OK and all(r.passed for r in reports)
    validate_report_json(json.loads(dumps(doc)))
    text = dumps(doc)
    write(cfg, "verify.json", text)
    sys.stdout.write(text)
    for r in reports:
        if not r.passed:
            log.error("%s failed: %g %s %g (margin %g, tolerance %g)", r.name, r.lhs, r.relation, r.rhs,
                      r.margin, r.tolerance)
    if code:
        return code
    return EXIT_OK if doc["all_pass"] else EXIT_FAIL


def cmd_profile(cfg: RunConfig, args) -> int:
    from .domain import measure, rasterize, topology
    from .parallel import check_nagy, distance_field, inner_parallel_approximants, minkowski_estimates, profile
    from .reports import dumps
    from .torsion import solve_torsion

    dom, h = load_domain(cfg)
    margin = max(args.minkowski) * 1.5 if args.minkowski else None
    mask = rasterize(dom, h, margin)
    topo = topology(mask)
    field_ = distance_field(mask)
    prof = profile(field_, args.samples, alpha=topo.n_complement_bounded)
    nagy = check_nagy(prof)
    write(cfg, "profile.csv", prof.to_csv())
    doc = {"command": "profile", "source": cfg.source(), "h": h, "rho": prof.rho, "alpha": prof.alpha,
           "samples": len(prof.t), "low_confidence": int(prof.low_confidence.sum()),
           "coarea_defect": prof.coarea_defect(), "nagy": nagy.to_json(), "measure": measure_json(measure(dom))}
    if args.levels:
        tab = inner_parallel_approximants(dom, args.levels, h)
        write(cfg, "approximants.csv", tab.to_csv())
        doc["approximants"] = {"perimeter_limit": tab.perimeter_limit, "reference": tab.reference}
    if args.minkowski:
        est = minkowski_estimates(mask, args.minkowski, field_)
        doc["minkowski"] = {"r": est.r.tolist(), "M": est.M.tolist(), "SM": est.SM.tolist(),
                            "inner": est.inner.tolist(), "M_limit": est.M_limit, "SM_limit": est.SM_limit,
                            "inner_limit": est.inner_limit}
    if args.field:
        write(cfg, "torsion_field.csv", solve_torsion(mask, cfg.cg_tol).field_csv())
    text = dumps(doc)
    write(cfg, "profile.json", text)
    sys.stdout.write(text)
    return EXIT_OK if nagy.passed else EXIT_FAIL


def cmd_sweep(cfg: RunConfig, args) -> int:
    from .families import FamilySpec, run_sequence
    from .reports import dumps

    if not cfg.family:
        raise InputError("sweep needs --family")
    vary = args.vary or SWEEP_PARAM.get(cfg.family)
    text = args.ramp
    if args.aspect:
        if cfg.family not in ("rectangle", "thin_triangle"):
            raise InputError("--aspect applies to rectangle and thin_triangle")
        vary, text = SWEEP_PARAM[cfg.family], args.aspect
    if not vary or not text:
        raise InputError("sweep needs --ramp (and --vary for this family)")
    values = ramp(text, args.steps)
    if vary in INTEGER_PARAMS:
        values = [int(round(v)) for v in values]
        if len(set(values)) != len(values):
            raise InputError(f"ramp {text!r} repeats integer values of {vary}")
    FamilySpec(cfg.family, {**cfg.params, vary: values[0]}).domain()    # fail early on bad names
    h_max = cfg.h or 1 / 64
    table = run_sequence(cfg.family, vary, values, cfg.q, cfg.k, cfg.params, h_max=h_max,
                         rel_tol=cfg.cg_tol, threads=cfg.threads)
    write(cfg, "sweep.csv", table.to_csv())
    doc = {"command": "sweep", "source": cfg.source(), "vary": vary, "values": values, "q": cfg.q,
           "k": cfg.k, "h_max": h_max, "rows": len(table.rows), "verdicts": table.verdicts, "error": table.error}
    out = dumps(doc)
    write(cfg, "sweep.json", out)
    sys.stdout.write(out)
    return EXIT_SOLVER if table.error else EXIT_OK


def cmd_optimize(cfg: RunConfig, args) -> int:
    import csv
    import io

    from .optimizer import OptimizationError, OptimizationRun, ShapeParams, minimize

    k = 0 if cfg.k is None else cfg.k
    resume = None
    if args.resume:
        try:
            resume = OptimizationRun.load(args.resume)
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"cannot resume from {args.resume}: {exc}") from None
    if args.modes < 1:
        raise InputError("--modes must be at least 1")
    holes = [(0.5 * math.cos(2 * math.pi * i / args.holes), 0.5 * math.sin(2 * math.pi * i / args.holes), 0.1)
             for i in range(args.holes)]
    init = ShapeParams.disc(args.modes, holes)
    try:
        run = minimize(cfg.q, k, init, args.budget, cfg.seed, args.h_coarse, args.h_fine,
                       relaxed=args.relaxed, resume=resume)
    except OptimizationError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER
    text = run.dumps()
    write(cfg, "optimize.json", text)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("evaluation", "value", "feasible", "running_best"))
    for i, ((v, ok), best) in enumerate(zip(run.history, run.running_best())):
        w.writerow((i, f"{v:.12g}", int(ok), f"{best:.12g}"))
    write(cfg, "history.csv", buf.getvalue())
    sys.stdout.write(text)
    return EXIT_FAIL if run.bound_fault else EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "profile": cmd_profile, "sweep": cmd_sweep,
            "optimize": cmd_optimize}


def _cap_threads(n: int) -> None:
    # only effective before numpy and numba are first imported
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ[var] = str(n)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:       # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from(args)
        if "numpy" not in sys.modules:
            _cap_threads(cfg.threads)
        from .domain import GeometryError, ResolutionError
        from .torsion import SolverError
        try:
            return COMMANDS[cfg.command](cfg, args)
        except (GeometryError, ResolutionError) as exc:
            raise InputError(str(exc)) from None
        except SolverError as exc:
            print(f"fqshape: solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        except ValueError as exc:
            raise InputError(str(exc)) from None
    except InputError as exc:
        print(f"fqshape: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
