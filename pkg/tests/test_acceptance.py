"""The twelve acceptance criteria, each printing one pass/fail line."""
import math
import time

import numpy as np
import pytest

from fqshape import cli, families
from fqshape.domain import measure
from fqshape.functionals import disc_value, evaluate, verify_auxiliary, verify_saint_venant
from fqshape.optimizer import ShapeParams, minimize
from fqshape.parallel import check_nagy, inner_parallel_approximants, nagy_slope_jumps, concavity_tolerance
from fqshape.torsion import parallel_trial_lower, rectangle_oracle, richardson_T, torsion_bounds

from helpers import CASES, evaluated, record

CHAIN_FAMILIES = ["disc", "annulus", "square", "rectangle_10", "rectangle_100", "slit_disc_4", "slit_disc_8",
                  "slit_disc_16", "slit_disc_32", "k_hole_disc_3"]
ALL_FAMILIES = list(CASES)


@pytest.fixture(scope="module")
def disc_256():
    dom = families.disc()
    richardson_T(dom, 1 / 64)                # warm the compiled kernels
    t0 = time.perf_counter()
    rt = richardson_T(dom, 1 / 256)
    return rt, time.perf_counter() - t0


def test_01_disc_torsion(disc_256):
    rt, seconds = disc_256
    err = abs(rt.T - math.pi / 8) / (math.pi / 8)
    ok = err < 0.002 and seconds < 30
    record(1, ok, f"disc T = {rt.T:.7f} vs pi/8 = {math.pi / 8:.7f}, error {err:.4%}, {seconds:.1f} s at h = 1/256")
    assert err < 0.002
    assert seconds < 30


def test_02_disc_functional(disc_256):
    rt, _ = disc_256
    F = evaluate(measure(families.disc()), rt.T, 0.5).F_q
    err = abs(F - math.sqrt(2) / 2) / (math.sqrt(2) / 2)
    record(2, err < 0.005, f"disc F_1/2 = {F:.6f} vs sqrt(2)/2, error {err:.4%}")
    assert err < 0.005


def test_03_thin_rectangles():
    ramp = [10, 25, 50, 100]
    table = families.run_sequence("rectangle", "a", ramp, q=0.5)
    F = table.column("F_q")
    T = table.column("T")
    oracle = np.array([rectangle_oracle(a, 1.0) for a in ramp])
    oracle_err = np.abs(T - oracle) / oracle
    limit = 3 ** -0.5
    err = abs(F[-1] - limit) / limit
    ok = table.verdicts["F_strictly_decreasing"] and err < 0.01 and oracle_err.max() < 0.01
    record(3, ok, f"rectangle F_1/2 {np.round(F, 5).tolist()}, a=100 off 3^-1/2 by {err:.3%}, "
                  f"max T error vs series {oracle_err.max():.3%}")
    assert table.verdicts["F_strictly_decreasing"]
    assert err < 0.01
    assert oracle_err.max() < 0.01


def test_04_parallel_trial_equality():
    ev = evaluated("disc")
    lb = parallel_trial_lower(ev.prof)
    err = abs(lb - math.pi / 8) / (math.pi / 8)
    record(4, err < 0.01, f"disc parallel trial bound {lb:.6f} vs pi/8, error {err:.4%}")
    assert err < 0.01


def test_05_bound_chain():
    lines = []
    ok = True
    for name in CHAIN_FAMILIES:
        ev = evaluated(name)
        b = torsion_bounds(ev.prof, ev.m, ev.k)
        polya_ok, parallel_ok = b.chain_holds(ev.rt.T, 0.02)
        ok &= polya_ok and parallel_ok
        lines.append(f"{name}: {b.T_polya_lb:.4g} <= {b.T_parallel_lb:.4g} <= {ev.rt.T:.4g}"
                     f"{'' if polya_ok and parallel_ok else ' FAILED'}")
    record(5, ok, "; ".join(lines))
    assert ok


def test_06_saint_venant():
    worst = 0.0
    ok = True
    for name in ALL_FAMILIES:
        ev = evaluated(name)
        r = verify_saint_venant(ev.m, ev.rt.T)
        ok &= r.passed
        worst = max(worst, r.lhs * 8 * math.pi)
    disc = evaluated("disc")
    ratio = disc.rt.T / disc.m.area ** 2 * 8 * math.pi
    disc_ok = abs(ratio - 1) < 0.005
    record(6, ok and disc_ok, f"max 8 pi T/|Omega|^2 over {len(ALL_FAMILIES)} members = {worst:.5f}, "
                              f"disc {ratio:.5f}")
    assert ok
    assert disc_ok


def test_07_nagy_concavity():
    failures = [n for n in ALL_FAMILIES if not check_nagy(evaluated(n).prof).passed]
    flat = {}
    for name in ("disc", "annulus"):
        prof = evaluated(name).prof
        keep = prof.retained
        jumps = nagy_slope_jumps(prof)[keep[:-2] & keep[1:-1] & keep[2:]]
        flat[name] = (float(np.abs(jumps).max()), concavity_tolerance(prof))
    flat_ok = all(j <= tol for j, tol in flat.values())
    record(7, not failures and flat_ok,
           f"failures {failures}; |slope jump| disc {flat['disc'][0]:.2e} (tol {flat['disc'][1]:.2e}), "
           f"annulus {flat['annulus'][0]:.2e} (tol {flat['annulus'][1]:.2e})")
    assert not failures
    assert flat_ok


def test_08_bonnesen():
    failures = []
    for name in ALL_FAMILIES:
        ev = evaluated(name)
        if not verify_auxiliary(ev.m, ev.prof.rho, ev.k)[0].passed:
            failures.append(name)
    disc = evaluated("disc")
    b = verify_auxiliary(disc.m, disc.prof.rho, 0)[0]
    near = abs(b.lhs - math.pi) < 0.01 * math.pi and abs(b.rhs - math.pi) < 0.01 * math.pi
    record(8, not failures and near, f"failures {failures}; disc k=0: {b.lhs:.5f} <= {b.rhs:.5f}")
    assert not failures
    assert near


def test_09_slit_disc_degeneration():
    table = families.run_sequence("slit_disc", "n", [4, 8, 16, 32], q=0.5)
    T, F, P, H1 = (table.column(c) for c in ("T", "F_q", "perimeter", "h1"))
    drop = 1 - F[-1] / F[0]
    p_spread = (P.max() - P.min()) / P.mean()
    ok = (table.verdicts["T_strictly_decreasing"] and drop >= 0.30 and p_spread < 0.01
          and bool(np.all(np.diff(H1) > 0)))
    record(9, ok, f"T {np.round(T, 5).tolist()}, F_1/2 drops {drop:.1%}, P spread {p_spread:.2e}, "
                  f"H1 {np.round(H1, 3).tolist()}")
    assert table.verdicts["T_strictly_decreasing"]
    assert drop >= 0.30
    assert p_spread < 0.01
    assert np.all(np.diff(H1) > 0)


def test_10_inner_parallel_perimeter():
    tab = inner_parallel_approximants(families.radial_slit_disc(0.9), [0.02, 0.04, 0.06, 0.08, 0.1], 1 / 256)
    target = 2 * math.pi + 1.8
    err = abs(tab.perimeter_limit - target) / target
    record(10, err < 0.02, f"P(Omega(t)) -> {tab.perimeter_limit:.5f} vs 2 pi + 1.8 = {target:.5f}, error {err:.3%}")
    assert err < 0.02


def test_11_optimizer_sanity():
    run = minimize(0.45, 0, ShapeParams.disc(), budget=2000, seed=7)
    disc = disc_value(0.45)
    improvement = 1 - run.best_value / disc
    floor = run.bound * 0.98
    lowest = min(v for v, f in run.history if f)
    ok = improvement >= 0.05 and lowest >= floor
    record(11, ok, f"best F_0.45 = {run.best_value:.5f}, disc {disc:.5f}, improvement {improvement:.2%}; "
                   f"lowest feasible {lowest:.5f} >= {floor:.5f}")
    assert improvement >= 0.05
    assert lowest >= floor
    assert not run.bound_fault


COMMANDS = {
    "compute": ["compute", "--family", "disc", "--q", "0.5", "--h", "1/64"],
    "verify": ["verify", "--family", "annulus"],
    "profile": ["profile", "--family", "square", "--levels", "0.05,0.1", "--minkowski", "0.2,0.1,0.05"],
    "sweep": ["sweep", "--family", "wiggly_disc", "--ramp", "0.05,0.1,0.15,0.2"],
    "optimize": ["optimize", "--q", "0.45", "--budget", "250", "--modes", "2", "--h-coarse", "1/16",
                 "--h-fine", "1/32", "--seed", "5"],
}


def test_12_determinism(tmp_path, capsys):
    differing = []
    for name, argv in COMMANDS.items():
        outs = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            code = cli.main(argv + ["--out", str(out)])
            assert code == 0, name
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    capsys.readouterr()
    record(12, not differing, f"byte-identical reruns of {', '.join(COMMANDS)}; differing: {differing}")
    assert not differing
