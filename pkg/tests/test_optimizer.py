import json
import math

import numpy as np
import pytest

from fqshape.domain import measure, rasterize, topology
from fqshape.functionals import disc_value, lipschitz_f_q_bound
from fqshape.optimizer import (SENTINEL, OptimizationError, OptimizationRun, ShapeParams, decode, minimize,
                               normalized, objective)

SMALL = dict(h_coarse=1 / 16, h_fine=1 / 32)


def small_init(**kw):
    return ShapeParams.disc(J=2, **kw)


@pytest.fixture(scope="module")
def small_run():
    return minimize(0.45, 0, small_init(), budget=250, seed=3, **SMALL)


def test_decode_disc():
    dec = decode(ShapeParams.disc())
    assert dec.feasible
    assert measure(dec.domain).area == pytest.approx(math.pi, rel=1e-4)


def test_decode_hole():
    dec = decode(ShapeParams.disc(holes=[(0.4, 0.1, 0.2)]))
    assert dec.feasible
    assert topology(rasterize(dec.domain, 1 / 32)).n_complement_bounded == 1


@pytest.mark.parametrize("params, reason", [
    (ShapeParams(1.0, (1.5, 0.0), (0.0, 0.0)), "crosses itself"),
    (ShapeParams.disc(holes=[(0.0, 0.0, 0.01)]), "below r_min"),
    (ShapeParams.disc(holes=[(0.95, 0.0, 0.1)]), "not inside"),
    (ShapeParams(0.0), "a0"),
])
def test_decode_infeasible(params, reason):
    dec = decode(params)
    assert not dec.feasible
    assert reason in dec.reason


def test_stretch_preserves_area_ratio():
    dom = decode(ShapeParams(1.0, (0.0,), (0.0,), math.log(2))).domain
    x0, y0, x1, y1 = dom.bbox()
    assert (x1 - x0) / (y1 - y0) == pytest.approx(4, rel=1e-3)
    assert measure(normalized(dom)).area == pytest.approx(math.pi)


def test_params_vector_round_trip():
    p = ShapeParams(1.0, (0.1, -0.2), (0.05, 0.0), 0.3, ((0.2, 0.1, 0.15),))
    assert p.from_vector(p.vector()) == p
    assert ShapeParams.from_json(json.loads(json.dumps(p.to_json()))) == p
    assert len(p.vector()) == 2 * 2 + 1 + 3


def test_objective_disc():
    v, ok = objective(ShapeParams.disc(), 0.4, 0, 1 / 64)
    assert ok
    assert v == pytest.approx(disc_value(0.4), rel=0.01)


def test_objective_infeasible_sentinel():
    assert objective(ShapeParams(1.0, (1.5,), (0.0,)), 0.45, 0, 1 / 32) == (SENTINEL, False)


def test_objective_relaxed_equals_plain_without_slits():
    p = ShapeParams(1.0, (0.1, 0.0), (0.0, 0.05))
    assert objective(p, 0.45, 0, 1 / 32, relaxed=True) == objective(p, 0.45, 0, 1 / 32)


@pytest.mark.parametrize("kwargs, err", [
    (dict(budget=0), OptimizationError),
    (dict(budget=100), ValueError),
    (dict(q=0.6), ValueError),
    (dict(k=-1), ValueError),
    (dict(init=small_init(holes=[(0.3, 0.0, 0.1)])), ValueError),
])
def test_minimize_rejects(kwargs, err):
    args = dict(q=0.45, k=0, init=small_init(), budget=250) | kwargs
    with pytest.raises(err):
        minimize(**args, **SMALL)


def test_small_run_improves(small_run):
    run = small_run
    assert len(run.history) == 250
    assert run.best_coarse_value <= run.history[0][0]
    assert run.best_value < disc_value(0.45)
    assert len(run.finalists) >= 1
    assert run.best_value == min(f for _, f in run.finalists)


def test_running_best_monotone(small_run):
    rb = small_run.running_best()
    assert np.all(np.diff(rb) <= 0)


def test_small_run_respects_bound(small_run):
    feasible = [v for v, f in small_run.history if f]
    assert min(feasible) >= lipschitz_f_q_bound(0.45, 0) * 0.98
    assert not small_run.bound_fault
    assert small_run.gap == pytest.approx(small_run.best_value - small_run.bound)


def test_deterministic(small_run):
    again = minimize(0.45, 0, small_init(), budget=250, seed=3, **SMALL)
    assert again.dumps() == small_run.dumps()


def test_json_round_trip(small_run, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(small_run.dumps())
    back = OptimizationRun.load(path)
    stored, again = json.loads(small_run.dumps()), json.loads(back.dumps())
    # gap is recomputed from the rounded best value
    assert again.pop("gap") == pytest.approx(stored.pop("gap"), abs=1e-11)
    assert again == stored


def test_resume_continues_history(small_run):
    more = minimize(0.45, 0, budget=300, resume=small_run, **SMALL)
    assert len(more.history) == 300
    assert more.history[:250] == small_run.history
    assert more.seed == small_run.seed
    assert min(v for v, _ in more.history) <= min(v for v, _ in small_run.history)
    with pytest.raises(ValueError, match="already spent"):
        minimize(0.45, 0, budget=250, resume=small_run, **SMALL)


@pytest.mark.slow
def test_hole_budget_probe():
    # with a hole-free start the hole budget only moves the bound, so the runs coincide
    runs = {k: [minimize(0.45, k, small_init(), budget=250, seed=s, **SMALL).best_value for s in range(3)]
            for k in (0, 2)}
    assert min(runs[2]) <= min(runs[0])
    assert lipschitz_f_q_bound(0.45, 2) < lipschitz_f_q_bound(0.45, 0)
