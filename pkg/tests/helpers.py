"""Cached evaluations shared by the test modules."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from fqshape.domain import measure, rasterize, topology
from fqshape.families import FamilySpec
from fqshape.parallel import distance_field, profile
from fqshape.torsion import richardson_T

CASES = {
    "disc": FamilySpec("disc"),
    "annulus": FamilySpec("annulus"),
    "square": FamilySpec("square"),
    "rectangle_10": FamilySpec("rectangle", {"a": 10.0}),
    "rectangle_100": FamilySpec("rectangle", {"a": 100.0}),
    "slit_disc_4": FamilySpec("slit_disc", {"n": 4}),
    "slit_disc_8": FamilySpec("slit_disc", {"n": 8}),
    "slit_disc_16": FamilySpec("slit_disc", {"n": 16}),
    "slit_disc_32": FamilySpec("slit_disc", {"n": 32}),
    "k_hole_disc_3": FamilySpec("k_hole_disc", {"k": 3}),
    "radial_slit_disc": FamilySpec("radial_slit_disc", {"length": 0.9}),
    "thin_triangle": FamilySpec("thin_triangle", {"aspect": 10.0}),
    "wiggly_disc": FamilySpec("wiggly_disc", {"amplitude": 0.2}),
    "two_discs": FamilySpec("two_discs"),
    "channel_join": FamilySpec("channel_join", {"eps": 0.05}),
}


@dataclass(frozen=True, eq=False)
class Evaluated:
    spec: FamilySpec
    h: float
    m: object
    mask: object
    topo: object
    field: object
    prof: object
    rt: object

    @property
    def k(self) -> int:
        return self.topo.n_complement_bounded


@lru_cache(maxsize=None)
def evaluated(name: str) -> Evaluated:
    spec = CASES[name]
    dom = spec.domain()
    h = spec.resolution()
    mask = rasterize(dom, h)
    topo = topology(mask)
    field = distance_field(mask)
    prof = profile(field, alpha=topo.n_complement_bounded)
    return Evaluated(spec, h, measure(dom), mask, topo, field, prof, richardson_T(dom, h))


ACCEPTANCE_LINES: list[str] = []


def record(number: int, passed: bool, text: str) -> None:
    line = f"acceptance {number:2d} {'PASS' if passed else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
