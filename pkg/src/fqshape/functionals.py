"""The scale-free functional F_q = P T^q / |Omega|^(2q + 1/2) and its inequality suite."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import MeasureReport
from .reports import InequalityReport, compare
from .torsion import polya_denominator

SOLVER_REL_TOL = 0.02
CLOSED_FORM_TOL = 1e-9
ISOPERIMETRIC_EQ = 1e-4
SAINT_VENANT_EQ = 0.005
SAINT_VENANT = 1 / (8 * math.pi)
ISOPERIMETRIC = 2 * math.sqrt(math.pi)


@dataclass(frozen=True)
class FunctionalValue:
    q: float
    k: int
    F_q: float
    F_qk_lower: float
    F_qk_upper: float
    measure: MeasureReport
    T: float

    def to_json(self) -> dict:
        return {"q": self.q, "k": self.k, "F_q": self.F_q, "F_qk_lower": self.F_qk_lower,
                "F_qk_upper": self.F_qk_upper, "T": self.T}


def _scale(m: MeasureReport, T: float, q: float) -> float:
    return T ** q / m.area ** (2 * q + 0.5)


def evaluate(m: MeasureReport, T: float, q: float, k: int = 0) -> FunctionalValue:
    """F_q from a measure report and a torsional rigidity.

    The relaxed value replaces ``P`` by the relaxed perimeter, which is only
    bracketed by ``[H^1, P + 2 * slit length]``; both ends are returned.
    """
    if not 0 < q <= 0.5:
        raise ValueError(f"q must lie in (0, 1/2], got {q}")
    if not T > 0:
        raise ValueError(f"torsional rigidity must be positive, got {T}")
    if not m.area > 0:
        raise ValueError(f"area must be positive, got {m.area}")
    if k < 0:
        raise ValueError(f"hole budget k must be nonnegative, got {k}")
    s = _scale(m, T, q)
    return FunctionalValue(q, int(k), m.perimeter * s, m.pk_lower * s, m.pk_upper * s, m, float(T))


def disc_value(q: float) -> float:
    """Closed-form F_q of a disc: ``2 sqrt(pi) (8 pi)^-q``."""
    return ISOPERIMETRIC * (8 * math.pi) ** (-q)


# ---------------------------------------------------------------------------
# checks


def verify_isoperimetric(m: MeasureReport) -> InequalityReport:
    lhs = m.perimeter / math.sqrt(m.area)
    return compare("isoperimetric", "isoperimetric", lhs, ">=", ISOPERIMETRIC, CLOSED_FORM_TOL * ISOPERIMETRIC,
                   equality_tol=ISOPERIMETRIC_EQ * ISOPERIMETRIC)


def verify_saint_venant(m: MeasureReport, T: float, rel_tol: float = SOLVER_REL_TOL) -> InequalityReport:
    lhs = T / m.area ** 2
    return compare("saint_venant", "saint_venant", lhs, "<=", SAINT_VENANT, rel_tol * SAINT_VENANT,
                   equality_tol=SAINT_VENANT_EQ * SAINT_VENANT)


def verify_polya(m: MeasureReport, T: float, rho: float, k: int, rel_tol: float = SOLVER_REL_TOL) -> list[InequalityReport]:
    """``T / |Omega|^3 >= 1 / (3 D^2)`` in its slit form and its boundary-measure form.

    Slit form: ``D = P + 2 * slit length + 2 pi (k-1) rho``.
    Boundary form: ``D = 2 H^1 - P + 2 pi (k-1) rho``.
    For k < 1 the hole term is dropped, which is the k = 1 form.
    """
    lhs = T / m.area ** 3
    out = []
    for name, p_eff in (("polya_slit_form", m.perimeter + 2 * m.slit_length),
                        ("polya_boundary_form", 2 * m.boundary_h1 - m.perimeter)):
        D = polya_denominator(p_eff, rho, k)
        rhs = 1 / (3 * D * D)
        out.append(compare(name, name, lhs, ">=", rhs, rel_tol * rhs))
    return out


def f_half_bound(m: MeasureReport, k: int) -> float:
    """Lower bound on F_1/2: ``3^-1/2 P / (2 H^1 - P)`` for k <= 1, ``3^-1/2 P / (2 H^1 + (k-2) P)`` otherwise."""
    if k <= 1:
        return m.perimeter / (math.sqrt(3) * (2 * m.boundary_h1 - m.perimeter))
    return m.perimeter / (math.sqrt(3) * (2 * m.boundary_h1 + (k - 2) * m.perimeter))


def f_q_bound(m: MeasureReport, q: float, k: int) -> float:
    """Lower bound on F_q: the F_1/2 bound times ``(8 pi)^(1/2 - q)``.

    Without slits this is ``(8 pi)^(1/2-q) / sqrt(3)`` for k <= 1 and
    ``(8 pi)^(1/2-q) / (sqrt(3) k)`` for k > 1.
    """
    return (8 * math.pi) ** (0.5 - q) * f_half_bound(m, k)


def lipschitz_f_q_bound(q: float, k: int) -> float:
    """The slit-free value of :func:`f_q_bound`, which depends on q and k alone."""
    return (8 * math.pi) ** (0.5 - q) / (math.sqrt(3) * max(k, 1))


def verify_F_half_bounds(values: FunctionalValue, k: int, rel_tol: float = SOLVER_REL_TOL) -> list[InequalityReport]:
    m = values.measure
    F_half = m.perimeter * _scale(m, values.T, 0.5)
    rhs = f_half_bound(m, k)
    out = [compare("f_half_lower", "f_half_lower", F_half, ">=", rhs, rel_tol * rhs)]
    if values.q != 0.5:
        rhs_q = f_q_bound(m, values.q, k)
        out.append(compare("f_q_lower", "f_q_lower", values.F_q, ">=", rhs_q, rel_tol * rhs_q))
    return out


def verify_auxiliary(m: MeasureReport, rho: float, k: int, rel_tol: float = SOLVER_REL_TOL) -> list[InequalityReport]:
    """Bonnesen-type area bound ``|Omega| <= [2 H^1 - P + pi (k-1) rho] rho`` and ``2 pi rho <= P``."""
    rhs = (2 * m.boundary_h1 - m.perimeter + math.pi * (k - 1) * rho) * rho
    bonn = compare("bonnesen", "bonnesen", m.area, "<=", rhs, rel_tol * m.area, equality_tol=0.01 * m.area)
    inr = compare("inradius_perimeter", "inradius_perimeter", 2 * math.pi * rho, "<=", m.perimeter,
                  rel_tol * m.perimeter, equality_tol=0.01 * m.perimeter)
    return [bonn, inr]
