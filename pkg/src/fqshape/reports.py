"""Pass/fail records for the inequality checks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class InequalityReport:
    """One checked inequality ``lhs <relation> rhs``.

    ``margin`` is oriented so that a satisfied inequality has a nonnegative
    margin; ``passed`` is ``margin >= -tolerance``.
    """

    name: str
    label: str
    relation: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    equality: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name, "label": self.label, "relation": self.relation,
            "lhs": _num(self.lhs), "rhs": _num(self.rhs), "margin": _num(self.margin),
            "tolerance": _num(self.tolerance), "passed": self.passed, "equality": self.equality,
        }


def _num(v: float) -> float | None:
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.12g}")


def compare(name: str, label: str, lhs: float, relation: str, rhs: float, tolerance: float,
            equality_tol: float | None = None) -> InequalityReport:
    """Build a report for ``lhs >= rhs`` or ``lhs <= rhs`` with an absolute tolerance.

    ``equality_tol`` (absolute) marks near-equality cases such as the disc.
    """
    if relation == ">=":
        margin = lhs - rhs
    elif relation == "<=":
        margin = rhs - lhs
    else:
        raise ValueError(f"unknown relation {relation!r}")
    eq = equality_tol is not None and abs(lhs - rhs) <= equality_tol
    return InequalityReport(name, label, relation, float(lhs), float(rhs), float(margin), float(tolerance),
                            bool(margin >= -tolerance), bool(eq))


def round_floats(obj):
    """Round every float in a JSON-like tree to 12 significant digits; non-finite values become None."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if hasattr(obj, "item"):       # numpy scalars
        return round_floats(obj.item())
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text: rounded floats, sorted keys, trailing newline."""
    return json.dumps(round_floats(obj), indent=2, sort_keys=True) + "\n"
