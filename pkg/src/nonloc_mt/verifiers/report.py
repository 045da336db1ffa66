"""Verification reports: per-statement status, measured constants, evidence rows."""
from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass, field

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"
SIGMA_MARGIN = 3.0


def compare(lhs: float, rhs: float, sigma: float = 0.0, k: float = SIGMA_MARGIN,
            stochastic: bool = False) -> str:
    """Status of ``lhs <= rhs`` given a combined uncertainty ``sigma``.

    Deterministic values (``sigma`` is a quadrature error estimate) hold when
    the excess is within ``k * sigma``. For Monte Carlo values the check
    holds only if ``lhs + k sigma <= rhs``, fails if ``lhs - k sigma > rhs``
    and is inconclusive when the error bar straddles the bound.
    """
    if math.isnan(lhs) or math.isnan(rhs):
        return INCONCLUSIVE
    if not stochastic or sigma == 0:
        return HOLDS if lhs <= rhs + k * sigma else FAILS
    if lhs + k * sigma <= rhs:
        return HOLDS
    if lhs - k * sigma > rhs:
        return FAILS
    return INCONCLUSIVE


def combine(statuses) -> str:
    statuses = list(statuses)
    if FAILS in statuses:
        return FAILS
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return HOLDS


def _jsonable(x):
    if isinstance(x, float):
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _jsonable(x.item())
    return x


def _emit(v, level, out):
    pad = "  " * level
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        items = list(v.items())
        for i, (k, x) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _emit(x, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, list):
        if all(not isinstance(x, (dict, list)) for x in v):
            out.append("[")
            for i, x in enumerate(v):
                _emit(x, level, out)
                if i < len(v) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for i, x in enumerate(v):
            out.append(pad + "  ")
            _emit(x, level + 1, out)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(v, bool) or v is None:
        out.append(json.dumps(v))
    elif isinstance(v, float):
        out.append(format(v, ".17g"))
    elif isinstance(v, int):
        out.append(str(v))
    else:
        out.append(json.dumps(str(v)))


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    out = []
    _emit(_jsonable(obj), 0, out)
    return "".join(out) + "\n"


def fmt6(v) -> str:
    if isinstance(v, numbers.Real) and not isinstance(v, bool):
        return format(float(v), ".6g")
    return str(v)


@dataclass
class VerificationReport:
    statement_id: str
    status: str = HOLDS
    measured_constants: dict = field(default_factory=dict)
    evidence: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add(self, param, lhs, rhs, status, sigma=0.0, **extra) -> str:
        """Record an evidence row ``lhs <= rhs``; returns the row's status."""
        margin = rhs - lhs if (math.isfinite(rhs) or math.isfinite(lhs)) else 0.0
        row = {"param": param, "lhs": float(lhs), "rhs": float(rhs), "margin": float(margin),
               "sigma": float(sigma), "status": status}
        row.update(extra)
        self.evidence.append(row)
        return status

    def check(self, param, lhs, rhs, sigma=0.0, stochastic=False, **extra) -> str:
        return self.add(param, lhs, rhs, compare(lhs, rhs, sigma, stochastic=stochastic),
                        sigma, **extra)

    def finalize(self, extra_statuses=()) -> "VerificationReport":
        self.status = combine([r["status"] for r in self.evidence] + list(extra_statuses))
        return self

    @property
    def ok(self) -> bool:
        return self.status == HOLDS

    def failing(self) -> list:
        return [r for r in self.evidence if r["status"] != HOLDS]

    def to_dict(self) -> dict:
        return {"statement_id": self.statement_id, "status": self.status,
                "measured_constants": self.measured_constants, "evidence": self.evidence,
                "config": self.config, "notes": self.notes}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_text(self) -> str:
        lines = [f"statement: {self.statement_id}", f"status:    {self.status}"]
        if self.measured_constants:
            lines.append("measured constants:")
            width = max(len(k) for k in self.measured_constants)
            for k, v in self.measured_constants.items():
                lines.append(f"  {k.ljust(width)}  {fmt6(v)}")
        if self.evidence:
            cols = ["param", "lhs", "rhs", "margin", "status"]
            rows = [[fmt6(r[c]) if c != "param" else str(r[c]) for c in cols] for r in self.evidence]
            widths = [max(len(c), *(len(row[i]) for row in rows)) for i, c in enumerate(cols)]
            lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
            for row in rows:
                lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"
