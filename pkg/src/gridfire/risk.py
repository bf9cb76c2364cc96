"""Dollar costing of scenario impacts, per-line risk and percentile classes."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

from .errors import EmptyInput, OrphanScenario
from .impact import ScenarioImpact
from .ingest import Topology

logger = logging.getLogger(__name__)

CLASS_COLORS = {
    "red": "#d62728",
    "yellow": "#ffdd57",
    "green": "#2ca02c",
    "white": "#ffffff",
}


def to_cents(amount) -> int:
    """Dollars (any real) to integer cents, rounding half away from zero."""
    d = Decimal(repr(amount)) if isinstance(amount, float) else Decimal(amount)
    return int((d * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    whole, frac = divmod(abs(cents), 100)
    return f"{sign}{whole}.{frac:02d}"


@dataclass(frozen=True)
class CostModel:
    env_cost_per_acre: float = 500.0
    line_cost_per_mile: float = 250_000.0
    structure_cost: float = 904_210.0

    def __post_init__(self):
        for name in ("env_cost_per_acre", "line_cost_per_mile", "structure_cost"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ScenarioCost:
    scenario_id: int
    env_cost: int        # cents
    line_cost: int       # cents
    structure_cost: int  # cents

    @property
    def total(self) -> int:
        return self.env_cost + self.line_cost + self.structure_cost


@dataclass(frozen=True)
class LineRisk:
    branch_id: int
    risk: int  # cents
    risk_class: str


def _times(quantity: float, unit_cost: float) -> int:
    q = Decimal(repr(float(quantity)))
    return int((q * Decimal(to_cents(unit_cost))).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def scenario_cost(impact: ScenarioImpact, model: CostModel) -> ScenarioCost:
    """Environment + line rebuild + structure losses, in integer cents."""
    return ScenarioCost(
        scenario_id=impact.scenario_id,
        env_cost=_times(impact.burned_acres, model.env_cost_per_acre),
        line_cost=_times(impact.affected_miles, model.line_cost_per_mile),
        structure_cost=int(impact.destroyed_structures) * to_cents(model.structure_cost),
    )


def aggregate_line_risk(costs, ignitions, policy: str = "max", branch_ids=None) -> list[tuple[int, int]]:
    """Per-branch risk in cents from the totals of the scenarios ignited on it.

    ``branch_ids`` lists every branch to report; branches without any
    scenario get risk 0 and a warning.
    """
    if policy not in ("max", "mean"):
        raise ValueError(f"unknown aggregation policy {policy!r}")
    branch_of = {p.scenario_id: p.branch_id for p in ignitions}
    groups: dict[int, list[int]] = {}
    for cost in costs:
        if cost.scenario_id not in branch_of:
            raise OrphanScenario(f"scenario {cost.scenario_id} has no ignition point")
        groups.setdefault(branch_of[cost.scenario_id], []).append(cost.total)
    all_ids = sorted(set(groups) | set(branch_ids or ()))
    out = []
    for bid in all_ids:
        totals = groups.get(bid)
        if not totals:
            logger.warning("branch %d has no ignition scenarios; risk set to 0", bid)
            out.append((bid, 0))
        elif policy == "max":
            out.append((bid, max(totals)))
        else:
            out.append((bid, _round_fraction(Fraction(sum(totals), len(totals)))))
    return out


def _round_fraction(f: Fraction) -> int:
    # half away from zero
    q, r = divmod(abs(f.numerator), f.denominator)
    if 2 * r >= f.denominator:
        q += 1
    return q if f >= 0 else -q


def percentile(sorted_values, pct: int) -> Fraction:
    """Linear-interpolation percentile with rank ``pct/100 * (N - 1)``.

    Evaluated in exact rational arithmetic so threshold ties are decided
    without rounding error.
    """
    n = len(sorted_values)
    rank = Fraction(pct, 100) * (n - 1)
    lo = rank.numerator // rank.denominator
    frac = rank - lo
    a = Fraction(sorted_values[lo])
    if frac == 0:
        return a
    return a + frac * (Fraction(sorted_values[lo + 1]) - a)


def thresholds(values) -> tuple[Fraction, Fraction, Fraction]:
    v = sorted(values)
    return percentile(v, 50), percentile(v, 80), percentile(v, 90)


def classify(risks) -> list[LineRisk]:
    """Red above the 90th percentile, yellow above the 80th, green above the
    50th, white otherwise. Values equal to a threshold take the lower class.
    """
    risks = list(risks)
    if not risks:
        raise EmptyInput("cannot classify an empty set of line risks")
    t50, t80, t90 = thresholds([r for _, r in risks])
    out = []
    for bid, r in risks:
        if r > t90:
            cls = "red"
        elif r > t80:
            cls = "yellow"
        elif r > t50:
            cls = "green"
        else:
            cls = "white"
        out.append(LineRisk(bid, r, cls))
    return out


def heatmap_geojson(topology: Topology, line_risks: list[LineRisk]) -> str:
    by_id = {lr.branch_id: lr for lr in line_risks}
    features = []
    for branch in sorted(topology.branches, key=lambda b: b.branch_id):
        lr = by_id.get(branch.branch_id)
        if lr is None:
            raise ValueError(f"branch {branch.branch_id} has not been classified")
        a, b = topology.endpoints(branch)
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[a.lon, a.lat], [b.lon, b.lat]]},
            "properties": {
                "branch_id": branch.branch_id,
                "from_bus": branch.from_bus,
                "to_bus": branch.to_bus,
                "risk_usd": _RawNumber(format_cents(lr.risk)),
                "risk_class": lr.risk_class,
                "color": CLASS_COLORS[lr.risk_class],
            },
        })
    doc = {"type": "FeatureCollection", "features": features}
    return _dumps(doc) + "\n"


class _RawNumber(str):
    """A pre-formatted JSON number emitted verbatim."""


def _dumps(obj, indent=0) -> str:
    # json.dumps cannot emit fixed-point decimals, so numbers in
    # _RawNumber are spliced in unquoted.
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, _RawNumber):
        return str(obj)
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(k)}: {_dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}" if items else "{}"
    if isinstance(obj, list):
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(json.dumps(x) for x in obj) + "]"
        items = [pad + _dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]" if items else "[]"
    return json.dumps(obj)


def emit_heatmap(topology: Topology, line_risks: list[LineRisk], path) -> None:
    Path(path).write_text(heatmap_geojson(topology, line_risks), encoding="utf-8", newline="\n")
