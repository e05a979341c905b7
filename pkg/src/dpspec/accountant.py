"""Budget arithmetic within a single flavor: composition and allocation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from dpspec._schema import validate_document
from dpspec.core import BudgetMap, DpSpecification, Flavor
from dpspec.divergences import DivergenceKind
from dpspec.errors import CompositionRefusedError, ParameterError
from dpspec.exact import INF, ExactReal, Value, bounds, ext_add, format_value, is_inf, to_extreal, to_fraction
from dpspec.mechanisms import Mechanism, product
from dpspec.verifier import tightest_epsilon

__all__ = [
    "BudgetLedger",
    "CompositionReport",
    "allocate",
    "check_composition_bound",
    "compose",
    "ledger_from_document",
    "ledger_to_document",
]

SLACK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BudgetLedger:
    """Running total of budgets spent under one flavor."""

    fingerprint: str
    universes: tuple[str, ...]
    entries: tuple[tuple[str, BudgetMap], ...] = ()

    @classmethod
    def open(cls, flavor: Flavor | DpSpecification) -> "BudgetLedger":
        flavor = flavor.flavor if isinstance(flavor, DpSpecification) else flavor
        return cls(flavor.fingerprint(), flavor.multiverse.ids)

    @property
    def total(self) -> BudgetMap:
        totals: dict[str, Value] = {u: ExactReal(0) for u in self.universes}
        for _, budget in self.entries:
            for u in self.universes:
                totals[u] = ext_add(totals[u], budget[u])
        return BudgetMap(totals)


def compose(ledger: BudgetLedger, label: str, budget: BudgetMap | DpSpecification, fingerprint: str | None = None):
    """Append a budget, returning a new ledger whose total adds per universe.

    Pass either a DpSpecification (its flavor supplies the fingerprint) or a
    BudgetMap together with the fingerprint of the flavor it was spent under.

    Raises:
        CompositionRefusedError: the flavors differ. Budgets measured in
            different flavors are not comparable, so nothing is approximated.
    """
    if isinstance(budget, DpSpecification):
        fingerprint, budget = budget.fingerprint(), budget.budget
    if fingerprint is None:
        raise TypeError("a bare BudgetMap needs the fingerprint of its flavor")
    if fingerprint != ledger.fingerprint:
        raise CompositionRefusedError(
            f"cannot compose {label!r}: flavor {fingerprint} differs from the ledger's {ledger.fingerprint}"
        )
    missing = [u for u in ledger.universes if u not in budget.per_universe]
    if missing:
        raise ParameterError(f"budget {label!r} has no entry for universes {missing}")
    return BudgetLedger(ledger.fingerprint, ledger.universes, ledger.entries + ((label, budget),))


def allocate(total: BudgetMap, weights: Sequence[tuple[str, object]]) -> list[tuple[str, BudgetMap]]:
    """Split ``total`` across projects in proportion to nonnegative rational weights.

    Shares are exact, so they add back up to ``total``. An infinite total
    gives every positively weighted project an infinite share.
    """
    ws = [(label, to_fraction(w)) for label, w in weights]
    if any(w < 0 for _, w in ws):
        raise ParameterError("weights must be nonnegative")
    weight_sum = sum((w for _, w in ws), Fraction(0))
    if weight_sum == 0:
        raise ParameterError("at least one weight must be positive")
    out = []
    for label, w in ws:
        share = {}
        for u, eps in total.items():
            if is_inf(eps):
                share[u] = INF if w > 0 else ExactReal(0)
            else:
                share[u] = to_extreal(eps) * (w / weight_sum)
        out.append((label, BudgetMap(share)))
    return out


@dataclass(frozen=True)
class CompositionReport:
    """``rows`` hold ``(universe, lhs, rhs, slack)`` with ``lhs`` the product's budget."""

    rows: tuple[tuple[str, Value, Value, float], ...]
    notes: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return all(slack >= -SLACK_TOLERANCE for *_, slack in self.rows)


def _slack(lhs: Value, rhs: Value) -> float:
    if is_inf(rhs):
        return 0.0 if is_inf(lhs) else INF
    if is_inf(lhs):
        return -INF
    diff = to_extreal(rhs) - to_extreal(lhs) if not _approx(lhs, rhs) else None
    if diff is not None:
        return float(diff)
    # lower end of rhs minus upper end of lhs: never overstates the slack
    return float(bounds(rhs)[0] - bounds(lhs)[1])


def _approx(*values) -> bool:
    return any(type(v) is not ExactReal and not is_inf(v) for v in values)


def check_composition_bound(m1: Mechanism, m2: Mechanism, flavor: Flavor | DpSpecification) -> CompositionReport:
    """Compare ``eps*(m1 x m2)`` with ``eps*(m1) + eps*(m2)`` per universe."""
    flavor = flavor.flavor if isinstance(flavor, DpSpecification) else flavor
    notes = []
    if flavor.output_divergence.kind is not DivergenceKind.MAX:
        notes.append(
            f"additive composition is only established here for max-divergence; "
            f"{flavor.output_divergence.describe()} is reported for information"
        )
    joint = tightest_epsilon(product(m1, m2), flavor)
    a, b = tightest_epsilon(m1, flavor), tightest_epsilon(m2, flavor)
    rows = []
    for u in flavor.multiverse.ids:
        lhs, rhs = joint[u], ext_add(a[u], b[u])
        rows.append((u, lhs, rhs, _slack(lhs, rhs)))
    return CompositionReport(tuple(rows), tuple(notes))


def ledger_to_document(ledger: BudgetLedger) -> dict:
    return {
        "fingerprint": ledger.fingerprint,
        "universes": list(ledger.universes),
        "entries": [{"label": label, "budget": b.to_document()} for label, b in ledger.entries],
        "total": ledger.total.to_document(),
    }


def ledger_from_document(doc: Mapping) -> BudgetLedger:
    """Rebuild a ledger; the stored total must agree with the entries."""
    validate_document(doc, "ledger")
    ledger = BudgetLedger(
        doc["fingerprint"],
        tuple(doc["universes"]),
        tuple((e["label"], BudgetMap(e["budget"])) for e in doc["entries"]),
    )
    stored = BudgetMap(doc["total"])
    if any(stored[u] != ledger.total[u] for u in ledger.universes):
        raise ParameterError("ledger total does not match the sum of its entries")
    return ledger


def load_ledger(path: str | Path) -> BudgetLedger:
    with open(path) as fh:
        return ledger_from_document(json.load(fh))


def describe_budget(budget: BudgetMap) -> dict[str, str]:
    return {u: format_value(v) for u, v in budget.items()}
