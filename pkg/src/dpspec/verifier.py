"""Exhaustive checking of a mechanism against a DP specification.

A mechanism satisfies a specification when, for every universe and every
ordered pair of datasets ``(x, x')`` in it,

    d_out(P_x, P_x') <= eps[universe] * d_in(x, x')

with ``0 * inf = 0``. Comparisons are exact where the divergence allows and
otherwise use rigorous enclosures that never round toward "satisfied".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from dpspec.core import DpSpecification, Flavor, input_distance, validate_spec
from dpspec.divergences import Distribution
from dpspec.errors import DomainMismatchError, InvalidSpecError
from dpspec.exact import INF, Approx, ExactReal, Value, certainly_le, ext_mul, format_value, is_inf
from dpspec.mechanisms import Mechanism

__all__ = [
    "VerificationResult",
    "Witness",
    "satisfies",
    "tightest_epsilon",
    "verify_invariant_release",
]

ZERO_TIMES_INF_NOTE = "0 * inf is taken as 0: a zero budget forbids any divergence even at infinite input distance"


@dataclass(frozen=True)
class Witness:
    universe: str
    x: int
    x_prime: int
    lhs: Value
    rhs: Value

    def describe(self) -> str:
        return (
            f"universe {self.universe!r}, pair ({self.x}, {self.x_prime}): "
            f"divergence {format_value(self.lhs)} > allowed {format_value(self.rhs)}"
        )


@dataclass(frozen=True)
class VerificationResult:
    satisfied: bool
    per_universe_tightest: Mapping[str, Value]
    witness: Witness | None = None
    notes: tuple[str, ...] = ()
    fingerprint: str = ""

    def __post_init__(self):
        if (self.witness is None) != self.satisfied:
            raise ValueError("a witness is present exactly when verification fails")


@dataclass
class _Pairs:
    """Lazily computed divergences and distances for ordered dataset pairs."""

    rows: tuple[Distribution, ...]
    flavor: Flavor
    _div: dict = field(default_factory=dict)

    def divergence(self, x: int, y: int) -> Value:
        key = (x, y)
        if key not in self._div:
            self._div[key] = self.flavor.output_divergence(self.rows[x], self.rows[y])
        return self._div[key]

    def distance(self, x: int, y: int) -> Value:
        return input_distance(self.flavor.input_premetric, self.flavor.domain, x, y)


def _bind(mechanism: Mechanism, flavor: Flavor) -> tuple[Distribution, ...]:
    if mechanism.domain is not None and mechanism.domain != flavor.domain:
        raise DomainMismatchError("mechanism and specification are over different domains")
    if len(mechanism.rows) != len(flavor.domain):
        raise DomainMismatchError(
            f"mechanism has {len(mechanism.rows)} rows but the domain has {len(flavor.domain)} datasets"
        )
    return mechanism.rows


def _as_flavor(spec: DpSpecification | Flavor) -> Flavor:
    return spec.flavor if isinstance(spec, DpSpecification) else spec


def _pair_loss(lhs: Value, dist: Value) -> Value:
    """Smallest budget this single pair tolerates (an infimum at infinite distance)."""
    if isinstance(lhs, ExactReal) and lhs.is_zero:
        return ExactReal(0)
    if dist == 0:
        return INF
    if is_inf(dist):
        return ExactReal(0)
    if is_inf(lhs):
        return INF
    if isinstance(lhs, Approx):
        # report an outward-rounded rational so that this budget verifies
        return ExactReal(lhs.upper_fraction()) / dist
    return lhs / dist


def _tightest(pairs: _Pairs, flavor: Flavor) -> dict[str, Value]:
    out: dict[str, Value] = {}
    for universe in flavor.multiverse:
        best: Value = ExactReal(0)
        for x in universe.member_ids:
            for y in universe.member_ids:
                if x == y:
                    continue
                loss = _pair_loss(pairs.divergence(x, y), pairs.distance(x, y))
                if is_inf(loss):
                    best = INF
                    break
                if loss > best:
                    best = loss
            if is_inf(best):
                break
        out[universe.id] = best
    return out


def tightest_epsilon(mechanism: Mechanism, spec: DpSpecification | Flavor) -> dict[str, Value]:
    """Per-universe smallest budget under which ``mechanism`` satisfies the flavor.

    For each universe this is the supremum over ordered pairs of
    ``d_out / d_in``; a pair at input distance 0 with nonzero divergence makes
    it infinite. Any budget in ``spec`` is ignored.
    """
    flavor = _as_flavor(spec)
    return _tightest(_Pairs(_bind(mechanism, flavor), flavor), flavor)


def satisfies(mechanism: Mechanism, spec: DpSpecification) -> VerificationResult:
    """Decide whether ``mechanism`` satisfies ``spec``.

    On failure the witness is the first violating ``(universe, x, x')`` in
    multiverse order, then by dataset id.

    Raises:
        InvalidSpecError: ``validate_spec`` reports violations.
        DomainMismatchError: the mechanism does not fit the domain of ``spec``.
    """
    report = validate_spec(spec)
    if not report.ok:
        raise InvalidSpecError(report)
    flavor = spec.flavor
    pairs = _Pairs(_bind(mechanism, flavor), flavor)
    notes: list[str] = []
    if not flavor.output_divergence.is_exact:
        notes.append("divergence values are enclosures; undecidable comparisons count as violations")
    witness = None
    for universe in flavor.multiverse:
        eps = spec.budget[universe.id]
        for x in universe.member_ids:
            for y in universe.member_ids:
                if x == y:
                    continue
                dist = pairs.distance(x, y)
                if eps == 0 and is_inf(dist) and ZERO_TIMES_INF_NOTE not in notes:
                    notes.append(ZERO_TIMES_INF_NOTE)
                lhs = pairs.divergence(x, y)
                rhs = ext_mul(eps, dist)
                if not certainly_le(lhs, rhs):
                    witness = Witness(universe.id, x, y, lhs, rhs)
                    break
            if witness:
                break
        if witness:
            break
    return VerificationResult(
        satisfied=witness is None,
        per_universe_tightest=_tightest(pairs, flavor),
        witness=witness,
        notes=tuple(notes),
        fingerprint=flavor.fingerprint(),
    )


def verify_invariant_release(
    mechanism: Mechanism, statistic, base: DpSpecification | Flavor, budget=None
) -> VerificationResult:
    """Verify within the universes induced by an invariant statistic.

    The multiverse of ``base`` is replaced by the level sets of ``statistic``,
    so pairs of datasets with different invariant values are never compared.
    ``budget`` applies to every induced universe; when omitted, ``base`` must
    carry a budget that is the same in all of its universes.
    """
    from dpspec.invariants import InvariantStatistic, partition_by_invariant

    flavor = _as_flavor(base)
    if not isinstance(statistic, InvariantStatistic):
        statistic = InvariantStatistic.from_function(flavor.domain, statistic)
    multiverse = partition_by_invariant(flavor.domain, statistic)
    if budget is None:
        if not isinstance(base, DpSpecification):
            raise ValueError("pass a budget or a specification that carries one")
        values = list(base.budget.per_universe.values())
        if any(v != values[0] for v in values[1:]):
            raise ValueError("base budget differs across universes; pass an explicit budget")
        budget = values[0]
    induced = Flavor(flavor.domain, multiverse, flavor.input_premetric, flavor.output_divergence)
    return satisfies(mechanism, induced.with_budget(budget))
