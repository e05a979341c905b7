"""Output divergences between finite probability distributions.

All sums and ratios are exact rationals; a logarithm is taken once at the
end, symbolically, via :class:`~dpspec.exact.ExactReal`. Conventions for
zero mass: outcomes with ``P(t) = 0`` contribute nothing, and ``P(t) > 0``
with ``Q(t) = 0`` makes the divergence infinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from mpmath import iv

from dpspec.errors import NotStochasticError, OutputSpaceMismatchError, ParameterError
from dpspec.exact import _IV_LOCK, INF, Approx, ExactReal, Value, _endpoints, to_extreal, to_fraction

__all__ = [
    "Distribution",
    "DivergenceKind",
    "OutputDivergence",
    "hockey_stick",
    "max_divergence",
    "renyi_divergence",
    "smoothed_max_divergence",
    "total_variation",
]

# Integer Renyi orders up to this stay exact; beyond it the rational sum
# grows too large and an enclosure is computed instead.
EXACT_RENYI_MAX_ORDER = 64


@dataclass(frozen=True)
class Distribution:
    """An exact probability distribution over an ordered finite outcome set."""

    outcomes: tuple
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        probs = tuple(to_fraction(p) for p in self.probs)
        if len(outcomes) != len(probs):
            raise ValueError("outcomes and probs differ in length")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("duplicate outcome labels")
        if any(p < 0 for p in probs):
            raise NotStochasticError("negative probability")
        total = sum(probs, Fraction(0))
        if total != 1:
            raise NotStochasticError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def of(cls, probs: Sequence, outcomes: Sequence | None = None) -> "Distribution":
        """Build from a probability sequence; outcomes default to ``0..n-1``."""
        probs = tuple(probs)
        return cls(tuple(range(len(probs))) if outcomes is None else tuple(outcomes), probs)

    @classmethod
    def from_mapping(cls, probs: Mapping) -> "Distribution":
        return cls(tuple(probs), tuple(probs.values()))

    @classmethod
    def point_mass(cls, outcome, outcomes: Sequence) -> "Distribution":
        return cls(tuple(outcomes), tuple(Fraction(int(o == outcome)) for o in outcomes))

    def __getitem__(self, outcome) -> Fraction:
        return self.probs[self.outcomes.index(outcome)]

    def __len__(self):
        return len(self.outcomes)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs))

    @property
    def support(self) -> tuple:
        return tuple(o for o, p in zip(self.outcomes, self.probs) if p > 0)


def _aligned(P: Distribution, Q: Distribution) -> list[tuple[Fraction, Fraction]]:
    if P.outcomes == Q.outcomes:
        return list(zip(P.probs, Q.probs))
    if set(P.outcomes) != set(Q.outcomes):
        raise OutputSpaceMismatchError(
            f"output sets differ: {sorted(map(str, P.outcomes))} vs {sorted(map(str, Q.outcomes))}"
        )
    q = Q.as_dict()
    return [(p, q[o]) for o, p in zip(P.outcomes, P.probs)]


def _max_ratio(pairs) -> Fraction | float:
    best = Fraction(0)
    for p, q in pairs:
        if p == 0:
            continue
        if q == 0:
            return INF
        best = max(best, p / q)
    return best


def max_divergence(P: Distribution, Q: Distribution) -> Value:
    """``D_inf(P||Q) = max_{t: P(t)>0} ln(P(t)/Q(t))``.

    The maximum ratio is found exactly; the result is ``ln`` of that rational,
    kept symbolic. Returns ``inf`` when P puts mass where Q has none.
    """
    r = _max_ratio(_aligned(P, Q))
    if r == INF:
        return INF
    # r >= 1 always: both sum to one, so some outcome has P(t) >= Q(t) > 0 or Q(t) = 0
    return ExactReal.log(r)


def total_variation(P: Distribution, Q: Distribution) -> Fraction:
    return sum((abs(p - q) for p, q in _aligned(P, Q)), Fraction(0)) / 2


def hockey_stick(P: Distribution, Q: Distribution, eps=0) -> Fraction | Approx:
    """``sum_t max(P(t) - e^eps * Q(t), 0)``.

    Exact (a Fraction) whenever ``e^eps`` is rational, which covers ``eps = 0``
    and every ``eps = ln(r)``; otherwise an :class:`Approx` enclosure.
    """
    pairs = _aligned(P, Q)
    eps = to_extreal(eps)
    if eps == INF:
        return sum((p for p, q in pairs if q == 0), Fraction(0))
    if eps < 0:
        raise ParameterError("eps must be nonnegative")
    s = eps.exp_rational() if isinstance(eps, ExactReal) else None
    if s is not None:
        return sum((max(p - s * q, Fraction(0)) for p, q in pairs), Fraction(0))

    def enclose(prec):
        with _IV_LOCK:
            saved = iv.prec
            iv.prec = prec
            try:
                lo, hi = eps.enclose(prec) if isinstance(eps, Approx) else eps.bounds(prec)
                e_lo, e_hi = iv.exp(iv.mpf(lo)).a, iv.exp(iv.mpf(hi)).b
                total_lo, total_hi = iv.mpf(0), iv.mpf(0)
                for p, q in pairs:
                    pp = iv.mpf(p.numerator) / p.denominator
                    qq = iv.mpf(q.numerator) / q.denominator
                    # larger e^eps gives smaller terms
                    t_hi = pp - e_lo * qq
                    t_lo = pp - e_hi * qq
                    if t_hi.b > 0:
                        total_hi += iv.mpf([0, t_hi.b])
                    if t_lo.a > 0:
                        total_lo += iv.mpf([t_lo.a, t_lo.a])
                return _endpoints(total_lo)[0], _endpoints(total_hi)[1]
            finally:
                iv.prec = saved

    return Approx(enclose)


def smoothed_max_divergence(P: Distribution, Q: Distribution, delta=0) -> Value:
    """Least ``eps >= 0`` with ``hockey_stick(P, Q, eps) <= delta`` (``inf`` if none).

    As a function of ``s = e^eps`` the hockey-stick divergence is continuous,
    nonincreasing and linear between consecutive likelihood ratios, so the
    answer is found by walking the sorted ratios and solving one linear
    equation exactly.
    """
    delta = to_fraction(delta)
    if not 0 <= delta < 1:
        raise ParameterError("delta must lie in [0, 1)")
    pairs = [(p, q) for p, q in _aligned(P, Q) if p > 0]
    stuck = sum((p for p, q in pairs if q == 0), Fraction(0))
    if stuck > delta:
        return INF
    finite = [(p, q, p / q) for p, q in pairs if q > 0]

    def hs(s: Fraction) -> Fraction:
        return stuck + sum((p - s * q for p, q, r in finite if r > s), Fraction(0))

    if hs(Fraction(1)) <= delta:
        return ExactReal(0)
    points = sorted({r for _, _, r in finite if r > 1} | {Fraction(1)}, reverse=True)
    for point in points:
        if hs(point) > delta:
            # hs is linear on the segment just above `point`
            active = [(p, q) for p, q, r in finite if r > point]
            a = stuck + sum((p for p, _ in active), Fraction(0))
            b = sum((q for _, q in active), Fraction(0))
            return ExactReal.log((a - delta) / b)
    raise AssertionError("unreachable: hs(1) > delta was established above")


def _renyi_sum(pairs, alpha: int) -> Fraction | float:
    total = Fraction(0)
    for p, q in pairs:
        if p == 0:
            continue
        if q == 0:
            return INF
        total += p**alpha / q ** (alpha - 1)
    return total


def renyi_divergence(P: Distribution, Q: Distribution, alpha) -> Value:
    """``D_alpha(P||Q) = ln(sum_t P(t)^alpha Q(t)^(1-alpha)) / (alpha - 1)``.

    Exact for integer orders up to ``EXACT_RENYI_MAX_ORDER``; other orders
    return an :class:`Approx` whose enclosure is rigorous.
    """
    alpha = to_fraction(alpha)
    if alpha <= 1:
        raise ParameterError("Renyi order must exceed 1")
    pairs = _aligned(P, Q)
    if any(p > 0 and q == 0 for p, q in pairs):
        return INF
    if all(p == q for p, q in pairs):
        return ExactReal(0)
    if alpha.denominator == 1 and alpha <= EXACT_RENYI_MAX_ORDER:
        a = int(alpha)
        return ExactReal.log(_renyi_sum(pairs, a)) / (a - 1)
    live = [(p, q) for p, q in pairs if p > 0]

    def enclose(prec):
        with _IV_LOCK:
            saved = iv.prec
            iv.prec = prec
            try:
                al = iv.mpf(alpha.numerator) / alpha.denominator
                total = iv.mpf(0)
                for p, q in live:
                    lp = iv.log(iv.mpf(p.numerator) / p.denominator)
                    lq = iv.log(iv.mpf(q.numerator) / q.denominator)
                    total += iv.exp(al * lp + (1 - al) * lq)
                v = iv.log(total) / (al - 1)
                lo, hi = _endpoints(v)
                return max(lo, 0 * lo), hi
            finally:
                iv.prec = saved

    return Approx(enclose)


class DivergenceKind(str, Enum):
    MAX = "max"
    SMOOTHED_MAX = "smoothed-max"
    RENYI = "renyi"
    TV = "tv"


@dataclass(frozen=True)
class OutputDivergence:
    """A choice of output distance, with its parameter fixed.

    ``delta`` belongs to the smoothed max-divergence and ``alpha`` to Renyi;
    each must be present exactly when its kind needs it.
    """

    kind: DivergenceKind
    delta: Fraction | None = None
    alpha: Fraction | None = None

    def __post_init__(self):
        kind = DivergenceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if (self.delta is not None) != (kind is DivergenceKind.SMOOTHED_MAX):
            raise ParameterError(f"delta is required for, and only for, smoothed-max (got kind {kind.value})")
        if (self.alpha is not None) != (kind is DivergenceKind.RENYI):
            raise ParameterError(f"alpha is required for, and only for, renyi (got kind {kind.value})")
        if self.delta is not None:
            d = to_fraction(self.delta)
            if not 0 <= d < 1:
                raise ParameterError("delta must lie in [0, 1)")
            object.__setattr__(self, "delta", d)
        if self.alpha is not None:
            a = to_fraction(self.alpha)
            if a <= 1:
                raise ParameterError("alpha must exceed 1")
            object.__setattr__(self, "alpha", a)

    @classmethod
    def max(cls) -> "OutputDivergence":
        return cls(DivergenceKind.MAX)

    @classmethod
    def smoothed_max(cls, delta) -> "OutputDivergence":
        return cls(DivergenceKind.SMOOTHED_MAX, delta=delta)

    @classmethod
    def renyi(cls, alpha) -> "OutputDivergence":
        return cls(DivergenceKind.RENYI, alpha=alpha)

    @classmethod
    def tv(cls) -> "OutputDivergence":
        return cls(DivergenceKind.TV)

    def __call__(self, P: Distribution, Q: Distribution) -> Value:
        if self.kind is DivergenceKind.MAX:
            return max_divergence(P, Q)
        if self.kind is DivergenceKind.SMOOTHED_MAX:
            return smoothed_max_divergence(P, Q, self.delta)
        if self.kind is DivergenceKind.RENYI:
            return renyi_divergence(P, Q, self.alpha)
        return ExactReal(total_variation(P, Q))

    @property
    def is_exact(self) -> bool:
        """Whether every value of this divergence is an exact ExactReal/inf."""
        if self.kind is DivergenceKind.RENYI:
            return self.alpha.denominator == 1 and self.alpha <= EXACT_RENYI_MAX_ORDER
        return True

    def to_document(self) -> dict:
        doc: dict = {"kind": self.kind.value}
        if self.delta is not None:
            doc["delta"] = str(self.delta)
        if self.alpha is not None:
            doc["alpha"] = str(self.alpha)
        return doc

    @classmethod
    def from_document(cls, doc: Mapping) -> "OutputDivergence":
        return cls(
            doc["kind"],
            delta=None if doc.get("delta") is None else to_fraction(doc["delta"]),
            alpha=None if doc.get("alpha") is None else to_fraction(doc["alpha"]),
        )

    def describe(self) -> str:
        if self.kind is DivergenceKind.SMOOTHED_MAX:
            return f"smoothed-max(delta={self.delta})"
        if self.kind is DivergenceKind.RENYI:
            return f"renyi(alpha={self.alpha})"
        return self.kind.value

