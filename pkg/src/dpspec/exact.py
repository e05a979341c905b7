"""Exact extended reals for privacy-loss bookkeeping.

Budgets and divergences in this package are mostly logarithms of rational
likelihood ratios, scaled and summed. :class:`ExactReal` represents values of
the form ``c0 + sum_i c_i * ln(b_i)`` with rational ``c0, c_i`` and pairwise
coprime integer bases ``b_i > 1``. Coprime logarithms are linearly independent
over the rationals, and ``c0 + ln(algebraic)`` vanishes only when both parts
do, so a value is zero iff its normalized form is empty. Every nonzero value
therefore has a sign that interval evaluation at increasing precision will
eventually certify.

Infinity is the float ``math.inf``. Values that cannot be kept exact (e.g.
Renyi divergences of non-integer order) are :class:`Approx`, a float carrying
a rigorous enclosure that can be refined on demand.
"""

from __future__ import annotations

import math
import re
import threading
from fractions import Fraction
from functools import reduce
from typing import Callable, Union

from mpmath import iv, libmp, mp

__all__ = [
    "Approx",
    "ExactReal",
    "INF",
    "Value",
    "bounds",
    "certainly_le",
    "ext_add",
    "ext_mul",
    "format_value",
    "is_inf",
    "parse_value",
    "to_extreal",
    "to_fraction",
]

INF = math.inf

_IV_LOCK = threading.RLock()
_BASE_PREC = 64
_MAX_PREC = 1 << 15
_ABSORB_BITS = 256


def to_fraction(x) -> Fraction:
    """Coerce an int, Fraction, ``"p/q"`` string or finite float to a Fraction.

    Floats are read through their shortest decimal repr, so ``0.1`` becomes
    exactly ``1/10``.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite rational: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, ExactReal) and x.is_rational:
        return x.const
    raise TypeError(f"cannot read {x!r} as a rational")


def _coprime_normalize(terms: dict[int, Fraction]) -> dict[int, Fraction]:
    # Factor refinement: split any two bases sharing a gcd until pairwise coprime.
    terms = {b: c for b, c in terms.items() if b != 1 and c != 0}
    changed = True
    while changed:
        changed = False
        bases = sorted(terms)
        for i, a in enumerate(bases):
            for b in bases[i + 1:]:
                g = math.gcd(a, b)
                if g == 1:
                    continue
                ca, cb = terms.pop(a), terms.pop(b)
                for base, coeff in ((a // g, ca), (g, ca + cb), (b // g, cb)):
                    if base != 1:
                        terms[base] = terms.get(base, Fraction(0)) + coeff
                terms = {k: v for k, v in terms.items() if v != 0}
                changed = True
                break
            if changed:
                break
    return terms


def _endpoints(v):
    lo, hi = v._mpi_
    return mp.make_mpf(lo), mp.make_mpf(hi)


def _frac_gcd(values) -> Fraction:
    nums = reduce(math.gcd, (abs(v.numerator) for v in values))
    dens = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values))
    return Fraction(nums, dens)


class ExactReal:
    """A finite real ``const + sum(coeff * ln(base))`` over pairwise coprime bases."""

    __slots__ = ("const", "logs", "_hash")

    def __init__(self, const=0, logs: dict[int, Fraction] | None = None):
        self.const = to_fraction(const)
        norm = _coprime_normalize(dict(logs or {}))
        self.logs: tuple[tuple[int, Fraction], ...] = tuple(sorted(norm.items()))
        self._hash = None

    @classmethod
    def log(cls, r) -> "ExactReal":
        r = to_fraction(r)
        if r <= 0:
            raise ValueError(f"log of non-positive value {r}")
        return cls(0, {r.numerator: Fraction(1), r.denominator: Fraction(-1)})

    @property
    def is_rational(self) -> bool:
        return not self.logs

    @property
    def is_zero(self) -> bool:
        return self.const == 0 and not self.logs

    def exp_rational(self) -> Fraction | None:
        """``exp(self)`` as a Fraction when it is rational, else None."""
        if self.const != 0 or any(c.denominator != 1 for _, c in self.logs):
            return None
        out = Fraction(1)
        for b, c in self.logs:
            out *= Fraction(b) ** int(c)
        return out

    def bounds(self, prec: int = _BASE_PREC):
        """Outward-rounded enclosure ``(lo, hi)`` as mpmath interval endpoints."""
        with _IV_LOCK:
            saved = iv.prec
            iv.prec = prec
            try:
                v = iv.mpf(self.const.numerator) / self.const.denominator
                for b, c in self.logs:
                    v += iv.log(b) * (iv.mpf(c.numerator) / c.denominator)
                return _endpoints(v)
            finally:
                iv.prec = saved

    def sign(self) -> int:
        if self.is_zero:
            return 0
        if self.is_rational:
            return 1 if self.const > 0 else -1
        prec = _BASE_PREC
        while prec <= _MAX_PREC:
            lo, hi = self.bounds(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise ArithmeticError(f"could not resolve the sign of {self} at {_MAX_PREC} bits")

    # arithmetic -----------------------------------------------------------

    def _combine(self, other: "ExactReal", k: int) -> "ExactReal":
        logs = dict(self.logs)
        for b, c in other.logs:
            logs[b] = logs.get(b, Fraction(0)) + k * c
        return ExactReal(self.const + k * other.const, logs)

    def __add__(self, other):
        if isinstance(other, Approx):
            return NotImplemented
        if is_inf(other):
            return INF
        other = _as_exact(other)
        if other is None:
            return NotImplemented
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Approx):
            return NotImplemented
        if is_inf(other):
            return -INF
        other = _as_exact(other)
        if other is None:
            return NotImplemented
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ExactReal(-self.const, {b: -c for b, c in self.logs})

    def __mul__(self, other):
        if is_inf(other):
            s = self.sign()
            return 0 if s == 0 else math.copysign(INF, s * other)
        if isinstance(other, ExactReal):
            if other.is_rational:
                other = other.const
            elif self.is_rational:
                return other * self.const
            else:
                raise TypeError("product of two logarithmic values is not representable")
        if isinstance(other, Approx):
            return NotImplemented
        try:
            k = to_fraction(other)
        except TypeError:
            return NotImplemented
        return ExactReal(self.const * k, {b: c * k for b, c in self.logs})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExactReal):
            if not other.is_rational:
                raise TypeError("division by a logarithmic value is not representable")
            other = other.const
        if isinstance(other, Approx):
            return NotImplemented
        k = to_fraction(other)
        return self * (1 / k)

    # comparisons ----------------------------------------------------------

    def _cmp(self, other) -> int:
        if isinstance(other, Approx):
            return (float(self) > other) - (float(self) < other)
        if isinstance(other, float) and math.isinf(other):
            return -1 if other > 0 else 1
        other = _as_exact(other)
        if other is None:
            raise TypeError
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, ExactReal):
            # coprime bases are not unique ({6} vs {2, 3}); refine the difference
            return self.const == other.const and (self.logs == other.logs or (self - other).is_zero)
        if isinstance(other, Approx):
            return False
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_rational and self.const == other
        if isinstance(other, float):
            return math.isfinite(other) and self.is_rational and self.const == to_fraction(other)
        return NotImplemented

    def __hash__(self):
        # equal values share const but not necessarily their log bases
        if self._hash is None:
            self._hash = hash(self.const) if not self.logs else hash((self.const, "ln"))
        return self._hash

    def __lt__(self, other):
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __float__(self):
        if self.is_rational:
            return float(self.const)
        lo, hi = self.bounds(80)
        return float((lo + hi) / 2)

    def __bool__(self):
        return not self.is_zero

    # rendering ------------------------------------------------------------

    def _log_term(self) -> tuple[int, Fraction, Fraction] | None:
        """(sign, scale, argument) with ``sign * scale * ln(argument)``, argument > 1."""
        if not self.logs:
            return None
        k = _frac_gcd([c for _, c in self.logs])
        arg = Fraction(1)
        for b, c in self.logs:
            arg *= Fraction(b) ** int(c / k)
        sign = 1
        if arg < 1:
            arg, sign = 1 / arg, -1
        if k.numerator > 1:
            absorbed = arg ** k.numerator
            if max(absorbed.numerator, absorbed.denominator).bit_length() <= _ABSORB_BITS:
                arg, k = absorbed, Fraction(1, k.denominator)
        return sign, k, arg

    def __str__(self):
        term = self._log_term()
        if term is None:
            return str(self.const)
        sign, k, arg = term
        body = f"ln({arg})"
        if k.numerator != 1:
            body = f"{k.numerator}*{body}"
        if k.denominator != 1:
            body = f"{body}/{k.denominator}"
        if self.const == 0:
            return body if sign > 0 else f"-{body}"
        return f"{self.const} {'+' if sign > 0 else '-'} {body}"

    def __repr__(self):
        return f"ExactReal({str(self)!r})"


class Approx(float):
    """A float with a rigorous, refinable enclosure of the true value.

    ``enclose(prec)`` returns mpmath interval endpoints ``(lo, hi)``.
    """

    enclose: Callable[[int], tuple]

    def __new__(cls, enclose: Callable[[int], tuple]):
        lo, hi = enclose(80)
        obj = super().__new__(cls, float((lo + hi) / 2))
        obj.enclose = enclose
        return obj

    def scaled(self, k) -> "Approx":
        """Multiply by a nonnegative rational ``k``, keeping the enclosure rigorous."""
        k = to_fraction(k)
        if k < 0:
            raise ValueError("scale must be nonnegative")

        def enclose(prec):
            lo, hi = self.enclose(prec)
            with _IV_LOCK:
                saved = iv.prec
                iv.prec = prec
                try:
                    kk = iv.mpf(k.numerator) / k.denominator
                    return _endpoints(iv.mpf(lo) * kk)[0], _endpoints(iv.mpf(hi) * kk)[1]
                finally:
                    iv.prec = saved

        return Approx(enclose)

    def upper_fraction(self, prec: int = _BASE_PREC) -> Fraction:
        """A rational upper bound on the true value."""
        _, hi = self.enclose(prec)
        p, q = libmp.to_rational(hi._mpf_)
        return Fraction(int(p), int(q))

    def __repr__(self):
        return f"Approx({float(self)!r})"


Value = Union[ExactReal, Approx, float]


def is_inf(x) -> bool:
    return isinstance(x, float) and not isinstance(x, Approx) and math.isinf(x)


def _as_exact(x) -> ExactReal | None:
    if isinstance(x, ExactReal):
        return x
    if isinstance(x, Approx):
        return None
    try:
        return ExactReal(to_fraction(x))
    except (TypeError, ValueError):
        return None


def to_extreal(x) -> Value:
    """Normalize a user-supplied value to ExactReal, Approx or ``math.inf``."""
    if isinstance(x, (ExactReal, Approx)):
        return x
    if isinstance(x, str):
        return parse_value(x)
    if isinstance(x, float) and math.isinf(x):
        if x < 0:
            raise ValueError("negative infinity is not an extended nonnegative value")
        return INF
    return ExactReal(to_fraction(x))


def ext_add(a, b):
    """Saturating addition: ``inf + a = inf``."""
    if is_inf(a) or is_inf(b):
        return INF
    return to_extreal(a) + to_extreal(b)


def ext_mul(a, b):
    """Saturating product with ``0 * inf = 0``."""
    a, b = to_extreal(a), to_extreal(b)
    if is_inf(a) and is_inf(b):
        return INF
    if is_inf(a):
        a, b = b, a
    if is_inf(b):
        return ExactReal(0) if a == 0 else INF
    if isinstance(a, Approx):
        return a.scaled(to_fraction(b))
    if isinstance(b, Approx):
        return b.scaled(to_fraction(a))
    return a * b


def bounds(x, prec: int = _BASE_PREC):
    """Interval enclosure for any finite value."""
    if isinstance(x, Approx):
        return x.enclose(prec)
    return to_extreal(x).bounds(prec)


def certainly_le(a, b) -> bool:
    """True only when ``a <= b`` is proven; undecided comparisons return False."""
    if is_inf(b):
        return True
    if is_inf(a):
        return False
    if not isinstance(a, Approx) and not isinstance(b, Approx):
        return to_extreal(a) <= to_extreal(b)
    prec = _BASE_PREC
    while prec <= 4096:
        alo, ahi = bounds(a, prec)
        blo, bhi = bounds(b, prec)
        if ahi <= blo:
            return True
        if alo > bhi:
            return False
        prec *= 2
    return False


_RAT = r"[0-9]+(?:/[0-9]+)?"
_LOG_TERM = re.compile(rf"^(?:({_RAT})\*)?ln\(({_RAT})\)(?:/([0-9]+))?$")
_DECIMAL = re.compile(r"^[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?$")


def _parse_term(tok: str) -> ExactReal:
    m = _LOG_TERM.match(tok)
    if m:
        scale = Fraction(m.group(1) or 1) / int(m.group(3) or 1)
        return ExactReal.log(Fraction(m.group(2))) * scale
    if re.fullmatch(_RAT, tok) or _DECIMAL.match(tok):
        return ExactReal(Fraction(tok))
    raise ValueError(f"unparseable value term {tok!r}")


def parse_value(text: str) -> Value:
    """Parse ``"inf"``, ``"3/4"``, ``"0.5"``, ``"ln(3)"``, ``"1/2 + ln(6)/2"`` etc."""
    s = text.strip().replace(" ", "")
    if s.lower() in ("inf", "+inf", "infinity", "∞"):
        return INF
    if not s:
        raise ValueError("empty value")
    if _DECIMAL.match(s):
        return ExactReal(Fraction(s))
    first = 1
    if s[0] in "+-":
        # a leading sign belongs to the first term only
        first, s = (-1 if s[0] == "-" else 1), s[1:]
    total = ExactReal(0)
    for tok, op in zip(*_split_terms(s, first)):
        total = total + (_parse_term(tok) * op)
    return total


def _split_terms(s: str, first: int = 1):
    toks, ops = [], []
    depth, start, op = 0, 0, first
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and s[i - 1] not in "eE":
            toks.append(s[start:i])
            ops.append(op)
            op, start = (1 if ch == "+" else -1), i + 1
    toks.append(s[start:])
    ops.append(op)
    return toks, ops


def format_value(x, digits: int = 6) -> str:
    """Exact rendering with a decimal alongside, e.g. ``"ln(3) ≈ 1.098612"``."""
    if is_inf(x):
        return "inf"
    if isinstance(x, Approx):
        return f"≈ {float(x):.{digits}f}"
    x = to_extreal(x)
    exact = str(x)
    if x.is_rational and x.const.denominator == 1:
        return exact
    return f"{exact} ≈ {float(x):.{digits}f}"
