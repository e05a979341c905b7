import math
import random
from fractions import Fraction

import pytest

import oracles
from dpspec import (
    INF,
    BudgetMap,
    DataUniverse,
    Distribution,
    DomainMismatchError,
    ExactReal,
    Flavor,
    InputPremetric,
    InvalidSpecError,
    InvariantStatistic,
    Mechanism,
    Multiverse,
    OutputDivergence,
    constant,
    exact_release,
    is_inf,
    make_domain,
    product,
    randomized_response,
    satisfies,
    tightest_epsilon,
    verify_invariant_release,
)

ln = ExactReal.log
BIT = make_domain([0, 1], 1)
RR = randomized_response(BIT, "3/4")


def flavor(domain, multiverse=None, premetric=None, divergence=None):
    return Flavor(
        domain,
        multiverse or Multiverse.full(domain),
        premetric or InputPremetric.hamming(),
        divergence or OutputDivergence.max(),
    )


def test_randomized_response():
    assert tightest_epsilon(RR, flavor(BIT)) == {"full": ln(3)}
    assert satisfies(RR, flavor(BIT).with_budget("ln(3)")).satisfied
    assert satisfies(RR, flavor(BIT).with_budget(INF)).satisfied


def test_witness_on_failure():
    r = satisfies(RR, flavor(BIT).with_budget(1.0))
    assert not r.satisfied
    w = r.witness
    assert (w.universe, w.x, w.x_prime) == ("full", 0, 1)
    assert w.lhs == ln(3) and w.rhs == 1 and w.lhs > w.rhs
    assert "ln(3)" in w.describe()


def test_constant_and_parity():
    d = make_domain([0, 1], 2)
    assert tightest_epsilon(constant(d), flavor(d)) == {"full": 0}
    parity = exact_release(d, lambda ds: sum(ds) % 2)
    assert is_inf(tightest_epsilon(parity, flavor(d))["full"])


def test_invariant_release():
    d = make_domain([0, 1], 2)
    stat = InvariantStatistic.from_function(d, sum, "sum")
    release = exact_release(d, stat)
    r = verify_invariant_release(release, stat, flavor(d), budget=0)
    assert r.satisfied and all(v == 0 for v in r.per_universe_tightest.values())
    assert is_inf(tightest_epsilon(release, flavor(d))["full"])

    noisy = product(release, _rr_on_first_record(d))
    r = verify_invariant_release(noisy, stat, flavor(d), budget="ln(3)")
    assert r.satisfied
    # (0, 1) and (1, 0) are two substitutions apart
    assert r.per_universe_tightest == {"sum=0": 0, "sum=1": ln(3) / 2, "sum=2": 0}


def _rr_on_first_record(d):
    return Mechanism.from_function(d, (0, 1), lambda ds: {ds[0]: Fraction(3, 4), 1 - ds[0]: Fraction(1, 4)})


def test_zero_distance_pairs_force_equal_rows():
    m = InputPremetric.explicit([[0, 0], [1, 0]])
    assert is_inf(tightest_epsilon(RR, flavor(BIT, premetric=m))["full"])
    assert tightest_epsilon(constant(BIT), flavor(BIT, premetric=m))["full"] == 0


def test_infinite_distance_pairs():
    m = InputPremetric.explicit([[0, "inf"], ["inf", 0]])
    assert tightest_epsilon(RR, flavor(BIT, premetric=m))["full"] == 0
    # the infimum 0 is not attained: 0 * inf = 0 forbids any divergence
    r = satisfies(RR, flavor(BIT, premetric=m).with_budget(0))
    assert not r.satisfied and any("0 * inf" in n for n in r.notes)
    assert satisfies(RR, flavor(BIT, premetric=m).with_budget("1/1000000")).satisfied


def test_invalid_spec_and_domain_mismatch():
    bad = flavor(BIT).with_budget(BudgetMap({"other": 1}))
    with pytest.raises(InvalidSpecError):
        satisfies(RR, bad)
    with pytest.raises(DomainMismatchError):
        tightest_epsilon(RR, flavor(make_domain([0, 1], 2)))


def test_renyi_flavor_reports_upper_bound():
    f = flavor(BIT, divergence=OutputDivergence.renyi(Fraction(3, 2)))
    eps = tightest_epsilon(RR, f)["full"]
    assert eps.is_rational
    assert satisfies(RR, f.with_budget(eps)).satisfied
    assert float(eps) == pytest.approx(oracles.renyi(RR[0].probs, RR[1].probs, 1.5), abs=1e-12)


def test_overlapping_universes_are_independent():
    d = make_domain([0, 1], 2)
    rng = random.Random(1)
    m = Mechanism((0, 1, 2), tuple(Distribution.of(r) for r in oracles.random_rows(rng, 4, 3)), d)
    mv = Multiverse((DataUniverse("a", (0, 1, 2)), DataUniverse("b", (1, 2, 3)), DataUniverse("c", (0, 1, 2, 3))))
    eps = tightest_epsilon(m, flavor(d, mv))
    assert eps["a"] <= eps["c"] and eps["b"] <= eps["c"]


def _random_instance(rng):
    d = make_domain([0, 1], 2)
    k = rng.randint(1, 5)
    rows = oracles.random_rows(rng, 4, k, zero_prob=0.2, denom=12)
    return d, rows, Mechanism(tuple(range(k)), tuple(Distribution.of(r) for r in rows), d)


def test_enlarging_a_universe_never_lowers_eps():
    rng = random.Random(7)
    for _ in range(100):
        d, _, m = _random_instance(rng)
        members = sorted(rng.sample(range(4), rng.randint(1, 3)))
        extra = sorted(set(members) | {rng.randrange(4)})
        small = tightest_epsilon(m, flavor(d, Multiverse((DataUniverse("u", tuple(members)),))))["u"]
        big = tightest_epsilon(m, flavor(d, Multiverse((DataUniverse("u", tuple(extra)),))))["u"]
        assert is_inf(big) or (not is_inf(small) and small <= big)


def test_zero_probability_outputs_do_not_change_eps():
    rng = random.Random(8)
    for _ in range(100):
        d, rows, m = _random_instance(rng)
        k = len(rows[0])
        padded = Mechanism(tuple(range(k + 1)), tuple(Distribution.of(list(r) + [0]) for r in rows), d)
        assert tightest_epsilon(m, flavor(d)) == tightest_epsilon(padded, flavor(d))


def test_doubling_distances_halves_eps():
    rng = random.Random(9)
    d = make_domain([0, 1], 2)
    h = [[sum(a != b for a, b in zip(x, y)) for y in d.datasets] for x in d.datasets]
    for _ in range(100):
        _, _, m = _random_instance(rng)
        one = tightest_epsilon(m, flavor(d, premetric=InputPremetric.explicit(h)))["full"]
        two = tightest_epsilon(m, flavor(d, premetric=InputPremetric.explicit([[2 * v for v in r] for r in h])))["full"]
        assert (is_inf(one) and is_inf(two)) or two == one / 2


def test_agrees_with_brute_force_loop():
    rng = random.Random(10)
    d = make_domain([0, 1], 2)
    distance = lambda x, y: oracles.hamming(d[x], d[y])  # noqa: E731
    for _ in range(200):
        _, rows, m = _random_instance(rng)
        budget = rng.choice([0.25, 0.5, 1.0, 1.5, 3.0])
        expected = oracles.brute_tightest(rows, {"full": range(4)}, distance)["full"]
        if not math.isinf(expected) and abs(expected - budget) < 1e-9:
            continue
        ours = satisfies(m, flavor(d).with_budget(budget)).satisfied
        assert ours == oracles.brute_satisfies(rows, {"full": range(4)}, distance, {"full": budget}, tol=1e-9)
