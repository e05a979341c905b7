"""
Invariants and the universes they induce
========================================

An exact total is published with no noise. Protection then only makes
sense among datasets that agree on the total.
"""

from dpspec import (Flavor, InputPremetric, InvariantStatistic, Mechanism, Multiverse,
                    OutputDivergence, exact_release, format_value, invariant_margin_report,
                    make_domain, partition_by_invariant, product, tightest_epsilon,
                    verify_invariant_release)

people = make_domain([0, 1], 3)          # three yes/no records
total = InvariantStatistic.from_function(people, sum, "total")

universes = partition_by_invariant(people, total)
for u in universes:
    print(u.id, [people[i] for i in u.member_ids])

published = exact_release(people, total)
pure = Flavor(people, Multiverse.full(people), InputPremetric.hamming(), OutputDivergence.max())

# over the whole domain the exact total is not private at all
print(format_value(tightest_epsilon(published, pure)["full"]))

# within each universe it leaks nothing
scoped = verify_invariant_release(published, total, pure, budget=0)
print(scoped.satisfied, {u: format_value(e) for u, e in scoped.per_universe_tightest.items()})

# add a noisy answer about the first person on top of the total
noisy_first = Mechanism.from_function(people, (0, 1), lambda ds: {ds[0]: "3/4", 1 - ds[0]: "1/4"})
release = product(published, noisy_first)
result = verify_invariant_release(release, total, pure, budget="ln(3)")
for u, eps in result.per_universe_tightest.items():
    print(u, format_value(eps))

# what crosses universes is exactly what the total gives away
report = invariant_margin_report(release, total)
print({pair: format_value(v) for pair, v in report.cross_minima.items()})
