"""
Randomized response, verified exhaustively
==========================================

One binary record, reported truthfully with probability 3/4.
"""

from fractions import Fraction

from dpspec import (Flavor, InputPremetric, Multiverse, OutputDivergence, make_domain,
                    randomized_response, satisfies, tightest_epsilon, format_value)

# the domain: every dataset with a single record drawn from {0, 1}
bit = make_domain([0, 1], 1)
print(bit.datasets)

rr = randomized_response(bit, Fraction(3, 4))
for i, row in enumerate(rr.rows):
    print(i, row.as_dict())

# pure DP: one universe, Hamming distance between datasets, max-divergence between outputs
pure = Flavor(bit, Multiverse.full(bit), InputPremetric.hamming(), OutputDivergence.max())

eps = tightest_epsilon(rr, pure)["full"]
print("tightest budget:", format_value(eps))   # ln(3), kept exact

# at the tightest budget it verifies...
print(satisfies(rr, pure.with_budget(eps)).satisfied)

# ...and at 1.0 it does not; the witness says which pair breaks it
result = satisfies(rr, pure.with_budget(1.0))
print(result.satisfied, result.witness.describe())

# a more truthful report costs more budget
for keep in ("2/3", "3/4", "9/10", "99/100"):
    print(keep, format_value(tightest_epsilon(randomized_response(bit, keep), pure)["full"]))
