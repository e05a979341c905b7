"""
Spending a budget
=================

Two releases on the same data add up, as long as they share a flavor.
"""

from dpspec import (BudgetLedger, CompositionRefusedError, Flavor, InputPremetric, Multiverse,
                    OutputDivergence, allocate, check_composition_bound, compose, format_value,
                    make_domain, product, randomized_response, tightest_epsilon)

bit = make_domain([0, 1], 1)
pure = Flavor(bit, Multiverse.full(bit), InputPremetric.hamming(), OutputDivergence.max())

rr34 = randomized_response(bit, "3/4")
rr23 = randomized_response(bit, "2/3")

# releasing both independently
joint = product(rr34, rr23)
print(format_value(tightest_epsilon(joint, pure)["full"]))      # ln(6)

# the ledger gets the same number by addition alone
ledger = BudgetLedger.open(pure)
ledger = compose(ledger, "first release", pure.with_budget("ln(3)"))
ledger = compose(ledger, "second release", pure.with_budget("ln(2)"))
print(format_value(ledger.total["full"]))

# the verifier agrees with the ledger here: zero slack
for universe, lhs, rhs, slack in check_composition_bound(rr34, rr23, pure).rows:
    print(universe, format_value(lhs), format_value(rhs), slack)

# budgets measured under another flavor are refused, not converted
tv = Flavor(bit, Multiverse.full(bit), InputPremetric.hamming(), OutputDivergence.tv())
try:
    compose(ledger, "tv release", tv.with_budget("1/4"))
except CompositionRefusedError as exc:
    print("refused:", exc)

# splitting a total across three projects, exactly
for project, share in allocate(ledger.total, [("census", 2), ("survey", 1), ("admin", 1)]):
    print(project, format_value(share["full"]))
