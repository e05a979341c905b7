"""
Five Safes assessments with DP evidence attached
================================================
"""

from dpspec import (Flavor, InputPremetric, Multiverse, OutputDivergence, assess, attach_dp,
                    make_domain, map_to_ci, preset, randomized_response, satisfies)

for kind in ("open-data", "physical-enclave", "virtual-enclave", "synthetic-with-validation"):
    for regime in preset(kind):
        labels = {d.value: s.label.value for d, s in regime.safety.items()}
        print(f"{regime.name:<52} {map_to_ci(regime).recipient:<15} {labels}")

# verify a release and attach the result to the public-facing regime
bit = make_domain([0, 1], 1)
spec = Flavor(bit, Multiverse.full(bit), InputPremetric.hamming(), OutputDivergence.max()).with_budget("ln(3)")
result = satisfies(randomized_response(bit, "3/4"), spec)

(open_data,) = preset("open-data")
with_dp = attach_dp(open_data, result)

# people/projects/settings are untouched; the evidence sits on data and outputs only
print(with_dp.people == open_data.people, [e.target.value for e in with_dp.dp_evidence])
print(assess(with_dp).render_text())
