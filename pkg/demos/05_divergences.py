"""
Output divergences side by side
===============================
"""

from fractions import Fraction

from dpspec import (Distribution, format_value, hockey_stick, max_divergence, renyi_divergence,
                    smoothed_max_divergence, total_variation)

P = Distribution.of(["3/4", "1/4"])
Q = Distribution.of(["1/4", "3/4"])

print("max", format_value(max_divergence(P, Q)))
print("tv ", total_variation(P, Q), "=", hockey_stick(P, Q, 0))

# Renyi grows with the order and approaches the max-divergence
for alpha in (Fraction(3, 2), 2, 4, 16, 64, 2**20):
    print("renyi", alpha, format_value(renyi_divergence(P, Q, alpha)))

# smoothing by delta buys a smaller epsilon
for delta in ("0", "1/10", "1/4", "1/2"):
    print("smoothed", delta, format_value(smoothed_max_divergence(P, Q, delta)))
