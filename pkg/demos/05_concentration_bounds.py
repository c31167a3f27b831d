#!/usr/bin/env python3
"""How tightly is cumulative attention concentrated around its mean?

Cumulative attention is a sum of independent Bernoulli draws (one per
query), so its tails obey closed-form bounds: a relative-deviation bound
that depends only on the expected total, and an absolute-deviation bound
for polarity-weighted sums that depends on the per-query polarity ranges.
Monte Carlo estimates sit below both, as they must.
"""

import math

from fairrank import BernoulliStream, chernoff_bound, hoeffding_bound, monte_carlo_tail

TRIALS = 200_000

print("relative deviation, unit polarity: P(|S - E| >= delta * E)")
print(f"{'T':>4} {'p':>5} {'E':>6} {'delta':>6} {'empirical':>10} {'bound':>10}")
for T, p in ((20, 0.5), (50, 0.1)):
    stream = BernoulliStream.unit([p] * T)
    expected = T * p
    for delta in (0.5, 1.0, 1.5):
        emp = monte_carlo_tail(stream, [1.0] * T, delta, "relative", TRIALS, seed=1)
        bound = chernoff_bound(expected, delta)
        print(f"{T:>4} {p:>5.2f} {expected:>6.1f} {delta:>6.2f} {emp:>10.5f} {bound:>10.5f}")

print("\nabsolute deviation, signed polarity: P(|S - E| >= delta)")
print(f"{'T':>4} {'delta':>7} {'empirical':>10} {'bound':>10}")
T, p = 30, 0.5
polarities = [1.0 if t % 2 == 0 else -1.0 for t in range(T)]
ranges = tuple((0.0, 1.0) if e > 0 else (-1.0, 0.0) for e in polarities)
stream = BernoulliStream(tuple([p] * T), ranges)
for scale in (0.75, 1.0, 1.5):
    delta = scale * math.sqrt(T)
    emp = monte_carlo_tail(stream, polarities, delta, "absolute", TRIALS, seed=2)
    bound = hoeffding_bound(ranges, delta)
    print(f"{T:>4} {delta:>7.3f} {emp:>10.5f} {bound:>10.5f}")

print("""
The relative bound is a function of the expected total alone; the absolute
bound widens with the number of queries and their polarity ranges. Both
are clipped at 1 where vacuous.""")
