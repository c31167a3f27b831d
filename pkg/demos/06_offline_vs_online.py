#!/usr/bin/env python3
"""Online versus offline optimization.

The online engine sees queries one at a time and never revisits a
decision. The offline engine starts from the online solution and runs
block-coordinate descent against the end-of-stream objective. Offline can
never be worse; on tiny instances it provably reaches the joint optimum
(the acceptance suite checks it against full enumeration).
"""

import numpy as np

from fairrank import RerankConfig, rerank_offline, rerank_online
from fairrank.metrics import individual_unfairness
from fairrank.synth import gen_random_instance

rng = np.random.default_rng(42)

print(f"{'instance':>9} {'online':>9} {'offline':>9} {'gain':>7} {'sweeps':>7}")
better = 0
for case in range(10):
    n = int(rng.integers(4, 7))
    K = int(rng.integers(3, min(4, n) + 1))
    dataset, stream = gen_random_instance(n, 2, 3, "signed", seed=case)
    config = RerankConfig(kind="L1", objective="minmax", theta=0.7,
                          k_re=K, k_att=2, k_eval=K, polarity_mode="aware")
    online = rerank_online(dataset, stream, config)
    offline = rerank_offline(dataset, stream, config, max_sweeps=25)
    u_on = individual_unfairness(online.ledger, config.kind, "aware")
    u_off = individual_unfairness(offline.ledger, config.kind, "aware")
    better += u_off < u_on - 1e-12
    gain = (u_on - u_off) / u_on if u_on else 0.0
    print(f"{case:>9} {u_on:9.4f} {u_off:9.4f} {gain:6.1%} {offline.sweeps:>7}")

print(f"""
Offline strictly improved {better}/10 instances and never regressed:
hindsight lets it place early-query attention where late queries will need
it. The gap is the price of ranking online.""")
