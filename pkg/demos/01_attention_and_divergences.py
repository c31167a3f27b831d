#!/usr/bin/env python3
"""A first tour: position-bias attention, the cumulative ledger, and the
three divergence measures.

Six individuals answer four queries. Attention falls off as 1/log2(rank+1)
down to a cutoff; relevance is a probability distribution per query. The
ledger accumulates both, and each divergence compares an individual's
cumulative attention distribution against their cumulative relevance
distribution.
"""

import numpy as np

from fairrank import (
    Assignment,
    AttentionModel,
    Dataset,
    DivergenceKind,
    Ledger,
    QueryEvent,
    attention_weights,
    ideal_ranking,
    ledger_divergence,
    normalize_relevance,
)

rng = np.random.default_rng(0)

# -- the attention model -------------------------------------------------------
print("attention weights for 6 positions, cutoff 4:")
w = attention_weights(6, cutoff=4)
for j, wj in enumerate(w, start=1):
    print(f"  position {j}: {wj:.4f}")
print(f"  (sums to {w.sum():.12f}; positions past the cutoff get exactly 0)\n")

# -- a small dataset and stream ------------------------------------------------
ids = tuple(f"doc{k}" for k in range(6))
dataset = Dataset.single_group(ids)
attention = AttentionModel(cutoff=4)
ledger = Ledger(dataset, components=1)

for t in range(1, 5):
    raw = dict(zip(ids, rng.random(6).tolist()))
    query = QueryEvent(f"q{t}", t, (1.0,), normalize_relevance(raw))
    # rank by relevance: the "system" ranking
    ledger.update(query, Assignment(ideal_ranking(query)), attention)

# -- reading the ledger ---------------------------------------------------------
print("after 4 relevance-ranked queries:")
print(f"{'individual':>10} {'cum attn':>9} {'cum rel':>9} {'L1':>7} {'L2var':>8} {'W1':>7}")
for ind in ids:
    mean_a, _ = ledger.moments(ind, "attention")
    mean_r, _ = ledger.moments(ind, "relevance")
    values = [
        ledger_divergence(ledger, ind, kind)
        for kind in (DivergenceKind.L1, DivergenceKind.L2VAR, DivergenceKind.W1)
    ]
    print(f"{ind:>10} {mean_a[0]:9.4f} {mean_r[0]:9.4f} "
          f"{values[0]:7.4f} {values[1]:8.4f} {values[2]:7.4f}")

print("""
Ranking purely by relevance concentrates attention at the top: individuals
who often rank first accrue far more attention than relevance (positive L1
gap), the tail accrues less, and the W1 column shows the mismatch between
the full per-query value profiles, not just the totals.""")
