#!/usr/bin/env python3
"""Online re-ranking on the two-group binary benchmark.

200 individuals, 16 alternating-polarity queries, near-uniform relevance
(1.01 vs 0.99 raw scores favoring one group per polarity sign). Without
intervention the tie-break hands the same few individuals the top slots
every time. The re-rankers rotate attention while keeping every query's
nDCG@10 above the quality floor theta.
"""

from fairrank import RerankConfig, evaluate_run, rerank_online
from fairrank.metrics import relative_improvement
from fairrank.synth import SynthSpec, gen_synth_binary

dataset, stream = gen_synth_binary(SynthSpec(n=200, T=16, seed=0))

configs = {
    "pass-through": RerankConfig(objective="none"),
    "worst-case (minmax, L1)": RerankConfig(kind="L1", objective="minmax", theta=0.8),
    "worst-case + lex": RerankConfig(kind="L1", objective="minmax-lex", theta=0.8),
    "sum objective (IAA-style)": RerankConfig(kind="L1", objective="minsum", theta=0.8),
}

runs = {name: rerank_online(dataset, stream, cfg) for name, cfg in configs.items()}
baseline = evaluate_run(runs["pass-through"], dataset)

print(f"{'method':>26} {'ind. L1':>9} {'ind. W1':>9} {'group L1':>9} "
      f"{'IAA':>8} {'nDCG@10':>8} {'dL1':>7}")
base_l1 = baseline.panels["agnostic"].individual["L1"]
for name, run in runs.items():
    report = evaluate_run(run, dataset)
    panel = report.panels["agnostic"]
    delta = relative_improvement(base_l1, panel.individual["L1"])
    print(f"{name:>26} {panel.individual['L1']:9.4f} {panel.individual['W1']:9.4f} "
          f"{panel.group['L1']:9.4f} {panel.iaa:8.3f} {report.mean_ndcg:8.4f} "
          f"{delta:6.1%}")

print("""
The worst-case re-ranker collapses the maximum attention-relevance gap by
an order of magnitude (the dL1 column is the relative improvement over
pass-through); the sum objective shrinks the aggregate inequity (IAA
column) hardest. Near-uniform relevance keeps nDCG at 1 throughout, so the
quality constraint never binds here.""")
