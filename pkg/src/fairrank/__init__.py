"""Distribution- and polarity-aware amortized fair ranking.

A ranking allocates attention by position; over a stream of queries each
individual accrues a cumulative attention distribution and a cumulative
relevance distribution. This package measures unfairness as divergence
between the two (worst-case across individuals or groups), re-ranks each
incoming query under an exact quality-constrained assignment solver to
shrink that divergence, weights everything by per-query polarity so that
harmful attention counts against an individual rather than for it, and
ships concentration bounds, synthetic benchmarks, and a verification
harness around the whole pipeline.
"""

from .assign import (
    MatchResult,
    bottleneck_with_quality,
    brute_force,
    constrained_min_sum,
    hungarian_min_cost,
    lexicographic_refine,
    max_dcg_matching,
)
from .bounds import BernoulliStream, chernoff_bound, hoeffding_bound, monte_carlo_tail
from .core import (
    Assignment,
    AttentionModel,
    Dataset,
    Ledger,
    QueryEvent,
    attention_weights,
    dcg_at_k,
    ideal_ranking,
    ledger_update,
    ndcg_at_k,
    normalize_relevance,
)
from .divergence import (
    DistSummary,
    DivergenceKind,
    d_l1,
    d_l2var,
    d_multi,
    d_w1,
    divergence_matrix,
    ledger_divergence,
    prospective_divergence,
)
from .errors import FairRankError
from .metrics import (
    MetricsReport,
    UNDEFINED,
    build_report,
    dp,
    eur,
    fairwashing_delta,
    group_unfairness,
    iaa,
    individual_unfairness,
    relative_improvement,
)
from .rerank import RerankConfig, RunResult, evaluate_run, rerank_offline, rerank_online
from .synth import (
    SynthSpec,
    fairwashing_scenario,
    gen_random_instance,
    gen_synth_binary,
    gen_synth_cont,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AttentionModel",
    "BernoulliStream",
    "Dataset",
    "DistSummary",
    "DivergenceKind",
    "FairRankError",
    "Ledger",
    "MatchResult",
    "MetricsReport",
    "QueryEvent",
    "RerankConfig",
    "RunResult",
    "SynthSpec",
    "UNDEFINED",
    "attention_weights",
    "bottleneck_with_quality",
    "brute_force",
    "build_report",
    "chernoff_bound",
    "constrained_min_sum",
    "d_l1",
    "d_l2var",
    "d_multi",
    "d_w1",
    "dcg_at_k",
    "divergence_matrix",
    "dp",
    "eur",
    "evaluate_run",
    "fairwashing_delta",
    "fairwashing_scenario",
    "gen_random_instance",
    "gen_synth_binary",
    "gen_synth_cont",
    "group_unfairness",
    "hoeffding_bound",
    "hungarian_min_cost",
    "iaa",
    "ideal_ranking",
    "individual_unfairness",
    "ledger_divergence",
    "ledger_update",
    "lexicographic_refine",
    "max_dcg_matching",
    "monte_carlo_tail",
    "ndcg_at_k",
    "normalize_relevance",
    "prospective_divergence",
    "relative_improvement",
    "rerank_offline",
    "rerank_online",
]
