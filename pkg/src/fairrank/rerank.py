"""Online and offline re-ranking engines.

The online engine processes a query stream in order: for each query it
computes the relevance-ideal ranking and its quality ``rho(t)`` (DCG at the
evaluation depth), prefilters the top ``k_re`` candidates (positions beyond
``k_re`` stay frozen at the ideal ordering), builds the matrix of
prospective divergences for candidate x position, and solves one exact
assignment subproblem per the configured objective:

* ``minmax``     — minimize the worst prospective divergence
  (quality-constrained bottleneck matching, DCG tie-break);
* ``minmax-lex`` — the same, then lexicographic refinement of the
  next-largest divergences at the preserved bottleneck;
* ``minsum``     — minimize the summed mean-gap (IAA-style re-ranker;
  costs are the prospective L1 values);
* ``none``       — pass-through: emit the ideal ranking.

Every emitted ranking keeps DCG at the evaluation depth within ``theta``
of the ideal; if a step's subproblem is infeasible the ideal ranking is
emitted and flagged as a fallback. The ledger accrues both polarity tracks
regardless of which one the optimizer uses.

The offline engine starts from the online solution and runs coordinate
descent: revisit queries in order, re-solving each step against the
end-of-stream objective with all other assignments held fixed, accepting
only strict improvements, until a sweep makes no progress.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .assign import (
    FEASIBILITY_TOL,
    bottleneck_with_quality,
    constrained_min_sum,
    lexicographic_refine,
)
from .core import (
    Assignment,
    AttentionModel,
    Dataset,
    Ledger,
    dcg_at_k,
    ideal_ranking,
    ndcg_at_k,
)
from .divergence import DivergenceKind, _query_eta, divergence_matrix
from .errors import LengthMismatchError, StreamOrderError, ValidationError
from .metrics import (
    MetricsReport,
    build_report,
    iaa,
    improvement_panel,
    individual_unfairness,
)

OBJECTIVES = ("minmax", "minmax-lex", "minsum", "none")
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class RerankConfig:
    """Re-ranking parameters.

    ``theta`` is the fraction of the ideal ranking quality every re-ranked
    query must retain; ``k_re`` the prefilter depth; ``k_att`` the attention
    cutoff; ``k_eval`` the DCG evaluation depth (both capped by ``k_re``).
    """

    kind: DivergenceKind = DivergenceKind.L1
    objective: str = "minmax"
    theta: float = 0.8
    k_re: int = 50
    k_att: int = 10
    k_eval: int = 10
    polarity_mode: str = "agnostic"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", DivergenceKind(self.kind))
        if self.objective not in OBJECTIVES:
            raise ValidationError(
                f"objective must be one of {OBJECTIVES}, got {self.objective!r}"
            )
        if not 0.0 < self.theta <= 1.0:
            raise ValidationError(f"theta must be in (0, 1], got {self.theta}")
        if not 1 <= self.k_att <= self.k_re:
            raise ValidationError(
                f"need 1 <= k_att <= k_re, got k_att={self.k_att}, k_re={self.k_re}"
            )
        if not 1 <= self.k_eval <= self.k_re:
            raise ValidationError(
                f"need 1 <= k_eval <= k_re, got k_eval={self.k_eval}, k_re={self.k_re}"
            )
        if self.polarity_mode not in ("aware", "agnostic"):
            raise ValidationError(
                f"polarity_mode must be 'aware' or 'agnostic', got {self.polarity_mode!r}"
            )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "objective": self.objective,
            "theta": self.theta,
            "k_re": self.k_re,
            "k_att": self.k_att,
            "k_eval": self.k_eval,
            "polarity_mode": self.polarity_mode,
            "seed": self.seed,
        }


@dataclass
class RunResult:
    """One completed run: per-query rankings, quality, and the final ledger."""

    config: RerankConfig
    query_ids: list[str]
    assignments: list[Assignment]
    ndcg: list[float]
    fallback: list[bool]
    objective_trace: list[float]
    ledger: Ledger
    sweeps: int = 0

    @property
    def fallback_count(self) -> int:
        return sum(self.fallback)

    @property
    def mean_ndcg(self) -> float:
        return float(np.mean(self.ndcg))


def validate_stream(dataset: Dataset, stream) -> int:
    """Check ordering/coverage/polarity-arity invariants; returns P."""
    if not stream:
        raise ValidationError("empty query stream")
    components = stream[0].components
    prev_t = 0
    for query in stream:
        if query.t <= prev_t:
            raise StreamOrderError(
                f"query {query.query_id!r}: timestep {query.t} not greater than {prev_t}"
            )
        prev_t = query.t
        query.validate_coverage(dataset.individuals)
        if query.components != components:
            raise LengthMismatchError(
                f"query {query.query_id!r} has {query.components} polarity "
                f"component(s), expected {components}"
            )
    return components


def _solve_step(d, relevance_head, theta_rho, config):
    """Dispatch one per-query subproblem to the configured solver."""
    if config.objective in ("minmax", "minmax-lex"):
        res = bottleneck_with_quality(d, relevance_head, theta_rho, config.k_eval)
        if res.feasible and config.objective == "minmax-lex":
            res = lexicographic_refine(d, relevance_head, theta_rho, res, config.k_eval)
        return res
    return constrained_min_sum(d, relevance_head, theta_rho, config.k_eval)


def _cost_kind(config: RerankConfig) -> DivergenceKind:
    return DivergenceKind.L1 if config.objective == "minsum" else config.kind


def rerank_online(dataset: Dataset, stream, config: RerankConfig) -> RunResult:
    validate_stream(dataset, stream)
    components = stream[0].components
    if config.k_re > dataset.n:
        raise ValidationError(
            f"prefilter depth k_re={config.k_re} exceeds dataset size {dataset.n}"
        )
    attention = AttentionModel(config.k_att)
    ledger = Ledger(dataset, components)
    cost_kind = _cost_kind(config)

    query_ids, assignments, ndcg, fallback, trace = [], [], [], [], []
    for query in stream:
        ideal = ideal_ranking(query)
        rho = dcg_at_k(ideal, query.relevance, config.k_eval)
        candidates = ideal[: config.k_re]
        tail = ideal[config.k_re :]
        if config.objective == "none":
            ordering = ideal
            fell_back = False
            objective_value = math.nan
        else:
            d = divergence_matrix(
                ledger, candidates, query, attention, cost_kind, config.polarity_mode
            )
            rel_head = np.array([query.relevance[c] for c in candidates])
            res = _solve_step(d, rel_head, config.theta * rho, config)
            if res.feasible:
                head = tuple(candidates[row] for row in np.argsort(res.assignment))
                ordering = head + tail
                fell_back = False
                objective_value = res.objective
            else:
                ordering = ideal
                fell_back = True
                objective_value = math.nan
        assignment = Assignment(ordering)
        ledger.update(query, assignment, attention)
        query_ids.append(query.query_id)
        assignments.append(assignment)
        ndcg.append(ndcg_at_k(ordering, ideal, query.relevance, config.k_eval))
        fallback.append(fell_back)
        trace.append(objective_value)
    return RunResult(config, query_ids, assignments, ndcg, fallback, trace, ledger)


# -- offline coordinate descent ----------------------------------------------


def _final_moment_matrix(ledger, step_query, step_ordering, candidates, config, attention):
    """Final-horizon L1/L2var divergence per candidate x head position.

    Entry [i, j]: the end-of-stream divergence candidate ``i`` would hold if
    its attention at this step came from position ``j+1`` instead of its
    current one, everything else unchanged.
    """
    dataset = ledger.dataset
    mode = config.polarity_mode
    kind = _cost_kind(config)
    if kind == DivergenceKind.W1:
        raise ValidationError("W1 final-horizon matrices are built by _final_w1_matrix")
    K = len(candidates)
    w_full = attention.weights(dataset.n)
    eta = _query_eta(step_query, ledger.components, mode)
    rows = [dataset.index[c] for c in candidates]
    pos_now = {ind: j for j, ind in enumerate(step_ordering)}
    w_cur = np.array([w_full[pos_now[c]] for c in candidates])
    w_new = w_full[:K]

    mean_a = ledger.mean_matrix("attention", mode)[rows]
    var_a = ledger.var_matrix("attention", mode)[rows]
    mean_r = ledger.mean_matrix("relevance", mode)[rows]
    var_r = ledger.var_matrix("relevance", mode)[rows]

    # (K cand, K pos, P)
    d_mean = eta[None, None, :] * (w_new[None, :, None] - w_cur[:, None, None])
    attn_mean = mean_a[:, None, :] + d_mean
    if kind == DivergenceKind.L1:
        return np.abs(attn_mean - mean_r[:, None, :]).sum(axis=2)
    e2 = (eta * eta)[None, None, :]
    d_var = e2 * (
        (w_new * (1.0 - w_new))[None, :, None] - (w_cur * (1.0 - w_cur))[:, None, None]
    )
    delta_std = np.sqrt(var_a[:, None, :] + d_var) - np.sqrt(var_r)[:, None, :]
    return ((attn_mean - mean_r[:, None, :]) ** 2 + delta_std**2).sum(axis=2)


def _final_w1_matrix(ledger, step0, step_query, candidates, config, attention):
    """Final-horizon W1 divergence: this step's sequence entry is replaced."""
    dataset = ledger.dataset
    mode = config.polarity_mode
    K = len(candidates)
    w_full = attention.weights(dataset.n)
    eta = _query_eta(step_query, ledger.components, mode)
    rows = [dataset.index[c] for c in candidates]
    seq_a = ledger.sequences("attention", mode)[:, rows, :]  # (T, K, P)
    seq_r = ledger.sequences("relevance", mode)[:, rows, :]
    w_new = w_full[:K]
    d = np.zeros((K, K))
    for i in range(K):
        rel_sorted = np.sort(seq_r[:, i, :], axis=0)
        base = np.delete(seq_a[:, i, :], step0, axis=0)
        for j in range(K):
            seq = np.sort(np.vstack([base, eta * w_new[j]]), axis=0)
            d[i, j] = float(np.mean(np.abs(seq - rel_sorted), axis=0).sum())
    return d


def _global_objective(ledger, config) -> float:
    if config.objective == "minsum":
        return iaa(ledger, config.polarity_mode)
    return individual_unfairness(ledger, config.kind, config.polarity_mode)


def _lex_less(a, b, tol: float) -> bool:
    for x, y in zip(a, b):
        if abs(x - y) <= tol:
            continue
        return x < y
    return False


class _DescentState:
    """Array-level evaluation of the end-of-stream objective profile.

    Holds the assignment-independent relevance constants and recomputes the
    attention side for any candidate set of orderings, so coordinate and
    block moves can be scored without rebuilding a Ledger per trial. For
    min-max objectives the profile is the full divergence vector sorted
    descending (lexicographic acceptance keeps descent moving across
    plateaus of the maximum); for min-sum it is the scalar total.
    """

    def __init__(self, dataset: Dataset, stream, config: RerankConfig, attention):
        self.dataset = dataset
        self.stream = stream
        self.config = config
        self.kind = _cost_kind(config)
        self.minsum = config.objective == "minsum"
        mode = config.polarity_mode
        P = stream[0].components
        self.eta = np.stack([_query_eta(q, P, mode) for q in stream])  # (T, P)
        self.w_full = attention.weights(dataset.n)
        rel_vals = np.stack([q.relevance_vector(dataset) for q in stream])  # (T, n)
        self.rel_seq = self.eta[:, None, :] * rel_vals[:, :, None]
        self.rel_mean = self.rel_seq.sum(axis=0)
        self.rel_var = (
            (self.eta**2)[:, None, :] * (rel_vals * (1.0 - rel_vals))[:, :, None]
        ).sum(axis=0)
        self.rel_seq_sorted = np.sort(self.rel_seq, axis=0)

    def attention_weights_of(self, ordering) -> np.ndarray:
        attn = np.empty(self.dataset.n)
        index = self.dataset.index
        for pos0, ind in enumerate(ordering):
            attn[index[ind]] = self.w_full[pos0]
        return attn

    def profile(self, orderings) -> tuple[float, ...]:
        attn = np.stack([self.attention_weights_of(o) for o in orderings])  # (T, n)
        attn_seq = self.eta[:, None, :] * attn[:, :, None]
        mean_a = attn_seq.sum(axis=0)
        if self.kind == DivergenceKind.L1:
            values = np.abs(mean_a - self.rel_mean).sum(axis=1)
        elif self.kind == DivergenceKind.L2VAR:
            var_a = (
                (self.eta**2)[:, None, :] * (attn * (1.0 - attn))[:, :, None]
            ).sum(axis=0)
            values = (
                (mean_a - self.rel_mean) ** 2
                + (np.sqrt(var_a) - np.sqrt(self.rel_var)) ** 2
            ).sum(axis=1)
        else:
            diffs = np.abs(np.sort(attn_seq, axis=0) - self.rel_seq_sorted)
            values = diffs.mean(axis=0).sum(axis=1)
        if self.minsum:
            return (float(values.sum()),)
        return tuple(np.sort(values)[::-1])


def _step_options(query, config: RerankConfig, per_step_cap: int = 720):
    """All quality-feasible head orderings of one step, or None if too many."""
    ideal = ideal_ranking(query)
    candidates = ideal[: config.k_re]
    if math.factorial(len(candidates)) > per_step_cap:
        return None
    tail = ideal[config.k_re :]
    theta_rho = config.theta * dcg_at_k(ideal, query.relevance, config.k_eval)
    options = []
    for perm in itertools.permutations(candidates):
        ordering = perm + tail
        if (
            dcg_at_k(ordering, query.relevance, config.k_eval)
            >= theta_rho - FEASIBILITY_TOL
        ):
            options.append(ordering)
    return options


def rerank_offline(
    dataset: Dataset,
    stream,
    config: RerankConfig,
    max_sweeps: int = 10,
    block_budget: int = 20_000,
) -> RunResult:
    """Block-coordinate-descent refinement of the online solution.

    Each round first sweeps the queries in order, re-solving one step's
    assignment against the end-of-stream objective with every other step
    held fixed (quality constraint re-checked per step). When a sweep
    stalls, descent escalates to joint moves over blocks of 1, 2, ... steps,
    enumerating the block's feasible orderings whenever the option sets are
    small enough (product of option counts within ``block_budget``); on
    desk-scale prefilter depths the blocks are not enumerable and descent
    reduces to plain sweeps. Only strict (lexicographic) improvements are
    accepted, so the final objective never exceeds the online one. Stops
    after ``max_sweeps`` rounds or when no move of any size improves.
    """
    online = rerank_online(dataset, stream, config)
    if max_sweeps <= 0 or len(stream) <= 1 or config.objective == "none":
        return online
    attention = AttentionModel(config.k_att)
    components = stream[0].components
    orderings: list[tuple[str, ...]] = [a.ordering for a in online.assignments]

    def rebuild(orders) -> Ledger:
        led = Ledger(dataset, components)
        for query, ordering in zip(stream, orders):
            led.update(query, Assignment(ordering), attention)
        return led

    state = _DescentState(dataset, stream, config, attention)
    best = state.profile(orderings)
    step_config = config
    if config.objective == "minmax":
        # lex-refined step proposals explore the plateau of the step optimum
        step_config = RerankConfig(**{**config.to_dict(), "objective": "minmax-lex"})
    options_cache: list | None = None

    def sweep(ledger) -> bool:
        nonlocal orderings, best
        improved = False
        for step0, query in enumerate(stream):
            if online.fallback[step0]:
                continue
            ideal = ideal_ranking(query)
            candidates = ideal[: config.k_re]
            tail = ideal[config.k_re :]
            rho = dcg_at_k(ideal, query.relevance, config.k_eval)
            if _cost_kind(config) == DivergenceKind.W1:
                d = _final_w1_matrix(ledger, step0, query, candidates, config, attention)
            else:
                d = _final_moment_matrix(
                    ledger, query, orderings[step0], candidates, config, attention
                )
            rel_head = np.array([query.relevance[c] for c in candidates])
            res = _solve_step(d, rel_head, config.theta * rho, step_config)
            if not res.feasible:
                continue
            head = tuple(candidates[row] for row in np.argsort(res.assignment))
            proposal = head + tail
            if proposal == orderings[step0]:
                continue
            trial = orderings.copy()
            trial[step0] = proposal
            trial_profile = state.profile(trial)
            if _lex_less(trial_profile, best, IMPROVEMENT_TOL):
                orderings = trial
                best = trial_profile
                improved = True
                ledger = rebuild(orderings)
        return improved

    def escalate() -> bool:
        nonlocal orderings, best, options_cache
        if options_cache is None:
            options_cache = [_step_options(q, config) for q in stream]
        T = len(stream)
        for size in range(1, T + 1):
            for block in itertools.combinations(range(T), size):
                counts = []
                for s in block:
                    if online.fallback[s] or options_cache[s] is None:
                        counts = None
                        break
                    counts.append(len(options_cache[s]))
                if counts is None or math.prod(counts) > block_budget:
                    continue
                block_best = None
                for combo in itertools.product(*(options_cache[s] for s in block)):
                    trial = orderings.copy()
                    for s, ordering in zip(block, combo):
                        trial[s] = ordering
                    profile = state.profile(trial)
                    if block_best is None or _lex_less(profile, block_best[0], 0.0):
                        block_best = (profile, trial)
                if block_best and _lex_less(block_best[0], best, IMPROVEMENT_TOL):
                    best = block_best[0]
                    orderings = block_best[1]
                    return True
        return False

    sweeps = 0
    ledger = rebuild(orderings)
    for _ in range(max_sweeps):
        sweeps += 1
        if sweep(ledger):
            ledger = rebuild(orderings)
            continue
        if escalate():
            ledger = rebuild(orderings)
            continue
        break

    # replay final orderings for per-step statistics
    final_ledger = Ledger(dataset, components)
    ndcg, trace = [], []
    for step0, query in enumerate(stream):
        ideal = ideal_ranking(query)
        candidates = ideal[: config.k_re]
        ordering = orderings[step0]
        if online.fallback[step0]:
            trace.append(math.nan)
        else:
            d = divergence_matrix(
                final_ledger,
                candidates,
                query,
                attention,
                _cost_kind(config),
                config.polarity_mode,
            )
            chosen = [ordering.index(c) for c in candidates]
            values = d[np.arange(len(candidates)), chosen]
            trace.append(
                float(values.sum() if config.objective == "minsum" else values.max())
            )
        final_ledger.update(query, Assignment(ordering), attention)
        ndcg.append(ndcg_at_k(ordering, ideal, query.relevance, config.k_eval))
    return RunResult(
        config,
        list(online.query_ids),
        [Assignment(o) for o in orderings],
        ndcg,
        list(online.fallback),
        trace,
        final_ledger,
        sweeps=sweeps,
    )


def evaluate_run(
    result: RunResult,
    dataset: Dataset | None = None,
    baseline: "RunResult | MetricsReport | None" = None,
) -> MetricsReport:
    """Assemble the full metric report for a completed run."""
    dataset = dataset or result.ledger.dataset
    report = build_report(result.ledger, dataset)
    report.mean_ndcg = result.mean_ndcg
    report.fallback_count = result.fallback_count
    report.per_query_ndcg = list(result.ndcg)
    report.objective_trace = list(result.objective_trace)
    if baseline is not None:
        if isinstance(baseline, RunResult):
            baseline = evaluate_run(baseline, dataset)
        report.improvement = improvement_panel(baseline, report)
    return report
