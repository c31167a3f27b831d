"""Exact solvers for one query's constrained re-ranking subproblem.

All solvers work on a square K x K instance: rows are candidates, columns
are ranking positions 1..K. Position j carries a gain of
``relevance[i] / log2(j+1)`` (zero beyond an optional evaluation depth), and
a matching is quality-feasible when its total gain reaches ``theta_rho``
within the shared feasibility tolerance.

* ``hungarian_min_cost``     — minimum-total-cost perfect matching
  (scipy's Jonker-Volgenant implementation; ``inf`` marks forbidden edges);
* ``max_dcg_matching``       — maximum-gain perfect matching over an
  allowed-edge mask (min-cost on negated gains);
* ``bottleneck_with_quality``— minimize the maximum edge value subject to
  the quality constraint, by binary search on the sorted distinct edge
  values with a max-gain feasibility probe at each threshold; ties at the
  optimal bottleneck break toward maximal gain;
* ``lexicographic_refine``   — greedily shrink the next-largest edge values
  while preserving the bottleneck and the quality constraint;
* ``constrained_min_sum``    — minimize total cost subject to the quality
  constraint via Lagrangian bisection on the constraint multiplier, with a
  depth-first branch-and-bound fallback when the dual gap does not certify
  optimality;
* ``brute_force``            — K! enumeration oracle (K <= 8).
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError

FEASIBILITY_TOL = 1e-9

OBJECTIVES = ("minmax", "minsum", "lexmax")


@dataclass(frozen=True)
class MatchResult:
    """A solved matching: row -> column map, objective value, verdicts."""

    assignment: tuple[int, ...]
    objective: float
    feasible: bool
    optimal: bool = True

    @classmethod
    def infeasible(cls) -> "MatchResult":
        return cls((), math.nan, False)


def position_discounts(k: int, dcg_depth: int | None = None) -> np.ndarray:
    """1/log2(j+1) for positions j=1..k, zero beyond ``dcg_depth``."""
    disc = 1.0 / np.log2(np.arange(1, k + 1, dtype=np.float64) + 1.0)
    if dcg_depth is not None:
        disc[dcg_depth:] = 0.0
    return disc


def matching_values(matrix: np.ndarray, assignment) -> np.ndarray:
    cols = np.asarray(assignment)
    return matrix[np.arange(len(cols)), cols]


def _solve_lsa(costs: np.ndarray):
    """linear_sum_assignment with infeasibility returned as None."""
    try:
        rows, cols = linear_sum_assignment(costs)
    except ValueError:
        return None
    if not np.isfinite(costs[rows, cols]).all():
        return None
    return tuple(int(c) for c in cols)


def hungarian_min_cost(costs) -> MatchResult:
    """Minimum-total-cost perfect matching; ``inf`` entries are forbidden."""
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1] or costs.shape[0] < 1:
        raise ValidationError(f"cost matrix must be square and non-empty, got {costs.shape}")
    if np.isnan(costs).any():
        raise ValidationError("cost matrix contains NaN")
    cols = _solve_lsa(costs)
    if cols is None:
        return MatchResult.infeasible()
    return MatchResult(cols, float(matching_values(costs, cols).sum()), True)


def _max_gain_matching(allowed: np.ndarray, gains: np.ndarray):
    """(assignment, total gain) of the max-gain perfect matching, or None."""
    costs = np.where(allowed, -gains, np.inf)
    cols = _solve_lsa(costs)
    if cols is None:
        return None
    return cols, float(matching_values(gains, cols).sum())


def max_dcg_matching(
    allowed, relevance, dcg_depth: int | None = None
) -> MatchResult:
    """Perfect matching over allowed edges maximizing the DCG gain."""
    allowed = np.asarray(allowed, dtype=bool)
    relevance = np.asarray(relevance, dtype=np.float64)
    k = allowed.shape[0]
    gains = relevance[:, None] * position_discounts(k, dcg_depth)[None, :]
    res = _max_gain_matching(allowed, gains)
    if res is None:
        return MatchResult.infeasible()
    cols, gain = res
    return MatchResult(cols, gain, True)


def _bottleneck_search(
    d: np.ndarray,
    gains: np.ndarray,
    theta_rho: float,
    cap: float = math.inf,
):
    """Minimal threshold z (<= cap) admitting a quality-feasible matching
    over edges d <= z. Returns (z, assignment, gain) or None."""
    values = np.unique(d)
    values = values[values <= cap]
    if values.size == 0:
        return None

    def probe(z):
        res = _max_gain_matching(d <= z, gains)
        if res is None:
            return None
        cols, gain = res
        if gain < theta_rho - FEASIBILITY_TOL:
            return None
        return cols, gain

    hi = values.size - 1
    best = probe(values[hi])
    if best is None:
        return None
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        probed = probe(values[mid])
        if probed is None:
            lo = mid + 1
        else:
            hi = mid
            best = probed
    cols, gain = best
    z = float(matching_values(d, cols).max())
    return z, cols, gain


def bottleneck_with_quality(
    d, relevance, theta_rho: float, dcg_depth: int | None = None
) -> MatchResult:
    """Min-max edge value subject to DCG >= theta_rho; DCG breaks ties.

    Infeasible when even the unrestricted max-DCG matching misses the
    quality threshold.
    """
    d = np.asarray(d, dtype=np.float64)
    if not np.isfinite(d).all():
        raise ValidationError("bottleneck matrix must be finite everywhere")
    k = d.shape[0]
    relevance = np.asarray(relevance, dtype=np.float64)
    gains = relevance[:, None] * position_discounts(k, dcg_depth)[None, :]
    found = _bottleneck_search(d, gains, theta_rho)
    if found is None:
        return MatchResult.infeasible()
    z, cols, _ = found
    return MatchResult(cols, z, True)


def _sorted_desc(values: np.ndarray) -> tuple[float, ...]:
    return tuple(np.sort(values)[::-1])


def lexicographic_refine(
    d, relevance, theta_rho: float, base: MatchResult, dcg_depth: int | None = None
) -> MatchResult:
    """Greedy refinement of a bottleneck-optimal matching.

    Repeatedly fixes an edge realizing the current level's bottleneck value
    (choosing the one whose remaining subproblem has the smallest next
    bottleneck) and re-solves the reduced problem, re-checking the quality
    constraint on the full matching each step. The bottleneck value is
    preserved exactly; falls back to ``base`` whenever refinement cannot
    strictly (lexicographically) match it.
    """
    if not base.feasible:
        return base
    d = np.asarray(d, dtype=np.float64)
    k = d.shape[0]
    relevance = np.asarray(relevance, dtype=np.float64)
    disc = position_discounts(k, dcg_depth)

    rows = list(range(k))
    cols = list(range(k))
    fixed: dict[int, int] = {}
    fixed_gain = 0.0
    cap = math.inf

    def reduced(rs, cs, gain_so_far, level_cap):
        sub_d = d[np.ix_(rs, cs)]
        sub_gains = relevance[rs][:, None] * disc[cs][None, :]
        return _bottleneck_search(sub_d, sub_gains, theta_rho - gain_so_far, level_cap)

    while rows:
        level = reduced(rows, cols, fixed_gain, cap)
        if level is None:
            return base
        z = level[0]
        # candidate edges realizing z, in row-major order
        cands = [
            (il, jl)
            for il in range(len(rows))
            for jl in range(len(cols))
            if d[rows[il], cols[jl]] == z
        ]
        best_edge = None
        best_next = math.inf
        for il, jl in cands:
            gain2 = fixed_gain + relevance[rows[il]] * disc[cols[jl]]
            rows2 = rows[:il] + rows[il + 1 :]
            cols2 = cols[:jl] + cols[jl + 1 :]
            if not rows2:
                if gain2 >= theta_rho - FEASIBILITY_TOL:
                    z_next = -math.inf
                else:
                    continue
            else:
                sub = reduced(rows2, cols2, gain2, z)
                if sub is None:
                    continue
                z_next = sub[0]
            if z_next < best_next:
                best_next = z_next
                best_edge = (il, jl)
        if best_edge is None:
            return base
        il, jl = best_edge
        fixed[rows[il]] = cols[jl]
        fixed_gain += relevance[rows[il]] * disc[cols[jl]]
        del rows[il], cols[jl]
        cap = z

    assignment = tuple(fixed[i] for i in range(k))
    refined_vec = _sorted_desc(matching_values(d, assignment))
    base_vec = _sorted_desc(matching_values(d, base.assignment))
    if refined_vec > base_vec:
        return base
    return MatchResult(assignment, float(refined_vec[0]), True)


def constrained_min_sum(
    costs,
    relevance,
    theta_rho: float,
    dcg_depth: int | None = None,
    node_budget: int | None = None,
) -> MatchResult:
    """Minimum-total-cost matching subject to DCG >= theta_rho.

    Lagrangian bisection on the quality multiplier solves a sequence of
    plain assignment problems; if the dual bound does not certify the best
    feasible solution, an exact depth-first branch-and-bound (assignment
    lower bound per node, rearrangement upper bound on remaining gain)
    finishes the job. Exact for K <= 20 by default; beyond that a node
    budget applies and exhaustion is reported via ``optimal=False``.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if not np.isfinite(costs).all():
        raise ValidationError("cost matrix must be finite everywhere")
    k = costs.shape[0]
    relevance = np.asarray(relevance, dtype=np.float64)
    disc = position_discounts(k, dcg_depth)
    gains = relevance[:, None] * disc[None, :]

    def gain_of(cols):
        return float(matching_values(gains, cols).sum())

    def cost_of(cols):
        return float(matching_values(costs, cols).sum())

    base = _solve_lsa(costs)
    if gain_of(base) >= theta_rho - FEASIBILITY_TOL:
        return MatchResult(base, cost_of(base), True)

    top = _solve_lsa(-gains)
    if gain_of(top) < theta_rho - FEASIBILITY_TOL:
        return MatchResult.infeasible()

    best_cols = top
    best_cost = cost_of(top)
    lower_bound = -math.inf

    def dual(lam):
        nonlocal best_cols, best_cost, lower_bound
        cols = _solve_lsa(costs - lam * gains)
        g = gain_of(cols)
        lower_bound = max(lower_bound, cost_of(cols) - lam * (g - theta_rho))
        feas = g >= theta_rho - FEASIBILITY_TOL
        if feas and cost_of(cols) < best_cost:
            best_cols, best_cost = cols, cost_of(cols)
        return feas

    lo, hi = 0.0, 1.0
    for _ in range(60):
        if dual(hi):
            break
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if dual(mid):
            hi = mid
        else:
            lo = mid

    if best_cost <= lower_bound + FEASIBILITY_TOL:
        return MatchResult(best_cols, best_cost, True)

    # exact finish: DFS over positions, strongest-first rows
    if node_budget is None and k > 20:
        node_budget = 200_000
    nodes = 0
    exhausted = False
    used = np.zeros(k, dtype=bool)
    chosen = [-1] * k

    def remaining_gain_ub(col, free_rows_rel_sorted):
        # rearrangement bound: best remaining rel against best remaining discounts
        rest_disc = np.sort(disc[col:])[::-1][: len(free_rows_rel_sorted)]
        return float(free_rows_rel_sorted[: len(rest_disc)] @ rest_disc)

    # chosen[] maps column -> row during DFS; converted to row -> col at leaves
    def dfs(col, cost_so_far, gain_so_far):
        nonlocal nodes, exhausted, best_cols, best_cost
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            exhausted = True
            return
        if col == k:
            if gain_so_far >= theta_rho - FEASIBILITY_TOL and cost_so_far < best_cost:
                row_to_col = [0] * k
                for c in range(k):
                    row_to_col[chosen[c]] = c
                best_cols = tuple(row_to_col)
                best_cost = cost_so_far
            return
        free = [r for r in range(k) if not used[r]]
        free_rel_sorted = np.sort(relevance[free])[::-1]
        if gain_so_far + remaining_gain_ub(col, free_rel_sorted) < theta_rho - FEASIBILITY_TOL:
            return
        sub = costs[np.ix_(free, range(col, k))]
        sub_cols = _solve_lsa(sub)
        if cost_so_far + float(matching_values(sub, sub_cols).sum()) >= best_cost:
            return
        for r in sorted(free, key=lambda rr: costs[rr, col]):
            used[r] = True
            chosen[col] = r
            dfs(col + 1, cost_so_far + costs[r, col], gain_so_far + gains[r, col])
            used[r] = False
        chosen[col] = -1

    dfs(0, 0.0, 0.0)
    return MatchResult(best_cols, best_cost, True, optimal=not exhausted)


@lru_cache(maxsize=8)
def _all_permutations(k: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(k))), dtype=np.intp)


def brute_force(
    objective: str,
    d_or_costs,
    relevance,
    theta_rho: float,
    dcg_depth: int | None = None,
) -> MatchResult:
    """Exact optimum by enumerating all K! matchings (oracle; K <= 8)."""
    if objective not in OBJECTIVES:
        raise ValidationError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    matrix = np.asarray(d_or_costs, dtype=np.float64)
    k = matrix.shape[0]
    if k > 8:
        raise ValidationError(f"brute_force enumerates K! matchings; K={k} exceeds 8")
    relevance = np.asarray(relevance, dtype=np.float64)
    gains = relevance[:, None] * position_discounts(k, dcg_depth)[None, :]

    perms = _all_permutations(k)  # (M, K): row i -> column perms[m, i]
    rows = np.arange(k)[None, :]
    vals = matrix[rows, perms]  # (M, K)
    dcg = gains[rows, perms].sum(axis=1)
    feasible = (dcg >= theta_rho - FEASIBILITY_TOL) & np.isfinite(vals).all(axis=1)
    if not feasible.any():
        return MatchResult.infeasible()

    idx = np.flatnonzero(feasible)
    fvals = vals[idx]
    fdcg = dcg[idx]
    if objective == "minmax":
        keys = (-fdcg, fvals.max(axis=1))
        order = np.lexsort(keys)
        best = idx[order[0]]
        value = float(vals[best].max())
    elif objective == "minsum":
        keys = (-fdcg, fvals.sum(axis=1))
        order = np.lexsort(keys)
        best = idx[order[0]]
        value = float(vals[best].sum())
    else:  # lexmax: lexicographically smallest sorted-descending value vector
        sv = -np.sort(-fvals, axis=1)  # (F, K) descending
        keys = tuple([-fdcg] + [sv[:, c] for c in range(k - 1, -1, -1)])
        order = np.lexsort(keys)
        best = idx[order[0]]
        value = float(vals[best].max())
    return MatchResult(tuple(int(c) for c in perms[best]), value, True)
