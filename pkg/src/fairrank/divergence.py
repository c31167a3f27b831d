"""Divergence measures between cumulative attention and relevance.

Three measures are supported, all over a per-individual pair of cumulative
distributions (attention vs. relevance):

* ``L1``    — absolute difference of means: ``|mu_A - mu_R|``;
* ``L2var`` — squared mean gap plus squared standard-deviation gap:
  ``(mu_A - mu_R)^2 + (sigma_A - sigma_R)^2``;
* ``W1``    — empirical 1-Wasserstein distance between the per-query value
  sequences: mean absolute difference of aligned order statistics.

Multi-component polarity sums the per-component values (unweighted).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import AttentionModel, Ledger, QueryEvent
from .errors import LengthMismatchError, ValidationError


class DivergenceKind(str, Enum):
    L1 = "L1"
    L2VAR = "L2var"
    W1 = "W1"


@dataclass(frozen=True)
class DistSummary:
    """Summary of one cumulative distribution: mean, std, sorted sequence."""

    mean: float
    std: float
    seq: np.ndarray

    def __post_init__(self):
        if self.std < 0:
            raise ValidationError(f"standard deviation must be >= 0, got {self.std}")
        object.__setattr__(self, "seq", np.sort(np.asarray(self.seq, dtype=np.float64)))

    @classmethod
    def from_ledger(
        cls,
        ledger: Ledger,
        individual: str,
        channel: str,
        mode: str = "agnostic",
        component: int = 0,
    ) -> "DistSummary":
        mean, var = ledger.moments(individual, channel, mode)
        seq = ledger.sequence(individual, channel, mode)[:, component]
        return cls(float(mean[component]), float(np.sqrt(var[component])), seq)


def d_l1(attn: DistSummary, rel: DistSummary) -> float:
    return abs(attn.mean - rel.mean)


def d_l2var(attn: DistSummary, rel: DistSummary) -> float:
    return (attn.mean - rel.mean) ** 2 + (attn.std - rel.std) ** 2


def d_w1(attn_seq, rel_seq) -> float:
    """Mean absolute difference of aligned order statistics.

    Equals the optimal-transport cost between the two equal-weight empirical
    measures (sequences are sorted before alignment).
    """
    a = np.sort(np.asarray(attn_seq, dtype=np.float64))
    r = np.sort(np.asarray(rel_seq, dtype=np.float64))
    if a.shape != r.shape:
        raise LengthMismatchError(
            f"sequence lengths differ: {a.shape[0]} vs {r.shape[0]}"
        )
    if a.size == 0:
        raise LengthMismatchError("W1 needs at least one observation per sequence")
    return float(np.mean(np.abs(a - r)))


def d_multi(per_component) -> float:
    """Aggregate per-component divergences: unweighted sum."""
    values = list(per_component)
    if not values:
        raise ValidationError("need at least one component value")
    return float(sum(values))


def _component_values(
    kind: DivergenceKind,
    mean_a: np.ndarray,
    var_a: np.ndarray,
    seq_a: np.ndarray | None,
    mean_r: np.ndarray,
    var_r: np.ndarray,
    seq_r: np.ndarray | None,
) -> np.ndarray:
    """Per-component divergence values; moment arrays are (P,), seqs (T, P)."""
    if kind == DivergenceKind.L1:
        return np.abs(mean_a - mean_r)
    if kind == DivergenceKind.L2VAR:
        return (mean_a - mean_r) ** 2 + (np.sqrt(var_a) - np.sqrt(var_r)) ** 2
    if kind == DivergenceKind.W1:
        if seq_a is None or seq_r is None or seq_a.shape[0] == 0:
            return np.zeros(mean_a.shape)
        return np.mean(np.abs(np.sort(seq_a, axis=0) - np.sort(seq_r, axis=0)), axis=0)
    raise ValidationError(f"unknown divergence kind {kind!r}")


def ledger_divergence(
    ledger: Ledger, individual: str, kind: DivergenceKind, mode: str = "agnostic"
) -> float:
    """Current-horizon divergence D(A_i, R_i), summed over polarity components."""
    mean_a, var_a = ledger.moments(individual, "attention", mode)
    mean_r, var_r = ledger.moments(individual, "relevance", mode)
    seq_a = seq_r = None
    if kind == DivergenceKind.W1:
        seq_a = ledger.sequence(individual, "attention", mode)
        seq_r = ledger.sequence(individual, "relevance", mode)
    return d_multi(_component_values(kind, mean_a, var_a, seq_a, mean_r, var_r, seq_r))


def _query_eta(query: QueryEvent, components: int, mode: str) -> np.ndarray:
    if mode == "aware":
        return np.asarray(query.polarity, dtype=np.float64)
    if mode == "agnostic":
        return np.ones(components)
    raise ValidationError(f"unknown polarity mode {mode!r}")


def prospective_divergence(
    ledger: Ledger,
    individual: str,
    query: QueryEvent,
    position: int,
    attention: AttentionModel,
    kind: DivergenceKind,
    mode: str = "aware",
) -> float:
    """Divergence the individual would hold after taking ``position`` now.

    Evaluates D(A_i, R_i) on a hypothetical ledger extended by this query,
    with the individual's attention taken from the given position and its
    (assignment-independent) relevance accrued as well. The ledger itself is
    not modified.
    """
    n = ledger.dataset.n
    if not 1 <= position <= n:
        raise ValidationError(f"position {position} outside 1..{n}")
    if query.components != ledger.components:
        raise LengthMismatchError(
            f"query has {query.components} polarity component(s), "
            f"ledger tracks {ledger.components}"
        )
    eta = _query_eta(query, ledger.components, mode)
    w = attention.weights(n)[position - 1]
    r = query.relevance[individual]

    mean_a, var_a = ledger.moments(individual, "attention", mode)
    mean_r, var_r = ledger.moments(individual, "relevance", mode)
    mean_a = mean_a + eta * w
    var_a = var_a + eta * eta * w * (1.0 - w)
    mean_r = mean_r + eta * r
    var_r = var_r + eta * eta * r * (1.0 - r)

    seq_a = seq_r = None
    if kind == DivergenceKind.W1:
        seq_a = np.vstack([ledger.sequence(individual, "attention", mode), eta * w])
        seq_r = np.vstack([ledger.sequence(individual, "relevance", mode), eta * r])
    return d_multi(_component_values(kind, mean_a, var_a, seq_a, mean_r, var_r, seq_r))


def divergence_matrix(
    ledger: Ledger,
    candidates,
    query: QueryEvent,
    attention: AttentionModel,
    kind: DivergenceKind,
    mode: str = "aware",
) -> np.ndarray:
    """Prospective divergences for ``candidates`` x positions ``1..K``.

    Entry [i, j] equals ``prospective_divergence(candidates[i], position=j+1)``;
    batched so the re-ranking engine avoids per-cell ledger gathers.
    """
    candidates = list(candidates)
    K = len(candidates)
    n = ledger.dataset.n
    if K > n:
        raise ValidationError("more candidates than individuals")
    eta = _query_eta(query, ledger.components, mode)
    w = attention.weights(n)[:K]
    rows = [ledger.dataset.index[c] for c in candidates]
    r = np.array([query.relevance[c] for c in candidates])

    mean_a = ledger.mean_matrix("attention", mode)[rows]
    var_a = ledger.var_matrix("attention", mode)[rows]
    mean_r = ledger.mean_matrix("relevance", mode)[rows] + eta[None, :] * r[:, None]
    var_r = (
        ledger.var_matrix("relevance", mode)[rows]
        + (eta * eta)[None, :] * (r * (1.0 - r))[:, None]
    )

    # (K cand, K pos, P) broadcasts
    attn_mean = mean_a[:, None, :] + eta[None, None, :] * w[None, :, None]
    if kind == DivergenceKind.L1:
        return np.abs(attn_mean - mean_r[:, None, :]).sum(axis=2)
    if kind == DivergenceKind.L2VAR:
        attn_var = var_a[:, None, :] + (eta * eta)[None, None, :] * (w * (1.0 - w))[
            None, :, None
        ]
        delta_std = np.sqrt(attn_var) - np.sqrt(var_r)[:, None, :]
        return ((attn_mean - mean_r[:, None, :]) ** 2 + delta_std**2).sum(axis=2)
    if kind == DivergenceKind.W1:
        seq_a = ledger.sequences("attention", mode)[:, rows, :]
        seq_r = ledger.sequences("relevance", mode)[:, rows, :]
        P = ledger.components
        d = np.zeros((K, K))
        for i in range(K):
            rel_sorted = np.sort(
                np.vstack([seq_r[:, i, :], eta * r[i]]), axis=0
            )  # (T+1, P)
            base = np.sort(seq_a[:, i, :], axis=0)
            for j in range(K):
                val = eta * w[j]
                total = 0.0
                for p in range(P):
                    col = np.insert(
                        base[:, p], np.searchsorted(base[:, p], val[p]), val[p]
                    )
                    total += np.mean(np.abs(col - rel_sorted[:, p]))
                d[i, j] = total
        return d
    raise ValidationError(f"unknown divergence kind {kind!r}")
