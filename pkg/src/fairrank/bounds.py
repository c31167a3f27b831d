"""Concentration bounds for cumulative attention/relevance totals.

Two tail bounds on a sum of independent (optionally polarity-weighted)
Bernoulli variables, clipped to [0, 1] since the raw expressions can exceed
one, plus a Monte Carlo verifier:

* relative deviation (unit polarity):
  ``P(|S - E| >= delta * E) <= 2 exp(-delta^2 E / (2 + delta))``,
  a function of the expected value only;
* absolute deviation (each term bounded in ``[a_t, b_t]``):
  ``P(|S - E| >= delta) <= 2 exp(-2 delta^2 / sum (b_t - a_t)^2)``.

Monte Carlo sampling uses the counter-based Philox generator so estimates
are reproducible and shardable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LengthMismatchError, ModeMismatchError

_MC_CHUNK = 50_000


@dataclass(frozen=True)
class BernoulliStream:
    """Per-query success probabilities with per-query polarity ranges."""

    probabilities: tuple[float, ...]
    polarity_ranges: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "probabilities", tuple(float(p) for p in self.probabilities)
        )
        object.__setattr__(
            self,
            "polarity_ranges",
            tuple((float(a), float(b)) for a, b in self.polarity_ranges),
        )
        if len(self.probabilities) != len(self.polarity_ranges):
            raise LengthMismatchError(
                f"{len(self.probabilities)} probabilities vs "
                f"{len(self.polarity_ranges)} polarity ranges"
            )
        for p in self.probabilities:
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"probability {p} outside [0, 1]")
        for a, b in self.polarity_ranges:
            if a > b:
                raise DomainError(f"polarity range ({a}, {b}) has a > b")

    @classmethod
    def unit(cls, probabilities) -> "BernoulliStream":
        probabilities = tuple(probabilities)
        return cls(probabilities, tuple((0.0, 1.0) for _ in probabilities))


def chernoff_bound(expected: float, delta: float) -> float:
    """Two-sided relative-deviation tail bound; depends only on ``expected``."""
    if expected <= 0:
        raise DomainError(f"expected value must be positive, got {expected}")
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return min(1.0, 2.0 * math.exp(-(delta * delta * expected) / (2.0 + delta)))


def hoeffding_bound(ranges, delta: float) -> float:
    """Two-sided absolute-deviation tail bound for bounded summands."""
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    spread = math.fsum((b - a) ** 2 for a, b in ranges)
    if spread == 0.0:
        raise DomainError("all polarity ranges are degenerate (b == a)")
    return min(1.0, 2.0 * math.exp(-2.0 * delta * delta / spread))


def monte_carlo_tail(
    stream: BernoulliStream,
    polarities,
    delta: float,
    mode: str = "absolute",
    trials: int = 100_000,
    seed: int = 0,
) -> float:
    """Empirical tail probability of the polarity-weighted Bernoulli sum.

    ``relative`` mode measures ``|S - E| >= delta * E`` and requires unit
    polarities; ``absolute`` measures ``|S - E| >= delta``.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    p = np.asarray(stream.probabilities)
    eta = np.asarray([float(x) for x in polarities])
    if eta.shape != p.shape:
        raise LengthMismatchError(
            f"{eta.size} polarities for {p.size} probabilities"
        )
    # each weighted term takes values in {0, eta_t} (by p_t); the declared
    # range must contain that support for the absolute bound to apply
    for value, prob, (a, b) in zip(eta, p, stream.polarity_ranges):
        lo = value if prob == 1.0 else min(0.0, value) if prob > 0.0 else 0.0
        hi = value if prob == 1.0 else max(0.0, value) if prob > 0.0 else 0.0
        if lo < a or hi > b:
            raise DomainError(
                f"term support [{lo}, {hi}] outside declared range [{a}, {b}]"
            )

    expected = float(eta @ p)
    if mode == "relative":
        if not np.all(eta == 1.0):
            raise ModeMismatchError("relative mode requires all polarities equal to 1")
        if expected <= 0.0:
            raise DomainError(
                "relative deviations need a positive expected sum"
            )
        threshold = delta * expected
    elif mode == "absolute":
        threshold = delta
    else:
        raise DomainError(f"mode must be 'relative' or 'absolute', got {mode!r}")

    rng = np.random.Generator(np.random.Philox(seed))
    hits = 0
    remaining = trials
    while remaining > 0:
        batch = min(_MC_CHUNK, remaining)
        draws = rng.random((batch, p.size)) < p
        totals = draws @ eta
        hits += int(np.count_nonzero(np.abs(totals - expected) >= threshold))
        remaining -= batch
    return hits / trials
