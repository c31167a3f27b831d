"""Synthetic datasets and randomized property-test instances.

Two desk-scale benchmark generators (a two-group binary-relevance stream and
a continuous-relevance variant with disparate group uncertainty), a
constructed polarity-flip scenario in which a ranking looks perfectly fair
until query polarity is accounted for, and a generic random-instance
factory for property harnesses. All generation is a pure function of its
spec/seed.
"""

from dataclasses import dataclass

import numpy as np

from .core import Assignment, AttentionModel, Dataset, QueryEvent, normalize_relevance
from .errors import SpecError

POLARITY_LAWS = ("unit", "signed", "continuous")


@dataclass(frozen=True)
class SynthSpec:
    n: int = 200
    T: int = 16
    seed: int = 0
    variant: str = "binary"

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise SpecError(f"n must be even and >= 2 (two equal groups), got {self.n}")
        if self.T < 2 or self.T % 2:
            raise SpecError(f"T must be even and >= 2 (balanced polarities), got {self.T}")
        if self.variant not in ("binary", "continuous"):
            raise SpecError(f"variant must be 'binary' or 'continuous', got {self.variant!r}")


def _two_group_dataset(n: int) -> Dataset:
    width = len(str(n // 2))
    males = tuple(f"m{i:0{width}d}" for i in range(1, n // 2 + 1))
    females = tuple(f"f{i:0{width}d}" for i in range(1, n // 2 + 1))
    group_of = {ind: "male" for ind in males} | {ind: "female" for ind in females}
    return Dataset(males + females, group_of)


def _alternating_polarity(T: int) -> list[float]:
    return [1.0 if t % 2 else -1.0 for t in range(1, T + 1)]


def gen_synth_binary(spec: SynthSpec) -> tuple[Dataset, list[QueryEvent]]:
    """Two equal groups; raw relevance 1.01 vs 0.99 flipping with polarity.

    On positive-polarity queries the ``male`` group scores 1.01 and the
    ``female`` group 0.99; negative-polarity queries mirror the scores.
    Polarity alternates +1, -1 across the stream.
    """
    if spec.variant != "binary":
        raise SpecError(f"binary generator got variant {spec.variant!r}")
    dataset = _two_group_dataset(spec.n)
    stream = []
    for t, pol in enumerate(_alternating_polarity(spec.T), start=1):
        hi, lo = (1.01, 0.99) if pol > 0 else (0.99, 1.01)
        raw = {
            ind: hi if dataset.group_of[ind] == "male" else lo
            for ind in dataset.individuals
        }
        stream.append(
            QueryEvent(f"q{t:04d}", t, (pol,), normalize_relevance(raw))
        )
    return dataset, stream


def gen_synth_cont(
    spec: SynthSpec, std_a: float = 0.2, std_b: float = 0.1
) -> tuple[Dataset, list[QueryEvent]]:
    """Two equal groups with normal raw relevance of disparate spread.

    Group ``male`` draws from Normal(1, std_a), group ``female`` from
    Normal(1, std_b), truncated below at 1e-6, then normalized per query.
    """
    if spec.variant != "continuous":
        raise SpecError(f"continuous generator got variant {spec.variant!r}")
    dataset = _two_group_dataset(spec.n)
    rng = np.random.default_rng(spec.seed)
    half = spec.n // 2
    stream = []
    for t, pol in enumerate(_alternating_polarity(spec.T), start=1):
        draws_a = rng.normal(1.0, std_a, half) if std_a > 0 else np.ones(half)
        draws_b = rng.normal(1.0, std_b, half) if std_b > 0 else np.ones(half)
        raw_values = np.maximum(np.concatenate([draws_a, draws_b]), 1e-6)
        raw = dict(zip(dataset.individuals, raw_values.tolist()))
        stream.append(
            QueryEvent(f"q{t:04d}", t, (pol,), normalize_relevance(raw))
        )
    return dataset, stream


def gen_synth(spec: SynthSpec) -> tuple[Dataset, list[QueryEvent]]:
    if spec.variant == "binary":
        return gen_synth_binary(spec)
    return gen_synth_cont(spec)


def gen_random_instance(
    n: int,
    G: int,
    T: int,
    polarity_law: str = "signed",
    seed: int = 0,
    components: int = 1,
) -> tuple[Dataset, list[QueryEvent]]:
    """Random grouped dataset and stream for property harnesses.

    Relevance is Dirichlet(1) per query; polarities follow ``polarity_law``
    (``unit``: all 1, ``signed``: uniform over {-1, +1}, ``continuous``:
    uniform over [-1, 1]). Every group is non-empty.
    """
    if not (n >= G >= 1) or T < 1 or components < 1:
        raise SpecError(f"need n >= G >= 1, T >= 1, components >= 1; got {(n, G, T, components)}")
    if polarity_law not in POLARITY_LAWS:
        raise SpecError(f"polarity_law must be one of {POLARITY_LAWS}, got {polarity_law!r}")
    rng = np.random.default_rng(seed)
    width = len(str(n))
    individuals = tuple(f"i{i:0{width}d}" for i in range(n))
    labels = np.concatenate([np.arange(G), rng.integers(0, G, n - G)])
    group_of = {ind: f"g{labels[i]}" for i, ind in enumerate(individuals)}
    dataset = Dataset(individuals, group_of)

    stream = []
    for t in range(1, T + 1):
        rel = rng.dirichlet(np.ones(n))
        if polarity_law == "unit":
            pol = np.ones(components)
        elif polarity_law == "signed":
            pol = rng.choice([-1.0, 1.0], components)
        else:
            pol = rng.uniform(-1.0, 1.0, components)
        stream.append(
            QueryEvent(f"q{t:04d}", t, tuple(pol.tolist()), dict(zip(individuals, rel.tolist())))
        )
    return dataset, stream


def fairwashing_scenario():
    """Two individuals, two opposite-polarity queries, all-or-nothing attention.

    Individual ``a`` is ranked first on the positive query and ``b`` first
    on the negative one. Ignoring polarity the cumulative attention of both
    individuals exactly matches their cumulative relevance; accounting for
    polarity, each is off by exactly 1.

    Returns (dataset, stream, assignments, attention_model); feed the
    assignments through a ledger to reproduce the measurement.
    """
    dataset = Dataset(("a", "b"), {"a": "g1", "b": "g2"})
    stream = [
        QueryEvent("q_pos", 1, (1.0,), {"a": 0.5, "b": 0.5}),
        QueryEvent("q_neg", 2, (-1.0,), {"a": 0.5, "b": 0.5}),
    ]
    assignments = [Assignment(("a", "b")), Assignment(("b", "a"))]
    return dataset, stream, assignments, AttentionModel(cutoff=1)
