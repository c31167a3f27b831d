"""File formats: query streams, group maps, run files, and reports.

Stream files are UTF-8 JSON lines, one query per line::

    {"query_id": "q0001", "t": 1, "polarity": [1.0], "relevance": {"a": 0.5, ...}}

Timesteps must be strictly increasing; every query must rank the same set
of individuals; relevance must be normalized within 1e-6 (pass ``raw=True``
to renormalize arbitrary non-negative scores with a warning). Serialization
is canonical (fixed key order, relevance keys sorted, shortest round-trip
floats), so ``generate -> load -> save`` is byte-identical.

Group files are CSV with the header ``individual_id,group_id``.

Run files are self-contained JSON: the config echo, the embedded stream
lines, and the emitted orderings; evaluation replays them exactly.

Report files are JSON with deterministic key order and every number
serialized at 12 significant digits; non-finite sentinels use the
``Infinity``/``NaN`` tokens (readable by Python's json module).
"""

import csv
import hashlib
import json
import math
import warnings
from pathlib import Path

from .core import Assignment, AttentionModel, Dataset, Ledger, QueryEvent
from .errors import CoverageError, ParseError, StreamOrderError, ValidationError
from .rerank import RerankConfig, RunResult

STREAM_SUM_TOL = 1e-6
EXACT_SUM_TOL = 1e-9


def stream_line(query: QueryEvent) -> str:
    """Canonical one-line serialization of a query."""
    record = {
        "query_id": query.query_id,
        "t": query.t,
        "polarity": list(query.polarity),
        "relevance": {k: query.relevance[k] for k in sorted(query.relevance)},
    }
    return json.dumps(record, ensure_ascii=False)


def save_stream(path, stream) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for query in stream:
            fh.write(stream_line(query) + "\n")


def _parse_query(record: dict, lineno: int, raw: bool) -> QueryEvent:
    try:
        query_id = str(record["query_id"])
        t = record["t"]
        polarity = record["polarity"]
        relevance = record["relevance"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed field ({exc})", lineno) from None
    if not isinstance(t, int):
        raise ParseError(f"timestep must be an integer, got {t!r}", lineno)
    if not isinstance(polarity, list) or not polarity:
        raise ParseError("polarity must be a non-empty array", lineno)
    if not isinstance(relevance, dict) or not relevance:
        raise ParseError("relevance must be a non-empty object", lineno)
    values = {str(k): float(v) for k, v in relevance.items()}
    total = math.fsum(values.values())
    if abs(total - 1.0) > STREAM_SUM_TOL:
        if not raw:
            raise ValidationError(
                f"line {lineno}: relevance sums to {total!r}; "
                "not normalized within 1e-6 (use raw mode to renormalize)"
            )
        warnings.warn(
            f"stream line {lineno}: renormalizing raw relevance (sum {total!r})",
            stacklevel=3,
        )
        values = {k: v / total for k, v in values.items()}
    elif abs(total - 1.0) > EXACT_SUM_TOL:
        # inside the file tolerance but outside the in-memory one
        values = {k: v / total for k, v in values.items()}
    return QueryEvent(query_id, t, tuple(float(p) for p in polarity), values)


def load_stream(path, raw: bool = False) -> tuple[tuple[str, ...], list[QueryEvent]]:
    """Parse and validate a stream file.

    Returns the inferred individual set (sorted) and the query list. Raises
    ParseError (with line number), StreamOrderError, ValidationError, or
    CoverageError when queries rank different individual sets.
    """
    path = Path(path)
    stream: list[QueryEvent] = []
    individuals: set[str] | None = None
    prev_t = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
            query = _parse_query(record, lineno, raw)
            if query.t <= prev_t:
                raise StreamOrderError(
                    f"line {lineno}: timestep {query.t} not greater than {prev_t}"
                )
            prev_t = query.t
            if individuals is None:
                individuals = set(query.relevance)
            elif set(query.relevance) != individuals:
                raise CoverageError(
                    f"line {lineno}: query {query.query_id!r} ranks a different "
                    "individual set than earlier queries"
                )
            stream.append(query)
    if not stream:
        raise ValidationError(f"stream file {path} contains no queries")
    return tuple(sorted(individuals)), stream


def save_groups(path, dataset: Dataset) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["individual_id", "group_id"])
        for ind in dataset.individuals:
            writer.writerow([ind, dataset.group_of[ind]])


def load_groups(path) -> dict[str, str]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["individual_id", "group_id"]:
            raise ParseError(
                f"groups file must start with header 'individual_id,group_id', got {header}",
                1,
            )
        group_of: dict[str, str] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected two columns, got {len(row)}", lineno)
            ind, group = row[0].strip(), row[1].strip()
            if ind in group_of:
                raise ParseError(f"duplicate individual {ind!r}", lineno)
            group_of[ind] = group
    if not group_of:
        raise ValidationError(f"groups file {path} contains no rows")
    return group_of


def build_dataset(individuals, group_of: dict[str, str] | None) -> Dataset:
    """Combine a stream's individual set with an optional group map."""
    if group_of is None:
        return Dataset.single_group(individuals)
    missing = [i for i in individuals if i not in group_of]
    if missing:
        raise ValidationError(
            f"groups file misses {len(missing)} individual(s), e.g. {missing[:3]}"
        )
    return Dataset(tuple(individuals), {i: group_of[i] for i in individuals})


def split_by_query_id(stream, fraction: float = 0.5, salt: str = ""):
    """Deterministic tuning/test split by hashing query identifiers.

    A query lands in the first (tuning) part when the leading 8 bytes of
    sha256(salt + ":" + query_id) fall below ``fraction`` of the hash range;
    both parts keep their original timesteps (still strictly increasing).
    No tuning protocol is prescribed on top of this.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValidationError(f"split fraction must be in [0, 1], got {fraction}")
    threshold = int(fraction * 2**64)
    tuning, test = [], []
    for query in stream:
        digest = hashlib.sha256(f"{salt}:{query.query_id}".encode()).digest()
        bucket = int.from_bytes(digest[:8], "big")
        (tuning if bucket < threshold else test).append(query)
    return tuning, test


# -- reports -------------------------------------------------------------------


def _round_floats(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON: 12-significant-digit floats, 2-space indent."""
    return json.dumps(_round_floats(obj), indent=2, ensure_ascii=False)


def save_report(path, report_dict: dict) -> None:
    Path(path).write_text(canonical_json(report_dict) + "\n", encoding="utf-8")


# -- run files -------------------------------------------------------------------


def save_run(path, result: RunResult, stream) -> None:
    """Self-contained run file: config echo, stream lines, emitted orderings."""
    payload = {
        "config": result.config.to_dict(),
        "stream": [stream_line(q) for q in stream],
        "query_ids": list(result.query_ids),
        "orderings": [list(a.ordering) for a in result.assignments],
        "ndcg": list(result.ndcg),
        "fallback": [bool(f) for f in result.fallback],
        "objective_trace": list(result.objective_trace),
        "sweeps": result.sweeps,
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_run(path) -> dict:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"run file is not valid JSON ({exc.msg})") from None
    for key in ("config", "stream", "orderings", "fallback"):
        if key not in payload:
            raise ValidationError(f"run file {path} is missing {key!r}")
    return payload


def replay_run(payload: dict, group_of: dict[str, str] | None = None) -> RunResult:
    """Rebuild a RunResult (ledger included) from a saved run file."""
    config = RerankConfig(**payload["config"])
    stream = [
        _parse_query(json.loads(line), lineno, raw=False)
        for lineno, line in enumerate(payload["stream"], start=1)
    ]
    individuals = tuple(sorted(stream[0].relevance))
    dataset = build_dataset(individuals, group_of)
    attention = AttentionModel(config.k_att)
    ledger = Ledger(dataset, stream[0].components)
    assignments = []
    for query, ordering in zip(stream, payload["orderings"]):
        assignment = Assignment(tuple(ordering))
        ledger.update(query, assignment, attention)
        assignments.append(assignment)
    return RunResult(
        config=config,
        query_ids=list(payload.get("query_ids", [q.query_id for q in stream])),
        assignments=assignments,
        ndcg=[float(x) for x in payload.get("ndcg", [])],
        fallback=[bool(f) for f in payload["fallback"]],
        objective_trace=[
            math.nan if x is None else float(x)
            for x in payload.get("objective_trace", [])
        ],
        ledger=ledger,
        sweeps=int(payload.get("sweeps", 0)),
    )
