"""Metric meta-evaluation: adapters, normalization, statistics, sanity
checks and benchmark reports.

External metrics plug in as adapters declaring a name, a native output
range and a score function; the harness normalizes everything onto the
[0, 10] scale by decimal scaling before comparing against human judgment.
"""
from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .corpus import Dataset, SentencePair

__all__ = [
    "MetricAdapter",
    "SubprocessAdapter",
    "BenchmarkRow",
    "BenchmarkReport",
    "normalize",
    "pearson",
    "rmse",
    "overshoot_rate",
    "sanity_check",
    "run_benchmark",
    "exact_match_adapter",
    "constant_adapter",
]

NATIVE_RANGES = ("0-1", "0-100", "0-10")


@dataclass(frozen=True)
class MetricAdapter:
    """A named scorer with a declared native output range.

    ``native_range`` is one of "0-1", "0-100" or "0-10"; raw scores are
    clipped into the declared range before normalization. ``reentrant``
    marks adapters safe to call concurrently.
    """

    name: str
    native_range: str
    score: Callable[[SentencePair], float]
    reentrant: bool = False

    def __post_init__(self) -> None:
        if self.native_range not in NATIVE_RANGES:
            raise ValueError(f"undeclared native range: {self.native_range!r}")

    def normalized_score(self, pair: SentencePair) -> float:
        low, high = {"0-1": (0.0, 1.0), "0-100": (0.0, 100.0), "0-10": (0.0, 10.0)}[
            self.native_range
        ]
        raw = min(high, max(low, self.score(pair)))
        return normalize(raw, self.native_range)


def normalize(score: float, native_range: str) -> float:
    """Decimal scaling onto [0, 10]: [0,1] x10, [0,100] /10, [0,10] identity."""
    if native_range == "0-1":
        return score * 10.0
    if native_range == "0-100":
        return score / 10.0
    if native_range == "0-10":
        return score
    raise ValueError(f"undeclared native range: {native_range!r}")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; raises on zero variance."""
    if len(x) != len(y):
        raise ValueError("vectors must have equal length")
    n = len(x)
    if n < 2:
        raise ValueError("correlation requires at least 2 points")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    var_x = sum((a - mean_x) ** 2 for a in x)
    var_y = sum((b - mean_y) ** 2 for b in y)
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("correlation undefined for zero-variance input")
    return cov / math.sqrt(var_x * var_y)


def rmse(pred: Sequence[float], gold: Sequence[float]) -> float:
    """Root-mean-squared error between two equal-length vectors."""
    if len(pred) != len(gold):
        raise ValueError("vectors must have equal length")
    if not pred:
        raise ValueError("vectors must be non-empty")
    return math.sqrt(sum((p - g) ** 2 for p, g in zip(pred, gold)) / len(pred))


def overshoot_rate(pred: Sequence[float], gold: Sequence[float]) -> float:
    """Percentage of predictions strictly above gold."""
    if len(pred) != len(gold):
        raise ValueError("vectors must have equal length")
    if not pred:
        raise ValueError("vectors must be non-empty")
    return 100.0 * sum(p > g for p, g in zip(pred, gold)) / len(pred)


def sanity_check(metric: MetricAdapter, pairs: Sequence[SentencePair], kind: str) -> float:
    """Percentage of pairs passing the identical/unrelated sanity check.

    On the normalized [0, 10] scale, identical pairs pass at >= 9.9 and
    unrelated pairs at <= 0.1 (the 1% floating-point margin).
    """
    if kind not in ("identical", "unrelated"):
        raise ValueError(f"unknown sanity-check kind: {kind!r}")
    if not pairs:
        raise ValueError("sanity check requires at least one pair")
    passed = 0
    for pair in pairs:
        score = metric.normalized_score(pair)
        passed += score >= 9.9 if kind == "identical" else score <= 0.1
    return 100.0 * passed / len(pairs)


@dataclass(frozen=True)
class BenchmarkRow:
    """Per-metric benchmark statistics; None marks an undefined value."""

    metric: str
    pearson: Optional[float]
    rmse: Optional[float]
    pct_identical_pass: Optional[float]
    pct_unrelated_pass: Optional[float]
    pct_overshoot: Optional[float]
    pearson_std: Optional[float] = None
    rmse_std: Optional[float] = None
    failed: bool = False


@dataclass(frozen=True)
class BenchmarkReport:
    """Benchmark results plus dataset fingerprints for reproducibility.

    Note: the unrelated check is "score <= 1% of scale" per the sanity-check
    definition; overshoot is lower-is-better.
    """

    rows: tuple[BenchmarkRow, ...]
    fingerprints: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            [
                "metric",
                "pearson",
                "pearson_std",
                "rmse",
                "rmse_std",
                "pct_identical_ge_99",
                "pct_unrelated_le_1",
                "pct_overshoot",
            ]
        )
        for row in self.rows:
            writer.writerow(
                [
                    row.metric,
                    _fmt(row.pearson),
                    _fmt(row.pearson_std),
                    _fmt(row.rmse),
                    _fmt(row.rmse_std),
                    _fmt(row.pct_identical_pass),
                    _fmt(row.pct_unrelated_pass),
                    _fmt(row.pct_overshoot),
                ]
            )
        return buffer.getvalue()

    def to_table(self) -> str:
        header = f"{'Metric':<20} {'Pearson':>10} {'RMSE':>8} {'%>=99%':>8} {'%<=1%':>8} {'%overshoot':>11}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            if row.failed:
                lines.append(f"{row.metric:<20} {'FAILED':>10}")
                continue
            lines.append(
                f"{row.metric:<20} {_fmt(row.pearson):>10} {_fmt(row.rmse):>8}"
                f" {_fmt(row.pct_identical_pass):>8} {_fmt(row.pct_unrelated_pass):>8}"
                f" {_fmt(row.pct_overshoot):>11}"
            )
        lines.append("Note: overshoot is lower-is-better; unrelated pass means score <= 1% of scale.")
        return "\n".join(lines)


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _fingerprint(texts: Sequence[str]) -> str:
    import hashlib

    digest = hashlib.sha256()
    for text in texts:
        digest.update(text.encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()


def run_benchmark(
    adapters: Sequence[MetricAdapter],
    test_set: Dataset,
    identical_pairs: Sequence[SentencePair] = (),
    unrelated_pairs: Sequence[SentencePair] = (),
) -> BenchmarkReport:
    """Score every adapter on the test set and both sanity-check pools.

    Adapter failures mark the row failed and the run continues. Rows are
    sorted by adapter name; output is deterministic for deterministic
    adapters.
    """
    golds = []
    for inst in test_set:
        if inst.gold_lmp is None:
            raise ValueError(f"test instance {inst.pair.id!r} lacks a gold LMP score")
        golds.append(inst.gold_lmp)

    rows: list[BenchmarkRow] = []
    for adapter in sorted(adapters, key=lambda a: a.name):
        try:
            preds = [adapter.normalized_score(inst.pair) for inst in test_set]
            try:
                pearson_value: Optional[float] = pearson(preds, golds)
            except ValueError:
                pearson_value = None
            rows.append(
                BenchmarkRow(
                    metric=adapter.name,
                    pearson=pearson_value,
                    rmse=rmse(preds, golds),
                    pct_identical_pass=(
                        sanity_check(adapter, identical_pairs, "identical")
                        if identical_pairs
                        else None
                    ),
                    pct_unrelated_pass=(
                        sanity_check(adapter, unrelated_pairs, "unrelated")
                        if unrelated_pairs
                        else None
                    ),
                    pct_overshoot=overshoot_rate(preds, golds),
                )
            )
        except Exception:
            rows.append(
                BenchmarkRow(
                    metric=adapter.name,
                    pearson=None,
                    rmse=None,
                    pct_identical_pass=None,
                    pct_unrelated_pass=None,
                    pct_overshoot=None,
                    failed=True,
                )
            )
    fingerprints = {
        "test_set": _fingerprint(
            [inst.pair.source_text + "\n" + inst.pair.simplified_text for inst in test_set]
        ),
        "identical": _fingerprint([p.source_text for p in identical_pairs]),
        "unrelated": _fingerprint([p.source_text for p in unrelated_pairs]),
    }
    return BenchmarkReport(rows=tuple(rows), fingerprints=fingerprints)


class SubprocessAdapter:
    """Wrap an external scorer speaking newline-delimited JSON on stdio.

    Protocol: one request {"source": str, "simplified": str} per line on
    stdin, one response {"score": number} per line on stdout.
    """

    def __init__(self, name: str, native_range: str, command: Sequence[str]):
        self.command = list(command)
        self.adapter = MetricAdapter(name=name, native_range=native_range, score=self._score)

    def _score(self, pair: SentencePair) -> float:
        request = json.dumps({"source": pair.source_text, "simplified": pair.simplified_text})
        result = subprocess.run(
            self.command, input=request + "\n", capture_output=True, text=True, check=True
        )
        return float(json.loads(result.stdout.strip().splitlines()[-1])["score"])


def exact_match_adapter() -> MetricAdapter:
    """Reference adapter: 10 iff the two texts are equal, else 0."""
    return MetricAdapter(
        name="exact-match",
        native_range="0-10",
        score=lambda pair: 10.0 if pair.source_text == pair.simplified_text else 0.0,
        reentrant=True,
    )


def constant_adapter(value: float, name: str = "constant") -> MetricAdapter:
    """Adapter that returns a fixed score, useful as a degenerate baseline."""
    return MetricAdapter(
        name=name, native_range="0-10", score=lambda pair: value, reentrant=True
    )
