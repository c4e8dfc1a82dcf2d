"""Sanity-check pair construction and training-data augmentation.

Identical pairs carry a synthetic gold score of 10.0; unrelated pairs,
mined from two legal sources under lexical-overlap thresholds, carry 0.0.
Concatenating them with the human-annotated corpus yields the augmented
training dataset.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Sequence

from .corpus import AnnotatedInstance, Dataset, SentencePair
from .textstats import bleu, rouge_l, rouge_n

__all__ = [
    "MiningThresholds",
    "AugmentedTriplet",
    "mine_unrelated_pairs",
    "make_identical_pairs",
    "build_augmented_dataset",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MiningThresholds:
    """Maximum lexical overlap allowed for an unrelated pair."""

    rouge_max: float = 0.25  # applies to ROUGE-1, ROUGE-2 and ROUGE-L each
    bleu_max: float = 25.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rouge_max <= 1.0:
            raise ValueError("rouge_max must be in [0, 1]")
        if not 0.0 <= self.bleu_max <= 100.0:
            raise ValueError("bleu_max must be in [0, 100]")

    def admits(self, a: str, b: str) -> bool:
        """True iff all four overlap scores are at or below their caps."""
        return (
            rouge_n(a, b, 1) <= self.rouge_max
            and rouge_n(a, b, 2) <= self.rouge_max
            and rouge_l(a, b) <= self.rouge_max
            and bleu(a, b) <= self.bleu_max
        )


@dataclass(frozen=True)
class AugmentedTriplet:
    """A training row: sentence pair plus its gold score in [0, 10]."""

    source_text: str
    simplified_text: str
    gold_lmp: float
    kind: str  # human | identical | unrelated

    def __post_init__(self) -> None:
        if self.kind not in ("human", "identical", "unrelated"):
            raise ValueError(f"unknown triplet kind: {self.kind!r}")
        if self.kind == "identical":
            if self.source_text != self.simplified_text or self.gold_lmp != 10.0:
                raise ValueError("identical triplets must pair a sentence with itself at gold 10.0")
        if self.kind == "unrelated" and self.gold_lmp != 0.0:
            raise ValueError("unrelated triplets must carry gold 0.0")


def mine_unrelated_pairs(
    pool_a: Sequence[str],
    pool_b: Sequence[str],
    thresholds: MiningThresholds = MiningThresholds(),
    count: int = 1,
    seed: int = 42,
) -> list[AugmentedTriplet]:
    """Mine up to ``count`` unrelated pairs under the overlap thresholds.

    Pool A is sampled without replacement in a seeded shuffle order; for
    each A-sentence the B-pool is scanned in its own seeded shuffle order
    and the first qualifying partner is taken. Deterministic given the
    seed. Emits fewer than ``count`` with a warning when the pools are
    exhausted.
    """
    if not pool_a or not pool_b:
        raise ValueError("both pools must be non-empty")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = random.Random(seed)
    a_order = list(pool_a)
    rng.shuffle(a_order)
    b_order = list(pool_b)
    rng.shuffle(b_order)

    mined: list[AugmentedTriplet] = []
    for a in a_order:
        if len(mined) >= count:
            break
        for b in b_order:
            if thresholds.admits(a, b):
                mined.append(AugmentedTriplet(a, b, gold_lmp=0.0, kind="unrelated"))
                break
    if len(mined) < count:
        logger.warning(
            "pools exhausted: mined %d of %d requested unrelated pairs", len(mined), count
        )
    return mined


def make_identical_pairs(sentences: Sequence[str]) -> list[AugmentedTriplet]:
    """One (s, s, 10.0) triplet per sentence; blanks skipped with a warning."""
    triplets: list[AugmentedTriplet] = []
    for index, sentence in enumerate(sentences):
        if not sentence.strip():
            logger.warning("skipping empty sentence at index %d", index)
            continue
        triplets.append(AugmentedTriplet(sentence, sentence, gold_lmp=10.0, kind="identical"))
    return triplets


def _human_gold(instance: AnnotatedInstance) -> float:
    if instance.gold_lmp is not None:
        return instance.gold_lmp
    if instance.annotations:
        scores = [a.lmp_score for a in instance.annotations]
        return sum(scores) / len(scores)
    raise ValueError(f"instance {instance.pair.id!r} has neither gold_lmp nor annotations")


def build_augmented_dataset(
    base: Dataset,
    identical: Sequence[AugmentedTriplet] = (),
    unrelated: Sequence[AugmentedTriplet] = (),
    name: str | None = None,
) -> Dataset:
    """Concatenate the human dataset with synthetic triplets.

    Human rows keep their averaged human gold; synthetic rows carry 10.0 or
    0.0 and provenance "augmented". Raises on id collision (synthetic ids
    are generated as ``identical-N`` / ``unrelated-N``).
    """
    instances: list[AnnotatedInstance] = []
    for inst in base:
        gold = _human_gold(inst)
        instances.append(
            AnnotatedInstance(
                pair=inst.pair,
                annotations=inst.annotations,
                gold_lmp=gold,
                provenance=inst.provenance,
            )
        )
    for prefix, triplets in (("identical", identical), ("unrelated", unrelated)):
        for index, triplet in enumerate(triplets):
            instances.append(
                AnnotatedInstance(
                    pair=SentencePair(
                        f"{prefix}-{index}", triplet.source_text, triplet.simplified_text
                    ),
                    gold_lmp=triplet.gold_lmp,
                    provenance="augmented",
                )
            )
    # Dataset construction enforces pairwise-distinct ids.
    return Dataset(name=name or f"{base.name}-augmented", instances=tuple(instances))
