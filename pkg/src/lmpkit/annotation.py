"""Human annotation model: three-step scoring, aggregation and agreement.

The scoring procedure is: pick a characterization class, pick a score
bracket (Accurate, Seems Imprecise, Off-Track), then deduct one point per
legal error from the bracket maximum, never dropping below 1. Aggregation
is majority vote for categorical labels (seeded random tie-break) and an
unrounded mean for the 1-10 LMP score.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Optional, Sequence

__all__ = [
    "SimplicityLevel",
    "CharacterizationClass",
    "Bracket",
    "ErrorCounts",
    "Annotation",
    "compute_lmp_score",
    "aggregate_categorical",
    "aggregate_lmp",
    "percent_agreement",
    "krippendorff_alpha",
    "annotator_accuracy",
]


class SimplicityLevel(str, Enum):
    """Four-level perceived simplicity of the simplification."""

    EASIER_TO_READ = "easier_to_read"
    EQUAL_TO_READ = "equal_to_read"
    MORE_DIFFICULT = "more_difficult"
    NO_SIMPLIFICATION = "no_simplification"


# (id, French label, English label). Class 18 ("Autres") requires a
# free-text justification when used.
_CHARACTERIZATION_CLASSES = [
    (1, "Description de l'avenant", "Description of endorsement"),
    (2, "Conditions d'applications", "Conditions of application"),
    (3, "Exclusions ou restrictions", "Exclusions or restrictions"),
    (4, "Dommages (valeur des, calcul des et description des)", "Damage (value, calculation and description)"),
    (5, "Indemnités (indemnités payables, indemnité par remplacement, calcul de la valeur des, montant d'assurance et processus d'indemnisation)", "Indemnities (payable, replacement, value calculation, insured amount and process)"),
    (6, "Définition", "Definition"),
    (7, "Frais (remboursement et prise en charge des)", "Expenses (reimbursement and assumption of costs)"),
    (8, "Prime (paiement de et remboursement de)", "Premium (payment and reimbursement)"),
    (9, "Obligations de l'assuré (obligation et engagement formel)", "Obligations of the insured"),
    (10, "Conséquences du non-respect des obligations", "Consequences of non-compliance"),
    (11, "Obligations de l'assureur", "Insurer's obligations"),
    (12, "Droits de l'assuré (incluant la renonciation aux droits)", "Insured's rights (including waiver of rights)"),
    (13, "Droits de l'assureur (incluant la renonciation aux droits)", "Insurer's rights (including waiver of rights)"),
    (14, "Subrogation (et exceptions à la subrogation)", "Subrogation (and exceptions to subrogation)"),
    (15, "Prise d'effet et renouvellement", "Effective date and renewal"),
    (16, "Fin du contrat et résiliation", "End of contract and termination"),
    (17, "Recours (règlement de différend, action, mandat de représentation, arbitrage, etc.)", "Legal recourse (dispute resolution, action, representation mandate, arbitration, etc.)"),
    (18, "Autres", "Others"),
]

CharacterizationClass = Enum(  # type: ignore[misc]
    "CharacterizationClass",
    {f"CLASS_{cid}": cid for cid, _, _ in _CHARACTERIZATION_CLASSES},
)
CharacterizationClass.__doc__ = "The 18 insurance-clause characterization classes."

_FRENCH_LABELS = {cid: fr for cid, fr, _ in _CHARACTERIZATION_CLASSES}
_ENGLISH_LABELS = {cid: en for cid, _, en in _CHARACTERIZATION_CLASSES}


def characterization_label(cls: "CharacterizationClass", language: str = "fr") -> str:
    """French or English label of a characterization class."""
    labels = _FRENCH_LABELS if language == "fr" else _ENGLISH_LABELS
    return labels[cls.value]


OTHERS_CLASS = CharacterizationClass.CLASS_18


class Bracket(str, Enum):
    """Initial score bracket from which error deductions start."""

    ACCURATE = "accurate"
    SEEMS_IMPRECISE = "imprecise"
    OFF_TRACK = "offtrack"

    @property
    def max_score(self) -> int:
        return {"accurate": 10, "imprecise": 6, "offtrack": 1}[self.value]


@dataclass(frozen=True)
class ErrorCounts:
    """Per-type legal error tallies; each error deducts one point."""

    hallucinations: int = 0
    omissions: int = 0
    consistency: int = 0
    confusions: int = 0

    def __post_init__(self) -> None:
        for name in ("hallucinations", "omissions", "consistency", "confusions"):
            if getattr(self, name) < 0:
                raise ValueError(f"error count {name} must be non-negative")

    @property
    def total(self) -> int:
        return self.hallucinations + self.omissions + self.consistency + self.confusions


@dataclass(frozen=True)
class Annotation:
    """One annotator's full judgment of a sentence pair."""

    annotator_id: str
    simplicity: SimplicityLevel
    characterization: CharacterizationClass
    bracket: Bracket
    errors: ErrorCounts = field(default_factory=ErrorCounts)
    comment: Optional[str] = None
    elapsed_seconds: Optional[int] = None

    def __post_init__(self) -> None:
        if self.characterization == OTHERS_CLASS and not (self.comment or "").strip():
            raise ValueError("characterization 'Others' requires a free-text justification")

    @property
    def lmp_score(self) -> int:
        return compute_lmp_score(self.bracket, self.errors)

    def to_json(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "simplicity": self.simplicity.value,
            "characterization": self.characterization.value,
            "bracket": self.bracket.value,
            "errors": {
                "hallucinations": self.errors.hallucinations,
                "omissions": self.errors.omissions,
                "consistency": self.errors.consistency,
                "confusions": self.errors.confusions,
            },
            "lmp_score": self.lmp_score,
            "comment": self.comment,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Annotation":
        annotation = cls(
            annotator_id=obj["annotator_id"],
            simplicity=SimplicityLevel(obj["simplicity"]),
            characterization=CharacterizationClass(obj["characterization"]),
            bracket=Bracket(obj["bracket"]),
            errors=ErrorCounts(**obj.get("errors", {})),
            comment=obj.get("comment"),
            elapsed_seconds=obj.get("elapsed_seconds"),
        )
        stated = obj.get("lmp_score")
        if stated is not None and stated != annotation.lmp_score:
            raise ValueError(
                f"stored lmp_score {stated} does not match recomputed {annotation.lmp_score}"
            )
        return annotation


def compute_lmp_score(bracket: Bracket, errors: ErrorCounts) -> int:
    """Deduction-rule score in [1, 10].

    Off-Track is 1 regardless of errors; otherwise one point per error off
    the bracket maximum, floored at 1.
    """
    if bracket == Bracket.OFF_TRACK:
        return 1
    return max(1, bracket.max_score - errors.total)


def aggregate_categorical(votes: Sequence[Hashable], seed: int = 0) -> Hashable:
    """Majority vote; ties broken by a seeded uniform choice among the tied."""
    if not votes:
        raise ValueError("cannot aggregate an empty vote list")
    counts = Counter(votes)
    best = max(counts.values())
    # Tied labels in first-appearance order so the seeded draw is stable.
    tied = [label for label in dict.fromkeys(votes) if counts[label] == best]
    if len(tied) == 1:
        return tied[0]
    return random.Random(seed).choice(tied)


def aggregate_lmp(scores: Sequence[int]) -> float:
    """Unrounded arithmetic mean of per-annotator 1-10 scores."""
    if not scores:
        raise ValueError("cannot average an empty score list")
    return sum(scores) / len(scores)


Matrix = Sequence[Sequence[Optional[Hashable]]]


def percent_agreement(matrix: Matrix) -> float:
    """Mean over items of agreeing annotator pairs / total pairs, x100.

    ``matrix`` is annotators x items; ``None`` marks a missing rating and
    pairs with a missing member are skipped.
    """
    if len(matrix) < 2:
        raise ValueError("percent agreement requires at least 2 annotators")
    n_items = len(matrix[0])
    if any(len(row) != n_items for row in matrix) or n_items == 0:
        raise ValueError("matrix rows must be non-empty and equal-length")
    item_rates = []
    for j in range(n_items):
        ratings = [row[j] for row in matrix if row[j] is not None]
        pairs = agreeing = 0
        for a in range(len(ratings)):
            for b in range(a + 1, len(ratings)):
                pairs += 1
                agreeing += ratings[a] == ratings[b]
        if pairs:
            item_rates.append(agreeing / pairs)
    if not item_rates:
        raise ValueError("no item has two or more ratings")
    return 100.0 * sum(item_rates) / len(item_rates)


def _delta_sq(a, b, level: str) -> float:
    if level == "nominal":
        return 0.0 if a == b else 1.0
    if level == "interval":
        return (float(a) - float(b)) ** 2
    raise ValueError(f"unsupported measurement level: {level}")


def krippendorff_alpha(matrix: Matrix, level: str = "nominal") -> float:
    """Krippendorff's alpha via the coincidence-matrix formulation.

    ``level`` selects the squared distance: indicator for "nominal",
    squared difference for "interval". Items with fewer than two ratings
    are ignored; raises if none remain. Returns exactly 1.0 on perfect
    agreement.
    """
    if len(matrix) < 2:
        raise ValueError("alpha requires at least 2 annotators")
    n_items = len(matrix[0])
    if any(len(row) != n_items for row in matrix):
        raise ValueError("matrix rows must be equal-length")

    coincidence: Counter = Counter()
    for j in range(n_items):
        ratings = [row[j] for row in matrix if row[j] is not None]
        m = len(ratings)
        if m < 2:
            continue
        for a in range(m):
            for b in range(m):
                if a != b:
                    coincidence[(ratings[a], ratings[b])] += 1.0 / (m - 1)
    if not coincidence:
        raise ValueError("alpha requires at least one item with two or more ratings")

    values = sorted({v for pair in coincidence for v in pair}, key=repr)
    totals = {v: sum(coincidence[(v, w)] for w in values) for v in values}
    n_total = sum(totals.values())

    observed = sum(
        coincidence[(v, w)] * _delta_sq(v, w, level) for v in values for w in values
    )
    expected = sum(
        totals[v] * totals[w] * _delta_sq(v, w, level) for v in values for w in values
    )
    if expected == 0.0:
        # All pooled ratings are identical: no disagreement is possible.
        return 1.0
    return 1.0 - (n_total - 1) * observed / expected


def annotator_accuracy(matrix: Matrix, gold: Sequence[Hashable]) -> float:
    """Mean over annotators of the fraction of items matching gold, x100.

    Missing ratings are excluded from an annotator's denominator.
    """
    if not matrix:
        raise ValueError("empty matrix")
    if any(len(row) != len(gold) for row in matrix):
        raise ValueError("matrix and gold shapes do not match")
    per_annotator = []
    for row in matrix:
        rated = [(r, g) for r, g in zip(row, gold) if r is not None]
        if rated:
            per_annotator.append(sum(r == g for r, g in rated) / len(rated))
    if not per_annotator:
        raise ValueError("no annotator has any rating")
    return 100.0 * sum(per_annotator) / len(per_annotator)
