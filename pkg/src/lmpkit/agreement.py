"""Inter-annotator agreement report over an annotated dataset.

Builds annotators x items matrices for the three annotation tasks
(simplicity level, characterization, LMP score) and computes percent
agreement, Krippendorff's alpha and per-annotator accuracy against the
aggregated gold label. Alpha uses the nominal distance for the two
categorical tasks and the interval distance for the 1-10 score.
"""
from __future__ import annotations

from typing import Hashable, Optional, Sequence

from .annotation import (
    aggregate_categorical,
    aggregate_lmp,
    annotator_accuracy,
    krippendorff_alpha,
    percent_agreement,
)
from .corpus import Dataset

__all__ = ["task_matrix", "agreement_report"]

TASKS = ("simplicity", "characterization", "lmp")


def task_matrix(dataset: Dataset, task: str) -> tuple[list[str], list[list[Optional[Hashable]]]]:
    """Annotators x items matrix for one task; None marks missing ratings."""
    if task not in TASKS:
        raise ValueError(f"unknown task: {task!r}")
    annotators = sorted(
        {a.annotator_id for inst in dataset for a in inst.annotations}
    )
    matrix: list[list[Optional[Hashable]]] = []
    for annotator in annotators:
        row: list[Optional[Hashable]] = []
        for inst in dataset:
            found = next((a for a in inst.annotations if a.annotator_id == annotator), None)
            if found is None:
                row.append(None)
            elif task == "simplicity":
                row.append(found.simplicity.value)
            elif task == "characterization":
                row.append(found.characterization.value)
            else:
                row.append(found.lmp_score)
        matrix.append(row)
    return annotators, matrix


def _gold(matrix: Sequence[Sequence[Optional[Hashable]]], task: str, seed: int) -> list[Hashable]:
    gold: list[Hashable] = []
    for j in range(len(matrix[0])):
        votes = [row[j] for row in matrix if row[j] is not None]
        if task == "lmp":
            gold.append(round(aggregate_lmp(votes)))
        else:
            gold.append(aggregate_categorical(votes, seed=seed + j))
    return gold


def agreement_report(dataset: Dataset, seed: int = 42) -> dict[str, dict[str, float]]:
    """Percent agreement, alpha and accuracy for each annotation task."""
    report: dict[str, dict[str, float]] = {}
    for task in TASKS:
        _, matrix = task_matrix(dataset, task)
        if len(matrix) < 2:
            raise ValueError("agreement requires at least 2 annotators")
        level = "interval" if task == "lmp" else "nominal"
        report[task] = {
            "percent_agreement": percent_agreement(matrix),
            "krippendorff_alpha": krippendorff_alpha(matrix, level=level),
            "accuracy": annotator_accuracy(matrix, _gold(matrix, task, seed)),
        }
    return report
