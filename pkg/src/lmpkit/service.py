"""HTTP annotation service: instance assignment, score validation, export.

Persistence is an append-only JSONL event log; derived state lives in
memory and is reconstructed by replaying the log, so a crash loses
nothing. Each annotator sees the instances in a seeded random order and
must complete the current one before getting the next.
"""
from __future__ import annotations

import hashlib
import json
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .annotation import (
    Annotation,
    Bracket,
    CharacterizationClass,
    ErrorCounts,
    SimplicityLevel,
    characterization_label,
    compute_lmp_score,
)
from .corpus import AnnotatedInstance, Dataset, load_dataset

__all__ = ["AnnotationStore", "create_app"]


class ConflictError(ValueError):
    """The (annotator, instance) pair was already submitted."""


class UnknownAnnotatorError(KeyError):
    pass


def _assignment_order(annotator_id: str, n: int, seed: int) -> list[int]:
    # Stable per-annotator permutation derived from (annotator_id, seed).
    digest = hashlib.sha256(f"{annotator_id}:{seed}".encode("utf-8")).hexdigest()
    rng = random.Random(int(digest, 16))
    order = list(range(n))
    rng.shuffle(order)
    return order


@dataclass
class AnnotationStore:
    """Dataset, annotator sessions and the append-only annotation log."""

    dataset: Dataset
    annotator_ids: tuple[str, ...]
    log_path: Path
    seed: int = 42
    # (annotator_id, instance_id) -> Annotation
    submitted: dict[tuple[str, str], Annotation] = field(default_factory=dict)
    _write_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        self.log_path = Path(self.log_path)
        self._orders = {
            annotator: _assignment_order(annotator, len(self.dataset), self.seed)
            for annotator in self.annotator_ids
        }
        if self.log_path.exists():
            self._replay()

    def _replay(self) -> None:
        with self.log_path.open(encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                event = json.loads(line)
                annotation = Annotation.from_json(event["annotation"])
                self.submitted[(annotation.annotator_id, event["instance_id"])] = annotation

    def _require_annotator(self, annotator_id: str) -> list[int]:
        if annotator_id not in self._orders:
            raise UnknownAnnotatorError(annotator_id)
        return self._orders[annotator_id]

    def progress(self, annotator_id: str) -> tuple[int, int]:
        order = self._require_annotator(annotator_id)
        done = sum(
            (annotator_id, self.dataset.instances[i].pair.id) in self.submitted for i in order
        )
        return done, len(order)

    def next_instance(self, annotator_id: str) -> Optional[AnnotatedInstance]:
        """First uncompleted instance in the annotator's order, or None.

        Idempotent: repeated calls without a submission return the same
        instance.
        """
        order = self._require_annotator(annotator_id)
        for i in order:
            inst = self.dataset.instances[i]
            if (annotator_id, inst.pair.id) not in self.submitted:
                return inst
        return None

    def submit(
        self,
        annotator_id: str,
        instance_id: str,
        annotation: Annotation,
        client_score: Optional[int] = None,
    ) -> Annotation:
        """Validate, recompute the score server-side and persist atomically.

        Rejects duplicate submissions and submissions whose client-displayed
        score disagrees with the server-computed one.
        """
        self._require_annotator(annotator_id)
        if (annotator_id, instance_id) in self.submitted:
            raise ConflictError(f"{annotator_id!r} already annotated {instance_id!r}")
        current = self.next_instance(annotator_id)
        if current is None or current.pair.id != instance_id:
            raise ValueError(
                f"instance {instance_id!r} is not the current assignment for {annotator_id!r}"
            )
        server_score = compute_lmp_score(annotation.bracket, annotation.errors)
        if client_score is not None and client_score != server_score:
            raise ValueError(
                f"score mismatch: client displayed {client_score}, server computed {server_score}"
            )
        event = {"instance_id": instance_id, "annotation": annotation.to_json()}
        with self._write_lock:
            with self.log_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")
                handle.flush()
            self.submitted[(annotator_id, instance_id)] = annotation
        return annotation

    def export_dataset(self) -> Dataset:
        """The dataset with all submitted annotations embedded per row."""
        instances = []
        for inst in self.dataset:
            collected = tuple(
                self.submitted[(annotator, inst.pair.id)]
                for annotator in self.annotator_ids
                if (annotator, inst.pair.id) in self.submitted
            )
            instances.append(
                AnnotatedInstance(
                    pair=inst.pair,
                    annotations=collected,
                    gold_lmp=inst.gold_lmp,
                    provenance=inst.provenance,
                )
            )
        return Dataset(name=self.dataset.name, instances=tuple(instances))


def _parse_annotation(annotator_id: str, payload: dict) -> Annotation:
    return Annotation(
        annotator_id=annotator_id,
        simplicity=SimplicityLevel(payload["simplicity"]),
        characterization=CharacterizationClass(int(payload["characterization"])),
        bracket=Bracket(payload["bracket"]),
        errors=ErrorCounts(**payload.get("errors", {})),
        comment=payload.get("comment"),
        elapsed_seconds=payload.get("elapsed_seconds"),
    )


def create_app(store: AnnotationStore):
    """FastAPI application over an annotation store."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import PlainTextResponse

    app = FastAPI(title="lmpkit annotation service")
    app.state.store = store

    @app.get("/api/next")
    def api_next(annotator: str):
        try:
            inst = store.next_instance(annotator)
            done, total = store.progress(annotator)
        except UnknownAnnotatorError:
            raise HTTPException(status_code=404, detail=f"unknown annotator: {annotator!r}")
        if inst is None:
            return {"done": True, "progress": {"completed": done, "total": total}}
        return {
            "done": False,
            "instance": {
                "id": inst.pair.id,
                "source_text": inst.pair.source_text,
                "simplified_text": inst.pair.simplified_text,
            },
            "progress": {"completed": done, "total": total},
        }

    @app.get("/api/progress")
    def api_progress(annotator: str):
        try:
            done, total = store.progress(annotator)
        except UnknownAnnotatorError:
            raise HTTPException(status_code=404, detail=f"unknown annotator: {annotator!r}")
        return {"completed": done, "total": total}

    @app.post("/api/annotations")
    def api_submit(payload: dict):
        try:
            annotation = _parse_annotation(payload["annotator_id"], payload)
            stored = store.submit(
                payload["annotator_id"],
                payload["instance_id"],
                annotation,
                client_score=payload.get("lmp_score"),
            )
        except UnknownAnnotatorError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (ValueError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"recorded": stored.to_json(), "instance_id": payload["instance_id"]}

    @app.post("/api/score")
    def api_score(payload: dict):
        # Helper for client-side score parity checks: same deduction rule
        # the submit endpoint enforces.
        try:
            bracket = Bracket(payload["bracket"])
            errors = ErrorCounts(**payload.get("errors", {}))
        except (ValueError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"lmp_score": compute_lmp_score(bracket, errors)}

    @app.get("/api/labels")
    def api_labels():
        return {
            "simplicity": [level.value for level in SimplicityLevel],
            "characterization": [
                {
                    "id": cls.value,
                    "fr": characterization_label(cls, "fr"),
                    "en": characterization_label(cls, "en"),
                }
                for cls in CharacterizationClass
            ],
            "brackets": [
                {"id": b.value, "max_score": b.max_score} for b in Bracket
            ],
        }

    @app.get("/api/export", response_class=PlainTextResponse)
    def api_export():
        lines = [
            json.dumps(inst.to_json(), ensure_ascii=False)
            for inst in store.export_dataset()
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    return app


def build_store(
    dataset_path: str | Path,
    annotators: tuple[str, ...],
    log_path: str | Path,
    seed: int = 42,
) -> AnnotationStore:
    """Convenience constructor used by the CLI's serve verb."""
    return AnnotationStore(
        dataset=load_dataset(dataset_path),
        annotator_ids=tuple(annotators),
        log_path=Path(log_path),
        seed=seed,
    )
