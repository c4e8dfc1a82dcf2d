import json
import random

import pytest

from lmpkit.corpus import AnnotatedInstance, Dataset, SentencePair

LEGAL_WORDS_A = (
    "assuré véhicule contrat prime sinistre dommage garantie franchise "
    "avenant exclusion indemnité propriétaire désigné immatriculation police"
).split()

LEGAL_WORDS_B = (
    "ministre permis agent revenu société route code conducteur amende "
    "registre examen demande consentement renseignement système"
).split()


def make_sentence(seed: int, words=LEGAL_WORDS_A, length: int = 6) -> str:
    rng = random.Random(seed)
    return " ".join(rng.choice(words) for _ in range(length)) + "."


@pytest.fixture
def tiny_dataset() -> Dataset:
    instances = tuple(
        AnnotatedInstance(
            pair=SentencePair(f"t{i}", make_sentence(i), make_sentence(1000 + i, length=4)),
            gold_lmp=float(i % 11),
            provenance="holdout",
        )
        for i in range(10)
    )
    return Dataset(name="tiny", instances=instances)


@pytest.fixture
def dataset_file(tmp_path):
    rows = [
        {"id": "x1", "source_text": "La prime est due au début du contrat.",
         "simplified_text": "Vous payez la prime au début.", "gold_lmp": 8.0,
         "provenance": "human"},
        {"id": "x2", "source_text": "L'assureur peut résilier le contrat en cas de fraude.",
         "simplified_text": "La fraude permet de mettre fin au contrat.", "gold_lmp": 6.0,
         "provenance": "human"},
    ]
    path = tmp_path / "dataset.jsonl"
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n",
                    encoding="utf-8")
    return path
