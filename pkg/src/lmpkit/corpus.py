"""Dataset model, JSONL IO, collection filters, corpus statistics and the
remote simplification client.

A dataset is a JSONL file, one instance per line:

    {"id": str, "source_text": str, "simplified_text": str,
     "annotations": [...], "gold_lmp": number, "provenance": str}

``annotations`` and ``gold_lmp`` are optional. Loading validates every row
and reports errors with their line number.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

from .annotation import Annotation
from .textstats import ReadabilityScore, readability_fr, split_sentences, tokenize

__all__ = [
    "SentencePair",
    "AnnotatedInstance",
    "Dataset",
    "CollectionCriteria",
    "GenerationConfig",
    "CorpusStats",
    "DatasetLoadError",
    "GenerationError",
    "TextGenerationClient",
    "EchoClient",
    "OpenAICompatibleClient",
    "load_dataset",
    "write_dataset",
    "passes_collection_filter",
    "compute_corpus_stats",
    "generate_simplifications",
]

PROVENANCES = ("human", "augmented", "holdout")


class DatasetLoadError(ValueError):
    """A dataset file failed validation; the message names the line."""


@dataclass(frozen=True)
class SentencePair:
    """A source legal sentence block and its simplification."""

    id: str
    source_text: str
    simplified_text: str

    def __post_init__(self) -> None:
        if not self.source_text.strip():
            raise ValueError(f"pair {self.id!r}: source_text is empty")
        if not self.simplified_text.strip():
            raise ValueError(f"pair {self.id!r}: simplified_text is empty")


@dataclass(frozen=True)
class AnnotatedInstance:
    """A sentence pair plus its annotations and optional gold score."""

    pair: SentencePair
    annotations: tuple[Annotation, ...] = ()
    gold_lmp: Optional[float] = None
    provenance: str = "human"

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance: {self.provenance!r}")
        if self.gold_lmp is not None and not 0.0 <= self.gold_lmp <= 10.0:
            raise ValueError(f"gold_lmp {self.gold_lmp} outside [0, 10]")
        if self.provenance == "augmented":
            if self.gold_lmp is None:
                raise ValueError("augmented instances must carry a synthetic gold score")
            if self.annotations:
                raise ValueError("augmented instances must not carry human annotations")

    def to_json(self) -> dict:
        row: dict = {
            "id": self.pair.id,
            "source_text": self.pair.source_text,
            "simplified_text": self.pair.simplified_text,
        }
        if self.annotations:
            row["annotations"] = [a.to_json() for a in self.annotations]
        if self.gold_lmp is not None:
            row["gold_lmp"] = self.gold_lmp
        row["provenance"] = self.provenance
        return row

    @classmethod
    def from_json(cls, row: dict) -> "AnnotatedInstance":
        for name in ("id", "source_text", "simplified_text"):
            if name not in row:
                raise ValueError(f"missing field {name!r}")
        return cls(
            pair=SentencePair(row["id"], row["source_text"], row["simplified_text"]),
            annotations=tuple(Annotation.from_json(a) for a in row.get("annotations", [])),
            gold_lmp=row.get("gold_lmp"),
            provenance=row.get("provenance", "human"),
        )


@dataclass(frozen=True)
class Dataset:
    """An ordered, id-unique collection of annotated instances."""

    name: str
    instances: tuple[AnnotatedInstance, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for inst in self.instances:
            if inst.pair.id in seen:
                raise ValueError(f"duplicate instance id: {inst.pair.id!r}")
            seen.add(inst.pair.id)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


@dataclass(frozen=True)
class CollectionCriteria:
    """Filters applied when collecting text blocks from source documents."""

    min_sentences: int = 1
    max_sentences: int = 5
    readability_threshold: float = 50.0  # lower = harder; keep blocks <= this
    reject_boilerplate: bool = True

    def __post_init__(self) -> None:
        if self.min_sentences < 1:
            raise ValueError("min_sentences must be >= 1")
        if self.min_sentences > self.max_sentences:
            raise ValueError("min_sentences must be <= max_sentences")


@dataclass(frozen=True)
class GenerationConfig:
    """Remote text-generation parameters; defaults match the study setup."""

    model_name: str = "gpt-4-turbo-2024-04-09"
    max_new_tokens: int = 100
    temperature: float = 1.0
    top_p: float = 0.9
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    prompt_template: str = (
        "Réécris la phrase complexe à l'aide d'une ou plusieurs phrases simples. "
        "Conserve le même sens, mais simplifie-le. RÉPONDS EN FRANÇAIS!\n"
        "Complexe: {input}."
    )

    def __post_init__(self) -> None:
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be positive")
        if self.prompt_template.count("{input}") != 1:
            raise ValueError("prompt_template must contain '{input}' exactly once")

    def digest(self) -> str:
        payload = json.dumps(self.__dict__, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CorpusStats:
    """Per-side corpus statistics (token counts exclude punctuation)."""

    n_sentences: int
    lexical_richness: float
    avg_sentence_length: float


def load_dataset(path: str | Path, expected_provenance: Optional[str] = None) -> Dataset:
    """Load and validate a JSONL dataset; row order is preserved.

    Raises ``DatasetLoadError`` naming the offending line for malformed
    JSON, missing fields, empty texts or duplicate ids.
    """
    path = Path(path)
    instances: list[AnnotatedInstance] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetLoadError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if expected_provenance is not None:
                stated = row.get("provenance")
                if stated is not None and stated != expected_provenance:
                    raise DatasetLoadError(
                        f"line {lineno}: provenance {stated!r}, expected {expected_provenance!r}"
                    )
                row = {**row, "provenance": expected_provenance}
            try:
                inst = AnnotatedInstance.from_json(row)
            except (ValueError, TypeError, KeyError) as exc:
                raise DatasetLoadError(f"line {lineno}: {exc}") from exc
            if inst.pair.id in seen:
                raise DatasetLoadError(f"line {lineno}: duplicate id {inst.pair.id!r}")
            seen.add(inst.pair.id)
            instances.append(inst)
    return Dataset(name=path.stem, instances=tuple(instances))


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Serialize a dataset to JSONL; round-trips through ``load_dataset``."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for inst in dataset:
            handle.write(json.dumps(inst.to_json(), ensure_ascii=False) + "\n")


# Single fragments without any of these verb cues are treated as headings.
_FINITE_VERB_CUES = (
    "est",
    "sont",
    "être",
    "doit",
    "doivent",
    "peut",
    "peuvent",
    "a",
    "ont",
    "sera",
    "seront",
    "s'applique",
    "couvre",
    "désigne",
    "constitue",
    "constituent",
)


def _looks_like_boilerplate(text_block: str) -> bool:
    tokens = tokenize(text_block)
    if len(tokens) < 4:
        return True
    stripped = text_block.strip()
    # All-caps heading (ignoring digits and punctuation).
    letters = [c for c in stripped if c.isalpha()]
    if letters and all(c.isupper() for c in letters):
        return True
    # Single fragment with no sentence-final punctuation and no finite verb cue.
    if len(split_sentences(stripped)) <= 1 and not stripped.endswith((".", "!", "?", "…")):
        if not any(t in _FINITE_VERB_CUES for t in tokens):
            return True
    return False


def passes_collection_filter(
    text_block: str,
    criteria: CollectionCriteria = CollectionCriteria(),
    readability: Callable[[str], ReadabilityScore] = readability_fr,
) -> tuple[bool, str]:
    """Apply the collection criteria to one text block.

    Returns ``(accepted, reason)`` where ``reason`` is "ok" or names the
    first failed criterion ("sentence count", "boilerplate", "readability").
    """
    if not text_block.strip():
        raise ValueError("cannot filter an empty text block")
    n_sentences = len(split_sentences(text_block))
    if not criteria.min_sentences <= n_sentences <= criteria.max_sentences:
        return False, "sentence count"
    if criteria.reject_boilerplate and _looks_like_boilerplate(text_block):
        return False, "boilerplate"
    if readability(text_block).value > criteria.readability_threshold:
        return False, "readability"
    return True, "ok"


def _side_stats(texts: Sequence[str]) -> CorpusStats:
    per_instance_unique = 0
    total_tokens = 0
    vocabulary: set[str] = set()
    for text in texts:
        tokens = tokenize(text).tokens
        per_instance_unique += len(set(tokens))
        total_tokens += len(tokens)
        vocabulary.update(tokens)
    return CorpusStats(
        n_sentences=len(texts),
        lexical_richness=per_instance_unique / len(vocabulary) if vocabulary else 0.0,
        avg_sentence_length=total_tokens / len(texts),
    )


def compute_corpus_stats(dataset: Dataset) -> tuple[CorpusStats, CorpusStats]:
    """Statistics for the complex and simple sides of a dataset.

    Lexical richness is the sum over instances of per-instance unique-token
    counts divided by the corpus vocabulary size, so values above 1 are
    expected for corpora with shared vocabulary. Invariant under instance
    reordering.
    """
    if len(dataset) == 0:
        raise ValueError("cannot compute statistics of an empty dataset")
    complex_side = _side_stats([inst.pair.source_text for inst in dataset])
    simple_side = _side_stats([inst.pair.simplified_text for inst in dataset])
    return complex_side, simple_side


class GenerationError(RuntimeError):
    """Remote generation failed; carries the source id for retry."""

    def __init__(self, message: str, source_index: int):
        super().__init__(message)
        self.source_index = source_index


class TextGenerationClient(Protocol):
    """Anything that can complete a prompt under a generation config."""

    def complete(self, prompt: str, config: GenerationConfig) -> str: ...


class EchoClient:
    """Test double that returns the input sentence unchanged."""

    def complete(self, prompt: str, config: GenerationConfig) -> str:
        # The prompt ends with "Complexe: {input}." by default; callers in
        # tests use a bare "{input}" template so the echo is exact.
        return prompt


class OpenAICompatibleClient:
    """Minimal chat-completions client for OpenAI-compatible endpoints."""

    def __init__(self, api_key: str, base_url: str = "https://api.openai.com/v1"):
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")

    def complete(self, prompt: str, config: GenerationConfig) -> str:
        import requests

        response = requests.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={
                "model": config.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "max_tokens": config.max_new_tokens,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "frequency_penalty": config.frequency_penalty,
                "presence_penalty": config.presence_penalty,
            },
            timeout=60,
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]


_cache_write_lock = threading.Lock()


def _load_cache(cache_path: Path) -> dict[tuple[str, str], str]:
    cache: dict[tuple[str, str], str] = {}
    if cache_path.exists():
        with cache_path.open(encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    row = json.loads(line)
                    cache[(row["source_sha256"], row["config_sha256"])] = row["output"]
    return cache


def generate_simplifications(
    sources: Sequence[str],
    config: GenerationConfig,
    client: TextGenerationClient,
    cache_path: str | Path = "generation_cache.jsonl",
    id_prefix: str = "gen",
) -> list[SentencePair]:
    """Generate one simplification per source, with a content-addressed cache.

    The cache is keyed by (sha256 of source, sha256 of config); reruns with
    the same inputs issue zero remote calls. Cache writes are serialized
    (single-writer append). Raises ``GenerationError`` on client failure or
    an empty generation, identifying the failing source.
    """
    cache_path = Path(cache_path)
    cache = _load_cache(cache_path)
    config_digest = config.digest()
    pairs: list[SentencePair] = []
    for index, source in enumerate(sources):
        source_digest = hashlib.sha256(source.encode("utf-8")).hexdigest()
        key = (source_digest, config_digest)
        if key in cache:
            output = cache[key]
        else:
            prompt = config.prompt_template.replace("{input}", source)
            try:
                output = client.complete(prompt, config)
            except Exception as exc:
                raise GenerationError(f"source {index}: client failure: {exc}", index) from exc
            if not output.strip():
                raise GenerationError(f"source {index}: empty generation", index)
            with _cache_write_lock:
                with cache_path.open("a", encoding="utf-8") as handle:
                    handle.write(
                        json.dumps(
                            {
                                "source_sha256": source_digest,
                                "config_sha256": config_digest,
                                "output": output,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
            cache[key] = output
        pairs.append(SentencePair(f"{id_prefix}-{index}", source, output))
    return pairs
