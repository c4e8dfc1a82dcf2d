"""Unified command-line interface over all toolkit modules.

Most verbs read defaults from an optional TOML config file with
[dataset], [training], [mining] and [service] sections; explicit flags
win over config values. Every verb with randomness takes --seed
(default 42).
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:
    import tomli as tomllib

from . import agreement as agreement_mod
from . import corpus, evalharness, pairminer, regressor

DEFAULT_SEED = 42


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as handle:
        return tomllib.load(handle)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML config with [dataset], [training], [mining], [service] sections.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Legal-meaning-preservation metric toolkit."""
    ctx.obj = _load_config(config_path)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--provenance", type=click.Choice(corpus.PROVENANCES), default=None)
def load(data_path: str, provenance: str | None) -> None:
    """Validate a JSONL dataset and print a summary."""
    dataset = corpus.load_dataset(data_path, provenance)
    click.echo(f"{dataset.name}: {len(dataset)} instances")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
def stats(data_path: str) -> None:
    """Corpus statistics for the complex and simple sides."""
    dataset = corpus.load_dataset(data_path)
    complex_side, simple_side = corpus.compute_corpus_stats(dataset)
    for label, side in (("complex", complex_side), ("simple", simple_side)):
        click.echo(
            f"{label}: n={side.n_sentences}"
            f" lexical_richness={side.lexical_richness:.2f}"
            f" avg_sent_len={side.avg_sentence_length:.2f}"
        )


@main.command("filter")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Text file, one candidate block per line.")
@click.option("--min-sentences", default=1, show_default=True)
@click.option("--max-sentences", default=5, show_default=True)
@click.option("--readability-max", default=50.0, show_default=True)
@click.option("--out", "out_path", default="-", help="Accepted blocks (default stdout).")
def filter_blocks(input_path: str, min_sentences: int, max_sentences: int,
                  readability_max: float, out_path: str) -> None:
    """Apply the collection criteria to candidate text blocks."""
    criteria = corpus.CollectionCriteria(
        min_sentences=min_sentences,
        max_sentences=max_sentences,
        readability_threshold=readability_max,
    )
    accepted = []
    for line in Path(input_path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        ok, reason = corpus.passes_collection_filter(line, criteria)
        if ok:
            accepted.append(line)
        else:
            click.echo(f"rejected ({reason}): {line[:60]}", err=True)
    output = "\n".join(accepted) + ("\n" if accepted else "")
    if out_path == "-":
        click.echo(output, nl=False)
    else:
        Path(out_path).write_text(output, encoding="utf-8")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Text file, one source sentence block per line.")
@click.option("--out", "out_path", required=True)
@click.option("--cache", "cache_path", default="generation_cache.jsonl", show_default=True)
@click.option("--api-key", envvar="OPENAI_API_KEY", default=None)
@click.option("--base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--mock-echo", is_flag=True, help="Use the offline echo client.")
def generate(input_path: str, out_path: str, cache_path: str,
             api_key: str | None, base_url: str, mock_echo: bool) -> None:
    """Generate simplifications for source blocks via a remote LLM."""
    sources = [l for l in Path(input_path).read_text(encoding="utf-8").splitlines() if l.strip()]
    config = corpus.GenerationConfig()
    if mock_echo:
        client: corpus.TextGenerationClient = corpus.EchoClient()
        config = corpus.GenerationConfig(prompt_template="{input}")
    elif api_key:
        client = corpus.OpenAICompatibleClient(api_key, base_url)
    else:
        raise click.UsageError("provide --api-key (or OPENAI_API_KEY) or --mock-echo")
    pairs = corpus.generate_simplifications(sources, config, client, cache_path)
    with open(out_path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(json.dumps({
                "id": pair.id,
                "source_text": pair.source_text,
                "simplified_text": pair.simplified_text,
            }, ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(pairs)} pairs to {out_path}")


@main.command("mine-pairs")
@click.option("--pool-a", required=True, type=click.Path(exists=True))
@click.option("--pool-b", required=True, type=click.Path(exists=True))
@click.option("--rouge-max", default=0.25, show_default=True)
@click.option("--bleu-max", default=25.0, show_default=True)
@click.option("--count", default=1, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", "out_path", required=True)
def mine_pairs(pool_a: str, pool_b: str, rouge_max: float, bleu_max: float,
               count: int, seed: int, out_path: str) -> None:
    """Mine unrelated sentence pairs under lexical-overlap thresholds."""
    read_pool = lambda p: [l for l in Path(p).read_text(encoding="utf-8").splitlines() if l.strip()]
    thresholds = pairminer.MiningThresholds(rouge_max=rouge_max, bleu_max=bleu_max)
    mined = pairminer.mine_unrelated_pairs(
        read_pool(pool_a), read_pool(pool_b), thresholds, count=count, seed=seed
    )
    with open(out_path, "w", encoding="utf-8") as handle:
        for i, t in enumerate(mined):
            handle.write(json.dumps({
                "id": f"unrelated-{i}",
                "source_text": t.source_text,
                "simplified_text": t.simplified_text,
                "gold_lmp": t.gold_lmp,
                "provenance": "augmented",
            }, ensure_ascii=False) + "\n")
    click.echo(f"mined {len(mined)} unrelated pairs to {out_path}")


@main.command()
@click.option("--base", "base_path", required=True, type=click.Path(exists=True))
@click.option("--identical-from", "identical_path", type=click.Path(exists=True), default=None,
              help="Text file of sentences to pair with themselves (default: base sources).")
@click.option("--unrelated", "unrelated_path", type=click.Path(exists=True), default=None,
              help="JSONL of mined unrelated pairs (mine-pairs output).")
@click.option("--out", "out_path", required=True)
def augment(base_path: str, identical_path: str | None, unrelated_path: str | None,
            out_path: str) -> None:
    """Build the augmented training dataset (human + identical + unrelated)."""
    base = corpus.load_dataset(base_path)
    if identical_path:
        sentences = [l for l in Path(identical_path).read_text(encoding="utf-8").splitlines()
                     if l.strip()]
    else:
        sentences = [inst.pair.source_text for inst in base]
    identical = pairminer.make_identical_pairs(sentences)
    unrelated = []
    if unrelated_path:
        for inst in corpus.load_dataset(unrelated_path):
            unrelated.append(pairminer.AugmentedTriplet(
                inst.pair.source_text, inst.pair.simplified_text,
                gold_lmp=0.0, kind="unrelated",
            ))
    augmented = pairminer.build_augmented_dataset(base, identical, unrelated)
    corpus.write_dataset(augmented, out_path)
    click.echo(f"wrote {len(augmented)} rows to {out_path}")


def _train_config(config: dict, **overrides) -> regressor.TrainConfig:
    section = dict(config.get("training", {}))
    section.update({k: v for k, v in overrides.items() if v is not None})
    return regressor.TrainConfig(**section)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--epochs", "max_epochs", type=int, default=None)
@click.option("--lr", "learning_rate", type=float, default=None)
@click.option("--out", "out_dir", required=True)
@click.pass_context
def train(ctx: click.Context, data_path: str, seed: int, max_epochs: int | None,
          learning_rate: float | None, out_dir: str) -> None:
    """Train the pair regression model and write a checkpoint directory."""
    dataset = corpus.load_dataset(data_path)
    config = _train_config(ctx.obj, max_epochs=max_epochs, learning_rate=learning_rate)
    handle = regressor.train(dataset, config, seed)
    regressor.save_checkpoint(handle, out_dir)
    click.echo(f"trained {len(handle.history)} epochs;"
               f" best val loss {handle.best_val_loss:.4f}; saved to {out_dir}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--seeds", default="42..51", show_default=True,
              help="Inclusive seed range 'a..b' or comma list.")
@click.option("--out", "out_path", default="-")
@click.pass_context
def kfold(ctx: click.Context, data_path: str, seeds: str, out_path: str) -> None:
    """K-fold train/evaluate; reports Pearson and RMSE mean +- std."""
    dataset = corpus.load_dataset(data_path)
    if ".." in seeds:
        low, high = seeds.split("..")
        seed_list = tuple(range(int(low), int(high) + 1))
    else:
        seed_list = tuple(int(s) for s in seeds.split(","))
    config = _train_config(ctx.obj)
    plan = regressor.FoldPlan(seeds=seed_list)

    def eval_fn(preds, golds):
        try:
            r = evalharness.pearson(preds, golds)
        except ValueError:
            r = float("nan")
        return {"pearson": r, "rmse": evalharness.rmse(preds, golds)}

    result = regressor.run_kfold(dataset, config, plan, eval_fn)
    output = json.dumps(result, indent=2)
    if out_path == "-":
        click.echo(output)
    else:
        Path(out_path).write_text(output)


@main.command()
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default="-")
def predict(model_dir: str, pairs_path: str, out_path: str) -> None:
    """Score sentence pairs with a trained checkpoint."""
    handle = regressor.load_checkpoint(model_dir)
    dataset = corpus.load_dataset(pairs_path)
    scores = regressor.predict(handle, [inst.pair for inst in dataset])
    lines = [json.dumps({"id": inst.pair.id, "score": score})
             for inst, score in zip(dataset, scores)]
    output = "\n".join(lines) + "\n"
    if out_path == "-":
        click.echo(output, nl=False)
    else:
        Path(out_path).write_text(output)


@main.command()
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--identical", "identical_path", type=click.Path(exists=True), default=None)
@click.option("--unrelated", "unrelated_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_dirs", multiple=True,
              help="Trained checkpoint directory; repeatable.")
@click.option("--adapter", "adapter_specs", multiple=True,
              help="External adapter as name:range:command, NDJSON subprocess protocol.")
@click.option("--csv-out", "csv_path", default=None)
def benchmark(test_path: str, identical_path: str | None, unrelated_path: str | None,
              model_dirs: tuple[str, ...], adapter_specs: tuple[str, ...],
              csv_path: str | None) -> None:
    """Benchmark metric adapters against human judgment and sanity checks."""
    test_set = corpus.load_dataset(test_path)
    pools = {}
    for kind, path in (("identical", identical_path), ("unrelated", unrelated_path)):
        pools[kind] = [inst.pair for inst in corpus.load_dataset(path)] if path else []
    adapters = []
    for model_dir in model_dirs:
        handle = regressor.load_checkpoint(model_dir)
        adapters.append(evalharness.MetricAdapter(
            name=Path(model_dir).name,
            native_range="0-10",
            score=lambda pair, h=handle: regressor.predict(h, [pair])[0],
        ))
    for spec in adapter_specs:
        name, native_range, command = spec.split(":", 2)
        adapters.append(evalharness.SubprocessAdapter(name, native_range, command.split()).adapter)
    if not adapters:
        raise click.UsageError("provide at least one --model or --adapter")
    report = evalharness.run_benchmark(adapters, test_set, pools["identical"], pools["unrelated"])
    click.echo(report.to_table())
    if csv_path:
        Path(csv_path).write_text(report.to_csv())


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
def agreement(data_path: str, seed: int) -> None:
    """Inter-annotator agreement statistics for all three tasks."""
    dataset = corpus.load_dataset(data_path)
    report = agreement_mod.agreement_report(dataset, seed=seed)
    for task, values in report.items():
        click.echo(
            f"{task}: agreement={values['percent_agreement']:.2f}%"
            f" alpha={values['krippendorff_alpha']:.2f}"
            f" accuracy={values['accuracy']:.2f}%"
        )


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), default=None)
@click.option("--annotators", default=None, help="Comma-separated annotator ids.")
@click.option("--log", "log_path", default="annotations.log.jsonl", show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_context
def serve(ctx: click.Context, data_path: str | None, annotators: str | None,
          log_path: str, seed: int, host: str, port: int) -> None:
    """Run the HTTP annotation service consumed by the annotator UI."""
    import uvicorn

    from .service import build_store, create_app

    section = ctx.obj.get("service", {})
    data_path = data_path or section.get("dataset")
    annotator_list = (annotators or ",".join(section.get("annotators", []))).split(",")
    annotator_list = [a.strip() for a in annotator_list if a.strip()]
    if not data_path or not annotator_list:
        raise click.UsageError("serve requires --data and --annotators (or a [service] config)")
    store = build_store(data_path, tuple(annotator_list), log_path, seed=seed)
    app = create_app(store)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
