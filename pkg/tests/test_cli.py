import json

import pytest
from click.testing import CliRunner

from conftest import LEGAL_WORDS_A, LEGAL_WORDS_B, make_sentence
from lmpkit.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_jsonl(path, rows):
    path.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n", encoding="utf-8"
    )


def triplet_rows(n_each=6):
    rows = []
    for i in range(n_each):
        text = make_sentence(i, LEGAL_WORDS_A)
        rows.append({"id": f"identical-{i}", "source_text": text, "simplified_text": text,
                     "gold_lmp": 10.0, "provenance": "augmented"})
        rows.append({"id": f"unrelated-{i}",
                     "source_text": make_sentence(100 + i, LEGAL_WORDS_A),
                     "simplified_text": make_sentence(200 + i, LEGAL_WORDS_B),
                     "gold_lmp": 0.0, "provenance": "augmented"})
    return rows


class TestLoadAndStats:
    def test_load_summary(self, runner, dataset_file):
        result = runner.invoke(main, ["load", "--data", str(dataset_file)])
        assert result.exit_code == 0
        assert "2 instances" in result.output

    def test_load_invalid_file_fails(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{nope\n")
        result = runner.invoke(main, ["load", "--data", str(bad)])
        assert result.exit_code != 0

    def test_stats_prints_both_sides(self, runner, dataset_file):
        result = runner.invoke(main, ["stats", "--data", str(dataset_file)])
        assert result.exit_code == 0
        assert "complex:" in result.output and "simple:" in result.output
        assert "lexical_richness=" in result.output


class TestFilter:
    def test_accepts_hard_rejects_easy(self, runner, tmp_path):
        blocks = tmp_path / "blocks.txt"
        blocks.write_text(
            "Le chat dort là. Il est gros.\n"
            "Les indemnités journalières applicables conformément aux dispositions "
            "réglementaires sont calculées proportionnellement.\n",
            encoding="utf-8",
        )
        result = runner.invoke(main, ["filter", "--input", str(blocks)])
        assert result.exit_code == 0
        assert "indemnités" in result.output
        assert "Le chat dort" not in result.stdout


class TestGenerate:
    def test_mock_echo(self, runner, tmp_path):
        src = tmp_path / "src.txt"
        src.write_text("la prime est due\nle contrat prend fin\n", encoding="utf-8")
        out = tmp_path / "out.jsonl"
        result = runner.invoke(main, [
            "generate", "--input", str(src), "--out", str(out),
            "--cache", str(tmp_path / "cache.jsonl"), "--mock-echo",
        ])
        assert result.exit_code == 0
        rows = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
        assert [r["simplified_text"] for r in rows] == ["la prime est due", "le contrat prend fin"]

    def test_requires_key_or_mock(self, runner, tmp_path):
        src = tmp_path / "src.txt"
        src.write_text("une phrase\n", encoding="utf-8")
        result = runner.invoke(main, ["generate", "--input", str(src),
                                      "--out", str(tmp_path / "o.jsonl")], env={"OPENAI_API_KEY": ""})
        assert result.exit_code != 0
        assert "--mock-echo" in result.output


class TestMineAndAugment:
    def test_mine_pairs_deterministic(self, runner, tmp_path):
        pool_a = tmp_path / "a.txt"
        pool_b = tmp_path / "b.txt"
        pool_a.write_text("\n".join(make_sentence(i, LEGAL_WORDS_A) for i in range(6)) + "\n")
        pool_b.write_text("\n".join(make_sentence(100 + i, LEGAL_WORDS_B) for i in range(6)) + "\n")
        outputs = []
        for name in ("m1.jsonl", "m2.jsonl"):
            out = tmp_path / name
            result = runner.invoke(main, [
                "mine-pairs", "--pool-a", str(pool_a), "--pool-b", str(pool_b),
                "--count", "4", "--seed", "7", "--out", str(out),
            ])
            assert result.exit_code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_augment_counts(self, runner, tmp_path):
        base = tmp_path / "base.jsonl"
        write_jsonl(base, [
            {"id": "h0", "source_text": "la prime est due", "simplified_text": "payez la prime",
             "gold_lmp": 8.0, "provenance": "human"},
            {"id": "h1", "source_text": "le contrat prend fin", "simplified_text": "le contrat finit",
             "gold_lmp": 9.0, "provenance": "human"},
        ])
        out = tmp_path / "aug.jsonl"
        result = runner.invoke(main, ["augment", "--base", str(base), "--out", str(out)])
        assert result.exit_code == 0
        assert "wrote 4 rows" in result.output


class TestTrainPredictBenchmark:
    def test_full_pipeline(self, runner, tmp_path):
        data = tmp_path / "train.jsonl"
        write_jsonl(data, triplet_rows(6))
        config = tmp_path / "config.toml"
        config.write_text(
            "[training]\nmax_epochs = 3\npatience = 2\nlearning_rate = 1e-3\n"
            "hidden_size = 32\nnum_heads = 2\n"
        )
        ckpt = tmp_path / "ckpt"
        result = runner.invoke(main, [
            "--config", str(config), "train", "--data", str(data),
            "--seed", "0", "--out", str(ckpt),
        ])
        assert result.exit_code == 0, result.output
        assert (ckpt / "weights.pt").exists()

        out = tmp_path / "preds.jsonl"
        result = runner.invoke(main, ["predict", "--model", str(ckpt),
                                      "--pairs", str(data), "--out", str(out)])
        assert result.exit_code == 0, result.output
        preds = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(preds) == 12
        assert all(0.0 <= p["score"] <= 10.0 for p in preds)

        result = runner.invoke(main, ["benchmark", "--test", str(data), "--model", str(ckpt)])
        assert result.exit_code == 0, result.output
        assert "ckpt" in result.output

    def test_benchmark_requires_adapter(self, runner, tmp_path):
        data = tmp_path / "test.jsonl"
        write_jsonl(data, triplet_rows(2))
        result = runner.invoke(main, ["benchmark", "--test", str(data)])
        assert result.exit_code != 0
        assert "at least one" in result.output

    def test_kfold_comma_seeds(self, runner, tmp_path):
        data = tmp_path / "train.jsonl"
        write_jsonl(data, triplet_rows(10))
        config = tmp_path / "config.toml"
        config.write_text(
            "[training]\nmax_epochs = 2\npatience = 1\nlearning_rate = 1e-3\n"
            "hidden_size = 16\nnum_heads = 2\n"
        )
        result = runner.invoke(main, [
            "--config", str(config), "kfold", "--data", str(data), "--seeds", "0,1",
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert set(body["per_seed"]) == {"0", "1"}
        assert "rmse" in body["summary"]


class TestAgreementVerb:
    def test_report(self, runner, tmp_path):
        annotation = {
            "annotator_id": "a", "simplicity": "easier_to_read",
            "characterization": 1, "bracket": "accurate", "errors": {},
        }
        rows = []
        for i in range(3):
            rows.append({
                "id": f"i{i}", "source_text": f"source {i}", "simplified_text": f"simple {i}",
                "annotations": [
                    dict(annotation), dict(annotation, annotator_id="b"),
                ],
            })
        data = tmp_path / "annotated.jsonl"
        write_jsonl(data, rows)
        result = runner.invoke(main, ["agreement", "--data", str(data)])
        assert result.exit_code == 0, result.output
        for task in ("simplicity", "characterization", "lmp"):
            assert f"{task}:" in result.output
        assert "alpha=1.00" in result.output


class TestServeValidation:
    def test_missing_args_rejected(self, runner):
        result = runner.invoke(main, ["serve"])
        assert result.exit_code != 0
        assert "requires" in result.output
