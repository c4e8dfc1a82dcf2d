import math
import sys

import pytest
from hypothesis import given, strategies as st

from lmpkit.corpus import AnnotatedInstance, Dataset, SentencePair
from lmpkit.evalharness import (
    MetricAdapter,
    SubprocessAdapter,
    constant_adapter,
    exact_match_adapter,
    normalize,
    overshoot_rate,
    pearson,
    rmse,
    run_benchmark,
    sanity_check,
)

FLOATS = st.floats(min_value=-100, max_value=100, allow_nan=False)


def pair(i, src, simp):
    return SentencePair(f"p{i}", src, simp)


def dataset(rows):
    return Dataset(
        name="bench",
        instances=tuple(
            AnnotatedInstance(pair=pair(i, src, simp), gold_lmp=gold)
            for i, (src, simp, gold) in enumerate(rows)
        ),
    )


class TestNormalize:
    def test_scaling(self):
        assert normalize(0.5, "0-1") == 5.0
        assert normalize(55.0, "0-100") == 5.5
        assert normalize(7.0, "0-10") == 7.0

    def test_unknown_range(self):
        with pytest.raises(ValueError):
            normalize(1.0, "0-42")

    def test_adapter_clips_before_normalizing(self):
        adapter = MetricAdapter(name="hot", native_range="0-1", score=lambda p: 1.7)
        assert adapter.normalized_score(pair(0, "a", "b")) == 10.0

    def test_adapter_rejects_undeclared_range(self):
        with pytest.raises(ValueError):
            MetricAdapter(name="bad", native_range="0-7", score=lambda p: 0.0)


class TestStatistics:
    def test_pearson_fixtures(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-9)
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-9)
        assert pearson([0, 1, 2, 3], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-9)

    def test_pearson_zero_variance_raises(self):
        with pytest.raises(ValueError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_pearson_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson([1], [1, 2])

    @given(
        st.lists(st.tuples(FLOATS, FLOATS), min_size=3, max_size=20),
        st.floats(min_value=0.5, max_value=4),
        FLOATS,
    )
    def test_pearson_affine_invariance(self, points, a, b):
        x = [p[0] for p in points]
        y = [p[1] for p in points]
        try:
            base = pearson(x, y)
        except ValueError:
            return
        scaled = pearson([a * v + b for v in x], y)
        assert scaled == pytest.approx(base, abs=1e-12)

    def test_rmse_fixture(self):
        assert rmse([1, 2, 3], [1, 2, 3]) == 0.0
        assert rmse([0, 0], [3, 4]) == pytest.approx(math.sqrt(12.5), abs=1e-12)

    def test_overshoot_strict(self):
        assert overshoot_rate([5, 5, 6], [5, 6, 5]) == pytest.approx(100 / 3)

    @given(st.lists(st.tuples(FLOATS, FLOATS), min_size=1, max_size=30))
    def test_rmse_nonnegative_symmetric(self, points):
        a = [p[0] for p in points]
        b = [p[1] for p in points]
        assert rmse(a, b) >= 0.0
        assert rmse(a, b) == pytest.approx(rmse(b, a), abs=1e-12)


class TestSanityCheck:
    def test_exact_match_passes_identical(self):
        pairs = [pair(i, f"s {i}", f"s {i}") for i in range(10)]
        assert sanity_check(exact_match_adapter(), pairs, "identical") == 100.0

    def test_exact_match_passes_unrelated(self):
        pairs = [pair(i, f"s {i}", f"t {i}") for i in range(10)]
        assert sanity_check(exact_match_adapter(), pairs, "unrelated") == 100.0

    def test_constant_five_fails_both(self):
        pairs = [pair(0, "a", "a"), pair(1, "a", "b")]
        adapter = constant_adapter(5.0)
        assert sanity_check(adapter, pairs, "identical") == 0.0
        assert sanity_check(adapter, pairs, "unrelated") == 0.0

    def test_thresholds_are_one_percent_of_scale(self):
        pairs = [pair(0, "a", "b")]
        assert sanity_check(constant_adapter(9.9), pairs, "identical") == 100.0
        assert sanity_check(constant_adapter(9.89), pairs, "identical") == 0.0
        assert sanity_check(constant_adapter(0.1), pairs, "unrelated") == 100.0
        assert sanity_check(constant_adapter(0.11), pairs, "unrelated") == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sanity_check(exact_match_adapter(), [pair(0, "a", "a")], "weird")


class TestRunBenchmark:
    def test_exact_match_on_separable_data(self):
        test_set = dataset([("a", "a", 10.0), ("a", "b", 0.0), ("c", "c", 10.0)])
        report = run_benchmark(
            [exact_match_adapter()],
            test_set,
            identical_pairs=[pair(100, "x", "x")],
            unrelated_pairs=[pair(101, "x", "y")],
        )
        row = report.rows[0]
        assert row.pearson == pytest.approx(1.0, abs=1e-12)
        assert row.rmse == 0.0
        assert row.pct_identical_pass == 100.0
        assert row.pct_unrelated_pass == 100.0
        assert row.pct_overshoot == 0.0

    def test_constant_adapter_reports_na_pearson(self):
        test_set = dataset([("a", "b", 2.0), ("c", "d", 8.0)])
        report = run_benchmark([constant_adapter(5.0)], test_set)
        row = report.rows[0]
        assert row.pearson is None
        assert row.rmse == pytest.approx(3.0)
        assert "n/a" in report.to_csv()

    def test_rows_sorted_by_name(self):
        test_set = dataset([("a", "b", 2.0), ("c", "d", 8.0)])
        report = run_benchmark(
            [constant_adapter(1.0, "zeta"), constant_adapter(1.0, "alpha")], test_set
        )
        assert [r.metric for r in report.rows] == ["alpha", "zeta"]

    def test_failing_adapter_marked_and_run_continues(self):
        def boom(p):
            raise RuntimeError("dead scorer")

        test_set = dataset([("a", "b", 2.0), ("c", "d", 8.0)])
        report = run_benchmark(
            [MetricAdapter(name="boom", native_range="0-10", score=boom),
             exact_match_adapter()],
            test_set,
        )
        by_name = {r.metric: r for r in report.rows}
        assert by_name["boom"].failed
        assert not by_name["exact-match"].failed
        assert "FAILED" in report.to_table()

    def test_missing_gold_raises(self):
        bad = Dataset(
            name="nogold",
            instances=(AnnotatedInstance(pair=pair(0, "a", "b")),),
        )
        with pytest.raises(ValueError, match="gold"):
            run_benchmark([exact_match_adapter()], bad)

    def test_csv_header_and_determinism(self):
        test_set = dataset([("a", "a", 10.0), ("a", "b", 0.0)])
        report1 = run_benchmark([exact_match_adapter()], test_set)
        report2 = run_benchmark([exact_match_adapter()], test_set)
        assert report1.to_csv() == report2.to_csv()
        assert report1.to_csv().splitlines()[0] == (
            "metric,pearson,pearson_std,rmse,rmse_std,"
            "pct_identical_ge_99,pct_unrelated_le_1,pct_overshoot"
        )

    def test_fingerprints_track_inputs(self):
        a = run_benchmark([exact_match_adapter()], dataset([("a", "a", 10.0), ("b", "c", 0.0)]))
        b = run_benchmark([exact_match_adapter()], dataset([("a", "x", 10.0), ("b", "c", 0.0)]))
        assert a.fingerprints["test_set"] != b.fingerprints["test_set"]

    def test_report_table_documents_conventions(self):
        report = run_benchmark([exact_match_adapter()], dataset([("a", "a", 10.0), ("b", "c", 0.0)]))
        table = report.to_table()
        assert "lower-is-better" in table
        assert "1% of scale" in table


SCORER = (
    "import sys, json\n"
    "for line in sys.stdin:\n"
    "    req = json.loads(line)\n"
    "    score = 10.0 if req['source'] == req['simplified'] else 0.0\n"
    "    print(json.dumps({'score': score}))\n"
)


class TestSubprocessAdapter:
    def test_ndjson_protocol(self, tmp_path):
        script = tmp_path / "scorer.py"
        script.write_text(SCORER)
        sub = SubprocessAdapter("ext", "0-10", [sys.executable, str(script)])
        assert sub.adapter.normalized_score(pair(0, "a", "a")) == 10.0
        assert sub.adapter.normalized_score(pair(1, "a", "b")) == 0.0

    def test_crash_surfaces_as_failed_row(self, tmp_path):
        script = tmp_path / "crash.py"
        script.write_text("import sys; sys.exit(3)\n")
        sub = SubprocessAdapter("crash", "0-10", [sys.executable, str(script)])
        report = run_benchmark([sub.adapter], dataset([("a", "b", 2.0), ("c", "d", 8.0)]))
        assert report.rows[0].failed
