import math
import random

import pytest

from dacsolver.backends import (
    ExactMockBackend,
    RecordingBackend,
    ReplayBackend,
    TranscriptStore,
)
from dacsolver.errors import DatasetError, EmptyInput, LengthMismatch, SchemaError
from dacsolver.evaluation import (
    classification_report,
    exact_match_accuracy,
    f1_score,
    g_mean_score,
    levenshtein,
    load_dataset,
    load_report,
    run_experiment,
    save_instances,
    summary_rows,
    write_report,
    write_summary_csv,
)
from dacsolver.tasks.multiplication import gen_instances
from dacsolver.tasks.verification import VerificationInstance, gold_labels_for_instances
from helpers import ScriptedBackend
from reference_impls import levenshtein_matrix


class TestLevenshtein:
    @pytest.mark.parametrize("a,b,d", [
        ("1000", "1001", 1),
        ("", "abc", 3),
        ("abc", "", 3),
        ("", "", 0),
        ("kitten", "sitting", 3),
    ])
    def test_examples(self, a, b, d):
        assert levenshtein(a, b) == d == levenshtein_matrix(a, b)

    def test_transposed_digits(self):
        assert levenshtein_matrix("838102050", "838102500") == 2
        assert levenshtein("838102050", "838102500") == 2

    def test_agreement_with_reference(self):
        rng = random.Random(7)
        for _ in range(300):
            a = "".join(rng.choice("abc01") for _ in range(rng.randint(0, 20)))
            b = "".join(rng.choice("abc01") for _ in range(rng.randint(0, 20)))
            assert levenshtein(a, b) == levenshtein_matrix(a, b)

    def test_metric_properties(self):
        rng = random.Random(15)
        strings = ["".join(rng.choice("xyz9") for _ in range(rng.randint(0, 12)))
                   for _ in range(30)]
        for a in strings:
            assert levenshtein(a, a) == 0
        for _ in range(200):
            a, b, c = rng.choice(strings), rng.choice(strings), rng.choice(strings)
            assert levenshtein(a, b) == levenshtein(b, a)
            assert levenshtein(a, b) <= max(len(a), len(b))
            assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


class TestExactMatch:
    def test_examples(self):
        assert exact_match_accuracy(["408"], ["408"]) == 1.0
        assert exact_match_accuracy(["408"], ["409"]) == 0.0
        assert exact_match_accuracy(["0408"], ["408"]) == 1.0

    def test_non_digit_prediction_is_wrong(self):
        assert exact_match_accuracy(["no idea"], ["408"]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            exact_match_accuracy(["1"], ["1", "2"])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            exact_match_accuracy([], [])


class TestClassificationReport:
    def test_from_confusion(self):
        m = classification_report(tp=3, fp=1, fn=2, tn=4)
        assert m.precision == pytest.approx(0.75)
        assert m.recall == pytest.approx(0.6)
        assert m.f1 == pytest.approx(2 / 3, abs=1e-4)
        assert m.accuracy == pytest.approx(0.7)
        assert m.g_mean == pytest.approx(math.sqrt(0.45), abs=1e-9)
        assert not m.degenerate

    def test_perfect_predictor(self):
        m = classification_report(tp=5, fp=0, fn=0, tn=5)
        assert (m.precision, m.recall, m.f1, m.accuracy, m.g_mean) == (1, 1, 1, 1, 1)

    def test_f1_and_g_mean_from_precision_recall(self):
        # precision 83.22, recall 63.64 => F1 72.12, G-mean 72.77
        assert f1_score(0.8322, 0.6364) * 100 == pytest.approx(72.12, abs=0.01)
        assert g_mean_score(0.8322, 0.6364) * 100 == pytest.approx(72.77, abs=0.01)

    def test_f1_from_near_balanced_precision_recall(self):
        # precision 62.11, recall 61.28 => F1 61.69
        assert f1_score(0.6211, 0.6128) * 100 == pytest.approx(61.69, abs=0.01)

    def test_degenerate_flags(self):
        m = classification_report(tp=0, fp=0, fn=2, tn=3)
        assert m.precision == 0.0 and m.f1 == 0.0 and m.degenerate
        m = classification_report(tp=0, fp=2, fn=0, tn=3)
        assert m.recall == 0.0 and m.degenerate

    def test_invalid_counts(self):
        with pytest.raises(ValueError):
            classification_report(-1, 0, 0, 2)
        with pytest.raises(ValueError):
            classification_report(0, 0, 0, 0)


class TestDatasets:
    def test_multiplication_round_trip(self, tmp_path):
        path = tmp_path / "mul.jsonl"
        instances = gen_instances(5, 3, seed=2)
        save_instances(instances, path)
        assert load_dataset(path, "multiplication") == instances

    def test_verification_round_trip(self, tmp_path):
        path = tmp_path / "ver.jsonl"
        instances = [VerificationInstance("1", "doc one.", "cand one.", "negative"),
                     VerificationInstance("2", "doc two.", "bad cand.", "positive")]
        save_instances(instances, path)
        assert load_dataset(path, "hallucination") == instances

    def test_missing_field_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "1", "document": "d", "candidate": "c", "label": "negative"}\n'
                        '{"id": "2", "document": "d", "candidate": "c"}\n')
        with pytest.raises(SchemaError) as err:
            load_dataset(path, "hallucination")
        assert err.value.line == 2

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"a": "12", "b": "34", "ground_truth": "408"}\nnot json\n')
        with pytest.raises(SchemaError) as err:
            load_dataset(path, "multiplication")
        assert err.value.line == 2

    def test_wrong_ground_truth_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"a": "12", "b": "34", "ground_truth": "999"}\n')
        with pytest.raises(SchemaError) as err:
            load_dataset(path, "multiplication")
        assert err.value.line == 1

    def test_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("\n")
        with pytest.raises(DatasetError):
            load_dataset(path, "multiplication")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / "nope.jsonl", "multiplication")


class TestRunExperiment:
    def test_multiplication_mock_is_exact(self, config):
        instances = gen_instances(20, 5, seed=3)
        report = run_experiment(instances, "multiplication", "dac_multi",
                                ExactMockBackend(), config, seed=3)
        assert report.exact_match_rate == 1.0
        assert report.mean_edit_distance == 0.0
        assert report.n_instances == 20
        assert report.failures == []
        assert report.run_metadata["timestamp"] is None  # deterministic backend

    def test_verification_mock_matches_gold(self, config):
        instances = [
            VerificationInstance("1", "doc.", "Bad claim here. Fine.", "positive"),
            VerificationInstance("2", "doc.", "All good. Really.", "negative"),
            VerificationInstance("3", "doc.", "Another bad lead. Sure.", "positive"),
        ]
        backend = ExactMockBackend(gold_labels=gold_labels_for_instances(instances))
        report = run_experiment(instances, "hallucination", "dac_single",
                                backend, config)
        assert report.confusion == {"tp": 2, "fp": 0, "fn": 0, "tn": 1}
        assert report.f1 == 1.0 and report.accuracy == 1.0

    def test_failures_count_as_wrong(self, config):
        instances = gen_instances(4, 2, seed=5)
        # backend only knows how to decompose; tackle prompts fail
        backend = ScriptedBackend([("split the string", "1,2,3,4")])
        report = run_experiment(instances, "multiplication", "dac_single",
                                backend, config)
        assert report.exact_match_rate == 0.0
        assert len(report.failures) == 4
        assert {f["error"] for f in report.failures} <= {
            "DecomposeParseError", "UnrecognizedPrompt"}
        truth_lengths = [len(i.ground_truth) for i in instances]
        assert report.mean_edit_distance == sum(truth_lengths) / 4

    def test_exclude_failures_shrinks_denominator(self, config):
        instances = gen_instances(4, 2, seed=5)
        backend = ScriptedBackend([("split the string", "1,2,3,4")])
        with pytest.raises(DatasetError):
            run_experiment(instances, "multiplication", "dac_single", backend,
                           config, exclude_failures=True)

    def test_empty_dataset(self, config):
        with pytest.raises(DatasetError):
            run_experiment([], "multiplication", "io", ExactMockBackend(), config)


class TestReports:
    def test_write_load_round_trip(self, tmp_path, config):
        instances = gen_instances(5, 3, seed=1)
        report = run_experiment(instances, "multiplication", "io",
                                ExactMockBackend(), config, seed=1)
        path = tmp_path / "report.json"
        write_report(report, path)
        assert load_report(path) == report

    def test_metric_recomputation_from_confusion(self, tmp_path, config):
        instances = [
            VerificationInstance("1", "doc.", "Bad one. Two.", "positive"),
            VerificationInstance("2", "doc.", "Fine one. Two.", "negative"),
        ]
        backend = ExactMockBackend(gold_labels=gold_labels_for_instances(instances))
        report = run_experiment(instances, "factcheck", "dac_single", backend, config)
        path = tmp_path / "report.json"
        write_report(report, path)
        loaded = load_report(path)
        c = loaded.confusion
        recomputed = classification_report(c["tp"], c["fp"], c["fn"], c["tn"])
        assert abs(recomputed.f1 - loaded.f1) < 1e-9
        assert abs(recomputed.g_mean - loaded.g_mean) < 1e-9

    def test_replay_report_is_byte_identical(self, tmp_path, config):
        instances = gen_instances(5, 3, seed=8)
        transcript = tmp_path / "t.jsonl"
        store = TranscriptStore(transcript, mode="record")
        run_experiment(instances, "multiplication", "dac_single",
                       RecordingBackend(ExactMockBackend(), store), config, seed=8)
        store.close()

        paths = []
        for n in (1, 2):
            backend = ReplayBackend(TranscriptStore(transcript, mode="replay"))
            report = run_experiment(instances, "multiplication", "dac_single",
                                    backend, config, seed=8)
            path = tmp_path / f"r{n}.json"
            write_report(report, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_summary_csv_column_orders(self, tmp_path, config):
        mul_report = run_experiment(gen_instances(3, 2, seed=0), "multiplication",
                                    "io", ExactMockBackend(), config)
        header, rows = summary_rows([mul_report])
        assert header == ["strategy", "n_instances", "exact_match_rate",
                          "mean_edit_distance"]

        instances = [VerificationInstance("1", "d.", "Bad lead. x.", "positive"),
                     VerificationInstance("2", "d.", "Fine. x.", "negative")]
        backend = ExactMockBackend(gold_labels=gold_labels_for_instances(instances))
        hal = run_experiment(instances, "hallucination", "dac_single", backend, config)
        fac = run_experiment(instances, "factcheck", "dac_single", backend, config)
        assert summary_rows([hal])[0] == ["strategy", "f1", "accuracy",
                                          "precision", "recall"]
        assert summary_rows([fac])[0] == ["strategy", "f1", "g_mean",
                                          "precision", "recall"]

        csv_path = tmp_path / "summary.csv"
        write_summary_csv([fac], csv_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "f1,g_mean,precision,recall".replace("f1", "strategy,f1")
        assert lines[1].startswith("dac_single,")

    def test_summary_rejects_mixed_tasks(self, config):
        mul = run_experiment(gen_instances(2, 2, seed=0), "multiplication", "io",
                             ExactMockBackend(), config)
        instances = [VerificationInstance("1", "d.", "Bad lead. x.", "positive")]
        backend = ExactMockBackend(gold_labels=gold_labels_for_instances(instances))
        hal = run_experiment(instances, "hallucination", "io", backend, config)
        with pytest.raises(ValueError):
            summary_rows([mul, hal])

    def test_report_dict_has_task_appropriate_fields(self, config):
        report = run_experiment(gen_instances(2, 2, seed=0), "multiplication",
                                "io", ExactMockBackend(), config)
        doc = report.to_dict()
        assert "exact_match_rate" in doc and "confusion" not in doc
