"""Metrics and the experiment harness: run a strategy over a dataset, score it,
and write a deterministic report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from math import sqrt
from pathlib import Path
from typing import Sequence

from .backends import Backend
from .core import SolverConfig, run_strategy
from .errors import (
    AuthError,
    DacError,
    DatasetError,
    EmptyInput,
    LengthMismatch,
    SchemaError,
)
from .tasks import get_adapter
from .tasks.multiplication import MultiplicationInstance, canonical
from .tasks.verification import POSITIVE, VerificationInstance

CLASSIFICATION_TASKS = ("hallucination", "factcheck")


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1,          # delete
                               current[j - 1] + 1,       # insert
                               previous[j - 1] + (ca != cb)))  # substitute
        previous = current
    return previous[-1]


def _canonical_or_none(s: str) -> str | None:
    if s and s.isdigit():
        return s.lstrip("0") or "0"
    return None


def exact_match_accuracy(predictions: Sequence[str], truths: Sequence[str]) -> float:
    """Fraction of digit-exact matches after canonicalizing leading zeros."""
    if len(predictions) != len(truths):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truths)} truths")
    if not truths:
        raise EmptyInput("need at least one prediction/truth pair")
    hits = sum(1 for p, t in zip(predictions, truths)
               if _canonical_or_none(p) is not None
               and _canonical_or_none(p) == _canonical_or_none(t))
    return hits / len(truths)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def g_mean_score(precision: float, recall: float) -> float:
    return sqrt(precision * recall)


@dataclass(frozen=True)
class ClassificationMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    g_mean: float
    degenerate: bool  # some denominator was zero; affected metrics report 0.0


def classification_report(tp: int, fp: int, fn: int, tn: int) -> ClassificationMetrics:
    """Standard derived metrics from confusion counts; zero denominators yield
    0.0 and set the degenerate flag rather than raising."""
    if min(tp, fp, fn, tn) < 0 or tp + fp + fn + tn < 1:
        raise ValueError("confusion counts must be non-negative and sum to >= 1")
    degenerate = False
    if tp + fp == 0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    accuracy = (tp + tn) / (tp + fp + fn + tn)
    return ClassificationMetrics(precision, recall, f1_score(precision, recall),
                                 accuracy, g_mean_score(precision, recall), degenerate)


@dataclass
class MetricReport:
    """Per-run aggregate metrics plus enough metadata to reproduce the run."""

    task_kind: str
    strategy: str
    n_instances: int
    exact_match_rate: float | None = None
    mean_edit_distance: float | None = None
    confusion: dict | None = None  # {"tp": .., "fp": .., "fn": .., "tn": ..}
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    accuracy: float | None = None
    g_mean: float | None = None
    degenerate: bool = False
    failures: list = field(default_factory=list)
    run_metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "task_kind": self.task_kind,
            "strategy": self.strategy,
            "n_instances": self.n_instances,
            "failures": self.failures,
            "run_metadata": self.run_metadata,
        }
        if self.task_kind in CLASSIFICATION_TASKS:
            out.update(confusion=self.confusion, precision=self.precision,
                       recall=self.recall, f1=self.f1, accuracy=self.accuracy,
                       g_mean=self.g_mean, degenerate=self.degenerate)
        else:
            out.update(exact_match_rate=self.exact_match_rate,
                       mean_edit_distance=self.mean_edit_distance)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReport":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in doc.items() if k in known})


def load_dataset(path: str | Path, task_kind: str) -> list:
    """Read line-delimited JSON instances, validating each line's schema."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    instances = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except ValueError as exc:
                raise SchemaError(f"invalid JSON ({exc})", lineno)
            try:
                if task_kind == "multiplication":
                    instances.append(MultiplicationInstance(
                        doc["a"], doc["b"], doc["ground_truth"]))
                elif task_kind in CLASSIFICATION_TASKS:
                    instances.append(VerificationInstance(
                        str(doc["id"]), doc["document"], doc["candidate"], doc["label"]))
                else:
                    raise DatasetError(f"no dataset schema for task {task_kind!r}")
            except KeyError as exc:
                raise SchemaError(f"missing field {exc}", lineno)
            except (ValueError, TypeError, DacError) as exc:
                raise SchemaError(str(exc), lineno)
    if not instances:
        raise DatasetError(f"dataset is empty: {path}")
    return instances


def save_instances(instances: Sequence, path: str | Path) -> None:
    """Write instances back out as line-delimited JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        for inst in instances:
            if isinstance(inst, MultiplicationInstance):
                doc = {"a": inst.a, "b": inst.b, "ground_truth": inst.ground_truth}
            else:
                doc = {"id": inst.id, "document": inst.document,
                       "candidate": inst.candidate, "label": inst.label}
            handle.write(json.dumps(doc, ensure_ascii=True) + "\n")


def run_experiment(instances: Sequence, task_kind: str, strategy: str,
                   backend: Backend, config: SolverConfig, seed: int | None = None,
                   exclude_failures: bool = False) -> MetricReport:
    """Evaluate every instance with core.run_strategy and aggregate metrics.

    Per-instance errors are recorded with their class and, by default, scored
    as wrong answers; with exclude_failures=True they leave the metric
    denominators instead. Credential errors abort the run.
    """
    if not instances:
        raise DatasetError("cannot run an experiment on an empty dataset")
    adapter = get_adapter(task_kind)
    predictions: list[str | None] = []
    failures: list[dict] = []
    for position, instance in enumerate(instances):
        task = instance.to_task(task_kind) if task_kind != "multiplication" \
            else instance.to_task()
        try:
            resolution = run_strategy(strategy, task, adapter, backend, config)
            predictions.append(resolution.answer)
        except AuthError:
            raise
        except DacError as exc:
            predictions.append(None)
            failures.append({"index": position, "error": type(exc).__name__})

    report = MetricReport(
        task_kind=task_kind, strategy=strategy, n_instances=len(instances),
        failures=failures,
        run_metadata={
            "backend": backend.name,
            "seed": seed,
            "timestamp": None if backend.deterministic
            else datetime.now(timezone.utc).isoformat(),
        })

    scored = [(p, inst) for p, inst in zip(predictions, instances)
              if not (exclude_failures and p is None)]
    if not scored:
        raise DatasetError("every instance failed and failures are excluded")

    if task_kind == "multiplication":
        distances = []
        hits = 0
        for pred, inst in scored:
            truth = canonical(inst.ground_truth)
            got = _canonical_or_none(pred) if pred is not None else None
            if got == truth:
                hits += 1
            distances.append(levenshtein(got or "", truth))
        report.exact_match_rate = hits / len(scored)
        report.mean_edit_distance = sum(distances) / len(scored)
    else:
        tp = fp = fn = tn = 0
        for pred, inst in scored:
            gold_positive = inst.label == POSITIVE
            if pred is None:  # scored as the wrong label
                predicted_positive = not gold_positive
            else:
                predicted_positive = pred == POSITIVE
            if predicted_positive and gold_positive:
                tp += 1
            elif predicted_positive:
                fp += 1
            elif gold_positive:
                fn += 1
            else:
                tn += 1
        metrics = classification_report(tp, fp, fn, tn)
        report.confusion = {"tp": tp, "fp": fp, "fn": fn, "tn": tn}
        report.precision = metrics.precision
        report.recall = metrics.recall
        report.f1 = metrics.f1
        report.accuracy = metrics.accuracy
        report.g_mean = metrics.g_mean
        report.degenerate = metrics.degenerate
    return report


def write_report(report: MetricReport, path: str | Path) -> None:
    """Serialize with sorted keys so identical runs produce identical bytes."""
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=True) + "\n",
        encoding="utf-8")


def load_report(path: str | Path) -> MetricReport:
    return MetricReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def summary_columns(task_kind: str) -> list[str]:
    """CSV column order for the summary table, by task."""
    if task_kind == "multiplication":
        return ["strategy", "n_instances", "exact_match_rate", "mean_edit_distance"]
    if task_kind == "factcheck":
        return ["strategy", "f1", "g_mean", "precision", "recall"]
    return ["strategy", "f1", "accuracy", "precision", "recall"]


def summary_rows(reports: Sequence[MetricReport]) -> tuple[list[str], list[list[str]]]:
    """Flatten same-task reports into (header, rows) for delimited output."""
    kinds = {r.task_kind for r in reports}
    if len(kinds) != 1:
        raise ValueError(f"summary needs reports of a single task, got {sorted(kinds)}")
    columns = summary_columns(kinds.pop())
    rows = []
    for report in reports:
        row = []
        for column in columns:
            value = getattr(report, column)
            row.append(f"{value:.4f}" if isinstance(value, float) else str(value))
        rows.append(row)
    return columns, rows


def write_summary_csv(reports: Sequence[MetricReport], path: str | Path) -> None:
    header, rows = summary_rows(reports)
    lines = [",".join(header)] + [",".join(row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
