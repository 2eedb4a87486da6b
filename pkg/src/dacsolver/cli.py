"""Command-line front door.

Exit codes: 0 success, 2 configuration or input error, 3 backend failure,
4 verification mismatch.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bsi as treematch
from .backends import (
    ExactMockBackend,
    HttpChatBackend,
    RecordingBackend,
    ReplayBackend,
    TranscriptStore,
)
from .core import SolverConfig
from .errors import (
    BackendError,
    DacError,
    DatasetError,
    MalformedTree,
    SchemaError,
    StoreIOError,
)
from .evaluation import (
    load_dataset,
    load_report,
    run_experiment,
    save_instances,
    write_report,
    write_summary_csv,
)
from .tasks.multiplication import gen_instances
from .tasks.verification import gold_labels_for_instances

EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_MISMATCH = 4

STRATEGY_FLAGS = ["io", "cot", "ltm", "dac-single", "dac-multi"]
TASK_FLAGS = ["multiplication", "hallucination", "factcheck"]


@click.group()
def main():
    """Divide-and-conquer prompting: generate data, run strategies, check trees."""


@main.command()
@click.option("--task", type=click.Choice(["multiplication"]), default="multiplication",
              show_default=True)
@click.option("--count", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--digits", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gen(task, count, digits, seed, out):
    """Generate a line-delimited JSON instance file."""
    instances = gen_instances(count, digits, seed)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    save_instances(instances, out)
    click.echo(f"wrote {len(instances)} {digits}-digit instances to {out}")


def _load_config_file(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(doc, dict):
        raise click.UsageError(f"config file {path} must hold a JSON object")
    return doc


def _merge_config(ctx, flags, config_path):
    """Config file supplies defaults; explicitly passed flags override."""
    merged = dict(flags)
    if config_path:
        from click.core import ParameterSource
        file_values = _load_config_file(config_path)
        unknown = set(file_values) - set(flags)
        if unknown:
            raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, value in file_values.items():
            if ctx.get_parameter_source(key) != ParameterSource.COMMANDLINE:
                merged[key] = value
    return merged


def _build_backend(cfg, instances):
    kind = cfg["backend"]
    transcript = cfg["transcript"]
    if kind == "replay" and not transcript:
        raise click.UsageError("--backend replay requires --transcript")
    if cfg["record"] and not transcript:
        raise click.UsageError("--record requires --transcript")
    if kind == "replay" and cfg["record"]:
        raise click.UsageError("--record cannot be combined with --backend replay")

    store = None
    if kind == "replay":
        store = TranscriptStore(transcript, mode="replay")
        backend = ReplayBackend(store, model_id=cfg["model"])
        return backend, store
    if kind == "mock":
        gold = gold_labels_for_instances(instances) \
            if cfg["task"] != "multiplication" else None
        backend = ExactMockBackend(gold_labels=gold)
    else:
        backend = HttpChatBackend(cfg["base_url"], model_id=cfg["model"])
    if cfg["record"]:
        store = TranscriptStore(transcript, mode="record")
        backend = RecordingBackend(backend, store)
    return backend, store


@main.command()
@click.option("--task", type=click.Choice(TASK_FLAGS), default="multiplication",
              show_default=True)
@click.option("--strategy", type=click.Choice(STRATEGY_FLAGS), default="dac-multi",
              show_default=True)
@click.option("--backend", type=click.Choice(["http", "mock", "replay"]), default="mock",
              show_default=True)
@click.option("--dataset", type=click.Path(dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the metric report JSON here.")
@click.option("--model", default="exact-mock", show_default=True)
@click.option("--base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--w", type=click.IntRange(min=0), default=2, show_default=True,
              help="Recursion threshold for dac-multi.")
@click.option("--max-depth", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--parallelism", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--separator", default="[SEP]", show_default=True)
@click.option("--no-dp", is_flag=True,
              help="Ablation: forward full sub-transcripts to the merge stage.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--transcript", type=click.Path(dir_okay=False), default=None)
@click.option("--record", is_flag=True, help="Record backend exchanges to --transcript.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON file of run defaults; flags override.")
@click.pass_context
def run(ctx, **flags):
    """Run one strategy over a dataset and report metrics."""
    config_path = flags.pop("config_path")
    cfg = _merge_config(ctx, flags, config_path)
    strategy = cfg["strategy"].replace("-", "_")

    try:
        instances = load_dataset(cfg["dataset"], cfg["task"])
    except (DatasetError, SchemaError) as exc:
        raise click.UsageError(str(exc))

    store = None
    try:
        backend, store = _build_backend(cfg, instances)
        solver_config = SolverConfig(
            w=cfg["w"], separator=cfg["separator"], max_depth=cfg["max_depth"],
            parallelism=cfg["parallelism"], disentangled=not cfg["no_dp"],
            strategy=strategy)
        report = run_experiment(instances, cfg["task"], strategy, backend,
                                solver_config, seed=cfg["seed"])
    except (BackendError, StoreIOError) as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    except DacError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    finally:
        if store is not None:
            store.close()

    if cfg["out"]:
        Path(cfg["out"]).parent.mkdir(parents=True, exist_ok=True)
        write_report(report, cfg["out"])
    if cfg["task"] == "multiplication":
        line = (f"task={cfg['task']} strategy={cfg['strategy']} n={report.n_instances} "
                f"exact_match={report.exact_match_rate:.4f} "
                f"mean_edit_distance={report.mean_edit_distance:.2f} "
                f"failures={len(report.failures)}")
    else:
        line = (f"task={cfg['task']} strategy={cfg['strategy']} n={report.n_instances} "
                f"f1={report.f1:.4f} precision={report.precision:.4f} "
                f"recall={report.recall:.4f} failures={len(report.failures)}")
    click.echo(line)


@main.command()
@click.argument("pattern_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("base_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--verify", is_flag=True, help="Cross-check against the brute-force oracle.")
def bsi(pattern_file, base_file, verify):
    """Decide whether the pattern tree embeds in the base tree."""
    try:
        pattern = treematch.load_tree(pattern_file)
        base = treematch.load_tree(base_file)
        v = treematch.embeds_at(pattern, base)
    except MalformedTree as exc:
        click.echo(f"malformed tree: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo("v: " + " ".join(str(bit) for bit in v[1:]))
    click.echo("MATCH" if any(v[1:]) else "NO MATCH")
    if verify:
        oracle = treematch.brute_force_embeds(pattern, base)
        if oracle != v:
            click.echo(f"verification mismatch: solver={v} oracle={oracle}", err=True)
            sys.exit(EXIT_MISMATCH)
        click.echo("verified against brute force: OK")


@main.command()
@click.argument("report_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--outdir", type=click.Path(file_okay=False), default=".", show_default=True)
def report(report_files, outdir):
    """Render CSV summaries and figures from metric report JSON files."""
    from .figures import render_report_figures

    reports = [load_report(p) for p in report_files]
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    by_task = {}
    for rep in reports:
        by_task.setdefault(rep.task_kind, []).append(rep)
    written = []
    for task, group in sorted(by_task.items()):
        csv_path = outdir / f"{task}_summary.csv"
        write_summary_csv(group, csv_path)
        written.append(csv_path)
    written.extend(render_report_figures(reports, outdir))
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
