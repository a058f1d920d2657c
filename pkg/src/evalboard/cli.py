"""Operator command line: submit, eval, board, perturb, serve.

Exit codes: 0 success, 1 domain error, 2 usage error.  The store root
comes from --data-dir or the DYNA_DATA_DIR environment variable.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click

from .errors import BoardError
from .core import ModelEntry
from .fixtures import load_lexicon
from .perturb import (
    FAIRNESS_KINDS,
    ROBUSTNESS_TRANSFORMS,
    FairnessLexicon,
    perturb_dataset,
)
from .runner import RunLimits, evaluate_model_on_task
from .service import build_weight_spec, score_task
from .store import Store, load_dataset_file


def _parse_kv(text: str | None, flag: str) -> dict[str, float] | None:
    """Parse 'a=1,b=2.5' into a float map; malformed input is a usage error."""
    if text is None:
        return None
    out: dict[str, float] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise click.UsageError(f"{flag}: expected key=value, got {part!r}")
        key, _, raw = part.partition("=")
        key = key.strip()
        try:
            value = float(raw)
        except ValueError:
            raise click.UsageError(f"{flag}: {raw!r} is not a number (in {part!r})")
        if value < 0:
            raise click.UsageError(f"{flag}: weight for {key!r} must be nonnegative")
        out[key] = value
    if not out:
        raise click.UsageError(f"{flag}: no key=value pairs given")
    return out


def _store(data_dir: str) -> Store:
    return Store(data_dir)


def _fail(exc: BaseException) -> "click.ClickException":
    return click.ClickException(f"{type(exc).__name__}: {exc}")


@click.group()
def main():
    """Evaluation-as-a-service leaderboard tools."""


@main.command()
@click.option("--data-dir", envvar="DYNA_DATA_DIR", default="data", show_default=True)
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
def submit(data_dir: str, manifest: str):
    """Register a model manifest in the store."""
    try:
        with open(manifest, encoding="utf-8") as fh:
            entry = ModelEntry.from_dict(json.load(fh))
        path = _store(data_dir).save_model(entry)
    except (BoardError, OSError, json.JSONDecodeError) as exc:
        raise _fail(exc)
    click.echo(f"registered {entry.model_id} -> {path}")


@main.command(name="eval")
@click.option("--data-dir", envvar="DYNA_DATA_DIR", default="data", show_default=True)
@click.option("--task", "task_id", required=True)
@click.option("--model", "model_ref", required=True,
              help="model id already in the store, or a path to a manifest JSON")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--timeout", default=30.0, show_default=True, type=float,
              help="per-example timeout in seconds")
def eval_cmd(data_dir: str, task_id: str, model_ref: str, seed: int, timeout: float):
    """Evaluate a model on every dataset of a task and commit the full
    metric row atomically."""
    store = _store(data_dir)
    try:
        task = store.load_task(task_id)
    except KeyError:
        raise click.ClickException(f"unknown task {task_id!r}")
    try:
        if model_ref.endswith(".json"):
            with open(model_ref, encoding="utf-8") as fh:
                model = ModelEntry.from_dict(json.load(fh))
            store.save_model(model)
        else:
            model = store.load_model(model_ref)
    except KeyError:
        raise click.ClickException(f"unknown model {model_ref!r}")
    except (BoardError, OSError, json.JSONDecodeError) as exc:
        raise _fail(exc)
    limits = RunLimits(per_example_timeout=timeout)
    try:
        records = evaluate_model_on_task(
            model, task, lambda ref: store.load_dataset(ref.path),
            load_lexicon(), seed, limits=limits,
        )
        store.append_records(task.task_id, records)
    except BoardError as exc:
        raise _fail(exc)
    by_metric: dict[str, list[float]] = {}
    for rec in records:
        by_metric.setdefault(rec.metric_id, []).append(rec.value)
    summary = "  ".join(
        f"{mid}={sum(vals) / len(vals):.2f}" for mid, vals in sorted(by_metric.items())
    )
    click.echo(f"{model.model_id} on {task.task_id}: {len(records)} records  {summary}")


@main.command()
@click.option("--data-dir", envvar="DYNA_DATA_DIR", default="data", show_default=True)
@click.option("--task", "task_id", required=True)
@click.option("--weights", "weights_text", default=None,
              help="unnormalized metric weights, e.g. macro_f1=5,throughput=2")
@click.option("--dataset-weights", "dataset_weights_text", default=None,
              help="unnormalized dataset weights, e.g. r1=1,r2=3")
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]),
              default="table", show_default=True)
@click.option("--as-of", default=None, help="score from records at/before this ISO timestamp")
def board(data_dir: str, task_id: str, weights_text: str | None,
          dataset_weights_text: str | None, fmt: str, as_of: str | None):
    """Print the ranked leaderboard for a task."""
    store = _store(data_dir)
    try:
        task = store.load_task(task_id)
    except KeyError:
        raise click.ClickException(f"unknown task {task_id!r}")
    metric_weights = _parse_kv(weights_text, "--weights")
    dataset_weights = _parse_kv(dataset_weights_text, "--dataset-weights")
    try:
        spec = build_weight_spec(task, metric_weights, dataset_weights)
        payload = score_task(store, task, spec, as_of=as_of)
    except BoardError as exc:
        raise _fail(exc)

    if fmt == "json":
        click.echo(json.dumps(payload["rows"], indent=2))
        return
    if fmt == "csv":
        _emit_csv(task, payload)
        return
    _emit_table(task, payload)


def _emit_csv(task, payload: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["rank", "model_id", *task.metric_ids, "dynascore", "avg_zscore"])
    for row in payload["rows"]:
        writer.writerow(
            [
                row["rank"],
                row["model_id"],
                *(f"{row['raw_values'][mid]:.2f}" for mid in task.metric_ids),
                f"{row['dynascore']:.2f}",
                f"{row['avg_zscore']:.2f}",
            ]
        )
    click.echo(buf.getvalue().rstrip("\n"))


def _emit_table(task, payload: dict) -> None:
    headings = ["rank", "model", *task.metric_ids, "dynascore", "avg_z"]
    rows = [
        [
            str(row["rank"]),
            row["model_id"],
            *(f"{row['raw_values'][mid]:.2f}" for mid in task.metric_ids),
            f"{row['dynascore']:.2f}",
            f"{row['avg_zscore']:.2f}",
        ]
        for row in payload["rows"]
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headings)]
    click.echo("  ".join(h.ljust(widths[i]) for i, h in enumerate(headings)))
    for r in rows:
        click.echo("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)))
    for warning in payload["warnings"]:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--kind", "kinds", multiple=True, required=True,
              type=click.Choice([*FAIRNESS_KINDS,
                                 *(f"robustness:{t}" for t in ROBUSTNESS_TRANSFORMS)]))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(exists=True),
              help="fairness lexicon JSON (defaults to the bundled one)")
def perturb(input_path: str, output_path: str, kinds: tuple[str, ...], seed: int,
            lexicon_path: str | None):
    """Write a perturbed copy of a JSONL dataset; skip counts go to stderr."""
    try:
        dataset = load_dataset_file(input_path)
        lexicon = FairnessLexicon.load(lexicon_path) if lexicon_path else load_lexicon()
        perturbed, skips = perturb_dataset(dataset, list(kinds), seed, lexicon=lexicon)
    except BoardError as exc:
        raise _fail(exc)
    with open(output_path, "w", encoding="utf-8") as fh:
        for example in perturbed:
            fh.write(json.dumps(example.to_dict()) + "\n")
    click.echo(
        f"perturbed {len(perturbed)}/{len(dataset)} examples "
        f"(not applicable: {skips.not_applicable}, ner skipped: {skips.ner_skipped})",
        err=True,
    )


@main.command()
@click.option("--data-dir", envvar="DYNA_DATA_DIR", default="data", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(data_dir: str, port: int, host: str):
    """Run the HTTP service."""
    from .server import main as serve_main

    serve_main(port=port, data_dir=data_dir, host=host)


if __name__ == "__main__":
    sys.exit(main())
