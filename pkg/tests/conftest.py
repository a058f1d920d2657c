from __future__ import annotations

import pytest

from evalboard.core import DatasetRef, MetricSpec, ModelEntry, TaskConfig
from evalboard.fixtures import load_lexicon, model_path, seed_data_dir
from evalboard.metrics import GoldExample
from evalboard.runner import RunLimits
from evalboard.store import Store

FAST_LIMITS = RunLimits(per_example_timeout=10.0, handshake_timeout=15.0, sample_interval=0.05)


@pytest.fixture
def store(tmp_path) -> Store:
    return Store(tmp_path / "data")


@pytest.fixture(scope="session")
def seeded_store(tmp_path_factory) -> Store:
    return seed_data_dir(tmp_path_factory.mktemp("seeded"))


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


def demo_task(datasets: tuple[DatasetRef, ...] | None = None) -> TaskConfig:
    """A 2-dataset, 5-metric classification task for pipeline tests."""
    return TaskConfig(
        task_id="demo",
        name="Demo Task",
        perf_metric_id="macro_f1",
        metrics=(
            MetricSpec("macro_f1", unit="%"),
            MetricSpec("throughput", unit="examples/s"),
            MetricSpec("memory", unit="GiB", direction="minimize", cap=16.0),
            MetricSpec("fairness", unit="%"),
            MetricSpec("robustness", unit="%"),
        ),
        datasets=datasets
        or (
            DatasetRef("demo-a", "datasets/demo-a.jsonl", 1.0),
            DatasetRef("demo-b", "datasets/demo-b.jsonl", 1.0),
        ),
        epsilon=1e-4,
    )


DEMO_A = [
    GoldExample("a-1", {"text": "James praised the wonderful restaurant downtown."}, "positive"),
    GoldExample("a-2", {"text": "Maria disliked the terribly slow service."}, "negative"),
    GoldExample("a-3", {"text": "Her sister found the evening pleasant overall."}, "positive"),
]

DEMO_B = [
    GoldExample("b-1", {"text": "Jamal said the concert was fantastic."}, "positive"),
    GoldExample("b-2", {"text": "Priya thought the movie dragged considerably."}, "negative"),
    GoldExample("b-3", {"text": "His brother complained about the noisy room."}, "negative"),
    GoldExample("b-4", {"text": "Emily described the garden as peaceful."}, "positive"),
]


@pytest.fixture
def demo_store(store: Store) -> tuple[Store, TaskConfig]:
    task = demo_task()
    store.save_task(task)
    store.save_dataset("demo-a", DEMO_A)
    store.save_dataset("demo-b", DEMO_B)
    return store, task


def constant_model(task_id: str = "demo", value: str = "positive") -> ModelEntry:
    return ModelEntry(
        model_id=f"constant-{value}",
        name=f"Constant {value}",
        owner="tests",
        task_id=task_id,
        exec_ref=f"{model_path('constant.py')} {value}",
    )


def fixture_model(script: str, args: str = "", model_id: str | None = None,
                  task_id: str = "demo") -> ModelEntry:
    ref = model_path(script)
    if args:
        ref = f"{ref} {args}"
    return ModelEntry(
        model_id=model_id or script.removesuffix(".py"),
        name=script,
        owner="tests",
        task_id=task_id,
        exec_ref=ref,
    )
