"""Shipped fixture models: small, fully understood functions used by the demos,
the benchmark command, and the test suite."""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

from ..models import Model, load_model
from ..schema import Dataset


def _root() -> Path:
    return Path(resources.files(__package__))


def fixture_names() -> list[str]:
    return sorted(_index().keys())


def _index() -> dict:
    return json.loads((_root() / "index.json").read_text())


def fixture_info(name: str) -> dict:
    index = _index()
    if name not in index:
        raise KeyError(f"unknown fixture {name!r} (have {sorted(index)})")
    return index[name]


def fixture_path(name: str) -> Path:
    return _root() / fixture_info(name)["model"]


def fixture_document(name: str) -> dict:
    return json.loads(fixture_path(name).read_text())


def load_fixture(name: str) -> Model:
    return load_model(fixture_document(name))


def fixture_dataset(name: str) -> Dataset | None:
    info = fixture_info(name)
    if "dataset" not in info:
        return None
    model = load_fixture(name)
    return Dataset.from_csv(model.schema, (_root() / info["dataset"]).read_text())


def echo_model_command() -> str:
    """Command line for the shipped echo subprocess model."""
    return f"{sys.executable} {_root() / 'echo_model.py'}"
