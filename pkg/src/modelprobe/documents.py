"""Builders for the engine's external JSON documents.

Field order is fixed here, once, so CLI output, service payloads, and golden
files all agree byte for byte.
"""

from __future__ import annotations

import json

from . import __version__
from .counterfactual import (
    ContrastStatement,
    CounterfactualResult,
    DistanceConfig,
    SearchConfig,
    TargetSpec,
)
from .fidelity import AnalogyReport, ValidityProfile
from .models import Model, PredictionOutput


def dumps(doc: dict) -> str:
    """Canonical serialization: two-space indent, insertion order, newline at EOF."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def prediction_document(model: Model, point, output: PredictionOutput) -> dict:
    doc: dict = {"input": [float(v) for v in point]}
    doc["named"] = model.schema.to_named(point)
    doc.update(output.to_document())
    doc["engine_version"] = __version__
    return doc


def counterfactual_document(result: CounterfactualResult,
                            statement: ContrastStatement,
                            target: TargetSpec,
                            distance: DistanceConfig,
                            search: SearchConfig,
                            seed: int | None) -> dict:
    contrast = statement.to_document()
    return {
        "counterfactual": [float(v) for v in result.c],
        "score": result.score_at_c,
        "distance": result.distance,
        "converged": result.converged,
        "lambda_trace": [[lam, obj] for lam, obj in result.lambda_trace],
        "changed_features": contrast["changed_features"],
        "statement": contrast["statement"],
        "config_echo": {
            "target": target.to_document(),
            "distance": distance.to_document(),
            "search": search.to_document(),
            "n_model_evals": result.n_model_evals,
        },
        "seed": seed,
    }


def fidelity_document(profile: ValidityProfile, report: AnalogyReport | None,
                      n_samples: int, seed: int, config_echo: dict) -> dict:
    doc = {
        "profile": profile.to_document(n_samples, seed),
        "analogies": report.to_document(seed) if report is not None else None,
        "config_echo": config_echo,
        "engine_version": __version__,
        "seed": seed,
    }
    return doc
