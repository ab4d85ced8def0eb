# SPDX-License-Identifier: Apache-2.0
"""Python access to the disputekit adjudication toolkit.

Most functions are re-exported from the native ``_core`` module. The helpers
defined here accept and return plain dicts where the native layer speaks JSON.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Sequence

from ._core import (
    ConfigError,
    Error,
    EvalError,
    LabelSpace,
    LabelSpaceError,
    PrecedentStore,
    RetrievalError,
    RewardError,
    RoadNetwork,
    RoutingError,
    consistency_score,
    divergence_filter,
    extract_result,
    format_reward,
    generate_network,
    ordinal_reward,
    total_reward,
)
from . import _core

__all__ = [
    "ConfigError",
    "Error",
    "EvalError",
    "LabelSpace",
    "LabelSpaceError",
    "PrecedentStore",
    "RetrievalError",
    "RewardError",
    "RoadNetwork",
    "RoutingError",
    "consistency_score",
    "divergence_filter",
    "effective_config",
    "evaluate",
    "extract_result",
    "format_reward",
    "generate_network",
    "load_config",
    "ordinal_reward",
    "run_benchmark",
    "synthesize",
    "total_reward",
]


def _config_text(config: Mapping[str, Any] | str | os.PathLike) -> tuple[str, str]:
    """Config JSON text plus the directory relative paths resolve against."""
    if isinstance(config, Mapping):
        return json.dumps(config), os.getcwd()
    path = os.fspath(config)
    with open(path, encoding="utf-8") as fh:
        return fh.read(), os.path.dirname(os.path.abspath(path))


def load_config(path: str | os.PathLike) -> dict:
    """Read a config file and return it with every default filled in."""
    text, base = _config_text(path)
    return json.loads(_core.effective_config_json(text, base))


def effective_config(config: Mapping[str, Any]) -> dict:
    """Validate a config dict and fill in defaults."""
    text, base = _config_text(config)
    return json.loads(_core.effective_config_json(text, base))


def evaluate(
    predictions: Sequence[str],
    ground_truths: Sequence[str],
    labels: Sequence[str],
    grouping: Mapping[str, str],
) -> dict:
    """Accuracy, per-class and per-group metrics, and the confusion matrix.

    An empty prediction string counts as a failed answer.
    """
    space = LabelSpace(list(labels))
    return json.loads(
        _core.evaluate_json(list(predictions), list(ground_truths), space, dict(grouping))
    )


def synthesize(config: Mapping[str, Any] | str | os.PathLike, count: int, out_dir: str | os.PathLike) -> int:
    """Write a synthetic corpus of ``count`` samples; returns the sample count."""
    text, base = _config_text(config)
    return _core.synthesize_corpus(text, base, int(count), os.fspath(out_dir))


def run_benchmark(config: Mapping[str, Any] | str | os.PathLike, out_dir: str | os.PathLike) -> dict:
    """Run the benchmark and return the parsed report.json contents."""
    text, base = _config_text(config)
    return json.loads(_core.run_benchmark_json(text, base, os.fspath(out_dir)))
