# Copyright (C) 2026 The claimstage Authors
# SPDX-License-Identifier: Apache-2.0
"""Retrieval of previously fact-checked claims: retrieve, rerank, vote, evaluate."""

import json
import os

from ._claimstage import (  # noqa: F401
    BaselineVectorizer,
    ContractError,
    Error,
    LookupError,
    StageError,
    ValidationError,
    __version__,
    compose_text,
    compute_weights,
    format_percent,
    improvement,
    lexical_overlap_score,
    macro_average,
    round_half_up,
    success_at_k,
    top_k,
    weighted_vote,
    write_synthetic_corpus,
)
from . import _claimstage as _core


def parse_lang_tuple(field):
    """Parses one tuple field into a dict, or None when the field is missing."""
    raw = _core.parse_lang_tuple(field)
    return None if raw is None else json.loads(raw)


def _config_text(config):
    if isinstance(config, (str, os.PathLike)):
        with open(config, encoding="utf-8") as f:
            return f.read(), os.path.dirname(os.path.abspath(config))
    return json.dumps(config), os.getcwd()


def run(config, retrieval_only=False):
    """Runs a config (dict or JSON path). Returns report, manifest, run_dir, weights and table."""
    text, base = _config_text(config)
    return json.loads(_core._run_config(text, base, retrieval_only))


def config_hash(config):
    text, base = _config_text(config)
    return _core._config_hash(text, base)
