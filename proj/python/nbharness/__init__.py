"""Python bindings for the nbharness core."""

import json as _json

from ._core import (  # noqa: F401
    Cell,
    CellKind,
    NbharnessError,
    Notebook,
    bleu_proxy,
    bleu_tokens,
    cell_counts,
    dedup_key,
    detect_data_dependencies,
    extract_defined_names,
    find_assert_references,
    find_assertion_lines,
    load_notebook,
    markdown_focus_filter,
    parse_notebook,
    pass_at_k,
    rank_by_logprob,
    serialize_context,
    serialize_notebook,
    spearman,
    strip_trailing_asserts,
)
from . import _core

__version__ = "0.1.0"


def curate_problems(nb, ground_truth_available=True):
    """Problem records of one notebook, as dicts."""
    return [_json.loads(p) for p in _core._curate_problems(nb, ground_truth_available)]


def emit_infill_examples(nb, c=1, lookahead=False):
    """One training example per cell, as dicts."""
    return [_json.loads(e) for e in _core._emit_infill_examples(nb, c, lookahead)]
