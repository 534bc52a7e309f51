"""Python bindings for the staterecall benchmark core."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from . import _core
from ._core import StateRecallError, derive_instance_seed

__all__ = [
    "StateRecallError",
    "bin_metrics",
    "derive_instance_seed",
    "generate",
    "parse_answer",
    "render",
    "selftest",
]

_BUNDLED = Path(__file__).with_name("data") / "exoplanets.csv"


def _catalog(path):
    if path is not None:
        return str(path)
    return str(_BUNDLED) if _BUNDLED.exists() else None


def generate(family, m, n, index=0, seed=0, catalog=None, swap_pattern="anchored"):
    """Generate one task instance as its canonical JSON dict."""
    return json.loads(_core.generate(family, m, n, index, seed, _catalog(catalog), swap_pattern))


def render(task):
    """Render a task dict to {"text": ..., "option_letters": [...]}."""
    return _core.render(json.dumps(task))


def parse_answer(raw, letters, texts=(), accept_option_text=True):
    return _core.parse_answer(raw, list(letters), list(texts), accept_option_text)


def bin_metrics(total, parsed, correct):
    """Exact accuracy, parsed_rate and parsed_weighted for one bin."""
    return {k: Fraction(*v) for k, v in _core.bin_metrics(total, parsed, correct).items()}


def selftest(quick=True, inject_fault=None):
    return _core.selftest(quick, inject_fault)
