"""Provider-bias audits for LLM coding assistants.

Thin wrapper over the C++ core. Functions that produce JSON documents
return decoded Python objects.
"""

import json as _json
from os import PathLike as _PathLike

from ._provaudit import (
    AuditError,
    Registry,
    ValidationError,
    chi_square,
    gini,
    inject_bug,
    inject_dead_code,
    modification_ratio,
    spearman,
    welch_t,
)
from . import _provaudit as _core

__all__ = [
    "AuditError",
    "Registry",
    "ValidationError",
    "analyze",
    "chi_square",
    "gini",
    "inject_bug",
    "inject_dead_code",
    "modification_ratio",
    "plan",
    "report",
    "run",
    "spearman",
    "welch_t",
]


def plan(registry: Registry, config: "str | _PathLike", mock=None) -> list:
    """Expanded prompt cases for a config, as dicts."""
    text = _core.plan(registry, config, mock)
    return [_json.loads(line) for line in text.splitlines() if line]


def run(registry: Registry, config, run_dir, mock=None) -> dict:
    """Plan and query every case; resumes when run_dir already holds a run."""
    return _core.run(registry, config, run_dir, mock)


def analyze(run_dir) -> dict:
    """Label a run's responses and compute GI and MR tables."""
    return _json.loads(_core.analyze(run_dir))


def report(analysis: dict, out_dir, formats=("csv", "json", "md")) -> list:
    return [str(p) for p in _core.report(_json.dumps(analysis), out_dir, list(formats))]
