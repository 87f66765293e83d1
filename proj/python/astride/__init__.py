"""Automated threat modeling for agentic AI architecture diagrams.

Thin Python wrapper over the C++ core. The extension exchanges JSON strings;
this package decodes them into plain dicts/lists.
"""

import json as _json

from astride import _core
from astride._core import ConfigError, GraphError

__all__ = [
    "ConfigError",
    "GraphError",
    "analyze_offline",
    "analyze_offline_markdown",
    "build_analysis_prompt",
    "canonicalize",
    "elicit",
    "generate_dataset",
    "normalize_target",
    "parse_diagram",
    "parse_report",
    "split_sizes",
    "tainted_nodes",
    "taxonomy",
    "write_dataset",
]


def _overrides(taxonomy_overrides):
    if taxonomy_overrides is None:
        return ""
    if isinstance(taxonomy_overrides, str):
        return taxonomy_overrides
    return _json.dumps(taxonomy_overrides)


def parse_diagram(source):
    """Parse diagram text into a graph dict (nodes, edges, boundaries)."""
    return _json.loads(_core.parse_diagram(source))


def canonicalize(source):
    """Return the canonical serialization of the diagram."""
    return _core.canonicalize(source)


def elicit(source, taxonomy_overrides=None):
    """Deterministic rule-engine findings for a diagram."""
    return _json.loads(_core.elicit(source, _overrides(taxonomy_overrides)))


def tainted_nodes(source, taxonomy_overrides=None):
    """Node ids reachable from external input."""
    return sorted(_core.tainted_nodes(source, _overrides(taxonomy_overrides)))


def analyze_offline(source, min_consensus=0.0, taxonomy_overrides=None):
    """Full offline pipeline; returns the threat model as a dict."""
    return _json.loads(
        _core.analyze_offline(source, min_consensus, _overrides(taxonomy_overrides))
    )


def analyze_offline_markdown(source, min_consensus=0.0, taxonomy_overrides=None):
    return _core.analyze_offline_markdown(
        source, min_consensus, _overrides(taxonomy_overrides)
    )


def build_analysis_prompt(source, context=""):
    """The chat-completion request sent to analyzer backends."""
    return _json.loads(_core.build_analysis_prompt(source, context))


def parse_report(raw, analyzer, source):
    """Parse an analyzer reply against a diagram."""
    return _json.loads(_core.parse_report(raw, analyzer, source))


def generate_dataset(count, seed, taxonomy_overrides=None):
    """Deterministic labeled records (content/type/instruction/expected)."""
    return _json.loads(
        _core.generate_dataset(count, seed, _overrides(taxonomy_overrides))
    )


def split_sizes(n):
    """(train, validation, test) sizes for n records."""
    return _core.split_sizes(n)


def write_dataset(count, seed, out_dir, taxonomy_overrides=None):
    """Generate, split, and write train/validation/test.jsonl + manifest."""
    _core.write_dataset(count, seed, str(out_dir), _overrides(taxonomy_overrides))


def taxonomy(taxonomy_overrides=None):
    """The effective applicability matrix, severities, and mitigations."""
    return _json.loads(_core.taxonomy(_overrides(taxonomy_overrides)))


def normalize_target(name, source):
    """Resolve a free-form component name to a diagram element."""
    return _json.loads(_core.normalize_target(name, source))
