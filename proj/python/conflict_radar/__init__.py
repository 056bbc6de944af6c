"""Semantic change extraction and conflict detection for Java sources."""

from conflict_radar._core import (
    TAXONOMY_KIND_COUNT,
    JavaSyntaxError,
    change_kinds,
    consolidate,
    detect,
    diff,
    parse,
    purge_on_revert,
    render_path_id,
    version_gate,
)

__all__ = [
    "TAXONOMY_KIND_COUNT",
    "JavaSyntaxError",
    "change_kinds",
    "consolidate",
    "detect",
    "diff",
    "parse",
    "purge_on_revert",
    "render_path_id",
    "version_gate",
]
