"""Poster HTML parsing, geometry resolution, and lint."""
from .css import SUPPORTED_PROPERTIES, parse_stylesheet, resolve_length
from .geometry import (
    TextMeasure,
    classify_node,
    load_geometry_dump,
    resolve_geometry,
    rotated_aabb,
)
from .lint import LintFinding, LintReport, lint_poster, poster_container_report
from .parser import DesignDocument, DesignNode, parse_design, parse_tree

__all__ = [
    "SUPPORTED_PROPERTIES",
    "DesignDocument",
    "DesignNode",
    "LintFinding",
    "LintReport",
    "TextMeasure",
    "classify_node",
    "lint_poster",
    "load_geometry_dump",
    "parse_design",
    "parse_tree",
    "parse_stylesheet",
    "poster_container_report",
    "resolve_geometry",
    "resolve_length",
    "rotated_aabb",
]
