"""Poster container lint: structural errors and quality warnings."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnresolvableLength
from ..model import Rect
from .geometry import resolve_geometry, visible_decoration
from .parser import NON_RENDERED_TAGS, DesignDocument, DesignNode

SEVERITY_ERROR = "error"
SEVERITY_WARN = "warn"


@dataclass(frozen=True)
class LintFinding:
    severity: str
    code: str
    message: str
    path: str

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "path": self.path,
        }


@dataclass(frozen=True)
class LintReport:
    findings: tuple[LintFinding, ...]

    @property
    def errors(self) -> tuple[LintFinding, ...]:
        return tuple(f for f in self.findings if f.severity == SEVERITY_ERROR)

    def has_code(self, code: str) -> bool:
        return any(f.code == code for f in self.findings)

    def to_dict(self) -> dict:
        return {"findings": [f.to_dict() for f in self.findings]}


def _renders_content(node: DesignNode) -> bool:
    if node.tag in NON_RENDERED_TAGS:
        return False
    if node.tag == "img":
        return True
    if node.own_text():
        return True
    return visible_decoration(node)


def container_findings(root: DesignNode, poster: DesignNode) -> list[tuple[int, LintFinding]]:
    """Content rendered outside the poster subtree, with doc-order keys."""
    raw: list[tuple[int, LintFinding]] = []
    inside = set(id(n) for n in poster.iter_subtree())
    ancestors: set[int] = set()
    trail: list[DesignNode] = []

    def mark_ancestors(node: DesignNode) -> bool:
        if node is poster:
            for t in trail:
                ancestors.add(id(t))
            return True
        trail.append(node)
        found = any(mark_ancestors(c) for c in node.children)
        trail.pop()
        return found

    mark_ancestors(root)

    for node in root.iter_subtree():
        if node is root:
            continue
        nid = id(node)
        if nid in inside or nid in ancestors:
            continue
        if _renders_content(node):
            raw.append((
                node.doc_index,
                LintFinding(
                    SEVERITY_ERROR,
                    "content-outside-poster",
                    f"<{node.tag}> renders content outside the .poster container",
                    node.path_from(root),
                ),
            ))
    return raw


def poster_container_report(html_text: str) -> LintReport:
    """Container-discipline check that tolerates unresolvable canvas sizes.

    Raises NoPosterContainer/MalformedMarkup for documents with no usable
    container at all; otherwise reports content-outside-poster findings.
    """
    from .parser import parse_tree

    root, poster, _ = parse_tree(html_text)
    ordered = tuple(
        f for _, f in sorted(container_findings(root, poster), key=lambda x: (x[0], x[1].code))
    )
    return LintReport(findings=ordered)


def lint_poster(doc: DesignDocument) -> LintReport:
    """Check container discipline, property support, and canvas coverage.

    Findings are ordered by document position, then code; violations are
    reported as data so batch evaluation keeps moving.
    """
    raw: list[tuple[int, LintFinding]] = list(container_findings(doc.root, doc.poster))

    for node in doc.iter_nodes():
        if node is doc.root:
            continue
        for prop in sorted(node.raw_unsupported):
            raw.append((
                node.doc_index,
                LintFinding(
                    SEVERITY_WARN,
                    "unsupported-property",
                    f"property {prop!r} is outside the supported subset",
                    node.path_from(doc.root),
                ),
            ))

    for selector in doc.stylesheet.unsupported_selectors:
        raw.append((
            -1,
            LintFinding(
                SEVERITY_WARN,
                "unsupported-selector",
                f"selector {selector!r} is outside the supported subset",
                "<style>",
            ),
        ))

    try:
        geometry = resolve_geometry(doc)
        canvas_rect = Rect(0.0, 0.0, doc.canvas.width, doc.canvas.height)
        for order, element in enumerate(geometry.elements):
            if element.bbox.w > 0 and element.bbox.h > 0 and element.bbox.intersection_area(canvas_rect) <= 0:
                raw.append((
                    10_000 + order,
                    LintFinding(
                        SEVERITY_WARN,
                        "off-canvas",
                        f"element {element.id!r} lies fully outside the canvas",
                        element.id,
                    ),
                ))
    except UnresolvableLength as exc:
        raw.append((
            -1,
            LintFinding(SEVERITY_WARN, "unresolvable-length", str(exc), "<style>"),
        ))

    ordered = tuple(f for _, f in sorted(raw, key=lambda item: (item[0], item[1].code)))
    return LintReport(findings=ordered)
