"""Constrained poster HTML parsing into a DesignDocument.

The parser recovers from unclosed void-like tags and stray end tags but
rejects interleaved misnesting: silently repairing gross errors would
corrupt every downstream metric.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Optional

from ..errors import MalformedMarkup, MissingCanvasSize, NoPosterContainer
from ..model import CanvasSpec
from .css import Stylesheet, parse_stylesheet, partition_declarations

VOID_TAGS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# Tags whose content never renders on the poster.
NON_RENDERED_TAGS = frozenset({"style", "script", "head", "title", "meta", "link", "base"})


@dataclass
class DesignNode:
    """One element: tag, classes, style maps, children, and direct text."""

    tag: str
    classes: tuple[str, ...] = ()
    attrs: dict[str, str] = field(default_factory=dict)
    inline_style: dict[str, str] = field(default_factory=dict)
    resolved_style: dict[str, str] = field(default_factory=dict)
    raw_unsupported: dict[str, str] = field(default_factory=dict)
    children: list["DesignNode"] = field(default_factory=list)
    text: str = ""
    doc_index: int = -1

    def iter_subtree(self) -> Iterator["DesignNode"]:
        yield self
        for child in self.children:
            yield from child.iter_subtree()

    def has_element_children(self) -> bool:
        return bool(self.children)

    def own_text(self) -> str:
        return self.text.strip()

    def path_from(self, root: "DesignNode") -> str:
        """Slash path of tag[index] segments from root to this node."""
        trail = _find_trail(root, self)
        return "/".join(f"{n.tag}[{i}]" for n, i in trail)


def _find_trail(root: DesignNode, target: DesignNode):
    def recurse(node, acc):
        if node is target:
            return acc
        for i, child in enumerate(node.children):
            found = recurse(child, acc + [(child, i)])
            if found is not None:
                return found
        return None

    return recurse(root, [(root, 0)]) or [(root, 0)]


@dataclass
class DesignDocument:
    """Parsed poster document with resolved styles and its canvas size."""

    canvas: CanvasSpec
    root: DesignNode
    poster: DesignNode
    stylesheet: Stylesheet
    source_digest: str

    def iter_nodes(self) -> Iterator[DesignNode]:
        yield from self.root.iter_subtree()


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = DesignNode(tag="#document")
        self.stack: list[DesignNode] = [self.root]
        self.style_chunks: list[str] = []
        self._suppress_data_for: Optional[str] = None

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag in ("style", "script", "title"):
            self._suppress_data_for = tag
            if tag != "style":
                return
        node = DesignNode(tag=tag)
        for name, value in attrs:
            name = name.lower()
            node.attrs[name] = value or ""
        node.classes = tuple((node.attrs.get("class") or "").split())
        style_attr = node.attrs.get("style", "")
        if style_attr:
            supported, unsupported = partition_declarations(style_attr)
            node.inline_style = supported
            node.raw_unsupported.update(unsupported)
        if tag == "style":
            return  # collected via handle_data, never part of the tree
        self.stack[-1].children.append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        tag = tag.lower()
        if tag in ("style", "script", "title"):
            return
        before = len(self.stack)
        self.handle_starttag(tag, attrs)
        if len(self.stack) > before:
            self.stack.pop()

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in ("style", "script", "title"):
            self._suppress_data_for = None
            return
        if tag in VOID_TAGS:
            return
        if len(self.stack) > 1 and self.stack[-1].tag == tag:
            self.stack.pop()
            return
        open_tags = [n.tag for n in self.stack[1:]]
        if tag in open_tags:
            raise MalformedMarkup(
                f"</{tag}> closes an element that is not innermost "
                f"(open: {' > '.join(open_tags)})"
            )
        # stray end tag with no matching open element: recoverable, ignore

    def handle_data(self, data):
        if self._suppress_data_for == "style":
            self.style_chunks.append(data)
            return
        if self._suppress_data_for in ("script", "title"):
            return
        if data:
            self.stack[-1].text += data


def parse_tree(html_text: str) -> tuple[DesignNode, DesignNode, Stylesheet]:
    """Build the node tree with resolved styles; no canvas requirement.

    Returns (root, poster, stylesheet). Raises NoPosterContainer and
    MalformedMarkup but tolerates posters whose size only a browser can
    resolve.
    """
    builder = _TreeBuilder()
    try:
        builder.feed(html_text)
        builder.close()
    except MalformedMarkup:
        raise
    except Exception as exc:  # html.parser raises bare exceptions on hard errors
        raise MalformedMarkup(f"unparseable markup: {exc}") from exc

    root = builder.root
    stylesheet = parse_stylesheet("".join(builder.style_chunks))

    posters = [n for n in root.iter_subtree() if "poster" in n.classes]
    if not posters:
        raise NoPosterContainer('no element carries class "poster"')
    if len(posters) > 1:
        raise MalformedMarkup(f'{len(posters)} elements carry class "poster"; expected one')
    poster = posters[0]

    for i, node in enumerate(root.iter_subtree()):
        node.doc_index = i
        if node is root:
            continue
        resolved = dict(stylesheet.cascade(node.tag, node.classes))
        resolved.update(node.inline_style)
        node.resolved_style = resolved
        sheet_unsupported = stylesheet.unsupported_for(node.tag, node.classes)
        for prop, value in sheet_unsupported.items():
            node.raw_unsupported.setdefault(prop, value)
    return root, poster, stylesheet


def parse_design(html_text: str) -> DesignDocument:
    """Parse poster HTML and resolve styles against the single stylesheet."""
    root, poster, stylesheet = parse_tree(html_text)
    canvas = _poster_canvas(poster)
    digest = hashlib.sha256(html_text.encode("utf-8")).hexdigest()
    return DesignDocument(
        canvas=canvas,
        root=root,
        poster=poster,
        stylesheet=stylesheet,
        source_digest=digest,
    )


def _absolute_px(value: str) -> float:
    v = value.strip().lower()
    if v.endswith("px"):
        v = v[:-2]
    return float(v)


def _poster_canvas(poster: DesignNode) -> CanvasSpec:
    style = poster.resolved_style
    width = style.get("width")
    height = style.get("height")
    if not width or not height:
        raise MissingCanvasSize(".poster must declare width and height")
    # the poster is the canvas itself, so only absolute px lengths resolve
    try:
        w = _absolute_px(width)
        h = _absolute_px(height)
    except ValueError as exc:
        raise MissingCanvasSize(
            f".poster size must use absolute px lengths, got {width!r} x {height!r}"
        ) from exc
    if w <= 0 or h <= 0:
        raise MissingCanvasSize(f".poster size must be positive, got {w}x{h}")
    return CanvasSpec(width=w, height=h)
