"""CSS subset: declarations, lengths, transforms, and a small cascade.

The supported property whitelist covers exactly what geometry resolution
needs; everything else is preserved raw and surfaced through lint.
Selectors are single class or element-type selectors from one <style>
block; specificity is inline > class > type, later rule wins ties.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..errors import UnresolvableLength
from ..model import CanvasSpec

SUPPORTED_PROPERTIES = frozenset({
    "position",
    "left", "top", "right", "bottom",
    "width", "height",
    "transform",
    "z-index",
    "opacity",
    "font-size",
    "line-height",
    "letter-spacing",
    "font-family",
    "text-align",
    "color",
    "background",
    "background-color",
    "border-radius",
    "border",
})

_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_LENGTH_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+))([a-z%]*)$")
_TRANSFORM_FN_RE = re.compile(r"([a-zA-Z]+)\(([^)]*)\)")


def split_declarations(style_text: str) -> list[tuple[str, str]]:
    """Split "prop: value; ..." into pairs, respecting quotes and parens."""
    out: list[tuple[str, str]] = []
    depth = 0
    quote: Optional[str] = None
    current: list[str] = []
    chunks: list[str] = []
    for ch in style_text:
        if quote:
            if ch == quote:
                quote = None
            current.append(ch)
            continue
        if ch in "'\"":
            quote = ch
            current.append(ch)
        elif ch == "(":
            depth += 1
            current.append(ch)
        elif ch == ")":
            depth = max(0, depth - 1)
            current.append(ch)
        elif ch == ";" and depth == 0:
            chunks.append("".join(current))
            current = []
        else:
            current.append(ch)
    chunks.append("".join(current))
    for chunk in chunks:
        if ":" not in chunk:
            continue
        prop, _, value = chunk.partition(":")
        prop = prop.strip().lower()
        value = value.strip()
        if prop and value:
            out.append((prop, value))
    return out


def partition_declarations(style_text: str) -> tuple[dict[str, str], dict[str, str]]:
    """Split declarations into (supported, raw-preserved unsupported)."""
    supported: dict[str, str] = {}
    unsupported: dict[str, str] = {}
    for prop, value in split_declarations(style_text):
        if prop in SUPPORTED_PROPERTIES:
            supported[prop] = value
        else:
            unsupported[prop] = value
    return supported, unsupported


def resolve_length(
    value: str,
    canvas: CanvasSpec,
    axis: str,
    reference: Optional[float] = None,
) -> float:
    """Resolve a CSS length against the canvas (or an explicit reference).

    px resolves directly; % uses the reference when given, otherwise the
    canvas extent on the axis; vw/vh always use the canvas. Bare numbers
    are treated as px, matching how generated documents write them.
    """
    m = _LENGTH_RE.match(value.strip().lower())
    if not m:
        raise UnresolvableLength(f"cannot resolve length {value!r}")
    number = float(m.group(1))
    unit = m.group(2)
    if unit in ("px", ""):
        return number
    if unit == "%":
        base = reference
        if base is None:
            base = canvas.width if axis == "x" else canvas.height
        return number / 100.0 * base
    if unit == "vw":
        return number / 100.0 * canvas.width
    if unit == "vh":
        return number / 100.0 * canvas.height
    raise UnresolvableLength(f"unsupported unit {unit!r} in {value!r}")


def resolve_number(value: str, fallback: float) -> float:
    try:
        return float(value.strip())
    except ValueError:
        return fallback


def resolve_line_height(value: str, font_size: float) -> float:
    """Line height as an absolute px value; bare multipliers scale font size."""
    v = value.strip().lower()
    m = _LENGTH_RE.match(v)
    if m and m.group(2) == "":
        return float(m.group(1)) * font_size
    if m and m.group(2) == "px":
        return float(m.group(1))
    if m and m.group(2) == "%":
        return float(m.group(1)) / 100.0 * font_size
    raise UnresolvableLength(f"cannot resolve line-height {value!r}")


@dataclass(frozen=True)
class Transform:
    """Accumulated translate offsets plus a rotation angle in degrees."""

    dx: float = 0.0
    dy: float = 0.0
    rotate_deg: float = 0.0


def resolve_transform(
    value: str, canvas: CanvasSpec, own_w: float, own_h: float
) -> Transform:
    """Parse translate/translateX/translateY/rotate; percentages use own box."""
    dx = dy = angle = 0.0
    matched_spans: list[tuple[int, int]] = []
    for m in _TRANSFORM_FN_RE.finditer(value):
        matched_spans.append(m.span())
        fn = m.group(1).lower()
        args = [a.strip() for a in m.group(2).split(",") if a.strip()]
        if fn == "translate":
            if not 1 <= len(args) <= 2:
                raise UnresolvableLength(f"translate expects 1-2 args: {value!r}")
            dx += resolve_length(args[0], canvas, "x", reference=own_w)
            if len(args) == 2:
                dy += resolve_length(args[1], canvas, "y", reference=own_h)
        elif fn == "translatex":
            dx += resolve_length(args[0], canvas, "x", reference=own_w)
        elif fn == "translatey":
            dy += resolve_length(args[0], canvas, "y", reference=own_h)
        elif fn == "rotate":
            arg = args[0].lower()
            if arg.endswith("deg"):
                angle += float(arg[:-3])
            elif arg.endswith("rad"):
                angle += math.degrees(float(arg[:-3]))
            elif arg.endswith("turn"):
                angle += float(arg[:-4]) * 360.0
            else:
                angle += float(arg)
        else:
            raise UnresolvableLength(f"unsupported transform function {fn!r}")
    leftover = _TRANSFORM_FN_RE.sub("", value).strip()
    if leftover and leftover.lower() != "none":
        raise UnresolvableLength(f"cannot parse transform {value!r}")
    return Transform(dx=dx, dy=dy, rotate_deg=angle)


@dataclass(frozen=True)
class StyleRule:
    """One stylesheet rule with a single simple selector."""

    selector: str
    kind: str  # "class" or "type"
    key: str
    declarations: dict[str, str]
    unsupported: dict[str, str]
    order: int


@dataclass
class Stylesheet:
    rules: list[StyleRule] = field(default_factory=list)
    unsupported_selectors: list[str] = field(default_factory=list)

    def cascade(self, tag: str, classes: Iterable[str]) -> dict[str, str]:
        """Type rules first, then class rules, in source order."""
        resolved: dict[str, str] = {}
        class_set = set(classes)
        for rule in self.rules:
            if rule.kind == "type" and rule.key == tag:
                resolved.update(rule.declarations)
        for rule in self.rules:
            if rule.kind == "class" and rule.key in class_set:
                resolved.update(rule.declarations)
        return resolved

    def unsupported_for(self, tag: str, classes: Iterable[str]) -> dict[str, str]:
        out: dict[str, str] = {}
        class_set = set(classes)
        for rule in self.rules:
            matches = (rule.kind == "type" and rule.key == tag) or (
                rule.kind == "class" and rule.key in class_set
            )
            if matches:
                out.update(rule.unsupported)
        return out


_SIMPLE_CLASS_RE = re.compile(r"^\.([A-Za-z_][\w-]*)$")
_SIMPLE_TYPE_RE = re.compile(r"^([A-Za-z][\w-]*)$")


def parse_stylesheet(css_text: str) -> Stylesheet:
    """Parse one <style> block into simple class/type rules.

    Selectors beyond a single class or element type (combinators, pseudo
    classes, ids) are recorded as unsupported and skipped.
    """
    sheet = Stylesheet()
    text = _COMMENT_RE.sub("", css_text)
    order = 0
    pos = 0
    while True:
        brace = text.find("{", pos)
        if brace < 0:
            break
        selector_blob = text[pos:brace].strip()
        end = text.find("}", brace)
        if end < 0:
            break
        body = text[brace + 1 : end]
        pos = end + 1
        if not selector_blob:
            continue
        supported, unsupported = partition_declarations(body)
        for selector in (s.strip() for s in selector_blob.split(",")):
            if not selector:
                continue
            class_m = _SIMPLE_CLASS_RE.match(selector)
            type_m = _SIMPLE_TYPE_RE.match(selector)
            if class_m:
                kind, key = "class", class_m.group(1)
            elif type_m:
                kind, key = "type", type_m.group(1).lower()
            else:
                sheet.unsupported_selectors.append(selector)
                continue
            sheet.rules.append(
                StyleRule(
                    selector=selector,
                    kind=kind,
                    key=key,
                    declarations=dict(supported),
                    unsupported=dict(unsupported),
                    order=order,
                )
            )
            order += 1
    return sheet
