"""Element geometry: resolve boxes from a DesignDocument, load harness dumps.

Resolution is a deliberate approximation of browser layout for the
supported CSS subset; the browser harness supersedes it with precise
boxes and text rects through the geometry dump contract.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from ..errors import InvariantViolation, SchemaMismatch
from ..model import (
    CanvasSpec,
    ElementGeometry,
    ElementKind,
    GeometrySet,
    Rect,
    TextRegion,
    validate_geometry_set,
)
from .css import resolve_length, resolve_line_height, resolve_transform
from .parser import DesignDocument, DesignNode, NON_RENDERED_TAGS

DEFAULT_FONT_SIZE = 16.0
DEFAULT_LINE_HEIGHT_FACTOR = 1.2  # browser "normal" approximation
DEFAULT_TEXT_WIDTH_FACTOR = 0.6


@dataclass(frozen=True)
class TextMeasure:
    """Fallback text measurement knobs for boxes without explicit size."""

    width_factor: float = DEFAULT_TEXT_WIDTH_FACTOR


def rotated_aabb(x: float, y: float, w: float, h: float, angle_deg: float) -> Rect:
    """Axis-aligned bounding box of a rectangle rotated about its center."""
    if angle_deg % 180.0 == 0.0:
        return Rect(x, y, w, h)
    cx, cy = x + w / 2.0, y + h / 2.0
    if angle_deg % 90.0 == 0.0:
        # quarter turns swap the extents exactly
        return Rect(cx - h / 2.0, cy - w / 2.0, h, w)
    theta = math.radians(angle_deg)
    cos_t, sin_t = abs(math.cos(theta)), abs(math.sin(theta))
    new_w = w * cos_t + h * sin_t
    new_h = w * sin_t + h * cos_t
    return Rect(cx - new_w / 2.0, cy - new_h / 2.0, new_w, new_h)


def visible_decoration(node: DesignNode) -> bool:
    """True when the node paints a background or border of its own."""
    style = node.resolved_style
    bg = (style.get("background", "") + style.get("background-color", "")).strip()
    if bg and bg.lower() not in ("none", "transparent"):
        return True
    border = style.get("border", "").strip().lower()
    return bool(border) and border not in ("none", "0")


def classify_node(node: DesignNode) -> ElementKind:
    """Element taxonomy shared with the browser harness heuristics."""
    style = node.resolved_style
    background = style.get("background", "")
    if node.tag == "img" or "url(" in background:
        return ElementKind.IMAGE
    if not node.has_element_children() and node.own_text():
        return ElementKind.TEXT
    if node.has_element_children():
        return ElementKind.CONTAINER
    if visible_decoration(node):
        return ElementKind.SHAPE
    return ElementKind.CONTAINER


def _text_line_metrics(node: DesignNode, canvas: CanvasSpec) -> tuple[float, float]:
    style = node.resolved_style
    font_size = DEFAULT_FONT_SIZE
    if "font-size" in style:
        font_size = resolve_length(style["font-size"], canvas, "y")
    if "line-height" in style:
        line_px = resolve_line_height(style["line-height"], font_size)
    else:
        line_px = font_size * DEFAULT_LINE_HEIGHT_FACTOR
    return font_size, line_px


def resolve_geometry(
    doc: DesignDocument, measure: Optional[TextMeasure] = None
) -> GeometrySet:
    """One ElementGeometry per rendered node under the poster container."""
    measure = measure or TextMeasure()
    canvas = doc.canvas
    elements: list[ElementGeometry] = []
    text_regions: list[TextRegion] = []
    used_ids: set[str] = set()
    counter = {"n": 0}

    def make_id(node: DesignNode) -> str:
        candidate = node.attrs.get("id") or f"{node.tag}-{counter['n']}"
        while candidate in used_ids:
            candidate = f"{candidate}x"
        used_ids.add(candidate)
        return candidate

    def walk(node: DesignNode, origin_x: float, origin_y: float, cb_w: float, cb_h: float):
        flow_y = 0.0
        for child in node.children:
            if child.tag in NON_RENDERED_TAGS:
                continue
            counter["n"] += 1
            style = child.resolved_style
            kind = classify_node(child)

            width: Optional[float] = None
            height: Optional[float] = None
            if "width" in style:
                width = resolve_length(style["width"], canvas, "x", reference=cb_w)
            if "height" in style:
                height = resolve_length(style["height"], canvas, "y", reference=cb_h)

            font_size, line_px = _text_line_metrics(child, canvas)
            if kind == ElementKind.TEXT:
                text_value = child.own_text()
                if width is None:
                    width = len(text_value) * font_size * measure.width_factor
                    lines = 1
                else:
                    single = len(text_value) * font_size * measure.width_factor
                    lines = max(1, math.ceil(single / width)) if width > 0 else 1
                if height is None:
                    height = lines * line_px
            if width is None:
                width = cb_w if kind in (ElementKind.CONTAINER, ElementKind.SHAPE) else 0.0
            if height is None:
                height = 0.0

            x = origin_x
            y = origin_y
            position = style.get("position", "static").strip().lower()
            has_left = "left" in style
            has_top = "top" in style
            if has_left:
                x = origin_x + resolve_length(style["left"], canvas, "x", reference=cb_w)
            elif "right" in style:
                right = resolve_length(style["right"], canvas, "x", reference=cb_w)
                x = origin_x + cb_w - right - width
            if has_top:
                y = origin_y + resolve_length(style["top"], canvas, "y", reference=cb_h)
            elif "bottom" in style:
                bottom = resolve_length(style["bottom"], canvas, "y", reference=cb_h)
                y = origin_y + cb_h - bottom - height
            elif position in ("static", "relative"):
                # simplified flow: unpositioned children stack vertically
                y = origin_y + flow_y

            if "transform" in style:
                t = resolve_transform(style["transform"], canvas, width, height)
                x += t.dx
                y += t.dy
                angle = t.rotate_deg
            else:
                angle = 0.0

            bbox = rotated_aabb(x, y, width, height, angle)
            opacity = 1.0
            if "opacity" in style:
                try:
                    opacity = min(1.0, max(0.0, float(style["opacity"])))
                except ValueError:
                    pass
            z = 0
            if "z-index" in style:
                try:
                    z = int(float(style["z-index"]))
                except ValueError:
                    pass

            element_id = make_id(child)
            text_value = child.own_text() if kind == ElementKind.TEXT else None
            elements.append(
                ElementGeometry(
                    id=element_id,
                    kind=kind,
                    bbox=bbox,
                    z=z,
                    opacity=opacity,
                    angle=angle,
                    text=text_value,
                )
            )
            if kind == ElementKind.TEXT and text_value:
                text_regions.append(TextRegion(text=text_value, rects=(bbox,)))

            if position in ("static", "relative") and not has_top and "bottom" not in style:
                flow_y += height

            if child.children:
                walk(child, x, y, width if width > 0 else cb_w, height if height > 0 else cb_h)

    walk(doc.poster, 0.0, 0.0, canvas.width, canvas.height)
    return GeometrySet(
        canvas=canvas, elements=tuple(elements), text_regions=tuple(text_regions)
    )


_DUMP_KEYS = {"canvas", "elements", "text_nodes"}
_CANVAS_KEYS = {"width", "height"}
_ELEMENT_KEYS = {"id", "kind", "bbox", "z", "opacity", "angle", "text"}
_RECT_KEYS = {"x", "y", "w", "h"}
_TEXT_NODE_KEYS = {"text", "rects"}
_KINDS = {"text", "image", "shape", "container"}


def _require_keys(obj: Any, keys: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaMismatch(f"{where} must be an object")
    missing = keys - obj.keys()
    extra = obj.keys() - keys
    if missing:
        raise SchemaMismatch(f"{where} missing fields: {sorted(missing)}")
    if extra:
        raise SchemaMismatch(f"{where} has unknown fields: {sorted(extra)}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaMismatch(f"{where} must be a number, got {type(value).__name__}")
    return float(value)


def _rect_from(obj: Any, where: str) -> Rect:
    _require_keys(obj, _RECT_KEYS, where)
    return Rect(*(_number(obj[k], f"{where}.{k}") for k in ("x", "y", "w", "h")))


def load_geometry_dump(data: bytes | str) -> GeometrySet:
    """Load the harness geometry dump, enforcing the bit-exact schema."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"geometry dump is not valid JSON: {exc}") from exc

    _require_keys(raw, _DUMP_KEYS, "dump")
    _require_keys(raw["canvas"], _CANVAS_KEYS, "canvas")
    canvas = CanvasSpec(
        width=_number(raw["canvas"]["width"], "canvas.width"),
        height=_number(raw["canvas"]["height"], "canvas.height"),
    )

    if not isinstance(raw["elements"], list):
        raise SchemaMismatch("elements must be an array")
    elements: list[ElementGeometry] = []
    for i, entry in enumerate(raw["elements"]):
        where = f"elements[{i}]"
        _require_keys(entry, _ELEMENT_KEYS, where)
        if not isinstance(entry["id"], str):
            raise SchemaMismatch(f"{where}.id must be a string")
        if entry["kind"] not in _KINDS:
            raise SchemaMismatch(f"{where}.kind must be one of {sorted(_KINDS)}")
        if entry["text"] is not None and not isinstance(entry["text"], str):
            raise SchemaMismatch(f"{where}.text must be a string or null")
        if isinstance(entry["z"], bool) or not isinstance(entry["z"], int):
            raise SchemaMismatch(f"{where}.z must be an integer")
        elements.append(
            ElementGeometry(
                id=entry["id"],
                kind=ElementKind(entry["kind"]),
                bbox=_rect_from(entry["bbox"], f"{where}.bbox"),
                z=entry["z"],
                opacity=_number(entry["opacity"], f"{where}.opacity"),
                angle=_number(entry["angle"], f"{where}.angle"),
                text=entry["text"],
            )
        )

    if not isinstance(raw["text_nodes"], list):
        raise SchemaMismatch("text_nodes must be an array")
    regions: list[TextRegion] = []
    for i, entry in enumerate(raw["text_nodes"]):
        where = f"text_nodes[{i}]"
        _require_keys(entry, _TEXT_NODE_KEYS, where)
        if not isinstance(entry["text"], str):
            raise SchemaMismatch(f"{where}.text must be a string")
        if not isinstance(entry["rects"], list):
            raise SchemaMismatch(f"{where}.rects must be an array")
        rects = tuple(
            _rect_from(r, f"{where}.rects[{j}]") for j, r in enumerate(entry["rects"])
        )
        regions.append(TextRegion(text=entry["text"], rects=rects))

    g = GeometrySet(canvas=canvas, elements=tuple(elements), text_regions=tuple(regions))
    violations = validate_geometry_set(g)
    if violations:
        raise InvariantViolation(violations)
    return g
