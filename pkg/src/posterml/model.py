"""Shared domain types: designs, geometry, plans, and metric reports.

All types are immutable value objects with a canonical JSON encoding
(lower_snake_case field names, `to_dict`/`from_dict` round-trip identity).
Coordinates are CSS pixels, canvas origin top-left, y growing downward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Optional


class ElementKind(str, Enum):
    TEXT = "text"
    IMAGE = "image"
    SHAPE = "shape"
    CONTAINER = "container"


class TextAlign(str, Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in CSS pixels."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    def intersection_area(self, other: "Rect") -> float:
        iw = min(self.x + self.w, other.x + other.w) - max(self.x, other.x)
        ih = min(self.y + self.h, other.y + other.h) - max(self.y, other.y)
        if iw <= 0 or ih <= 0:
            return 0.0
        return iw * ih

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Rect":
        return cls(
            x=float(raw["x"]), y=float(raw["y"]),
            w=float(raw["w"]), h=float(raw["h"]),
        )


@dataclass(frozen=True)
class CanvasSpec:
    """Design canvas size in CSS pixels."""

    width: float
    height: float

    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CanvasSpec":
        return cls(width=float(raw["width"]), height=float(raw["height"]))


@dataclass(frozen=True)
class ElementGeometry:
    """One rendered element's box after rotation, plus stacking metadata."""

    id: str
    kind: ElementKind
    bbox: Rect
    z: int = 0
    opacity: float = 1.0
    angle: float = 0.0
    text: Optional[str] = None

    def alignment_coordinates(self) -> tuple[float, float, float, float, float, float]:
        """Left, horizontal center, right, top, vertical center, bottom."""
        b = self.bbox
        return (b.x, b.x + b.w / 2, b.x + b.w, b.y, b.y + b.h / 2, b.y + b.h)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "bbox": self.bbox.to_dict(),
            "z": self.z,
            "opacity": self.opacity,
            "angle": self.angle,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ElementGeometry":
        return cls(
            id=str(raw["id"]),
            kind=ElementKind(raw["kind"]),
            bbox=Rect.from_dict(raw["bbox"]),
            z=int(raw["z"]),
            opacity=float(raw["opacity"]),
            angle=float(raw["angle"]),
            text=raw.get("text"),
        )


@dataclass(frozen=True)
class TextRegion:
    """Precise rendering rectangles of one non-empty text node."""

    text: str
    rects: tuple[Rect, ...]

    def to_dict(self) -> dict:
        return {"text": self.text, "rects": [r.to_dict() for r in self.rects]}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "TextRegion":
        return cls(
            text=str(raw["text"]),
            rects=tuple(Rect.from_dict(r) for r in raw["rects"]),
        )


@dataclass(frozen=True)
class GeometrySet:
    """Resolved geometry of a design: canvas, elements, and text regions."""

    canvas: CanvasSpec
    elements: tuple[ElementGeometry, ...]
    text_regions: tuple[TextRegion, ...] = ()

    def to_dict(self) -> dict:
        return {
            "canvas": self.canvas.to_dict(),
            "elements": [e.to_dict() for e in self.elements],
            "text_regions": [t.to_dict() for t in self.text_regions],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "GeometrySet":
        return cls(
            canvas=CanvasSpec.from_dict(raw["canvas"]),
            elements=tuple(ElementGeometry.from_dict(e) for e in raw["elements"]),
            text_regions=tuple(
                TextRegion.from_dict(t) for t in raw.get("text_regions", [])
            ),
        )


@dataclass(frozen=True)
class Violation:
    """One broken invariant, addressed to the offending element or section."""

    subject: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: [{self.code}] {self.message}"


def validate_geometry_set(g: GeometrySet) -> list[Violation]:
    """Check every GeometrySet invariant; returns violations, never raises."""
    out: list[Violation] = []
    if not (
        math.isfinite(g.canvas.width)
        and math.isfinite(g.canvas.height)
        and g.canvas.width > 0
        and g.canvas.height > 0
    ):
        out.append(Violation("canvas", "bad-canvas", "width and height must be finite and > 0"))

    seen: set[str] = set()
    for e in g.elements:
        if e.id in seen:
            out.append(Violation(e.id, "duplicate-id", "element id is not unique"))
        seen.add(e.id)
        if not e.bbox.is_finite():
            out.append(Violation(e.id, "non-finite-bbox", "bbox has non-finite values"))
        elif e.bbox.w < 0 or e.bbox.h < 0:
            out.append(Violation(e.id, "negative-extent", "bbox w and h must be >= 0"))
        if not (math.isfinite(e.opacity) and 0.0 <= e.opacity <= 1.0):
            out.append(Violation(e.id, "bad-opacity", "opacity must be in [0, 1]"))
        if not math.isfinite(e.angle):
            out.append(Violation(e.id, "bad-angle", "angle must be finite"))

    for i, region in enumerate(g.text_regions):
        subject = f"text_regions[{i}]"
        if not region.text.strip():
            out.append(Violation(subject, "blank-text", "text must contain non-whitespace"))
        if len(region.rects) < 1:
            out.append(Violation(subject, "no-rects", "entry must carry at least one rect"))
        for r in region.rects:
            if not r.is_finite() or r.w < 0 or r.h < 0:
                out.append(Violation(subject, "bad-rect", "rects must be finite with w,h >= 0"))
                break
    return out


@dataclass(frozen=True)
class Group:
    """A named set of related layers from the semantic plan."""

    group_id: str
    children: tuple[int, ...]
    theme: str

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "children": list(self.children),
            "theme": self.theme,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Group":
        return cls(
            group_id=str(raw["group_id"]),
            children=tuple(int(c) for c in raw["children"]),
            theme=str(raw["theme"]),
        )


@dataclass(frozen=True)
class ImagePrompt:
    """Generation/retrieval prompt for one image layer."""

    layer_id: int
    layer_prompt: str

    def to_dict(self) -> dict:
        return {"layer_id": self.layer_id, "layer_prompt": self.layer_prompt}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ImagePrompt":
        return cls(layer_id=int(raw["layer_id"]), layer_prompt=str(raw["layer_prompt"]))


@dataclass(frozen=True)
class TextSpec:
    """Full typographic specification of one text layer."""

    layer_id: int
    width: float
    height: float
    opacity: float
    text: str
    font: str
    font_size: float
    text_align: TextAlign
    angle: float = 0.0
    capitalize: bool = False
    line_height: float = 1.0
    letter_spacing: float = 0.0

    def to_dict(self) -> dict:
        return {
            "layer_id": self.layer_id,
            "width": self.width,
            "height": self.height,
            "opacity": self.opacity,
            "text": self.text,
            "font": self.font,
            "font_size": self.font_size,
            "text_align": self.text_align.value,
            "angle": self.angle,
            "capitalize": self.capitalize,
            "line_height": self.line_height,
            "letter_spacing": self.letter_spacing,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "TextSpec":
        return cls(
            layer_id=int(raw["layer_id"]),
            width=float(raw["width"]),
            height=float(raw["height"]),
            opacity=float(raw["opacity"]),
            text=str(raw["text"]),
            font=str(raw["font"]),
            font_size=float(raw["font_size"]),
            text_align=TextAlign(raw["text_align"]),
            angle=float(raw.get("angle", 0.0)),
            capitalize=bool(raw.get("capitalize", False)),
            line_height=float(raw.get("line_height", 1.0)),
            letter_spacing=float(raw.get("letter_spacing", 0.0)),
        )


@dataclass(frozen=True)
class SemanticPlan:
    """The planner's four sections, parsed and cross-validated."""

    layout_thought: str
    groups: tuple[Group, ...]
    image_prompts: tuple[ImagePrompt, ...]
    text_specs: tuple[TextSpec, ...]

    def declared_layer_ids(self) -> set[int]:
        return {p.layer_id for p in self.image_prompts} | {
            t.layer_id for t in self.text_specs
        }

    def to_dict(self) -> dict:
        return {
            "layout_thought": self.layout_thought,
            "groups": [g.to_dict() for g in self.groups],
            "image_prompts": [p.to_dict() for p in self.image_prompts],
            "text_specs": [t.to_dict() for t in self.text_specs],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "SemanticPlan":
        return cls(
            layout_thought=str(raw["layout_thought"]),
            groups=tuple(Group.from_dict(g) for g in raw["groups"]),
            image_prompts=tuple(ImagePrompt.from_dict(p) for p in raw["image_prompts"]),
            text_specs=tuple(TextSpec.from_dict(t) for t in raw["text_specs"]),
        )


@dataclass(frozen=True)
class ValidityResult:
    """Per-element validity verdicts and the aggregate ratio."""

    n_valid: int
    n_total: int
    score: float
    per_element: Mapping[str, dict]
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "n_valid": self.n_valid,
            "n_total": self.n_total,
            "score": self.score,
            "per_element": {k: dict(v) for k, v in sorted(self.per_element.items())},
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ValidityResult":
        return cls(
            n_valid=int(raw["n_valid"]),
            n_total=int(raw["n_total"]),
            score=float(raw["score"]),
            per_element={k: dict(v) for k, v in raw["per_element"].items()},
            flags=tuple(raw.get("flags", [])),
        )


SUBJECTIVE_DIMENSIONS = ("text", "image", "layout", "color")


@dataclass(frozen=True)
class MetricReport:
    """All objective scores plus optional subjective scores, with provenance."""

    validity: ValidityResult
    alignment: Optional[float]
    readability: Optional[float]
    similarity: Optional[float]
    subjective: Optional[Mapping[str, float]]
    profile: str
    inputs_digest: str
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "validity": self.validity.to_dict(),
            "alignment": self.alignment,
            "readability": self.readability,
            "similarity": self.similarity,
            "subjective": dict(self.subjective) if self.subjective is not None else None,
            "profile": self.profile,
            "inputs_digest": self.inputs_digest,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "MetricReport":
        subjective = raw.get("subjective")
        return cls(
            validity=ValidityResult.from_dict(raw["validity"]),
            alignment=raw.get("alignment"),
            readability=raw.get("readability"),
            similarity=raw.get("similarity"),
            subjective=dict(subjective) if subjective is not None else None,
            profile=str(raw["profile"]),
            inputs_digest=str(raw["inputs_digest"]),
            flags=tuple(raw.get("flags", [])),
        )
