"""Parsing of the planner's four-section tagged output into a SemanticPlan."""
from __future__ import annotations

import json
import re

from ..errors import DanglingLayerRef, DuplicateSection, MalformedJson, MissingSection
from ..model import Group, ImagePrompt, SemanticPlan, TextAlign, TextSpec

SECTIONS = ("layout_thought", "grouping", "image_generator", "generate_text")

_TEXT_SPEC_REQUIRED = (
    "layer_id", "width", "height", "opacity", "text", "font",
    "font_size", "text_align", "angle", "capitalize", "line_height",
    "letter_spacing",
)


def _extract_section(text: str, name: str) -> str:
    pattern = re.compile(rf"<{name}>(.*?)</{name}>", re.DOTALL)
    matches = pattern.findall(text)
    if not matches:
        raise MissingSection(name)
    if len(matches) > 1:
        raise DuplicateSection(name)
    return matches[0].strip()


def _load_json_array(blob: str, section: str) -> list:
    try:
        # strict=False: planner replies may carry raw newlines inside strings
        value = json.loads(blob, strict=False)
    except json.JSONDecodeError as exc:
        raise MalformedJson(section, str(exc)) from exc
    if not isinstance(value, list):
        raise MalformedJson(section, "expected a JSON array")
    return value


def _parse_groups(blob: str) -> tuple[Group, ...]:
    groups: list[Group] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(_load_json_array(blob, "grouping")):
        if not isinstance(raw, dict):
            raise MalformedJson("grouping", f"entry {i} is not an object")
        missing = {"group_id", "children", "theme"} - raw.keys()
        if missing:
            raise MalformedJson("grouping", f"entry {i} missing {sorted(missing)}")
        group_id = str(raw["group_id"])
        if group_id in seen_ids:
            raise MalformedJson("grouping", f"duplicate group_id {group_id!r}")
        seen_ids.add(group_id)
        children = raw["children"]
        if not isinstance(children, list) or not children:
            raise MalformedJson("grouping", f"group {group_id!r} children must be a non-empty list")
        theme = str(raw["theme"]).strip()
        if not theme:
            raise MalformedJson("grouping", f"group {group_id!r} theme must be non-empty")
        try:
            child_ids = tuple(int(c) for c in children)
        except (TypeError, ValueError) as exc:
            raise MalformedJson("grouping", f"group {group_id!r} children must be layer ids") from exc
        groups.append(Group(group_id=group_id, children=child_ids, theme=theme))
    return tuple(groups)


def _parse_image_prompts(blob: str) -> tuple[ImagePrompt, ...]:
    prompts: list[ImagePrompt] = []
    for i, raw in enumerate(_load_json_array(blob, "image_generator")):
        if not isinstance(raw, dict):
            raise MalformedJson("image_generator", f"entry {i} is not an object")
        missing = {"layer_id", "layer_prompt"} - raw.keys()
        if missing:
            raise MalformedJson("image_generator", f"entry {i} missing {sorted(missing)}")
        try:
            layer_id = int(raw["layer_id"])
        except (TypeError, ValueError) as exc:
            raise MalformedJson("image_generator", f"entry {i} layer_id is not an integer") from exc
        prompts.append(ImagePrompt(layer_id=layer_id, layer_prompt=str(raw["layer_prompt"])))
    return tuple(prompts)


def _parse_text_specs(blob: str) -> tuple[TextSpec, ...]:
    specs: list[TextSpec] = []
    for i, raw in enumerate(_load_json_array(blob, "generate_text")):
        if not isinstance(raw, dict):
            raise MalformedJson("generate_text", f"entry {i} is not an object")
        missing = set(_TEXT_SPEC_REQUIRED) - raw.keys()
        if missing:
            raise MalformedJson("generate_text", f"entry {i} missing {sorted(missing)}")
        try:
            spec = TextSpec(
                layer_id=int(raw["layer_id"]),
                width=float(raw["width"]),
                height=float(raw["height"]),
                opacity=float(raw["opacity"]),
                text=str(raw["text"]),
                font=str(raw["font"]),
                font_size=float(raw["font_size"]),
                text_align=TextAlign(str(raw["text_align"])),
                angle=float(raw["angle"]),
                capitalize=bool(raw["capitalize"]),
                line_height=float(raw["line_height"]),
                letter_spacing=float(raw["letter_spacing"]),
            )
        except (TypeError, ValueError) as exc:
            raise MalformedJson("generate_text", f"entry {i}: {exc}") from exc
        if spec.width <= 0 or spec.height <= 0 or spec.font_size <= 0:
            raise MalformedJson(
                "generate_text", f"entry {i}: width, height, font_size must be > 0"
            )
        if not (0.0 <= spec.opacity <= 1.0):
            raise MalformedJson("generate_text", f"entry {i}: opacity must be in [0,1]")
        if spec.line_height <= 0:
            raise MalformedJson("generate_text", f"entry {i}: line_height must be > 0")
        specs.append(spec)
    return tuple(specs)


def parse_planner_output(text: str) -> SemanticPlan:
    """Extract and validate the four mandatory tagged sections.

    Content outside the tags (a user echo, reasoning noise) is ignored;
    each tag must appear exactly once.
    """
    layout_thought = _extract_section(text, "layout_thought")
    groups = _parse_groups(_extract_section(text, "grouping"))
    image_prompts = _parse_image_prompts(_extract_section(text, "image_generator"))
    text_specs = _parse_text_specs(_extract_section(text, "generate_text"))

    declared: set[int] = set()
    for p in image_prompts:
        if p.layer_id in declared:
            raise MalformedJson("image_generator", f"duplicate layer_id {p.layer_id}")
        declared.add(p.layer_id)
    for t in text_specs:
        if t.layer_id in declared:
            raise MalformedJson("generate_text", f"duplicate layer_id {t.layer_id}")
        declared.add(t.layer_id)

    for group in groups:
        for child in group.children:
            if child not in declared:
                raise DanglingLayerRef(group.group_id, child)

    return SemanticPlan(
        layout_thought=layout_thought,
        groups=groups,
        image_prompts=image_prompts,
        text_specs=text_specs,
    )
