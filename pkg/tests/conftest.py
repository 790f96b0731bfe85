"""Shared fixtures: geometry builders, mock renderer, pipeline configs."""
from __future__ import annotations

import json
from contextlib import contextmanager
from pathlib import Path

import pytest

from posterml.model import (
    CanvasSpec,
    ElementGeometry,
    ElementKind,
    GeometrySet,
    Rect,
    TextRegion,
)
from posterml.pipeline.config import (
    AssetPolicyConfig,
    BackendSpec,
    PipelineConfig,
    RendererSpec,
)

DATA_DIR = Path(__file__).parent / "data"

# 4x4 flat-gray PNG, byte-stable so mock renders are deterministic
TINY_PNG_B64 = (
    "iVBORw0KGgoAAAANSUhEUgAAAAQAAAAECAIAAAAmkwkpAAAAFElEQVR4nGM8ceIEAwwwMSAB"
    "3BwAdjQCYKaF12gAAAAASUVORK5CYII="
)

POSTER_HTML = """<html><head><style>
.poster { position: relative; width: 400px; height: 400px; background: #101820; }
.headline { position: absolute; left: 40px; top: 60px; width: 320px; height: 60px; font-size: 48px; color: #ffffff; }
.badge { position: absolute; left: 40px; top: 200px; width: 120px; height: 120px; background: #f48729; }
</style></head>
<body><div class="poster"><div class="headline">FREERIDE</div><div class="badge"></div></div></body></html>
"""

PLAN_SMALL = """
<layout_thought>
Background first, then one headline.
</layout_thought>
<grouping>
[{"group_id": "G1", "children": [0], "theme": "background"},
 {"group_id": "G2", "children": [1], "theme": "headline"}]
</grouping>
<image_generator>
[{"layer_id": 0, "layer_prompt": "solid navy background"}]
</image_generator>
<generate_text>
[{"layer_id": 1, "type": "TextElement", "width": 300.0, "height": 50.0,
  "opacity": 1.0, "text": "HELLO", "font": "Montserrat", "font_size": 50.0,
  "text_align": "center", "angle": 0.0, "capitalize": false,
  "line_height": 1.0, "letter_spacing": 0.0}]
</generate_text>
"""


class InstanceSpec:
    """BackendSpec stand-in that hands back a pre-built backend instance."""

    def __init__(self, backend):
        self.backend = backend

    def build(self):
        return self.backend


class EventBackend:
    """Appends its name to a shared event file, then delegates."""

    def __init__(self, name, inner, events_file):
        self.name = name
        self.inner = inner
        self.events_file = Path(events_file)

    def complete(self, request):
        with self.events_file.open("a", encoding="utf-8") as fh:
            fh.write(self.name + "\n")
        return self.inner.complete(request)

MOCK_RENDERER_SCRIPT = f"""#!/usr/bin/env python3
import base64, json, os, sys
html, png_out, geometry_out = sys.argv[1], sys.argv[2], sys.argv[3]
with open(png_out, "wb") as fh:
    fh.write(base64.b64decode("{TINY_PNG_B64}"))
dump = {{
    "canvas": {{"width": 4, "height": 4}},
    "elements": [
        {{"id": "e0", "kind": "shape",
          "bbox": {{"x": 0, "y": 0, "w": 4, "h": 4}},
          "z": 0, "opacity": 1.0, "angle": 0.0, "text": None}}
    ],
    "text_nodes": [],
}}
with open(geometry_out, "w") as fh:
    json.dump(dump, fh)
events = os.environ.get("RENDER_EVENTS_FILE")
if events:
    with open(events, "a") as fh:
        fh.write("render\\n")
"""


def element(eid, x, y, w, h, kind=ElementKind.SHAPE, z=0, opacity=1.0, angle=0.0, text=None):
    return ElementGeometry(
        id=eid, kind=kind, bbox=Rect(x, y, w, h), z=z, opacity=opacity,
        angle=angle, text=text,
    )


def geometry_set(boxes, canvas=(1000.0, 1000.0), text_regions=()):
    """Quickly build a GeometrySet of shape elements from (x, y, w, h) tuples."""
    return GeometrySet(
        canvas=CanvasSpec(*canvas),
        elements=tuple(
            element(f"e{i}", *box) for i, box in enumerate(boxes)
        ),
        text_regions=tuple(text_regions),
    )


def text_region(text, *rects):
    return TextRegion(text=text, rects=tuple(Rect(*r) for r in rects))


@pytest.fixture
def mock_renderer(tmp_path) -> RendererSpec:
    script = tmp_path / "render_mock.py"
    script.write_text(MOCK_RENDERER_SCRIPT, encoding="utf-8")
    return RendererSpec(command=("python3", str(script), "{html}", "{png_out}", "{geometry_out}"))


@pytest.fixture
def planner_example_text() -> str:
    return (DATA_DIR / "planner_example.txt").read_text(encoding="utf-8")


def make_mock_config(
    tmp_path,
    iterations: int = 1,
    planner_text: str | None = None,
    composer_text: str = POSTER_HTML,
    renderer: RendererSpec | None = None,
) -> PipelineConfig:
    if planner_text is None:
        planner_text = (DATA_DIR / "planner_example.txt").read_text(encoding="utf-8")
    backends = {
        "planner": BackendSpec("static", {"text": planner_text}),
        "composer": BackendSpec("static", {"text": composer_text}),
        "refiner": BackendSpec("identity", {}),
        "image_editor": BackendSpec("identity", {}),
        "judge": BackendSpec("static", {"text": "4. Looks fine."}),
        "generator": BackendSpec("static", {"text": "generated-image-bytes"}),
    }
    return PipelineConfig(
        backends=backends,
        renderer=renderer,
        iterations=iterations,
        assets=AssetPolicyConfig(policy="generation_only"),
    )


@contextmanager
def criterion(name: str):
    """Print one pass/fail line per acceptance criterion."""
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    else:
        print(f"[acceptance] {name}: PASS")


def write_manifest(path: Path, records) -> Path:
    lines = [json.dumps(r) for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
