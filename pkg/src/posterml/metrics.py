"""Objective design-quality metrics and report assembly.

Validity is the fraction of non-container elements whose box area exceeds
a canvas-relative threshold. Alignment is the mean minimum L1 distance
between element alignment coordinates, normalized by the canvas diagonal.
Readability is the mean normalized Sobel magnitude over text regions.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, ZeroVector
from .model import (
    ElementGeometry,
    ElementKind,
    GeometrySet,
    MetricReport,
    Rect,
    ValidityResult,
)
from .raster import (
    SOBEL_MAX_MAGNITUDE,
    GrayImage,
    interior_pixel_count,
    sobel_mean_magnitude,
)

STANDARD_AREA_RATIO = 0.001
BROAD_AREA_RATIO = 0.0001

ALIGNMENT_MODES = ("literal", "same_axis")


@dataclass(frozen=True)
class ThresholdProfile:
    """Validity thresholds and element-eligibility switches."""

    name: str = "standard"
    area_ratio_threshold: float = STANDARD_AREA_RATIO
    count_zero_opacity: bool = True
    require_canvas_intersection: bool = True

    def __post_init__(self):
        if not (0.0 < self.area_ratio_threshold < 1.0):
            raise ValueError("area_ratio_threshold must be in (0, 1)")

    @classmethod
    def standard(cls) -> "ThresholdProfile":
        return cls(name="standard", area_ratio_threshold=STANDARD_AREA_RATIO)

    @classmethod
    def broad(cls) -> "ThresholdProfile":
        return cls(name="broad", area_ratio_threshold=BROAD_AREA_RATIO)

    @classmethod
    def named(cls, name: str) -> "ThresholdProfile":
        if name == "standard":
            return cls.standard()
        if name == "broad":
            return cls.broad()
        raise ValueError(f"unknown profile {name!r} (use standard or broad)")


def _eligible(e: ElementGeometry, profile: ThresholdProfile) -> bool:
    if e.kind == ElementKind.CONTAINER:
        return False
    if not profile.count_zero_opacity and e.opacity == 0.0:
        return False
    return True


def _element_verdict(
    e: ElementGeometry, g: GeometrySet, profile: ThresholdProfile
) -> tuple[bool, str]:
    b = e.bbox
    if not b.is_finite() or b.w <= 0 or b.h <= 0:
        return False, "degenerate"
    canvas_rect = Rect(0.0, 0.0, g.canvas.width, g.canvas.height)
    if profile.require_canvas_intersection and b.intersection_area(canvas_rect) <= 0:
        return False, "off-canvas"
    canvas_area = g.canvas.width * g.canvas.height
    # "exceeds" the threshold, read strictly: boundary-equal is invalid
    if b.area / canvas_area <= profile.area_ratio_threshold:
        return False, "below-area-threshold"
    return True, "ok"


def validity(g: GeometrySet, profile: ThresholdProfile) -> ValidityResult:
    """Ratio of valid elements to all eligible (non-container) elements."""
    per_element: dict[str, dict] = {}
    n_valid = 0
    n_total = 0
    for e in g.elements:
        if not _eligible(e, profile):
            continue
        n_total += 1
        ok, reason = _element_verdict(e, g, profile)
        per_element[e.id] = {"valid": ok, "reason": reason}
        if ok:
            n_valid += 1
    if n_total == 0:
        return ValidityResult(
            n_valid=0, n_total=0, score=1.0, per_element={}, flags=("no-elements",)
        )
    return ValidityResult(
        n_valid=n_valid,
        n_total=n_total,
        score=n_valid / n_total,
        per_element=per_element,
    )


def alignment(
    g: GeometrySet, profile: ThresholdProfile, mode: str = "literal"
) -> float:
    """Mean minimum coordinate distance over valid elements, / diagonal.

    literal mode pairs all 6x6 coordinates per element pair, faithful to
    the unrestricted minimum; same_axis restricts pairs to x-with-x and
    y-with-y. A single valid element (or none) scores 0 by convention.
    """
    if mode not in ALIGNMENT_MODES:
        raise ValueError(f"mode must be one of {ALIGNMENT_MODES}")
    verdict = validity(g, profile)
    valid_ids = {eid for eid, v in verdict.per_element.items() if v["valid"]}
    members = [e for e in g.elements if e.id in valid_ids]
    if len(members) <= 1:
        return 0.0

    coords = np.array([e.alignment_coordinates() for e in members], dtype=np.float64)
    n = len(members)
    total = 0.0
    for i in range(n):
        best = math.inf
        for j in range(n):
            if j == i:
                continue
            if mode == "literal":
                d = float(np.abs(coords[i][:, None] - coords[j][None, :]).min())
            else:
                dx = float(np.abs(coords[i][:3, None] - coords[j][None, :3]).min())
                dy = float(np.abs(coords[i][3:, None] - coords[j][None, 3:]).min())
                d = min(dx, dy)
            best = min(best, d)
        total += best
    return total / (n * g.canvas.diagonal())


def readability(screenshot: GrayImage, g: GeometrySet) -> float:
    """Mean normalized Sobel magnitude over all text regions.

    Multi-rect regions average their rects weighted by interior pixel
    count, matching a per-pixel mean over the node's full rendering area.
    Regions left with no interior pixels contribute 0; no regions at all
    scores 0.
    """
    if (screenshot.width, screenshot.height) != (g.canvas.width, g.canvas.height):
        raise DimensionMismatch(
            f"screenshot {screenshot.width}x{screenshot.height} does not match "
            f"canvas {g.canvas.width}x{g.canvas.height}"
        )
    if not g.text_regions:
        return 0.0
    per_region: list[float] = []
    for region in g.text_regions:
        weighted = 0.0
        weight = 0
        for rect in region.rects:
            count = interior_pixel_count(screenshot, rect)
            if count <= 0:
                continue
            weighted += sobel_mean_magnitude(screenshot, rect) * count
            weight += count
        per_region.append(weighted / weight if weight > 0 else 0.0)
    return sum(v / SOBEL_MAX_MAGNITUDE for v in per_region) / len(per_region)


def embedding_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.ndim != 1 or vb.ndim != 1 or va.size == 0:
        raise DimensionMismatch("embeddings must be non-empty 1-d vectors")
    if va.size != vb.size:
        raise DimensionMismatch(f"embedding dims differ: {va.size} vs {vb.size}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero-norm vectors")
    return float(np.clip(float(va @ vb) / (na * nb), -1.0, 1.0))


def _digest(parts: Sequence[tuple[str, bytes]]) -> str:
    h = hashlib.sha256()
    for label, payload in parts:
        h.update(label.encode("utf-8"))
        h.update(len(payload).to_bytes(8, "big"))
        h.update(payload)
    return h.hexdigest()


def evaluate(
    html_path: str | Path,
    geometry_source: str | Path,
    screenshot_path: Optional[str | Path] = None,
    profile: Optional[ThresholdProfile] = None,
    embeddings: Optional[tuple[Sequence[float], Sequence[float]]] = None,
    alignment_mode: str = "literal",
    subjective: Optional[dict[str, float]] = None,
) -> MetricReport:
    """Compute every available objective metric for one design.

    geometry_source is a geometry dump path, or the string "resolve" to
    derive geometry from the HTML itself.
    """
    from .poster import load_geometry_dump, parse_design, resolve_geometry
    from .raster import load_raster, to_grayscale

    profile = profile or ThresholdProfile.standard()
    html_bytes = Path(html_path).read_bytes()
    digest_parts: list[tuple[str, bytes]] = [("html", html_bytes)]
    flags: list[str] = []

    if str(geometry_source) == "resolve":
        doc = parse_design(html_bytes.decode("utf-8"))
        g = resolve_geometry(doc)
        geometry_bytes = json.dumps(g.to_dict(), sort_keys=True).encode("utf-8")
        flags.append("geometry-resolved")
    else:
        geometry_bytes = Path(geometry_source).read_bytes()
        g = load_geometry_dump(geometry_bytes)
    digest_parts.append(("geometry", geometry_bytes))

    val = validity(g, profile)
    flags.extend(val.flags)

    ali = alignment(g, profile, mode=alignment_mode)
    if ali > 1.0:
        flags.append("alignment-clamped")
        ali = 1.0

    rea: Optional[float] = None
    if screenshot_path is not None:
        shot_bytes = Path(screenshot_path).read_bytes()
        digest_parts.append(("screenshot", shot_bytes))
        gray = to_grayscale(load_raster(screenshot_path))
        rea = readability(gray, g)
        if not g.text_regions:
            flags.append("no-text")
    else:
        flags.append("readability-skipped")

    sim: Optional[float] = None
    if embeddings is not None:
        sim = embedding_similarity(embeddings[0], embeddings[1])

    return MetricReport(
        validity=val,
        alignment=ali,
        readability=rea,
        similarity=sim,
        subjective=subjective,
        profile=profile.name,
        inputs_digest=_digest(digest_parts),
        flags=tuple(flags),
    )
