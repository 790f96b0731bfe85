"""MLLM judge harness: per-dimension scoring with strict reply parsing."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from ..errors import BackendError, ParseError
from ..model import SUBJECTIVE_DIMENSIONS
from .prompts import judge_criterion, judge_system_prompt
from ..providers import Backend, ImagePart, Message, ProviderRequest, TextPart

DEFAULT_SCALE_FACTOR = 20.0

_REPLY_RE = re.compile(r"^\s*(\d+)\.\s*(.*)$", re.DOTALL)


def parse_judge_reply(text: str) -> tuple[int, str]:
    """Leading integer in [0,5], a period, then the justification."""
    m = _REPLY_RE.match(text)
    if not m:
        raise ParseError(f"reply does not start with '<score>.': {text[:60]!r}")
    score = int(m.group(1))
    if not 0 <= score <= 5:
        raise ParseError(f"score {score} is outside 0-5")
    return score, m.group(2).strip()


@dataclass(frozen=True)
class DimensionScore:
    raw: Optional[int]
    justification: str
    scaled: Optional[float]
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "raw": self.raw,
            "justification": self.justification,
            "scaled": self.scaled,
            "error": self.error,
        }


@dataclass(frozen=True)
class SubjectiveScores:
    """Raw 0-5 integers and their 0-100 scaling, one per dimension."""

    dimensions: Mapping[str, DimensionScore]
    rubric: str
    scale_factor: float = DEFAULT_SCALE_FACTOR

    def scaled_map(self) -> dict[str, Optional[float]]:
        return {name: d.scaled for name, d in self.dimensions.items()}

    def to_dict(self) -> dict:
        return {
            "dimensions": {k: v.to_dict() for k, v in self.dimensions.items()},
            "rubric": self.rubric,
            "scale_factor": self.scale_factor,
        }


def judge(
    image_path: str | Path,
    rubric: str,
    judge_backend: Backend,
    scale_factor: float = DEFAULT_SCALE_FACTOR,
) -> SubjectiveScores:
    """Score one rendered design on text/image/layout/color.

    One backend call per dimension; a dimension whose reply cannot be
    parsed is left unscored while the others proceed.
    """
    system = judge_system_prompt()
    results: dict[str, DimensionScore] = {}
    for dimension in SUBJECTIVE_DIMENSIONS:
        criterion = judge_criterion(rubric, dimension)
        request = ProviderRequest(
            messages=(
                Message(role="system", parts=(TextPart(system),)),
                Message(
                    role="user",
                    parts=(TextPart(criterion), ImagePart(str(image_path))),
                ),
            )
        )
        try:
            reply = judge_backend.complete(request)
        except BackendError:
            raise
        try:
            raw, justification = parse_judge_reply(reply.text)
        except ParseError as exc:
            results[dimension] = DimensionScore(
                raw=None, justification="", scaled=None, error=str(exc)
            )
            continue
        results[dimension] = DimensionScore(
            raw=raw, justification=justification, scaled=raw * scale_factor
        )
    return SubjectiveScores(
        dimensions=results, rubric=rubric, scale_factor=scale_factor
    )
