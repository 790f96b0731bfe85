"""Role-keyed prompt templates, shipped as package text assets."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

RUBRICS = ("standard", "broad")


def _read_asset(relative: str) -> str:
    root = resources.files("posterml") / "prompts"
    return (root / relative).read_text(encoding="utf-8")


def planner_system_prompt(override: Optional[str | Path] = None) -> str:
    if override:
        return Path(override).read_text(encoding="utf-8")
    return _read_asset("planner_system.txt")


def composer_prompt(override: Optional[str | Path] = None) -> str:
    if override:
        return Path(override).read_text(encoding="utf-8")
    return _read_asset("composer.txt")


def refiner_prompt(override: Optional[str | Path] = None) -> str:
    if override:
        return Path(override).read_text(encoding="utf-8")
    return _read_asset("refiner.txt")


def judge_system_prompt(override: Optional[str | Path] = None) -> str:
    if override:
        return Path(override).read_text(encoding="utf-8")
    return _read_asset("judge_system.txt")


def judge_criterion(rubric: str, dimension: str) -> str:
    if rubric not in RUBRICS:
        raise ValueError(f"rubric must be one of {RUBRICS}, got {rubric!r}")
    return _read_asset(f"{rubric}/{dimension}.txt")
