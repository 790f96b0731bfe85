"""Pipeline configuration: role bindings, renderer command, asset policy.

Config files are TOML or JSON. Relative paths resolve against the config
file's directory so job bundles stay relocatable.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import PosterError
from ..providers import Backend, HttpBackend, IdentityBackend, ReplayBackend, StaticBackend

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ROLES = ("planner", "composer", "refiner", "image_editor", "judge")
OPTIONAL_ROLES = ("generator", "embedder")


@dataclass(frozen=True)
class BackendSpec:
    type: str  # http | replay | static | identity
    options: dict = field(default_factory=dict)

    def build(self) -> Backend:
        if self.type == "http":
            return HttpBackend(
                base_url=self.options["base_url"],
                model=self.options.get("model", ""),
                auth_env=self.options.get("auth_env"),
                timeout=float(self.options.get("timeout", 120.0)),
                image_dir=self.options.get("image_dir"),
            )
        if self.type == "replay":
            return ReplayBackend(self.options["dir"])
        if self.type == "static":
            text = self.options.get("text", "")
            if "file" in self.options:
                text = Path(self.options["file"]).read_text(encoding="utf-8")
            return StaticBackend(text=text, images=self.options.get("images", ()))
        if self.type == "identity":
            return IdentityBackend()
        raise PosterError(f"unknown backend type {self.type!r}")


@dataclass(frozen=True)
class RendererSpec:
    """External renderer: argv template with {html}/{png_out}/{geometry_out}."""

    command: tuple[str, ...]

    def argv(self, html: str, png_out: str, geometry_out: str) -> list[str]:
        out = []
        for arg in self.command:
            arg = arg.replace("{html}", html)
            arg = arg.replace("{png_out}", png_out)
            arg = arg.replace("{geometry_out}", geometry_out)
            out.append(arg)
        return out


@dataclass(frozen=True)
class AssetPolicyConfig:
    policy: str = "generation_only"
    manifest: Optional[str] = None
    k: int = 1


@dataclass(frozen=True)
class PipelineConfig:
    backends: dict[str, BackendSpec]
    renderer: Optional[RendererSpec] = None
    iterations: int = 1
    profile: str = "standard"
    retries: int = 2
    scale_factor: float = 20.0
    early_stop_fixed_point: bool = False
    assets: AssetPolicyConfig = field(default_factory=AssetPolicyConfig)
    prompt_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.iterations < 0:
            raise PosterError("iterations must be >= 0")
        missing = [r for r in ROLES if r not in self.backends]
        if missing:
            raise PosterError(f"config must bind all roles; missing: {missing}")

    def build_backends(self) -> dict[str, Backend]:
        return {role: spec.build() for role, spec in self.backends.items()}


def _resolve_paths(spec_options: dict, base: Path) -> dict:
    out = dict(spec_options)
    for key in ("file", "dir", "image_dir"):
        if key in out and out[key] is not None:
            out[key] = str((base / out[key]).resolve()) if not Path(out[key]).is_absolute() else out[key]
    if "images" in out:
        out["images"] = [
            str((base / img).resolve()) if not Path(img).is_absolute() else img
            for img in out["images"]
        ]
    return out


def load_config(path: str | Path) -> PipelineConfig:
    p = Path(path)
    try:
        raw_bytes = p.read_bytes()
    except OSError as exc:
        raise PosterError(f"cannot read config {p}: {exc}") from exc
    if p.suffix == ".json":
        raw = json.loads(raw_bytes.decode("utf-8"))
    else:
        raw = tomllib.loads(raw_bytes.decode("utf-8"))

    base = p.parent
    pipeline = raw.get("pipeline", {})
    backends_raw = raw.get("backends", {})
    backends = {
        role: BackendSpec(
            type=spec.get("type", "static"),
            options=_resolve_paths(
                {k: v for k, v in spec.items() if k != "type"}, base
            ),
        )
        for role, spec in backends_raw.items()
    }

    renderer = None
    if "renderer" in raw and raw["renderer"].get("command"):
        renderer = RendererSpec(command=tuple(raw["renderer"]["command"]))

    assets_raw = raw.get("assets", {})
    manifest = assets_raw.get("manifest")
    if manifest and not Path(manifest).is_absolute():
        manifest = str((base / manifest).resolve())
    assets = AssetPolicyConfig(
        policy=assets_raw.get("policy", "generation_only"),
        manifest=manifest,
        k=int(assets_raw.get("k", 1)),
    )

    overrides = {}
    for key, value in raw.get("prompts", {}).items():
        overrides[key] = str((base / value).resolve()) if not Path(value).is_absolute() else value

    return PipelineConfig(
        backends=backends,
        renderer=renderer,
        iterations=int(pipeline.get("iterations", 1)),
        profile=pipeline.get("profile", "standard"),
        retries=int(pipeline.get("retries", 2)),
        scale_factor=float(pipeline.get("scale_factor", 20.0)),
        early_stop_fixed_point=bool(pipeline.get("early_stop_fixed_point", False)),
        assets=assets,
        prompt_overrides=overrides,
    )
