"""Plan-implement-reflect orchestration with full artifact persistence.

A job is strictly sequential: plan, bind assets, compose, then a fixed
number of reflection iterations (render, image-optimize, code-refine).
Every backend exchange is persisted verbatim; resuming a job replays the
persisted responses in order before falling back to live backends.
"""
from __future__ import annotations

import hashlib
import json
import shutil
import subprocess
from collections import defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from ..assets import AssetBinding, build_index, retrieve_or_generate
from ..errors import (
    BackendError,
    ComposeRejected,
    MalformedMarkup,
    MissingBinding,
    NoPosterContainer,
    PlanParseError,
    PosterError,
    RefinerRejected,
    RenderFailed,
)
from ..model import SemanticPlan
from ..poster import poster_container_report
from .config import PipelineConfig, RendererSpec
from .planfmt import parse_planner_output
from .prompts import composer_prompt, planner_system_prompt, refiner_prompt
from ..providers import (
    Backend,
    ImagePart,
    Message,
    ProviderRequest,
    ProviderResponse,
    TextPart,
    text_message,
)

EDITOR_INSTRUCTION = (
    "Enhance the visual quality of this poster rendering. Improve color "
    "harmony, contrast, and text legibility while keeping the composition."
)


class ExchangeLog:
    """Persists every backend exchange; replays persisted ones on resume."""

    def __init__(self, job_dir: str | Path, replay: bool = False):
        self.job_dir = Path(job_dir)
        self.stage_dir = self.job_dir
        self.seq = 0
        self.queues: dict[str, deque[ProviderResponse]] = defaultdict(deque)
        if replay:
            self._load_existing()

    def _load_existing(self) -> None:
        entries = []
        for path in self.job_dir.rglob("exchanges/*.json"):
            try:
                entries.append(json.loads(path.read_text(encoding="utf-8")))
            except (OSError, json.JSONDecodeError):
                continue
        entries.sort(key=lambda e: e.get("seq", 0))
        for entry in entries:
            resp = entry.get("response", {})
            self.queues[entry.get("role", "")].append(
                ProviderResponse(
                    text=resp.get("text", ""),
                    images=tuple(resp.get("images", [])),
                )
            )
        if entries:
            self.seq = max(e.get("seq", 0) for e in entries) + 1

    def set_stage_dir(self, path: str | Path) -> None:
        self.stage_dir = Path(path)

    def take_replay(self, role: str) -> Optional[ProviderResponse]:
        queue = self.queues.get(role)
        if queue:
            return queue.popleft()
        return None

    def record(self, role: str, request: ProviderRequest, response: ProviderResponse) -> None:
        ex_dir = self.stage_dir / "exchanges"
        ex_dir.mkdir(parents=True, exist_ok=True)
        payload = {
            "seq": self.seq,
            "role": role,
            "request": request.to_dict(),
            "response": response.to_dict(),
        }
        path = ex_dir / f"{self.seq:03d}-{role}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
        self.seq += 1

    def wrap(self, role: str, backend: Backend) -> "_Recorder":
        return _Recorder(role, backend, self)


class _Recorder:
    def __init__(self, role: str, inner: Backend, log: ExchangeLog):
        self.role = role
        self.inner = inner
        self.log = log
        self.count = 0  # includes replayed calls, so resume counts match

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.count += 1
        replayed = self.log.take_replay(self.role)
        if replayed is not None:
            return replayed
        response = self.inner.complete(request)
        self.log.record(self.role, request, response)
        return response


def _plan_attempts(
    instruction: str,
    planner_backend: Backend,
    retries: int = 2,
    system_prompt: Optional[str] = None,
) -> tuple[SemanticPlan, str]:
    if not instruction or not instruction.strip():
        raise ValueError("instruction must be non-empty")
    system = system_prompt or planner_system_prompt()
    base = (
        text_message("system", system),
        text_message("user", instruction),
    )
    messages = base
    last_error: Optional[PlanParseError] = None
    for _ in range(retries + 1):
        response = planner_backend.complete(ProviderRequest(messages=messages))
        try:
            return parse_planner_output(response.text), response.text
        except PlanParseError as exc:
            last_error = exc
            messages = base + (
                text_message("assistant", response.text),
                text_message(
                    "user",
                    f"Your previous reply could not be parsed: {exc} "
                    "Reply again with all four mandatory sections, each "
                    "appearing exactly once.",
                ),
            )
    assert last_error is not None
    raise last_error


def plan(
    instruction: str,
    planner_backend: Backend,
    retries: int = 2,
    system_prompt: Optional[str] = None,
) -> SemanticPlan:
    """Ask the planner for a SemanticPlan, retrying on parse failures."""
    parsed, _ = _plan_attempts(instruction, planner_backend, retries, system_prompt)
    return parsed


def _gate_poster_html(html: str, reject_cls, what: str) -> None:
    try:
        report = poster_container_report(html)
    except (NoPosterContainer, MalformedMarkup) as exc:
        raise reject_cls(f"{what} output rejected: {exc}") from exc
    bad = [f for f in report.findings if f.code == "content-outside-poster"]
    if bad:
        raise reject_cls(
            f"{what} output renders content outside .poster", findings=report.findings
        )


def compose(
    plan: SemanticPlan,
    bindings: Sequence[AssetBinding],
    composer_backend: Backend,
    instruction: Optional[str] = None,
    system_prompt: Optional[str] = None,
) -> str:
    """Turn the plan plus asset bindings into a poster HTML document."""
    by_layer = {b.layer_id: b for b in bindings}
    for p in plan.image_prompts:
        if p.layer_id not in by_layer:
            raise MissingBinding(p.layer_id)

    lines = []
    if instruction:
        lines.append(f"User input: {instruction}")
    lines.append("Layout thought:")
    lines.append(plan.layout_thought)
    lines.append("")
    lines.append("Groups:")
    lines.append(json.dumps([g.to_dict() for g in plan.groups]))
    lines.append("")
    lines.append("Image layers (URL + description):")
    for p in plan.image_prompts:
        binding = by_layer[p.layer_id]
        lines.append(f"- layer {p.layer_id}: {binding.uri}")
        lines.append(f"  description: {p.layer_prompt}")
    lines.append("")
    lines.append("Text elements:")
    lines.append(json.dumps([t.to_dict() for t in plan.text_specs]))

    request = ProviderRequest(
        messages=(
            text_message("system", system_prompt or composer_prompt()),
            text_message("user", "\n".join(lines)),
        )
    )
    html = composer_backend.complete(request).text
    _gate_poster_html(html, ComposeRejected, "composer")
    return html


def run_renderer(
    renderer: RendererSpec, html_path: Path, png_out: Path, geometry_out: Path
) -> None:
    argv = renderer.argv(str(html_path), str(png_out), str(geometry_out))
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=300)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise RenderFailed(f"renderer failed to run: {exc}") from exc
    if proc.returncode != 0:
        raise RenderFailed(
            f"renderer exited {proc.returncode}", stderr=proc.stderr
        )
    if not png_out.exists() or not geometry_out.exists():
        raise RenderFailed(
            f"renderer produced no outputs at {png_out} / {geometry_out}",
            stderr=proc.stderr,
        )


def reflect_once(
    html: str,
    renderer: RendererSpec,
    editor_backend: Backend,
    refiner_backend: Backend,
    job_dir: str | Path,
    iteration: int = 0,
    exchange_log: Optional[ExchangeLog] = None,
    refiner_system_prompt: Optional[str] = None,
) -> str:
    """One reflection step: render, optimize the image, refine the code."""
    iter_dir = Path(job_dir) / f"iter-{iteration}"
    iter_dir.mkdir(parents=True, exist_ok=True)
    log = exchange_log or ExchangeLog(job_dir)
    log.set_stage_dir(iter_dir)
    editor = log.wrap("image_editor", editor_backend)
    refiner = log.wrap("refiner", refiner_backend)

    before = iter_dir / "before.html"
    before.write_text(html, encoding="utf-8")
    render_png = iter_dir / "render.png"
    render_geometry = iter_dir / "render.geometry.json"
    run_renderer(renderer, before, render_png, render_geometry)

    edit_request = ProviderRequest(
        messages=(
            Message(
                role="user",
                parts=(TextPart(EDITOR_INSTRUCTION), ImagePart(str(render_png))),
            ),
        )
    )
    edit_response = editor.complete(edit_request)
    if not edit_response.images:
        raise BackendError("image editor returned no image")
    optimized = iter_dir / "optimized.png"
    source = Path(edit_response.images[0])
    if source.resolve() != optimized.resolve():
        shutil.copyfile(source, optimized)

    refine_request = ProviderRequest(
        messages=(
            text_message("system", refiner_system_prompt or refiner_prompt()),
            Message(
                role="user",
                parts=(
                    TextPart(html),
                    ImagePart(str(render_png)),
                    ImagePart(str(optimized)),
                ),
            ),
        )
    )
    new_html = refiner.complete(refine_request).text
    _gate_poster_html(new_html, RefinerRejected, "refiner")
    (iter_dir / "after.html").write_text(new_html, encoding="utf-8")
    return new_html


@dataclass(frozen=True)
class IterationRecord:
    index: int
    html_before: str
    render_path: str
    optimized_path: str
    html_after: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "html_before": self.html_before,
            "render_path": self.render_path,
            "optimized_path": self.optimized_path,
            "html_after": self.html_after,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "IterationRecord":
        return cls(
            index=int(raw["index"]),
            html_before=raw["html_before"],
            render_path=raw["render_path"],
            optimized_path=raw["optimized_path"],
            html_after=raw["html_after"],
        )


@dataclass
class PipelineState:
    job_id: str
    instruction: str
    profile: str = "standard"
    plan_retries: int = 0
    records: list[IterationRecord] = field(default_factory=list)
    final_html: str = ""
    error: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "instruction": self.instruction,
            "profile": self.profile,
            "plan_retries": self.plan_retries,
            "records": [r.to_dict() for r in self.records],
            "final_html": self.final_html,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineState":
        return cls(
            job_id=raw["job_id"],
            instruction=raw["instruction"],
            profile=raw.get("profile", "standard"),
            plan_retries=int(raw.get("plan_retries", 0)),
            records=[IterationRecord.from_dict(r) for r in raw.get("records", [])],
            final_html=raw.get("final_html", ""),
            error=raw.get("error"),
        )

    def save(self, job_dir: Path) -> None:
        path = job_dir / "state.json"
        path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, job_dir: str | Path) -> "PipelineState":
        raw = json.loads((Path(job_dir) / "state.json").read_text(encoding="utf-8"))
        return cls.from_dict(raw)


def derive_job_id(instruction: str, config: PipelineConfig) -> str:
    digest = hashlib.sha256(
        f"{instruction}|{config.iterations}|{config.profile}|{config.assets.policy}".encode()
    ).hexdigest()
    return digest[:12]


def _embed_via(backend: Backend):
    def embed(prompt: str):
        request = ProviderRequest(messages=(text_message("user", prompt),))
        reply = backend.complete(request).text
        try:
            vector = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise BackendError(f"embedder reply is not a JSON vector: {exc}") from exc
        return [float(x) for x in vector]

    return embed


def run_pipeline(
    instruction: str,
    config: PipelineConfig,
    job_dir: str | Path = "jobs",
    job_id: Optional[str] = None,
    resume: bool = False,
) -> PipelineState:
    """Run plan, asset binding, compose, then T reflection iterations.

    Any stage error is recorded in the persisted state under the failing
    stage's name before the error propagates.
    """
    job_id = job_id or derive_job_id(instruction, config)
    root = Path(job_dir)
    job_path = root / job_id if root.name != job_id else root
    job_path.mkdir(parents=True, exist_ok=True)

    state = PipelineState(job_id=job_id, instruction=instruction, profile=config.profile)
    state.save(job_path)

    log = ExchangeLog(job_path, replay=resume)
    raw_backends = config.build_backends()
    planner = log.wrap("planner", raw_backends["planner"])
    composer = log.wrap("composer", raw_backends["composer"])

    stage = "plan"
    try:
        log.set_stage_dir(job_path)
        sem_plan, raw_plan = _plan_attempts(
            instruction,
            planner,
            retries=config.retries,
            system_prompt=_prompt_override(config, "planner"),
        )
        state.plan_retries = max(0, planner.count - 1)
        (job_path / "plan.txt").write_text(raw_plan, encoding="utf-8")
        (job_path / "plan.parsed.json").write_text(
            json.dumps(sem_plan.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )

        stage = "assets"
        bindings = _bind_assets(sem_plan, config, raw_backends, log, job_path)
        (job_path / "bindings.json").write_text(
            json.dumps(
                [_relativize(b, job_path) for b in bindings], indent=2, sort_keys=True
            ),
            encoding="utf-8",
        )

        stage = "compose"
        log.set_stage_dir(job_path)
        html = compose(
            sem_plan,
            bindings,
            composer,
            instruction=instruction,
            system_prompt=_prompt_override(config, "composer"),
        )
        (job_path / "compose.html").write_text(html, encoding="utf-8")

        stage = "reflect"
        if config.iterations > 0 and config.renderer is None:
            raise PosterError("reflection iterations need a renderer command")
        current = html
        for t in range(config.iterations):
            new_html = reflect_once(
                current,
                config.renderer,
                raw_backends["image_editor"],
                raw_backends["refiner"],
                job_path,
                iteration=t,
                exchange_log=log,
                refiner_system_prompt=_prompt_override(config, "refiner"),
            )
            state.records.append(
                IterationRecord(
                    index=t,
                    html_before=current,
                    render_path=f"iter-{t}/render.png",
                    optimized_path=f"iter-{t}/optimized.png",
                    html_after=new_html,
                )
            )
            fixed_point = new_html == current
            current = new_html
            if config.early_stop_fixed_point and fixed_point:
                break

        state.final_html = current
        (job_path / "final.html").write_text(current, encoding="utf-8")
        state.save(job_path)
        return state
    except Exception as exc:
        state.error = {"stage": stage, "message": str(exc)}
        state.save(job_path)
        raise


def _prompt_override(config: PipelineConfig, role: str) -> Optional[str]:
    path = config.prompt_overrides.get(role)
    if path:
        return Path(path).read_text(encoding="utf-8")
    return None


def _relativize(binding: AssetBinding, job_path: Path) -> dict:
    data = binding.to_dict()
    try:
        data["uri"] = str(Path(binding.uri).resolve().relative_to(job_path.resolve()))
    except ValueError:
        pass
    return data


def _bind_assets(
    sem_plan: SemanticPlan,
    config: PipelineConfig,
    raw_backends: dict[str, Backend],
    log: ExchangeLog,
    job_path: Path,
) -> list[AssetBinding]:
    log.set_stage_dir(job_path)
    policy = config.assets.policy
    index = None
    embed = None
    if policy in ("retrieval_only", "hybrid"):
        if not config.assets.manifest:
            raise PosterError(f"{policy} asset policy needs a manifest")
        index = build_index(config.assets.manifest)
        if "embedder" not in raw_backends:
            raise PosterError(f"{policy} asset policy needs an embedder backend")
        embed = _embed_via(log.wrap("embedder", raw_backends["embedder"]))
    generator = None
    if policy in ("generation_only", "hybrid"):
        if "generator" not in raw_backends:
            raise PosterError(f"{policy} asset policy needs a generator backend")
        generator = log.wrap("generator", raw_backends["generator"])
    judge_backend = None
    if policy == "hybrid":
        judge_backend = log.wrap("judge", raw_backends["judge"])
    return retrieve_or_generate(
        sem_plan.image_prompts,
        index,
        policy,
        generator,
        judge_backend,
        embed=embed,
        out_dir=job_path / "assets",
    )


def resume_pipeline(job_path: str | Path, config: PipelineConfig) -> PipelineState:
    """Re-run a persisted job, replaying its recorded backend exchanges."""
    job_path = Path(job_path)
    prior = PipelineState.load(job_path)
    return run_pipeline(
        prior.instruction,
        config,
        job_dir=job_path.parent,
        job_id=prior.job_id,
        resume=True,
    )
