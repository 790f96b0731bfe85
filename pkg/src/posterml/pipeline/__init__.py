"""Plan-implement-reflect orchestration, provider contract, judge harness."""
from .config import (
    AssetPolicyConfig,
    BackendSpec,
    PipelineConfig,
    RendererSpec,
    load_config,
)
from .judge import DimensionScore, SubjectiveScores, judge, parse_judge_reply
from .planfmt import parse_planner_output
from .prompts import (
    composer_prompt,
    judge_criterion,
    judge_system_prompt,
    planner_system_prompt,
    refiner_prompt,
)
from ..providers import (
    Backend,
    HttpBackend,
    IdentityBackend,
    ImagePart,
    Message,
    ProviderRequest,
    ProviderResponse,
    ReplayBackend,
    ScriptedBackend,
    StaticBackend,
    TextPart,
    text_message,
)
from .run import (
    ExchangeLog,
    IterationRecord,
    PipelineState,
    compose,
    derive_job_id,
    plan,
    reflect_once,
    resume_pipeline,
    run_pipeline,
    run_renderer,
)

__all__ = [
    "AssetPolicyConfig",
    "Backend",
    "BackendSpec",
    "DimensionScore",
    "ExchangeLog",
    "HttpBackend",
    "IdentityBackend",
    "ImagePart",
    "IterationRecord",
    "Message",
    "PipelineConfig",
    "PipelineState",
    "ProviderRequest",
    "ProviderResponse",
    "RendererSpec",
    "ReplayBackend",
    "ScriptedBackend",
    "StaticBackend",
    "SubjectiveScores",
    "TextPart",
    "compose",
    "composer_prompt",
    "derive_job_id",
    "judge",
    "judge_criterion",
    "judge_system_prompt",
    "load_config",
    "parse_judge_reply",
    "parse_planner_output",
    "plan",
    "planner_system_prompt",
    "refiner_prompt",
    "reflect_once",
    "resume_pipeline",
    "run_pipeline",
    "run_renderer",
    "text_message",
]
