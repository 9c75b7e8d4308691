from .client import (
    CompletionRequest,
    CompletionResponse,
    FixtureClient,
    HttpCompletionClient,
    TemplateMockClient,
    make_client,
)
from .textproc import truncate_repetition, find_unicode_substitutions
from .report import StructuredReport, parse_report
from .validate import ValidationResult, detect_mapping_paradox, validate
from .prompts import StepContext, assemble_prompt
from .pipeline import PipelineEnv, run_pipeline, run_trial

__all__ = [
    "CompletionRequest",
    "CompletionResponse",
    "FixtureClient",
    "HttpCompletionClient",
    "TemplateMockClient",
    "make_client",
    "truncate_repetition",
    "find_unicode_substitutions",
    "StructuredReport",
    "parse_report",
    "ValidationResult",
    "detect_mapping_paradox",
    "validate",
    "StepContext",
    "assemble_prompt",
    "PipelineEnv",
    "run_pipeline",
    "run_trial",
]
