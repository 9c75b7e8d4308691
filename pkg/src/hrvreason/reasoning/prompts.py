"""Step prompt assembly.

Prompts are deterministic template instantiations: the same step context
always renders byte-identical system and user strings. Every prompt carries
a machine-readable data block (the exact numbers the step may cite) and the
full attribution of every passage it was given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..config import SamplingParams
from ..errors import IncompleteContext
from ..knowledge.governance import ScoredPassage
from .client import CompletionRequest

STEP_NAMES = {
    1: "Signal Quality",
    2: "Time-Domain",
    3: "Frequency-Domain",
    4: "Nonlinear",
    5: "Baseline Delta",
    6: "Within-Subject Profile",
    7: "EEG Integration",
    8: "Integration",
}

_STEP_ROLES = {
    1: "Assess raw signal quality and state whether downstream analysis is trustworthy.",
    2: "Interpret the time-domain metrics as autonomic evidence (vagal tone, arousal).",
    3: "Interpret the frequency-domain metrics, following every respiratory-contamination directive.",
    4: "Interpret the nonlinear and geometric metrics within their reliability limits.",
    5: "Quantify this trial's changes from the subject's own baseline.",
    6: "Compare this trial against the subject's longitudinal profile.",
    7: "Integrate the supplied EEG band features with the cardiac evidence.",
    8: "Synthesize the prior step reports, retrieved evidence, and warnings into one final assessment.",
}

DECISION_HIERARCHY = (
    "Decision hierarchy: within-subject Z-scores take precedence over "
    "complexity metrics, complexity metrics take precedence over absolute "
    "values, and absolute values take precedence over literature norms."
)

OUTPUT_TEMPLATE = (
    "Respond using exactly this template:\n"
    "State: <HVHA|HVLA|LVHA|LVLA>\n"
    "Confidence: <High|Medium|Low>\n"
    "Rationale: <key findings with evidence citations and z-scores>\n"
    "Limitations: <explicit notes on input limitations>"
)

CITATION_INSTRUCTION = (
    "Cite retrieved evidence with its marker, e.g. [RAG: <file>, p.<page>]."
)


@dataclass
class StepContext:
    step_id: int
    subject_id: str
    trial_id: str
    data: dict = field(default_factory=dict)
    directives: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    passages: list = field(default_factory=list)
    conflicts: list = field(default_factory=list)
    prior_reports: dict = field(default_factory=dict)   # step -> text (step 8 only)
    extra_instructions: list = field(default_factory=list)
    citation_markers: bool = True
    sampling: SamplingParams = field(default_factory=SamplingParams)


def _check_complete(ctx: StepContext) -> None:
    if ctx.step_id not in STEP_NAMES:
        raise IncompleteContext(f"unknown step id {ctx.step_id}")
    if ctx.step_id == 3 and "rsa" not in ctx.data:
        raise IncompleteContext("step 3 context requires the RSA severity")
    if ctx.step_id == 4 and "nonlinear_prohibited" not in ctx.data:
        raise IncompleteContext("step 4 context requires the nonlinear reliability decision")
    if ctx.step_id == 8:
        missing = [k for k in range(1, 8) if k not in ctx.prior_reports]
        if missing:
            raise IncompleteContext(f"step 8 context missing prior reports: {missing}")


def _passage_lines(passages: Sequence[ScoredPassage], markers: bool) -> list[str]:
    lines = ["### Evidence passages"]
    for i, p in enumerate(passages, 1):
        page = p.chunk.page if p.chunk.page is not None else 1
        if markers:
            attribution = f"[RAG: {p.chunk.source_file}, p.{page}]"
        else:
            attribution = f"source: {p.chunk.source_file}, p.{page}"
        lines.append(
            f"[{i}] {attribution} (design={p.chunk.study_design}, "
            f"metric={p.chunk.primary_metric or 'none'}, "
            f"s_raw={p.s_raw:.4f}, s_adj={p.s_adj:.4f})"
        )
        lines.append(f"    {p.chunk.text}")
    return lines


def assemble_prompt(ctx: StepContext) -> CompletionRequest:
    _check_complete(ctx)
    name = STEP_NAMES[ctx.step_id]

    system_parts = [
        f"You are step {ctx.step_id} ({name}) of an eight-step heart rate "
        f"variability interpretation pipeline. {_STEP_ROLES[ctx.step_id]}"
    ]
    if ctx.directives:
        system_parts.append("Directives (mandatory):")
        system_parts.extend(f"- {d}" for d in ctx.directives)
    if ctx.step_id == 8:
        system_parts.append(DECISION_HIERARCHY)
    system = "\n".join(system_parts)

    data = dict(ctx.data)
    data["step"] = ctx.step_id
    data["subject_id"] = ctx.subject_id
    data["trial_id"] = ctx.trial_id
    if ctx.notes:
        data["notes"] = list(ctx.notes)

    user_parts = [
        f"## Step {ctx.step_id}: {name}",
        f"Subject: {ctx.subject_id}  Trial: {ctx.trial_id}",
        "",
        "### Data",
        "BEGIN_DATA",
        json.dumps(data, sort_keys=True, default=str),
        "END_DATA",
    ]
    if ctx.passages:
        user_parts.append("")
        user_parts.extend(_passage_lines(ctx.passages, ctx.citation_markers))
    if ctx.conflicts:
        user_parts.append("")
        user_parts.append("### Conflict flags")
        user_parts.extend(f"- {c}" for c in ctx.conflicts)
    if ctx.step_id == 8:
        user_parts.append("")
        user_parts.append("### Prior step reports")
        for k in range(1, 8):
            user_parts.append(f"--- Step {k} ({STEP_NAMES[k]}) ---")
            user_parts.append(ctx.prior_reports[k])
        user_parts.append("")
        user_parts.append("### Output requirements")
        user_parts.append(OUTPUT_TEMPLATE)
        if ctx.citation_markers and ctx.passages:
            user_parts.append(CITATION_INSTRUCTION)
    if ctx.extra_instructions:
        user_parts.append("")
        user_parts.extend(ctx.extra_instructions)
    user = "\n".join(user_parts)

    max_tokens = (
        ctx.sampling.max_tokens_final if ctx.step_id == 8 else ctx.sampling.max_tokens_step
    )
    return CompletionRequest(
        system=system,
        user=user,
        temperature=ctx.sampling.temperature,
        top_p=ctx.sampling.top_p,
        repetition_penalty=ctx.sampling.repetition_penalty,
        max_tokens=max_tokens,
    )
