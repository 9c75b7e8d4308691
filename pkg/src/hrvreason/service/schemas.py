"""Request/response models for the HTTP service.

Paths in requests refer to the service host's filesystem; the bundled CLI
runs the app in-process by default, so paths resolve locally.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from ..config import FeatureConfig, ModelProfile, RunConfig, SamplingParams


class RespChannel(BaseModel):
    signal: list[float]
    rate_hz: float = 4.0


class TrialPayload(BaseModel):
    subject_id: str
    trial_id: str
    rr_ms: list[float]
    resp: Optional[RespChannel] = None
    valence: Optional[int] = Field(default=None, ge=1, le=5)
    arousal: Optional[int] = Field(default=None, ge=1, le=5)
    eeg: Optional[dict] = None

    def to_record_dict(self) -> dict:
        d = {"subject_id": self.subject_id, "trial_id": self.trial_id, "rr_ms": self.rr_ms}
        if self.resp is not None:
            d["resp"] = {"signal": self.resp.signal, "rate_hz": self.resp.rate_hz}
        for k in ("valence", "arousal", "eeg"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d


class FeaturesRequest(BaseModel):
    trial: TrialPayload


class FeaturesResponse(BaseModel):
    panel: dict


class FeatureBatchRequest(BaseModel):
    trials_path: str
    out_path: str
    pop_stats_out: str = ""


class FeatureBatchResponse(BaseModel):
    n_trials: int
    n_ok: int
    n_failed: int
    failures: dict
    out: str
    pop_stats_out: Optional[str] = None


class IngestRequest(BaseModel):
    manifest_path: str
    out_dir: str
    embedder: str = "hash"
    embedder_url: str = ""
    dimension: int = 64
    seed: int = 0


class IngestResponse(BaseModel):
    out_dir: str
    documents: int
    chunks: int


class RunConfigPayload(BaseModel):
    rag: bool = True
    guardrails: bool = True
    delta_z: bool = True
    baseline_mode: str = "retrospective"
    seed: int = 0
    workers: int = 2
    store_dir: str = ""
    population_stats: str = ""
    lexicon_path: str = ""
    backend: str = "mock"
    backend_url: str = ""
    fixture_path: str = ""
    citation_markers: bool = True
    t3_dimension: str = "valence"
    temperature: float = 0.3
    top_p: float = 0.85
    repetition_penalty: float = 1.05
    max_tokens_final: int = 4096

    def to_run_config(self) -> RunConfig:
        sampling = SamplingParams(
            temperature=self.temperature,
            top_p=self.top_p,
            repetition_penalty=self.repetition_penalty,
            max_tokens_final=self.max_tokens_final,
        )
        model = ModelProfile(
            backend=self.backend,
            url=self.backend_url,
            fixture_path=self.fixture_path,
            citation_markers=self.citation_markers,
            sampling=sampling,
        )
        return RunConfig(
            rag=self.rag,
            guardrails=self.guardrails,
            delta_z=self.delta_z,
            baseline_mode=self.baseline_mode,
            seed=self.seed,
            workers=self.workers,
            store_dir=self.store_dir,
            population_stats=self.population_stats,
            lexicon_path=self.lexicon_path,
            model=model,
            features=FeatureConfig(),
            t3_dimension=self.t3_dimension,
        )


class AnalyzeRequest(BaseModel):
    trials_path: str
    out_dir: str
    config: RunConfigPayload = RunConfigPayload()


class AnalyzeResponse(BaseModel):
    run_dir: str
    n_trials: int
    n_ok: int
    n_failed: int
    failures: dict
    ablation: str


class EvaluateRequest(BaseModel):
    run_dir: str = ""
    predictions_csv: str = ""
    gt_csv: str = ""
    baseline_run: str = ""
    lexicon_path: str = ""
    t3_dimension: str = "valence"


class EvaluateResponse(BaseModel):
    metrics: dict
    table: str


class AblateRequest(BaseModel):
    trials_path: str
    out_root: str
    config: RunConfigPayload = RunConfigPayload()


class AblateResponse(BaseModel):
    rows: list[dict]
    table: str
    out_root: str


class SyntheticRequest(BaseModel):
    out_path: str
    subjects: int = 2
    trials_per_subject: int = 3
    seed: int = 7
    duration_s: float = 240.0
    with_resp: str = "alternate"
    corpus_dir: str = ""
    artifact_trial: bool = False
    short_trial: bool = False


class SyntheticResponse(BaseModel):
    trials_path: str
    n_trials: int
    corpus_manifest: Optional[str] = None


class RetrieveRequest(BaseModel):
    store_dir: str
    query: str
    topics: list[str] = []
    top_k: int = 5
    similarity_threshold: float = 0.3
    seed: int = 0


class RetrieveResponse(BaseModel):
    passages: list[dict]


class HealthResponse(BaseModel):
    status: str
    version: str
