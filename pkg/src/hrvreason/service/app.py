"""FastAPI service wrapping the analysis package.

Domain errors map to 400 (bad input/config) so the thin CLI client can
translate them to its exit-code contract; unexpected errors stay 500.
"""

from __future__ import annotations

import dataclasses

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import RetrievalConfig, load_population_stats
from ..errors import HrvReasonError
from ..knowledge.embedding import make_embedder
from ..knowledge.governance import govern, retrieve
from ..knowledge.queries import Query
from ..knowledge.store import VectorStore
from ..normalization import normalize_panel
from ..runs import ablate, analyze, evaluate, gen_synthetic, ingest_kb
from ..signal.ingest import record_from_dict
from ..signal.panel import extract_panel
from .schemas import (
    AblateRequest,
    AblateResponse,
    AnalyzeRequest,
    AnalyzeResponse,
    EvaluateRequest,
    EvaluateResponse,
    FeatureBatchRequest,
    FeatureBatchResponse,
    FeaturesRequest,
    FeaturesResponse,
    HealthResponse,
    IngestRequest,
    IngestResponse,
    RetrieveRequest,
    RetrieveResponse,
    SyntheticRequest,
    SyntheticResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="hrvreason", version=__version__)

    @app.exception_handler(HrvReasonError)
    async def _domain_error(request, exc: HrvReasonError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc), "type": type(exc).__name__})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/features", response_model=FeaturesResponse)
    def features(req: FeaturesRequest) -> FeaturesResponse:
        record = record_from_dict(req.trial.to_record_dict(), "request")
        panel = extract_panel(record)
        population = load_population_stats(None)
        normalized = normalize_panel(panel, None, population=population)
        payload = panel.to_dict()
        payload["normalized"] = normalized.to_dict()
        return FeaturesResponse(panel=payload)

    @app.post("/v1/features-batch", response_model=FeatureBatchResponse)
    def features_batch(req: FeatureBatchRequest) -> FeatureBatchResponse:
        from ..config import RunConfig
        from ..runs import extract_features

        out = extract_features(req.trials_path, req.out_path, RunConfig(),
                               pop_stats_out=req.pop_stats_out)
        return FeatureBatchResponse(**out)

    @app.post("/v1/ingest", response_model=IngestResponse)
    def ingest(req: IngestRequest) -> IngestResponse:
        out = ingest_kb(
            req.manifest_path,
            req.out_dir,
            embedder_kind=req.embedder,
            dimension=req.dimension,
            seed=req.seed,
            embedder_url=req.embedder_url,
        )
        return IngestResponse(**out)

    @app.post("/v1/analyze", response_model=AnalyzeResponse)
    def analyze_batch(req: AnalyzeRequest) -> AnalyzeResponse:
        summary = analyze(req.trials_path, req.out_dir, req.config.to_run_config())
        return AnalyzeResponse(**summary)

    @app.post("/v1/evaluate", response_model=EvaluateResponse)
    def evaluate_run(req: EvaluateRequest) -> EvaluateResponse:
        out = evaluate(
            run_dir=req.run_dir,
            predictions_csv=req.predictions_csv,
            gt_csv=req.gt_csv,
            baseline_run=req.baseline_run,
            lexicon_path=req.lexicon_path,
            t3_dimension=req.t3_dimension,
        )
        return EvaluateResponse(**out)

    @app.post("/v1/ablate", response_model=AblateResponse)
    def ablate_runs(req: AblateRequest) -> AblateResponse:
        out = ablate(req.trials_path, req.out_root, req.config.to_run_config())
        return AblateResponse(**out)

    @app.post("/v1/synthetic", response_model=SyntheticResponse)
    def synthetic(req: SyntheticRequest) -> SyntheticResponse:
        out = gen_synthetic(
            req.out_path,
            subjects=req.subjects,
            trials_per_subject=req.trials_per_subject,
            seed=req.seed,
            duration_s=req.duration_s,
            with_resp=req.with_resp,
            corpus_dir=req.corpus_dir,
            artifact_trial=req.artifact_trial,
            short_trial=req.short_trial,
        )
        return SyntheticResponse(**out)

    @app.post("/v1/retrieve", response_model=RetrieveResponse)
    def retrieve_passages(req: RetrieveRequest) -> RetrieveResponse:
        store = VectorStore.load(req.store_dir)
        embedder = make_embedder("hash", dimension=store.dimension, seed=req.seed)
        cfg = dataclasses.replace(
            RetrievalConfig(),
            top_k=req.top_k,
            similarity_threshold=req.similarity_threshold,
        )
        query = Query(text=req.query, topics=tuple(req.topics))
        passages = govern(retrieve(query, store, embedder, cfg), query.topics, cfg)
        return RetrieveResponse(passages=[p.to_dict() for p in passages])

    return app


app = create_app()
