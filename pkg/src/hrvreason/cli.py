"""Command-line client for the analysis service.

The CLI is a thin HTTP client: every subcommand maps to one service
endpoint. By default the service app runs in-process over an ASGI
transport, so no server is needed; pass --server to drive a remote
instance instead. Exit codes: 0 success, 1 one or more trials failed,
2 configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import httpx

from .config import load_config_file, resolve_backend_url
from .errors import ConfigError


class ServiceClient:
    """HTTP client; embeds the app in-process unless a server URL is given."""

    def __init__(self, server: str = ""):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            # in-process ASGI: same HTTP surface, no socket needed
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise ConfigError(f"{path} failed ({resp.status_code}): {detail}")
        return resp.json()

    def get(self, path: str) -> dict:
        resp = self._client.get(path)
        resp.raise_for_status()
        return resp.json()


def _flatten_config_file(path: str) -> dict:
    """Accept flat keys or sectioned tables; sections just merge."""
    raw = load_config_file(path)
    flat: dict = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


_CONFIG_KEYS = {
    "rag": bool, "guardrails": bool, "delta_z": bool, "baseline_mode": str,
    "seed": int, "workers": int, "store_dir": str, "population_stats": str,
    "lexicon_path": str, "backend": str, "backend_url": str, "fixture_path": str,
    "citation_markers": bool, "t3_dimension": str, "temperature": float,
    "top_p": float, "repetition_penalty": float, "max_tokens_final": int,
}


def _run_config_payload(args: argparse.Namespace) -> dict:
    """Effective config: CLI flags > config file > defaults."""
    payload: dict = {}
    if getattr(args, "config", None):
        file_cfg = _flatten_config_file(args.config)
        for key, caster in _CONFIG_KEYS.items():
            if key in file_cfg:
                payload[key] = caster(file_cfg[key])
    if args.no_rag:
        payload["rag"] = False
    if args.no_guardrails:
        payload["guardrails"] = False
    if args.no_delta_z:
        payload["delta_z"] = False
    if args.baseline_mode:
        payload["baseline_mode"] = args.baseline_mode
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.workers is not None:
        payload["workers"] = args.workers
    if args.store:
        payload["store_dir"] = args.store
    if args.population_stats:
        payload["population_stats"] = args.population_stats
    if args.lexicon:
        payload["lexicon_path"] = args.lexicon
    if args.backend:
        payload["backend"] = args.backend
    url = resolve_backend_url(args.backend_url or payload.get("backend_url", ""))
    if url:
        payload["backend_url"] = url
        payload.setdefault("backend", "http")
    if args.fixture:
        payload["fixture_path"] = args.fixture
        payload.setdefault("backend", "fixture")
    if args.no_citation_markers:
        payload["citation_markers"] = False
    if args.t3:
        payload["t3_dimension"] = args.t3
    return payload


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file (TOML or JSON); CLI flags override it")
    p.add_argument("--store", help="vector store directory for retrieval")
    p.add_argument("--no-rag", action="store_true", help="disable retrieval")
    p.add_argument("--no-guardrails", action="store_true", help="disable guardrail directives")
    p.add_argument("--no-delta-z", action="store_true", help="disable within-subject delta z-scores")
    p.add_argument("--baseline-mode", choices=["retrospective", "causal"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--population-stats", help="population stats JSON")
    p.add_argument("--lexicon", help="consistency keyword lexicon JSON")
    p.add_argument("--backend", choices=["mock", "http", "fixture"])
    p.add_argument("--backend-url", default="",
                   help="completion backend URL (or HRVREASON_BACKEND_URL)")
    p.add_argument("--fixture", help="fixture file for the file-backed mock")
    p.add_argument("--no-citation-markers", action="store_true",
                   help="model profile without [RAG: ...] citation markers")
    p.add_argument("--t3", choices=["valence", "arousal"],
                   help="dimension scored as vagal accuracy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrvreason",
        description="Guardrailed stepwise HRV interpretation: ingest, analyze, evaluate.",
    )
    parser.add_argument("--server", default="", help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-kb", help="chunk, embed, and index a document corpus")
    p.add_argument("manifest", help="JSONL corpus manifest")
    p.add_argument("out_store", help="output store directory")
    p.add_argument("--embedder", choices=["hash", "http"], default="hash")
    p.add_argument("--embedder-url", default="")
    p.add_argument("--dimension", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("features", help="extract feature panels for a trials file")
    p.add_argument("trials", help="trials file (.jsonl/.json/.csv)")
    p.add_argument("out", help="output features JSONL")
    p.add_argument("--pop-stats-out", default="", help="also write cohort population stats JSON")

    p = sub.add_parser("analyze", help="run the full stepwise pipeline over trials")
    p.add_argument("trials")
    p.add_argument("out_dir")
    _add_run_flags(p)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("run_dir", nargs="?", default="", help="run directory to evaluate")
    p.add_argument("--predictions", default="", help="bare prediction CSV instead of a run dir")
    p.add_argument("--gt", default="", help="ground-truth CSV (subject,trial,gt,pred)")
    p.add_argument("--baseline", default="", help="baseline run dir for state agreement")
    p.add_argument("--lexicon", default="")
    p.add_argument("--t3", choices=["valence", "arousal"], default="valence")

    p = sub.add_parser("ablate", help="run every ablation row and compare to the full system")
    p.add_argument("trials")
    p.add_argument("out_root")
    _add_run_flags(p)

    p = sub.add_parser("gen-synthetic", help="generate a seeded synthetic trial set")
    p.add_argument("out", help="output trials JSONL")
    p.add_argument("--subjects", type=int, default=2)
    p.add_argument("--trials", type=int, default=3, dest="trials_per_subject")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--duration", type=float, default=240.0)
    p.add_argument("--resp", choices=["all", "none", "alternate"], default="alternate")
    p.add_argument("--corpus", default="", help="also write the demo knowledge corpus here")
    p.add_argument("--artifact-trial", action="store_true",
                   help="inject a high-artifact trial (quality gate demo)")
    p.add_argument("--short-trial", action="store_true",
                   help="include one short trial (nonlinear guardrail demo)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        client = ServiceClient(args.server)
        if args.command == "ingest-kb":
            out = client.post("/v1/ingest", {
                "manifest_path": args.manifest,
                "out_dir": args.out_store,
                "embedder": args.embedder,
                "embedder_url": args.embedder_url,
                "dimension": args.dimension,
                "seed": args.seed,
            })
            print(f"indexed {out['documents']} documents into {out['chunks']} chunks at {out['out_dir']}")
            return 0

        if args.command == "features":
            out = client.post("/v1/features-batch", {
                "trials_path": args.trials,
                "out_path": args.out,
                "pop_stats_out": args.pop_stats_out,
            })
            print(f"{out['n_ok']}/{out['n_trials']} panels written to {out['out']}")
            for key, err in out["failures"].items():
                print(f"  failed {key}: {err}", file=sys.stderr)
            return 1 if out["n_failed"] else 0

        if args.command == "analyze":
            out = client.post("/v1/analyze", {
                "trials_path": args.trials,
                "out_dir": args.out_dir,
                "config": _run_config_payload(args),
            })
            print(f"run [{out['ablation']}]: {out['n_ok']}/{out['n_trials']} trials ok "
                  f"-> {out['run_dir']}")
            for key, err in out["failures"].items():
                print(f"  failed {key}: {err}", file=sys.stderr)
            return 1 if out["n_failed"] or out["n_ok"] == 0 else 0

        if args.command == "evaluate":
            if not args.run_dir and not args.predictions:
                raise ConfigError("evaluate needs a run directory or --predictions CSV")
            out = client.post("/v1/evaluate", {
                "run_dir": args.run_dir,
                "predictions_csv": args.predictions,
                "gt_csv": args.gt,
                "baseline_run": args.baseline,
                "lexicon_path": args.lexicon,
                "t3_dimension": args.t3,
            })
            print(out["table"])
            return 0

        if args.command == "ablate":
            out = client.post("/v1/ablate", {
                "trials_path": args.trials,
                "out_root": args.out_root,
                "config": _run_config_payload(args),
            })
            print(out["table"])
            failed = sum(r.get("n_failed", 0) for r in out["rows"])
            return 1 if failed else 0

        if args.command == "gen-synthetic":
            out = client.post("/v1/synthetic", {
                "out_path": args.out,
                "subjects": args.subjects,
                "trials_per_subject": args.trials_per_subject,
                "seed": args.seed,
                "duration_s": args.duration,
                "with_resp": args.resp,
                "corpus_dir": args.corpus,
                "artifact_trial": args.artifact_trial,
                "short_trial": args.short_trial,
            })
            print(f"wrote {out['n_trials']} trials to {out['trials_path']}")
            if out.get("corpus_manifest"):
                print(f"wrote corpus manifest to {out['corpus_manifest']}")
            return 0

    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return 2

    return 2


if __name__ == "__main__":
    sys.exit(main())
