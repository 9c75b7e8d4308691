"""Completion backends: HTTP, file-backed fixtures, and a rule-based mock.

The wire contract is a single JSON POST: {system, user, temperature, top_p,
repetition_penalty, max_tokens} in, {text, finish_reason} out. The mock
clients implement the same interface so the pipeline code never branches.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..config import ModelProfile, SamplingParams
from ..errors import BackendRefused, CompletionTimeout, FixtureMissing, TransportError


@dataclass(frozen=True)
class CompletionRequest:
    system: str
    user: str
    temperature: float = 0.3
    top_p: float = 0.85
    repetition_penalty: float = 1.05
    max_tokens: int = 1024

    def payload(self) -> dict:
        return {
            "system": self.system,
            "user": self.user,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "repetition_penalty": self.repetition_penalty,
            "max_tokens": self.max_tokens,
        }

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.system.encode("utf-8"))
        h.update(b"\x00")
        h.update(self.user.encode("utf-8"))
        return h.hexdigest()


@dataclass
class CompletionResponse:
    text: str
    finish_reason: str = "stop"
    token_count: Optional[int] = None


class HttpCompletionClient:
    """JSON-over-HTTP backend with exponential-backoff retries.

    Transport failures (connection, timeout, 5xx) retry up to max_retries;
    4xx responses surface immediately as BackendRefused.
    """

    def __init__(self, url: str, max_retries: int = 3, base_delay: float = 0.25,
                 timeout_s: float = 120.0, client=None):
        import httpx

        self.url = url
        self.max_retries = max_retries
        self.base_delay = base_delay
        self._client = client or httpx.Client(timeout=timeout_s)

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        import httpx

        last_exc: Exception | None = None
        timed_out = False
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.base_delay * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(self.url, json=req.payload())
            except httpx.TimeoutException as exc:
                last_exc, timed_out = exc, True
                continue
            except httpx.HTTPError as exc:
                last_exc = exc
                continue
            if 400 <= resp.status_code < 500:
                raise BackendRefused(f"backend returned {resp.status_code}: {resp.text[:200]}")
            if resp.status_code >= 500:
                last_exc = TransportError(f"backend returned {resp.status_code}")
                continue
            body = resp.json()
            return CompletionResponse(
                text=body.get("text", ""),
                finish_reason=body.get("finish_reason", "stop"),
                token_count=body.get("token_count"),
            )
        if timed_out:
            raise CompletionTimeout(
                f"backend at {self.url} timed out after {self.max_retries} retries"
            ) from last_exc
        raise TransportError(
            f"backend at {self.url} unreachable after {self.max_retries} retries: {last_exc}"
        ) from last_exc


class FixtureClient:
    """File-backed mock: prompt-hash lookup first, then a scripted sequence.

    Fixture file format:
        {"by_hash": {"<sha256(system + NUL + user)>": "response text"},
         "sequence": ["first response", "second response", ...]}
    """

    def __init__(self, path):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        self.by_hash: dict = data.get("by_hash", {})
        self.sequence: list = list(data.get("sequence", []))
        self.calls: list[CompletionRequest] = []
        self._lock = threading.Lock()

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.calls.append(req)
            digest = req.digest()
            if digest in self.by_hash:
                return CompletionResponse(text=self.by_hash[digest])
            if self.sequence:
                return CompletionResponse(text=self.sequence.pop(0))
        raise FixtureMissing(f"no fixture response for prompt {digest[:12]}...")


_DATA_BLOCK = re.compile(r"BEGIN_DATA\n(.*?)\nEND_DATA", re.DOTALL)

# Directional phrases aligned with the bundled consistency lexicon.
_MOCK_PHRASES = {
    "RMSSD": ("increased vagal tone with elevated parasympathetic drive",
              "reduced vagal tone consistent with parasympathetic withdrawal"),
    "SDNN": ("increased overall variability", "decreased overall variability"),
    "MeanHR": ("elevated heart rate", "lowered heart rate"),
    "SampEn": ("increased complexity of the rhythm", "reduced complexity of the rhythm"),
}
_MOCK_METRICS = ("RMSSD", "SDNN", "MeanHR", "SampEn")


class TemplateMockClient:
    """Deterministic simulated model driven entirely by the prompt data block.

    It reads the machine-readable context every prompt carries, applies a
    fixed decision rule (vagal direction -> valence, heart-rate direction ->
    arousal), and renders template-compliant text. Identical prompts always
    produce identical responses, so full runs are pure functions of their
    inputs. Sampling parameters are accepted and ignored.
    """

    def __init__(self):
        self.calls = 0
        self._lock = threading.Lock()

    @staticmethod
    def _ctx(req: CompletionRequest) -> dict:
        m = _DATA_BLOCK.search(req.user)
        if not m:
            return {}
        try:
            return json.loads(m.group(1))
        except json.JSONDecodeError:
            return {}

    @staticmethod
    def _z(rows: dict, metric: str) -> Optional[float]:
        row = rows.get(metric) or {}
        for key in ("z_delta", "z_trad"):
            if row.get(key) is not None:
                return float(row[key])
        return None

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.calls += 1
        ctx = self._ctx(req)
        step = ctx.get("step", 0)
        if step == 8:
            return CompletionResponse(text=self._final_report(ctx, req))
        return CompletionResponse(text=self._step_report(ctx, step))

    def _step_report(self, ctx: dict, step: int) -> str:
        rows = ctx.get("rows", {})
        lines = [f"Step {step} assessment for {ctx.get('subject_id')}/{ctx.get('trial_id')}."]
        if step == 1:
            ar = ctx.get("artifact_rate")
            vr = ctx.get("valid_rr_ratio")
            lines.append(f"Artifact rate {ar} with valid RR ratio {vr}.")
            lines.append("Quality is acceptable for guarded interpretation."
                         if (ar is not None and ar <= 0.2)
                         else "Quality is degraded; downstream findings carry low trust.")
        elif step == 7:
            lines.append("EEG band features were integrated as supplementary context.")
        else:
            for metric in _MOCK_METRICS:
                z = self._z(rows, metric)
                if z is None:
                    continue
                phrase = _MOCK_PHRASES[metric][0 if z >= 0 else 1]
                lines.append(f"{metric} (z = {z:+.2f}) suggests {phrase}.")
            if step == 4 and ctx.get("n_poincare") is not None:
                lines.append(f"Poincare scatter count: {ctx['n_poincare']}.")
        return "\n".join(lines)

    def _final_report(self, ctx: dict, req: CompletionRequest) -> str:
        rows = ctx.get("rows", {})
        z_rmssd = self._z(rows, "RMSSD") or 0.0
        z_hr = self._z(rows, "MeanHR") or 0.0
        valence = "H" if z_rmssd >= 0 else "L"
        arousal = "H" if z_hr >= 0 else "L"
        state = f"{valence}V{arousal}A"
        artifact_rate = ctx.get("artifact_rate") or 0.0
        confidence = "Medium" if artifact_rate > 0.2 else "High"

        rationale = []
        for metric in _MOCK_METRICS:
            z = self._z(rows, metric)
            if z is None:
                continue
            phrase = _MOCK_PHRASES[metric][0 if z >= 0 else 1]
            rationale.append(f"{metric} (z = {z:+.2f}) indicates {phrase}.")
        rationale.append(
            "The overall pattern reflects heightened alertness." if arousal == "H"
            else "The overall pattern reflects a calm state with recovery features."
        )
        if ctx.get("n_poincare") is not None:
            rationale.append(f"Poincare scatter count: {ctx['n_poincare']}.")
        for file, page in (ctx.get("citations") or [])[:2]:
            rationale.append(f"[RAG: {file}, p.{page}]")

        limitations = list(ctx.get("notes") or [])
        if artifact_rate > 0.2:
            limitations.append("Signal quality limits the reliability of this assessment.")
        if not limitations:
            limitations.append("No additional data limitations were identified.")

        return "\n".join(
            [
                f"State: {state}",
                f"Confidence: {confidence}",
                "Rationale: " + " ".join(rationale),
                "Limitations: " + " ".join(limitations),
            ]
        )


def make_client(profile: ModelProfile):
    if profile.backend == "mock":
        return TemplateMockClient()
    if profile.backend == "fixture":
        if not profile.fixture_path:
            raise BackendRefused("fixture backend requires fixture_path")
        return FixtureClient(profile.fixture_path)
    if profile.backend == "http":
        if not profile.url:
            raise BackendRefused("http backend requires a url")
        return HttpCompletionClient(
            profile.url,
            max_retries=profile.max_retries,
            base_delay=profile.retry_base_delay,
            timeout_s=profile.timeout_s,
        )
    raise BackendRefused(f"unknown backend {profile.backend!r}")
