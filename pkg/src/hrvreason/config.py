"""Configuration objects for feature extraction, retrieval, scoring, and runs.

Every constant that the pipeline treats as a tunable lives here so that a run
directory can serialize the exact configuration it executed with.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError

# Frequency bands (Hz): ULF below 0.04, LF 0.04-0.15, HF 0.15-0.40.
DEFAULT_BANDS = {
    "ULF": (0.0, 0.04),
    "LF": (0.04, 0.15),
    "HF": (0.15, 0.40),
}


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs for the RR-interval feature extractors."""

    sampen_m: int = 2
    sampen_r_factor: float = 0.2          # tolerance as a fraction of series SD
    dfa_scale_min: int = 4
    dfa_scale_max: int = 16
    detrend_lambda: float = 500.0         # smoothness-priors regularization
    resample_hz: float = 4.0
    artifact_min_ms: float = 300.0
    artifact_max_ms: float = 2000.0
    artifact_rel_jump: float = 0.20       # fractional jump vs previous kept beat
    sdnn_index_window_s: float = 30.0     # short trials cannot use 5-min windows
    welch_nperseg: int = 256
    min_tachogram_samples: int = 64
    resp_band: tuple = (0.10, 0.50)
    bands: dict = field(default_factory=lambda: dict(DEFAULT_BANDS))

    def __post_init__(self):
        if self.dfa_scale_min < 4:
            raise ConfigError("dfa_scale_min must be >= 4")
        if self.dfa_scale_max <= self.dfa_scale_min:
            raise ConfigError("dfa_scale_max must exceed dfa_scale_min")
        edges = sorted(self.bands.values())
        for (lo1, hi1), (lo2, _) in zip(edges, edges[1:]):
            if hi1 > lo2:
                raise ConfigError("frequency bands must be ordered and non-overlapping")


# Metric reliability weights used by evidence governance.
DEFAULT_METRIC_WEIGHTS = {
    "RMSSD": 0.9,
    "SDNN": 0.7,
    "SampEn": 0.6,
    "DFA_alpha": 0.5,
    "SD1_SD2": 0.4,
    "LF_HF": 0.3,
}

# Study-design score modifiers; rct and controlled trials share one value.
DEFAULT_DESIGN_MODIFIERS = {
    "rct": 1.08,
    "controlled": 1.08,
    "observational": 1.05,
    "opinion": 0.97,
    "unknown": 1.0,
}


@dataclass(frozen=True)
class RetrievalConfig:
    chunk_size: int = 1000                # whitespace tokens
    chunk_overlap: int = 200
    sentence_tolerance: float = 0.10      # boundary search window as chunk fraction
    top_k: int = 5
    similarity_threshold: float = 0.3
    metric_weights: dict = field(default_factory=lambda: dict(DEFAULT_METRIC_WEIGHTS))
    design_modifiers: dict = field(default_factory=lambda: dict(DEFAULT_DESIGN_MODIFIERS))
    threshold_penalty: float = 0.85
    topic_bonus_unit: float = 0.1
    topic_bonus_cap: float = 0.5
    w_base: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ConfigError("similarity_threshold must lie in [0, 1]")
        if self.chunk_overlap >= self.chunk_size:
            raise ConfigError("chunk_overlap must be smaller than chunk_size")
        if any(w <= 0 for w in self.metric_weights.values()):
            raise ConfigError("metric weights must be positive")


@dataclass(frozen=True)
class CrcConfig:
    """Reasoning-consistency scoring: |z| threshold and keyword lexicon."""

    tau: float = 0.5
    lexicon: dict = field(default_factory=dict)  # metric -> {"positive": [...], "negative": [...]}

    def __post_init__(self):
        for metric, sets in self.lexicon.items():
            pos = set(k.lower() for k in sets.get("positive", []))
            neg = set(k.lower() for k in sets.get("negative", []))
            if pos & neg:
                raise ConfigError(f"lexicon for {metric} has overlapping positive/negative keywords")


@dataclass(frozen=True)
class SamplingParams:
    """Generation parameters forwarded to the completion backend."""

    temperature: float = 0.3
    top_p: float = 0.85
    repetition_penalty: float = 1.05
    max_tokens_step: int = 1024
    max_tokens_final: int = 4096


@dataclass(frozen=True)
class ModelProfile:
    """How to reach and interpret a completion backend."""

    backend: str = "mock"                  # mock | http | fixture
    url: str = ""
    fixture_path: str = ""
    citation_markers: bool = True          # whether reports carry [RAG: ...] headers
    sampling: SamplingParams = field(default_factory=SamplingParams)
    max_retries: int = 3
    retry_base_delay: float = 0.25
    timeout_s: float = 120.0


# Fallback change-state thresholds on |percent change| when z-scores are
# unavailable: marked/moderate/mild.
DEFAULT_PCT_FALLBACK = (25.0, 15.0, 7.5)


@dataclass
class RunConfig:
    """Everything a pipeline run needs; serialized into run.json."""

    rag: bool = True
    guardrails: bool = True
    delta_z: bool = True
    baseline_mode: str = "retrospective"   # retrospective | causal
    seed: int = 0
    workers: int = 2
    store_dir: str = ""
    population_stats: str = ""
    lexicon_path: str = ""
    trials_path: str = ""
    out_dir: str = ""
    model: ModelProfile = field(default_factory=ModelProfile)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    pct_fallback: tuple = DEFAULT_PCT_FALLBACK
    t3_dimension: str = "valence"          # valence | arousal
    embedder_dim: int = 64

    def __post_init__(self):
        if self.baseline_mode not in ("retrospective", "causal"):
            raise ConfigError(f"unknown baseline mode: {self.baseline_mode}")
        if self.model.backend not in ("mock", "http", "fixture"):
            raise ConfigError(f"unknown backend: {self.model.backend}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def deterministic(self) -> bool:
        return self.model.backend in ("mock", "fixture")

    def ablation_name(self) -> str:
        key = (self.rag, self.guardrails, self.delta_z)
        return {
            (True, True, True): "full",
            (False, True, True): "no_rag",
            (True, False, True): "no_guardrails",
            (True, True, False): "no_delta_z",
            (False, False, False): "minimal",
        }.get(key, "custom")

    def to_dict(self) -> dict:
        return _as_plain(dataclasses.asdict(self))


ABLATION_ROWS = [
    ("full", dict(rag=True, guardrails=True, delta_z=True)),
    ("no_rag", dict(rag=False, guardrails=True, delta_z=True)),
    ("no_guardrails", dict(rag=True, guardrails=False, delta_z=True)),
    ("no_delta_z", dict(rag=True, guardrails=True, delta_z=False)),
    ("minimal", dict(rag=False, guardrails=False, delta_z=False)),
]


def _as_plain(obj):
    if isinstance(obj, dict):
        return {k: _as_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_plain(v) for v in obj]
    return obj


def _data_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name


def load_lexicon(path: Optional[str] = None) -> dict:
    """Load the CRC keyword lexicon (default: the bundled file)."""
    p = Path(path) if path else _data_path("lexicon.json")
    try:
        with open(p, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read lexicon file {p}: {exc}") from exc


def load_population_stats(path: Optional[str] = None) -> dict:
    """Population mean/sd per metric, keyed by metric name."""
    p = Path(path) if path else _data_path("population_stats.json")
    try:
        with open(p, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read population stats {p}: {exc}") from exc
    for metric, stats in raw.items():
        if stats.get("sd", 0) <= 0:
            raise ConfigError(f"population sd for {metric} must be > 0")
    return raw


def bundled_trials_path() -> Path:
    """The packaged six-trial synthetic demo set."""
    return _data_path("trials_demo.jsonl")


def load_config_file(path: str) -> dict:
    """Read a config file (TOML sections or flat JSON) into a nested dict."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    if p.suffix == ".json":
        with open(p, "r", encoding="utf-8") as fh:
            return json.load(fh)
    import tomllib

    with open(p, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad config file {path}: {exc}") from exc


def resolve_backend_url(explicit: str = "") -> str:
    """CLI flag wins, then the environment override."""
    return explicit or os.environ.get("HRVREASON_BACKEND_URL", "")
