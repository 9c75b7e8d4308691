"""Trial record parsing.

One record per trial: `subject_id`, `trial_id`, `rr_ms` (array of positive
milliseconds), optional `resp` ({"signal": [...], "rate_hz": float}),
optional `valence` / `arousal` ratings (integers 1-5), optional `eeg`
feature dict passed through untouched. Accepted containers: a JSON array,
a JSONL stream, or a long-format CSV grouped by (subject_id, trial_id).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import IngestError


@dataclass
class TrialRecord:
    subject_id: str
    trial_id: str
    rr_ms: np.ndarray
    resp_signal: Optional[np.ndarray] = None
    resp_rate_hz: float = 4.0
    valence: Optional[int] = None
    arousal: Optional[int] = None
    eeg: Optional[dict] = None

    @property
    def key(self) -> str:
        return f"{self.subject_id}_{self.trial_id}"


def _check_intervals(values, where: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise IngestError(f"{where}: rr_ms must be a non-empty 1-D array")
    if np.any(~np.isfinite(arr)):
        raise IngestError(f"{where}: rr_ms contains NaN or infinite values")
    if np.any(arr <= 0):
        raise IngestError(f"{where}: rr_ms contains non-positive intervals")
    return arr


def _rating(value, name: str, where: str) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise IngestError(f"{where}: {name} must be an integer 1-5, got {value!r}")
    if not 1 <= v <= 5:
        raise IngestError(f"{where}: {name} must lie in 1-5, got {v}")
    return v


def record_from_dict(obj: dict, where: str = "record") -> TrialRecord:
    try:
        subject = str(obj["subject_id"])
        trial = str(obj["trial_id"])
        rr = obj["rr_ms"]
    except KeyError as exc:
        raise IngestError(f"{where}: missing field {exc}")
    where = f"{where} ({subject}/{trial})"
    resp = obj.get("resp")
    resp_signal, resp_rate = None, 4.0
    if resp is not None:
        try:
            resp_signal = np.asarray(resp["signal"], dtype=float)
            resp_rate = float(resp.get("rate_hz", 4.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise IngestError(f"{where}: bad resp channel: {exc}")
        if np.any(~np.isfinite(resp_signal)):
            raise IngestError(f"{where}: resp signal contains NaN")
    return TrialRecord(
        subject_id=subject,
        trial_id=trial,
        rr_ms=_check_intervals(rr, where),
        resp_signal=resp_signal,
        resp_rate_hz=resp_rate,
        valence=_rating(obj.get("valence"), "valence", where),
        arousal=_rating(obj.get("arousal"), "arousal", where),
        eeg=obj.get("eeg"),
    )


def _load_json(path: Path) -> list[TrialRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("trials", [])
    if not isinstance(data, list):
        raise IngestError(f"{path}: expected a list of trial records")
    return [record_from_dict(obj, f"{path.name}[{i}]") for i, obj in enumerate(data)]


def _load_jsonl(path: Path) -> list[TrialRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path.name}:{lineno}: invalid JSON: {exc}")
            records.append(record_from_dict(obj, f"{path.name}:{lineno}"))
    return records


def _load_csv(path: Path) -> list[TrialRecord]:
    groups: dict[tuple, dict] = {}
    order: list[tuple] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"subject_id", "trial_id", "rr_ms"}
        if not required.issubset(set(reader.fieldnames or [])):
            raise IngestError(f"{path.name}: CSV needs columns {sorted(required)}")
        for lineno, row in enumerate(reader, 2):
            key = (row["subject_id"], row["trial_id"])
            if key not in groups:
                groups[key] = {
                    "subject_id": row["subject_id"],
                    "trial_id": row["trial_id"],
                    "rr_ms": [],
                    "valence": row.get("valence") or None,
                    "arousal": row.get("arousal") or None,
                }
                order.append(key)
            try:
                val = float(row["rr_ms"])
            except (TypeError, ValueError):
                raise IngestError(f"{path.name}:{lineno}: rr_ms not numeric: {row['rr_ms']!r}")
            if math.isnan(val):
                raise IngestError(f"{path.name}:{lineno}: rr_ms is NaN")
            groups[key]["rr_ms"].append(val)
    return [record_from_dict(groups[k], f"{path.name} group {k}") for k in order]


def load_trials(path) -> list[TrialRecord]:
    """Load trial records from a .json, .jsonl, or .csv file."""
    p = Path(path)
    if not p.exists():
        raise IngestError(f"trials file not found: {p}")
    if p.suffix == ".jsonl":
        records = _load_jsonl(p)
    elif p.suffix == ".json":
        records = _load_json(p)
    elif p.suffix == ".csv":
        records = _load_csv(p)
    else:
        raise IngestError(f"{p.name}: unsupported trials format {p.suffix!r}")
    seen = set()
    for rec in records:
        if rec.key in seen:
            raise IngestError(f"duplicate trial key {rec.key}")
        seen.add(rec.key)
    return records
