from .labels import AFFECT_COORDS, GtLabel, construct_label, wad_distance
from .crc import CrcReportResult, crc_corpus, crc_report
from .metrics import (
    MetricSummary,
    PredictionRecord,
    agreement,
    evaluate_predictions,
    f1_and_confusion,
    load_predictions_csv,
    quality_metrics,
    render_table,
    task_metrics,
    wad,
)

__all__ = [
    "AFFECT_COORDS",
    "GtLabel",
    "construct_label",
    "wad_distance",
    "CrcReportResult",
    "crc_corpus",
    "crc_report",
    "MetricSummary",
    "PredictionRecord",
    "agreement",
    "evaluate_predictions",
    "f1_and_confusion",
    "load_predictions_csv",
    "quality_metrics",
    "render_table",
    "task_metrics",
    "wad",
]
