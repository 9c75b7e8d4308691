from .preprocess import RRSeries, CleanRRSeries, preprocess, smoothness_priors_detrend
from .timedomain import TimeDomainFeatures, time_domain
from .frequency import FrequencyFeatures, frequency_domain, respiratory_frequency
from .nonlinear import NonlinearFeatures, nonlinear, sample_entropy, dfa_alpha
from .panel import FeaturePanel, extract_panel, METRIC_ORDER
from .ingest import TrialRecord, load_trials

__all__ = [
    "RRSeries",
    "CleanRRSeries",
    "preprocess",
    "smoothness_priors_detrend",
    "TimeDomainFeatures",
    "time_domain",
    "FrequencyFeatures",
    "frequency_domain",
    "respiratory_frequency",
    "NonlinearFeatures",
    "nonlinear",
    "sample_entropy",
    "dfa_alpha",
    "FeaturePanel",
    "extract_panel",
    "METRIC_ORDER",
    "TrialRecord",
    "load_trials",
]
