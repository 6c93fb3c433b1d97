"""Spectral change point detection for dynamic graphs."""

from .dos import DosConfig, SignatureVector, embed_series, gql_ldos, kpm_dos
from .generators import AnomalySchedule, builtin_experiment
from .graph import AttributeTable, Snapshot, build_snapshot, encode_attribute, laplacian_operator
from .harness import hits_at_n, run_experiment
from .scoring import ScoreSeries, ScoringConfig, score_attribute_series, score_series

__all__ = [
    "AnomalySchedule",
    "AttributeTable",
    "DosConfig",
    "ScoreSeries",
    "ScoringConfig",
    "SignatureVector",
    "Snapshot",
    "build_snapshot",
    "builtin_experiment",
    "embed_series",
    "encode_attribute",
    "gql_ldos",
    "hits_at_n",
    "kpm_dos",
    "laplacian_operator",
    "run_experiment",
    "score_attribute_series",
    "score_series",
]
