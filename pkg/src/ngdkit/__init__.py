"""Normalized Google Distance from document hit counts."""
from ngdkit.corpus import CorpusIndex, TokenizerConfig, build_index, load_corpus
from ngdkit.metric import (
    Anomaly,
    CountObservation,
    DistanceValue,
    Kind,
    TermQuery,
    calibrate,
    canonicalize,
    ngd,
    repaired_ngd,
    triangle_difference,
)

__version__ = "0.1.0"

__all__ = [
    "Anomaly",
    "CorpusIndex",
    "CountObservation",
    "DistanceValue",
    "Kind",
    "TermQuery",
    "TokenizerConfig",
    "build_index",
    "calibrate",
    "canonicalize",
    "load_corpus",
    "ngd",
    "repaired_ngd",
    "triangle_difference",
]
