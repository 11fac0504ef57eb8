"""Expectation values of NGD over word sets and triangle-inequality scans."""
from __future__ import annotations

import itertools
import math
import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ngdkit.corpus import CorpusIndex, frequent_terms
from ngdkit.metric import (
    DistanceValue,
    TermLike,
    TermQuery,
    calibrate,
    canonicalize,
    ngd,
    triangle_difference,
)
from ngdkit.providers.base import CountSource


class StatisticsError(ValueError):
    pass


@dataclass(frozen=True)
class WordSet:
    label: str
    words: tuple[TermQuery, ...]

    def __init__(self, label: str, words: Iterable[TermLike]):
        words = tuple(canonicalize(w) for w in words)
        if len(words) < 2:
            raise ValueError(f"word set {label!r} needs at least 2 words")
        if len(set(words)) != len(words):
            raise ValueError(f"word set {label!r} has duplicate words")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "words", words)

    def __len__(self) -> int:
        return len(self.words)


class DistanceMatrix:
    """Symmetric lookup of pairwise distances by term."""

    def __init__(self, distances: Mapping[tuple[str, str], DistanceValue]):
        self._d: dict[tuple[str, str], DistanceValue] = {}
        for (a, b), d in distances.items():
            self._d[_key(a, b)] = d

    @classmethod
    def from_values(cls, values: Mapping[tuple[TermLike, TermLike], float]) -> "DistanceMatrix":
        """Wrap raw numbers (``inf`` allowed) as finite or infinite distances."""
        out = {}
        for (a, b), v in values.items():
            out[(a, b)] = DistanceValue.infinite() if math.isinf(v) else DistanceValue.finite(v)
        return cls(out)

    def __getitem__(self, pair: tuple[TermLike, TermLike]) -> DistanceValue:
        return self._d[_key(*pair)]

    def __contains__(self, pair) -> bool:
        return _key(*pair) in self._d

    def items(self):
        return self._d.items()


def _key(a: TermLike, b: TermLike) -> tuple[str, str]:
    a, b = canonicalize(a).text, canonicalize(b).text
    return (a, b) if a <= b else (b, a)


def distance_matrix(
    words: Sequence[TermLike],
    source: CountSource,
    normalization: Optional[float] = None,
    max_workers: int = 1,
) -> DistanceMatrix:
    """NGD for every unordered pair of ``words``.

    With ``max_workers > 1`` observations are fetched concurrently; the
    result does not depend on completion order.
    """
    terms = [canonicalize(w) for w in words]
    pairs = list(itertools.combinations(terms, 2))

    def one(pair):
        d = ngd(source.observe(*pair))
        return calibrate(d, normalization) if normalization is not None else d

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            values = list(pool.map(one, pairs))
    else:
        values = [one(p) for p in pairs]
    return DistanceMatrix({(x.text, y.text): d for (x, y), d in zip(pairs, values)})


@dataclass(frozen=True)
class SetStatistics:
    label: str
    n_words: int
    pair_count: int
    mean_ngd: float
    std_ngd: float
    mean_td: Optional[float]
    excluded_pairs: list[tuple[str, str, str]] = field(default_factory=list)


def _exclusion_reason(d: DistanceValue) -> str:
    return "never co-occur" if d.is_infinite else d.reason


def statistics_from_matrix(label: str, words: Sequence[TermLike], matrix: DistanceMatrix) -> SetStatistics:
    terms = [canonicalize(w).text for w in words]
    values, excluded = [], []
    for a, b in itertools.combinations(terms, 2):
        d = matrix[a, b]
        if d.is_finite:
            values.append(d.value)
        else:
            excluded.append((a, b, _exclusion_reason(d)))
    if not values:
        raise StatisticsError(f"word set {label!r} has no pair with a finite distance")
    tds = []
    for x, y, z in itertools.permutations(terms, 3):
        td = triangle_difference(matrix[x, y], matrix[y, z], matrix[x, z])
        if td is not None:
            tds.append(td)
    return SetStatistics(
        label=label,
        n_words=len(terms),
        pair_count=len(values),
        mean_ngd=statistics.fmean(values),
        std_ngd=statistics.pstdev(values),
        mean_td=statistics.fmean(tds) if tds else None,
        excluded_pairs=excluded,
    )


def set_statistics(
    ws: WordSet, source: CountSource, normalization: Optional[float] = None, max_workers: int = 1
) -> SetStatistics:
    """Mean and population standard deviation of NGD over the pairs of ``ws``.

    Pairs whose distance is infinite or undefined are left out and listed in
    ``excluded_pairs``. ``mean_td`` averages the triangle difference over
    every ordered triple of distinct words whose three legs are finite, and
    is ``None`` when there is no such triple.
    """
    matrix = distance_matrix(ws.words, source, normalization, max_workers)
    return statistics_from_matrix(ws.label, ws.words, matrix)


def weighted_mean(values: Iterable[tuple[float, float]]) -> float:
    values = list(values)
    if not values:
        raise StatisticsError("weighted mean of an empty list")
    total = 0.0
    weight = 0.0
    for v, w in values:
        if not w > 0:
            raise StatisticsError(f"weights must be positive, got {w}")
        total += w * v
        weight += w
    return total / weight


@dataclass(frozen=True)
class ConsistencyReport:
    expected_ngd: float
    expected_td: float
    difference: float
    tolerance: float

    @property
    def agrees(self) -> bool:
        return self.difference <= self.tolerance


def etd_consistency(sets: Sequence[SetStatistics], tolerance: float = 0.1) -> ConsistencyReport:
    """Compare word-count-weighted E[NGD] with E[TD] across word sets.

    The two agree in expectation for independent random words, since
    E[TD] = 2 E[NGD] - E[NGD].
    """
    if not sets:
        raise StatisticsError("no word sets given")
    for s in sets:
        if s.mean_td is None:
            raise StatisticsError(f"word set {s.label!r} has no usable triangle")
    e_ngd = weighted_mean((s.mean_ngd, s.n_words) for s in sets)
    e_td = weighted_mean((s.mean_td, s.n_words) for s in sets)
    return ConsistencyReport(e_ngd, e_td, abs(e_td - e_ngd), tolerance)


def estimate_calibration_constant(
    sets: Sequence[WordSet], source: CountSource, max_workers: int = 1
) -> float:
    """Word-count-weighted mean NGD across ``sets``, for use with ``calibrate``.

    Sets without any finite pair are ignored.
    """
    entries = []
    for ws in sets:
        try:
            s = set_statistics(ws, source, max_workers=max_workers)
        except StatisticsError:
            continue
        entries.append((s.mean_ngd, s.n_words))
    if not entries:
        raise StatisticsError("no usable pairs in any word set")
    return weighted_mean(entries)


@dataclass(frozen=True)
class Violation:
    """One triple whose path through ``mediator`` beats the direct distance.

    ``x`` and ``z`` are the endpoints, in lexicographic order.
    """

    triple: tuple[str, str, str]
    mediator: str
    x: str
    z: str
    d_xy: float
    d_yz: float
    d_xz: float
    td: float


@dataclass(frozen=True)
class ScanResult:
    violations: list[Violation]
    triples_checked: int
    triples_skipped: int

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def scan_matrix(words: Sequence[TermLike], matrix: DistanceMatrix, tolerance: float = 0.0) -> ScanResult:
    """Find every triple with a triangle difference below ``-tolerance``.

    Each of the three words is tried as the mediator; a violating triple is
    reported once, with the mediator giving the most negative difference.
    Triples with any non-finite leg are skipped.
    """
    terms = sorted({canonicalize(w).text for w in words})
    if len(terms) < 3:
        raise ValueError("need at least 3 distinct words to scan triangles")
    violations, checked, skipped = [], 0, 0
    for triple in itertools.combinations(terms, 3):
        if not all(matrix[a, b].is_finite for a, b in itertools.combinations(triple, 2)):
            skipped += 1
            continue
        checked += 1
        worst = None
        for mediator in triple:
            x, z = (t for t in triple if t != mediator)
            d_xy, d_yz, d_xz = matrix[x, mediator], matrix[mediator, z], matrix[x, z]
            td = triangle_difference(d_xy, d_yz, d_xz)
            if td < -tolerance and (worst is None or td < worst.td):
                worst = Violation(triple, mediator, x, z, d_xy.value, d_yz.value, d_xz.value, td)
        if worst is not None:
            violations.append(worst)
    return ScanResult(violations, checked, skipped)


def scan_triangle_violations(
    words: Sequence[TermLike], source: CountSource, tolerance: float = 0.0, max_workers: int = 1
) -> ScanResult:
    return scan_matrix(words, distance_matrix(words, source, max_workers=max_workers), tolerance)


def sample_word_sets(
    index: CorpusIndex,
    sizes: Sequence[int],
    seed: Optional[int] = None,
    min_count: int = 5,
    rng: Optional[random.Random] = None,
) -> list[WordSet]:
    """Draw word sets uniformly without replacement from frequent index terms.

    All draws come from one generator, seeded by ``seed`` unless ``rng`` is
    given. Words are unique within a set but may repeat across sets.
    """
    rng = rng or random.Random(seed)
    pool = frequent_terms(index, min_count)
    sets = []
    for i, size in enumerate(sizes, start=1):
        if size > len(pool):
            raise StatisticsError(
                f"cannot draw {size} words; only {len(pool)} terms have count >= {min_count}"
            )
        sets.append(WordSet(f"sample-{i}", rng.sample(pool, size)))
    return sets
