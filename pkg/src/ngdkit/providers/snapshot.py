"""Frozen count snapshots: serialization, lookup, and stability comparison.

A snapshot file is JSON::

    {
      "version": 1,
      "provider_id": "local:3f2a...",
      "created_at": "2026-01-01T00:00:00+00:00",
      "m": 1000,
      "terms": {"beatles": 40, "rolling stones": 31},
      "pairs": {"beatles\\trolling stones": 12}
    }

Pair keys join the two canonical terms with a tab, smaller term first.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from ngdkit.metric import CountObservation, DistanceValue, TermLike, canonicalize, ngd
from ngdkit.providers.base import CountSource, CoverageError, ProviderError, SnapshotMiss

SNAPSHOT_VERSION = 1
PAIR_SEPARATOR = "\t"


class SnapshotFormatError(ValueError):
    pass


def pair_key(x: TermLike, y: TermLike) -> tuple[str, str]:
    a, b = canonicalize(x).text, canonicalize(y).text
    return (a, b) if a <= b else (b, a)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


@dataclass
class CountSnapshot:
    m: int
    terms: dict[str, int] = field(default_factory=dict)
    pairs: dict[tuple[str, str], int] = field(default_factory=dict)
    provider_id: str = ""
    created_at: datetime = field(default_factory=_utcnow)

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "provider_id": self.provider_id,
            "created_at": self.created_at.isoformat(),
            "m": self.m,
            "terms": dict(sorted(self.terms.items())),
            "pairs": {
                PAIR_SEPARATOR.join(key): count for key, count in sorted(self.pairs.items())
            },
        }

    def dumps(self) -> str:
        """Canonical text form: sorted keys, two-space indent, trailing newline."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CountSnapshot":
        if not isinstance(data, dict):
            raise SnapshotFormatError("snapshot must be a JSON object")
        version = data.get("version")
        if version != SNAPSHOT_VERSION:
            raise SnapshotFormatError(f"unsupported snapshot version {version!r}")
        missing = {"provider_id", "created_at", "m", "terms", "pairs"} - data.keys()
        if missing:
            raise SnapshotFormatError(f"snapshot missing fields: {', '.join(sorted(missing))}")
        m = _count(data["m"], "m")
        if m < 1:
            raise SnapshotFormatError("m must be >= 1")
        try:
            created_at = datetime.fromisoformat(data["created_at"])
        except (TypeError, ValueError) as exc:
            raise SnapshotFormatError(f"bad created_at: {data['created_at']!r}") from exc

        terms = {}
        for term, count in data["terms"].items():
            if canonicalize(term).text != term:
                raise SnapshotFormatError(f"term {term!r} is not in canonical form")
            terms[term] = _count(count, term)
        pairs = {}
        for raw_key, count in data["pairs"].items():
            parts = raw_key.split(PAIR_SEPARATOR)
            if len(parts) != 2:
                raise SnapshotFormatError(f"pair key {raw_key!r} must hold exactly one tab")
            a, b = parts
            if canonicalize(a).text != a or canonicalize(b).text != b:
                raise SnapshotFormatError(f"pair key {raw_key!r} is not in canonical form")
            if a > b:
                raise SnapshotFormatError(f"pair key {raw_key!r} is not sorted")
            pairs[(a, b)] = _count(count, raw_key)
        return cls(m, terms, pairs, str(data["provider_id"]), created_at)

    @classmethod
    def loads(cls, text: str) -> "CountSnapshot":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SnapshotFormatError(f"snapshot is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "CountSnapshot":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Union[str, os.PathLike]) -> None:
        atomic_write_text(Path(path), self.dumps())


def _count(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise SnapshotFormatError(f"count for {name!r} must be a non-negative integer")
    return value


def atomic_write_text(path: Path, text: str) -> None:
    """Write to a sibling temp file, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


class SnapshotSource:
    """Read-only count source backed by a :class:`CountSnapshot`."""

    def __init__(self, snapshot: CountSnapshot):
        self.snapshot = snapshot

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "SnapshotSource":
        return cls(CountSnapshot.load(path))

    @property
    def m(self) -> int:
        return self.snapshot.m

    @property
    def provider_id(self) -> str:
        return self.snapshot.provider_id

    def hit_count(self, term: TermLike) -> int:
        text = canonicalize(term).text
        try:
            return self.snapshot.terms[text]
        except KeyError:
            raise SnapshotMiss(text) from None

    def pair_count(self, x: TermLike, y: TermLike) -> int:
        key = pair_key(x, y)
        if key in self.snapshot.pairs:
            return self.snapshot.pairs[key]
        if key[0] == key[1]:
            return self.hit_count(key[0])
        raise SnapshotMiss(PAIR_SEPARATOR.join(key))

    def observe(self, x: TermLike, y: TermLike) -> CountObservation:
        return CountObservation(
            fx=self.hit_count(x),
            fy=self.hit_count(y),
            fxy=self.pair_count(x, y),
            m=self.m,
            provider_id=self.provider_id,
            timestamp=self.snapshot.created_at.timestamp(),
        )


def snapshot_from_pairs(
    source: CountSource,
    pairs: Iterable[tuple[TermLike, TermLike]],
    created_at: Optional[datetime] = None,
) -> CountSnapshot:
    """Capture every count needed to recompute NGD for ``pairs`` offline.

    A source error is re-raised with a ``pair`` attribute naming the pair
    that failed.
    """
    snap = CountSnapshot(
        m=source.m,
        provider_id=source.provider_id,
        created_at=created_at or _utcnow(),
    )
    for x, y in pairs:
        x, y = canonicalize(x), canonicalize(y)
        try:
            snap.terms[x.text] = source.hit_count(x)
            snap.terms[y.text] = source.hit_count(y)
            snap.pairs[pair_key(x, y)] = source.pair_count(x, y)
        except ProviderError as exc:
            exc.pair = (x.text, y.text)
            raise
    return snap


@dataclass(frozen=True)
class PairChange:
    x: str
    y: str
    ngd_a: DistanceValue
    ngd_b: DistanceValue
    relative_change: Optional[float]


@dataclass(frozen=True)
class StabilityReport:
    rows: list[PairChange]
    max_change: Optional[float]
    max_pair: Optional[tuple[str, str]]


def relative_change(a: DistanceValue, b: DistanceValue) -> Optional[float]:
    """``|b - a| / |a|``; ``None`` when the two cannot be compared."""
    if a.is_finite and b.is_finite:
        if a.value == 0:
            return 0.0 if b.value == 0 else math.inf
        return abs(b.value - a.value) / abs(a.value)
    if a.is_infinite and b.is_infinite:
        return 0.0
    return None


def compare_snapshots(
    a: CountSnapshot, b: CountSnapshot, pairs: Sequence[tuple[TermLike, TermLike]]
) -> StabilityReport:
    """Per-pair NGD under both snapshots and the largest relative change."""
    sources = (("snapshot A", SnapshotSource(a)), ("snapshot B", SnapshotSource(b)))
    rows = []
    for x, y in pairs:
        x, y = canonicalize(x), canonicalize(y)
        dists = []
        for label, source in sources:
            try:
                dists.append(ngd(source.observe(x, y)))
            except SnapshotMiss as exc:
                raise CoverageError(exc.key, label) from exc
        rows.append(PairChange(x.text, y.text, dists[0], dists[1], relative_change(*dists)))
    max_change, max_pair = None, None
    for row in rows:
        if row.relative_change is not None and (
            max_change is None or row.relative_change > max_change
        ):
            max_change, max_pair = row.relative_change, (row.x, row.y)
    return StabilityReport(rows, max_change, max_pair)
