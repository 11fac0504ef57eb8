"""Count-source protocol and the errors sources raise."""
from __future__ import annotations

from typing import Protocol, runtime_checkable

from ngdkit.metric import CountObservation, TermLike


class ProviderError(Exception):
    """A count source could not answer a query."""

    def __init__(self, message: str, query: str = ""):
        super().__init__(message)
        self.query = query


class SnapshotMiss(ProviderError):
    """A term or pair is absent from a snapshot."""

    def __init__(self, key: str):
        super().__init__(f"snapshot has no entry for {key!r}", key)
        self.key = key


class CoverageError(ProviderError):
    """A comparison needs a key one of the snapshots does not cover."""

    def __init__(self, key: str, snapshot: str = ""):
        where = f" in {snapshot}" if snapshot else ""
        super().__init__(f"missing {key!r}{where}", key)
        self.key = key


class NetworkError(ProviderError):
    pass


class ParseError(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


@runtime_checkable
class CountSource(Protocol):
    """Anything that answers document counts for terms and term pairs."""

    @property
    def m(self) -> int: ...

    @property
    def provider_id(self) -> str: ...

    def hit_count(self, term: TermLike) -> int: ...

    def pair_count(self, x: TermLike, y: TermLike) -> int: ...

    def observe(self, x: TermLike, y: TermLike) -> CountObservation: ...


def provider_observe(source: CountSource, x: TermLike, y: TermLike) -> CountObservation:
    return source.observe(x, y)
