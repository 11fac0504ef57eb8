"""Count sources: local index, snapshot files, and a remote search endpoint."""
from ngdkit.providers.base import (
    CountSource,
    CoverageError,
    NetworkError,
    ParseError,
    ProviderError,
    RateLimited,
    SnapshotMiss,
    provider_observe,
)
from ngdkit.providers.remote import (
    CountCache,
    ExtractionRule,
    RateLimiter,
    RemoteEndpointConfig,
    RemoteSource,
    build_remote_query,
)
from ngdkit.providers.snapshot import (
    CountSnapshot,
    PairChange,
    SnapshotFormatError,
    SnapshotSource,
    StabilityReport,
    compare_snapshots,
    pair_key,
    snapshot_from_pairs,
)

__all__ = [
    "CountCache",
    "CountSnapshot",
    "CountSource",
    "CoverageError",
    "ExtractionRule",
    "NetworkError",
    "PairChange",
    "ParseError",
    "ProviderError",
    "RateLimited",
    "RateLimiter",
    "RemoteEndpointConfig",
    "RemoteSource",
    "SnapshotFormatError",
    "SnapshotMiss",
    "SnapshotSource",
    "StabilityReport",
    "build_remote_query",
    "compare_snapshots",
    "pair_key",
    "provider_observe",
    "snapshot_from_pairs",
]
