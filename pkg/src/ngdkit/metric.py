"""Normalized Google Distance and the operations built directly on it.

Distances are computed from document counts: ``fx`` and ``fy`` are the
number of documents containing each term, ``fxy`` the number containing
both, and ``m`` the number of documents in the index. A distance of 0
means the terms are used interchangeably, 1 means statistically
independent, and infinity means they never appear together.
"""
from __future__ import annotations

import enum
import logging
import math
import re
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Union

if TYPE_CHECKING:
    from ngdkit.providers import CountSource

logger = logging.getLogger(__name__)

MAX_PHRASE_TOKENS = 8
DEFAULT_NORMALIZATION = 0.7

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str, min_token_length: int = 1) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphanumeric run."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= min_token_length]


@dataclass(frozen=True, order=True)
class TermQuery:
    """A search term of one to eight lowercase tokens, matched as a phrase."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        if not tokens:
            raise ValueError("term must contain at least one token")
        if len(tokens) > MAX_PHRASE_TOKENS:
            raise ValueError(
                f"term has {len(tokens)} tokens; at most {MAX_PHRASE_TOKENS} allowed"
            )
        for tok in tokens:
            if not tok or tok != tok.lower() or any(c.isspace() for c in tok):
                raise ValueError(f"invalid token {tok!r}")

    @classmethod
    def parse(cls, text: str) -> "TermQuery":
        return cls(tuple(tokenize(text)))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def __str__(self) -> str:
        return self.text

    def __len__(self) -> int:
        return len(self.tokens)


TermLike = Union[str, TermQuery]


def canonicalize(term: TermLike) -> TermQuery:
    """Return the canonical :class:`TermQuery` for a string or query.

    Idempotent: canonicalizing a canonical query returns an equal query.
    """
    if isinstance(term, TermQuery):
        return TermQuery.parse(term.text)
    return TermQuery.parse(term)


@dataclass(frozen=True)
class CountObservation:
    """Counts for one term pair from one count source at one moment."""

    fx: int
    fy: int
    fxy: int
    m: int
    provider_id: str = ""
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"index size must be >= 1, got {self.m}")
        for name in ("fx", "fy", "fxy"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def locally_consistent(self) -> bool:
        return self.fxy <= min(self.fx, self.fy) and max(self.fx, self.fy) <= self.m

    def swapped(self) -> "CountObservation":
        return CountObservation(
            self.fy, self.fx, self.fxy, self.m, self.provider_id, self.timestamp
        )


class Kind(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    UNDEFINED = "undefined"


class Anomaly(enum.Enum):
    NEGATIVE_NUMERATOR = "negative-numerator"
    INCONSISTENT_COUNTS = "inconsistent-counts"
    DEGENERATE_DENOMINATOR = "degenerate-denominator"


UNKNOWN_TERM = "unknown term"
DEGENERATE_DENOMINATOR = "degenerate denominator"


@dataclass(frozen=True)
class DistanceValue:
    kind: Kind
    value: Optional[float] = None
    reason: Optional[str] = None
    anomaly: Optional[Anomaly] = None

    @classmethod
    def finite(cls, value: float, anomaly: Optional[Anomaly] = None) -> "DistanceValue":
        return cls(Kind.FINITE, float(value), None, anomaly)

    @classmethod
    def infinite(cls, anomaly: Optional[Anomaly] = None) -> "DistanceValue":
        return cls(Kind.INFINITE, None, None, anomaly)

    @classmethod
    def undefined(cls, reason: str, anomaly: Optional[Anomaly] = None) -> "DistanceValue":
        return cls(Kind.UNDEFINED, None, reason, anomaly)

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    @property
    def is_infinite(self) -> bool:
        return self.kind is Kind.INFINITE

    @property
    def is_undefined(self) -> bool:
        return self.kind is Kind.UNDEFINED

    def as_float(self) -> float:
        """Finite value, ``inf``, or ``nan`` for undefined distances."""
        if self.kind is Kind.FINITE:
            return self.value
        if self.kind is Kind.INFINITE:
            return math.inf
        return math.nan

    def __str__(self) -> str:
        if self.kind is Kind.FINITE:
            return f"{self.value:.6f}"
        if self.kind is Kind.INFINITE:
            return "inf"
        return f"undefined ({self.reason})"


def _log_ratio(a: int, b: int) -> float:
    # exact integer subtraction then one correctly rounded division keeps
    # ratios that are equal as rationals bit-identical after the log
    return math.log1p((a - b) / b)


def ngd(obs: CountObservation) -> DistanceValue:
    """Normalized Google Distance of one count observation.

    Unseen terms give an undefined distance, terms that never co-occur an
    infinite one. Inconsistent counts are evaluated as-is and flagged.
    """
    fx, fy, fxy, m = obs.fx, obs.fy, obs.fxy, obs.m
    if fx == 0 or fy == 0:
        return DistanceValue.undefined(UNKNOWN_TERM)
    inconsistent = not obs.locally_consistent
    if fxy == 0:
        return DistanceValue.infinite(Anomaly.INCONSISTENT_COUNTS if inconsistent else None)
    lo, hi = min(fx, fy), max(fx, fy)
    if lo == m:
        return DistanceValue.undefined(DEGENERATE_DENOMINATOR, Anomaly.DEGENERATE_DENOMINATOR)
    numerator = _log_ratio(hi, fxy)
    denominator = _log_ratio(m, lo)
    anomaly = None
    if numerator < 0:
        anomaly = Anomaly.NEGATIVE_NUMERATOR
    elif inconsistent:
        anomaly = Anomaly.INCONSISTENT_COUNTS
    return DistanceValue.finite(numerator / denominator, anomaly)


def triangle_difference(
    d_xy: DistanceValue, d_yz: DistanceValue, d_xz: DistanceValue
) -> Optional[float]:
    """``d_xy + d_yz - d_xz``, or ``None`` unless all three are finite.

    A negative result means the path through the mediator is shorter than
    the direct distance, i.e. the triangle inequality fails.
    """
    if not (d_xy.is_finite and d_yz.is_finite and d_xz.is_finite):
        return None
    return d_xy.value + d_yz.value - d_xz.value


def shortest_path(
    direct: DistanceValue, legs: Iterable[tuple[DistanceValue, DistanceValue]]
) -> DistanceValue:
    """Minimum of ``direct`` and every two-leg path in ``legs``.

    Infinite legs count as +inf. Paths with an undefined leg are skipped;
    an undefined direct distance is returned unchanged.
    """
    if direct.is_undefined:
        return direct
    best = direct.as_float()
    via_path = False
    for first, second in legs:
        if first.is_undefined or second.is_undefined:
            continue
        total = first.as_float() + second.as_float()
        if total < best:
            best = total
            via_path = True
    if not via_path:
        return direct
    return DistanceValue.finite(best)


def repaired_ngd(
    x: TermLike, z: TermLike, mediators: Iterable[TermLike], provider: "CountSource"
) -> DistanceValue:
    """Direct NGD between ``x`` and ``z`` shortened through any one mediator."""
    x, z = canonicalize(x), canonicalize(z)
    if x == z:
        raise ValueError("x and z must differ")
    mediators = [canonicalize(y) for y in mediators]
    if x in mediators or z in mediators:
        raise ValueError("mediators must exclude x and z")
    direct = ngd(provider.observe(x, z))
    if direct.is_undefined:
        return direct
    legs = []
    for y in mediators:
        first = ngd(provider.observe(x, y))
        second = ngd(provider.observe(y, z))
        if first.is_undefined or second.is_undefined:
            logger.warning("skipping mediator %r: undefined leg", y.text)
            continue
        legs.append((first, second))
    return shortest_path(direct, legs)


def calibrate(d: DistanceValue, normalization: float = DEFAULT_NORMALIZATION) -> DistanceValue:
    """Divide a finite distance by ``normalization``; others pass through."""
    if not normalization > 0:
        raise ValueError(f"normalization must be > 0, got {normalization}")
    if not d.is_finite:
        return d
    return DistanceValue.finite(d.value / normalization, d.anomaly)
