"""Hit counts from a configurable HTTP search endpoint.

The endpoint is described by a JSON config file, e.g.::

    {
      "url_template": "http://localhost:8080/search?q={query}",
      "index_size": 25000000000,
      "extract": {"json_pointer": "/total"},
      "requests_per_second": 2,
      "max_retries": 3,
      "timeout": 10,
      "headers": {"X-Api-Key": "..."},
      "cache_path": "counts-cache.json"
    }

``extract`` may instead be ``{"regex": "About ([0-9,]+) results", "group": 1}``.
The library itself never hardcodes a search engine URL.
"""
from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union
from urllib.parse import quote

import requests

from ngdkit.metric import CountObservation, TermLike, canonicalize
from ngdkit.providers.base import NetworkError, ParseError, RateLimited
from ngdkit.providers.snapshot import atomic_write_text

logger = logging.getLogger(__name__)

QUERY_PLACEHOLDER = "{query}"


def build_remote_query(x: TermLike, y: Optional[TermLike] = None) -> str:
    """Percent-encoded query: one quoted phrase, or two joined by a space."""
    phrases = [f'"{canonicalize(x).text}"']
    if y is not None:
        phrases.append(f'"{canonicalize(y).text}"')
    return quote(" ".join(phrases), safe="")


def resolve_json_pointer(document: Any, pointer: str) -> Any:
    """Follow an RFC 6901 pointer such as ``/data/0/count``."""
    if pointer == "":
        return document
    if not pointer.startswith("/"):
        raise ValueError(f"JSON pointer must start with '/': {pointer!r}")
    node = document
    for part in pointer[1:].split("/"):
        part = part.replace("~1", "/").replace("~0", "~")
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node[part]
    return node


@dataclass(frozen=True)
class ExtractionRule:
    """How to pull a hit count out of a response body."""

    json_pointer: Optional[str] = None
    regex: Optional[str] = None
    group: int = 1

    def __post_init__(self):
        if (self.json_pointer is None) == (self.regex is None):
            raise ValueError("extraction rule needs exactly one of json_pointer or regex")
        if self.regex is not None:
            re.compile(self.regex)

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionRule":
        return cls(data.get("json_pointer"), data.get("regex"), int(data.get("group", 1)))

    def extract(self, body: str) -> int:
        if self.json_pointer is not None:
            try:
                value = resolve_json_pointer(json.loads(body), self.json_pointer)
            except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as exc:
                raise ValueError(f"cannot resolve {self.json_pointer!r}: {exc}") from exc
        else:
            match = re.search(self.regex, body)
            if match is None:
                raise ValueError(f"pattern {self.regex!r} did not match")
            value = match.group(self.group)
        return _parse_count(value)


def _parse_count(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"not a count: {value!r}")
    if isinstance(value, int):
        count = value
    elif isinstance(value, float) and value.is_integer():
        count = int(value)
    elif isinstance(value, str):
        cleaned = re.sub(r"[,_\s]", "", value)
        if not cleaned.isdigit():
            raise ValueError(f"not a count: {value!r}")
        count = int(cleaned)
    else:
        raise ValueError(f"not a count: {value!r}")
    if count < 0:
        raise ValueError(f"negative count: {value!r}")
    return count


@dataclass(frozen=True)
class RemoteEndpointConfig:
    url_template: str
    extraction: ExtractionRule
    index_size: int
    requests_per_second: float = 1.0
    max_retries: int = 3
    timeout: float = 10.0
    backoff: float = 0.5
    headers: dict[str, str] = field(default_factory=dict)
    cache_path: Optional[str] = None
    provider_id: Optional[str] = None

    def __post_init__(self):
        if self.url_template.count(QUERY_PLACEHOLDER) != 1:
            raise ValueError("url_template must contain exactly one '{query}'")
        if not self.requests_per_second > 0:
            raise ValueError("requests_per_second must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.index_size < 1:
            raise ValueError("index_size must be >= 1")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "RemoteEndpointConfig":
        cache_path = data.get("cache_path")
        if cache_path is not None and base_dir is not None:
            cache_path = str(base_dir / cache_path)
        try:
            return cls(
                url_template=data["url_template"],
                extraction=ExtractionRule.from_dict(data["extract"]),
                index_size=int(data["index_size"]),
                requests_per_second=float(data.get("requests_per_second", 1.0)),
                max_retries=int(data.get("max_retries", 3)),
                timeout=float(data.get("timeout", 10.0)),
                backoff=float(data.get("backoff", 0.5)),
                headers=dict(data.get("headers", {})),
                cache_path=cache_path,
                provider_id=data.get("provider_id"),
            )
        except KeyError as exc:
            raise ValueError(f"remote config missing field {exc.args[0]!r}") from None

    @classmethod
    def from_file(cls, path: Union[str, os.PathLike]) -> "RemoteEndpointConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), path.parent)

    def url_for(self, query: str) -> str:
        return self.url_template.replace(QUERY_PLACEHOLDER, query)


class RateLimiter:
    """Spaces call starts at least ``1 / rate`` seconds apart, across threads."""

    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next = None

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            slot = now if self._next is None else max(now, self._next)
            self._next = slot + self.interval
        if slot > now:
            self._sleep(slot - now)


class CountCache:
    """Hit counts keyed by ``(provider_id, query)``, optionally on disk.

    Entries never expire. Every write rewrites the whole file through a
    temp file and an atomic rename, so a crash leaves the previous state.
    """

    def __init__(self, path: Optional[Union[str, os.PathLike]] = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, dict[str, int]] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            self._entries = {pid: dict(queries) for pid, queries in data.items()}

    def get(self, provider_id: str, query: str) -> Optional[int]:
        return self._entries.get(provider_id, {}).get(query)

    def put(self, provider_id: str, query: str, count: int) -> None:
        with self._lock:
            self._entries.setdefault(provider_id, {})[query] = count
            if self.path is not None:
                text = json.dumps(self._entries, indent=2, sort_keys=True, ensure_ascii=False)
                atomic_write_text(self.path, text + "\n")

    def __len__(self) -> int:
        return sum(len(q) for q in self._entries.values())


class RemoteSource:
    """Count source that queries an HTTP endpoint, with caching and rate limiting."""

    def __init__(
        self,
        config: RemoteEndpointConfig,
        cache: Optional[CountCache] = None,
        session: Optional[requests.Session] = None,
    ):
        self.config = config
        self.cache = cache if cache is not None else CountCache(config.cache_path)
        self.session = session or requests.Session()
        self.limiter = RateLimiter(config.requests_per_second)
        self.upstream_requests = 0
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()

    @property
    def m(self) -> int:
        return self.config.index_size

    @property
    def provider_id(self) -> str:
        return self.config.provider_id or f"remote:{self.config.url_template}"

    def hit_count(self, term: TermLike) -> int:
        return self._count(build_remote_query(term))

    def pair_count(self, x: TermLike, y: TermLike) -> int:
        a, b = sorted((canonicalize(x).text, canonicalize(y).text))
        if a == b:
            return self.hit_count(a)
        return self._count(build_remote_query(a, b))

    def observe(self, x: TermLike, y: TermLike) -> CountObservation:
        return CountObservation(
            fx=self.hit_count(x),
            fy=self.hit_count(y),
            fxy=self.pair_count(x, y),
            m=self.m,
            provider_id=self.provider_id,
        )

    def _key_lock(self, query: str) -> threading.Lock:
        with self._key_locks_guard:
            return self._key_locks.setdefault(query, threading.Lock())

    def _count(self, query: str) -> int:
        cached = self.cache.get(self.provider_id, query)
        if cached is not None:
            return cached
        # one in-flight fetch per query; concurrent callers wait and reuse it
        with self._key_lock(query):
            cached = self.cache.get(self.provider_id, query)
            if cached is not None:
                return cached
            count = self._fetch(query)
            self.cache.put(self.provider_id, query, count)
            return count

    def _fetch(self, query: str) -> int:
        url = self.config.url_for(query)
        delay = self.config.backoff
        for attempt in range(self.config.max_retries + 1):
            last = attempt == self.config.max_retries
            self.limiter.acquire()
            with self._key_locks_guard:
                self.upstream_requests += 1
            try:
                response = self.session.get(
                    url, headers=self.config.headers, timeout=self.config.timeout
                )
            except requests.RequestException as exc:
                if last:
                    raise NetworkError(f"request failed: {exc}", query) from exc
                logger.warning("request for %s failed (%s); retrying", query, exc)
            else:
                status = response.status_code
                if 200 <= status < 300:
                    try:
                        return self.config.extraction.extract(response.text)
                    except ValueError as exc:
                        raise ParseError(str(exc), query) from exc
                if status == 429:
                    if last:
                        raise RateLimited(f"HTTP 429 after {attempt + 1} attempts", query)
                    delay = max(delay, _retry_after(response))
                elif status >= 500 and not last:
                    logger.warning("HTTP %d for %s; retrying", status, query)
                else:
                    raise NetworkError(f"HTTP {status}", query)
            time.sleep(delay)
            delay *= 2
        raise AssertionError("unreachable")


def _retry_after(response: requests.Response) -> float:
    try:
        return float(response.headers.get("Retry-After", 0))
    except ValueError:
        return 0.0
