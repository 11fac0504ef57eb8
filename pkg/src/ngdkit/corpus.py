"""Document-level inverted index over a local text corpus.

Every document plays the part of one web page: a term's hit count is the
number of documents that contain it at least once, never its token
frequency. Multi-token terms match as contiguous phrases.
"""
from __future__ import annotations

import hashlib
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from ngdkit.metric import CountObservation, TermLike, canonicalize, tokenize, TermQuery

logger = logging.getLogger(__name__)


class EmptyCorpusError(ValueError):
    """The corpus source produced no documents."""


@dataclass(frozen=True)
class TokenizerConfig:
    min_token_length: int = 1

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


@dataclass(frozen=True)
class Document:
    doc_id: int
    tokens: tuple[str, ...]


@dataclass
class SkipReport:
    """Inputs dropped during a build, with the reason for each."""

    skipped: list[tuple[str, str]] = field(default_factory=list)

    def add(self, name: str, reason: str) -> None:
        logger.warning("skipping %s: %s", name, reason)
        self.skipped.append((name, reason))

    def __len__(self) -> int:
        return len(self.skipped)


class CorpusIndex:
    """Immutable positional index answering document and pair counts.

    Build one with :func:`build_index`, :meth:`from_directory` or
    :meth:`from_lines`. Queries are safe from any number of threads.
    """

    def __init__(
        self,
        documents: list[Document],
        fingerprint: str,
        skip_report: Optional[SkipReport] = None,
        tokenizer: TokenizerConfig = TokenizerConfig(),
    ):
        if not documents:
            raise EmptyCorpusError("corpus contains no documents")
        self._documents = tuple(documents)
        self.fingerprint = fingerprint
        self.skip_report = skip_report or SkipReport()
        self.tokenizer = tokenizer
        positions: dict[str, dict[int, list[int]]] = {}
        for doc in self._documents:
            for pos, tok in enumerate(doc.tokens):
                positions.setdefault(tok, {}).setdefault(doc.doc_id, []).append(pos)
        self._positions: dict[str, dict[int, frozenset[int]]] = {
            tok: {d: frozenset(p) for d, p in docs.items()} for tok, docs in positions.items()
        }
        self._postings: dict[str, frozenset[int]] = {
            tok: frozenset(docs) for tok, docs in self._positions.items()
        }
        self._phrase_cache: dict[tuple[str, ...], frozenset[int]] = {}
        self._lock = threading.Lock()

    @property
    def m(self) -> int:
        return len(self._documents)

    @property
    def documents(self) -> tuple[Document, ...]:
        return self._documents

    @property
    def provider_id(self) -> str:
        return f"local:{self.fingerprint}"

    def vocabulary(self) -> dict[str, int]:
        """Map every single token to its document frequency."""
        return {tok: len(docs) for tok, docs in self._postings.items()}

    def doc_set(self, term: TermLike) -> frozenset[int]:
        """Ids of the documents containing ``term`` as a contiguous phrase."""
        tokens = canonicalize(term).tokens
        if len(tokens) == 1:
            return self._postings.get(tokens[0], frozenset())
        cached = self._phrase_cache.get(tokens)
        if cached is not None:
            return cached
        result = self._match_phrase(tokens)
        with self._lock:
            self._phrase_cache[tokens] = result
        return result

    def _match_phrase(self, tokens: tuple[str, ...]) -> frozenset[int]:
        try:
            per_token = [self._positions[tok] for tok in tokens]
        except KeyError:
            return frozenset()
        candidates = set(per_token[0])
        for docs in per_token[1:]:
            candidates.intersection_update(docs)
        matched = set()
        for doc_id in candidates:
            starts = per_token[0][doc_id]
            for i, docs in enumerate(per_token[1:], start=1):
                starts = {p for p in starts if p + i in docs[doc_id]}
                if not starts:
                    break
            if starts:
                matched.add(doc_id)
        return frozenset(matched)

    def hit_count(self, term: TermLike) -> int:
        return len(self.doc_set(term))

    def pair_count(self, x: TermLike, y: TermLike) -> int:
        """Documents containing both terms; symmetric in its arguments."""
        return len(self.doc_set(x) & self.doc_set(y))

    def observe(self, x: TermLike, y: TermLike) -> CountObservation:
        return CountObservation(
            fx=self.hit_count(x),
            fy=self.hit_count(y),
            fxy=self.pair_count(x, y),
            m=self.m,
            provider_id=self.provider_id,
        )

    @classmethod
    def from_directory(
        cls, root: Union[str, os.PathLike], tokenizer: TokenizerConfig = TokenizerConfig()
    ) -> "CorpusIndex":
        """Index every regular file under ``root``, one document per file.

        Files are visited in sorted path order so document ids are stable.
        Files that are not valid UTF-8 are skipped and listed in the
        skip report.
        """
        root = Path(root)
        if not root.is_dir():
            raise FileNotFoundError(f"not a directory: {root}")
        paths = sorted(p for p in root.rglob("*") if p.is_file())
        skips = SkipReport()
        texts = []
        for path in paths:
            try:
                texts.append(path.read_bytes().decode("utf-8"))
            except UnicodeDecodeError:
                skips.add(str(path.relative_to(root)), "not valid UTF-8")
            except OSError as exc:
                skips.add(str(path.relative_to(root)), f"unreadable: {exc.strerror}")
        return build_index(texts, tokenizer, skips)

    @classmethod
    def from_lines(
        cls, path: Union[str, os.PathLike], tokenizer: TokenizerConfig = TokenizerConfig()
    ) -> "CorpusIndex":
        """Index a file holding one UTF-8 document per line."""
        data = Path(path).read_bytes()
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        skips = SkipReport()
        texts = []
        for lineno, raw in enumerate(lines, start=1):
            try:
                texts.append(raw.decode("utf-8").rstrip("\r"))
            except UnicodeDecodeError:
                skips.add(f"line {lineno}", "not valid UTF-8")
        return build_index(texts, tokenizer, skips)


def build_index(
    texts: Iterable[str],
    tokenizer: TokenizerConfig = TokenizerConfig(),
    skip_report: Optional[SkipReport] = None,
) -> CorpusIndex:
    """Build a :class:`CorpusIndex` from raw document texts, in order."""
    digest = hashlib.sha256()
    documents = []
    for doc_id, text in enumerate(texts):
        raw = text.encode("utf-8")
        digest.update(len(raw).to_bytes(8, "big"))
        digest.update(raw)
        documents.append(Document(doc_id, tuple(tokenize(text, tokenizer.min_token_length))))
    if not documents:
        raise EmptyCorpusError("corpus contains no documents")
    digest.update(tokenizer.min_token_length.to_bytes(4, "big"))
    return CorpusIndex(documents, digest.hexdigest()[:16], skip_report, tokenizer)


def load_corpus(
    path: Union[str, os.PathLike], tokenizer: TokenizerConfig = TokenizerConfig()
) -> CorpusIndex:
    """Directory of files, or a single line-delimited file."""
    path = Path(path)
    if path.is_dir():
        return CorpusIndex.from_directory(path, tokenizer)
    if path.is_file():
        return CorpusIndex.from_lines(path, tokenizer)
    raise FileNotFoundError(f"no such corpus: {path}")


def frequent_terms(index: CorpusIndex, min_count: int = 5) -> list[TermQuery]:
    """Single-token terms with document frequency of at least ``min_count``, sorted."""
    vocab: Mapping[str, int] = index.vocabulary()
    return [TermQuery((tok,)) for tok in sorted(vocab) if vocab[tok] >= min_count]

