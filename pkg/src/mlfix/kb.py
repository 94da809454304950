"""Local best-practice retrieval: a BM25 index over curated documents plus a
pluggable web-search client interface (shipped implementation is an offline
stub; live connectors are extension points)."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol

BM25_K1 = 1.2
BM25_B = 0.75

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class KBDocument:
    doc_id: str
    title: str
    body: str
    tags: tuple[str, ...] = ()
    source: str = "curated"

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError(f"document {self.doc_id!r} has an empty body")
        object.__setattr__(self, "tags", tuple(self.tags))

    @classmethod
    def from_dict(cls, data: Mapping) -> "KBDocument":
        return cls(
            doc_id=str(data["doc_id"]),
            title=str(data.get("title", "")),
            body=str(data["body"]),
            tags=tuple(str(t) for t in data.get("tags", ())),
            source=str(data.get("source", "curated")),
        )


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    score: float
    snippet: str


class DuplicateDocumentError(ValueError):
    pass


class KBIndex:
    """Immutable BM25 index; safe for concurrent searches."""

    def __init__(self, documents: Iterable[KBDocument]):
        self.documents: dict[str, KBDocument] = {}
        self._postings: dict[str, dict[str, int]] = {}
        self._doc_lengths: dict[str, int] = {}
        for doc in documents:
            if doc.doc_id in self.documents:
                raise DuplicateDocumentError(f"duplicate doc_id {doc.doc_id!r}")
            self.documents[doc.doc_id] = doc
            tokens = tokenize(f"{doc.title} {doc.body} {' '.join(doc.tags)}")
            self._doc_lengths[doc.doc_id] = len(tokens)
            for token in tokens:
                self._postings.setdefault(token, {}).setdefault(doc.doc_id, 0)
                self._postings[token][doc.doc_id] += 1
        n = len(self.documents)
        self._avg_length = (sum(self._doc_lengths.values()) / n) if n else 0.0

    def __len__(self) -> int:
        return len(self.documents)

    def search(self, query: str, k: int = 3) -> list[SearchHit]:
        """Top-k BM25 hits, ties broken by doc_id; zero scores are dropped."""
        if k < 1:
            raise ValueError("k must be >= 1")
        terms = tokenize(query)
        if not terms or not self.documents:
            return []
        n = len(self.documents)
        scores: dict[str, float] = {}
        for term in terms:
            postings = self._postings.get(term)
            if not postings:
                continue
            df = len(postings)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            for doc_id, tf in postings.items():
                norm = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * self._doc_lengths[doc_id] / self._avg_length)
                scores[doc_id] = scores.get(doc_id, 0.0) + idf * (tf * (BM25_K1 + 1.0)) / norm
        ranked = sorted(
            ((doc_id, score) for doc_id, score in scores.items() if score > 0.0),
            key=lambda item: (-item[1], item[0]),
        )
        return [
            SearchHit(doc_id=doc_id, score=score, snippet=_snippet(self.documents[doc_id], terms))
            for doc_id, score in ranked[:k]
        ]

    def with_documents(self, extra: Iterable[KBDocument]) -> "KBIndex":
        """New index extended with session-scoped documents; self is unchanged."""
        merged = list(self.documents.values())
        known = set(self.documents)
        for doc in extra:
            if doc.doc_id not in known:
                merged.append(doc)
                known.add(doc.doc_id)
        return KBIndex(merged)


def _snippet(doc: KBDocument, terms: list[str]) -> str:
    """First passage (sentence-ish) containing any query term."""
    passages = re.split(r"(?<=[.!?])\s+", doc.body)
    term_set = set(terms)
    for passage in passages:
        if term_set & set(tokenize(passage)):
            return passage.strip()[:240]
    return doc.body[:240].strip()


def index(documents: Iterable[KBDocument]) -> KBIndex:
    return KBIndex(documents)


def search(idx: KBIndex, query: str, k: int = 3) -> list[SearchHit]:
    return idx.search(query, k)


class SearchClient(Protocol):
    """Web-search connector contract; implementations fetch best-practice
    documents for a query."""

    def search(self, query: str) -> list[KBDocument]: ...


@dataclass
class StubSearchClient:
    """Offline stand-in for a live web-search connector.

    Replays fixture documents keyed by exact query; unknown queries yield an
    empty result rather than an error.
    """

    fixtures: dict[str, list[KBDocument]] = field(default_factory=dict)

    def search(self, query: str) -> list[KBDocument]:
        docs = self.fixtures.get(query, [])
        return [
            KBDocument(doc_id=d.doc_id, title=d.title, body=d.body, tags=d.tags, source="web") for d in docs
        ]


def web_search(client: SearchClient, query: str) -> list[KBDocument]:
    """Fetch web documents for a query; results are session-scoped and must be
    merged via ``KBIndex.with_documents``, never persisted."""
    return list(client.search(query))


def load_corpus(path: str | Path | None = None) -> list[KBDocument]:
    """Load a corpus directory of one-JSON-object-per-file documents; with no
    path, the packaged curated corpus is used."""
    if path is None:
        root = resources.files("mlfix").joinpath("data/kb")
        entries = sorted(root.iterdir(), key=lambda e: e.name)
        raw = [json.loads(e.read_text(encoding="utf-8")) for e in entries if e.name.endswith(".json")]
    else:
        directory = Path(path)
        raw = [
            json.loads(p.read_text(encoding="utf-8"))
            for p in sorted(directory.glob("*.json"))
        ]
    return [KBDocument.from_dict(item) for item in raw]


def default_index(path: str | Path | None = None) -> KBIndex:
    return KBIndex(load_corpus(path))
