"""Character memory: hashed embeddings, hybrid retrieval, persistence.

A MemoryStore indexes documents by their factual ``content`` but surfaces
the first-person ``monologue`` rewrite to prompts. Retrieval blends three
channels (embedding cosine, tf-idf keyword overlap, recency decay), each
min-max normalized over the store, then averaged with equal weight. When a
channel is constant across the store every document gets 0.5 for it, so an
all-tie query scores 0.5 overall. Ties break newest-first, then by id.

The embedder is a signed feature-hashed bag of words over a fixed 64-bit
FNV-1a hash, so vectors are identical across processes and platforms.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

import numpy as np

from .errors import ValidationError
from .kernels import hashed_counts
from .script import CharacterProfile, RelationDoc, ScriptSetting

EMBED_DIM = 256
RECENCY_DECAY = 0.995
SCORE_WEIGHTS = (1.0, 1.0, 1.0)

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs."""
    return _TOKEN.findall(text.lower())


class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedEmbedder:
    """Deterministic bag-of-words embedder using signed feature hashing."""

    def __init__(self, dim: int = EMBED_DIM):
        if dim < 1:
            raise ValidationError("embedder dim must be positive")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.asarray(hashed_counts(tokenize(text), self.dim), dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


@dataclass(frozen=True)
class MemoryDocument:
    """One remembered fact with its speakable first-person form."""

    id: str
    content: str
    monologue: str
    created_tick: int
    kind: str = "summary"


@dataclass(frozen=True)
class RetrievalScore:
    """Normalized channel scores for one retrieved document."""

    doc_id: str
    embedding: float
    tfidf: float
    recency: float
    combined: float


def surface_text(doc: MemoryDocument, monologue_enabled: bool = True) -> str:
    """The text shown to prompts: the monologue unless disabled or absent."""
    if monologue_enabled and doc.monologue.strip():
        return doc.monologue
    return doc.content


def _normalize(raw: list[float]) -> list[float]:
    lo, hi = min(raw), max(raw)
    if hi == lo:
        return [0.5] * len(raw)
    span = hi - lo
    return [(value - lo) / span for value in raw]


class MemoryStore:
    """Append-only document store with hybrid retrieval."""

    def __init__(self, embedder: Embedder, owner: str = ""):
        self.embedder = embedder
        self.owner = owner
        self.documents: list[MemoryDocument] = []
        self._vectors: list[np.ndarray] = []
        self._token_counts: list[Counter] = []
        self._next_id = 1

    def __len__(self) -> int:
        return len(self.documents)

    def add(
        self,
        content: str,
        monologue: str,
        created_tick: int,
        kind: str = "summary",
        doc_id: str | None = None,
    ) -> MemoryDocument:
        if not content.strip():
            raise ValidationError("memory content must be non-empty")
        if doc_id is None:
            doc_id = "m-%04d" % self._next_id
        self._next_id += 1
        doc = MemoryDocument(
            id=doc_id,
            content=content,
            monologue=monologue,
            created_tick=created_tick,
            kind=kind,
        )
        self.documents.append(doc)
        self._vectors.append(self.embedder.embed(content))
        self._token_counts.append(Counter(tokenize(content)))
        return doc

    def retrieve(
        self, query: str, k: int, now_tick: int
    ) -> list[tuple[MemoryDocument, RetrievalScore]]:
        """Top ``k`` documents for ``query`` as (document, score) pairs."""
        if k <= 0 or not self.documents:
            return []
        query_vec = self.embedder.embed(query)
        query_terms = sorted(set(tokenize(query)))
        n_docs = len(self.documents)
        doc_freq = {
            term: sum(1 for counts in self._token_counts if term in counts)
            for term in query_terms
        }

        raw_embedding = [float(np.dot(query_vec, vec)) for vec in self._vectors]
        raw_tfidf = []
        for counts in self._token_counts:
            score = 0.0
            for term in query_terms:
                tf = counts.get(term, 0)
                if tf:
                    idf = math.log((n_docs + 1) / (doc_freq[term] + 1)) + 1.0
                    score += tf * idf
            raw_tfidf.append(score)
        raw_recency = [
            RECENCY_DECAY ** max(0, now_tick - doc.created_tick) for doc in self.documents
        ]

        norm_e = _normalize(raw_embedding)
        norm_t = _normalize(raw_tfidf)
        norm_r = _normalize(raw_recency)
        weight_sum = sum(SCORE_WEIGHTS)
        scored = []
        for i, doc in enumerate(self.documents):
            combined = (
                SCORE_WEIGHTS[0] * norm_e[i]
                + SCORE_WEIGHTS[1] * norm_t[i]
                + SCORE_WEIGHTS[2] * norm_r[i]
            ) / weight_sum
            scored.append(
                (
                    doc,
                    RetrievalScore(
                        doc_id=doc.id,
                        embedding=norm_e[i],
                        tfidf=norm_t[i],
                        recency=norm_r[i],
                        combined=combined,
                    ),
                )
            )
        scored.sort(key=lambda pair: (-pair[1].combined, -pair[0].created_tick, pair[0].id))
        return scored[:k]

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for doc in self.documents:
                handle.write(
                    json.dumps(
                        {
                            "id": doc.id,
                            "content": doc.content,
                            "monologue": doc.monologue,
                            "created_tick": doc.created_tick,
                            "kind": doc.kind,
                        },
                        ensure_ascii=False,
                    )
                )
                handle.write("\n")

    @classmethod
    def load_jsonl(
        cls, path: str | Path, embedder: Embedder, owner: str = ""
    ) -> "MemoryStore":
        store = cls(embedder, owner=owner)
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                store.add(
                    content=obj["content"],
                    monologue=obj.get("monologue", ""),
                    created_tick=int(obj.get("created_tick", 0)),
                    kind=obj.get("kind", "summary"),
                    doc_id=obj.get("id"),
                )
        return store


def _memory_of(store: "MemoryStore | CharacterStore", owner: str) -> MemoryStore:
    memory = store.memory if isinstance(store, CharacterStore) else store
    if memory.owner and owner and memory.owner != owner:
        raise ValidationError(
            "store belongs to %r, not %r" % (memory.owner, owner)
        )
    return memory


def add_memory(
    store: "MemoryStore | CharacterStore",
    owner: str,
    content: str,
    monologue: str,
    tick: int,
) -> MemoryDocument:
    """Persist one document under ``owner``; both text forms required."""
    if not content.strip():
        raise ValidationError("memory content must be non-empty")
    if not monologue.strip():
        raise ValidationError("memory monologue must be non-empty")
    return _memory_of(store, owner).add(
        content=content, monologue=monologue, created_tick=tick
    )


def retrieve_memories(
    store: "MemoryStore | CharacterStore",
    owner: str,
    query: str,
    now_tick: int,
    k: int,
) -> list[tuple[MemoryDocument, RetrievalScore]]:
    """Top ``k`` documents by the blended score, best first."""
    return _memory_of(store, owner).retrieve(query, k, now_tick)


def retrieve_characters(
    store: "CharacterStore", owner: str, trigger_text: str
) -> list[RelationDoc]:
    """Relations of ``owner`` whose described character is named in the text."""
    if store.name != owner:
        raise ValidationError("store belongs to %r, not %r" % (store.name, owner))
    return store.triggered(trigger_text)


class CharacterStore:
    """Everything one character knows: profile, relations, memories."""

    def __init__(
        self,
        profile: CharacterProfile,
        relations: Iterable[RelationDoc],
        memory: MemoryStore,
    ):
        self.profile = profile
        self.relations = tuple(relations)
        self.memory = memory
        self._patterns = [
            (relation, re.compile(r"\b%s\b" % re.escape(relation.object), re.IGNORECASE))
            for relation in self.relations
        ]

    @property
    def name(self) -> str:
        return self.profile.role

    def triggered(self, text: str) -> list[RelationDoc]:
        """Relations whose object is named (whole word) in ``text``."""
        return [relation for relation, pattern in self._patterns if pattern.search(text)]

    @classmethod
    def from_setting(
        cls, setting: ScriptSetting, name: str, embedder: Embedder
    ) -> "CharacterStore":
        profile = setting.character(name)
        memory = MemoryStore(embedder, owner=name)
        for seed in setting.seed_memories.get(name, ()):
            memory.add(
                content=seed.content,
                monologue=seed.monologue,
                created_tick=0,
                kind="seed",
            )
        relations = [r for r in setting.relations if r.subject == name]
        return cls(profile=profile, relations=relations, memory=memory)
