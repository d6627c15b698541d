"""Lexical comprehensibility: tokenizer, TF-IDF vectors and cosine similarity.

TF is the raw count, IDF is the smoothed ``ln((1+N)/(1+df)) + 1`` and each
vector is L2-normalised, so ``cosine`` of two vectors is a plain dot product
divided by the norms.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class TokenVector:
    weights: dict[str, float]
    norm: float

    @classmethod
    def from_weights(cls, weights: dict[str, float]) -> "TokenVector":
        return cls(dict(weights), math.sqrt(math.fsum(w * w for w in weights.values())))


@dataclass(frozen=True)
class SimilarityResult:
    score: float
    shared_tokens: int
    corpus_size: int
    degenerate: bool = False

    @property
    def percent(self) -> str:
        return f"{100 * self.score:.2f}%"


def idf(n_docs: int, doc_freq: int) -> float:
    return math.log((1 + n_docs) / (1 + doc_freq)) + 1.0


def tfidf_vectors(docs: list[list[str]]) -> list[TokenVector]:
    """One L2-normalised TF-IDF vector per token list."""
    if not docs:
        raise ValueError("tfidf_vectors needs at least one document")
    if all(not d for d in docs):
        raise ValueError("every document is empty")
    counts = [Counter(d) for d in docs]
    df = Counter()
    for c in counts:
        df.update(c.keys())
    n = len(docs)
    out = []
    for c in counts:
        raw = {t: k * idf(n, df[t]) for t, k in c.items()}
        norm = math.sqrt(math.fsum(w * w for w in raw.values()))
        out.append(TokenVector.from_weights({t: w / norm for t, w in raw.items()} if norm else {}))
    return out


def cosine(u: TokenVector, v: TokenVector) -> float:
    if u.norm == 0 or v.norm == 0:
        return 0.0
    if len(v.weights) < len(u.weights):
        u, v = v, u
    dot = math.fsum(w * v.weights[t] for t, w in u.weights.items() if t in v.weights)
    return min(1.0, max(0.0, dot / (u.norm * v.norm)))


def comprehensibility(original: str, generated: str) -> SimilarityResult:
    """Score how much of ``original`` survives in ``generated``.

    Both texts form the whole corpus (N=2). Two empty inputs are treated as a
    perfect but degenerate match.
    """
    a, b = tokenize(original), tokenize(generated)
    shared = len(set(a) & set(b))
    if not a and not b:
        return SimilarityResult(1.0, 0, 2, degenerate=True)
    if not a or not b:
        return SimilarityResult(0.0, 0, 2)
    if a == b or Counter(a) == Counter(b):
        return SimilarityResult(1.0, shared, 2)
    u, v = tfidf_vectors([a, b])
    return SimilarityResult(cosine(u, v), shared, 2)
