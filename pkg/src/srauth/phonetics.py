"""Spoken-form keys for domains, and look-alike detection against a trusted list.

Screen readers speak a domain label as a word, so doubled letters and common
letter clusters that sound the same collapse to one spoken form. The rewrite
table is intentionally small; it is not a grapheme-to-phoneme system.

Registrable labels are simply the last two dot-separated labels; no public
suffix list is consulted, so ``example.co.uk`` keys as ``co.uk``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from urllib.parse import urlsplit

DEFAULT_THRESHOLD = 0.9

# applied in order after collapsing repeated letters
REWRITES: tuple[tuple[re.Pattern, str], ...] = (
    (re.compile("ph"), "f"),
    (re.compile("ck"), "k"),
    (re.compile("qu"), "kw"),
    (re.compile("x"), "ks"),
    (re.compile("c(?=[eiy])"), "s"),
    (re.compile("c"), "k"),
    (re.compile("z"), "s"),
    (re.compile("wh"), "w"),
)

_REPEATS = re.compile(r"([a-z])\1+")
_NON_LETTER = re.compile(r"[^a-z]+")


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class SpokenKey:
    key: str
    source_domain: str


def registrable_host(domain: str) -> str:
    text = domain.strip()
    if "://" not in text:
        text = "//" + text
    host = urlsplit(text).hostname or ""
    labels = [lab for lab in host.split(".") if lab]
    return ".".join(labels[-2:])


def spoken_key(domain: str) -> SpokenKey:
    if not domain or not domain.strip():
        raise DomainError("empty domain")
    key = _NON_LETTER.sub("", registrable_host(domain).lower())
    if not key:
        raise DomainError(f"{domain!r} has no letters")
    key = _REPEATS.sub(r"\1", key)
    for pat, rep in REWRITES:
        key = pat.sub(rep, key)
    return SpokenKey(key, domain)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def spoken_similarity(d1: str, d2: str) -> float:
    k1, k2 = spoken_key(d1).key, spoken_key(d2).key
    if k1 == k2:
        return 1.0
    return 1.0 - levenshtein(k1, k2) / max(len(k1), len(k2))


def flag_lookalikes(candidate: str, trusted: list[str], threshold: float = DEFAULT_THRESHOLD) -> list[tuple[str, float]]:
    """Trusted domains that sound like ``candidate``, most similar first.

    A candidate that is itself on the trusted list is never flagged.
    """
    if not trusted:
        raise ValueError("trusted list is empty")
    if candidate in trusted:
        return []
    hits = [(t, spoken_similarity(candidate, t)) for t in trusted]
    hits = [(t, s) for t, s in hits if s >= threshold]
    return sorted(hits, key=lambda h: (-h[1], h[0]))


def read_trusted_list(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out
