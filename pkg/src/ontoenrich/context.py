"""Bag-of-words context profiles and the cosine similarity gate."""

from __future__ import annotations

import math
import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from typing import TYPE_CHECKING, Iterable, Mapping

from .rdf_store import RDFS_COMMENT, TripleStore, local_name

if TYPE_CHECKING:
    from .ontology import Ontology

# token -> raw term frequency; absent tokens count as zero
ContextProfile = Counter

SIMILARITY_MODES = ("mean", "sum")

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str, stopwords: Iterable[str] | None = None) -> list[str]:
    """Lowercase alphanumeric runs; everything else separates tokens.

    Pass ``stopwords`` to drop them (profile building). Mention indexing
    uses the unfiltered sequence so token offsets stay stable.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if stopwords:
        stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
        tokens = [t for t in tokens if t not in stop]
    return tokens


def read_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=None)
def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Load a stop-word file; ``None`` selects the bundled list."""
    if path is None:
        text = resources.files("ontoenrich").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return read_stopwords(text)


def profile(tokens: Iterable[str]) -> ContextProfile:
    return Counter(tokens)


def instance_context(
    ontology: "Ontology",
    instance_id: str,
    window: int,
    stopwords: Iterable[str] | None = None,
) -> ContextProfile:
    """Token counts within ``window`` tokens either side of each mention.

    Positions covered by the instance's own mentions are excluded, and a
    position shared by overlapping windows is counted once.
    """
    if window < 0:
        raise ValueError("window must be non-negative")
    instance = ontology.instance(instance_id)
    tokens = ontology.tokens
    stop = frozenset(stopwords) if stopwords is not None else load_stopwords()

    covered: set[int] = set()
    for m in instance.mentions:
        covered.update(range(m.start, m.end))
    positions: set[int] = set()
    for m in instance.mentions:
        positions.update(range(max(0, m.start - window), m.start))
        positions.update(range(m.end, min(len(tokens), m.end + window)))
    positions -= covered
    return Counter(tokens[i] for i in sorted(positions) if tokens[i] not in stop)


def neighborhood_profiles(
    store: TripleStore,
    resource: str,
    stopwords: Iterable[str] | None = None,
) -> list[ContextProfile]:
    """Profiles describing the store-side neighborhood of ``resource``.

    The resource's own ``rdfs:comment`` comes first when it has one, then one
    profile per distinct neighbor built from its comment, label, or, failing
    both, its local name.
    """
    stop = frozenset(stopwords) if stopwords is not None else load_stopwords()
    out: list[ContextProfile] = []
    for t in store.match(resource, RDFS_COMMENT).triples:
        if t.object.is_literal:
            out.append(Counter(tokenize(t.object.value, stop)))
            break
    for neighbor in store.neighbors(resource):
        text = store.comment_of(neighbor)
        if text is None:
            text = local_name(neighbor)
        out.append(Counter(tokenize(text, stop)))
    return out


def cosine(p: Mapping[str, int], q: Mapping[str, int]) -> float:
    """Cosine of two count vectors; 0 when either is empty."""
    if not p or not q:
        return 0.0
    if len(p) > len(q):
        p, q = q, p
    dot = sum(v * q.get(k, 0) for k, v in p.items())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in p.values())) * math.sqrt(sum(v * v for v in q.values()))
    # clamp rounding spill so cosine(p, p) is never reported above 1
    return min(1.0, dot / norm)


def aggregate_similarity(scores: list[float], mode: str = "mean") -> float:
    if mode not in SIMILARITY_MODES:
        raise ValueError(f"unknown similarity mode {mode!r}")
    total = math.fsum(scores)
    if mode == "sum":
        return total
    return total / len(scores) if scores else 0.0


def context_similarity(
    store: TripleStore,
    resource: str,
    wa: Mapping[str, int],
    mode: str = "mean",
    stopwords: Iterable[str] | None = None,
) -> float:
    """Summed (``sum``) or averaged (``mean``) cosine between ``wa`` and each
    neighborhood profile of ``resource``."""
    scores = [cosine(nr, wa) for nr in neighborhood_profiles(store, resource, stopwords)]
    return aggregate_similarity(scores, mode)
