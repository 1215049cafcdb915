"""Pair search against the triple store, knowledge classification, rule lifting.

``enrich`` is the end-to-end driver: it forms ordered instance pairs, looks
for a connecting predicate in the store for each one, records what it finds
as assertions, lifts each assertion to a concept-level relation schema and
finally runs the inductive generalization step.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

from .context import (
    ContextProfile,
    SIMILARITY_MODES,
    aggregate_similarity,
    cosine,
    instance_context,
    load_stopwords,
    neighborhood_profiles,
)
from .errors import ContractViolation
from .ontology import (
    Assertion,
    AssertionKey,
    KnowledgeClass,
    Mention,
    Ontology,
    RelationSchema,
    Source,
)
from .rdf_store import IRI, ScanBudget, Triple, TripleStore, local_name


@dataclass(frozen=True)
class EnrichmentConfig:
    alpha: float = 0.125
    similarity_mode: str = "mean"
    scan_budget: int = 100_000
    distance_cap: int | None = None
    window: int = 10
    min_evidence: int = 2
    passes: int = 1
    jobs: int = 1
    stopwords: frozenset[str] = field(default_factory=load_stopwords, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.similarity_mode not in SIMILARITY_MODES:
            raise ValueError(f"similarity_mode must be one of {SIMILARITY_MODES}")
        if self.scan_budget < 1:
            raise ValueError("scan_budget must be >= 1")
        if self.distance_cap is not None and self.distance_cap < 0:
            raise ValueError("distance_cap must be >= 0 or None")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.min_evidence < 2:
            raise ValueError("min_evidence must be >= 2")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        # jobs is left out on purpose: it never changes the result
        return {
            "alpha": self.alpha,
            "similarity_mode": self.similarity_mode,
            "scan_budget": self.scan_budget,
            "distance_cap": self.distance_cap,
            "window": self.window,
            "min_evidence": self.min_evidence,
            "passes": self.passes,
        }


# --------------------------------------------------------------------------
# Pairs
# --------------------------------------------------------------------------


class InstancePair(NamedTuple):
    subject: str
    object: str
    distance: int | None  # None: no pair of mentions, i.e. infinitely far


def mention_gap(a: Mention, b: Mention) -> int:
    """Tokens strictly between two spans; 0 when adjacent or overlapping."""
    if a.end <= b.start:
        return b.start - a.end
    if b.end <= a.start:
        return a.start - b.end
    return 0


def min_token_distance(ontology: Ontology, a: str, b: str) -> int | None:
    ma, mb = ontology.instance(a).mentions, ontology.instance(b).mentions
    if not ma or not mb:
        return None
    return min(mention_gap(x, y) for x in ma for y in mb)


def build_pair_set(ontology: Ontology, config: EnrichmentConfig) -> list[InstancePair]:
    """Ordered pairs of distinct instances, lexicographic by id.

    With a finite ``distance_cap`` pairs whose closest mentions are further
    apart (or that lack mentions altogether) are dropped.
    """
    ids = sorted(i.id for i in ontology.instances)
    cap = config.distance_cap
    pairs = []
    for s in ids:
        for o in ids:
            if s == o:
                continue
            d = min_token_distance(ontology, s, o)
            if cap is not None and (d is None or d > cap):
                continue
            pairs.append(InstancePair(s, o, d))
    return pairs


# --------------------------------------------------------------------------
# Predicate search
# --------------------------------------------------------------------------


class Hit(NamedTuple):
    predicate: str
    subject_resource: str
    object_resource: str


@dataclass
class GateOutcome:
    resource: str
    similarity: float
    accepted: bool
    predicate: str | None = None  # set for object-side candidates


@dataclass
class PairTrace:
    subject: str
    object: str
    distance: int | None
    subject_candidates: list[GateOutcome] = field(default_factory=list)
    object_candidates: list[GateOutcome] = field(default_factory=list)
    triples_examined: int = 0
    budget_exhausted: bool = False
    survivors: list[Hit] = field(default_factory=list)
    hit: Hit | None = None
    reverse_hit: bool = False

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["survivors"] = [h._asdict() for h in self.survivors]
        d["hit"] = self.hit._asdict() if self.hit else None
        return d


def gate(similarity: float, alpha: float) -> bool:
    # >= so that alpha 0 admits every candidate, including zero-similarity ones
    return similarity >= alpha


class PredicateFinder:
    """Runs the per-pair predicate search with memoized context profiles.

    Safe to share between worker threads: caches only ever gain entries
    whose values are a pure function of the (immutable) store and ontology.
    """

    def __init__(self, store: TripleStore, ontology: Ontology, config: EnrichmentConfig) -> None:
        self.store = store
        self.ontology = ontology
        self.config = config
        self._instance_profiles: dict[str, ContextProfile] = {}
        self._neighborhoods: dict[str, list[ContextProfile]] = {}
        self._similarity: dict[tuple[str, str], float] = {}

    def instance_profile(self, instance_id: str) -> ContextProfile:
        prof = self._instance_profiles.get(instance_id)
        if prof is None:
            prof = instance_context(
                self.ontology, instance_id, self.config.window, self.config.stopwords
            )
            self._instance_profiles[instance_id] = prof
        return prof

    def similarity(self, resource: str, instance_id: str) -> float:
        key = (resource, instance_id)
        sim = self._similarity.get(key)
        if sim is None:
            nr = self._neighborhoods.get(resource)
            if nr is None:
                nr = neighborhood_profiles(self.store, resource, self.config.stopwords)
                self._neighborhoods[resource] = nr
            wa = self.instance_profile(instance_id)
            sim = aggregate_similarity([cosine(p, wa) for p in nr], self.config.similarity_mode)
            self._similarity[key] = sim
        return sim

    def find(self, pair: InstancePair, predicate: str | None = None) -> PairTrace:
        """Search the store for a triple linking the pair; details in the trace.

        ``predicate`` restricts the scan to one predicate IRI.
        """
        cfg = self.config
        store = self.store
        subj = self.ontology.instance(pair.subject)
        obj = self.ontology.instance(pair.object)
        trace = PairTrace(pair.subject, pair.object, pair.distance)
        if len(store) == 0:
            return trace

        accepted = []
        for res in store.resolve_by_name(subj.label):
            sim = self.similarity(res, subj.id)
            ok = gate(sim, cfg.alpha)
            trace.subject_candidates.append(GateOutcome(res, sim, ok))
            if ok:
                accepted.append(res)

        targets = set(store.resolve_by_name(obj.label))
        budget = ScanBudget(cfg.scan_budget)
        p_term = IRI(predicate) if predicate is not None else None
        survivors: list[tuple[int, Hit]] = []
        for res in accepted:
            if not targets:
                break
            found = store.match(IRI(res), p_term, None, budget)
            for t in found.triples:
                if not t.object.is_iri or t.object.value not in targets:
                    continue
                sim = self.similarity(t.object.value, obj.id)
                ok = gate(sim, cfg.alpha)
                trace.object_candidates.append(
                    GateOutcome(t.object.value, sim, ok, t.predicate.value)
                )
                if ok:
                    hit = Hit(t.predicate.value, res, t.object.value)
                    survivors.append((store.index_of(t), hit))
            if found.truncated:
                trace.budget_exhausted = True
                break
        trace.triples_examined = budget.consumed
        survivors.sort(key=lambda x: x[0])
        trace.survivors = [h for _, h in survivors]
        trace.hit = trace.survivors[0] if survivors else None
        return trace


def find_predicate(
    store: TripleStore,
    ontology: Ontology,
    pair: InstancePair,
    config: EnrichmentConfig,
    *,
    predicate: str | None = None,
) -> Hit | None:
    """Predicate linking ``pair`` in the store, with the resources it links."""
    return PredicateFinder(store, ontology, config).find(pair, predicate).hit


# --------------------------------------------------------------------------
# Classification and lifting
# --------------------------------------------------------------------------

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_WORD_RE = re.compile(r"[^\W_]+")


def predicate_words(predicate: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Split a predicate's local name into lowercase words (``located_in`` ->
    ``located``; ``birthPlace`` -> ``birth``, ``place``)."""
    name = _CAMEL_RE.sub(" ", local_name(predicate))
    words = [w.lower() for w in _WORD_RE.findall(name)]
    stop = stopwords if stopwords is not None else load_stopwords()
    content = [w for w in words if w not in stop]
    return content or words


def stem_match(token: str, word: str) -> bool:
    if token == word:
        return True
    if min(len(token), len(word)) < 4:
        return False
    return token.startswith(word) or word.startswith(token)


def classify_knowledge(
    assertion: Assertion,
    ontology: Ontology,
    window: int = 10,
    stopwords: frozenset[str] | None = None,
) -> KnowledgeClass:
    """Three-component if subject, object and predicate co-occur in the text.

    A co-mention is a subject mention and an object mention at most
    ``window`` tokens apart; the predicate counts as present when each of
    its words stem-matches some token within ``window`` tokens of that
    co-mention (the mentions themselves excluded).
    """
    subj = ontology.instance(assertion.subject)
    obj = ontology.instance(assertion.object)
    if not subj.mentions or not obj.mentions:
        raise ContractViolation("both assertion endpoints must be mentioned in the text")
    words = predicate_words(assertion.predicate, stopwords)
    tokens = ontology.tokens
    for ms in subj.mentions:
        for mo in obj.mentions:
            if mention_gap(ms, mo) > window:
                continue
            lo = max(0, min(ms.start, mo.start) - window)
            hi = min(len(tokens), max(ms.end, mo.end) + window)
            skip = set(range(ms.start, ms.end)) | set(range(mo.start, mo.end))
            region = [tokens[i] for i in range(lo, hi) if i not in skip]
            if all(any(stem_match(t, w) for t in region) for w in words):
                return KnowledgeClass.THREE
    return KnowledgeClass.TWO


def knowledge_class_for(
    ontology: Ontology, subject: str, predicate: str, obj: str, config: EnrichmentConfig
) -> KnowledgeClass:
    """Like :func:`classify_knowledge` but tolerant of unmentioned endpoints,
    which are one-component knowledge from the reader's point of view."""
    if not ontology.instance(subject).mentions or not ontology.instance(obj).mentions:
        return KnowledgeClass.ONE
    probe = Assertion(subject, predicate, obj)
    return classify_knowledge(probe, ontology, config.window, config.stopwords)


def lift_rule(assertion: Assertion, ontology: Ontology) -> RelationSchema:
    """Add (or merge into) the schema ``predicate(concept(s), concept(o))``."""
    schema = RelationSchema(
        assertion.predicate,
        ontology.concept_of(assertion.subject),
        ontology.concept_of(assertion.object),
        [assertion.key],
    )
    return ontology.add_relation_schema(schema)


# --------------------------------------------------------------------------
# Driver
# --------------------------------------------------------------------------


@dataclass
class Discovery:
    assertion: Assertion
    hit: Hit
    triple: Triple

    def to_dict(self, ontology: Ontology) -> dict[str, Any]:
        a = self.assertion
        return {
            "subject": a.subject,
            "predicate": a.predicate,
            "object": a.object,
            "class": a.knowledge_class.value,
            "source": a.source.value,
            "subject_concept": ontology.concept_of(a.subject),
            "object_concept": ontology.concept_of(a.object),
            "provenance": {
                "subject_resource": self.hit.subject_resource,
                "object_resource": self.hit.object_resource,
                "triple": self.triple.n3(),
            },
        }


def _schema_dict(schema: RelationSchema) -> dict[str, Any]:
    return {
        "predicate": schema.predicate,
        "dom": schema.dom,
        "range": schema.range,
        "support": [list(k) for k in schema.support],
    }


@dataclass
class EnrichmentReport:
    config: EnrichmentConfig
    counters: dict[str, int]
    discovered: list[Discovery]
    lifted: list[RelationSchema]
    schemas: list[RelationSchema]
    hypotheses: list[Any]
    collapsed: list[dict[str, Any]]
    trace: list[PairTrace]
    ontology: Ontology = field(repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "counters": dict(self.counters),
            "assertions": [d.to_dict(self.ontology) for d in self.discovered],
            "lifted_schemas": [_schema_dict(s) for s in self.lifted],
            "schemas": [_schema_dict(s) for s in self.schemas],
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "collapsed": self.collapsed,
        }


def enrich(
    ontology: Ontology, store: TripleStore, config: EnrichmentConfig | None = None
) -> tuple[Ontology, EnrichmentReport]:
    """Run the full enrichment pipeline; the input ontology is not modified."""
    from .generalize import generalize

    config = config or EnrichmentConfig()
    snapshot = ontology.copy()
    result = ontology.copy()

    n = len(snapshot.instances)
    pairs = build_pair_set(snapshot, config)
    finder = PredicateFinder(store, snapshot, config)
    if config.jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            traces = list(pool.map(finder.find, pairs))
    else:
        traces = [finder.find(p) for p in pairs]

    hits = {(t.subject, t.object) for t in traces if t.hit}
    for t in traces:
        if t.hit is None and (t.object, t.subject) in hits:
            t.reverse_hit = True

    # every surviving predicate of a pair becomes an assertion, not just the
    # first: with first-only selection a stricter alpha can surface a new one
    discovered: list[Discovery] = []
    for t in traces:
        for hit in t.survivors:
            klass = knowledge_class_for(snapshot, t.subject, hit.predicate, t.object, config)
            a = Assertion(t.subject, hit.predicate, t.object, klass, Source.LINKED_DATA)
            if not result.add_assertion(a):
                continue
            lift_rule(a, result)
            triple = Triple(IRI(hit.subject_resource), IRI(hit.predicate), IRI(hit.object_resource))
            discovered.append(Discovery(a, hit, triple))

    lifted: dict[tuple[str, str, str], RelationSchema] = {}
    for d in discovered:
        a = d.assertion
        key = (a.predicate, result.concept_of(a.subject), result.concept_of(a.object))
        lifted.setdefault(key, RelationSchema(*key, [])).support.append(a.key)

    hypotheses, collapsed, confirmed_keys = generalize(result, store, config, finder)

    new_keys: set[AssertionKey] = {d.assertion.key for d in discovered} | confirmed_keys
    schemas = [r for r in result.relations if any(k in new_keys for k in r.support)]

    counters = {
        "cartesian": n * n,
        "self_pairs": n,
        "pairs_pruned": n * n - n - len(pairs),
        "pairs": len(pairs),
        "hits": sum(1 for t in traces if t.hit),
        "new_assertions": len(discovered),
        "budget_exhausted": sum(1 for t in traces if t.budget_exhausted),
        "reverse_hits": sum(1 for t in traces if t.reverse_hit),
        "triples_examined": sum(t.triples_examined for t in traces),
        "schemas_lifted": len(lifted),
        "hypotheses": len(hypotheses),
        "hypotheses_confirmed": sum(1 for h in hypotheses if h.status == "confirmed"),
        "confirming_assertions": len(confirmed_keys),
        "schemas_after_collapse": len(schemas),
    }
    report = EnrichmentReport(
        config=config,
        counters=counters,
        discovered=discovered,
        lifted=list(lifted.values()),
        schemas=schemas,
        hypotheses=hypotheses,
        collapsed=collapsed,
        trace=traces,
        ontology=result,
    )
    return result, report
