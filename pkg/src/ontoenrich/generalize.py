"""Inductive generalization of lifted relation schemas over the taxonomy.

When a predicate already links a domain concept to at least ``min_evidence``
children of some parent concept, we hypothesize that it links the domain to
the parent as a whole. The hypothesis is checked by searching the store for
instance-level evidence for each remaining child; once every child is
covered, the per-child schemas collapse into a single parent-level schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .enrichment import (
    EnrichmentConfig,
    InstancePair,
    PredicateFinder,
    knowledge_class_for,
    lift_rule,
    min_token_distance,
)
from .errors import ContractViolation
from .ontology import Assertion, AssertionKey, Ontology, RelationSchema, Source
from .rdf_store import TripleStore

OPEN = "open"
CONFIRMED = "confirmed"
REFUTED_UNKNOWN = "refuted-unknown"


@dataclass
class Hypothesis:
    predicate: str
    dom: str
    parent_range: str
    covered: list[str]
    missing: list[str]
    status: str = OPEN
    evidence: list[AssertionKey] = field(default_factory=list)
    confirmations: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicate": self.predicate,
            "dom": self.dom,
            "parent_range": self.parent_range,
            "covered": list(self.covered),
            "missing": list(self.missing),
            "status": self.status,
            "evidence": [list(k) for k in self.evidence],
            "confirmations": list(self.confirmations),
        }


def hypothesize(ontology: Ontology, config: EnrichmentConfig) -> list[Hypothesis]:
    """One hypothesis per (predicate, dom, parent) with enough child evidence."""
    ranges: dict[tuple[str, str], list[str]] = {}
    for r in ontology.relations:
        ranges.setdefault((r.predicate, r.dom), []).append(r.range)

    out = []
    for (predicate, dom), covered_ranges in ranges.items():
        for concept in ontology.concepts:
            kids = ontology.children(concept.id)
            covered = [c for c in kids if c in covered_ranges]
            if len(covered) < config.min_evidence:
                continue
            evidence: list[AssertionKey] = []
            for c in covered:
                evidence.extend(ontology.relation(predicate, dom, c).support)
            out.append(
                Hypothesis(
                    predicate,
                    dom,
                    concept.id,
                    covered=covered,
                    missing=[c for c in kids if c not in covered],
                    evidence=evidence,
                )
            )
    return out


def confirm(
    hypothesis: Hypothesis,
    store: TripleStore,
    ontology: Ontology,
    config: EnrichmentConfig,
    finder: PredicateFinder | None = None,
) -> Hypothesis:
    """Look for instance-level evidence for every missing child.

    Evidence is only committed to ``ontology`` (as assertions plus lifted
    schemas) when every child ends up covered; otherwise the hypothesis is
    marked refuted-unknown and the ontology is left alone.
    """
    if hypothesis.status != OPEN:
        raise ContractViolation(f"hypothesis is already {hypothesis.status}")
    finder = finder or PredicateFinder(store, ontology, config)
    subjects = sorted(i.id for i in ontology.instances_of(hypothesis.dom))

    found: list[tuple[str, Assertion, dict[str, Any]]] = []
    for child in list(hypothesis.missing):
        objects = sorted(i.id for i in ontology.instances_of(child))
        hit = None
        for s in subjects:
            for o in objects:
                if s == o:
                    continue
                pair = InstancePair(s, o, min_token_distance(ontology, s, o))
                if config.distance_cap is not None and (
                    pair.distance is None or pair.distance > config.distance_cap
                ):
                    continue
                trace = finder.find(pair, predicate=hypothesis.predicate)
                if trace.hit is not None:
                    hit = trace
                    break
            if hit is not None:
                break
        if hit is None:
            continue
        klass = knowledge_class_for(ontology, hit.subject, hypothesis.predicate, hit.object, config)
        a = Assertion(hit.subject, hypothesis.predicate, hit.object, klass, Source.CONFIRMATION)
        found.append((child, a, {
            "child": child,
            "subject": a.subject,
            "predicate": a.predicate,
            "object": a.object,
            "class": a.knowledge_class.value,
            "subject_resource": hit.hit.subject_resource,
            "object_resource": hit.hit.object_resource,
        }))
        hypothesis.missing.remove(child)
        hypothesis.covered.append(child)

    # keep the child order of the taxonomy
    order = ontology.children(hypothesis.parent_range)
    hypothesis.covered.sort(key=order.index)
    hypothesis.confirmations = [info for _, _, info in found]

    if hypothesis.missing:
        hypothesis.status = REFUTED_UNKNOWN
        return hypothesis
    for _, a, _ in found:
        ontology.add_assertion(a)
        lift_rule(a, ontology)
    hypothesis.status = CONFIRMED
    return hypothesis


def collapse(ontology: Ontology, hypothesis: Hypothesis) -> list[RelationSchema]:
    """Replace the per-child schemas by one schema on the parent concept.

    Returns the removed child schemas; an empty list means nothing changed.
    """
    if hypothesis.status != CONFIRMED:
        raise ContractViolation("only confirmed hypotheses can be collapsed")
    removed = []
    for child in ontology.children(hypothesis.parent_range):
        schema = ontology.remove_relation_schema((hypothesis.predicate, hypothesis.dom, child))
        if schema is not None:
            removed.append(schema)
    if not removed:
        return []
    support: list[AssertionKey] = []
    for schema in removed:
        for ref in schema.support:
            if ref not in support:
                support.append(ref)
    ontology.add_relation_schema(
        RelationSchema(hypothesis.predicate, hypothesis.dom, hypothesis.parent_range, support)
    )
    return removed


def generalize(
    ontology: Ontology,
    store: TripleStore,
    config: EnrichmentConfig,
    finder: PredicateFinder | None = None,
) -> tuple[list[Hypothesis], list[dict[str, Any]], set[AssertionKey]]:
    """Run ``config.passes`` rounds of hypothesize / confirm / collapse.

    Returns every hypothesis considered, a provenance record per collapse,
    and the keys of assertions added as confirmation evidence.
    """
    finder = finder or PredicateFinder(store, ontology, config)
    hypotheses: list[Hypothesis] = []
    collapsed: list[dict[str, Any]] = []
    confirmed_keys: set[AssertionKey] = set()
    for _ in range(config.passes):
        batch = hypothesize(ontology, config)
        if not batch:
            break
        for h in batch:
            confirm(h, store, ontology, config, finder)
            confirmed_keys.update((c["subject"], c["predicate"], c["object"])
                                  for c in h.confirmations if h.status == CONFIRMED)
        for h in batch:
            if h.status != CONFIRMED:
                continue
            removed = collapse(ontology, h)
            if removed:
                merged = ontology.relation(h.predicate, h.dom, h.parent_range)
                collapsed.append({
                    "into": {
                        "predicate": merged.predicate,
                        "dom": merged.dom,
                        "range": merged.range,
                        "support": [list(k) for k in merged.support],
                    },
                    "removed": [
                        {"predicate": s.predicate, "dom": s.dom, "range": s.range,
                         "support": [list(k) for k in s.support]}
                        for s in removed
                    ],
                })
        hypotheses.extend(batch)
    return hypotheses, collapsed, confirmed_keys
