import pytest

from ontoenrich.enrichment import EnrichmentConfig, enrich, lift_rule
from ontoenrich.errors import ContractViolation
from ontoenrich.generalize import (
    CONFIRMED,
    REFUTED_UNKNOWN,
    Hypothesis,
    collapse,
    confirm,
    generalize,
    hypothesize,
)
from ontoenrich.ontology import Assertion
from ontoenrich.rdf_store import TripleStore

from conftest import ORIGIN

CFG = EnrichmentConfig()
RULE1 = Assertion("Neckar", ORIGIN, "Black_Forest")
RULE2 = Assertion("Shatt_al-Arab", ORIGIN, "Euphrates")
RULE3 = Assertion("Karun", ORIGIN, "Zard_Kuh")


def seed(ontology, *assertions):
    for a in assertions:
        ontology.add_assertion(a)
        lift_rule(a, ontology)
    return ontology


def origin_hypotheses(ontology):
    return [h for h in hypothesize(ontology, CFG) if h.predicate == ORIGIN]


def test_two_children_give_hypothesis(geo_ontology):
    seed(geo_ontology, RULE1, RULE2)
    [h] = origin_hypotheses(geo_ontology)
    assert (h.dom, h.parent_range) == ("river", "NaturalGE")
    assert h.covered == ["forest", "river"]
    assert h.missing == ["mountain"]
    assert h.evidence == [RULE1.key, RULE2.key]


def test_single_child_gives_nothing(geo_ontology):
    seed(geo_ontology, RULE1)
    assert origin_hypotheses(geo_ontology) == []


def test_text_relations_alone_give_nothing(geo_ontology):
    assert hypothesize(geo_ontology, CFG) == []


def test_min_evidence_threshold(geo_ontology):
    seed(geo_ontology, RULE1, RULE2)
    assert hypothesize(geo_ontology, EnrichmentConfig(min_evidence=3)) == []


def test_all_children_covered(geo_ontology):
    seed(geo_ontology, RULE1, RULE2, RULE3)
    [h] = origin_hypotheses(geo_ontology)
    assert h.missing == []
    assert h.covered == ["mountain", "forest", "river"]


def test_confirm_finds_missing_child(geo_ontology, geo_store):
    seed(geo_ontology, RULE1, RULE2)
    [h] = origin_hypotheses(geo_ontology)
    confirm(h, geo_store, geo_ontology, CFG)
    assert h.status == CONFIRMED
    assert h.missing == []
    assert [(c["subject"], c["object"], c["child"]) for c in h.confirmations] == [("Karun", "Zard_Kuh", "mountain")]
    assert geo_ontology.assertion(RULE3.key).source.value == "generalization-confirmation"
    assert geo_ontology.relation(ORIGIN, "river", "mountain").support == [RULE3.key]


def test_confirm_against_empty_store_leaves_ontology(geo_ontology):
    seed(geo_ontology, RULE1, RULE2)
    before = geo_ontology.dumps()
    [h] = origin_hypotheses(geo_ontology)
    confirm(h, TripleStore(), geo_ontology, CFG)
    assert h.status == REFUTED_UNKNOWN
    assert h.missing == ["mountain"]
    assert geo_ontology.dumps() == before
    with pytest.raises(ContractViolation):
        collapse(geo_ontology, h)


def test_confirm_twice_rejected(geo_ontology, geo_store):
    seed(geo_ontology, RULE1, RULE2)
    [h] = origin_hypotheses(geo_ontology)
    confirm(h, geo_store, geo_ontology, CFG)
    with pytest.raises(ContractViolation):
        confirm(h, geo_store, geo_ontology, CFG)


def test_collapse_merges_supports(geo_ontology, geo_store):
    seed(geo_ontology, RULE1, RULE2, RULE3)
    [h] = origin_hypotheses(geo_ontology)
    confirm(h, geo_store, geo_ontology, CFG)
    removed = collapse(geo_ontology, h)
    assert sorted(s.range for s in removed) == ["forest", "mountain", "river"]
    merged = geo_ontology.relation(ORIGIN, "river", "NaturalGE")
    assert sorted(merged.support) == sorted([RULE1.key, RULE2.key, RULE3.key])
    assert [r for r in geo_ontology.relations if r.predicate == ORIGIN] == [merged]
    assert collapse(geo_ontology, h) == []


def test_collapse_unconfirmed_rejected(geo_ontology):
    h = Hypothesis(ORIGIN, "river", "NaturalGE", ["forest", "river"], ["mountain"])
    with pytest.raises(ContractViolation):
        collapse(geo_ontology, h)


def test_inductive_path_matches_direct_run(geo_ontology, geo_store):
    direct, _ = enrich(geo_ontology, geo_store)
    seed(geo_ontology, RULE1, RULE2)
    generalize(geo_ontology, geo_store, CFG)
    # same schemas and supports, regardless of how the Karun assertion arrived
    def schemas(o):
        return sorted((r.predicate, r.dom, r.range, tuple(sorted(r.support))) for r in o.relations)
    assert schemas(geo_ontology) == schemas(direct)


def test_stable_after_collapse(geo_ontology, geo_store):
    seed(geo_ontology, RULE1, RULE2, RULE3)
    generalize(geo_ontology, geo_store, CFG)
    snapshot = geo_ontology.dumps()
    hyps, collapsed, keys = generalize(geo_ontology, geo_store, EnrichmentConfig(passes=3))
    assert (hyps, collapsed, keys) == ([], [], set())
    assert geo_ontology.dumps() == snapshot
