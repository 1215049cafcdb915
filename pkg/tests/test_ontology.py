import io
import json
from pathlib import Path

import pytest

from ontoenrich.errors import ContractViolation, OntologyError, UnknownReference
from ontoenrich.ontology import (
    Assertion,
    KnowledgeClass,
    RelationSchema,
    Source,
    load_ontology,
    ontology_from_dict,
    save_ontology,
)

from conftest import GEOGRAPHY_JSON, ORIGIN

EMPTY = {"concepts": [], "subclass": [], "instances": [], "relations": [], "assertions": [], "text": ""}


def small_doc():
    return {
        "concepts": [{"id": "river", "label": "river"}, {"id": "forest", "label": "forest"},
                     {"id": "NGE", "label": "natural"}],
        "subclass": [{"child": "river", "parent": "NGE"}, {"child": "forest", "parent": "NGE"}],
        "instances": [
            {"id": "n", "label": "Neckar", "concept": "river", "mentions": [[0, 1]]},
            {"id": "b", "label": "Black Forest", "concept": "forest", "mentions": [[2, 4]]},
        ],
        "relations": [],
        "assertions": [],
        "text": "Neckar and Black Forest",
    }


def test_geography_fixture_has_13_instances(geo_ontology):
    assert len(geo_ontology.instances) == 13


def test_empty_ontology_is_valid():
    onto = ontology_from_dict(EMPTY)
    assert onto.instances == []


def test_load_from_path_and_stream():
    assert len(load_ontology(Path(GEOGRAPHY_JSON)).instances) == 13
    with open(GEOGRAPHY_JSON, "rb") as fh:
        assert len(load_ontology(fh).instances) == 13
    assert len(load_ontology(io.StringIO(json.dumps(EMPTY))).instances) == 0


@pytest.mark.parametrize("instance,concept", [
    ("Neckar", "river"), ("Zard_Kuh", "mountain"), ("Germany", "country"),
    ("Black_Forest", "forest"), ("Shatt_al-Arab", "river"),
])
def test_concept_of(geo_ontology, instance, concept):
    assert geo_ontology.concept_of(instance) == concept


def test_concept_of_unknown(geo_ontology):
    with pytest.raises(UnknownReference):
        geo_ontology.concept_of("Atlantis")


def test_taxonomy_queries(geo_ontology):
    assert geo_ontology.children("NaturalGE") == ["mountain", "forest", "river"]
    assert geo_ontology.parent("river") == "NaturalGE"
    assert geo_ontology.children("river") == []
    assert geo_ontology.parent("GE") is None
    with pytest.raises(UnknownReference):
        geo_ontology.children("ocean")


def test_is_a_and_instances_of(geo_ontology):
    assert geo_ontology.is_a("river", "GE")
    assert not geo_ontology.is_a("river", "InhabitedGE")
    assert [i.id for i in geo_ontology.instances_of("mountain")] == ["Zugspitze", "Zard_Kuh"]


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["instances"][0].__setitem__("concept", "lake"), "$.instances[0].concept"),
    (lambda d: d["instances"][0].__setitem__("concept", ["river", "forest"]), "$.instances[0].concept"),
    (lambda d: d["instances"][0].pop("label"), "$.instances[0]"),
    (lambda d: d.pop("text"), "$"),
    (lambda d: d["subclass"].append({"child": "NGE", "parent": "ocean"}), "$.subclass[2].parent"),
    (lambda d: d["instances"][0].__setitem__("mentions", [[0, 9]]), "$.instances[0].mentions[0]"),
    (lambda d: d["instances"][0].__setitem__("mentions", [[1, 1]]), "$.instances[0].mentions[0]"),
    (lambda d: d["instances"][1].__setitem__("id", "n"), "$.instances[1].id"),
    (lambda d: d["concepts"].append({"id": "river", "label": "dup"}), "$.concepts[3].id"),
    (lambda d: d["assertions"].append(
        {"subject": "n", "predicate": "p", "object": "x", "class": "two-component", "source": "text"}),
     "$.assertions[0].object"),
    (lambda d: d["assertions"].append(
        {"subject": "n", "predicate": "p", "object": "b", "class": "four", "source": "text"}),
     "$.assertions[0].class"),
    (lambda d: d["relations"].append(
        {"predicate": "p", "dom": "river", "range": "forest", "support": [["n", "p", "b"]]}),
     "$.relations[0].support[0]"),
])
def test_validation_errors_carry_json_path(mutate, path):
    doc = small_doc()
    mutate(doc)
    with pytest.raises(OntologyError) as info:
        ontology_from_dict(doc)
    assert info.value.path == path


def test_taxonomy_cycle_is_rejected_with_path():
    doc = small_doc()
    doc["subclass"].append({"child": "NGE", "parent": "river"})
    with pytest.raises(OntologyError, match="cycle") as info:
        ontology_from_dict(doc)
    assert "river -> NGE -> river" in str(info.value)


def test_invalid_json():
    with pytest.raises(OntologyError, match="invalid JSON"):
        load_ontology(b"{not json")


def test_add_relation_schema_merges_supports():
    onto = ontology_from_dict(small_doc())
    onto.add_assertion(Assertion("n", ORIGIN, "b"))
    onto.add_assertion(Assertion("b", ORIGIN, "n"))
    onto.add_relation_schema(RelationSchema(ORIGIN, "river", "forest", [("n", ORIGIN, "b")]))
    onto.add_relation_schema(RelationSchema(ORIGIN, "river", "forest", [("b", ORIGIN, "n")]))
    assert len(onto.relations) == 1
    assert onto.relations[0].support == [("n", ORIGIN, "b"), ("b", ORIGIN, "n")]


def test_add_relation_schema_rejects_dangling():
    onto = ontology_from_dict(small_doc())
    with pytest.raises(UnknownReference):
        onto.add_relation_schema(RelationSchema(ORIGIN, "river", "lake", []))
    with pytest.raises(UnknownReference):
        onto.add_relation_schema(RelationSchema(ORIGIN, "river", "forest", [("n", ORIGIN, "b")]))


def test_add_assertion_dedup_and_contracts():
    onto = ontology_from_dict(small_doc())
    assert onto.add_assertion(Assertion("n", ORIGIN, "b"))
    assert not onto.add_assertion(Assertion("n", ORIGIN, "b", KnowledgeClass.THREE, Source.TEXT))
    assert len(onto.assertions) == 1
    with pytest.raises(ContractViolation):
        onto.add_assertion(Assertion("n", ORIGIN, "n"))
    with pytest.raises(UnknownReference):
        onto.add_assertion(Assertion("n", ORIGIN, "ghost"))


def test_save_load_identity(tmp_path, geo_ontology):
    geo_ontology.add_assertion(Assertion("Neckar", ORIGIN, "Black_Forest"))
    geo_ontology.add_relation_schema(
        RelationSchema(ORIGIN, "river", "forest", [("Neckar", ORIGIN, "Black_Forest")])
    )
    path = tmp_path / "o.json"
    save_ontology(geo_ontology, path)
    again = load_ontology(path)
    assert again == geo_ontology
    assert again.to_dict() == geo_ontology.to_dict()


def test_fixture_file_is_canonical(geo_ontology):
    # the shipped file is exactly what the serializer would write
    assert Path(GEOGRAPHY_JSON).read_text(encoding="utf-8") == geo_ontology.dumps()
