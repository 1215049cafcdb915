"""Ontology enrichment from Linked Data.

Finds store triples that connect instances of a text-derived ontology,
lifts them into concept-level relation schemas and generalizes those
schemas up the taxonomy.
"""

__version__ = "0.1.0"

from .context import context_similarity, cosine, instance_context, neighborhood_profiles, tokenize
from .enrichment import (
    EnrichmentConfig,
    EnrichmentReport,
    InstancePair,
    build_pair_set,
    classify_knowledge,
    enrich,
    find_predicate,
    lift_rule,
)
from .errors import ContractViolation, EnrichError, NTriplesError, OntologyError, UnknownReference
from .generalize import Hypothesis, collapse, confirm, hypothesize
from .ontology import Assertion, KnowledgeClass, Ontology, RelationSchema, Source, load_ontology
from .rdf_store import IRI, Literal, ScanBudget, Term, Triple, TripleStore, parse_ntriples, serialize_ntriples
