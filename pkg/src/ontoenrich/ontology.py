"""The intermediate ontology: concepts, taxonomy, instances, relations, assertions.

Documents are JSON with the top-level keys ``concepts``, ``subclass``,
``instances``, ``relations``, ``assertions`` and ``text``; an optional
``version`` string is carried through unchanged.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Any, Iterable, Union

from .context import tokenize
from .errors import ContractViolation, OntologyError, UnknownReference


class KnowledgeClass(str, Enum):
    ONE = "one-component"
    TWO = "two-component"
    THREE = "three-component"


class Source(str, Enum):
    TEXT = "text"
    LINKED_DATA = "linked-data"
    CONFIRMATION = "generalization-confirmation"


@dataclass(frozen=True)
class Concept:
    id: str
    label: str


@dataclass(frozen=True)
class SubclassEdge:
    child: str
    parent: str


@dataclass(frozen=True, order=True)
class Mention:
    """Half-open token span ``[start, end)`` into the ontology's token list."""

    start: int
    end: int


@dataclass
class Instance:
    id: str
    label: str
    concept: str
    mentions: list[Mention] = field(default_factory=list)


# (subject, predicate, object): how schemas point at their supporting assertions
AssertionKey = tuple[str, str, str]


@dataclass
class Assertion:
    subject: str
    predicate: str
    object: str
    knowledge_class: KnowledgeClass = KnowledgeClass.TWO
    source: Source = Source.LINKED_DATA

    @property
    def key(self) -> AssertionKey:
        return (self.subject, self.predicate, self.object)


@dataclass
class RelationSchema:
    predicate: str
    dom: str
    range: str
    support: list[AssertionKey] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.predicate, self.dom, self.range)


@dataclass
class Ontology:
    concepts: list[Concept] = field(default_factory=list)
    subclass: list[SubclassEdge] = field(default_factory=list)
    instances: list[Instance] = field(default_factory=list)
    relations: list[RelationSchema] = field(default_factory=list)
    assertions: list[Assertion] = field(default_factory=list)
    text: str = ""
    version: str | None = None

    def __post_init__(self) -> None:
        self.tokens: list[str] = tokenize(self.text)
        self._reindex()

    def _reindex(self) -> None:
        self._concepts = {c.id: c for c in self.concepts}
        self._instances = {i.id: i for i in self.instances}
        self._assertions = {a.key: a for a in self.assertions}
        self._relations = {r.key: r for r in self.relations}

    def copy(self) -> "Ontology":
        return copy.deepcopy(self)

    # -- lookups ---------------------------------------------------------

    def has_concept(self, concept_id: str) -> bool:
        return concept_id in self._concepts

    def instance(self, instance_id: str) -> Instance:
        try:
            return self._instances[instance_id]
        except KeyError:
            raise UnknownReference(f"unknown instance {instance_id!r}") from None

    def concept(self, concept_id: str) -> Concept:
        try:
            return self._concepts[concept_id]
        except KeyError:
            raise UnknownReference(f"unknown concept {concept_id!r}") from None

    def concept_of(self, instance_id: str) -> str:
        return self.instance(instance_id).concept

    def children(self, concept_id: str) -> list[str]:
        self.concept(concept_id)
        return [e.child for e in self.subclass if e.parent == concept_id]

    def parents(self, concept_id: str) -> list[str]:
        self.concept(concept_id)
        return [e.parent for e in self.subclass if e.child == concept_id]

    def parent(self, concept_id: str) -> str | None:
        parents = self.parents(concept_id)
        return parents[0] if parents else None

    def is_a(self, concept_id: str, ancestor: str) -> bool:
        """True when ``concept_id`` equals ``ancestor`` or lies below it."""
        stack, seen = [concept_id], set()
        while stack:
            c = stack.pop()
            if c == ancestor:
                return True
            if c in seen:
                continue
            seen.add(c)
            stack.extend(e.parent for e in self.subclass if e.child == c)
        return False

    def instances_of(self, concept_id: str) -> list[Instance]:
        return [i for i in self.instances if self.is_a(i.concept, concept_id)]

    def assertion(self, key: AssertionKey) -> Assertion | None:
        return self._assertions.get(tuple(key))

    def relation(self, predicate: str, dom: str, range_: str) -> RelationSchema | None:
        return self._relations.get((predicate, dom, range_))

    # -- mutation --------------------------------------------------------

    def add_assertion(self, assertion: Assertion) -> bool:
        """Add ``assertion`` unless one with the same triple exists.

        Returns True when it was new.
        """
        if assertion.subject == assertion.object:
            raise ContractViolation("assertion subject and object must differ")
        self.instance(assertion.subject)
        self.instance(assertion.object)
        if assertion.key in self._assertions:
            return False
        self.assertions.append(assertion)
        self._assertions[assertion.key] = assertion
        return True

    def add_relation_schema(self, schema: RelationSchema) -> RelationSchema:
        """Add ``schema`` or merge its supports into the identical one present."""
        self.concept(schema.dom)
        self.concept(schema.range)
        for ref in schema.support:
            if tuple(ref) not in self._assertions:
                raise UnknownReference(f"support references unknown assertion {tuple(ref)!r}")
        existing = self._relations.get(schema.key)
        if existing is None:
            existing = RelationSchema(schema.predicate, schema.dom, schema.range, [])
            self.relations.append(existing)
            self._relations[existing.key] = existing
        for ref in schema.support:
            ref = tuple(ref)
            if ref not in existing.support:
                existing.support.append(ref)
        return existing

    def remove_relation_schema(self, key: tuple[str, str, str]) -> RelationSchema | None:
        schema = self._relations.pop(tuple(key), None)
        if schema is not None:
            self.relations.remove(schema)
        return schema

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        if self.version is not None:
            doc["version"] = self.version
        doc["concepts"] = [{"id": c.id, "label": c.label} for c in self.concepts]
        doc["subclass"] = [{"child": e.child, "parent": e.parent} for e in self.subclass]
        doc["instances"] = [
            {
                "id": i.id,
                "label": i.label,
                "concept": i.concept,
                "mentions": [[m.start, m.end] for m in i.mentions],
            }
            for i in self.instances
        ]
        doc["relations"] = [
            {
                "predicate": r.predicate,
                "dom": r.dom,
                "range": r.range,
                "support": [list(s) for s in r.support],
            }
            for r in self.relations
        ]
        doc["assertions"] = [
            {
                "subject": a.subject,
                "predicate": a.predicate,
                "object": a.object,
                "class": a.knowledge_class.value,
                "source": a.source.value,
            }
            for a in self.assertions
        ]
        doc["text"] = self.text
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# Loading and validation
# --------------------------------------------------------------------------

_TOP_LEVEL = ("concepts", "subclass", "instances", "relations", "assertions", "text")


def _require(obj: dict, key: str, kind: type, path: str) -> Any:
    if key not in obj:
        raise OntologyError(f"missing field {key!r}", path)
    value = obj[key]
    if kind is str and not isinstance(value, str):
        raise OntologyError(f"expected a string, got {type(value).__name__}", f"{path}.{key}")
    if kind is list and not isinstance(value, list):
        raise OntologyError(f"expected an array, got {type(value).__name__}", f"{path}.{key}")
    return value


def _objects(doc: dict, key: str) -> Iterable[tuple[str, dict]]:
    for i, item in enumerate(doc[key]):
        path = f"$.{key}[{i}]"
        if not isinstance(item, dict):
            raise OntologyError("expected an object", path)
        yield path, item


def _find_cycle(edges: list[SubclassEdge]) -> list[str] | None:
    graph: dict[str, list[str]] = {}
    for e in edges:
        graph.setdefault(e.child, []).append(e.parent)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 1
        stack.append(node)
        for nxt in graph.get(node, ()):
            if state.get(nxt) == 1:
                return stack[stack.index(nxt):] + [nxt]
            if nxt not in state:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        state[node] = 2
        return None

    for node in graph:
        if node not in state:
            found = visit(node)
            if found:
                return found
    return None


def ontology_from_dict(doc: Any) -> Ontology:
    """Validate a decoded JSON document and build an :class:`Ontology`."""
    if not isinstance(doc, dict):
        raise OntologyError("ontology document must be a JSON object")
    for key in _TOP_LEVEL:
        _require(doc, key, str if key == "text" else list, "$")
    version = doc.get("version")
    if version is not None and not isinstance(version, str):
        raise OntologyError("expected a string", "$.version")

    text = doc["text"]
    n_tokens = len(tokenize(text))

    concepts: list[Concept] = []
    seen: set[str] = set()
    for path, item in _objects(doc, "concepts"):
        cid = _require(item, "id", str, path)
        label = _require(item, "label", str, path)
        if not cid:
            raise OntologyError("concept id must be non-empty", f"{path}.id")
        if cid in seen:
            raise OntologyError(f"duplicate concept id {cid!r}", f"{path}.id")
        seen.add(cid)
        concepts.append(Concept(cid, label))

    edges: list[SubclassEdge] = []
    for path, item in _objects(doc, "subclass"):
        child = _require(item, "child", str, path)
        parent = _require(item, "parent", str, path)
        for key, ref in (("child", child), ("parent", parent)):
            if ref not in seen:
                raise OntologyError(f"dangling reference to concept {ref!r}", f"{path}.{key}")
        edge = SubclassEdge(child, parent)
        if edge in edges:
            raise OntologyError("duplicate subclass edge", path)
        edges.append(edge)
    cycle = _find_cycle(edges)
    if cycle:
        raise OntologyError("taxonomy cycle: " + " -> ".join(cycle), "$.subclass")

    instances: list[Instance] = []
    instance_ids: set[str] = set()
    for path, item in _objects(doc, "instances"):
        iid = _require(item, "id", str, path)
        label = _require(item, "label", str, path)
        if "concept" in item and isinstance(item["concept"], list):
            raise OntologyError("instances must have exactly one concept", f"{path}.concept")
        concept = _require(item, "concept", str, path)
        mentions_raw = _require(item, "mentions", list, path)
        if not iid:
            raise OntologyError("instance id must be non-empty", f"{path}.id")
        if iid in instance_ids:
            raise OntologyError(f"duplicate instance id {iid!r}", f"{path}.id")
        if not label:
            raise OntologyError("instance label must be non-empty", f"{path}.label")
        if concept not in seen:
            raise OntologyError(f"dangling reference to concept {concept!r}", f"{path}.concept")
        mentions = []
        for j, span in enumerate(mentions_raw):
            mpath = f"{path}.mentions[{j}]"
            if (
                not isinstance(span, list)
                or len(span) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in span)
            ):
                raise OntologyError("mention must be [start, end] integers", mpath)
            start, end = span
            if not 0 <= start < end <= n_tokens:
                raise OntologyError(
                    f"mention span [{start}, {end}) outside text of {n_tokens} tokens", mpath
                )
            mentions.append(Mention(start, end))
        instance_ids.add(iid)
        instances.append(Instance(iid, label, concept, mentions))

    assertions: list[Assertion] = []
    assertion_keys: set[AssertionKey] = set()
    for path, item in _objects(doc, "assertions"):
        subject = _require(item, "subject", str, path)
        predicate = _require(item, "predicate", str, path)
        obj = _require(item, "object", str, path)
        klass = _require(item, "class", str, path)
        source = _require(item, "source", str, path)
        for key, ref in (("subject", subject), ("object", obj)):
            if ref not in instance_ids:
                raise OntologyError(f"dangling reference to instance {ref!r}", f"{path}.{key}")
        if subject == obj:
            raise OntologyError("assertion subject and object must differ", path)
        if not predicate:
            raise OntologyError("predicate must be non-empty", f"{path}.predicate")
        try:
            kc = KnowledgeClass(klass)
        except ValueError:
            raise OntologyError(f"unknown knowledge class {klass!r}", f"{path}.class") from None
        try:
            src = Source(source)
        except ValueError:
            raise OntologyError(f"unknown source {source!r}", f"{path}.source") from None
        a = Assertion(subject, predicate, obj, kc, src)
        if a.key in assertion_keys:
            raise OntologyError("duplicate assertion", path)
        assertion_keys.add(a.key)
        assertions.append(a)

    relations: list[RelationSchema] = []
    relation_keys: set[tuple[str, str, str]] = set()
    for path, item in _objects(doc, "relations"):
        predicate = _require(item, "predicate", str, path)
        dom = _require(item, "dom", str, path)
        range_ = _require(item, "range", str, path)
        support_raw = _require(item, "support", list, path)
        for key, ref in (("dom", dom), ("range", range_)):
            if ref not in seen:
                raise OntologyError(f"dangling reference to concept {ref!r}", f"{path}.{key}")
        support: list[AssertionKey] = []
        for j, ref in enumerate(support_raw):
            spath = f"{path}.support[{j}]"
            if not (isinstance(ref, list) and len(ref) == 3 and all(isinstance(x, str) for x in ref)):
                raise OntologyError("support must be [subject, predicate, object]", spath)
            ref = tuple(ref)
            if ref not in assertion_keys:
                raise OntologyError(f"support references unknown assertion {list(ref)!r}", spath)
            if ref not in support:
                support.append(ref)
        schema = RelationSchema(predicate, dom, range_, support)
        if schema.key in relation_keys:
            raise OntologyError("duplicate relation schema", path)
        relation_keys.add(schema.key)
        relations.append(schema)

    return Ontology(concepts, edges, instances, relations, assertions, text, version)


Input = Union[str, bytes, Path, IO[str], IO[bytes]]


def load_ontology(source: Input) -> Ontology:
    """Load an ontology from JSON text, bytes, a binary/text stream, or a Path."""
    if isinstance(source, Path):
        data: Any = source.read_bytes()
    elif hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise OntologyError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return ontology_from_dict(doc)


def save_ontology(ontology: Ontology, path: str | Path) -> None:
    Path(path).write_text(ontology.dumps(), encoding="utf-8")
