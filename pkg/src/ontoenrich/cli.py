"""Command-line entry point: ``ontoenrich validate | enrich | report``.

Exit codes: 0 success, 1 validation or contract failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .context import load_stopwords
from .enrichment import EnrichmentConfig, enrich
from .errors import EnrichError, NTriplesError
from .ontology import Ontology, load_ontology
from .rdf_store import TripleStore, local_name, parse_ntriples

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

# flag dest -> config-file key (kebab-case)
_CONFIG_KEYS = {
    "alpha": "alpha",
    "similarity_mode": "similarity-mode",
    "scan_budget": "scan-budget",
    "distance_cap": "distance-cap",
    "window": "window",
    "min_evidence": "min-evidence",
    "passes": "passes",
    "jobs": "jobs",
    "trace": "trace",
    "stopwords": "stopwords",
    "fixed_clock": "fixed-clock",
    "lenient": "lenient",
}
_DEFAULTS: dict[str, Any] = {
    "alpha": 0.125,
    "similarity_mode": "mean",
    "scan_budget": 100_000,
    "distance_cap": None,
    "window": 10,
    "min_evidence": 2,
    "passes": 1,
    "jobs": 1,
    "trace": False,
    "stopwords": None,
    "fixed_clock": None,
    "lenient": False,
}


class InputError(Exception):
    """An input file could not be read."""


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _parse_store(blobs: list[tuple[str, bytes]], lenient: bool) -> TripleStore:
    store = TripleStore()
    for path, data in blobs:
        errors: list[NTriplesError] = []
        try:
            triples = parse_ntriples(data, lenient=lenient, errors=errors)
        except NTriplesError as exc:
            raise NTriplesError(f"{path}: {exc.reason}", exc.line, exc.offset) from None
        for e in errors:
            _err(f"warning: {path}: skipped {e}")
        for t in triples:
            store.insert(t)
    return store


# --------------------------------------------------------------------------
# validate
# --------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    status = EXIT_OK

    def fail(code: int, msg: str) -> None:
        nonlocal status
        _err(msg)
        status = max(status, code)

    try:
        onto = load_ontology(_read_bytes(args.ontology))
        print(
            f"ok: {args.ontology}: {len(onto.concepts)} concepts, "
            f"{len(onto.instances)} instances, {len(onto.relations)} relations"
        )
    except InputError as exc:
        fail(EXIT_IO, f"error: {exc}")
    except EnrichError as exc:
        fail(EXIT_INVALID, f"error: {args.ontology}: {exc}")

    for path in args.stores:
        try:
            data = _read_bytes(path)
        except InputError as exc:
            fail(EXIT_IO, f"error: {exc}")
            continue
        errors: list[NTriplesError] = []
        triples = parse_ntriples(data, lenient=True, errors=errors)
        for e in errors:
            fail(EXIT_INVALID, f"error: {path}: {e}")
        if not errors:
            print(f"ok: {path}: {len(triples)} triples")

    if args.stopwords:
        try:
            words = load_stopwords(args.stopwords)
            print(f"ok: {args.stopwords}: {len(words)} stop words")
        except OSError as exc:
            fail(EXIT_IO, f"error: {args.stopwords}: {exc.strerror or exc}")
    return status


# --------------------------------------------------------------------------
# enrich
# --------------------------------------------------------------------------


def _resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    settings = dict(_DEFAULTS)
    if args.config:
        try:
            raw = json.loads(_read_bytes(args.config))
        except json.JSONDecodeError as exc:
            raise EnrichError(f"{args.config}: invalid JSON: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise EnrichError(f"{args.config}: config must be a JSON object")
        by_key = {v: k for k, v in _CONFIG_KEYS.items()}
        for key, value in raw.items():
            if key not in by_key:
                raise EnrichError(f"{args.config}: unknown config key {key!r}")
            settings[by_key[key]] = value
    for dest in _CONFIG_KEYS:
        value = getattr(args, dest, None)
        if value is not None:
            settings[dest] = value
    return settings


def _make_config(settings: dict[str, Any]) -> EnrichmentConfig:
    stop = load_stopwords(settings["stopwords"])
    try:
        return EnrichmentConfig(
            alpha=float(settings["alpha"]),
            similarity_mode=settings["similarity_mode"],
            scan_budget=int(settings["scan_budget"]),
            distance_cap=None if settings["distance_cap"] is None else int(settings["distance_cap"]),
            window=int(settings["window"]),
            min_evidence=int(settings["min_evidence"]),
            passes=int(settings["passes"]),
            jobs=int(settings["jobs"]),
            stopwords=stop,
        )
    except (TypeError, ValueError) as exc:
        raise EnrichError(f"invalid configuration: {exc}") from None


def build_report(
    ontology: Ontology,
    store: TripleStore,
    config: EnrichmentConfig,
    manifest: dict[str, Any],
) -> tuple[Ontology, dict[str, Any], list[dict[str, Any]]]:
    enriched, report = enrich(ontology, store, config)
    body = report.to_dict()
    body.pop("config")  # recorded once, in the manifest
    doc = {"manifest": manifest, **body}
    return enriched, doc, [t.to_dict() for t in report.trace]


def cmd_enrich(args: argparse.Namespace) -> int:
    try:
        settings = _resolve_settings(args)
        # digests are taken from the exact bytes that get parsed, before any processing
        onto_bytes = _read_bytes(args.ontology)
        store_blobs = [(p, _read_bytes(p)) for p in args.stores]
        inputs = [{"role": "ontology", "path": args.ontology, "digest": _digest(onto_bytes)}]
        inputs += [{"role": "store", "path": p, "digest": _digest(b)} for p, b in store_blobs]
        if settings["stopwords"]:
            sw = _read_bytes(settings["stopwords"])
            inputs.append({"role": "stopwords", "path": settings["stopwords"], "digest": _digest(sw)})

        config = _make_config(settings)
        ontology = load_ontology(onto_bytes)
        store = _parse_store(store_blobs, bool(settings["lenient"]))
    except InputError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    except EnrichError as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID

    created = settings["fixed_clock"] or datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = {
        "tool": "ontoenrich",
        "version": __version__,
        "created": created,
        "inputs": inputs,
        "config": config.to_dict(),
    }
    try:
        enriched, report, trace = build_report(ontology, store, config, manifest)
    except EnrichError as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "ontology.json").write_text(enriched.dumps(), encoding="utf-8")
        (out / "report.json").write_text(
            json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        if settings["trace"]:
            with open(out / "trace.jsonl", "w", encoding="utf-8") as fh:
                for row in trace:
                    fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    except OSError as exc:
        _err(f"error: cannot write to {out}: {exc.strerror or exc}")
        return EXIT_IO

    c = report["counters"]
    print(
        f"pairs={c['pairs']} hits={c['hits']} new_assertions={c['new_assertions']} "
        f"schemas_after_collapse={c['schemas_after_collapse']} -> {out}"
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


def _pred_matches(predicate: str, wanted: str | None) -> bool:
    if wanted is None:
        return True
    w = wanted.casefold()
    return predicate.casefold() == w or local_name(predicate).casefold() == w


def _table(rows: list[list[str]]) -> list[str]:
    if not rows:
        return []
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  " + "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def _check_report(doc: Any) -> None:
    if not isinstance(doc, dict):
        raise ValueError("report must be a JSON object")
    for key in ("counters", "assertions", "schemas", "hypotheses"):
        if key not in doc:
            raise ValueError(f"missing key {key!r}")
    for key in ("assertions", "schemas", "hypotheses"):
        if not isinstance(doc[key], list) or not all(isinstance(x, dict) for x in doc[key]):
            raise ValueError(f"{key!r} must be a list of objects")


def cmd_report(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(_read_bytes(args.report))
        _check_report(doc)
    except InputError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    except (json.JSONDecodeError, ValueError) as exc:
        _err(f"error: {args.report}: malformed report: {exc}")
        return EXIT_INVALID

    pred, concept = args.predicate, args.concept
    try:
        assertions = [
            a for a in doc["assertions"]
            if _pred_matches(a["predicate"], pred)
            and (concept is None or concept in (a.get("subject_concept"), a.get("object_concept")))
        ]
        schemas = [
            s for s in doc["schemas"]
            if _pred_matches(s["predicate"], pred) and (concept is None or concept in (s["dom"], s["range"]))
        ]
        hypotheses = [
            h for h in doc["hypotheses"]
            if _pred_matches(h["predicate"], pred)
            and (concept is None or concept in (h["dom"], h["parent_range"]))
        ]
        a_rows = [
            [a["class"], a["subject"], local_name(a["predicate"]), a["object"]]
            for a in sorted(assertions, key=lambda a: (a["class"], a["subject"], a["object"]))
        ]
        s_rows = [
            [local_name(s["predicate"]), s["dom"], s["range"], f"support={len(s['support'])}"]
            for s in schemas
        ]
        h_rows = [
            [local_name(h["predicate"]), h["dom"], h["parent_range"], h["status"],
             "missing=" + (",".join(h["missing"]) or "-")]
            for h in hypotheses
        ]
    except (KeyError, TypeError) as exc:
        _err(f"error: {args.report}: malformed report: missing field {exc}")
        return EXIT_INVALID

    lines = [f"assertions: {len(a_rows)} rows"]
    lines += _table([["class", "subject", "predicate", "object"]] + a_rows) if a_rows else []
    lines.append(f"schemas: {len(s_rows)} rows")
    lines += _table(s_rows)
    lines.append(f"hypotheses: {len(h_rows)} rows")
    lines += _table(h_rows)
    print("\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoenrich",
        description="Enrich a text-derived ontology with relations found in an RDF dataset.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an ontology and N-Triples files")
    p.add_argument("ontology", help="ontology JSON file")
    p.add_argument("stores", nargs="*", metavar="STORE", help="N-Triples files")
    p.add_argument("--stopwords", help="stop-word file (one token per line)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enrich", help="run the enrichment pipeline")
    p.add_argument("ontology", help="ontology JSON file")
    p.add_argument("stores", nargs="+", metavar="STORE", help="N-Triples files")
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file; keys match the long flag names")
    p.add_argument("--alpha", type=float, help="similarity gate threshold (default 0.125)")
    p.add_argument("--similarity-mode", choices=["mean", "sum"], help="default mean")
    p.add_argument("--scan-budget", type=int, help="triples examined per pair (default 100000)")
    p.add_argument("--distance-cap", type=int, help="max token gap between mentions (default unlimited)")
    p.add_argument("--window", type=int, help="context window in tokens (default 10)")
    p.add_argument("--min-evidence", type=int, help="children needed to hypothesize (default 2)")
    p.add_argument("--passes", type=int, help="generalization passes (default 1)")
    p.add_argument("--jobs", type=int, help="worker threads for pair search (default 1)")
    p.add_argument("--trace", action="store_const", const=True, help="also write trace.jsonl")
    p.add_argument("--stopwords", help="stop-word file overriding the bundled list")
    p.add_argument("--lenient", action="store_const", const=True,
                   help="skip malformed N-Triples lines instead of failing")
    p.add_argument("--fixed-clock", metavar="TIMESTAMP",
                   help="timestamp to record instead of the current time")
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("report", help="summarize a report.json")
    p.add_argument("report", help="report.json written by enrich")
    p.add_argument("--predicate", help="only rows with this predicate (IRI or local name)")
    p.add_argument("--concept", help="only rows touching this concept")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
