"""Application shell: ingest cycles, snapshots, HTTP API, scheduler.

A cycle loads the ontology, ingests the history export (filling page
metadata from the HTML cache), classifies pages, materializes the
knowledge base, and checks consistency. The resulting snapshot is
immutable; the server swaps it in atomically, so readers never observe
a half-built knowledge base and a failed cycle leaves the previous
snapshot serving.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import tempfile
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlsplit

from .config import AppConfig
from .ingest import (
    classify,
    default_stopwords,
    fill_from_cache,
    load_lexicons,
    load_stopwords,
    page_triples,
    read_history_file,
)
from .rdf import (
    APP_NS,
    OWL,
    RDF,
    RDFS,
    VOCAB,
    XSD,
    Graph,
    GraphBuilder,
    Iri,
    Term,
)
from .reasoner import Violation, check_consistency, instances, materialize, subclasses, superclasses
from .search import DEFAULT_WEIGHTS, RankingWeights, class_terms, search
from .turtle import ParseError, PrefixMap, parse_file, serialize

logger = logging.getLogger(__name__)

_STD_NAMESPACES = (RDF.base, RDFS.base, OWL.base, XSD.base)

SNAPSHOT_TTL = "snapshot.ttl"
SNAPSHOT_META = "snapshot.json"


class IngestError(RuntimeError):
    """A cycle failed outright; the previous snapshot stays in service."""


@dataclass
class Snapshot:
    """Immutable build artifact of one ingest cycle."""

    base: Graph
    inferred: Graph
    violations: list[Violation]
    built_at: datetime
    counts: dict[str, int]
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    skipped_records: int = 0


def default_prefixes() -> PrefixMap:
    return PrefixMap(
        {
            "rdf": RDF.base,
            "rdfs": RDFS.base,
            "owl": OWL.base,
            "xsd": XSD.base,
            "ex": APP_NS,
        }
    )


def term_text(t: Term) -> str:
    """Compact, human-readable rendering for API payloads and CLI output."""
    if isinstance(t, Iri):
        return t.value
    return repr(t)


def _counts(inferred: Graph) -> dict[str, int]:
    classes = {
        c
        for c in class_terms(inferred)
        if isinstance(c, Iri) and not c.value.startswith(_STD_NAMESPACES)
    }
    return {
        "pages": len(instances(inferred, VOCAB.web_page, "all")),
        "classes": len(classes),
        "triples": len(inferred),
    }


def run_ingest_cycle(cfg: AppConfig, previous: Optional[Snapshot] = None) -> Snapshot:
    """One full ingest cycle; raises IngestError if the ontology is unusable.

    Per-record problems are skipped and counted, never fatal. The previous
    snapshot is never touched; swapping it for the returned one is the
    caller's concern.
    """
    try:
        ontology, prefixes = parse_file(cfg.ontology_path)
    except (OSError, ParseError) as e:
        raise IngestError(f"cannot load ontology {cfg.ontology_path}: {e}") from e
    for label, ns in default_prefixes().items():
        if label not in prefixes:
            prefixes.declare(label, ns)

    stopwords = (
        load_stopwords(cfg.stopword_path) if cfg.stopword_path else default_stopwords()
    )
    try:
        records, skipped = read_history_file(cfg.history_export_path)
    except OSError as e:
        raise IngestError(f"cannot read history export {cfg.history_export_path}: {e}") from e

    ontology_closure = materialize(ontology)
    lexicons = load_lexicons(ontology)
    builder = GraphBuilder(ontology)
    for rec in records:
        rec = fill_from_cache(rec, cfg.html_cache_dir)
        cls = classify(rec, lexicons, ontology_closure, stopwords)
        try:
            triples = page_triples(rec, cls)
        except ValueError:
            skipped += 1
            continue
        for t in triples:
            builder.insert(t)

    base = builder.freeze()
    inferred = materialize(base)
    return Snapshot(
        base=base,
        inferred=inferred,
        violations=check_consistency(inferred),
        built_at=datetime.now(timezone.utc),
        counts=_counts(inferred),
        prefixes=prefixes,
        skipped_records=skipped,
    )


def persist_snapshot(snapshot: Snapshot, state_dir) -> None:
    """Write the base graph as Turtle plus a JSON sidecar, atomically."""
    state = Path(state_dir)
    state.mkdir(parents=True, exist_ok=True)
    meta = {
        "built_at": snapshot.built_at.isoformat(),
        "counts": snapshot.counts,
        "skipped_records": snapshot.skipped_records,
        "violations": [
            {
                "kind": v.kind.value,
                "focus": term_text(v.focus),
                "participants": [term_text(p) for p in v.participants],
                "detail": v.detail,
            }
            for v in snapshot.violations
        ],
    }
    _atomic_write(state / SNAPSHOT_TTL, serialize(snapshot.base, snapshot.prefixes))
    _atomic_write(state / SNAPSHOT_META, json.dumps(meta, indent=2) + "\n")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_snapshot(state_dir) -> Optional[Snapshot]:
    """Rebuild a snapshot from the persisted base graph, or None if absent."""
    ttl = Path(state_dir) / SNAPSHOT_TTL
    if not ttl.is_file():
        return None
    base, prefixes = parse_file(ttl)
    built_at = datetime.now(timezone.utc)
    meta_path = Path(state_dir) / SNAPSHOT_META
    if meta_path.is_file():
        try:
            built_at = datetime.fromisoformat(json.loads(meta_path.read_text("utf-8"))["built_at"])
        except (ValueError, KeyError, json.JSONDecodeError):
            pass
    for label, ns in default_prefixes().items():
        if label not in prefixes:
            prefixes.declare(label, ns)
    inferred = materialize(base)
    return Snapshot(
        base=base,
        inferred=inferred,
        violations=check_consistency(inferred),
        built_at=built_at,
        counts=_counts(inferred),
        prefixes=prefixes,
    )


# --- API documents ---------------------------------------------------------


def _error(status: int, code: str, message: str) -> tuple[int, dict]:
    return status, {"code": code, "message": message}


def handle_search(
    snapshot: Optional[Snapshot],
    q: Optional[str],
    k: Optional[int] = None,
    weights: RankingWeights = DEFAULT_WEIGHTS,
    k_default: int = 10,
    stopwords: Optional[frozenset[str]] = None,
) -> tuple[int, dict]:
    """(status, document) for a search request; errors carry machine codes."""
    if snapshot is None:
        return _error(503, "no_snapshot", "no knowledge-base snapshot is available yet")
    if q is None:
        return _error(400, "missing_query", "query parameter 'q' is required")
    if k is None:
        k = k_default
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        return _error(400, "invalid_k", "parameter 'k' must be a positive integer")
    results = search(snapshot.inferred, q, k, weights, stopwords)
    return 200, {
        "query": q,
        "count": len(results),
        "results": [
            {
                "url": r.url,
                "title": r.title,
                "snippet": r.snippet,
                "class": r.class_iri,
                "score": r.score,
            }
            for r in results
        ],
    }


def class_tree(snapshot: Snapshot) -> dict:
    """Nested class hierarchy with labels and instance counts."""
    g = snapshot.inferred
    app_classes = {
        c
        for c in class_terms(g)
        if isinstance(c, Iri) and not c.value.startswith(_STD_NAMESPACES)
    }

    def label_of(c: Iri) -> Optional[str]:
        labels = sorted(
            t.object.lexical
            for t in g.match(c, VOCAB.label, None)
            if hasattr(t.object, "lexical")
        )
        return labels[0] if labels else None

    def node(c: Iri) -> dict:
        children = sorted(
            (x for x in subclasses(g, c, "direct") if x in app_classes),
            key=lambda x: x.value,
        )
        return {
            "iri": c.value,
            "label": label_of(c),
            "instances": len(instances(g, c, "all")),
            "children": [node(x) for x in children],
        }

    roots = sorted(
        (
            c
            for c in app_classes
            if not any(s in app_classes for s in superclasses(g, c, "all"))
        ),
        key=lambda c: c.value,
    )
    return {
        "classes": [node(c) for c in roots],
        "prefixes": snapshot.prefixes.as_dict(),
    }


def violations_doc(snapshot: Snapshot) -> dict:
    return {
        "count": len(snapshot.violations),
        "violations": [
            {
                "kind": v.kind.value,
                "focus": term_text(v.focus),
                "participants": [term_text(p) for p in v.participants],
                "detail": v.detail,
            }
            for v in snapshot.violations
        ],
    }


# --- server ----------------------------------------------------------------


class SearchService:
    """Holds the current snapshot and swaps it atomically after each cycle."""

    def __init__(self, cfg: AppConfig) -> None:
        self.cfg = cfg
        self.stopwords = (
            load_stopwords(cfg.stopword_path) if cfg.stopword_path else default_stopwords()
        )
        self._lock = threading.Lock()
        self._snapshot: Optional[Snapshot] = None
        self.last_error: Optional[str] = None

    @property
    def snapshot(self) -> Optional[Snapshot]:
        return self._snapshot

    def refresh(self, persist: bool = True) -> Snapshot:
        """Run one cycle; swap in the result only if it succeeds."""
        with self._lock:
            try:
                snapshot = run_ingest_cycle(self.cfg, self._snapshot)
            except IngestError as e:
                self.last_error = str(e)
                logger.error("ingest cycle failed, keeping previous snapshot: %s", e)
                raise
            self._snapshot = snapshot
            self.last_error = None
            if persist:
                persist_snapshot(snapshot, self.cfg.state_dir)
            return snapshot

    def load_persisted(self) -> Optional[Snapshot]:
        snapshot = load_snapshot(self.cfg.state_dir)
        if snapshot is not None:
            with self._lock:
                self._snapshot = snapshot
        return snapshot


class _Handler(BaseHTTPRequestHandler):
    service: SearchService  # set by make_server

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("http: " + fmt, *args)

    def _send_json(self, status: int, document: dict) -> None:
        body = json.dumps(document).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
        url = urlsplit(self.path)
        query = parse_qs(url.query)
        snapshot = self.service.snapshot
        if url.path == "/health":
            self._send_json(
                200,
                {
                    "status": "ok",
                    "snapshot": snapshot is not None,
                    "built_at": snapshot.built_at.isoformat() if snapshot else None,
                    "counts": snapshot.counts if snapshot else None,
                    "last_error": self.service.last_error,
                },
            )
            return
        if url.path == "/search":
            q = query.get("q", [None])[0]
            raw_k = query.get("k", [None])[0]
            k: Optional[int] = None
            if raw_k is not None:
                try:
                    k = int(raw_k)
                except ValueError:
                    self._send_json(400, {"code": "invalid_k", "message": "parameter 'k' must be a positive integer"})
                    return
            status, doc = handle_search(
                snapshot,
                q,
                k,
                self.service.cfg.weights,
                self.service.cfg.k_default,
                self.service.stopwords,
            )
            self._send_json(status, doc)
            return
        if url.path == "/classes":
            if snapshot is None:
                self._send_json(503, {"code": "no_snapshot", "message": "no snapshot yet"})
                return
            self._send_json(200, class_tree(snapshot))
            return
        if url.path == "/violations":
            if snapshot is None:
                self._send_json(503, {"code": "no_snapshot", "message": "no snapshot yet"})
                return
            self._send_json(200, violations_doc(snapshot))
            return
        if self._serve_static(url.path):
            return
        self._send_json(404, {"code": "not_found", "message": f"no such endpoint: {url.path}"})

    def do_POST(self) -> None:  # noqa: N802
        url = urlsplit(self.path)
        if url.path == "/ingest":
            try:
                snapshot = self.service.refresh()
            except IngestError as e:
                self._send_json(500, {"code": "ingest_failed", "message": str(e)})
                return
            self._send_json(200, {"status": "ok", "counts": snapshot.counts})
            return
        self._send_json(404, {"code": "not_found", "message": f"no such endpoint: {url.path}"})

    def _serve_static(self, path: str) -> bool:
        root = self.service.cfg.web_root
        if not root:
            return False
        rel = "index.html" if path == "/" else path.lstrip("/")
        root_path = Path(root).resolve()
        target = (root_path / rel).resolve()
        if not str(target).startswith(str(root_path) + os.sep) and target != root_path:
            return False
        if not target.is_file():
            return False
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)
        return True


def make_server(service: SearchService) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((service.cfg.host, service.cfg.port), handler)


class CycleScheduler:
    """Background thread re-running the ingest cycle at a fixed interval."""

    def __init__(self, service: SearchService, interval_s: Optional[int] = None) -> None:
        self.service = service
        self.interval_s = interval_s if interval_s is not None else service.cfg.poll_interval_s
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True, name="ingest-cycle")

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)

    def _run(self) -> None:
        while not self._stop.wait(self.interval_s):
            try:
                self.service.refresh()
            except IngestError:
                continue
