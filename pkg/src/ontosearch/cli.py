"""Command-line interface: serve, ingest, search, query, check, reason."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from .config import AppConfig, ConfigError, load_config
from .service import (
    CycleScheduler,
    IngestError,
    SearchService,
    Snapshot,
    load_snapshot,
    make_server,
    persist_snapshot,
    run_ingest_cycle,
    term_text,
)
from .sparql import execute, parse_query
from .turtle import ParseError, serialize

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontosearch",
        description="Semantic search over a browsing-history knowledge base.",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--history-export", dest="history_export_path", help="history export (one JSON record per line)")
    parser.add_argument("--html-cache", dest="html_cache_dir", help="directory of cached page HTML")
    parser.add_argument("--ontology", dest="ontology_path", help="ontology Turtle file")
    parser.add_argument("--stopwords", dest="stopword_path", help="stopword file override")
    parser.add_argument("--state-dir", dest="state_dir", help="snapshot persistence directory")
    parser.add_argument("--listen", dest="listen_addr", help="host:port for the HTTP API")
    parser.add_argument("--poll-interval", dest="poll_interval_s", type=int, help="seconds between ingest cycles")
    parser.add_argument("--k-default", dest="k_default", type=int, help="default result count")
    parser.add_argument("--web-root", dest="web_root", help="static files directory for the UI")
    parser.add_argument("--w-class", dest="w_class", type=float, help="class-membership weight")
    parser.add_argument("--w-overlap", dest="w_overlap", type=float, help="token-overlap weight")
    parser.add_argument("--w-visits", dest="w_visits", type=float, help="visit-count weight")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("serve", help="run ingest cycles on a schedule and serve the API")
    sub.add_parser("ingest", help="run one ingest cycle and print counts")
    p_search = sub.add_parser("search", help="one-shot search against the latest snapshot")
    p_search.add_argument("query_text")
    p_search.add_argument("-k", type=int, default=None, help="number of results")
    p_query = sub.add_parser("query", help="run a SPARQL-subset query over the snapshot")
    p_query.add_argument("sparql_text")
    sub.add_parser("check", help="print consistency violations (exit 1 if any)")
    p_reason = sub.add_parser("reason", help="materialize and write the inferred graph as Turtle")
    p_reason.add_argument("-o", "--out", help="output file (default: stdout)")
    return parser


_OVERRIDE_KEYS = (
    "history_export_path",
    "html_cache_dir",
    "ontology_path",
    "stopword_path",
    "state_dir",
    "listen_addr",
    "poll_interval_s",
    "k_default",
    "web_root",
    "w_class",
    "w_overlap",
    "w_visits",
)


def _config_from_args(args: argparse.Namespace) -> AppConfig:
    overrides = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    return load_config(args.config, overrides=overrides)


def _current_snapshot(cfg: AppConfig) -> Snapshot:
    """Latest persisted snapshot, or a fresh cycle when none exists yet."""
    snapshot = load_snapshot(cfg.state_dir)
    if snapshot is not None:
        return snapshot
    snapshot = run_ingest_cycle(cfg)
    persist_snapshot(snapshot, cfg.state_dir)
    return snapshot


def _cmd_ingest(cfg: AppConfig) -> int:
    try:
        snapshot = run_ingest_cycle(cfg)
    except IngestError as e:
        print(f"ingest failed: {e}", file=sys.stderr)
        return 1
    persist_snapshot(snapshot, cfg.state_dir)
    c = snapshot.counts
    print(
        f"pages={c['pages']} classes={c['classes']} triples={c['triples']} "
        f"violations={len(snapshot.violations)} skipped={snapshot.skipped_records}"
    )
    return 0


def _cmd_search(cfg: AppConfig, query_text: str, k: Optional[int]) -> int:
    snapshot = _current_snapshot(cfg)
    from .search import search as run_search

    results = run_search(
        snapshot.inferred,
        query_text,
        k if k is not None else cfg.k_default,
        cfg.weights,
    )
    print("rank\tscore\tclass\ttitle\turl")
    for rank, r in enumerate(results, start=1):
        cls = snapshot.prefixes.compress(r.class_iri) if r.class_iri else None
        print(f"{rank}\t{r.score:.4f}\t{cls or '-'}\t{r.title or '-'}\t{r.url}")
    return 0


def _cmd_query(cfg: AppConfig, sparql_text: str) -> int:
    snapshot = _current_snapshot(cfg)
    try:
        q = parse_query(sparql_text)
    except ParseError as e:
        print(f"query error: {e}", file=sys.stderr)
        return 1
    table = execute(q, snapshot.inferred)
    print("\t".join(f"?{name}" for name in table.header))
    for row in table.rows:
        print("\t".join(term_text(t) for t in row))
    return 0


def _cmd_check(cfg: AppConfig) -> int:
    snapshot = _current_snapshot(cfg)
    for v in snapshot.violations:
        print(f"{v.kind.value}\t{term_text(v.focus)}\t{v.detail}")
    print(f"{len(snapshot.violations)} violations")
    return 1 if snapshot.violations else 0


def _cmd_reason(cfg: AppConfig, out: Optional[str]) -> int:
    snapshot = _current_snapshot(cfg)
    text = serialize(snapshot.inferred, snapshot.prefixes)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_serve(cfg: AppConfig) -> int:
    service = SearchService(cfg)
    service.load_persisted()
    try:
        service.refresh()
    except IngestError as e:
        if service.snapshot is None:
            logger.warning("starting without a snapshot: %s", e)
    server = make_server(service)
    scheduler = CycleScheduler(service)
    scheduler.start()
    host, port = server.server_address[0], server.server_address[1]
    logger.info("serving on http://%s:%s (cycle every %ss)", host, port, cfg.poll_interval_s)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        scheduler.stop()
        server.server_close()
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config_from_args(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        if args.command == "serve":
            return _cmd_serve(cfg)
        if args.command == "ingest":
            return _cmd_ingest(cfg)
        if args.command == "search":
            return _cmd_search(cfg, args.query_text, args.k)
        if args.command == "query":
            return _cmd_query(cfg, args.sparql_text)
        if args.command == "check":
            return _cmd_check(cfg)
        if args.command == "reason":
            return _cmd_reason(cfg, args.out)
    except IngestError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
