"""Config merging, ingest cycles, snapshot persistence, and the HTTP API."""

import json
import threading
import urllib.error
import urllib.request
from contextlib import contextmanager

import pytest

from ontosearch.config import AppConfig, ConfigError, load_config
from ontosearch.rdf import APP, OWL, RDF, Iri, Triple
from ontosearch.reasoner import ViolationKind
from ontosearch.service import (
    IngestError,
    SearchService,
    class_tree,
    handle_search,
    load_snapshot,
    make_server,
    persist_snapshot,
    run_ingest_cycle,
    violations_doc,
)

from conftest import tree_config


class TestConfig:
    def test_defaults_and_required_keys(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(None)
        cfg = load_config(
            None,
            env={},
            overrides={
                "history_export_path": "h",
                "html_cache_dir": "c",
                "ontology_path": "o",
            },
        )
        assert cfg.poll_interval_s == 900
        assert cfg.k_default == 10
        assert cfg.weights.w_class == 2.0

    def test_precedence_flags_env_file_defaults(self, tmp_path):
        config_file = tmp_path / "cfg.json"
        config_file.write_text(
            json.dumps(
                {
                    "history_export_path": "h",
                    "html_cache_dir": "c",
                    "ontology_path": "o",
                    "poll_interval_s": 111,
                    "k_default": 3,
                    "weights": {"w_class": 9.0},
                }
            )
        )
        env = {"ONTOSEARCH_POLL_INTERVAL_S": "222", "ONTOSEARCH_W_CLASS": "4.0"}
        cfg = load_config(str(config_file), env=env, overrides={"poll_interval_s": 333})
        assert cfg.poll_interval_s == 333  # flag beats env beats file
        assert cfg.weights.w_class == 4.0  # env beats file
        assert cfg.k_default == 3  # file beats default
        assert cfg.listen_addr == "127.0.0.1:8080"  # default

    def test_file_relative_paths_resolve_against_file(self, tmp_path):
        config_file = tmp_path / "cfg.json"
        config_file.write_text(
            json.dumps(
                {"history_export_path": "h.ndjson", "html_cache_dir": "cache", "ontology_path": "onto.ttl"}
            )
        )
        cfg = load_config(str(config_file), env={})
        assert cfg.history_export_path == str(tmp_path / "h.ndjson")
        assert cfg.ontology_path == str(tmp_path / "onto.ttl")

    def test_validation_errors(self):
        base = dict(history_export_path="h", html_cache_dir="c", ontology_path="o")
        with pytest.raises(ConfigError):
            AppConfig(**base, poll_interval_s=0)
        with pytest.raises(ConfigError):
            AppConfig(**base, k_default=0)
        with pytest.raises(ConfigError):
            AppConfig(**base, listen_addr="nohostport")
        with pytest.raises(ConfigError):
            load_config(None, env={}, overrides={**base, "mystery_key": 1})

    def test_bad_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(bad))


class TestIngestCycle:
    def test_fixture_counts_and_clean_consistency(self, fixture_snapshot):
        assert fixture_snapshot.counts["pages"] == 28
        assert fixture_snapshot.violations == []
        assert fixture_snapshot.skipped_records == 0
        assert len(fixture_snapshot.inferred) >= len(fixture_snapshot.base)
        assert set(fixture_snapshot.inferred.statements) >= set(fixture_snapshot.base.statements)

    def test_empty_export(self, fixture_tree):
        (fixture_tree / "history.ndjson").write_text("")
        snapshot = run_ingest_cycle(tree_config(fixture_tree))
        assert snapshot.counts["pages"] == 0
        from ontosearch.reasoner import materialize
        from ontosearch.turtle import parse_file

        ontology, _ = parse_file(fixture_tree / "ontology.ttl")
        assert snapshot.inferred == materialize(ontology)

    def test_doctored_disjoint_assertion_yields_one_violation(self, fixture_tree):
        with open(fixture_tree / "ontology.ttl", "a", encoding="utf-8") as fh:
            fh.write(
                "\n<http://aio.example/aio-wireless-prepaid-iphone-5-plans> a ex:AppleFruit .\n"
            )
        snapshot = run_ingest_cycle(tree_config(fixture_tree))
        disjoint = [v for v in snapshot.violations if v.kind is ViolationKind.DISJOINTNESS]
        assert len(disjoint) == 1
        assert disjoint[0].focus == Iri("http://aio.example/aio-wireless-prepaid-iphone-5-plans")

    def test_broken_ontology_aborts_cycle(self, fixture_tree):
        (fixture_tree / "ontology.ttl").write_text("@prefix broken <nope .")
        with pytest.raises(IngestError):
            run_ingest_cycle(tree_config(fixture_tree))

    def test_missing_export_aborts_cycle(self, fixture_tree):
        (fixture_tree / "history.ndjson").unlink()
        with pytest.raises(IngestError):
            run_ingest_cycle(tree_config(fixture_tree))

    def test_bad_records_counted_not_fatal(self, fixture_tree):
        with open(fixture_tree / "history.ndjson", "a", encoding="utf-8") as fh:
            fh.write("garbage line\n")
        snapshot = run_ingest_cycle(tree_config(fixture_tree))
        assert snapshot.counts["pages"] == 28
        assert snapshot.skipped_records == 1

    def test_two_cycles_identical(self, fixture_tree):
        cfg = tree_config(fixture_tree)
        first = run_ingest_cycle(cfg)
        second = run_ingest_cycle(cfg, first)
        assert first.base == second.base
        assert first.inferred == second.inferred

    def test_idempotent_reingest_of_duplicated_export(self, fixture_tree):
        export = (fixture_tree / "history.ndjson").read_text()
        (fixture_tree / "history.ndjson").write_text(export + export)
        doubled = run_ingest_cycle(tree_config(fixture_tree))
        assert doubled.counts["pages"] == 28
        baseline = run_ingest_cycle(tree_config(fixture_tree))
        assert doubled.base == baseline.base


class TestPersistence:
    def test_round_trip(self, fixture_tree):
        cfg = tree_config(fixture_tree)
        snapshot = run_ingest_cycle(cfg)
        persist_snapshot(snapshot, cfg.state_dir)
        loaded = load_snapshot(cfg.state_dir)
        assert loaded is not None
        assert loaded.base == snapshot.base
        assert loaded.inferred == snapshot.inferred
        assert loaded.counts == snapshot.counts
        assert loaded.built_at == snapshot.built_at

    def test_load_missing_state(self, tmp_path):
        assert load_snapshot(tmp_path / "nope") is None


class TestService:
    def test_failed_refresh_keeps_previous_snapshot(self, fixture_tree):
        cfg = tree_config(fixture_tree)
        service = SearchService(cfg)
        good = service.refresh()
        assert service.snapshot is good
        (fixture_tree / "ontology.ttl").write_text("completely broken {{{")
        with pytest.raises(IngestError):
            service.refresh()
        assert service.snapshot is good  # old snapshot still serving
        assert service.last_error is not None

    def test_handle_search_contract(self, fixture_snapshot):
        status, doc = handle_search(fixture_snapshot, "iphone")
        assert status == 200
        assert set(doc) == {"query", "count", "results"}
        assert doc["query"] == "iphone" and doc["count"] == len(doc["results"]) >= 1
        for row in doc["results"]:
            assert set(row) == {"url", "title", "snippet", "class", "score"}
            assert row["class"] == APP.AppleInc.value

    def test_handle_search_errors(self, fixture_snapshot):
        status, doc = handle_search(fixture_snapshot, None)
        assert status == 400 and doc["code"] == "missing_query"
        status, doc = handle_search(fixture_snapshot, "x", 0)
        assert status == 400 and doc["code"] == "invalid_k"
        status, doc = handle_search(None, "x")
        assert status == 503 and doc["code"] == "no_snapshot"

    def test_handle_search_no_hits(self, fixture_snapshot):
        status, doc = handle_search(fixture_snapshot, "zzzqqq")
        assert status == 200 and doc["count"] == 0 and doc["results"] == []

    def test_k_defaults_and_truncates(self, fixture_snapshot):
        _, doc = handle_search(fixture_snapshot, "apple", None, k_default=4)
        assert doc["count"] == 4
        _, doc2 = handle_search(fixture_snapshot, "apple", 2)
        assert doc2["count"] == 2

    def test_class_tree_shape(self, fixture_snapshot):
        doc = class_tree(fixture_snapshot)
        assert "prefixes" in doc and doc["prefixes"]["ex"] == APP.Apple.value.rsplit("#", 1)[0] + "#"
        by_iri = {node["iri"]: node for node in doc["classes"]}
        apple = by_iri[APP.Apple.value]
        assert {child["iri"] for child in apple["children"]} == {
            APP.AppleInc.value,
            APP.AppleFruit.value,
        }
        assert apple["instances"] == 25
        assert by_iri[APP.WebPage.value]["instances"] == 28

    def test_violations_doc(self, fixture_snapshot):
        doc = violations_doc(fixture_snapshot)
        assert doc == {"count": 0, "violations": []}


@contextmanager
def _running_server(service: SearchService):
    server = make_server(service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def _get(url: str):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read().decode("utf-8"))


class TestHttpApi:
    @pytest.fixture()
    def server(self, fixture_tree):
        service = SearchService(tree_config(fixture_tree))
        service.refresh(persist=False)
        with _running_server(service) as base_url:
            yield base_url, service

    def test_health(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/health")
        assert status == 200 and doc["status"] == "ok" and doc["snapshot"] is True
        assert doc["counts"]["pages"] == 28

    def test_search_endpoint(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/search?q=iphone&k=5")
        assert status == 200
        assert doc["count"] == 5
        assert all(r["class"].endswith("AppleInc") for r in doc["results"])

    def test_search_query_encoding(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/search?q=fruit%20nutrition")
        assert status == 200
        assert doc["query"] == "fruit nutrition"
        assert doc["count"] >= 1

    def test_search_missing_query(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/search")
        assert status == 400 and doc["code"] == "missing_query"

    def test_search_bad_k(self, server):
        base_url, _ = server
        for bad in ("0", "-3", "x"):
            status, doc = _get(base_url + f"/search?q=a&k={bad}")
            assert status == 400 and doc["code"] == "invalid_k"

    def test_classes_and_violations(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/classes")
        assert status == 200 and doc["classes"]
        status, doc = _get(base_url + "/violations")
        assert status == 200 and doc["count"] == 0

    def test_unknown_path(self, server):
        base_url, _ = server
        status, doc = _get(base_url + "/nope")
        assert status == 404 and doc["code"] == "not_found"

    def test_post_ingest_triggers_cycle(self, server):
        base_url, service = server
        before = service.snapshot
        req = urllib.request.Request(base_url + "/ingest", method="POST", data=b"")
        with urllib.request.urlopen(req) as resp:
            doc = json.loads(resp.read().decode("utf-8"))
        assert doc["status"] == "ok" and doc["counts"]["pages"] == 28
        assert service.snapshot is not before

    def test_post_ingest_failure_keeps_serving(self, server, fixture_tree):
        base_url, service = server
        before = service.snapshot
        (fixture_tree / "ontology.ttl").write_text("broken")
        req = urllib.request.Request(base_url + "/ingest", method="POST", data=b"")
        try:
            with urllib.request.urlopen(req) as resp:
                status = resp.status
        except urllib.error.HTTPError as err:
            status = err.code
            doc = json.loads(err.read().decode("utf-8"))
            assert doc["code"] == "ingest_failed"
        assert status == 500
        assert service.snapshot is before
        status, doc = _get(base_url + "/search?q=iphone")
        assert status == 200 and doc["count"] >= 1

    def test_static_ui_served_when_configured(self, fixture_tree):
        web_root = fixture_tree / "web"
        web_root.mkdir()
        (web_root / "index.html").write_text("<!doctype html><title>ui</title>")
        cfg = tree_config(fixture_tree, web_root=str(web_root))
        service = SearchService(cfg)
        service.refresh(persist=False)
        with _running_server(service) as base_url:
            with urllib.request.urlopen(base_url + "/") as resp:
                assert resp.status == 200
                assert b"ui" in resp.read()
            # Path traversal stays inside the web root.
            status, _doc = _get(base_url + "/../ontology.ttl")
            assert status == 404
