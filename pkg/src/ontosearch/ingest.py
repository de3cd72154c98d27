"""Browsing-history ingestion: records, page metadata, tokens, classification.

The canonical input is a line-delimited export (one JSON record per
line) with fields url (required), title, description, visit_count,
last_visit_us. A browser's places store maps onto it directly:
url←url, title←title, visit_count←visit_count,
last_visit_us←last_visit_date (already microseconds since epoch).

Page HTML is read from a local cache directory of files named by the
SHA-256 hex digest of the URL; nothing here touches the network.
"""

from __future__ import annotations

import hashlib
import html as html_module
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib.resources import files
from pathlib import Path
from typing import Iterable, Optional

from .rdf import (
    VOCAB,
    XSD_INTEGER,
    Graph,
    Iri,
    Literal,
    RdfError,
    Term,
    Triple,
    term_sort_key,
)
from .reasoner import superclasses


@dataclass(frozen=True)
class HistoryRecord:
    """One visited page. Empty titles/descriptions are normalized to None."""

    url: str
    title: Optional[str] = None
    description: Optional[str] = None
    visit_count: int = 0
    last_visit_us: int = 0

    def __post_init__(self) -> None:
        if not self.url or any(ch.isspace() for ch in self.url):
            raise ValueError(f"record url must be non-empty without whitespace: {self.url!r}")
        if self.visit_count < 0:
            raise ValueError(f"visit_count must be >= 0, got {self.visit_count}")
        if self.title == "":
            object.__setattr__(self, "title", None)
        if self.description == "":
            object.__setattr__(self, "description", None)


def _record_from_json(line: str) -> HistoryRecord:
    data = json.loads(line)
    if not isinstance(data, dict):
        raise ValueError("record line is not an object")
    url = data.get("url")
    if not isinstance(url, str):
        raise ValueError("record has no url")
    title = data.get("title")
    description = data.get("description")
    visit_count = data.get("visit_count", 0)
    last_visit_us = data.get("last_visit_us", 0)
    if title is not None and not isinstance(title, str):
        raise ValueError("title must be a string")
    if description is not None and not isinstance(description, str):
        raise ValueError("description must be a string")
    if not isinstance(visit_count, int) or isinstance(visit_count, bool):
        raise ValueError("visit_count must be an integer")
    if not isinstance(last_visit_us, int) or isinstance(last_visit_us, bool):
        raise ValueError("last_visit_us must be an integer")
    return HistoryRecord(url, title, description, visit_count, last_visit_us)


def _longer(a: Optional[str], b: Optional[str]) -> Optional[str]:
    if a is None:
        return b
    if b is None:
        return a
    return b if len(b) > len(a) else a


def read_history(lines: Iterable[str]) -> tuple[list[HistoryRecord], int]:
    """Parse an export stream; returns (records, skipped-line count).

    Malformed lines are skipped and counted; blank lines are ignored.
    Duplicate URLs collapse into one record keeping max visit_count, max
    last_visit_us, and the longest title/description.
    """
    merged: dict[str, HistoryRecord] = {}
    skipped = 0
    for line in lines:
        if not line.strip():
            continue
        try:
            rec = _record_from_json(line)
        except (ValueError, json.JSONDecodeError):
            skipped += 1
            continue
        prev = merged.get(rec.url)
        if prev is None:
            merged[rec.url] = rec
        else:
            merged[rec.url] = HistoryRecord(
                url=rec.url,
                title=_longer(prev.title, rec.title),
                description=_longer(prev.description, rec.description),
                visit_count=max(prev.visit_count, rec.visit_count),
                last_visit_us=max(prev.last_visit_us, rec.last_visit_us),
            )
    return list(merged.values()), skipped


def read_history_file(path) -> tuple[list[HistoryRecord], int]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_history(fh)


# --- HTML metadata ---------------------------------------------------------

_TITLE_RE = re.compile(r"<title\b[^>]*>(.*?)</title\s*>", re.IGNORECASE | re.DOTALL)
_META_RE = re.compile(r"<meta\b([^>]*)>", re.IGNORECASE | re.DOTALL)
_ATTR_RE = re.compile(
    r"""([A-Za-z][A-Za-z0-9_:.\-]*)\s*=\s*("([^"]*)"|'([^']*)'|[^\s"'>]+)""",
    re.DOTALL,
)
_TAG_RE = re.compile(r"<[^>]*>")
_WS_RE = re.compile(r"\s+")


def _attributes(raw: str) -> dict[str, str]:
    attrs: dict[str, str] = {}
    for m in _ATTR_RE.finditer(raw.rstrip().rstrip("/")):
        name = m.group(1).lower()
        if m.group(3) is not None:
            value = m.group(3)
        elif m.group(4) is not None:
            value = m.group(4)
        else:
            value = m.group(2)
        attrs.setdefault(name, html_module.unescape(value))
    return attrs


def extract_metadata(html: str) -> tuple[Optional[str], Optional[str]]:
    """(title, description) scraped tolerantly from page markup.

    Title is the first title element's content, tags stripped, entities
    decoded, whitespace collapsed. Description is the content attribute of
    the first meta element whose name equals "description" (element and
    attribute matching is case-insensitive; attribute order is irrelevant).
    Never raises on malformed markup.
    """
    title: Optional[str] = None
    m = _TITLE_RE.search(html)
    if m is not None:
        text = _TAG_RE.sub("", m.group(1))
        title = _WS_RE.sub(" ", html_module.unescape(text)).strip()
    description: Optional[str] = None
    for meta in _META_RE.finditer(html):
        attrs = _attributes(meta.group(1))
        if attrs.get("name", "").lower() == "description":
            description = attrs.get("content")
            break
    return title, description


def url_cache_name(url: str) -> str:
    """Cache file name for a URL: SHA-256 hex digest plus '.html'."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest() + ".html"


def cached_html(cache_dir, url: str) -> Optional[str]:
    path = Path(cache_dir) / url_cache_name(url)
    if not path.is_file():
        return None
    return path.read_text(encoding="utf-8", errors="replace")


def fill_from_cache(rec: HistoryRecord, cache_dir) -> HistoryRecord:
    """Fill missing title/description from the HTML cache; export fields win."""
    if rec.title is not None and rec.description is not None:
        return rec
    html = cached_html(cache_dir, rec.url)
    if html is None:
        return rec
    title, description = extract_metadata(html)
    return HistoryRecord(
        url=rec.url,
        title=rec.title if rec.title is not None else title,
        description=rec.description if rec.description is not None else description,
        visit_count=rec.visit_count,
        last_visit_us=rec.last_visit_us,
    )


# --- tokenization ----------------------------------------------------------

_SPLIT_RE = re.compile(r"[\W_]+", re.UNICODE)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = files("ontosearch").joinpath("data/stopwords.txt").read_text("utf-8")
    return _parse_stopwords(text.splitlines())


def _parse_stopwords(lines: Iterable[str]) -> frozenset[str]:
    out = set()
    for line in lines:
        word = line.split("#", 1)[0].strip()
        if word:
            out.add(word.lower())
    return frozenset(out)


def load_stopwords(path) -> frozenset[str]:
    """Stopword file: one token per line, '#' starts a comment."""
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_stopwords(fh)


def tokenize(text: str, stopwords: Optional[frozenset[str]] = None) -> list[str]:
    """Lowercase tokens split on non-alphanumerics; tokens shorter than two
    characters and stopwords are dropped; order and duplicates preserved."""
    if stopwords is None:
        stopwords = default_stopwords()
    return [
        tok
        for tok in _SPLIT_RE.split(text.lower())
        if len(tok) >= 2 and tok not in stopwords
    ]


# --- classification --------------------------------------------------------


@dataclass(frozen=True)
class Lexicon:
    """Keyword set driving automatic page classification for one class."""

    class_iri: Iri
    keywords: frozenset[str]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError(f"lexicon for {self.class_iri!r} has no keywords")
        for kw in self.keywords:
            if len(kw) < 2 or kw != kw.lower():
                raise ValueError(f"lexicon keyword must be lowercase, length >= 2: {kw!r}")


def load_lexicons(ontology: Graph) -> list[Lexicon]:
    """Lexicons from the ontology's keyword annotation triples."""
    by_class: dict[Iri, set[str]] = {}
    for t in ontology.match(None, VOCAB.keyword, None):
        if not isinstance(t.subject, Iri) or not isinstance(t.object, Literal):
            continue
        word = t.object.lexical.strip().lower()
        if len(word) >= 2:
            by_class.setdefault(t.subject, set()).add(word)
    return [
        Lexicon(class_iri, frozenset(words))
        for class_iri, words in sorted(by_class.items(), key=lambda kv: kv[0].value)
        if words
    ]


@dataclass(frozen=True)
class Classification:
    """Topic class assigned to a page, with its keyword-hit score."""

    class_iri: Optional[Iri]
    score: int
    ambiguous: bool = False

    def __post_init__(self) -> None:
        if self.class_iri is None and self.score != 0:
            raise ValueError("unclassified pages must have score 0")


def _nearest_common_superclass(tied: list[Iri], ontology: Graph) -> Iri:
    common: Optional[set[Term]] = None
    for c in tied:
        supers = superclasses(ontology, c, "all")
        common = supers if common is None else common & supers
    candidates = [c for c in (common or set()) if isinstance(c, Iri)]
    if not candidates:
        # No shared ancestor: fall back to the universal page class.
        return VOCAB.web_page
    candidates.sort(
        key=lambda c: (-len(superclasses(ontology, c, "all")), term_sort_key(c))
    )
    return candidates[0]


def classify(
    rec: HistoryRecord,
    lexicons: Iterable[Lexicon],
    ontology: Graph,
    stopwords: Optional[frozenset[str]] = None,
) -> Classification:
    """Score the page's title+description tokens against each lexicon.

    The unique top scorer (score >= 1) wins; an exact tie resolves to the
    nearest common superclass of the tied classes and is flagged
    ambiguous; no keyword hits at all leaves the page unclassified.
    """
    text = f"{rec.title or ''} {rec.description or ''}"
    token_set = set(tokenize(text, stopwords))
    scores = [
        (len(lex.keywords & token_set), lex.class_iri)
        for lex in lexicons
    ]
    scores = [(s, c) for s, c in scores if s >= 1]
    if not scores:
        return Classification(None, 0)
    best = max(s for s, _ in scores)
    winners = sorted((c for s, c in scores if s == best), key=term_sort_key)
    if len(winners) == 1:
        return Classification(winners[0], best)
    return Classification(_nearest_common_superclass(winners, ontology), best, ambiguous=True)


def page_triples(rec: HistoryRecord, cls: Classification) -> set[Triple]:
    """Triples describing one page individual; the page IRI is its URL."""
    try:
        page = Iri(rec.url)
    except RdfError as e:
        raise ValueError(f"record url is not a usable IRI: {rec.url!r}") from e
    out = {
        Triple(page, VOCAB.type, VOCAB.web_page),
        Triple(page, VOCAB.visit_count, Literal(str(rec.visit_count), XSD_INTEGER)),
        Triple(page, VOCAB.last_visit, Literal(str(rec.last_visit_us), XSD_INTEGER)),
    }
    if cls.class_iri is not None:
        out.add(Triple(page, VOCAB.type, cls.class_iri))
    if rec.title is not None:
        out.add(Triple(page, VOCAB.label, Literal(rec.title)))
    if rec.description is not None:
        out.add(Triple(page, VOCAB.comment, Literal(rec.description)))
    return out
