"""Semantic search over a user's browsing history.

The pipeline: history records are ingested and classified against an
ontology's keyword lexicons, page individuals are emitted as RDF triples,
an OWL-lite forward-chaining reasoner materializes the knowledge base, and
keyword queries are expanded through the class hierarchy before ranking.
"""

__version__ = "0.1.0"
