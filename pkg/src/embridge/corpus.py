"""Document network ingestion and leave-one-out surgery.

A DocumentNetwork couples a directed citation graph with optional token
content per document. Networks are immutable; the hide_links/hide_content
operations used by the evaluation protocols return modified copies.

Determinism note: edges are kept in a canonical order sorted by integer
index pair. Nothing in this package ever iterates a set of string ids
directly, because Python randomizes string hashing per process and that
would leak into output files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import InputError, ParseError

Tokenizer = Callable[[str], list[str]]


def default_tokenizer(text: str) -> list[str]:
    """Lowercase whitespace tokenizer used for all content files."""
    return text.lower().split()


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line) from a path or an iterable."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                yield lineno, line.rstrip("\n")
    else:
        for lineno, line in enumerate(source, 1):
            yield lineno, line.rstrip("\n")


def _source_name(source) -> str | None:
    return str(source) if isinstance(source, (str, Path)) else None


@dataclass(frozen=True)
class NetworkStats:
    """Headline counts for a document network."""

    n_documents: int
    n_links: int
    n_with_content: int
    n_isolated: int

    def as_dict(self) -> dict[str, int]:
        return {
            "n_documents": self.n_documents,
            "n_links": self.n_links,
            "n_with_content": self.n_with_content,
            "n_isolated": self.n_isolated,
        }


@dataclass(frozen=True)
class DocumentNetwork:
    """Directed document graph plus partial token content.

    ids fixes the integer index of every node (position in the tuple).
    edge_index holds directed (source, target) index pairs, deduplicated,
    self-loop free, sorted ascending. content maps id to a token tuple;
    an empty tuple means the document counts as content-missing.
    """

    ids: tuple[str, ...]
    edge_index: tuple[tuple[int, int], ...]
    content: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise InputError("duplicate document ids in network")
        for src, dst in self.edge_index:
            if not (0 <= src < n and 0 <= dst < n):
                raise InputError(f"edge ({src}, {dst}) references unknown node index")
            if src == dst:
                raise InputError(f"self-loop on index {src} not allowed")
        if len(set(self.edge_index)) != len(self.edge_index):
            raise InputError("duplicate edges in network")
        for doc_id in self.content:
            if doc_id not in self.index:
                raise InputError(f"content for unknown document id {doc_id!r}")

    # -- identity ---------------------------------------------------------

    @cached_property
    def index(self) -> dict[str, int]:
        return {doc_id: i for i, doc_id in enumerate(self.ids)}

    def index_of(self, doc_id: str) -> int:
        try:
            return self.index[doc_id]
        except KeyError:
            raise InputError(f"unknown document id {doc_id!r}") from None

    def id_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.ids):
            raise InputError(f"node index {idx} out of range")
        return self.ids[idx]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.index

    # -- views ------------------------------------------------------------

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        """Edge set as (source-id, target-id) pairs."""
        return frozenset((self.ids[s], self.ids[t]) for s, t in self.edge_index)

    @cached_property
    def _degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.ids), dtype=np.int64)
        for src, dst in self.edge_index:
            deg[src] += 1
            deg[dst] += 1
        return deg

    def degree(self, doc_id: str) -> int:
        """Number of incident directed edges, incoming plus outgoing."""
        return int(self._degrees[self.index_of(doc_id)])

    @cached_property
    def _undirected_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR adjacency of the undirected view, neighbor lists sorted."""
        adj: list[set[int]] = [set() for _ in self.ids]
        for src, dst in self.edge_index:
            adj[src].add(dst)
            adj[dst].add(src)
        indptr = np.zeros(len(self.ids) + 1, dtype=np.int64)
        for i, nbrs in enumerate(adj):
            indptr[i + 1] = indptr[i] + len(nbrs)
        neighbors = np.empty(int(indptr[-1]), dtype=np.int32)
        for i, nbrs in enumerate(adj):
            neighbors[indptr[i]:indptr[i + 1]] = sorted(nbrs)
        return indptr, neighbors

    def neighbor_ids(self, doc_id: str) -> tuple[str, ...]:
        """Undirected neighbor ids, ascending index order."""
        indptr, neighbors = self._undirected_csr
        i = self.index_of(doc_id)
        return tuple(self.ids[j] for j in neighbors[indptr[i]:indptr[i + 1]])

    def has_content(self, doc_id: str) -> bool:
        return len(self.content.get(doc_id, ())) > 0

    def content_in_index_order(self) -> dict[str, tuple[str, ...]]:
        """Non-empty content keyed by id, ordered by node index."""
        return {
            doc_id: self.content[doc_id]
            for doc_id in self.ids
            if len(self.content.get(doc_id, ())) > 0
        }

    def with_content(self, content: Mapping[str, Iterable[str]]) -> "DocumentNetwork":
        """Attach content to this network's nodes.

        Ids absent from the network are dropped with a warning so a large
        content file can be joined against a smaller edge file.
        """
        known: dict[str, tuple[str, ...]] = {}
        unknown = 0
        for doc_id, tokens in content.items():
            if doc_id in self.index:
                known[doc_id] = tuple(tokens)
            else:
                unknown += 1
        if unknown:
            warnings.warn(f"dropped content for {unknown} ids not in the network")
        return DocumentNetwork(self.ids, self.edge_index, known)


def load_edge_list(source) -> DocumentNetwork:
    """Read a `source<TAB>target` edge file into a network.

    Blank lines and `#` comments are skipped. Node indices follow first
    appearance order. Duplicate edges are collapsed; self-loops are
    dropped and reported through a single warning.
    """
    path = _source_name(source)
    ids: list[str] = []
    index: dict[str, int] = {}
    edges: set[tuple[int, int]] = set()
    self_loops = 0

    def intern(doc_id: str) -> int:
        if doc_id not in index:
            index[doc_id] = len(ids)
            ids.append(doc_id)
        return index[doc_id]

    for lineno, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected `source<TAB>target`, got {len(fields)} fields",
                path=path,
                line=lineno,
            )
        src_id, dst_id = fields[0].strip(), fields[1].strip()
        if not src_id or not dst_id:
            raise ParseError("empty id field", path=path, line=lineno)
        src, dst = intern(src_id), intern(dst_id)
        if src == dst:
            self_loops += 1
            continue
        edges.add((src, dst))

    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop edges")
    return DocumentNetwork(tuple(ids), tuple(sorted(edges)))


def load_content(source, tokenizer: Tokenizer = default_tokenizer) -> dict[str, tuple[str, ...]]:
    """Read an `id<TAB>raw text` content file into a token map.

    Text is split on the first tab only, so document text may itself
    contain tabs. Empty text yields an empty token tuple (the document
    then counts as content-missing).
    """
    path = _source_name(source)
    content: dict[str, tuple[str, ...]] = {}
    for lineno, line in _iter_lines(source):
        if not line.strip() or line.startswith("#"):
            continue
        doc_id, sep, text = line.partition("\t")
        doc_id = doc_id.strip()
        if not sep:
            raise ParseError("expected `id<TAB>text`", path=path, line=lineno)
        if not doc_id:
            raise ParseError("empty id field", path=path, line=lineno)
        if doc_id in content:
            raise ParseError(f"duplicate content for id {doc_id!r}", path=path, line=lineno)
        content[doc_id] = tuple(tokenizer(text))
    return content


def hide_links(net: DocumentNetwork, doc_id: str) -> DocumentNetwork:
    """Copy of net with every edge touching doc_id removed.

    The document stays in the network as an isolated node, which is
    exactly the missing-link condition the evaluation protocol needs.
    """
    i = net.index_of(doc_id)
    kept = tuple(e for e in net.edge_index if i not in e)
    return DocumentNetwork(net.ids, kept, net.content)


def hide_content(net: DocumentNetwork, doc_id: str) -> DocumentNetwork:
    """Copy of net with doc_id's content removed; edges untouched."""
    net.index_of(doc_id)
    if not net.has_content(doc_id):
        raise InputError(f"document {doc_id!r} has no content to hide")
    remaining = {k: v for k, v in net.content.items() if k != doc_id}
    return DocumentNetwork(net.ids, net.edge_index, remaining)


def stats(net: DocumentNetwork) -> NetworkStats:
    """Count documents, links, content coverage, and isolated nodes."""
    degrees = net._degrees
    n_with_content = sum(1 for doc_id in net.ids if net.has_content(doc_id))
    return NetworkStats(
        n_documents=len(net.ids),
        n_links=len(net.edge_index),
        n_with_content=n_with_content,
        n_isolated=int(np.count_nonzero(degrees == 0)) if len(net.ids) else 0,
    )
