"""Truncated random walks over the undirected view of the network.

Every node roots walks_per_node walks of at most walk_length nodes. Each
walk draws from its own RNG stream derived from (seed, root index, walk
ordinal), so the corpus is a pure function of (network, config) no matter
how generation is scheduled. Output order is canonical: root index major,
walk ordinal minor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np
from numba import njit

from ._rng import derive3, next_below, xs_init
from .corpus import DocumentNetwork, _iter_lines, _source_name
from .errors import InputError, ParseError


@dataclass(frozen=True)
class WalkConfig:
    """Walk generation parameters; defaults follow the 80/80 setup."""

    walks_per_node: int = 80
    walk_length: int = 80
    seed: int = 1

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise InputError("walks_per_node must be >= 1")
        if self.walk_length < 1:
            raise InputError("walk_length must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")


@njit(cache=True)
def _walk_kernel(indptr, neighbors, walks_per_node, walk_length, seed, out, lengths):
    n_nodes = indptr.shape[0] - 1
    for root in range(n_nodes):
        for w in range(walks_per_node):
            stream = derive3(np.uint64(seed), np.uint64(root), np.uint64(w))
            state = xs_init(stream)
            row = root * walks_per_node + w
            cur = root
            out[row, 0] = cur
            length = 1
            for _ in range(walk_length - 1):
                lo = indptr[cur]
                deg = indptr[cur + 1] - lo
                if deg == 0:
                    break
                state, pick = next_below(state, np.uint64(deg))
                cur = neighbors[lo + np.int64(pick)]
                out[row, length] = cur
                length += 1
            lengths[row] = length


@dataclass(frozen=True)
class WalkCorpus:
    """Walk multiset in flat form plus per-node frequencies f_i.

    tokens holds all walks concatenated; walk w spans
    tokens[offsets[w]:offsets[w+1]]. frequencies[i] counts occurrences of
    node index i across all walks.
    """

    ids: tuple[str, ...]
    tokens: np.ndarray
    offsets: np.ndarray
    frequencies: np.ndarray

    @property
    def n_walks(self) -> int:
        return len(self.offsets) - 1

    def __len__(self) -> int:
        return self.n_walks

    def walk(self, w: int) -> np.ndarray:
        return self.tokens[self.offsets[w]:self.offsets[w + 1]]

    def __iter__(self) -> Iterator[np.ndarray]:
        for w in range(self.n_walks):
            yield self.walk(w)

    def walk_ids(self, w: int) -> tuple[str, ...]:
        return tuple(self.ids[t] for t in self.walk(w))

    @property
    def total_occurrences(self) -> int:
        return int(len(self.tokens))

    @cached_property
    def frequencies_by_id(self) -> dict[str, int]:
        return {doc_id: int(f) for doc_id, f in zip(self.ids, self.frequencies)}


def generate_walks(net: DocumentNetwork, cfg: WalkConfig) -> WalkCorpus:
    """Generate the walk corpus for a network; deterministic in (net, cfg)."""
    n = len(net)
    if n == 0:
        raise InputError("cannot generate walks on an empty network")
    indptr, neighbors = net._undirected_csr
    n_walks = n * cfg.walks_per_node
    padded = np.empty((n_walks, cfg.walk_length), dtype=np.int32)
    lengths = np.empty(n_walks, dtype=np.int64)
    _walk_kernel(indptr, neighbors, cfg.walks_per_node, cfg.walk_length,
                 cfg.seed, padded, lengths)

    offsets = np.zeros(n_walks + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    tokens = np.empty(int(offsets[-1]), dtype=np.int32)
    for w in range(n_walks):
        tokens[offsets[w]:offsets[w + 1]] = padded[w, :lengths[w]]
    frequencies = np.bincount(tokens, minlength=n).astype(np.int64)
    return WalkCorpus(net.ids, tokens, offsets, frequencies)


def top_m_nodes(corpus: WalkCorpus, m: int) -> list[str]:
    """The m ids with the largest f_i, descending; ties by ascending index."""
    freq = corpus.frequencies
    n_positive = int(np.count_nonzero(freq))
    if not 1 <= m <= n_positive:
        raise InputError(
            f"m must be between 1 and {n_positive} (nodes with positive frequency), got {m}"
        )
    order = np.lexsort((np.arange(len(freq)), -freq))
    picked = [i for i in order if freq[i] > 0][:m]
    return [corpus.ids[i] for i in picked]


def save_walks(corpus: WalkCorpus, target, header_lines: tuple[str, ...] = ()) -> None:
    """Write one walk per line, space-separated document ids."""

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        for w in range(corpus.n_walks):
            fh.write(" ".join(corpus.ids[t] for t in corpus.walk(w)))
            fh.write("\n")

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)


def load_walks(source) -> WalkCorpus:
    """Read a walk dump back into a corpus.

    Node indices follow first appearance in the file; frequencies are
    recounted from the walks themselves.
    """
    ids: list[str] = []
    index: dict[str, int] = {}
    token_chunks: list[list[int]] = []
    path = _source_name(source)
    for lineno, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = []
        for doc_id in stripped.split(" "):
            if doc_id not in index:
                index[doc_id] = len(ids)
                ids.append(doc_id)
            row.append(index[doc_id])
        if not row:
            raise ParseError("empty walk line", path=path, line=lineno)
        token_chunks.append(row)
    if not token_chunks:
        raise InputError("walk file contains no walks")
    offsets = np.zeros(len(token_chunks) + 1, dtype=np.int64)
    np.cumsum([len(c) for c in token_chunks], out=offsets[1:])
    tokens = np.fromiter(
        (t for chunk in token_chunks for t in chunk), dtype=np.int32, count=int(offsets[-1])
    )
    frequencies = np.bincount(tokens, minlength=len(ids)).astype(np.int64)
    return WalkCorpus(tuple(ids), tokens, offsets, frequencies)


def save_frequencies(corpus: WalkCorpus, target, header_lines: tuple[str, ...] = ()) -> None:
    """Write the per-node frequency table as `id<TAB>count` lines."""

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        for doc_id, f in zip(corpus.ids, corpus.frequencies):
            fh.write(f"{doc_id}\t{int(f)}\n")

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)


def load_frequencies(source) -> dict[str, int]:
    """Read a frequency table into an id → count map (file order kept)."""
    path = _source_name(source)
    freqs: dict[str, int] = {}
    for lineno, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError("expected `id<TAB>count`", path=path, line=lineno)
        doc_id = fields[0].strip()
        try:
            count = int(fields[1])
        except ValueError:
            raise ParseError(f"bad count {fields[1]!r}", path=path, line=lineno) from None
        if doc_id in freqs:
            raise ParseError(f"duplicate id {doc_id!r}", path=path, line=lineno)
        if count < 0:
            raise ParseError("negative count", path=path, line=lineno)
        freqs[doc_id] = count
    return freqs
