"""Embedding trainers: skip-gram negative sampling over walks, and
paragraph vectors (DV-DM / DV-DBOW) over document content.

Both trainers share one negative-sampling core. Vectors are float32 in
the hot loops with an interpolated sigmoid lookup table; updates follow
the classic formulation: for target t with label y,

    g = lr * (sigmoid(input . out_t) - y)
    grad_input += g * out_t        (applied after all targets)
    out_t      -= g * input

Learning rate decays linearly from initial_lr to initial_lr/100 over all
center positions of all epochs, indexed by flat token position so the
schedule does not depend on worker scheduling.

Concurrency: each kernel exists in a sequential build (bit-deterministic,
the default) and a parallel build sharding walks/documents across threads
with unsynchronized updates (quality-level determinism only). Both builds
compile from the same template; RNG streams are derived per (epoch,
shard) so the sequential result is independent of that split too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from numba import njit, prange

from ._rng import derive3, to_unit, xs_init, xs_next
from .corpus import _iter_lines, _source_name
from .errors import ConsistencyError, InputError, ParseError
from .walks import WalkCorpus

VARIANT_NODE = "node-sgns"
VARIANT_DM = "dv-dm"
VARIANT_DBOW = "dv-dbow"
VARIANTS = (VARIANT_NODE, VARIANT_DM, VARIANT_DBOW)

_SIG_SIZE = 2048
_SIG_MAX = 6.0
_SIG_TABLE = 1.0 / (1.0 + np.exp(-np.linspace(-_SIG_MAX, _SIG_MAX, _SIG_SIZE)))
_SIG_SCALE = (_SIG_SIZE - 1) / (2.0 * _SIG_MAX)
_NOISE_TABLE_SIZE = 1 << 20
_NOISE_POWER = 0.75
_LR_FLOOR = 0.99  # lr(t) = lr0 * (1 - _LR_FLOOR * t / T): ends at lr0/100


@dataclass(frozen=True)
class TrainConfig:
    """Shared trainer configuration; defaults follow the 500/10/5 setup."""

    dim: int = 500
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    seed: int = 1
    variant: str = VARIANT_NODE
    min_count: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if self.window < 1:
            raise InputError("window must be >= 1")
        if self.negatives < 1:
            raise InputError("negatives must be >= 1")
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        if not self.initial_lr > 0:
            raise InputError("initial_lr must be positive")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.min_count < 1:
            raise InputError("min_count must be >= 1")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Id-indexed dense vectors of shared dimension."""

    ids: tuple[str, ...]
    matrix: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise InputError(f"embedding matrix must be 2-D, got shape {self.matrix.shape}")
        if len(self.ids) != self.matrix.shape[0]:
            raise InputError(
                f"{len(self.ids)} ids but {self.matrix.shape[0]} matrix rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise InputError("duplicate ids in embedding matrix")
        if not np.all(np.isfinite(self.matrix)):
            raise InputError("embedding matrix contains non-finite values")
        if self.normalized and len(self.ids):
            norms = np.linalg.norm(self.matrix, axis=1)
            if np.abs(norms - 1.0).max() > 1e-6:
                raise InputError("normalized flag set but rows are not unit norm")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    @cached_property
    def index(self) -> dict[str, int]:
        return {doc_id: i for i, doc_id in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.index

    def vector(self, doc_id: str) -> np.ndarray:
        try:
            return self.matrix[self.index[doc_id]]
        except KeyError:
            raise ConsistencyError(f"no vector for document id {doc_id!r}") from None

    def rows_for(self, ids: Sequence[str]) -> np.ndarray:
        return self.matrix[[self.index_of(doc_id) for doc_id in ids]]

    def index_of(self, doc_id: str) -> int:
        try:
            return self.index[doc_id]
        except KeyError:
            raise ConsistencyError(f"no vector for document id {doc_id!r}") from None

    def normalized_copy(self) -> "EmbeddingMatrix":
        from .linalg import row_normalize

        if self.normalized:
            return self
        return EmbeddingMatrix(self.ids, row_normalize(self.matrix), normalized=True)


# -- numeric helpers -------------------------------------------------------


def build_noise_table(weights: np.ndarray, power: float = _NOISE_POWER,
                      size: int = _NOISE_TABLE_SIZE) -> np.ndarray:
    """Sampling table over indices, proportional to weights**power."""
    w = np.asarray(weights, dtype=np.float64) ** power
    total = w.sum()
    if not total > 0:
        raise InputError("noise distribution has no mass")
    cum = np.cumsum(w)
    targets = (np.arange(size) + 0.5) / size * total
    return np.searchsorted(cum, targets, side="left").astype(np.int32)


@njit(cache=True, inline="always")
def _sigmoid(x, table):
    if x >= _SIG_MAX:
        return 1.0
    if x <= -_SIG_MAX:
        return 0.0
    pos = (x + _SIG_MAX) * _SIG_SCALE
    i = np.int64(pos)
    frac = pos - i
    return table[i] + frac * (table[i + 1] - table[i])


@njit(cache=True)
def _fill_uniform(out, seed, label, dim):
    state = xs_init(derive3(np.uint64(seed), np.uint64(label), np.uint64(0)))
    for i in range(out.shape[0]):
        state, z = xs_next(state)
        out[i] = (to_unit(z) - 0.5) / dim


def _init_vectors(n: int, dim: int, seed: int, label: int) -> np.ndarray:
    """word2vec-style init: uniform in (-0.5/dim, 0.5/dim), own RNG."""
    out = np.empty(n * dim, dtype=np.float32)
    _fill_uniform(out, seed, label, dim)
    return out.reshape(n, dim)


# -- kernels ---------------------------------------------------------------


def _sgns_kernel_template(tokens, offsets, syn0, syn1, noise_table, sig_table,
                          window, negatives, lr0, epochs, seed, track_loss, losses):
    n_walks = offsets.shape[0] - 1
    dim = syn0.shape[1]
    tsize = noise_table.shape[0]
    total = np.float64(tokens.shape[0]) * epochs
    decay = _LR_FLOOR / total
    for epoch in range(epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for w in prange(n_walks):
            walk_loss = 0.0
            walk_pairs = 0
            neu = np.empty(dim, dtype=np.float32)
            state = xs_init(derive3(np.uint64(seed), np.uint64(epoch), np.uint64(w)))
            start = offsets[w]
            end = offsets[w + 1]
            base = np.float64(epoch) * tokens.shape[0]
            for pos in range(start, end):
                center = tokens[pos]
                lr = lr0 * (1.0 - decay * (base + pos))
                # word2vec-style dynamic window: effective half-width
                # uniform in [1, window], never exceeding cfg.window
                state, z = xs_next(state)
                w_eff = window - np.int64(to_unit(z) * window)
                lo = pos - w_eff
                if lo < start:
                    lo = start
                hi = pos + w_eff
                if hi > end - 1:
                    hi = end - 1
                crow = syn0[center]
                for cpos in range(lo, hi + 1):
                    if cpos == pos:
                        continue
                    ctx = tokens[cpos]
                    for d in range(dim):
                        neu[d] = np.float32(0.0)
                    for k in range(negatives + 1):
                        if k == 0:
                            target = ctx
                            label = 1.0
                        else:
                            state, z = xs_next(state)
                            target = noise_table[np.int64(to_unit(z) * tsize)]
                            if target == ctx:
                                continue
                            label = 0.0
                        trow = syn1[target]
                        f = np.float32(0.0)
                        for d in range(dim):
                            f += crow[d] * trow[d]
                        sig = _sigmoid(np.float64(f), sig_table)
                        if track_loss:
                            if label == 1.0:
                                walk_loss += -math.log(max(sig, 1e-10))
                            else:
                                walk_loss += -math.log(max(1.0 - sig, 1e-10))
                        g = np.float32(lr * (sig - label))
                        for d in range(dim):
                            neu[d] += g * trow[d]
                        for d in range(dim):
                            trow[d] -= g * crow[d]
                    walk_pairs += 1
                    for d in range(dim):
                        crow[d] -= neu[d]
            epoch_loss += walk_loss
            epoch_pairs += walk_pairs
        losses[epoch] = epoch_loss / max(epoch_pairs, 1)


def _doc_kernel_template(tokens, offsets, dvecs, win, wout, noise_table, sig_table,
                         window, negatives, lr0, epochs, seed, use_context,
                         track_loss, losses):
    n_docs = offsets.shape[0] - 1
    dim = dvecs.shape[1]
    tsize = noise_table.shape[0]
    total = np.float64(tokens.shape[0]) * epochs
    decay = _LR_FLOOR / total
    for epoch in range(epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for doc in prange(n_docs):
            doc_loss = 0.0
            doc_pairs = 0
            h = np.empty(dim, dtype=np.float32)
            neu = np.empty(dim, dtype=np.float32)
            state = xs_init(derive3(np.uint64(seed), np.uint64(epoch), np.uint64(doc)))
            start = offsets[doc]
            end = offsets[doc + 1]
            base = np.float64(epoch) * tokens.shape[0]
            drow = dvecs[doc]
            for pos in range(start, end):
                wt = tokens[pos]
                lr = lr0 * (1.0 - decay * (base + pos))
                state, z = xs_next(state)
                w_eff = window - np.int64(to_unit(z) * window)
                lo = pos - w_eff
                if lo < start:
                    lo = start
                hi = pos + w_eff
                if hi > end - 1:
                    hi = end - 1
                # hidden layer: doc vector, averaged with context words in DM
                n_ctx = 0
                for d in range(dim):
                    h[d] = drow[d]
                if use_context:
                    for cpos in range(lo, hi + 1):
                        if cpos == pos:
                            continue
                        cw = tokens[cpos]
                        for d in range(dim):
                            h[d] += win[cw, d]
                        n_ctx += 1
                inv = np.float32(1.0 / (1.0 + n_ctx))
                if use_context and n_ctx > 0:
                    for d in range(dim):
                        h[d] *= inv
                for d in range(dim):
                    neu[d] = np.float32(0.0)
                for k in range(negatives + 1):
                    if k == 0:
                        target = wt
                        label = 1.0
                    else:
                        state, z = xs_next(state)
                        target = noise_table[np.int64(to_unit(z) * tsize)]
                        if target == wt:
                            continue
                        label = 0.0
                    trow = wout[target]
                    f = np.float32(0.0)
                    for d in range(dim):
                        f += h[d] * trow[d]
                    sig = _sigmoid(np.float64(f), sig_table)
                    if track_loss:
                        if label == 1.0:
                            doc_loss += -math.log(max(sig, 1e-10))
                        else:
                            doc_loss += -math.log(max(1.0 - sig, 1e-10))
                    g = np.float32(lr * (sig - label))
                    for d in range(dim):
                        neu[d] += g * trow[d]
                    for d in range(dim):
                        trow[d] -= g * h[d]
                doc_pairs += 1
                # exact gradient of the mean combiner: scale by 1/(1+n_ctx)
                if use_context and n_ctx > 0:
                    for d in range(dim):
                        neu[d] *= inv
                    for d in range(dim):
                        drow[d] -= neu[d]
                    for cpos in range(lo, hi + 1):
                        if cpos == pos:
                            continue
                        cw = tokens[cpos]
                        crow = win[cw]
                        for d in range(dim):
                            crow[d] -= neu[d]
                else:
                    for d in range(dim):
                        drow[d] -= neu[d]
            epoch_loss += doc_loss
            epoch_pairs += doc_pairs
        losses[epoch] = epoch_loss / max(epoch_pairs, 1)


_KERNEL_OPTS = dict(cache=True, fastmath=True, nogil=True)
_sgns_seq = njit(**_KERNEL_OPTS)(_sgns_kernel_template)
_sgns_par = njit(parallel=True, **_KERNEL_OPTS)(_sgns_kernel_template)
_doc_seq = njit(**_KERNEL_OPTS)(_doc_kernel_template)
_doc_par = njit(parallel=True, **_KERNEL_OPTS)(_doc_kernel_template)


def _set_workers(workers: int) -> None:
    if workers < 1:
        raise InputError("workers must be >= 1")
    if workers > 1:
        import numba

        numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))


# -- reference step --------------------------------------------------------


def sgns_step(center, context, negatives, lr):
    """One exact SGD step on -log s(u.v) - sum -log s(-u.n).

    Reference implementation in float64 with the true sigmoid; the
    trainers above apply the same math in float32 with a lookup table.
    Returns (center', context', negatives', loss) with the loss computed
    before the update.
    """
    u = np.array(center, dtype=np.float64)
    v = np.array(context, dtype=np.float64)
    negs = np.array(negatives, dtype=np.float64)
    if negs.size == 0:
        negs = negs.reshape(0, u.shape[0])
    if u.ndim != 1 or v.ndim != 1 or negs.ndim != 2:
        raise InputError("center/context must be vectors, negatives a vector list")
    if not (u.shape[0] == v.shape[0] == negs.shape[1]):
        raise ConsistencyError("sgns_step vectors must share one dimension")
    if lr < 0:
        raise InputError("lr must be non-negative")

    def sigmoid(x):
        return 1.0 / (1.0 + np.exp(-x))

    pos_sig = sigmoid(u @ v)
    neg_sig = sigmoid(negs @ u)
    with np.errstate(divide="ignore"):
        loss = -np.log(max(pos_sig, 1e-300)) - np.log(np.maximum(1.0 - neg_sig, 1e-300)).sum()

    grad_u = (pos_sig - 1.0) * v + neg_sig @ negs
    grad_v = (pos_sig - 1.0) * u
    grad_negs = neg_sig[:, None] * u[None, :]
    return u - lr * grad_u, v - lr * grad_v, negs - lr * grad_negs, float(loss)


# -- trainers --------------------------------------------------------------


def train_node_embeddings(corpus: WalkCorpus, cfg: TrainConfig, workers: int = 1,
                          return_losses: bool = False):
    """Skip-gram with negative sampling over the walk corpus.

    Emits one vector per node that participated in at least one
    (center, context) pair, i.e. appeared in a walk of length >= 2.
    Isolated nodes only ever root length-1 walks, so they come out
    without a vector: exactly the missing-representation case the
    translation pipeline exists to fill.
    """
    if cfg.variant != VARIANT_NODE:
        raise InputError(f"node trainer requires variant {VARIANT_NODE!r}, got {cfg.variant!r}")
    if corpus.tokens.size == 0:
        raise InputError("empty walk corpus")
    _set_workers(workers)

    n = len(corpus.ids)
    noise = build_noise_table(corpus.frequencies)
    syn0 = _init_vectors(n, cfg.dim, cfg.seed, 1)
    syn1 = np.zeros((n, cfg.dim), dtype=np.float32)
    losses = np.zeros(cfg.epochs, dtype=np.float64)
    kernel = _sgns_par if workers > 1 else _sgns_seq
    kernel(corpus.tokens, corpus.offsets, syn0, syn1, noise, _SIG_TABLE,
           cfg.window, cfg.negatives, cfg.initial_lr, cfg.epochs, cfg.seed,
           return_losses, losses)

    lengths = np.diff(corpus.offsets)
    in_pair_walk = np.repeat(lengths >= 2, lengths)
    covered = np.zeros(n, dtype=bool)
    covered[corpus.tokens[in_pair_walk]] = True
    ids = tuple(doc_id for i, doc_id in enumerate(corpus.ids) if covered[i])
    emb = EmbeddingMatrix(ids, syn0[covered].astype(np.float64))
    return (emb, losses) if return_losses else emb


def _build_vocab(content: Mapping[str, Sequence[str]], min_count: int):
    """Filter words by frequency; returns kept docs in map order."""
    counts: dict[str, int] = {}
    for doc_id in content:
        for token in content[doc_id]:
            counts[token] = counts.get(token, 0) + 1
    word_index: dict[str, int] = {}
    word_freq: list[int] = []
    for doc_id in content:
        for token in content[doc_id]:
            if counts[token] >= min_count and token not in word_index:
                word_index[token] = len(word_index)
                word_freq.append(counts[token])
    doc_ids: list[str] = []
    doc_tokens: list[list[int]] = []
    for doc_id in content:
        kept = [word_index[t] for t in content[doc_id] if t in word_index]
        if kept:
            doc_ids.append(doc_id)
            doc_tokens.append(kept)
    return doc_ids, doc_tokens, np.asarray(word_freq, dtype=np.int64)


def train_content_embeddings(content: Mapping[str, Sequence[str]], cfg: TrainConfig,
                             workers: int = 1, return_losses: bool = False):
    """Paragraph-vector training: DV-DM (default) or DV-DBOW.

    DV-DM predicts each word from the average of the document vector and
    the context-word input vectors; DV-DBOW predicts each in-document
    word from the document vector alone. Words occurring fewer than
    cfg.min_count times are dropped before windowing; documents with no
    surviving tokens get no vector.
    """
    if cfg.variant not in (VARIANT_DM, VARIANT_DBOW):
        raise InputError(
            f"content trainer requires variant {VARIANT_DM!r} or {VARIANT_DBOW!r}, "
            f"got {cfg.variant!r}"
        )
    if not any(len(tokens) for tokens in content.values()):
        raise InputError("no document has any content")
    _set_workers(workers)

    doc_ids, doc_tokens, word_freq = _build_vocab(content, cfg.min_count)
    if not doc_ids:
        raise InputError(
            f"no document retains tokens after min_count={cfg.min_count} filtering"
        )
    offsets = np.zeros(len(doc_ids) + 1, dtype=np.int64)
    np.cumsum([len(t) for t in doc_tokens], out=offsets[1:])
    tokens = np.fromiter(
        (t for doc in doc_tokens for t in doc), dtype=np.int32, count=int(offsets[-1])
    )

    n_docs, n_words = len(doc_ids), len(word_freq)
    noise = build_noise_table(word_freq)
    dvecs = _init_vectors(n_docs, cfg.dim, cfg.seed, 2)
    win = _init_vectors(n_words, cfg.dim, cfg.seed, 3)
    wout = np.zeros((n_words, cfg.dim), dtype=np.float32)
    losses = np.zeros(cfg.epochs, dtype=np.float64)
    use_context = cfg.variant == VARIANT_DM
    kernel = _doc_par if workers > 1 else _doc_seq
    kernel(tokens, offsets, dvecs, win, wout, noise, _SIG_TABLE,
           cfg.window, cfg.negatives, cfg.initial_lr, cfg.epochs, cfg.seed,
           use_context, return_losses, losses)

    emb = EmbeddingMatrix(tuple(doc_ids), dvecs.astype(np.float64))
    return (emb, losses) if return_losses else emb


# -- persistence -----------------------------------------------------------


def save_embeddings(emb: EmbeddingMatrix, target, header_lines: tuple[str, ...] = ()) -> None:
    """Write `N k` header then one `id v1 ... vk` line per vector."""

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"{len(emb.ids)} {emb.dim}\n")
        for doc_id, row in zip(emb.ids, emb.matrix):
            fh.write(doc_id)
            for value in row:
                fh.write(f" {value:.12g}")
            fh.write("\n")

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)


def load_embeddings(source) -> EmbeddingMatrix:
    """Read an embedding file; the normalized flag is re-detected from rows."""
    path = _source_name(source)
    header: tuple[int, int] | None = None
    ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    for lineno, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if header is None:
            if len(fields) != 2:
                raise ParseError("expected header `N k`", path=path, line=lineno)
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError:
                raise ParseError("non-integer header", path=path, line=lineno) from None
            if header[0] < 0 or header[1] < 1:
                raise ParseError("header requires N >= 0 and k >= 1", path=path, line=lineno)
            continue
        doc_id = fields[0]
        if doc_id in seen:
            raise ParseError(f"duplicate id {doc_id!r}", path=path, line=lineno)
        seen.add(doc_id)
        if len(fields) - 1 != header[1]:
            raise ParseError(
                f"expected {header[1]} components, got {len(fields) - 1}",
                path=path,
                line=lineno,
            )
        try:
            row = np.array([float(x) for x in fields[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError("bad float component", path=path, line=lineno) from None
        ids.append(doc_id)
        rows.append(row)
    if header is None:
        raise InputError("embedding file has no header")
    if len(ids) != header[0]:
        raise InputError(f"header says {header[0]} rows, file has {len(ids)}")
    matrix = np.vstack(rows) if rows else np.zeros((0, header[1]))
    normalized = False
    if len(ids):
        norms = np.linalg.norm(matrix, axis=1)
        normalized = bool(np.abs(norms - 1.0).max() <= 1e-6)
    return EmbeddingMatrix(tuple(ids), matrix, normalized=normalized)
