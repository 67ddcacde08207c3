"""Leave-one-out evaluation protocols.

Link protocol: hide one document's links, retrain node embeddings on the
sub-network, learn the projection, and test whether the translated
content vector ranks the true neighbors highly (P@n) against a pure
content-similarity baseline and a shuffled top-degree baseline.

Content protocol: hide one document's text, retrain content embeddings,
learn the projection, translate the document's node vector into content
space, and compare the thresholded similar-set against the truth set
computed from the full corpus (precision/recall/F1; the headline number
is recall). A node-space thresholding serves as the baseline.

Every leave-one-out iteration derives its own seeds from the document's
node index, so reports are identical however iterations are scheduled.
Training inside the protocols always runs in the bit-deterministic
single-worker mode; the workers argument parallelizes iterations only.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._rng import derive2, next_below, stream_seed, xs_init
from .align import (
    ProjectionMatrix,
    build_dictionary,
    learn_projection,
    translate_content_to_node,
    translate_node_to_content,
)
from .corpus import DocumentNetwork, hide_content, hide_links
from .embedding import (
    EmbeddingMatrix,
    TrainConfig,
    VARIANT_NODE,
    train_content_embeddings,
    train_node_embeddings,
)
from .errors import ConsistencyError, InputError
from .walks import WalkConfig, generate_walks

LINK_METHODS = ("translated", "content", "random200")
CONTENT_METHODS = ("translated", "node")

# Reduced per-leave-out training defaults: each link iteration retrains
# node embeddings from scratch, so the full 80x80/dim-500 configuration
# is reserved for explicit full-scale runs.
DESK_WALKS_PER_NODE = 10
DESK_WALK_LENGTH = 40
DESK_DIM = 64
DESK_EPOCHS = 3

_SAMPLE_LABEL = 11
_WALK_LABEL = 12
_TRAIN_LABEL = 13
_RANDOM200_LABEL = 14
_RETRAIN_LABEL = 15


def desk_walk_config(seed: int = 1) -> WalkConfig:
    return WalkConfig(walks_per_node=DESK_WALKS_PER_NODE,
                      walk_length=DESK_WALK_LENGTH, seed=seed)


def desk_train_config(variant: str = VARIANT_NODE, seed: int = 1) -> TrainConfig:
    return TrainConfig(dim=DESK_DIM, epochs=DESK_EPOCHS, seed=seed, variant=variant)


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol parameters; sample_size None means every eligible doc."""

    sample_size: int | None = 100
    threshold: float = 0.2
    n_values: tuple[int, ...] = (5, 10, 20, 50)
    seed: int = 1

    def __post_init__(self):
        if self.sample_size is not None and self.sample_size < 0:
            raise InputError("sample_size must be >= 0 or None for all")
        if not np.isfinite(self.threshold):
            raise InputError("threshold must be finite")
        if not self.n_values:
            raise InputError("n_values must not be empty")
        if any(n < 1 for n in self.n_values):
            raise InputError("every n in n_values must be >= 1")
        if self.seed < 0:
            raise InputError("seed must be a non-negative integer")


# -- metric primitives -----------------------------------------------------


def precision_at_n(ranked: Sequence[str], truth: Iterable[str], n: int) -> float:
    """|top-n of ranked that are true| / n.

    The denominator is always n, so documents with fewer than n true
    neighbors cap below 1. A ranked list shorter than n only limits the
    numerator (with a warning).
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if n > len(ranked):
        warnings.warn(f"precision_at_n: n={n} exceeds {len(ranked)} ranked candidates")
    truth_set = set(truth)
    return sum(1 for doc_id in ranked[:n] if doc_id in truth_set) / n


def _rank_against(query: np.ndarray, emb: EmbeddingMatrix, exclude: str) -> list[str]:
    """Ids of emb by descending cosine to query; ties by ascending index."""
    qn = float(np.linalg.norm(query))
    if qn == 0.0:
        raise ConsistencyError("cannot rank against a zero query vector")
    norms = np.linalg.norm(emb.matrix, axis=1)
    if len(norms) and norms.min() == 0.0:
        raise ConsistencyError("embedding matrix contains a zero row")
    scores = (emb.matrix @ query) / (norms * qn)
    order = np.argsort(-scores, kind="stable")
    return [emb.ids[i] for i in order if emb.ids[i] != exclude]


def rank_by_translated_node(doc_id: str, b_emb: EmbeddingMatrix, proj: ProjectionMatrix,
                            a_sub: EmbeddingMatrix) -> list[str]:
    """Rank a_sub ids by cosine to the translated node vector b_i W."""
    translated = translate_content_to_node(b_emb.vector(doc_id), proj)
    return _rank_against(translated, a_sub, exclude=doc_id)


def baseline_content_rank(doc_id: str, b_emb: EmbeddingMatrix) -> list[str]:
    """Rank all other content vectors by cosine to b_i."""
    return _rank_against(b_emb.vector(doc_id), b_emb, exclude=doc_id)


def baseline_random200(net: DocumentNetwork, seed: int, pool_size: int = 200) -> list[str]:
    """Top pool_size ids by degree (ties by index), shuffled by seed."""
    degrees = net._degrees
    order = np.lexsort((np.arange(len(degrees)), -degrees))
    pool = [net.ids[i] for i in order[:pool_size]]
    state = xs_init(derive2(np.uint64(seed), np.uint64(_RANDOM200_LABEL)))
    for i in range(len(pool) - 1, 0, -1):
        state, j = next_below(state, np.uint64(i + 1))
        j = int(j)
        pool[i], pool[j] = pool[j], pool[i]
    return pool


def similar_set(emb: EmbeddingMatrix, query: np.ndarray, threshold: float,
                exclude: str | None = None) -> set[str]:
    """Ids whose cosine to query strictly exceeds threshold."""
    qn = float(np.linalg.norm(query))
    if qn == 0.0:
        raise ConsistencyError("cannot threshold against a zero query vector")
    norms = np.linalg.norm(emb.matrix, axis=1)
    if len(norms) and norms.min() == 0.0:
        raise ConsistencyError("embedding matrix contains a zero row")
    scores = (emb.matrix @ query) / (norms * qn)
    picked = np.nonzero(scores > threshold)[0]
    return {emb.ids[i] for i in picked if emb.ids[i] != exclude}


def true_similar_set(b_emb: EmbeddingMatrix, doc_id: str, threshold: float) -> set[str]:
    """S_i: other docs whose content cosine to doc_id strictly exceeds threshold."""
    return similar_set(b_emb, b_emb.vector(doc_id), threshold, exclude=doc_id)


# -- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class LinkEvalReport:
    """Per-document P@n for the three ranking methods, plus aggregates."""

    doc_ids: tuple[str, ...]
    n_values: tuple[int, ...]
    precisions: Mapping[str, np.ndarray]
    skipped_no_links: int
    skipped_no_content_vector: int
    config: Mapping[str, object]

    def averages(self) -> dict[str, dict[int, float]]:
        if not self.doc_ids:
            return {}
        return {
            method: {
                n: float(self.precisions[method][:, j].mean())
                for j, n in enumerate(self.n_values)
            }
            for method in LINK_METHODS
        }

    def gains(self, method: str = "translated") -> dict[str, dict[int, float | None]]:
        """Relative gain of method over each baseline; None when baseline is 0."""
        avg = self.averages()
        if not avg:
            return {}
        out: dict[str, dict[int, float | None]] = {}
        for baseline in LINK_METHODS:
            if baseline == method:
                continue
            out[baseline] = {}
            for n in self.n_values:
                base = avg[baseline][n]
                out[baseline][n] = (avg[method][n] - base) / base if base > 0 else None
        return out

    def flat_lines(self) -> list[str]:
        lines = []
        for i, doc_id in enumerate(self.doc_ids):
            for method in LINK_METHODS:
                for j, n in enumerate(self.n_values):
                    lines.append(f"{doc_id}\t{method}\tP@{n}\t{self.precisions[method][i, j]:.6f}")
        return lines

    def format_table(self) -> str:
        lines = [
            f"documents evaluated: {len(self.doc_ids)} "
            f"(skipped: {self.skipped_no_links} without links, "
            f"{self.skipped_no_content_vector} without content vector)"
        ]
        if not self.doc_ids:
            return "\n".join(lines)
        avg = self.averages()
        header = "method              " + "".join(f"{'P@' + str(n):<10}" for n in self.n_values)
        lines.append(header)
        for method in LINK_METHODS:
            row = f"{method:<20}" + "".join(f"{avg[method][n]:<10.4f}" for n in self.n_values)
            lines.append(row)
        for baseline, by_n in self.gains().items():
            cells = "".join(
                (f"{by_n[n]:+.1%}" if by_n[n] is not None else "undefined").ljust(10)
                for n in self.n_values
            )
            lines.append(f"{'gain vs ' + baseline:<20}{cells}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ContentEvalReport:
    """Per-document precision/recall/F1 for both estimation methods."""

    doc_ids: tuple[str, ...]
    metrics: Mapping[str, np.ndarray]
    skipped_empty_truth: int
    skipped_missing_vectors: int
    config: Mapping[str, object]

    METRIC_NAMES = ("precision", "recall", "f1")

    def averages(self) -> dict[str, dict[str, float]]:
        if not self.doc_ids:
            return {}
        return {
            method: {
                name: float(self.metrics[method][:, j].mean())
                for j, name in enumerate(self.METRIC_NAMES)
            }
            for method in CONTENT_METHODS
        }

    def headline(self) -> dict[str, float]:
        """Average recall per method: the share of S_i recovered."""
        avg = self.averages()
        return {method: avg[method]["recall"] for method in avg}

    def flat_lines(self) -> list[str]:
        lines = []
        for i, doc_id in enumerate(self.doc_ids):
            for method in CONTENT_METHODS:
                for j, name in enumerate(self.METRIC_NAMES):
                    lines.append(f"{doc_id}\t{method}\t{name}\t{self.metrics[method][i, j]:.6f}")
        return lines

    def format_table(self) -> str:
        lines = [
            f"documents evaluated: {len(self.doc_ids)} "
            f"(skipped: {self.skipped_empty_truth} with empty truth set, "
            f"{self.skipped_missing_vectors} without both vectors)"
        ]
        if not self.doc_ids:
            return "\n".join(lines)
        avg = self.averages()
        lines.append("method      precision recall    f1")
        for method in CONTENT_METHODS:
            a = avg[method]
            lines.append(
                f"{method:<12}{a['precision']:<10.4f}{a['recall']:<10.4f}{a['f1']:<10.4f}"
            )
        node_recall = avg["node"]["recall"]
        if node_recall > 0:
            ratio = avg["translated"]["recall"] / node_recall
            lines.append(f"recall ratio translated/node: {ratio:.2f}")
        else:
            lines.append("recall ratio translated/node: undefined")
        return "\n".join(lines)


# -- shared protocol helpers -------------------------------------------------


def _sample_docs(eligible: list[str], sample_size: int | None, seed: int) -> list[str]:
    """Deterministic sample without replacement, returned in eligible order."""
    if sample_size is None or sample_size >= len(eligible):
        return list(eligible)
    arr = list(eligible)
    rank = {doc_id: i for i, doc_id in enumerate(eligible)}
    state = xs_init(derive2(np.uint64(seed), np.uint64(_SAMPLE_LABEL)))
    for i in range(sample_size):
        state, j = next_below(state, np.uint64(len(arr) - i))
        j = i + int(j)
        arr[i], arr[j] = arr[j], arr[i]
    return sorted(arr[:sample_size], key=rank.__getitem__)


def _run_iterations(worker, docs: list[str], workers: int) -> list:
    if workers > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, docs))
    return [worker(doc_id) for doc_id in docs]


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


# -- protocols ---------------------------------------------------------------


def run_link_protocol(net: DocumentNetwork, b_emb: EmbeddingMatrix, walk_cfg: WalkConfig,
                      train_cfg: TrainConfig, m: int | None = None,
                      protocol_cfg: ProtocolConfig = ProtocolConfig(),
                      workers: int = 1) -> LinkEvalReport:
    """Leave-one-out link prediction over sampled documents.

    For each sampled document: hide its links, regenerate walks, retrain
    node embeddings, fit the projection on the remaining shared ids, and
    score P@n of all three rankings against the document's true
    undirected neighbor set in the original network.
    """
    if train_cfg.variant != VARIANT_NODE:
        raise InputError("link protocol trains node embeddings; variant must be node-sgns")
    degrees = net._degrees
    eligible: list[str] = []
    skipped_no_links = 0
    skipped_no_content = 0
    for idx, doc_id in enumerate(net.ids):
        if degrees[idx] == 0:
            skipped_no_links += 1
        elif doc_id not in b_emb:
            skipped_no_content += 1
        else:
            eligible.append(doc_id)
    chosen = _sample_docs(eligible, protocol_cfg.sample_size, protocol_cfg.seed)

    def evaluate(doc_id: str) -> dict[str, list[float]]:
        idx = net.index_of(doc_id)
        sub = hide_links(net, doc_id)
        wcfg = replace(walk_cfg, seed=stream_seed(walk_cfg.seed, _WALK_LABEL, idx))
        tcfg = replace(train_cfg, seed=stream_seed(train_cfg.seed, _TRAIN_LABEL, idx))
        corpus = generate_walks(sub, wcfg)
        a_sub = train_node_embeddings(corpus, tcfg)
        available = sum(1 for candidate in a_sub.ids if candidate in b_emb)
        eff_m = min(m, available) if m is not None else None
        dictionary = build_dictionary(corpus, a_sub, b_emb, eff_m)
        proj = learn_projection(a_sub, b_emb, dictionary)
        truth = set(net.neighbor_ids(doc_id))
        rankings = {
            "translated": rank_by_translated_node(doc_id, b_emb, proj, a_sub),
            "content": baseline_content_rank(doc_id, b_emb),
            "random200": [
                candidate
                for candidate in baseline_random200(
                    net, stream_seed(protocol_cfg.seed, _RANDOM200_LABEL, idx)
                )
                if candidate != doc_id
            ],
        }
        return {
            method: [precision_at_n(ranking, truth, n) for n in protocol_cfg.n_values]
            for method, ranking in rankings.items()
        }

    results = _run_iterations(evaluate, chosen, workers)
    precisions = {
        method: np.array([r[method] for r in results], dtype=np.float64).reshape(
            len(chosen), len(protocol_cfg.n_values)
        )
        for method in LINK_METHODS
    }
    config = {
        "protocol": "link",
        "sample_size": protocol_cfg.sample_size,
        "seed": protocol_cfg.seed,
        "n_values": list(protocol_cfg.n_values),
        "walks_per_node": walk_cfg.walks_per_node,
        "walk_length": walk_cfg.walk_length,
        "walk_seed": walk_cfg.seed,
        "dim": train_cfg.dim,
        "window": train_cfg.window,
        "negatives": train_cfg.negatives,
        "epochs": train_cfg.epochs,
        "initial_lr": train_cfg.initial_lr,
        "train_seed": train_cfg.seed,
        "m": m,
    }
    return LinkEvalReport(
        doc_ids=tuple(chosen),
        n_values=protocol_cfg.n_values,
        precisions=precisions,
        skipped_no_links=skipped_no_links,
        skipped_no_content_vector=skipped_no_content,
        config=config,
    )


def run_content_protocol(net: DocumentNetwork, a_emb: EmbeddingMatrix,
                         train_cfg: TrainConfig, m: int | None = None,
                         protocol_cfg: ProtocolConfig = ProtocolConfig(),
                         frequencies=None, workers: int = 1) -> ContentEvalReport:
    """Leave-one-out similar-document retrieval over sampled documents.

    Truth sets come from content embeddings trained once on the full
    corpus. For each sampled document with a non-empty truth set: hide
    its content, retrain content embeddings, fit the projection, and
    threshold the translated vector a_i W^T against the retrained
    content space. frequencies (a WalkCorpus or id -> count map from the
    walk run that produced a_emb) ranks the dictionary.
    """
    if train_cfg.variant not in ("dv-dm", "dv-dbow"):
        raise InputError("content protocol trains content embeddings; use dv-dm or dv-dbow")
    if frequencies is None:
        raise InputError(
            "run_content_protocol needs the walk frequencies that produced the node "
            "embeddings (pass a WalkCorpus or an id -> count mapping)"
        )
    full_content = net.content_in_index_order()
    if not full_content:
        raise InputError("network has no content to evaluate")
    b_full = train_content_embeddings(full_content, train_cfg)

    b_norm = b_full.matrix / np.linalg.norm(b_full.matrix, axis=1, keepdims=True)
    sims = b_norm @ b_norm.T
    np.fill_diagonal(sims, -np.inf)
    truth_sets: dict[str, set[str]] = {}
    for i, doc_id in enumerate(b_full.ids):
        picked = np.nonzero(sims[i] > protocol_cfg.threshold)[0]
        truth_sets[doc_id] = {b_full.ids[j] for j in picked}

    eligible: list[str] = []
    skipped_empty_truth = 0
    skipped_missing = 0
    for doc_id in net.ids:
        if doc_id not in b_full or doc_id not in a_emb:
            skipped_missing += 1
        elif not truth_sets[doc_id]:
            skipped_empty_truth += 1
        else:
            eligible.append(doc_id)
    chosen = _sample_docs(eligible, protocol_cfg.sample_size, protocol_cfg.seed)

    def evaluate(doc_id: str) -> dict[str, list[float]]:
        idx = net.index_of(doc_id)
        sub = hide_content(net, doc_id)
        tcfg = replace(train_cfg, seed=stream_seed(train_cfg.seed, _RETRAIN_LABEL, idx))
        b_sub = train_content_embeddings(sub.content_in_index_order(), tcfg)
        available = sum(1 for candidate in b_sub.ids if candidate in a_emb)
        eff_m = min(m, available) if m is not None else None
        dictionary = build_dictionary(frequencies, a_emb, b_sub, eff_m)
        proj = learn_projection(a_emb, b_sub, dictionary)
        translated = translate_node_to_content(a_emb.vector(doc_id), proj)
        estimates = {
            "translated": similar_set(b_sub, translated, protocol_cfg.threshold,
                                      exclude=doc_id),
            "node": similar_set(a_emb, a_emb.vector(doc_id), protocol_cfg.threshold,
                                exclude=doc_id),
        }
        truth = truth_sets[doc_id]
        rows = {}
        for method, estimate in estimates.items():
            hits = len(estimate & truth)
            precision = hits / len(estimate) if estimate else 0.0
            recall = hits / len(truth)
            rows[method] = [precision, recall, _f1(precision, recall)]
        return rows

    results = _run_iterations(evaluate, chosen, workers)
    metrics = {
        method: np.array([r[method] for r in results], dtype=np.float64).reshape(
            len(chosen), 3
        )
        for method in CONTENT_METHODS
    }
    config = {
        "protocol": "content",
        "sample_size": protocol_cfg.sample_size,
        "seed": protocol_cfg.seed,
        "threshold": protocol_cfg.threshold,
        "variant": train_cfg.variant,
        "dim": train_cfg.dim,
        "window": train_cfg.window,
        "negatives": train_cfg.negatives,
        "epochs": train_cfg.epochs,
        "initial_lr": train_cfg.initial_lr,
        "min_count": train_cfg.min_count,
        "train_seed": train_cfg.seed,
        "m": m,
    }
    return ContentEvalReport(
        doc_ids=tuple(chosen),
        metrics=metrics,
        skipped_empty_truth=skipped_empty_truth,
        skipped_missing_vectors=skipped_missing,
        config=config,
    )
