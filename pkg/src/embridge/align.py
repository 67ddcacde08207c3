"""Cross-space alignment: dictionary construction, closed-form learning of
the orthogonal projection W, and translation between spaces.

The projection solves

    maximize   sum_i a_i . (b_i W)   subject to   W^T W = I

over the dictionary pairs (a_i, b_i) of row-normalized vectors. The
objective equals tr(M W) with M = A_S^T B_S; writing M = U S V^T and
using the trace's cyclic property, tr(M W) = tr(S V^T W U), which for
orthogonal W is maximized exactly when V^T W U = I, i.e. W = V U^T,
attaining the singular-value sum. Orientation is fixed as
content-to-node; the reverse direction always uses W^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import _iter_lines, _source_name
from .embedding import EmbeddingMatrix
from .errors import ConsistencyError, InputError, ParseError
from .linalg import as_dense, matmul, svd_square
from .walks import WalkCorpus

ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class AlignmentDictionary:
    """Ordered ids whose node and content vectors anchor the projection."""

    pairs: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise InputError("alignment dictionary contains duplicate ids")
        if len(self.pairs) < 1:
            raise InputError("alignment dictionary must contain at least one id")

    @property
    def m(self) -> int:
        return len(self.pairs)


def orthogonality_residual(w: np.ndarray) -> float:
    """max |W^T W - I|, the orthogonality defect."""
    w = as_dense(w, "projection")
    return float(np.abs(w.T @ w - np.eye(w.shape[1])).max())


@dataclass(frozen=True)
class ProjectionMatrix:
    """k x k orthogonal map from content space to node space."""

    w: np.ndarray

    def __post_init__(self):
        w = self.w
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InputError(f"projection must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InputError("projection contains non-finite values")
        residual = orthogonality_residual(w)
        if residual > ORTHO_TOL:
            raise ConsistencyError(
                f"projection violates orthogonality: residual {residual:.3e} > {ORTHO_TOL:.0e}"
            )

    @property
    def dim(self) -> int:
        return int(self.w.shape[0])

    @property
    def residual(self) -> float:
        return orthogonality_residual(self.w)


def default_dictionary_size(n_available: int) -> int:
    """Default m: 65% of the ids having both vectors, rounded up."""
    if n_available < 1:
        raise InputError("no ids available for the dictionary")
    return min(math.ceil(0.65 * n_available), n_available)


def build_dictionary(frequencies, a_emb: EmbeddingMatrix, b_emb: EmbeddingMatrix,
                     m: int | None = None) -> AlignmentDictionary:
    """Pick the m ids with both vectors, ranked by walk frequency.

    frequencies may be a WalkCorpus or a plain id -> count mapping. Ties
    are broken by ascending position (node index for a corpus, insertion
    order for a mapping). With m unset, default_dictionary_size applies.
    """
    if isinstance(frequencies, WalkCorpus):
        id_order = frequencies.ids
        freq_of = frequencies.frequencies_by_id
    elif isinstance(frequencies, Mapping):
        id_order = tuple(frequencies)
        freq_of = frequencies
    else:
        raise InputError("frequencies must be a WalkCorpus or an id -> count mapping")

    candidates = [doc_id for doc_id in id_order if doc_id in a_emb and doc_id in b_emb]
    if m is None:
        m = default_dictionary_size(len(candidates))
    if m < 1:
        raise InputError("dictionary size m must be >= 1")
    if m > len(candidates):
        raise InputError(
            f"dictionary size {m} exceeds the {len(candidates)} ids with both vectors"
        )
    ranked = sorted(
        range(len(candidates)),
        key=lambda i: (-int(freq_of.get(candidates[i], 0)), i),
    )
    return AlignmentDictionary(tuple(candidates[i] for i in ranked[:m]))


def learn_projection(a_emb: EmbeddingMatrix, b_emb: EmbeddingMatrix,
                     dictionary: AlignmentDictionary) -> ProjectionMatrix:
    """Closed-form orthogonal Procrustes fit of content onto node space.

    Rows are re-normalized defensively; the SVD runs in float64. Raises
    ConsistencyError if the spaces disagree in dimension or any
    dictionary id lacks a vector.
    """
    if a_emb.dim != b_emb.dim:
        raise ConsistencyError(
            f"node space has dim {a_emb.dim} but content space has dim {b_emb.dim}"
        )
    a_norm = a_emb.normalized_copy()
    b_norm = b_emb.normalized_copy()
    a_s = a_norm.rows_for(dictionary.pairs)
    b_s = b_norm.rows_for(dictionary.pairs)
    m = matmul(a_s.T, b_s)
    u, _, v = svd_square(m)
    return ProjectionMatrix(matmul(v, u.T))


def _proj_matrix(proj) -> np.ndarray:
    if isinstance(proj, ProjectionMatrix):
        return proj.w
    return as_dense(proj, "projection")


def translate_content_to_node(b, proj) -> np.ndarray:
    """Estimate node representation(s): a~ = b W."""
    w = _proj_matrix(proj)
    vec = np.asarray(b, dtype=np.float64)
    if vec.shape[-1] != w.shape[0]:
        raise ConsistencyError(
            f"vector dim {vec.shape[-1]} does not match projection dim {w.shape[0]}"
        )
    return vec @ w


def translate_node_to_content(a, proj) -> np.ndarray:
    """Estimate content representation(s): b~ = a W^T."""
    w = _proj_matrix(proj)
    vec = np.asarray(a, dtype=np.float64)
    if vec.shape[-1] != w.shape[0]:
        raise ConsistencyError(
            f"vector dim {vec.shape[-1]} does not match projection dim {w.shape[0]}"
        )
    return vec @ w.T


def cosine(u, v) -> float:
    """Cosine similarity, clipped to [-1, 1]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("cosine requires two vectors of equal length")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InputError("cosine undefined for zero vectors")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def alignment_objective(a_emb: EmbeddingMatrix, b_emb: EmbeddingMatrix,
                        dictionary: AlignmentDictionary, proj) -> float:
    """sum_i a_i . (b_i W) over normalized dictionary rows."""
    a_s = a_emb.normalized_copy().rows_for(dictionary.pairs)
    b_s = b_emb.normalized_copy().rows_for(dictionary.pairs)
    return float((a_s * translate_content_to_node(b_s, proj)).sum())


def save_projection(proj: ProjectionMatrix, target, header_lines: tuple[str, ...] = ()) -> None:
    """Write header `k` then k rows of k floats."""

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"{proj.dim}\n")
        for row in proj.w:
            fh.write(" ".join(f"{value:.12g}" for value in row))
            fh.write("\n")

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)


def load_projection(source) -> ProjectionMatrix:
    path = _source_name(source)
    k: int | None = None
    rows: list[list[float]] = []
    for lineno, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if k is None:
            try:
                k = int(stripped)
            except ValueError:
                raise ParseError("expected header `k`", path=path, line=lineno) from None
            if k < 1:
                raise ParseError("projection dim must be >= 1", path=path, line=lineno)
            continue
        fields = stripped.split()
        if len(fields) != k:
            raise ParseError(
                f"expected {k} components, got {len(fields)}", path=path, line=lineno
            )
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise ParseError("bad float component", path=path, line=lineno) from None
    if k is None:
        raise InputError("projection file has no header")
    if len(rows) != k:
        raise InputError(f"expected {k} rows, got {len(rows)}")
    return ProjectionMatrix(np.array(rows, dtype=np.float64))
