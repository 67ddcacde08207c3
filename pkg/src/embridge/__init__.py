"""embridge: node/content embeddings for document networks, aligned by an
orthogonal projection learned in closed form, with translation of
representations across the two spaces and leave-one-out evaluation."""

from .align import (
    AlignmentDictionary,
    ProjectionMatrix,
    build_dictionary,
    cosine,
    default_dictionary_size,
    learn_projection,
    load_projection,
    save_projection,
    translate_content_to_node,
    translate_node_to_content,
)
from .corpus import (
    DocumentNetwork,
    NetworkStats,
    hide_content,
    hide_links,
    load_content,
    load_edge_list,
    stats,
)
from .embedding import (
    EmbeddingMatrix,
    TrainConfig,
    load_embeddings,
    save_embeddings,
    sgns_step,
    train_content_embeddings,
    train_node_embeddings,
)
from .errors import (
    ConsistencyError,
    ConvergenceError,
    EmbridgeError,
    InputError,
    ParseError,
)
from .eval import (
    ContentEvalReport,
    LinkEvalReport,
    ProtocolConfig,
    baseline_content_rank,
    baseline_random200,
    precision_at_n,
    rank_by_translated_node,
    run_content_protocol,
    run_link_protocol,
    true_similar_set,
)
from .linalg import matmul, row_normalize, svd_square
from .walks import WalkConfig, WalkCorpus, generate_walks, top_m_nodes

__version__ = "0.1.0"

__all__ = [
    "AlignmentDictionary",
    "ConsistencyError",
    "ContentEvalReport",
    "ConvergenceError",
    "DocumentNetwork",
    "EmbeddingMatrix",
    "EmbridgeError",
    "InputError",
    "LinkEvalReport",
    "NetworkStats",
    "ParseError",
    "ProjectionMatrix",
    "ProtocolConfig",
    "TrainConfig",
    "WalkConfig",
    "WalkCorpus",
    "baseline_content_rank",
    "baseline_random200",
    "build_dictionary",
    "cosine",
    "default_dictionary_size",
    "generate_walks",
    "hide_content",
    "hide_links",
    "learn_projection",
    "load_content",
    "load_edge_list",
    "load_embeddings",
    "load_projection",
    "matmul",
    "precision_at_n",
    "rank_by_translated_node",
    "row_normalize",
    "run_content_protocol",
    "run_link_protocol",
    "save_embeddings",
    "save_projection",
    "sgns_step",
    "stats",
    "svd_square",
    "top_m_nodes",
    "train_content_embeddings",
    "train_node_embeddings",
    "translate_content_to_node",
    "translate_node_to_content",
    "true_similar_set",
]
