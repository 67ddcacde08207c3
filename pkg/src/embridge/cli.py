"""Command-line pipeline: walks, training, alignment, translation, evaluation.

Stages communicate only through the documented file formats, so any stage
can be swapped for external tooling. Every output file starts with `#`
comment lines recording the subcommand and its full resolved
configuration; all readers skip such lines. Headers contain no
timestamps, keeping repeated runs byte-identical.

Exit codes: 0 success, 2 input error, 3 consistency error,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import align as align_mod
from . import corpus as corpus_mod
from . import embedding as embedding_mod
from . import eval as eval_mod
from . import walks as walks_mod
from .errors import ConsistencyError, ConvergenceError, EmbridgeError, InputError

ENV_SEED = "EMBRIDGE_SEED"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3
EXIT_CONVERGENCE = 4


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation: subcommand plus every effective option."""

    subcommand: str
    options: dict

    def header_lines(self) -> tuple[str, ...]:
        lines = [f"embridge {self.subcommand}"]
        for key in sorted(self.options):
            value = self.options[key]
            if value is None:
                value = "all" if key == "sample" else "default"
            elif isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            lines.append(f"{key}={value}")
        return tuple(lines)


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return 1


def _parse_sample(text: str):
    if text.lower() == "all":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'all'") from None


def _parse_n_values(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if not values:
        raise argparse.ArgumentTypeError("need at least one n value")
    return values


def _write_lines(path: str, header: tuple[str, ...], lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for line in lines:
            fh.write(line + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_walks(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    run = RunConfig("walks", {
        "edges": args.edges,
        "walks_per_node": args.walks_per_node,
        "walk_length": args.walk_length,
        "seed": seed,
    })
    net = corpus_mod.load_edge_list(args.edges)
    cfg = walks_mod.WalkConfig(args.walks_per_node, args.walk_length, seed)
    corpus = walks_mod.generate_walks(net, cfg)
    walks_mod.save_walks(corpus, args.out, run.header_lines())
    if args.frequencies_out:
        walks_mod.save_frequencies(corpus, args.frequencies_out, run.header_lines())
    print(f"wrote {corpus.n_walks} walks ({corpus.total_occurrences} occurrences) to {args.out}")
    return EXIT_OK


def _train_config(args: argparse.Namespace, seed: int, variant: str,
                  min_count: int = 2) -> embedding_mod.TrainConfig:
    return embedding_mod.TrainConfig(
        dim=args.dim,
        window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        initial_lr=args.lr,
        seed=seed,
        variant=variant,
        min_count=min_count,
    )


def cmd_train_nodes(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    run = RunConfig("train-nodes", {
        "corpus": args.corpus,
        "dim": args.dim,
        "window": args.window,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "lr": args.lr,
        "seed": seed,
        "workers": args.workers,
    })
    corpus = walks_mod.load_walks(args.corpus)
    cfg = _train_config(args, seed, embedding_mod.VARIANT_NODE)
    emb = embedding_mod.train_node_embeddings(corpus, cfg, workers=args.workers)
    embedding_mod.save_embeddings(emb, args.out, run.header_lines())
    print(f"trained {len(emb)} node vectors of dim {emb.dim} -> {args.out}")
    return EXIT_OK


def cmd_train_docs(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    run = RunConfig("train-docs", {
        "content": args.content,
        "variant": args.variant,
        "dim": args.dim,
        "window": args.window,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "lr": args.lr,
        "min_count": args.min_count,
        "seed": seed,
        "workers": args.workers,
    })
    content = corpus_mod.load_content(args.content)
    cfg = _train_config(args, seed, args.variant, args.min_count)
    emb = embedding_mod.train_content_embeddings(content, cfg, workers=args.workers)
    embedding_mod.save_embeddings(emb, args.out, run.header_lines())
    print(f"trained {len(emb)} content vectors of dim {emb.dim} -> {args.out}")
    return EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    run = RunConfig("align", {
        "node_embeddings": args.node_embeddings,
        "doc_embeddings": args.doc_embeddings,
        "frequencies": args.frequencies,
        "m": args.m,
    })
    a_emb = embedding_mod.load_embeddings(args.node_embeddings)
    b_emb = embedding_mod.load_embeddings(args.doc_embeddings)
    freqs = walks_mod.load_frequencies(args.frequencies)
    dictionary = align_mod.build_dictionary(freqs, a_emb, b_emb, args.m)
    proj = align_mod.learn_projection(a_emb, b_emb, dictionary)
    align_mod.save_projection(proj, args.out, run.header_lines())
    print(f"dictionary size: {dictionary.m}")
    print(f"orthogonality residual: {proj.residual:.3e}")
    return EXIT_OK


def cmd_translate(args: argparse.Namespace) -> int:
    run = RunConfig("translate", {
        "projection": args.projection,
        "embeddings": args.embeddings,
        "direction": args.direction,
    })
    proj = align_mod.load_projection(args.projection)
    emb = embedding_mod.load_embeddings(args.embeddings)
    if args.direction == "content-to-node":
        matrix = align_mod.translate_content_to_node(emb.matrix, proj)
    else:
        matrix = align_mod.translate_node_to_content(emb.matrix, proj)
    out = embedding_mod.EmbeddingMatrix(emb.ids, matrix)
    embedding_mod.save_embeddings(out, args.out, run.header_lines())
    print(f"translated {len(out)} vectors ({args.direction}) -> {args.out}")
    return EXIT_OK


def cmd_eval_links(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    run = RunConfig("eval-links", {
        "edges": args.edges,
        "doc_embeddings": args.doc_embeddings,
        "walks_per_node": args.walks_per_node,
        "walk_length": args.walk_length,
        "dim": args.dim,
        "window": args.window,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "lr": args.lr,
        "m": args.m,
        "sample": args.sample,
        "n_values": args.n_values,
        "seed": seed,
        "workers": args.workers,
    })
    net = corpus_mod.load_edge_list(args.edges)
    b_emb = embedding_mod.load_embeddings(args.doc_embeddings)
    walk_cfg = walks_mod.WalkConfig(args.walks_per_node, args.walk_length, seed)
    train_cfg = _train_config(args, seed, embedding_mod.VARIANT_NODE)
    protocol_cfg = eval_mod.ProtocolConfig(
        sample_size=args.sample, n_values=args.n_values, seed=seed
    )
    report = eval_mod.run_link_protocol(
        net, b_emb, walk_cfg, train_cfg, args.m, protocol_cfg, workers=args.workers
    )
    table = report.format_table()
    print(table)
    if args.report:
        _write_lines(args.report, run.header_lines(), table.splitlines())
    if args.flat:
        _write_lines(args.flat, run.header_lines(), report.flat_lines())
    return EXIT_OK


def cmd_eval_content(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    run = RunConfig("eval-content", {
        "edges": args.edges,
        "content": args.content,
        "node_embeddings": args.node_embeddings,
        "frequencies": args.frequencies,
        "variant": args.variant,
        "dim": args.dim,
        "window": args.window,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "lr": args.lr,
        "min_count": args.min_count,
        "m": args.m,
        "sample": args.sample,
        "threshold": args.threshold,
        "seed": seed,
        "workers": args.workers,
    })
    net = corpus_mod.load_edge_list(args.edges)
    net = net.with_content(corpus_mod.load_content(args.content))
    a_emb = embedding_mod.load_embeddings(args.node_embeddings)
    freqs = walks_mod.load_frequencies(args.frequencies)
    train_cfg = _train_config(args, seed, args.variant, args.min_count)
    protocol_cfg = eval_mod.ProtocolConfig(
        sample_size=args.sample, threshold=args.threshold, seed=seed
    )
    report = eval_mod.run_content_protocol(
        net, a_emb, train_cfg, args.m, protocol_cfg, frequencies=freqs,
        workers=args.workers,
    )
    table = report.format_table()
    print(table)
    if args.report:
        _write_lines(args.report, run.header_lines(), table.splitlines())
    if args.flat:
        _write_lines(args.flat, run.header_lines(), report.flat_lines())
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    run = RunConfig("stats", {"edges": args.edges, "content": args.content})
    net = corpus_mod.load_edge_list(args.edges)
    if args.content:
        net = net.with_content(corpus_mod.load_content(args.content))
    counts = corpus_mod.stats(net)
    lines = [f"{key}\t{value}" for key, value in counts.as_dict().items()]
    print("\n".join(lines))
    if args.out:
        _write_lines(args.out, run.header_lines(), lines)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_train_flags(parser: argparse.ArgumentParser, dim: int, epochs: int) -> None:
    parser.add_argument("--dim", type=int, default=dim)
    parser.add_argument("--window", type=int, default=10)
    parser.add_argument("--negatives", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=epochs)
    parser.add_argument("--lr", type=float, default=0.025)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embridge",
        description="Node/content embeddings for document networks with "
                    "orthogonal cross-space translation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, workers: bool = True) -> None:
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (falls back to ${ENV_SEED}, then 1)")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="1 = bit-deterministic; >1 = parallel")

    p = sub.add_parser("walks", help="generate the random-walk corpus")
    p.add_argument("--edges", required=True)
    p.add_argument("--walks-per-node", type=int, default=80)
    p.add_argument("--walk-length", type=int, default=80)
    p.add_argument("--out", required=True)
    p.add_argument("--frequencies-out", default=None)
    common(p, workers=False)
    p.set_defaults(func=cmd_walks)

    p = sub.add_parser("train-nodes", help="train node embeddings on a walk corpus")
    p.add_argument("--corpus", required=True)
    _add_train_flags(p, dim=500, epochs=5)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_train_nodes)

    p = sub.add_parser("train-docs", help="train content embeddings on a content file")
    p.add_argument("--content", required=True)
    p.add_argument("--variant", choices=(embedding_mod.VARIANT_DM, embedding_mod.VARIANT_DBOW),
                   default=embedding_mod.VARIANT_DM)
    _add_train_flags(p, dim=500, epochs=5)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_train_docs)

    p = sub.add_parser("align", help="learn the orthogonal projection")
    p.add_argument("--node-embeddings", required=True)
    p.add_argument("--doc-embeddings", required=True)
    p.add_argument("--frequencies", required=True)
    p.add_argument("--m", type=int, default=None,
                   help="dictionary size (default: 65%% of shared ids)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("translate", help="translate embeddings across spaces")
    p.add_argument("--projection", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--direction", choices=("content-to-node", "node-to-content"),
                   required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("eval-links", help="leave-one-out link prediction protocol")
    p.add_argument("--edges", required=True)
    p.add_argument("--doc-embeddings", required=True)
    p.add_argument("--walks-per-node", type=int, default=eval_mod.DESK_WALKS_PER_NODE)
    p.add_argument("--walk-length", type=int, default=eval_mod.DESK_WALK_LENGTH)
    _add_train_flags(p, dim=eval_mod.DESK_DIM, epochs=eval_mod.DESK_EPOCHS)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--sample", type=_parse_sample, default=100,
                   help="documents to leave out, or 'all'")
    p.add_argument("--n-values", type=_parse_n_values, default=(5, 10, 20, 50))
    p.add_argument("--report", default=None)
    p.add_argument("--flat", default=None)
    common(p)
    p.set_defaults(func=cmd_eval_links)

    p = sub.add_parser("eval-content", help="leave-one-out similar-document protocol")
    p.add_argument("--edges", required=True)
    p.add_argument("--content", required=True)
    p.add_argument("--node-embeddings", required=True)
    p.add_argument("--frequencies", required=True)
    p.add_argument("--variant", choices=(embedding_mod.VARIANT_DM, embedding_mod.VARIANT_DBOW),
                   default=embedding_mod.VARIANT_DM)
    _add_train_flags(p, dim=eval_mod.DESK_DIM, epochs=eval_mod.DESK_EPOCHS)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--sample", type=_parse_sample, default=100)
    p.add_argument("--threshold", type=float, default=0.2)
    p.add_argument("--report", default=None)
    p.add_argument("--flat", default=None)
    common(p)
    p.set_defaults(func=cmd_eval_content)

    p = sub.add_parser("stats", help="print network statistics")
    p.add_argument("--edges", required=True)
    p.add_argument("--content", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InputError, EmbridgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
