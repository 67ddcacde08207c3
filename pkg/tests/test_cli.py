"""End-to-end command-line pipeline: formats, headers, seeds, exit codes."""

import contextlib
import io
from types import SimpleNamespace

import numpy as np
import pytest

from embridge import cli
from embridge.cli import (
    ENV_SEED,
    EXIT_CONSISTENCY,
    EXIT_CONVERGENCE,
    EXIT_INPUT,
    EXIT_OK,
    RunConfig,
    main,
)
from embridge.embedding import load_embeddings
from embridge.errors import ConvergenceError

from synthdata import two_cliques


def run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def write_network_files(root):
    net = two_cliques(clique=5, seed=2).net
    edges = root / "edges.tsv"
    with open(edges, "w", encoding="utf-8") as fh:
        fh.write("# two five-cliques\n")
        for src, dst in sorted(net.edges):
            fh.write(f"{src}\t{dst}\n")
    content = root / "content.tsv"
    with open(content, "w", encoding="utf-8") as fh:
        for doc_id in net.ids:
            fh.write(f"{doc_id}\t{' '.join(net.content[doc_id])}\n")
    return edges, content


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run every stage once on a small network; tests inspect the leftovers."""
    root = tmp_path_factory.mktemp("cli")
    edges, content = write_network_files(root)
    paths = SimpleNamespace(
        root=root,
        edges=edges,
        content=content,
        walks=root / "walks.txt",
        freqs=root / "freqs.tsv",
        nodes=root / "nodes.txt",
        docs=root / "docs.txt",
        proj=root / "w.txt",
        translated=root / "translated.txt",
        back=root / "back.txt",
        link_report=root / "links.report",
        link_flat=root / "links.flat",
        content_report=root / "content.report",
        stats=root / "stats.tsv",
    )
    outputs = {}

    def run(name, argv):
        code, text = run_cli(argv)
        assert code == EXIT_OK, f"{name} failed:\n{text}"
        outputs[name] = text

    run("walks", [
        "walks", "--edges", str(paths.edges), "--walks-per-node", "8",
        "--walk-length", "10", "--out", str(paths.walks),
        "--frequencies-out", str(paths.freqs), "--seed", "3",
    ])
    run("train-nodes", [
        "train-nodes", "--corpus", str(paths.walks), "--dim", "16", "--window", "4",
        "--negatives", "3", "--epochs", "10", "--out", str(paths.nodes), "--seed", "3",
    ])
    run("train-docs", [
        "train-docs", "--content", str(paths.content), "--variant", "dv-dbow",
        "--dim", "16", "--window", "4", "--negatives", "3", "--epochs", "100",
        "--min-count", "1", "--out", str(paths.docs), "--seed", "3",
    ])
    run("align", [
        "align", "--node-embeddings", str(paths.nodes), "--doc-embeddings",
        str(paths.docs), "--frequencies", str(paths.freqs), "--out", str(paths.proj),
    ])
    run("translate", [
        "translate", "--projection", str(paths.proj), "--embeddings", str(paths.docs),
        "--direction", "content-to-node", "--out", str(paths.translated),
    ])
    run("translate-back", [
        "translate", "--projection", str(paths.proj), "--embeddings", str(paths.translated),
        "--direction", "node-to-content", "--out", str(paths.back),
    ])
    run("eval-links", [
        "eval-links", "--edges", str(paths.edges), "--doc-embeddings", str(paths.docs),
        "--walks-per-node", "8", "--walk-length", "10", "--dim", "16", "--window", "4",
        "--negatives", "3", "--epochs", "3", "--sample", "all", "--n-values", "2,4",
        "--seed", "3", "--report", str(paths.link_report), "--flat", str(paths.link_flat),
    ])
    run("eval-content", [
        "eval-content", "--edges", str(paths.edges), "--content", str(paths.content),
        "--node-embeddings", str(paths.nodes), "--frequencies", str(paths.freqs),
        "--variant", "dv-dbow", "--dim", "16", "--window", "4", "--negatives", "3",
        "--epochs", "20", "--min-count", "1", "--sample", "all", "--threshold", "0.5",
        "--seed", "3", "--report", str(paths.content_report),
    ])
    run("stats", [
        "stats", "--edges", str(paths.edges), "--content", str(paths.content),
        "--out", str(paths.stats),
    ])
    paths.outputs = outputs
    return paths


class TestPipeline:
    def test_walks_file_carries_its_configuration(self, pipeline):
        lines = pipeline.walks.read_text().splitlines()
        assert lines[0] == "# embridge walks"
        assert "# seed=3" in lines
        assert "# walks_per_node=8" in lines
        assert "wrote" in pipeline.outputs["walks"]

    def test_trained_embeddings_load_back(self, pipeline):
        nodes = load_embeddings(str(pipeline.nodes))
        docs = load_embeddings(str(pipeline.docs))
        assert nodes.dim == docs.dim == 16
        assert len(nodes) == 10
        assert len(docs) == 10

    def test_alignment_reports_dictionary_and_residual(self, pipeline):
        text = pipeline.outputs["align"]
        assert "dictionary size: 7" in text
        assert "orthogonality residual:" in text

    def test_translation_round_trips_through_files(self, pipeline):
        docs = load_embeddings(str(pipeline.docs))
        back = load_embeddings(str(pipeline.back))
        assert back.ids == docs.ids
        np.testing.assert_allclose(back.matrix, docs.matrix, atol=1e-9)

    def test_link_report_and_flat_files(self, pipeline):
        report = pipeline.link_report.read_text().splitlines()
        assert report[0] == "# embridge eval-links"
        assert "# sample=all" in report
        body = [line for line in report if not line.startswith("#")]
        assert body[0].startswith("documents evaluated: 10")
        flat = [line for line in pipeline.link_flat.read_text().splitlines()
                if not line.startswith("#")]
        assert len(flat) == 10 * 3 * 2
        doc_id, method, label, value = flat[0].split("\t")
        assert method in ("translated", "content", "random200")
        assert label in ("P@2", "P@4")
        assert 0.0 <= float(value) <= 1.0

    def test_content_report_has_the_recall_ratio(self, pipeline):
        text = pipeline.content_report.read_text()
        assert "recall ratio translated/node:" in text
        assert "# embridge eval-content" in text
        assert "# threshold=0.5" in text

    def test_stats_output(self, pipeline):
        body = [line for line in pipeline.stats.read_text().splitlines()
                if not line.startswith("#")]
        stats = dict(line.split("\t") for line in body)
        assert stats["n_documents"] == "10"
        assert stats["n_links"] == "20"
        assert stats["n_with_content"] == "10"
        assert stats["n_isolated"] == "0"


class TestDeterminism:
    def test_walks_and_training_are_byte_identical_across_runs(self, pipeline, tmp_path):
        walks2 = tmp_path / "walks.txt"
        nodes2 = tmp_path / "nodes.txt"
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--walks-per-node", "8",
            "--walk-length", "10", "--out", str(walks2),
            "--frequencies-out", str(tmp_path / "freqs.tsv"), "--seed", "3",
        ])
        assert code == EXIT_OK
        assert walks2.read_bytes() == pipeline.walks.read_bytes()
        code, _ = run_cli([
            "train-nodes", "--corpus", str(pipeline.walks), "--dim", "16", "--window", "4",
            "--negatives", "3", "--epochs", "10", "--out", str(nodes2), "--seed", "3",
        ])
        assert code == EXIT_OK
        assert nodes2.read_bytes() == pipeline.nodes.read_bytes()

    def test_eval_report_is_byte_identical_across_runs(self, pipeline, tmp_path):
        report2 = tmp_path / "links.report"
        code, _ = run_cli([
            "eval-links", "--edges", str(pipeline.edges), "--doc-embeddings",
            str(pipeline.docs), "--walks-per-node", "8", "--walk-length", "10",
            "--dim", "16", "--window", "4", "--negatives", "3", "--epochs", "3",
            "--sample", "all", "--n-values", "2,4", "--seed", "3",
            "--report", str(report2),
        ])
        assert code == EXIT_OK
        assert report2.read_bytes() == pipeline.link_report.read_bytes()

    def test_changing_the_seed_changes_the_walks(self, pipeline, tmp_path):
        walks2 = tmp_path / "walks.txt"
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--walks-per-node", "8",
            "--walk-length", "10", "--out", str(walks2), "--seed", "4",
        ])
        assert code == EXIT_OK
        assert walks2.read_bytes() != pipeline.walks.read_bytes()


class TestSeedResolution:
    def test_environment_seed_is_picked_up(self, pipeline, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_SEED, "9")
        out = tmp_path / "walks.txt"
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--out", str(out),
            "--walks-per-node", "2", "--walk-length", "4",
        ])
        assert code == EXIT_OK
        assert "# seed=9" in out.read_text().splitlines()

    def test_flag_beats_the_environment(self, pipeline, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_SEED, "9")
        out = tmp_path / "walks.txt"
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--out", str(out),
            "--walks-per-node", "2", "--walk-length", "4", "--seed", "4",
        ])
        assert code == EXIT_OK
        assert "# seed=4" in out.read_text().splitlines()

    def test_unset_environment_falls_back_to_one(self, pipeline, tmp_path, monkeypatch):
        monkeypatch.delenv(ENV_SEED, raising=False)
        out = tmp_path / "walks.txt"
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--out", str(out),
            "--walks-per-node", "2", "--walk-length", "4",
        ])
        assert code == EXIT_OK
        assert "# seed=1" in out.read_text().splitlines()

    def test_garbled_environment_seed_is_an_input_error(self, pipeline, tmp_path,
                                                        monkeypatch, capsys):
        monkeypatch.setenv(ENV_SEED, "soon")
        code, _ = run_cli([
            "walks", "--edges", str(pipeline.edges), "--out", str(tmp_path / "w.txt"),
        ])
        assert code == EXIT_INPUT
        assert "must be an integer" in capsys.readouterr().err


class TestExitCodes:
    def test_missing_input_file(self, tmp_path, capsys):
        code, _ = run_cli([
            "walks", "--edges", str(tmp_path / "absent.tsv"), "--out", str(tmp_path / "o"),
        ])
        assert code == EXIT_INPUT
        assert "error:" in capsys.readouterr().err

    def test_malformed_edge_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("a\tb\nlonely-field\n")
        code, _ = run_cli(["walks", "--edges", str(bad), "--out", str(tmp_path / "o")])
        assert code == EXIT_INPUT
        assert "line 2" in capsys.readouterr().err

    def test_dimension_mismatch_is_a_consistency_error(self, pipeline, tmp_path, capsys):
        small = tmp_path / "docs8.txt"
        code, _ = run_cli([
            "train-docs", "--content", str(pipeline.content), "--variant", "dv-dbow",
            "--dim", "8", "--window", "4", "--negatives", "3", "--epochs", "1",
            "--min-count", "1", "--out", str(small), "--seed", "3",
        ])
        assert code == EXIT_OK
        code, _ = run_cli([
            "align", "--node-embeddings", str(pipeline.nodes), "--doc-embeddings",
            str(small), "--frequencies", str(pipeline.freqs), "--out", str(tmp_path / "w"),
        ])
        assert code == EXIT_CONSISTENCY
        assert "dim" in capsys.readouterr().err

    def test_convergence_failure_has_its_own_code(self, pipeline, tmp_path,
                                                  monkeypatch, capsys):
        def blow_up(*args, **kwargs):
            raise ConvergenceError("did not settle")

        monkeypatch.setattr(cli.align_mod, "learn_projection", blow_up)
        code, _ = run_cli([
            "align", "--node-embeddings", str(pipeline.nodes), "--doc-embeddings",
            str(pipeline.docs), "--frequencies", str(pipeline.freqs),
            "--out", str(tmp_path / "w"),
        ])
        assert code == EXIT_CONVERGENCE
        assert "did not settle" in capsys.readouterr().err

    def test_argparse_rejects_unknown_subcommands_and_bad_samples(self, pipeline, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main([
                "eval-links", "--edges", str(pipeline.edges), "--doc-embeddings",
                str(pipeline.docs), "--sample", "several",
            ])
        assert exc.value.code == 2


class TestRunConfig:
    def test_header_lines_are_sorted_and_normalized(self):
        run = RunConfig("align", {"m": None, "sample": None, "n_values": (5, 10)})
        assert run.header_lines() == (
            "embridge align", "m=default", "n_values=5,10", "sample=all",
        )


def test_package_surface_is_importable():
    import embridge

    assert embridge.__version__ == "0.1.0"
    missing = [name for name in embridge.__all__ if not hasattr(embridge, name)]
    assert missing == []
