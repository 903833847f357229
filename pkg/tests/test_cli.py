"""Command-line surface tests: behaviors, formats, exit codes."""

import pytest

from linepart.cli import main


K3 = "a\tb\nb\tc\na\tc\n"
TWO_CLIQUES = "".join(
    f"{u}\t{v}\n"
    for base in (0, 4)
    for u, v in [(base, base + 1), (base, base + 2), (base, base + 3),
                 (base + 1, base + 2), (base + 1, base + 3), (base + 2, base + 3)]
)


@pytest.fixture
def k3(tmp_path):
    p = tmp_path / "k3.tsv"
    p.write_text(K3)
    return p


@pytest.fixture
def cliques(tmp_path):
    p = tmp_path / "cliques.tsv"
    p.write_text(TWO_CLIQUES)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_evaluate_prints_cut_fraction(tmp_path, capsys, k3):
    part = tmp_path / "part.tsv"
    part.write_text("a\t0\nb\t1\nc\t1\n")
    code, out, _ = run(capsys, "evaluate", "--graph", k3, "--partition", part)
    assert code == 0
    assert "cut_fraction\t0.6667" in out
    assert "cut_weight\t2" in out


def test_evaluate_balance_and_queries(tmp_path, capsys, k3):
    part = tmp_path / "part.tsv"
    part.write_text("a\t0\nb\t1\nc\t1\n")
    queries = tmp_path / "q.tsv"
    queries.write_text("a\tb\nb\tc\n")
    code, out, _ = run(
        capsys, "evaluate", "--graph", k3, "--partition", part,
        "--queries", queries, "--alpha", "0.2",
    )
    assert code == 0
    assert "balanced\tfalse\talpha\t0.2" in out  # part weight 1 < 0.8 * 1.5
    assert "cross_shard_rate\t0.5000" in out


def test_combine_two_cliques_zero_cut(tmp_path, capsys, cliques):
    out_path = tmp_path / "part.out"
    code, out, _ = run(
        capsys, "combine", "--graph", cliques, "-k", "2", "--alpha", "0",
        "-o", out_path,
    )
    assert code == 0
    assert "final_cut_fraction\t0.0000" in out
    rows = dict(line.split("\t") for line in out_path.read_text().splitlines())
    assert {rows[str(v)] for v in range(4)} != {rows[str(v)] for v in range(4, 8)}


def test_combine_byte_identical_reruns(tmp_path, capsys, cliques):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    for path in (a, b):
        code, _, _ = run(
            capsys, "combine", "--graph", cliques, "-k", "2", "--alpha", "0",
            "--seed", "7", "-o", path,
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_combine_threads_do_not_change_output(tmp_path, capsys, cliques):
    a, b = tmp_path / "a.out", tmp_path / "b.out"
    run(capsys, "combine", "--graph", cliques, "-k", "2", "--alpha", "0.25",
        "-o", a)
    run(capsys, "--threads", "3", "combine", "--graph", cliques, "-k", "2",
        "--alpha", "0.25", "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_order_and_refine_round_trip(tmp_path, capsys, cliques):
    ord_path = tmp_path / "ord.tsv"
    code, _, _ = run(
        capsys, "order", "--method", "affinity", "--graph", cliques,
        "-o", ord_path, "--hierarchy-out", tmp_path / "hier.tsv",
    )
    assert code == 0
    assert len(ord_path.read_text().splitlines()) == 8
    refined = tmp_path / "refined.tsv"
    code, out, _ = run(
        capsys, "refine", "--method", "swap", "--graph", cliques,
        "--ordering", ord_path, "-k", "2", "-o", refined,
    )
    assert code == 0
    assert "cut_fraction\t0.0000" in out


def test_refine_metric_prints_trace(tmp_path, capsys, k3):
    ord_path = tmp_path / "ord.tsv"
    run(capsys, "order", "--method", "random", "--graph", k3, "--seed", "1",
        "-o", ord_path)
    out_path = tmp_path / "out.tsv"
    code, out, _ = run(
        capsys, "refine", "--method", "metric", "--graph", k3,
        "--ordering", ord_path, "-k", "2", "--max-rounds", "3", "-o", out_path,
    )
    assert code == 0
    assert out.startswith("round\t0\tobjective")


def test_postprocess_mincut_writes_splits_and_ordering(tmp_path, capsys, cliques):
    ord_path = tmp_path / "ord.tsv"
    run(capsys, "order", "--method", "random", "--graph", cliques, "--seed", "3",
        "-o", ord_path)
    splits_path = tmp_path / "splits.txt"
    new_ord = tmp_path / "ord2.tsv"
    code, out, _ = run(
        capsys, "postprocess", "--method", "mincut", "--graph", cliques,
        "--ordering", ord_path, "-k", "2", "--alpha", "0.5",
        "-o", splits_path, "--ordering-out", new_ord,
    )
    assert code == 0
    values = [int(x) for x in splits_path.read_text().split()]
    assert values[0] == 0 and values[-1] == 8 and len(values) == 3
    assert new_ord.exists()
    assert out.startswith("window\t1\t")


def test_postprocess_dp_infeasible_exit_code(tmp_path, capsys):
    g = tmp_path / "p3.tsv"
    g.write_text("a\tb\nb\tc\n")
    ord_path = tmp_path / "ord.tsv"
    run(capsys, "order", "--method", "random", "--graph", g, "--seed", "0",
        "-o", ord_path)
    code, _, err = run(
        capsys, "postprocess", "--method", "dp", "--graph", g,
        "--ordering", ord_path, "-k", "2", "--alpha", "0",
        "-o", tmp_path / "splits.txt",
    )
    assert code == 2
    assert "infeasible" in err
    assert not (tmp_path / "splits.txt").exists()


def test_weigh_queries(tmp_path, capsys):
    g = tmp_path / "path.tsv"
    g.write_text("a\tb\nb\tc\nc\td\nx\ty\n")
    q = tmp_path / "q.tsv"
    q.write_text("a\tc\na\tx\n")
    out_path = tmp_path / "weighted.tsv"
    code, _, err = run(
        capsys, "weigh-queries", "--graph", g, "--queries", q, "-o", out_path,
    )
    assert code == 0
    assert "skipped 1 unreachable" in err
    rows = {tuple(line.split("\t")[:2]): line.split("\t")[2]
            for line in out_path.read_text().splitlines()}
    assert rows[("a", "b")] == "1"
    assert rows[("b", "c")] == "1"
    assert rows[("c", "d")] == "0"


def test_validation_errors_exit_one(tmp_path, capsys, k3):
    code, _, err = run(capsys, "evaluate", "--graph", tmp_path / "nope.tsv",
                       "--partition", tmp_path / "nope2.tsv")
    assert code == 1
    code, _, _ = run(capsys, "evaluate", "--graph", k3)  # missing --partition
    assert code == 1
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tb\t-3\n")
    code, _, err = run(capsys, "combine", "--graph", bad, "-k", "2",
                       "--alpha", "0", "-o", tmp_path / "x.out")
    assert code == 1
    assert "bad.tsv:1" in err
    assert not (tmp_path / "x.out").exists()


def test_no_partial_output_on_failure(tmp_path, capsys, cliques):
    target = tmp_path / "no-such-dir" / "part.out"
    code, _, _ = run(capsys, "combine", "--graph", cliques, "-k", "2",
                     "--alpha", "0", "-o", target)
    assert code == 1
    assert not target.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["--help"],
        ["order", "--help"],
        ["refine", "--help"],
        ["postprocess", "--help"],
        ["combine", "--help"],
        ["evaluate", "--help"],
        ["weigh-queries", "--help"],
    ],
)
def test_help_exits_zero(capsys, argv):
    assert main(argv) == 0


def test_help_documents_defaults(capsys):
    main(["combine", "--help"])
    out = capsys.readouterr().out
    assert "metric,swap,mincut" in out
    assert "affinity" in out