import numpy as np
import pytest

from conftest import DATA, write_lines
from oracles import window_pairs
from secondorder.cli import main, parse_args
from secondorder.experiments import RunConfig, extract_pairs, read_kv, variant_label
from secondorder.pairstore import read_pairs

SIM = ["--n-targets", "3", "--n-context-types", "8", "--n-samples", "10"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_extract_examples(tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text("a b\n", encoding="utf-8")
    extract_pairs(corpus, 5, tmp_path / "p.txt")
    assert list(read_pairs(tmp_path / "p.txt")) == [("a", "b"), ("b", "a")]
    corpus.write_text("a b c d\nsolo\n", encoding="utf-8")
    n = extract_pairs(corpus, 1, tmp_path / "p.txt")
    got = list(read_pairs(tmp_path / "p.txt"))
    assert n == 6
    assert sorted(got) == sorted([("a", "b"), ("b", "a"), ("b", "c"), ("c", "b"),
                                  ("c", "d"), ("d", "c")])


def test_extract_matches_oracle(tmp_path):
    rng = np.random.default_rng(0)
    sents = [[f"w{x}" for x in rng.integers(0, 20, rng.integers(1, 15))] for _ in range(50)]
    corpus = tmp_path / "c.txt"
    corpus.write_text("\n".join(" ".join(s) for s in sents) + "\n", encoding="utf-8")
    for window in (1, 2, 5):
        extract_pairs(corpus, window, tmp_path / "p.txt")
        assert sorted(read_pairs(tmp_path / "p.txt")) == sorted(window_pairs(sents, window))


def test_run_config_defaults():
    cfg = RunConfig()
    assert (cfg.d, cfg.alpha, cfg.k, cfg.p, cfg.neg, cfg.epochs, cfg.window) == \
        (300, 0.75, 5.0, 0.0, 5, 5, 5)
    assert cfg.out.is_absolute()


def test_run_config_rejects_zero_ratio():
    with pytest.raises(ValueError):
        RunConfig(ratio=0)


def test_variant_labels():
    assert [variant_label(t) for t in (2000, 20000, 200000, 150)] == ["2k", "20k", "200k", "150"]


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# sim\nn-targets=7\nn_samples=9\nd=40\nout=%s\n" % (tmp_path / "o"),
                    encoding="utf-8")
    args = parse_args(["exp1", "--config", str(conf), "--n-samples", "12"])
    assert (args.n_targets, args.n_samples, args.d) == (7, 12, 40)
    assert str(args.out) == str(tmp_path / "o")


def test_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("bogus=1\n", encoding="utf-8")
    with pytest.raises(SystemExit):
        parse_args(["simulate", "--config", str(conf)])


def test_simulate_and_eval_groups(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", *SIM, "--seed", 4, "--out", tmp_path / "p.txt",
                       "--manifest", tmp_path / "m.txt")
    assert code == 0 and "wrote" in out
    code, _, _ = run(capsys, "train-ppmi", tmp_path / "p.txt", "--out", tmp_path / "ppmi.txt")
    assert code == 0
    code, out, _ = run(capsys, "eval-groups", "--ppmi", tmp_path / "ppmi.txt",
                       "--manifest", tmp_path / "m.txt", "--out", tmp_path / "g.kv")
    assert code == 0
    kv = read_kv(tmp_path / "g.kv")
    assert float(kv["cd.2nd"]) == 1.0 and float(kv["cd.none"]) == 1.0
    assert float(kv["cd.1st"]) < 1.0


def test_train_svd_and_sgns(tmp_path, capsys):
    pairs = write_lines(tmp_path / "p.txt", [(a, b) for a in "abcdef" for b in "uvwxyz"
                                             if (ord(a) + ord(b)) % 3])
    code, _, _ = run(capsys, "train-svd", pairs, "--d", 3, "--k", 1, "--out", tmp_path / "svd.txt")
    assert code == 0
    assert (tmp_path / "svd.txt").read_text().split("\n", 1)[0] == "6 3"
    code, out, _ = run(capsys, "train-sgns", pairs, "--d", 4, "--epochs", 2,
                       "--out", tmp_path / "sg")
    assert code == 0 and (tmp_path / "sg.words").exists() and (tmp_path / "sg.meta").exists()
    ds = tmp_path / "ws.tsv"
    ds.write_text("a\tb\t1\na\tc\t2\nb\tc\t3\nq\tr\t1\n", encoding="utf-8")
    code, out, _ = run(capsys, "eval-wordsim", "--embedding", tmp_path / "svd.txt",
                       "--dataset", ds, "--out", tmp_path / "w.kv")
    assert code == 0 and "coverage=3/4" in out


def test_propagate_cli(tmp_path, capsys):
    pairs = write_lines(tmp_path / "p.txt", [("t", "c"), ("c", "t"), ("c", "x"), ("x", "c")] * 2)
    code, out, _ = run(capsys, "propagate", pairs, "--threshold", 100, "--out", tmp_path / "s.txt",
                       "--merged", tmp_path / "m.txt")
    assert code == 0 and "propagated" in out
    assert (tmp_path / "m.txt").exists()


def test_propagate_rejects_zero_ratio(tmp_path):
    with pytest.raises(SystemExit):
        parse_args(["propagate", "p.txt", "--threshold", "5", "--ratio", "0", "--out", "s"])


def test_bootstrap_cli(tmp_path, capsys):
    np.savetxt(tmp_path / "a.txt", np.linspace(0, 1, 20))
    np.savetxt(tmp_path / "b.txt", np.linspace(5, 6, 20))
    code, out, _ = run(capsys, "bootstrap", tmp_path / "a.txt", tmp_path / "b.txt",
                       "-B", 2000, "--tests", 9)
    assert code == 0 and "p_adj=" in out


def test_stage_error_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "train-ppmi", tmp_path / "missing.txt", "--out", tmp_path / "o")
    assert code == 2 and "train-ppmi" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("only-one-field\n", encoding="utf-8")
    code, _, err = run(capsys, "exp2", "--pairs", bad, "--dataset", DATA / "wordsim.tsv",
                       "--out", tmp_path / "run")
    assert code == 2 and "[count]" in err and "bad.txt:1" in err


def test_exp1_cli_deterministic(tmp_path, capsys):
    reports = []
    for name in ("r1", "r2"):
        code, out, _ = run(capsys, "exp1", *SIM, "--d", 4, "--epochs", 1,
                           "--bootstrap-samples", 1000, "--out", tmp_path / name)
        assert code == 0
        reports.append(out)
    assert reports[0] == reports[1]
    for f in ("report.txt", "report.kv", "distances.tsv", "pairs.txt", "manifest.txt"):
        assert (tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()
    kv = read_kv(tmp_path / "r1" / "report.kv")
    assert kv["config.d"] == "4" and "input.pairs.sha256" in kv
    assert sum(k.endswith(".p_adj") for k in kv) == 9
