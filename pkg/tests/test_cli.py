"""End-to-end CLI checks on a toy configuration."""

import json
import os

import pytest

from recsim import storage
from recsim.cli import OUT_DIR_ENV, build_parser, main

TOY_CONFIG = """\
# toy profile for fast end-to-end checks
m = 6
k_init = 4
k_new = 2
t = 8
k_train = 2
n_runs = 3
master_seed = 424242
"""


@pytest.fixture
def toy_config_path(tmp_path):
    path = tmp_path / "toy.cfg"
    path.write_text(TOY_CONFIG, encoding="utf-8")
    return str(path)


@pytest.fixture
def toy_run_dir(tmp_path, toy_config_path):
    out = str(tmp_path / "run")
    rc = main(["run", "--out-dir", out, "--config", toy_config_path,
               "--algorithms", "none,hybrid"])
    assert rc == 0
    return out


def test_run_writes_expected_file_counts(toy_run_dir):
    names = sorted(os.listdir(toy_run_dir))
    logs = [n for n in names if n.startswith("log_")]
    items = [n for n in names if n.startswith("items_")]
    prefs = [n for n in names if n.startswith("prefs_")]
    assert len(logs) == len(items) == len(prefs) == 6  # 2 algorithms x 3 runs
    assert storage.METRICS_NAME in names
    assert storage.MANIFEST_NAME in names
    with open(os.path.join(toy_run_dir, storage.METRICS_NAME)) as fh:
        assert len(fh.read().splitlines()) == 1 + 6


def test_manifest_references_only_existing_files(toy_run_dir):
    doc = storage.read_manifest(toy_run_dir)
    assert doc["complete"] is True
    assert os.path.exists(os.path.join(toy_run_dir, doc["files"]["metrics"]))
    for per_run in doc["files"]["runs"].values():
        for entry in per_run.values():
            for fname in entry.values():
                assert os.path.exists(os.path.join(toy_run_dir, fname))


def test_run_refuses_nonempty_dir_without_force(toy_run_dir, toy_config_path,
                                                capsys):
    rc = main(["run", "--out-dir", toy_run_dir, "--config", toy_config_path,
               "--algorithms", "none"])
    assert rc == 2
    assert "--force" in capsys.readouterr().err
    rc = main(["run", "--out-dir", toy_run_dir, "--config", toy_config_path,
               "--algorithms", "none", "--force"])
    assert rc == 0


def test_metrics_recompute_is_byte_identical(toy_run_dir):
    path = os.path.join(toy_run_dir, storage.METRICS_NAME)
    with open(path, "rb") as fh:
        before = fh.read()
    assert main(["metrics", "--out-dir", toy_run_dir]) == 0
    with open(path, "rb") as fh:
        assert fh.read() == before


def test_curves_command_writes_all_three_tables(toy_run_dir):
    assert main(["curves", "--out-dir", toy_run_dir]) == 0
    for kind in ("deviation", "variance", "pairwise"):
        path = os.path.join(toy_run_dir, storage.curves_filename(kind))
        with open(path, encoding="utf-8") as fh:
            assert fh.readline().rstrip("\n") == storage.CURVES_HEADER
            assert fh.readline()  # at least one data row


def test_compare_command_writes_summary_json(toy_run_dir, capsys):
    assert main(["compare", "--out-dir", toy_run_dir]) == 0
    with open(os.path.join(toy_run_dir, "compare.json")) as fh:
        summary = json.load(fh)
    for key in ("pearson_homogeneity", "pearson_alt_homogeneity", "kendall_tau",
                "exact_ranking_match", "algorithms"):
        assert key in summary
    assert "kendall_tau" in capsys.readouterr().out


def test_out_dir_falls_back_to_environment(tmp_path, toy_config_path,
                                           monkeypatch):
    out = str(tmp_path / "envrun")
    monkeypatch.setenv(OUT_DIR_ENV, out)
    rc = main(["run", "--config", toy_config_path, "--algorithms", "none"])
    assert rc == 0
    assert os.path.exists(os.path.join(out, storage.MANIFEST_NAME))


def test_missing_out_dir_names_the_env_var(monkeypatch, capsys):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    rc = main(["metrics"])
    assert rc == 2
    assert OUT_DIR_ENV in capsys.readouterr().err


def test_unknown_algorithm_is_a_usage_error(tmp_path, capsys):
    rc = main(["run", "--out-dir", str(tmp_path / "x"),
               "--algorithms", "wishful"])
    assert rc == 2
    assert "wishful" in capsys.readouterr().err


def test_duplicate_algorithm_is_rejected(tmp_path, capsys):
    rc = main(["run", "--out-dir", str(tmp_path / "x"),
               "--algorithms", "none,none"])
    assert rc == 2
    assert "twice" in capsys.readouterr().err


def test_bad_config_reports_line_number(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("m = 6\nbogus_key = 1\n", encoding="utf-8")
    rc = main(["run", "--out-dir", str(tmp_path / "x"), "--config", str(path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "bogus_key" in err and "2" in err


def test_metrics_without_manifest_reports_incomplete(tmp_path, capsys):
    out = str(tmp_path / "partial")
    os.makedirs(out)
    rc = main(["metrics", "--out-dir", out])
    assert rc == 2
    assert "incomplete" in capsys.readouterr().err


def test_seed_and_run_overrides(tmp_path, toy_config_path):
    out = str(tmp_path / "seeded")
    rc = main(["run", "--out-dir", out, "--config", toy_config_path,
               "--algorithms", "none", "--seeds", "1",
               "--master-seed", "777"])
    assert rc == 0
    doc = storage.read_manifest(out)
    assert doc["n_runs"] == 1
    assert doc["master_seed"] == 777


def test_dump_weights_writes_per_round_traces(tmp_path, toy_config_path):
    out = str(tmp_path / "weighted")
    rc = main(["run", "--out-dir", out, "--config", toy_config_path,
               "--algorithms", "svd", "--seeds", "1", "--dump-weights"])
    assert rc == 0
    path = os.path.join(out, storage.weights_filename("svd", 0))
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == storage.WEIGHTS_HEADER
    assert len(lines) == 1 + 8  # one row per training round


def test_all_subcommands_are_registered():
    parser = build_parser()
    for argv in (["run"], ["metrics"], ["curves"], ["compare"],
                 ["desk-check"]):
        args = parser.parse_args(argv)
        assert callable(args.func)


def test_desk_check_flags_parse():
    args = build_parser().parse_args(
        ["desk-check", "--seeds", "2", "--jobs", "2", "--skip-rerun"])
    assert args.seeds == 2 and args.skip_rerun


def test_identical_seeds_give_identical_output_bytes(tmp_path, toy_config_path):
    outs = []
    for tag in ("a", "b"):
        out = str(tmp_path / tag)
        assert main(["run", "--out-dir", out, "--config", toy_config_path,
                     "--algorithms", "consumption", "--seeds", "2"]) == 0
        outs.append(out)
    for fname in sorted(os.listdir(outs[0])):
        if fname == storage.MANIFEST_NAME:
            continue  # timings differ
        with open(os.path.join(outs[0], fname), "rb") as fa, \
                open(os.path.join(outs[1], fname), "rb") as fb:
            assert fa.read() == fb.read(), fname
