"""Command-line behavior: exit codes, outputs, file artifacts."""

import json

import pytest

from proctriage.cli import main
from proctriage.features import load_dataset

FIX = "tests/fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- parse / featurize ----------------------------------------------------------

def test_featurize_sandbox(capsys):
    code, out, err = run(capsys, "featurize", "--in", f"{FIX}/sandbox_host.txt")
    assert code == 0
    assert out.strip() == "40,4,10.0"
    assert err == ""


def test_featurize_safe(capsys):
    code, out, _ = run(capsys, "featurize", "--in", f"{FIX}/safe_host.txt")
    assert code == 0
    assert out.strip() == "220,1,220.0"


def test_featurize_json_out(capsys, tmp_path):
    out_path = tmp_path / "features.json"
    code, _, _ = run(capsys, "featurize", "--in", f"{FIX}/sandbox_host.txt",
                     "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc == {"process_count": 40, "user_count": 4, "ratio": 10.0}


def test_featurize_explicit_format(capsys):
    code, out, _ = run(capsys, "featurize", "--in", f"{FIX}/sandbox_host.txt",
                       "--format", "tasklist")
    assert code == 0
    assert out.strip() == "40,4,10.0"


def test_parse_table(capsys):
    code, out, _ = run(capsys, "parse", "--in", f"{FIX}/sandbox_host.txt")
    assert code == 0
    assert "41 entries, 0 skipped rows" in out
    assert "smss.exe" in out


def test_parse_json_out(capsys, tmp_path):
    out_path = tmp_path / "parsed.json"
    code, _, _ = run(capsys, "parse", "--in", f"{FIX}/safe_host.txt", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["format"] == "tasklist_tabular"
    assert len(doc["entries"]) == 221


def test_parse_missing_file_is_error(capsys):
    code, _, err = run(capsys, "parse", "--in", "no/such/file.txt")
    assert code == 1
    assert "FileNotFoundError" in err


def test_garbage_listing_is_error(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("no header here\n")
    code, _, err = run(capsys, "featurize", "--in", str(bad))
    assert code == 1
    assert "UnrecognizedFormat" in err


def test_usage_error_is_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


# -- datagen / stats / split ------------------------------------------------------

@pytest.fixture(scope="module")
def dataset_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "dataset.csv"
    code = main(["datagen", "--seed", "7", "--out", str(path)])
    assert code == 0
    return path


def test_datagen_writes_dataset(capsys, dataset_csv):
    data = load_dataset(dataset_csv)
    assert len(data) == 384
    assert data.class_counts() == (324, 60)


def test_datagen_custom_sizes_stdout(capsys):
    code, out, _ = run(capsys, "datagen", "--n-safe", "3", "--n-unsafe", "2",
                       "--seed", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "process_count,user_count,ratio,label,origin"
    assert len(lines) == 6


def test_datagen_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "datagen", "--seed", "9", "--out", str(a))
    run(capsys, "datagen", "--seed", "9", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_stats_table(capsys, dataset_csv):
    code, out, _ = run(capsys, "stats", "--in", str(dataset_csv))
    assert code == 0
    assert "All Data (384 samples)" in out
    assert "Safe (324 samples)" in out
    assert "Unsafe (60 samples)" in out
    assert "Process Count" in out


def test_stats_json(capsys, dataset_csv, tmp_path):
    out_path = tmp_path / "stats.json"
    code, _, _ = run(capsys, "stats", "--in", str(dataset_csv), "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["all"]["n"] == 384
    assert doc["safe"]["n"] == 324
    assert doc["unsafe"]["n"] == 60


def test_split_writes_both_sides(capsys, dataset_csv, tmp_path):
    out_dir = tmp_path / "splits"
    code, out, _ = run(capsys, "split", "--in", str(dataset_csv),
                       "--seed", "3", "--out", str(out_dir))
    assert code == 0
    train = load_dataset(out_dir / "train.csv")
    test = load_dataset(out_dir / "test.csv")
    assert (len(train), len(test)) == (307, 77)
    assert "train: 307 samples" in out


def test_split_summary_only(capsys, dataset_csv):
    code, out, _ = run(capsys, "split", "--in", str(dataset_csv), "--train-fraction", "0.5")
    assert code == 0
    assert "train: 192 samples" in out
    assert "test:  192 samples" in out


def test_stats_malformed_csv_is_error(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n1,2\n")
    code, _, err = run(capsys, "stats", "--in", str(bad))
    assert code == 1
    assert "MalformedDatasetFile" in err


# -- train / evaluate / classify -----------------------------------------------------

def test_train_dtree_deterministic(capsys, dataset_csv, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = run(capsys, "train", "--in", str(dataset_csv), "--model", "dtree",
                       "--max-depth", "5", "--out", str(a))
    assert code == 0
    assert "Accuracy:" in out
    run(capsys, "train", "--in", str(dataset_csv), "--model", "dtree",
        "--max-depth", "5", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["version"] == "dtree-v1"


def test_train_ann_writes_history(capsys, dataset_csv, tmp_path):
    out = tmp_path / "net.json"
    code, stdout, _ = run(capsys, "train", "--in", str(dataset_csv), "--model", "ann",
                          "--epochs", "30", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["version"] == "ann-v1"
    assert doc["scaler"] is not None
    history = (tmp_path / "net.history.csv").read_text().splitlines()
    assert history[0] == "epoch,bce,mse"
    assert len(history) == 31
    assert history[1].startswith("1,")


def test_train_ann_deterministic(capsys, dataset_csv, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "train", "--in", str(dataset_csv), "--model", "ann",
        "--epochs", "10", "--out", str(a))
    run(capsys, "train", "--in", str(dataset_csv), "--model", "ann",
        "--epochs", "10", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


@pytest.fixture(scope="module")
def tree_model(tmp_path_factory, dataset_csv):
    path = tmp_path_factory.mktemp("models") / "tree.json"
    assert main(["train", "--in", str(dataset_csv), "--max-depth", "5",
                 "--out", str(path)]) == 0
    return path


def test_evaluate_model_on_dataset(capsys, tree_model, dataset_csv):
    code, out, _ = run(capsys, "evaluate", str(tree_model), "--in", str(dataset_csv))
    assert code == 0
    assert "Accuracy:" in out
    assert "Safe" in out and "Unsafe" in out


def test_evaluate_report_json(capsys, tree_model, dataset_csv, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "evaluate", str(tree_model), "--in", str(dataset_csv),
                     "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert set(doc) >= {"confusion", "per_class", "macro_avg", "weighted_avg", "accuracy"}


def test_evaluate_prediction_files(capsys, tmp_path):
    pred = tmp_path / "pred.txt"
    actual = tmp_path / "actual.txt"
    pred.write_text("0\n1\n1\n0\n")
    actual.write_text("0\n1\n0\n0\n")
    code, out, _ = run(capsys, "evaluate", "--pred", str(pred), "--actual", str(actual))
    assert code == 0
    assert "Accuracy: 75.00%" in out


def test_evaluate_mismatched_files_is_error(capsys, tmp_path):
    pred = tmp_path / "pred.txt"
    actual = tmp_path / "actual.txt"
    pred.write_text("0\n1\n")
    actual.write_text("0\n")
    code, _, err = run(capsys, "evaluate", "--pred", str(pred), "--actual", str(actual))
    assert code == 1
    assert "LengthMismatch" in err


def test_evaluate_bad_label_file_is_error(capsys, tmp_path):
    pred = tmp_path / "pred.txt"
    actual = tmp_path / "actual.txt"
    pred.write_text("0\ntwo\n")
    actual.write_text("0\n1\n")
    code, _, err = run(capsys, "evaluate", "--pred", str(pred), "--actual", str(actual))
    assert code == 1
    assert "MalformedDatasetFile" in err


def test_classify_human_line(capsys, tree_model):
    code, out, _ = run(capsys, "classify", str(tree_model),
                       "--in", f"{FIX}/sandbox_host.txt")
    assert code == 0
    assert out.startswith(("safe ", "sandbox "))
    assert "features=40,4,10.0" in out


def test_classify_json(capsys, tree_model, tmp_path):
    out_path = tmp_path / "verdict.json"
    code, _, _ = run(capsys, "classify", str(tree_model),
                     "--in", f"{FIX}/safe_host.txt", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["verdict"] in ("safe", "sandbox")
    assert doc["features"]["process_count"] == 220


def test_classify_bad_model_file_is_error(capsys, tmp_path):
    bad = tmp_path / "model.json"
    bad.write_text('{"version": "mystery"}')
    code, _, err = run(capsys, "classify", str(bad), "--in", f"{FIX}/safe_host.txt")
    assert code == 1
    assert "ModelFormatError" in err


# -- export-tree -------------------------------------------------------------------

def test_export_tree_ascii(capsys, tree_model):
    code, out, _ = run(capsys, "export-tree", str(tree_model))
    assert code == 0
    assert "if " in out and "class:" in out


def test_export_tree_dot(capsys, tree_model, tmp_path):
    out_path = tmp_path / "tree.dot"
    code, _, _ = run(capsys, "export-tree", str(tree_model), "--format", "dot",
                     "--out", str(out_path))
    assert code == 0
    dot = out_path.read_text()
    assert dot.count("digraph") == 1
    assert "->" in dot


def test_export_tree_rejects_ann(capsys, dataset_csv, tmp_path):
    net = tmp_path / "net.json"
    main(["train", "--in", str(dataset_csv), "--model", "ann", "--epochs", "5",
          "--out", str(net)])
    capsys.readouterr()
    code, _, err = run(capsys, "export-tree", str(net))
    assert code == 1
    assert "ModelFormatError" in err
