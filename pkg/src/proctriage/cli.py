"""Command line front end.

One executable, ten subcommands, wiring the library into the usual
workflow: parse a listing, extract features, generate or summarize
datasets, split, train either model, evaluate, classify, export a tree,
or run the collection service.

Randomized subcommands default to seed 1337 so repeated casual runs
agree; pass --seed to change it.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ann import (
    ANN_SCHEMA_VERSION,
    AnnConfig,
    ann_from_dict,
    ann_to_dict,
    predict_ann,
    train_ann,
)
from .datagen import GenConfig, generate_dataset
from .dtree import (
    TREE_SCHEMA_VERSION,
    TreeConfig,
    export_tree,
    predict_proba,
    predict_tree,
    train_tree,
    tree_from_dict,
    tree_to_dict,
)
from .errors import MalformedDatasetFile, ModelFormatError, TriageError
from .features import (
    Label,
    compute_stats,
    dataset_to_csv,
    featurize,
    format_stats,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .metrics import evaluate_predictions, format_report, report_to_dict
from .proclist import PS_UNIX, TASKLIST_TABULAR, parse_process_list
from .service import VERDICT_DISPLAY, ServiceConfig, run_service

DEFAULT_SEED = 1337

# command-line format names to parser constants
_FORMAT_HINTS = {None: None, "tasklist": TASKLIST_TABULAR, "ps": PS_UNIX}


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _write_json(path: str, doc) -> None:
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def _load_model(path: str):
    """Read a model file, returning (kind, model) by schema version."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ModelFormatError(f"{path}: not valid JSON ({err})") from None
    version = doc.get("version") if isinstance(doc, dict) else None
    if version == TREE_SCHEMA_VERSION:
        return "dtree", tree_from_dict(doc)
    if version == ANN_SCHEMA_VERSION:
        return "ann", ann_from_dict(doc)
    raise ModelFormatError(f"{path}: unsupported model version {version!r}")


def _model_outputs(kind: str, model, dataset):
    preds, probs = [], []
    for sample in dataset.samples:
        if kind == "dtree":
            preds.append(predict_tree(model, sample.features))
            probs.append(predict_proba(model, sample.features))
        else:
            label, prob = predict_ann(model, sample.features)
            preds.append(label)
            probs.append(prob)
    return preds, probs


def _evaluate_on(kind: str, model, dataset):
    preds, probs = _model_outputs(kind, model, dataset)
    actual = [s.label for s in dataset.samples]
    return evaluate_predictions(preds, actual, probs)


# subcommand handlers

def _cmd_parse(args) -> int:
    plist = parse_process_list(_read_text(args.infile), fmt=_FORMAT_HINTS[args.format],
                               strict=args.strict, source_id=args.infile)
    if args.out:
        doc = {
            "format": plist.format,
            "warnings": list(plist.warnings),
            "entries": [{"pid": e.pid, "ppid": e.ppid, "name": e.name,
                         "arch": e.arch, "session": e.session, "owner": e.owner}
                        for e in plist.entries],
        }
        _write_json(args.out, doc)
        return 0
    print(f"{'PID':>6} {'PPID':>6} {'ARCH':<7} {'SESS':>4}  {'NAME':<36} OWNER")
    for e in plist.entries:
        sess = "-" if e.session is None else str(e.session)
        print(f"{e.pid:>6} {e.ppid:>6} {e.arch:<7} {sess:>4}  {e.name:<36} {e.owner or '-'}")
    print(f"\n{len(plist.entries)} entries, {len(plist.warnings)} skipped rows")
    return 0


def _cmd_featurize(args) -> int:
    plist = parse_process_list(_read_text(args.infile), fmt=_FORMAT_HINTS[args.format],
                               strict=args.strict, source_id=args.infile)
    v = featurize(plist)
    if args.out:
        _write_json(args.out, {"process_count": v.process_count,
                               "user_count": v.user_count, "ratio": v.ratio})
        return 0
    print(f"{v.process_count},{v.user_count},{v.ratio!r}")
    return 0


def _cmd_stats(args) -> int:
    stats = compute_stats(load_dataset(args.infile))
    if args.out:
        def block(b):
            if b is None:
                return None
            return {"n": b.n, "min": list(b.mins), "max": list(b.maxs),
                    "mean": list(b.means), "std": list(b.stds)}
        _write_json(args.out, {"all": block(stats.all), "safe": block(stats.safe),
                               "unsafe": block(stats.unsafe)})
        return 0
    print(format_stats(stats), end="")
    return 0


def _cmd_datagen(args) -> int:
    config = GenConfig(n_safe=args.n_safe, n_unsafe=args.n_unsafe, seed=args.seed)
    data = generate_dataset(config)
    if args.out:
        save_dataset(data, args.out)
        print(f"{len(data)} samples -> {args.out}")
        return 0
    print(dataset_to_csv(data), end="")
    return 0


def _cmd_split(args) -> int:
    data = load_dataset(args.infile)
    train, test = split_dataset(data, args.train_fraction, args.seed,
                                stratified=args.stratified)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        save_dataset(train, out / "train.csv")
        save_dataset(test, out / "test.csv")
        print(f"train: {len(train)} samples -> {out / 'train.csv'}")
        print(f"test:  {len(test)} samples -> {out / 'test.csv'}")
    else:
        print(f"train: {len(train)} samples {train.class_counts()}")
        print(f"test:  {len(test)} samples {test.class_counts()}")
    return 0


def _cmd_train(args) -> int:
    data = load_dataset(args.infile)
    train, test = split_dataset(data, args.train_fraction, args.seed)
    if args.model == "dtree":
        model = train_tree(train, TreeConfig(max_depth=args.max_depth))
        doc = tree_to_dict(model)
    else:
        config = AnnConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)
        model, history = train_ann(train, config)
        doc = ann_to_dict(model)
        history_path = Path(args.out).with_suffix(".history.csv")
        lines = ["epoch,bce,mse"]
        lines += [f"{i + 1},{b!r},{m!r}" for i, (b, m) in
                  enumerate(zip(history.bce, history.mse))]
        _write_text(str(history_path), "\n".join(lines) + "\n")
        print(f"loss history -> {history_path}")
    _write_json(args.out, doc)
    print(f"model -> {args.out}")
    report = _evaluate_on(args.model, model, test)
    print()
    print(format_report(report), end="")
    return 0


def _read_label_file(path: str) -> list[Label]:
    labels = []
    for line_no, line in enumerate(_read_text(path).splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line not in ("0", "1"):
            raise MalformedDatasetFile(line_no, f"expected 0 or 1, got {line!r}")
        labels.append(Label(int(line)))
    return labels


def _read_float_file(path: str) -> list[float]:
    values = []
    for line_no, line in enumerate(_read_text(path).splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise MalformedDatasetFile(line_no, f"not a number: {line!r}") from None
    return values


def _cmd_evaluate(args) -> int:
    if args.pred or args.actual:
        if not (args.pred and args.actual):
            raise MalformedDatasetFile(0, "--pred and --actual go together")
        preds = _read_label_file(args.pred)
        actual = _read_label_file(args.actual)
        probs = _read_float_file(args.probs) if args.probs else None
        report = evaluate_predictions(preds, actual, probs)
    else:
        if not (args.model_file and args.infile):
            raise MalformedDatasetFile(0, "need MODEL and --in DATASET, or --pred/--actual")
        kind, model = _load_model(args.model_file)
        report = _evaluate_on(kind, model, load_dataset(args.infile))
    if args.out:
        _write_json(args.out, report_to_dict(report))
        return 0
    print(format_report(report), end="")
    return 0


def _cmd_classify(args) -> int:
    kind, model = _load_model(args.model_file)
    plist = parse_process_list(_read_text(args.infile), strict=args.strict,
                               source_id=args.infile)
    v = featurize(plist)
    if kind == "dtree":
        label, prob = predict_tree(model, v), predict_proba(model, v)
    else:
        label, prob = predict_ann(model, v)
    if args.out:
        _write_json(args.out, {"verdict": VERDICT_DISPLAY[label], "label": int(label),
                               "probability": prob,
                               "features": {"process_count": v.process_count,
                                            "user_count": v.user_count,
                                            "ratio": v.ratio}})
        return 0
    print(f"{VERDICT_DISPLAY[label]} p={prob:.4f} "
          f"features={v.process_count},{v.user_count},{v.ratio!r}")
    return 0


def _cmd_export_tree(args) -> int:
    kind, model = _load_model(args.model_file)
    if kind != "dtree":
        raise ModelFormatError("export-tree works on dtree-v1 models only")
    text = export_tree(model, style=args.format)
    if args.out:
        _write_text(args.out, text)
        return 0
    print(text, end="")
    return 0


def _cmd_serve(args) -> int:
    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(data_dir=args.data_dir, host=host or "127.0.0.1",
                           port=int(port), token=args.token, strict=args.strict,
                           model_path=args.model_file)
    run_service(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proctriage",
        description="Process-list triage: features, models, metrics, service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=handler)
        return p

    p = add("parse", _cmd_parse, "parse a process listing")
    p.add_argument("--in", dest="infile", default="-", help="listing file, - for stdin")
    p.add_argument("--format", choices=["tasklist", "ps"], default=None,
                   help="skip autodetection")
    p.add_argument("--strict", action="store_true", help="fail on any malformed row")
    p.add_argument("--out", help="write entries as JSON instead of a table")

    p = add("featurize", _cmd_featurize, "extract process_count,user_count,ratio")
    p.add_argument("--in", dest="infile", default="-", help="listing file, - for stdin")
    p.add_argument("--format", choices=["tasklist", "ps"], default=None)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", help="write the feature vector as JSON")

    p = add("stats", _cmd_stats, "per-class feature statistics of a dataset CSV")
    p.add_argument("--in", dest="infile", required=True, help="dataset CSV")
    p.add_argument("--out", help="write stats as JSON instead of a table")

    p = add("datagen", _cmd_datagen, "generate a synthetic dataset")
    p.add_argument("--n-safe", type=int, default=324)
    p.add_argument("--n-unsafe", type=int, default=60)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="dataset CSV path (stdout otherwise)")

    p = add("split", _cmd_split, "split a dataset into train/test CSVs")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--out", help="directory for train.csv and test.csv")

    p = add("train", _cmd_train, "split, fit, and evaluate a model")
    p.add_argument("--in", dest="infile", required=True, help="dataset CSV")
    p.add_argument("--model", choices=["dtree", "ann"], default="dtree")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-depth", type=int, default=None, help="dtree only")
    p.add_argument("--epochs", type=int, default=500, help="ann only")
    p.add_argument("--lr", type=float, default=0.1, help="ann only")
    p.add_argument("--out", required=True, help="model JSON path")

    p = add("evaluate", _cmd_evaluate, "score a model or raw prediction files")
    p.add_argument("model_file", nargs="?", help="model JSON (with --in)")
    p.add_argument("--in", dest="infile", help="labeled dataset CSV")
    p.add_argument("--pred", help="file with one predicted label per line")
    p.add_argument("--actual", help="file with one true label per line")
    p.add_argument("--probs", help="file with one probability per line")
    p.add_argument("--out", help="write the report as JSON")

    p = add("classify", _cmd_classify, "verdict for one listing under a model")
    p.add_argument("model_file", help="model JSON")
    p.add_argument("--in", dest="infile", default="-", help="listing file, - for stdin")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", help="write the verdict as JSON")

    p = add("export-tree", _cmd_export_tree, "render a tree model as text")
    p.add_argument("model_file", help="dtree-v1 model JSON")
    p.add_argument("--format", choices=["ascii", "dot"], default="ascii")
    p.add_argument("--out", help="output path (stdout otherwise)")

    p = add("serve", _cmd_serve, "run the collection/classification service")
    p.add_argument("model_file", nargs="?", help="model JSON to activate at start")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--listen", default="127.0.0.1:8750", help="HOST:PORT, port 0 for any")
    p.add_argument("--token", default=None, help="require this bearer token")
    p.add_argument("--strict", action="store_true", help="reject unparseable submissions")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TriageError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
