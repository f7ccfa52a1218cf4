"""CART-style binary decision tree over raw feature triples.

Greedy recursive splitting on gini impurity with midpoint thresholds.
No pruning; depth and minimum-split-size are the only regularizers.
Thresholds are evaluated exhaustively, features in index order, so
training is fully deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetTooSmall, EmptyNode, ModelFormatError
from .features import FEATURE_NAMES, FeatureVector, Label, LabeledDataset, LabeledSample

TREE_SCHEMA_VERSION = "dtree-v1"


@dataclass
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass
class TreeNode:
    n_samples: int
    class_counts: tuple[int, int]
    impurity: float
    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    label: Label | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class DecisionTreeModel:
    root: TreeNode
    config: TreeConfig
    feature_names: tuple[str, str, str] = FEATURE_NAMES
    n_samples: int = 0
    class_counts: tuple[int, int] = (0, 0)


def gini(counts: tuple[int, int]) -> float:
    """Two-class gini impurity: 1 - p0^2 - p1^2, in [0, 0.5]."""
    n0, n1 = counts
    n = n0 + n1
    if n == 0:
        raise EmptyNode("gini of an empty node")
    p0 = n0 / n
    p1 = n1 / n
    # grouped sum keeps gini((a,b)) == gini((b,a)) exact in floating point
    return 1.0 - (p0 * p0 + p1 * p1)


def _leaf_label(counts: tuple[int, int]) -> Label:
    # ties resolve to the cautious class
    return Label.SANDBOX if counts[1] >= counts[0] else Label.TARGET


def _best_split_arrays(x: np.ndarray, y: np.ndarray):
    """Exhaustive midpoint search over every feature.

    Returns (feature_index, threshold, impurity_decrease) or None when no
    candidate strictly reduces weighted impurity.  Ties keep the first
    candidate in (feature asc, threshold asc) order.
    """
    n = len(y)
    n1_total = int(y.sum())
    parent = gini((n - n1_total, n1_total))
    best = None
    for f in range(x.shape[1]):
        vals = x[:, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[order]
        cum1 = np.cumsum(sy)
        for i in range(n - 1):
            if sv[i] == sv[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            l1 = int(cum1[i])
            l0 = nl - l1
            r1 = n1_total - l1
            r0 = nr - r1
            weighted = (nl / n) * gini((l0, l1)) + (nr / n) * gini((r0, r1))
            decrease = parent - weighted
            if decrease > 0.0 and (best is None or decrease > best[2]):
                best = (f, (sv[i] + sv[i + 1]) / 2.0, decrease)
    return best


def best_split(samples: list[LabeledSample]):
    """Best (feature, midpoint threshold, impurity decrease) for ``samples``."""
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    x = np.array([s.features.as_array() for s in samples])
    y = np.array([int(s.label) for s in samples])
    found = _best_split_arrays(x, y)
    if found is None:
        return None
    f, t, d = found
    return int(f), float(t), float(d)


def _grow(x: np.ndarray, y: np.ndarray, depth: int, config: TreeConfig) -> TreeNode:
    n = len(y)
    n1 = int(y.sum())
    counts = (n - n1, n1)
    impurity = gini(counts)
    node = TreeNode(n_samples=n, class_counts=counts, impurity=impurity)

    at_depth_limit = config.max_depth is not None and depth >= config.max_depth
    if impurity == 0.0 or n < config.min_samples_split or at_depth_limit:
        node.label = _leaf_label(counts)
        return node
    found = _best_split_arrays(x, y)
    if found is None:
        node.label = _leaf_label(counts)
        return node

    f, t, _ = found
    mask = x[:, f] <= t
    node.feature_index = int(f)
    node.threshold = float(t)
    node.left = _grow(x[mask], y[mask], depth + 1, config)
    node.right = _grow(x[~mask], y[~mask], depth + 1, config)
    return node


def train_tree(train: LabeledDataset, config: TreeConfig | None = None) -> DecisionTreeModel:
    """Fit a tree on raw (unscaled) features."""
    if not len(train):
        raise DatasetTooSmall("cannot train a tree on an empty dataset")
    config = config or TreeConfig()
    x = train.feature_matrix()
    y = train.label_array()
    root = _grow(x, y, 0, config)
    return DecisionTreeModel(root=root, config=config,
                             n_samples=len(train), class_counts=train.class_counts())


def _descend(node: TreeNode, x: np.ndarray) -> TreeNode:
    while not node.is_leaf:
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node


def predict_tree(model: DecisionTreeModel, v: FeatureVector) -> Label:
    leaf = _descend(model.root, v.as_array())
    return leaf.label


def predict_proba(model: DecisionTreeModel, v: FeatureVector) -> float:
    """Sandbox probability: class-1 fraction of the reached leaf."""
    leaf = _descend(model.root, v.as_array())
    n0, n1 = leaf.class_counts
    return n1 / (n0 + n1)


def export_tree(model: DecisionTreeModel, style: str = "ascii") -> str:
    """Render the tree as an indented rule listing or as dot graph text."""
    if style == "ascii":
        return _export_ascii(model)
    if style == "dot":
        return _export_dot(model)
    raise ValueError(f"unknown export style {style!r}")


def _export_ascii(model: DecisionTreeModel) -> str:
    lines: list[str] = []

    def walk(node: TreeNode, indent: int):
        pad = "  " * indent
        if node.is_leaf:
            n0, n1 = node.class_counts
            lines.append(f"{pad}class: {node.label.name.lower()} "
                         f"(target={n0}, sandbox={n1})")
            return
        name = model.feature_names[node.feature_index]
        lines.append(f"{pad}if {name} <= {node.threshold:g}:  "
                     f"# gini={node.impurity:.4f}, samples={node.n_samples}")
        walk(node.left, indent + 1)
        lines.append(f"{pad}else:  # {name} > {node.threshold:g}")
        walk(node.right, indent + 1)

    walk(model.root, 0)
    return "\n".join(lines) + "\n"


def _export_dot(model: DecisionTreeModel) -> str:
    lines = ["digraph decision_tree {", '  node [shape=box];']
    counter = 0

    def walk(node: TreeNode) -> int:
        nonlocal counter
        nid = counter
        counter += 1
        n0, n1 = node.class_counts
        if node.is_leaf:
            label = f"{node.label.name.lower()}\\ntarget={n0}, sandbox={n1}"
            lines.append(f'  n{nid} [label="{label}"];')
        else:
            name = model.feature_names[node.feature_index]
            label = (f"{name} <= {node.threshold:g}\\ngini={node.impurity:.4f}"
                     f"\\nsamples={node.n_samples}")
            lines.append(f'  n{nid} [label="{label}"];')
            left_id = walk(node.left)
            right_id = walk(node.right)
            lines.append(f"  n{nid} -> n{left_id};")
            lines.append(f"  n{nid} -> n{right_id};")
        return nid

    walk(model.root)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node_to_dict(node: TreeNode) -> dict:
    rec = {
        "n_samples": node.n_samples,
        "class_counts": list(node.class_counts),
        "impurity": node.impurity,
    }
    if node.is_leaf:
        rec["label"] = int(node.label)
    else:
        rec["feature_index"] = node.feature_index
        rec["threshold"] = node.threshold
        rec["left"] = _node_to_dict(node.left)
        rec["right"] = _node_to_dict(node.right)
    return rec


def _node_from_dict(rec: dict) -> TreeNode:
    try:
        node = TreeNode(
            n_samples=int(rec["n_samples"]),
            class_counts=(int(rec["class_counts"][0]), int(rec["class_counts"][1])),
            impurity=float(rec["impurity"]),
        )
        if "label" in rec:
            node.label = Label(int(rec["label"]))
        else:
            node.feature_index = int(rec["feature_index"])
            node.threshold = float(rec["threshold"])
            node.left = _node_from_dict(rec["left"])
            node.right = _node_from_dict(rec["right"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"bad tree node record: {e}") from None
    return node


def tree_to_dict(model: DecisionTreeModel) -> dict:
    return {
        "version": TREE_SCHEMA_VERSION,
        "criterion": "gini",
        "config": {"max_depth": model.config.max_depth,
                   "min_samples_split": model.config.min_samples_split},
        "feature_names": list(model.feature_names),
        "n_samples": model.n_samples,
        "class_counts": list(model.class_counts),
        "root": _node_to_dict(model.root),
    }


def tree_from_dict(doc: dict) -> DecisionTreeModel:
    if not isinstance(doc, dict) or doc.get("version") != TREE_SCHEMA_VERSION:
        raise ModelFormatError(f"not a {TREE_SCHEMA_VERSION} document")
    try:
        cfg = doc.get("config", {})
        config = TreeConfig(max_depth=cfg.get("max_depth"),
                            min_samples_split=int(cfg.get("min_samples_split", 2)))
        return DecisionTreeModel(
            root=_node_from_dict(doc["root"]),
            config=config,
            feature_names=tuple(doc.get("feature_names", FEATURE_NAMES)),
            n_samples=int(doc.get("n_samples", 0)),
            class_counts=tuple(doc.get("class_counts", (0, 0))),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(str(e)) from None


def save_tree(model: DecisionTreeModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tree_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_tree(path: str | Path) -> DecisionTreeModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"not valid JSON: {e}") from None
    return tree_from_dict(doc)
