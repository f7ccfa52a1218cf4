"""Train the CART classifier and read its decision rules.

The tree is grown greedily: every node tries all three features and all
midpoint thresholds, keeps the split with the largest gini decrease, and
recurses. Depth capping keeps the rules legible.
"""
from proctriage import (
    FeatureVector,
    GenConfig,
    TreeConfig,
    evaluate_predictions,
    export_tree,
    format_report,
    generate_dataset,
    predict_tree,
    split_dataset,
    train_tree,
)

data = generate_dataset(GenConfig(seed=3))
train, test = split_dataset(data, 0.8, seed=3, stratified=True)
print(f"train {len(train)} / test {len(test)}")

model = train_tree(train, TreeConfig(max_depth=4, min_samples_split=10))
print()
print(export_tree(model, style="ascii"))

preds = [predict_tree(model, s.features) for s in test]
actual = [s.label for s in test]
print(format_report(evaluate_predictions(preds, actual)))

probe = FeatureVector.from_counts(40, 4)
print(f"probe {probe.process_count},{probe.user_count},{probe.ratio} -> "
      f"{predict_tree(model, probe).name}")

# the dot rendering drops straight into graphviz
print()
print("graphviz version available via export_tree(model, style='dot')")
