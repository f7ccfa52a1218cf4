"""Train the sigmoid network and watch the loss fall.

The net is tiny on purpose: 3 inputs, two hidden layers of 3 sigmoid
units, one sigmoid output, trained full-batch on mean binary
cross-entropy. Features are min-max scaled with parameters fitted on the
training split only; the scaler travels inside the saved model.
"""
from proctriage import (
    AnnConfig,
    GenConfig,
    evaluate_predictions,
    format_report,
    generate_dataset,
    gradient_check,
    init_network,
    predict_ann,
    split_dataset,
    train_ann,
)
from proctriage.features import FeatureVector, Label, LabeledSample, ScalerParams

data = generate_dataset(GenConfig(seed=3))
train, test = split_dataset(data, 0.8, seed=3, stratified=True)

config = AnnConfig(learning_rate=3.0, epochs=500, seed=4)
model, history = train_ann(train, config)

print("loss trajectory (mean BCE):")
for epoch in (1, 10, 50, 100, 250, 500):
    print(f"  epoch {epoch:>3}: bce {history.bce[epoch - 1]:.4f} "
          f"mse {history.mse[epoch - 1]:.4f}")

preds, probs = [], []
for s in test:
    label, p = predict_ann(model, s.features)
    preds.append(label)
    probs.append(p)
print()
print(format_report(evaluate_predictions(preds, [s.label for s in test], probs)))

# backprop sanity: analytic gradients vs central finite differences
check_model = init_network(AnnConfig(seed=0))
check_model.scaler = ScalerParams(mins=(9.0, 1.0, 2.1), maxs=(305.0, 17.0, 305.0))
sample = LabeledSample(FeatureVector.from_counts(40, 4), Label.SANDBOX)
err = gradient_check(check_model, sample)
print(f"gradient check, max relative error: {err:.2e}")
