# %% [markdown]
# # From weak votes to a feature-space end model
#
# Label models only rank records that some labeling function covered.
# The end model escapes that limit: it treats label-model scores as
# regression targets over features, so it can score every record,
# covered or not. This script runs the full pipeline on synthetic data
# with two-Gaussian features.

# %%
import numpy as np

from weapo import (
    FeatureSpec,
    Prior,
    SyntheticSpec,
    evaluate_label_model,
    fit,
    fit_krr,
    generate,
    make_targets,
    predict_dataset,
    predict_krr,
    roc_auc,
)

feature_spec = FeatureSpec(
    mu_pos=(2.0, 2.0),
    mu_neg=(-2.0 / np.sqrt(2.0), -2.0 / np.sqrt(2.0)),
    sigma=1.0,
)
base = dict(
    p_plus=0.4,
    tpr=(0.75, 0.65, 0.55, 0.7),
    fpr=(0.15, 0.1, 0.05, 0.12),
    n=1500,
    feature_spec=feature_spec,
)
train = generate(SyntheticSpec(seed=41, **base))
test = generate(SyntheticSpec(seed=42, **base))

# %% [markdown]
# Step 1: fit the label model on training votes. Its scores exist for
# everyone, but uncovered records all sit at exactly zero.

# %%
label_model = fit(train, Prior(0.4))
train_scores, train_mask = predict_dataset(label_model, train)
print(f"covered in train: {int(train_mask.sum())} / {len(train)}")

# %% [markdown]
# Step 2: turn scores into regression targets. Covered records keep
# their label-model score; uncovered ones fall back to 0, i.e. they are
# treated as probable negatives rather than discarded.

# %%
targets = make_targets(train_scores, train_mask)

# %% [markdown]
# Step 3: kernel ridge regression from features to targets.

# %%
end_model = fit_krr(train.features_matrix, targets)
print(f"gamma = {end_model.gamma:.4f}, alpha = {end_model.alpha}")

# %% [markdown]
# Evaluation. The label model is scored where it is defined (covered
# test records); the end model is scored on every test record.

# %%
test_scores, test_mask = predict_dataset(label_model, test)
label_result = evaluate_label_model(test_scores, test_mask, test.gold_array)
end_predictions = predict_krr(end_model, test.features_matrix)
end_auc = roc_auc(end_predictions, test.gold_array)

print(f"label model roc_auc = {label_result.roc_auc:.4f} "
      f"on {label_result.n_evaluated} covered records")
print(f"end model   roc_auc = {end_auc:.4f} on all {len(test)} records")

# %% [markdown]
# The payoff is on the records the label model cannot rank at all: the
# end model still separates them because their features carry signal.

# %%
uncovered = ~test_mask.astype(bool)
uncovered_auc = roc_auc(end_predictions[uncovered], test.gold_array[uncovered])
print(f"end model roc_auc on the {int(uncovered.sum())} uncovered "
      f"test records = {uncovered_auc:.4f}")
