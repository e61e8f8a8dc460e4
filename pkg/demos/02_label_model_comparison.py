# %% [markdown]
# # Comparing label models against the Bayes oracle
#
# On synthetic data the generating law is known, so the Bayes-optimal
# posterior is computable in closed form and every label model can be
# measured against the best possible ranking. This script fits the
# simplex-weighted model (with and without a class prior), majority
# vote, Dawid-Skene EM, and the triplet-moment method on one benchmark.

# %%
import numpy as np

from weapo import (
    Prior,
    SyntheticSpec,
    WeapoConfig,
    convert_abstain,
    coverage_mask,
    ds_fit,
    ds_posteriors,
    evaluate_label_model,
    fit,
    fs_fit,
    fs_posteriors,
    generate,
    mv_scores,
    oracle_posteriors,
    predict_dataset,
)

spec = SyntheticSpec(
    p_plus=0.3,
    tpr=(0.7, 0.6, 0.5, 0.4, 0.8),
    fpr=(0.1, 0.05, 0.15, 0.1, 0.2),
    n=20000,
    seed=102,
)
dataset = generate(spec)
gold = dataset.gold_array
signed = convert_abstain(dataset)
mask = coverage_mask(dataset)
print(f"n = {len(dataset)}, covered = {int(mask.sum())}, "
      f"positives = {int((gold == 1).sum())}")

# %% [markdown]
# Fit everything. The triplet method and the simplex model consume the
# known positive rate; Dawid-Skene estimates its own prior from an
# agnostic start; majority vote has nothing to fit.

# %%
scores = {"mv": mv_scores(dataset)}

ds_model = ds_fit(signed, Prior(0.5))
scores["ds"] = ds_posteriors(ds_model, signed)

fs_model = fs_fit(signed, Prior(spec.p_plus))
scores["fs"] = fs_posteriors(fs_model, signed)

weapo_model = fit(dataset, Prior(spec.p_plus))
scores["weapo"] = predict_dataset(weapo_model, dataset)[0]

noprior_model = fit(dataset, None, WeapoConfig(use_prior=False))
scores["weapo-noprior"] = predict_dataset(noprior_model, dataset)[0]

scores["oracle"] = oracle_posteriors(spec).scores(dataset)

# %% [markdown]
# Evaluate on the covered subset, where every model is on equal footing.

# %%
print(f"{'model':<15} {'roc_auc':>8} {'pr_auc':>8}")
for name, s in scores.items():
    result = evaluate_label_model(s, mask, gold)
    print(f"{name:<15} {result.roc_auc:>8.4f} {result.pr_auc:>8.4f}")

# %% [markdown]
# The fitted simplex weights are interpretable: each entry is the share
# of the score a function contributes when it fires. Without the prior
# term the optimum is exactly uniform, so the prior is what
# differentiates reliable functions from noisy ones here.

# %%
print("weapo theta:        ", np.round(weapo_model.theta, 4))
print("weapo-noprior theta:", np.round(noprior_model.theta, 4))

# %% [markdown]
# The prior term also calibrates the score scale: the mean fitted score
# over all records is pulled toward the supplied positive rate.

# %%
mean_score = float(scores["weapo"].mean())
print(f"mean weapo score = {mean_score:.4f}, target prior = {spec.p_plus}")

# %% [markdown]
# Dawid-Skene recovers the planted confusion rates as a side effect.

# %%
print("true tpr:", spec.tpr)
print("ds tpr:  ", np.round(ds_model.confusion[:, 1, 1], 3))
print("true fpr:", spec.fpr)
print("ds fpr:  ", np.round(ds_model.confusion[:, 0, 1], 3))
