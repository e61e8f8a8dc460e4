"""Acceptance suite: one test per release criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get a pass/fail line
per criterion. Tolerances are part of the contract and are asserted
exactly as stated; loosening them is a release decision, not a test fix.
"""

import json
import time

import numpy as np
import pytest

from weapo import (
    DSModel,
    Dataset,
    FeatureSpec,
    Prior,
    Record,
    SyntheticSpec,
    WeapoConfig,
    build_slices,
    constraint_matrix,
    convert_abstain,
    ds_fit,
    ds_posteriors,
    fit,
    fit_krr,
    fs_fit,
    fs_fit_from_moments,
    fs_posteriors,
    generate,
    hasse_edges,
    load_dataset,
    make_targets,
    mv_scores,
    oracle_posteriors,
    population_moments,
    pr_auc,
    predict_dataset,
    predict_krr,
    roc_auc,
    save_dataset,
)
from weapo.cli import main as cli_main

from oracles import (
    average_precision_rank_walk,
    closure_of_edges,
    covering_pairs_brute,
    roc_auc_by_pair_counting,
    roc_auc_pair_matrix,
)


def random_dataset_suite():
    """The fixed 100-dataset stress suite: M <= 8, N <= 500, mixed density."""
    rng = np.random.default_rng(42)
    for _ in range(100):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 501))
        density = rng.random() * 0.5 + 0.1
        votes = (rng.random((n, m)) < density).astype(int)
        votes[0, int(rng.integers(0, m))] = 1
        p = float(rng.uniform(0.05, 0.95))
        dataset = Dataset.from_records(
            [Record(id=f"r{i}", votes=tuple(row)) for i, row in enumerate(votes)]
        )
        yield dataset, p


PRIOR_MATCHABLE_SPECS = (
    SyntheticSpec(p_plus=0.5, tpr=(0.95, 0.7), fpr=(0.3, 0.1), n=2500, seed=13),
    SyntheticSpec(
        p_plus=0.35, tpr=(0.95, 0.55, 0.15), fpr=(0.35, 0.15, 0.02), n=3000, seed=21
    ),
    SyntheticSpec(
        p_plus=0.35,
        tpr=(0.95, 0.75, 0.55, 0.35, 0.15),
        fpr=(0.4, 0.28, 0.18, 0.1, 0.02),
        n=4000,
        seed=22,
    ),
)

INFORMATIVE_SPECS = (
    SyntheticSpec(
        p_plus=0.5, tpr=(0.8, 0.7, 0.6, 0.75, 0.65),
        fpr=(0.2, 0.15, 0.1, 0.25, 0.2), n=20000, seed=101,
    ),
    SyntheticSpec(
        p_plus=0.3, tpr=(0.7, 0.6, 0.5, 0.4, 0.8),
        fpr=(0.1, 0.05, 0.15, 0.1, 0.2), n=20000, seed=102,
    ),
    SyntheticSpec(
        p_plus=0.6, tpr=(0.9, 0.5, 0.6, 0.7, 0.4),
        fpr=(0.3, 0.1, 0.2, 0.25, 0.05), n=20000, seed=103,
    ),
    SyntheticSpec(
        p_plus=0.4, tpr=(0.6, 0.55, 0.5, 0.45, 0.65),
        fpr=(0.2, 0.1, 0.15, 0.05, 0.25), n=20000, seed=104,
    ),
    SyntheticSpec(
        p_plus=0.5, tpr=(0.95, 0.85, 0.75, 0.65, 0.55),
        fpr=(0.05, 0.1, 0.15, 0.2, 0.25), n=20000, seed=105,
    ),
)

UNINFORMATIVE_SPEC = SyntheticSpec(
    p_plus=0.5,
    tpr=(0.45, 0.3, 0.6, 0.35, 0.55),
    fpr=(0.45, 0.3, 0.6, 0.35, 0.55),
    n=20000,
    seed=106,
)


def all_signed_vectors(m):
    return np.array(
        [[1 if (bits >> j) & 1 else -1 for j in range(m)] for bits in range(2**m)],
        dtype=np.int8,
    )


def dominance_violations(unique_votes, scores, tol=1e-12):
    """Pairs where a dominating vote vector scores lower than the dominated."""
    u = np.asarray(unique_votes)
    s = np.asarray(scores, dtype=np.float64)
    dom = (u[:, None, :] >= u[None, :, :]).all(axis=-1) & (
        u[:, None, :] > u[None, :, :]
    ).any(axis=-1)
    return int((dom & (s[:, None] < s[None, :] - tol)).sum())


def test_c01_fit_is_feasible_on_100_random_datasets():
    start = time.perf_counter()
    for dataset, p in random_dataset_suite():
        model = fit(dataset, Prior(p))
        assert (model.theta >= -1e-12).all()
        assert abs(model.theta.sum() - 1.0) <= 1e-9
        assert model.diagnostics["hinge"] <= 1e-12
    assert time.perf_counter() - start < 30.0


def test_c02_noprior_fit_returns_uniform_weights():
    config = WeapoConfig(use_prior=False)
    for dataset, _ in random_dataset_suite():
        model = fit(dataset, None, config)
        uniform = np.full(dataset.num_lfs, 1.0 / dataset.num_lfs)
        np.testing.assert_allclose(model.theta, uniform, atol=1e-6)


def test_c03_prior_deviation_within_tolerance_when_matchable():
    for spec in PRIOR_MATCHABLE_SPECS:
        dataset = generate(spec)
        model = fit(dataset, Prior(spec.p_plus))
        scores, _ = predict_dataset(model, dataset)
        assert abs(float(scores.mean()) - spec.p_plus) <= 0.02


def test_c04_hasse_closure_matches_brute_force_covering():
    rng = np.random.default_rng(9)
    for _ in range(200):
        m = int(rng.integers(1, 7))
        k = int(rng.integers(1, min(2**m, 20) + 1))
        votes = rng.integers(0, 2, size=(k, m))
        votes[0, int(rng.integers(0, m))] = 1
        dataset = Dataset.from_records(
            [Record(id=f"r{i}", votes=tuple(row)) for i, row in enumerate(votes)]
        )
        table = build_slices(dataset)
        keys = list(table.slices.keys())
        edges = hasse_edges(keys)
        closure = closure_of_edges([(e.low, e.high) for e in edges], keys)
        assert closure == covering_pairs_brute(keys)
        matrix = constraint_matrix(table, edges)
        if matrix.num_rows:
            assert (matrix.apply(np.ones(len(dataset))) == 0.0).all()


def test_c05_roc_pair_counting_and_pr_rank_walk_agree_exactly():
    assert roc_auc([0.9, 0.8, 0.3, 0.2], [1, -1, 1, -1]) == 0.75
    hand_ap = pr_auc([0.9, 0.8, 0.3, 0.2], [1, -1, 1, -1])
    assert hand_ap == average_precision_rank_walk([0.9, 0.8, 0.3, 0.2], [1, -1, 1, -1])
    assert hand_ap == pytest.approx(0.8333, abs=1e-4)

    rng = np.random.default_rng(17)
    roc_checked = 0
    while roc_checked < 1000:
        n = int(rng.integers(2, 501))
        levels = rng.normal(size=int(rng.integers(2, 11)))
        scores = rng.choice(levels, size=n)
        labels = rng.choice([-1, 1], size=n)
        if (labels == 1).sum() in (0, n):
            continue
        fast = roc_auc_pair_matrix(scores, labels)
        assert roc_auc(scores, labels) == fast
        if roc_checked < 20:
            assert fast == roc_auc_by_pair_counting(scores, labels)
        roc_checked += 1

    pr_checked = 0
    while pr_checked < 1000:
        n = int(rng.integers(2, 501))
        scores = rng.normal(size=n)
        if np.unique(scores).size < n:
            continue
        labels = rng.choice([-1, 1], size=n)
        if (labels == 1).sum() == 0:
            continue
        assert pr_auc(scores, labels) == average_precision_rank_walk(scores, labels)
        pr_checked += 1


def test_c06_ds_em_is_monotone_oracle_consistent_and_recovers_truth():
    # Posteriors from the true parameters must equal the closed-form
    # Bayes oracle on every possible vote vector.
    spec = SyntheticSpec(
        p_plus=0.5, tpr=(0.9, 0.8, 0.7), fpr=(0.1, 0.2, 0.3), n=10000, seed=5
    )
    truth = np.empty((3, 2, 2))
    truth[:, 1, 1] = spec.tpr
    truth[:, 1, 0] = 1.0 - np.asarray(spec.tpr)
    truth[:, 0, 1] = spec.fpr
    truth[:, 0, 0] = 1.0 - np.asarray(spec.fpr)
    true_model = DSModel(class_prior=spec.p_plus, confusion=truth)
    signed_all = all_signed_vectors(3)
    oracle = oracle_posteriors(spec)
    for row in signed_all:
        votes = tuple(int(v > 0) for v in row)
        assert abs(
            float(ds_posteriors(true_model, row.reshape(1, -1))[0])
            - oracle.posterior(votes)
        ) <= 1e-12

    # Parameter recovery from a large sample, within 10 seconds.
    start = time.perf_counter()
    dataset = generate(spec)
    model = ds_fit(convert_abstain(dataset), Prior(0.5))
    assert time.perf_counter() - start < 10.0
    assert abs(model.class_prior - spec.p_plus) <= 0.05
    assert np.abs(model.confusion[:, 1, 1] - np.asarray(spec.tpr)).max() <= 0.05
    assert np.abs(model.confusion[:, 0, 1] - np.asarray(spec.fpr)).max() <= 0.05

    # Every EM run in this criterion has a monotone objective history.
    histories = [model.diagnostics["objective_history"]]
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(5, 200))
        m = int(rng.integers(1, 6))
        small = ds_fit(
            rng.choice([-1, 1], size=(n, m)), Prior(float(rng.uniform(0.2, 0.8)))
        )
        histories.append(small.diagnostics["objective_history"])
    for history in histories:
        assert (np.diff(np.asarray(history)) >= -1e-10).all()


def test_c07_triplet_recovery_exact_from_moments_close_from_samples():
    moments = np.array([[1.0, 0.48, 0.40], [0.48, 1.0, 0.30], [0.40, 0.30, 1.0]])
    model = fs_fit_from_moments(moments, Prior(0.5))
    assert abs(model.accuracies[0] - 0.8) <= 1e-9
    np.testing.assert_allclose(model.accuracies, [0.8, 0.6, 0.5], atol=1e-9)

    rng = np.random.default_rng(29)
    for _ in range(20):
        m = int(rng.integers(3, 8))
        a = rng.uniform(0.15, 0.95, size=m)
        spec = SyntheticSpec(
            p_plus=0.5, tpr=tuple((1 + a) / 2), fpr=tuple((1 - a) / 2), n=1, seed=0
        )
        recovered = fs_fit_from_moments(population_moments(spec), Prior(0.5))
        np.testing.assert_allclose(recovered.accuracies, a, atol=1e-9)

    a = np.array([0.8, 0.6, 0.5])
    sampled_spec = SyntheticSpec(
        p_plus=0.5, tpr=tuple((1 + a) / 2), fpr=tuple((1 - a) / 2), n=20000, seed=6
    )
    sampled = fs_fit(convert_abstain(generate(sampled_spec)), Prior(0.5))
    np.testing.assert_allclose(sampled.accuracies, a, atol=0.05)


def test_c08_scores_respect_covering_order_on_every_dataset():
    def check(dataset, prior_value):
        table = build_slices(dataset)
        unique = np.array(list(table.slices.keys()))
        model = fit(dataset, Prior(prior_value))
        assert dominance_violations(unique, unique @ model.theta) == 0
        assert dominance_violations(unique, unique.mean(axis=1)) == 0

    for dataset, p in random_dataset_suite():
        check(dataset, p)
    for spec in PRIOR_MATCHABLE_SPECS + INFORMATIVE_SPECS + (UNINFORMATIVE_SPEC,):
        check(generate(spec), spec.p_plus)


def test_c09_models_track_oracle_when_informative_and_chance_when_not():
    def model_rocs(spec):
        dataset = generate(spec)
        gold = dataset.gold_array
        signed = convert_abstain(dataset)
        rocs = {"mv": roc_auc(mv_scores(dataset), gold)}
        ds_model = ds_fit(signed, Prior(0.5))
        rocs["ds"] = roc_auc(ds_posteriors(ds_model, signed), gold)
        fs_model = fs_fit(signed, Prior(spec.p_plus))
        rocs["fs"] = roc_auc(fs_posteriors(fs_model, signed), gold)
        weapo_model = fit(dataset, Prior(spec.p_plus))
        rocs["weapo"] = roc_auc(predict_dataset(weapo_model, dataset)[0], gold)
        noprior = fit(dataset, None, WeapoConfig(use_prior=False))
        rocs["weapo-noprior"] = roc_auc(predict_dataset(noprior, dataset)[0], gold)
        oracle = roc_auc(oracle_posteriors(spec).scores(dataset), gold)
        return rocs, oracle

    for spec in INFORMATIVE_SPECS:
        rocs, oracle = model_rocs(spec)
        for name, value in rocs.items():
            assert oracle >= value - 0.01, (spec.seed, name)
            assert value > 0.55, (spec.seed, name)

    rocs, oracle = model_rocs(UNINFORMATIVE_SPEC)
    assert oracle == 0.5
    for name, value in rocs.items():
        assert abs(value - 0.5) <= 0.05, name


def test_c10_end_model_solves_exactly_and_pipeline_generalizes():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(30, 2))
    t = rng.normal(size=30)
    interpolator = fit_krr(x, t, gamma=0.7, alpha=0.0)
    assert np.abs(predict_krr(interpolator, x) - t).max() <= 1e-6

    det = 1.21 - np.exp(-2.0)
    expected = np.array([-np.exp(-1.0) / det, 1.1 / det])
    two_point = fit_krr(
        np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), gamma=1.0, alpha=0.1
    )
    assert np.abs(two_point.coefficients - expected).max() <= 1e-10

    start = time.perf_counter()
    feature_spec = FeatureSpec(
        mu_pos=(2.0, 2.0),
        mu_neg=(-2.0 / np.sqrt(2.0), -2.0 / np.sqrt(2.0)),
        sigma=1.0,
    )
    train_spec = SyntheticSpec(
        p_plus=0.4, tpr=(0.75, 0.65, 0.55, 0.7), fpr=(0.15, 0.1, 0.05, 0.12),
        n=1500, seed=41, feature_spec=feature_spec,
    )
    test_spec = SyntheticSpec(
        p_plus=0.4, tpr=train_spec.tpr, fpr=train_spec.fpr,
        n=1500, seed=42, feature_spec=feature_spec,
    )
    train, test = generate(train_spec), generate(test_spec)
    label_model = fit(train, Prior(0.4))
    scores, mask = predict_dataset(label_model, train)
    end = fit_krr(train.features_matrix, make_targets(scores, mask))
    end_roc = roc_auc(predict_krr(end, test.features_matrix), test.gold_array)
    assert end_roc > 0.8
    assert time.perf_counter() - start < 20.0


def test_c11_reruns_are_byte_identical_and_jsonl_round_trips(tmp_path):
    synth_args = [
        "synth", "--out", str(tmp_path / "data.jsonl"), "--n", "800",
        "--p-plus", "0.35", "--tpr", "0.9,0.7,0.5", "--fpr", "0.1,0.15,0.2",
        "--seed", "19", "--quiet",
    ]
    assert cli_main(synth_args) == 0
    first_data = (tmp_path / "data.jsonl").read_bytes()
    first_oracle = (tmp_path / "data.jsonl.oracle.json").read_bytes()
    assert cli_main(synth_args) == 0
    assert (tmp_path / "data.jsonl").read_bytes() == first_data
    assert (tmp_path / "data.jsonl.oracle.json").read_bytes() == first_oracle

    fit_args = [
        "fit", str(tmp_path / "data.jsonl"), "--model", "weapo",
        "--prior", "0.35", "--out", str(tmp_path / "model.json"), "--quiet",
    ]
    assert cli_main(fit_args) == 0
    first_model = (tmp_path / "model.json").read_bytes()
    assert cli_main(fit_args) == 0
    assert (tmp_path / "model.json").read_bytes() == first_model

    dataset = load_dataset(str(tmp_path / "data.jsonl"))
    save_dataset(dataset, str(tmp_path / "copy.jsonl"))
    assert (tmp_path / "copy.jsonl").read_bytes() == first_data
    assert load_dataset(str(tmp_path / "copy.jsonl")) == dataset

    with open(tmp_path / "data.jsonl", "r", encoding="utf-8") as fh:
        meta = json.loads(fh.readline())
    assert meta == {"meta": {"num_lfs": 3}}
