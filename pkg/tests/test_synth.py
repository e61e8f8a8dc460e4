"""Synthetic generator, closed-form oracle, and population moments."""

import numpy as np
import pytest

from weapo import (
    FeatureSpec,
    Prior,
    SyntheticSpec,
    convert_abstain,
    ds_fit,
    ds_posteriors,
    fit,
    fs_fit,
    fs_posteriors,
    generate,
    mv_scores,
    oracle_posteriors,
    population_moments,
    predict_dataset,
    roc_auc,
    save_dataset,
)


def spec_3lf(**overrides):
    base = dict(p_plus=0.5, tpr=(0.9, 0.8, 0.7), fpr=(0.1, 0.2, 0.3), n=200, seed=0)
    base.update(overrides)
    return SyntheticSpec(**base)


class TestGenerate:
    def test_bitwise_deterministic(self):
        spec = spec_3lf(
            n=100,
            feature_spec=FeatureSpec(mu_pos=(1.0,), mu_neg=(-1.0,), sigma=1.0),
        )
        a = generate(spec)
        b = generate(spec)
        assert a == b
        assert [r.features for r in a.records] == [r.features for r in b.records]

    def test_different_seeds_differ(self):
        assert generate(spec_3lf(seed=0)) != generate(spec_3lf(seed=1))

    def test_record_shape(self):
        spec = spec_3lf(n=25)
        ds = generate(spec)
        assert len(ds.records) == 25
        assert ds.num_lfs == 3
        assert ds.records[0].id == "r00"
        assert all(r.gold in (-1, 1) for r in ds.records)
        assert all(r.features is None for r in ds.records)

    def test_feature_dimension(self):
        spec = spec_3lf(
            n=10,
            feature_spec=FeatureSpec(mu_pos=(1.0, 0.0, 2.0), mu_neg=(0.0, 0.0, 0.0), sigma=0.5),
        )
        ds = generate(spec)
        assert ds.features_matrix.shape == (10, 3)

    def test_deterministic_votes_at_extreme_rates(self):
        """tpr = 1 and fpr = 0 make every vote equal the gold label bit."""
        spec = SyntheticSpec(p_plus=0.5, tpr=(1.0, 1.0), fpr=(0.0, 0.0), n=300, seed=2)
        ds = generate(spec)
        for r in ds.records:
            expected = (1, 1) if r.gold == 1 else (0, 0)
            assert r.votes == expected

    def test_class_frequency_within_three_sigma(self):
        p, n = 0.3, 5000
        bound = 3.0 * np.sqrt(p * (1 - p) / n)
        for seed in range(10):
            spec = SyntheticSpec(
                p_plus=p, tpr=(0.8, 0.7), fpr=(0.2, 0.1), n=n, seed=seed
            )
            frac = np.mean([r.gold == 1 for r in generate(spec).records])
            assert abs(frac - p) <= bound

    def test_empty_dataset_allowed(self):
        ds = generate(spec_3lf(n=0))
        assert len(ds.records) == 0

    def test_saved_file_is_stable(self, tmp_path):
        spec = spec_3lf(n=50)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_dataset(generate(spec), p1)
        save_dataset(generate(spec), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestOracleTable:
    def test_single_function_by_hand(self):
        """p = 1/2, tpr = 0.9, fpr = 0.1: a fire gives 0.9 / 1.0."""
        oracle = oracle_posteriors(
            SyntheticSpec(p_plus=0.5, tpr=(0.9,), fpr=(0.1,), n=1, seed=0)
        )
        assert oracle.posterior((1,)) == pytest.approx(0.9, abs=1e-12)
        assert oracle.posterior((0,)) == pytest.approx(0.1, abs=1e-12)

    def test_certain_fire_is_conclusive(self):
        oracle = oracle_posteriors(
            SyntheticSpec(p_plus=0.3, tpr=(0.6, 0.5), fpr=(0.0, 0.5), n=1, seed=0)
        )
        assert oracle.posterior((1, 0)) == 1.0
        assert oracle.posterior((1, 1)) == 1.0

    def test_matched_rates_return_prior(self):
        oracle = oracle_posteriors(
            SyntheticSpec(p_plus=0.35, tpr=(0.4, 0.7), fpr=(0.4, 0.7), n=1, seed=0)
        )
        for votes in ((0, 0), (0, 1), (1, 0), (1, 1)):
            assert oracle.posterior(votes) == pytest.approx(0.35, abs=1e-12)

    def test_zero_probability_vector_rejected(self):
        oracle = oracle_posteriors(
            SyntheticSpec(p_plus=0.5, tpr=(1.0,), fpr=(1.0,), n=1, seed=0)
        )
        with pytest.raises(ValueError, match="zero probability"):
            oracle.posterior((0,))

    def test_length_mismatch_rejected(self):
        oracle = oracle_posteriors(spec_3lf())
        with pytest.raises(ValueError, match="length"):
            oracle.posterior((1, 0))

    def test_full_table_size_and_consistency(self):
        spec = spec_3lf()
        oracle = oracle_posteriors(spec)
        table = oracle.as_dict()
        assert len(table) == 8
        law_mean = sum(
            post
            * np.prod(
                [
                    spec.p_plus * (t if v else 1 - t)
                    + (1 - spec.p_plus) * (f if v else 1 - f)
                    for v, t, f in zip(votes, spec.tpr, spec.fpr)
                ]
            )
            for votes, post in table.items()
        )
        assert law_mean == pytest.approx(spec.p_plus, abs=1e-12)

    def test_scores_align_with_records(self):
        spec = spec_3lf(n=40)
        ds = generate(spec)
        oracle = oracle_posteriors(spec)
        scores = oracle.scores(ds)
        assert scores.shape == (40,)
        assert scores[0] == oracle.posterior(ds.records[0].votes)

    def test_monotone_when_functions_are_informative(self):
        oracle = oracle_posteriors(spec_3lf())
        assert oracle.posterior((1, 1, 1)) > oracle.posterior((1, 1, 0))
        assert oracle.posterior((1, 0, 0)) > oracle.posterior((0, 0, 0))


class TestPopulationMoments:
    def test_symmetric_channels_give_product_form(self):
        """tpr = (1+a)/2, fpr = (1-a)/2 at even prior: M_jk = a_j * a_k."""
        a = np.array([0.8, 0.6, 0.5])
        spec = SyntheticSpec(
            p_plus=0.5, tpr=tuple((1 + a) / 2), fpr=tuple((1 - a) / 2), n=1, seed=0
        )
        moments = population_moments(spec)
        expected = np.outer(a, a)
        np.fill_diagonal(expected, 1.0)
        np.testing.assert_allclose(moments, expected, atol=1e-12)

    def test_uninformative_functions_still_correlate(self):
        """tpr = fpr makes votes independent of the label but not of each
        other once the signed means are nonzero."""
        rates = (0.4, 0.3, 0.35)
        spec = SyntheticSpec(p_plus=0.5, tpr=rates, fpr=rates, n=1, seed=0)
        moments = population_moments(spec)
        m = 2.0 * np.asarray(rates) - 1.0
        np.testing.assert_allclose(moments[0, 1], m[0] * m[1], atol=1e-12)
        np.testing.assert_allclose(moments[0, 2], m[0] * m[2], atol=1e-12)

    def test_perfect_functions_agree_fully(self):
        spec = SyntheticSpec(p_plus=0.35, tpr=(1.0, 1.0), fpr=(0.0, 0.0), n=1, seed=0)
        np.testing.assert_allclose(population_moments(spec), np.ones((2, 2)))

    def test_diagonal_is_one(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            m = int(rng.integers(1, 6))
            spec = SyntheticSpec(
                p_plus=float(rng.uniform(0.1, 0.9)),
                tpr=tuple(rng.uniform(0, 1, m)),
                fpr=tuple(rng.uniform(0, 1, m)),
                n=1,
                seed=0,
            )
            np.testing.assert_array_equal(np.diag(population_moments(spec)), 1.0)

    def test_empirical_moments_converge(self):
        spec = spec_3lf(n=20000, seed=6)
        signed = convert_abstain(generate(spec)).astype(np.float64)
        empirical = (signed.T @ signed) / signed.shape[0]
        np.testing.assert_allclose(empirical, population_moments(spec), atol=0.05)


class TestSpecPersistence:
    def test_round_trip_without_features(self, tmp_path):
        spec = spec_3lf(n=17, seed=9)
        path = tmp_path / "spec.json"
        spec.save(path)
        assert SyntheticSpec.load(path) == spec

    def test_round_trip_with_features(self, tmp_path):
        spec = spec_3lf(
            feature_spec=FeatureSpec(mu_pos=(1.0, 2.0), mu_neg=(-1.0, 0.0), sigma=0.7)
        )
        path = tmp_path / "spec.json"
        spec.save(path)
        assert SyntheticSpec.load(path) == spec

    def test_validation(self):
        with pytest.raises(ValueError, match="p_plus"):
            SyntheticSpec(p_plus=0.0, tpr=(0.5,), fpr=(0.5,), n=1)
        with pytest.raises(ValueError, match="equally long"):
            SyntheticSpec(p_plus=0.5, tpr=(0.5, 0.5), fpr=(0.5,), n=1)
        with pytest.raises(ValueError, match=r"tpr entries"):
            SyntheticSpec(p_plus=0.5, tpr=(1.5,), fpr=(0.5,), n=1)
        with pytest.raises(ValueError, match="n must"):
            SyntheticSpec(p_plus=0.5, tpr=(0.5,), fpr=(0.5,), n=-1)
        with pytest.raises(ValueError, match="dimension"):
            FeatureSpec(mu_pos=(1.0,), mu_neg=(1.0, 2.0), sigma=1.0)
        with pytest.raises(ValueError, match="sigma"):
            FeatureSpec(mu_pos=(1.0,), mu_neg=(0.0,), sigma=0.0)


class TestModelsOnSyntheticData:
    def test_uninformative_votes_score_near_chance(self):
        """When every function fires at the same rate for both classes no
        label model can beat chance."""
        rates = (0.4, 0.3, 0.35)
        spec = SyntheticSpec(p_plus=0.5, tpr=rates, fpr=rates, n=10000, seed=8)
        ds = generate(spec)
        gold = ds.gold_array
        signed = convert_abstain(ds)

        aucs = [roc_auc(mv_scores(ds), gold)]
        ds_model = ds_fit(signed, Prior(0.5))
        aucs.append(roc_auc(ds_posteriors(ds_model, signed), gold))
        fs_model = fs_fit(signed, Prior(0.5))
        aucs.append(roc_auc(fs_posteriors(fs_model, signed), gold))
        weapo = fit(ds, Prior(0.5))
        aucs.append(roc_auc(predict_dataset(weapo, ds)[0], gold))
        oracle = oracle_posteriors(spec)
        assert roc_auc(oracle.scores(ds), gold) == 0.5
        for auc in aucs:
            assert abs(auc - 0.5) <= 0.05

    def test_feature_classifier_beats_vote_models_when_votes_are_flat(self):
        """Features stay informative in the same regime."""
        rates = (0.4, 0.3, 0.35)
        spec = SyntheticSpec(
            p_plus=0.5,
            tpr=rates,
            fpr=rates,
            n=2000,
            seed=31,
            feature_spec=FeatureSpec(
                mu_pos=(2.0, 2.0),
                mu_neg=(-2.0 / np.sqrt(2.0), -2.0 / np.sqrt(2.0)),
                sigma=1.0,
            ),
        )
        ds = generate(spec)
        centroid_gap = ds.features_matrix @ np.ones(2)
        assert roc_auc(centroid_gap, ds.gold_array) > 0.9
