import numpy as np
import pandas as pd
import pytest

from ddcor.errors import InvalidParameterError
from ddcor.models import Method, Model, MultiResponseDraw, SimulationSpec, TestConfig, selected_size
from ddcor.screening import (
    exclusive_discoveries,
    minimal_model_size,
    rank_concordance,
    rank_features,
    replication_seeds,
    response_scorer,
    screen_dataset,
    screening_power_table,
    screening_report,
    standardize,
)
from ddcor.simulation import generate_example2

from tests.config import SEED


def _multi_response_spec(**overrides):
    params = dict(model=Model.MULTI_RESPONSE, rho=0.3, n=60, p=10, reps=4, seed=SEED)
    params.update(overrides)
    return SimulationSpec(**params)


class TestStandardize:
    def test_zero_mean_unit_sd(self, rng):
        z = standardize(rng.normal(3.0, 2.0, size=(50, 4)))
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0, ddof=1), 1.0, rtol=1e-12)

    def test_constant_column_is_centred(self, rng):
        matrix = np.column_stack([rng.normal(size=10), np.full(10, 4.0)])
        np.testing.assert_array_equal(standardize(matrix)[:, 1], np.zeros(10))


class TestMinimalModelSize:
    def test_single_active_first(self):
        assert minimal_model_size([1, 0, 2], {1}) == 1

    def test_positional_definition(self):
        assert minimal_model_size([3, 1, 5, 2, 0, 4], {1, 2}) == 4

    def test_accepts_scored_ranking(self):
        assert minimal_model_size([(2, 0.9), (0, 0.5), (1, 0.1)], {0}) == 2

    def test_monotone_in_active_set(self):
        ranking = [4, 2, 7, 0, 1, 3, 5, 6]
        assert minimal_model_size(ranking, {2}) <= minimal_model_size(ranking, {2, 3}) <= minimal_model_size(ranking, {2, 3, 6})

    def test_missing_index(self):
        with pytest.raises(InvalidParameterError):
            minimal_model_size([0, 1, 2], {5})

    def test_empty_active_set(self):
        with pytest.raises(InvalidParameterError):
            minimal_model_size([0, 1, 2], set())


def test_selected_size():
    assert selected_size(200) == 37
    assert selected_size(30) == 8


class TestRankFeatures:
    def test_sorted_descending(self):
        draw = generate_example2(0.3, 80, 15, SEED)
        ranking = rank_features(draw, Method.DDC)
        values = [value for _, value in ranking]
        assert values == sorted(values, reverse=True)
        assert sorted(index for index, _ in ranking) == list(range(15))

    def test_ties_broken_by_index(self, rng):
        x = rng.normal(size=(40, 5))
        x[:, 3] = x[:, 1]
        draw = MultiResponseDraw(x=x, y=rng.normal(size=(40, 3)))
        ranking = [index for index, _ in rank_features(draw, Method.DC)]
        assert ranking.index(1) == ranking.index(3) - 1

    def test_constant_predictor_scores_zero(self, rng):
        x = rng.normal(size=(30, 4))
        x[:, 2] = 1.0
        draw = MultiResponseDraw(x=x, y=rng.normal(size=(30, 3)))
        for method in (Method.DDC, Method.DC, Method.HSIC, Method.PCOR):
            assert dict(rank_features(draw, method))[2] == 0.0

    def test_noise_free_oscillatory_predictor_beats_noise(self):
        draw = generate_example2(0.0, 500, 20, SEED, noise=0.0)
        ranking = [index for index, _ in rank_features(draw, Method.DDC)]
        assert ranking.index(2) < min(ranking.index(j) for j in range(4, 20))

    def test_invariant_to_positive_rescaling(self):
        draw = generate_example2(0.3, 100, 25, SEED)
        scaled = MultiResponseDraw(x=4.0 * draw.x, y=2.0 * draw.y)
        assert rank_features(draw, Method.DDC, tie_seed=9) == rank_features(scaled, Method.DDC, tie_seed=9)

    def test_chatterjee_needs_univariate_response(self, rng):
        with pytest.raises(InvalidParameterError):
            response_scorer(Method.CHATTERJEE, rng.normal(size=(20, 3)))


class TestScreeningReport:
    def test_fields(self):
        report = screening_report(_multi_response_spec(), Method.DDC)
        row = report.to_dict()
        for key in ("P1", "P2", "P3", "P4", "MMS", "SD"):
            assert key in row
        assert report.selected_size == selected_size(60)
        assert report.reps == 4
        assert len(report.mms_values) == 4

    def test_proportions_match_rankings(self):
        spec = _multi_response_spec()
        report = screening_report(spec, Method.DC)
        top = selected_size(spec.n)
        hits = np.zeros(4)
        for r in range(spec.reps):
            data_seed, tie_seed = replication_seeds(spec, r)
            draw = generate_example2(spec.rho, spec.n, spec.p, data_seed)
            ranked = [index for index, _ in rank_features(draw, Method.DC, tie_seed=tie_seed)]
            hits += [ranked.index(j) < top for j in range(4)]
        assert report.per_predictor_proportion == (hits / spec.reps).tolist()

    def test_requires_multi_response(self):
        with pytest.raises(InvalidParameterError):
            screening_report(SimulationSpec(model=Model.LINEAR, n=20, reps=2), Method.DDC)

    def test_deterministic(self):
        spec = _multi_response_spec()
        assert screening_report(spec, Method.HSIC) == screening_report(spec, Method.HSIC)

    @pytest.mark.slow
    def test_ddc_saturation_at_full_size(self):
        spec = _multi_response_spec(n=200, p=500, reps=100)
        report = screening_report(spec, Method.DDC, n_jobs=-1)
        p1, p2, p3, p4 = report.per_predictor_proportion
        assert p3 == 1.0 and p4 == 1.0
        assert p1 >= 0.8 and p2 >= 0.8
        assert report.mms_median <= 20


class TestScreeningPowerTable:
    def test_layout(self):
        spec = _multi_response_spec(n=40, p=6, reps=3)
        table = screening_power_table(spec, [Method.DDC])
        assert list(table.columns) == ["method", "rho", "predictor", "power", "reps", "level"]
        assert table["predictor"].tolist() == ["X1", "X2", "X3", "X4"]
        assert table["power"].between(0.0, 1.0).all()

    def test_inactive_predictor(self):
        spec = _multi_response_spec(rho=0.0, n=40, p=12, reps=3, permutations=19)
        table = screening_power_table(spec, [Method.DC], predictors=[9])
        assert table["predictor"].tolist() == ["X10"]

    @pytest.mark.slow
    def test_ddc_power_at_full_size(self):
        spec = _multi_response_spec(n=200, p=500, reps=100)
        table = screening_power_table(spec, [Method.DDC], n_jobs=-1)
        power = dict(zip(table["predictor"], table["power"]))
        assert power["X3"] == 1.0 and power["X4"] == 1.0


class TestScreenDataset:
    def test_active_predictor_ranked_first(self, rng):
        predictors = rng.uniform(-1.0, 1.0, size=(100, 51))
        response = predictors[:, 17] ** 2
        names = [f"g{j}" for j in range(51)]
        table = screen_dataset(response, predictors, names, Method.DDC)
        assert table["predictor"].iloc[0] == "g17"
        assert table["rank"].tolist() == list(range(1, 52))
        assert (table["p_source"] == "asymptotic").all()

    def test_null_flag_rate(self, rng):
        predictors = rng.normal(size=(100, 100))
        table = screen_dataset(rng.normal(size=100), predictors, [str(j) for j in range(100)], Method.DDC,
                               TestConfig(level=0.05, seed=SEED))
        assert table["significant"].sum() <= 11

    def test_constant_predictor(self, rng):
        predictors = rng.normal(size=(30, 3))
        predictors[:, 1] = 2.0
        table = screen_dataset(rng.normal(size=30), predictors, ["a", "b", "c"], Method.DDC)
        row = table.set_index("predictor").loc["b"]
        assert row["value"] == 0.0
        assert row["p_value"] == 1.0
        assert not row["significant"]

    def test_permutation_methods(self, rng):
        predictors = rng.normal(size=(30, 4))
        table = screen_dataset(rng.normal(size=30), predictors, list("abcd"), Method.HSIC,
                               TestConfig(permutations=19, seed=SEED))
        assert (table["p_source"] == "permutation").all()
        assert (table["p_value"] >= 1.0 / 20.0).all()

    def test_name_count_must_match(self, rng):
        with pytest.raises(InvalidParameterError):
            screen_dataset(rng.normal(size=10), rng.normal(size=(10, 3)), ["a"], Method.DDC)


class TestComparisons:
    @pytest.fixture
    def rankings(self):
        def table(order):
            return pd.DataFrame({"predictor": order, "rank": range(1, len(order) + 1)})

        return {
            Method.DDC: table(["a", "b", "c", "d"]),
            Method.DC: table(["b", "a", "d", "c"]),
        }

    def test_rank_concordance(self, rankings):
        table = rank_concordance(rankings, Method.DDC, top=2)
        assert list(table.columns) == ["method", "a", "b"]
        assert table.set_index("method").loc["DC"].tolist() == [2, 1]

    def test_exclusive_discoveries(self):
        flags = {Method.DDC: {"a", "b", "c"}, Method.DC: {"a"}, Method.HSIC: {"b"}}
        assert exclusive_discoveries(flags, Method.DDC, [Method.DC, Method.HSIC]) == {"c"}
        assert exclusive_discoveries(flags, Method.DC, flags) == set()
