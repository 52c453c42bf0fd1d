import numpy as np
import pytest

from prefmix.averaging import MAResult, average, estimate_weights, ma_fit_stats, stack
from prefmix.errors import (
    MissingPersonLikelihoods,
    NonPositiveLikelihood,
    PersonSetMismatch,
)
from prefmix.estimation import Convergence, FitResult


def make_fit(person_liks, n_params=5, ids=None, ll=None):
    liks = np.asarray(person_liks, dtype=float)
    ll = float(np.log(liks).sum()) if ll is None else ll
    ids = ids if ids is not None else [str(i + 1) for i in range(len(liks))]
    return FitResult(
        param_names=[f"p{i}" for i in range(n_params)],
        estimates=np.zeros(n_params), std_errors=np.full(n_params, np.nan),
        ll=ll, aic=2 * n_params - 2 * ll, bic=0.0, n_obs=len(liks),
        n_params=n_params, convergence=Convergence("converged", 0.0, 1),
        fingerprint={}, person_ids=ids, person_liks=liks)


def test_stack_singleton():
    fit = make_fit([0.5, 0.25, 0.125])
    matrix = stack([fit])
    assert matrix.shape == (3, 1)
    np.testing.assert_array_equal(matrix[:, 0], [0.5, 0.25, 0.125])


def test_stack_person_mismatch():
    with pytest.raises(PersonSetMismatch):
        stack([make_fit([0.5, 0.5]), make_fit([0.5, 0.5, 0.5])])
    with pytest.raises(PersonSetMismatch):
        stack([make_fit([0.5, 0.5], ids=["1", "2"]),
               make_fit([0.5, 0.5], ids=["2", "1"])])


def test_stack_missing_person_likelihoods():
    fit = make_fit([0.5, 0.5])
    fit.person_liks = np.empty(0)
    fit.person_ids = []
    with pytest.raises(MissingPersonLikelihoods):
        stack([fit, make_fit([0.5, 0.5])])


def test_identical_columns_give_equal_weights():
    matrix = np.column_stack([[0.4, 0.6, 0.2]] * 2)
    result = estimate_weights(matrix)
    np.testing.assert_allclose(result.pi, [0.5, 0.5], atol=1e-12)
    assert result.theta[0] == 0.0


def test_weights_start_at_equal_shares():
    # theta = 0 maps to pi = 1/K exactly under the softmax normalization
    from prefmix.averaging import _softmax_weights

    for k in (2, 3, 7):
        np.testing.assert_array_equal(_softmax_weights(np.zeros(k - 1)),
                                      np.full(k, 1.0 / k))


def test_toy_matrix_matches_grid_search_oracle():
    # frozen 1e-4-resolution grid-search oracle: pi_1* = 0.7083
    matrix = np.array([[0.9, 0.1], [0.9, 0.1], [0.1, 0.9]])
    result = estimate_weights(matrix)
    assert result.pi[0] == pytest.approx(0.7083, abs=1e-3)
    assert result.ll_ma == pytest.approx(-1.90954250968431, abs=1e-6)


def test_weight_simplex_and_dominance_random_matrices():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n, k = rng.integers(5, 40), rng.integers(2, 5)
        matrix = rng.uniform(0.01, 1.0, size=(n, k))
        result = estimate_weights(matrix)
        assert abs(result.pi.sum() - 1.0) < 1e-12
        assert ((result.pi >= 0) & (result.pi <= 1)).all()
        best_single = np.log(matrix).sum(axis=0).max()
        assert result.ll_ma >= best_single - 1e-6


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    matrix = rng.uniform(0.05, 1.0, size=(30, 4))
    base = estimate_weights(matrix)
    perm = [2, 0, 3, 1]
    permuted = estimate_weights(matrix[:, perm])
    assert permuted.ll_ma == pytest.approx(base.ll_ma, abs=1e-10)
    np.testing.assert_allclose(permuted.pi, base.pi[perm], atol=1e-6)


def test_non_positive_likelihood():
    with pytest.raises(NonPositiveLikelihood):
        estimate_weights(np.array([[0.5, 0.0], [0.5, 0.5]]))
    with pytest.raises(NonPositiveLikelihood):
        estimate_weights(np.array([[0.5], [0.5]]))


def test_ma_fit_stats_examples():
    fits = [make_fit([0.5, 0.5], n_params=5), make_fit([0.5, 0.5], n_params=5)]
    result = MAResult(model_ids=["a", "b"], theta=np.zeros(2),
                      pi=np.full(2, 0.5), ll_ma=-100.0)
    aic = ma_fit_stats(result, fits)
    assert aic == 2 * 11 - 2 * (-100.0) == 222.0
    assert result.aic_conservative == 222.0

    # K = 1 degenerate: conservative count reduces to the constituent's own AIC
    single = make_fit([0.5, 0.25], n_params=4)
    degenerate = MAResult(model_ids=["a"], theta=np.zeros(1), pi=np.ones(1),
                          ll_ma=single.ll)
    assert ma_fit_stats(degenerate, [single]) == pytest.approx(single.aic)

    fits3 = [make_fit([0.5, 0.5], n_params=k) for k in (4, 6, 8)]
    result3 = MAResult(model_ids=list("abc"), theta=np.zeros(3),
                       pi=np.full(3, 1 / 3), ll_ma=-50.0)
    assert ma_fit_stats(result3, fits3) == 2 * 20 - 2 * (-50.0) == 140.0


def test_average_pipeline_and_json_round_trip():
    fits = [make_fit([0.9, 0.9, 0.1]), make_fit([0.1, 0.1, 0.9], n_params=3)]
    result = average(fits, model_ids=["m1", "m2"])
    assert result.aic_conservative is not None
    assert result.ll_ma >= max(f.ll for f in fits) - 1e-6
    assert len(result.person_liks) == 3

    restored = MAResult.from_json(result.to_json())
    np.testing.assert_array_equal(restored.pi, result.pi)
    assert restored.ll_ma == result.ll_ma
    assert restored.model_ids == result.model_ids
