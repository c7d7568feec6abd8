import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_grads_close, finite_difference
from reaugment.dataset import SplitSpec, Window, make_splits, windows
from reaugment.errors import ConfigError, DimensionError
from reaugment.forecaster import (
    ForecasterParams,
    TrainConfig,
    build_model_zoo,
    contiguous_folds,
    evaluate,
    init_forecaster,
    moving_average_matrix,
    mse_loss_and_grads,
    predict,
    train_forecaster,
)
from reaugment.numeric import LayerParams, parameters
from reaugment.synthetic import linear_trend


def _trend_windows(l=8, h=4):
    ds = make_splits(linear_trend(400, 0.01), SplitSpec(), (200, 100, 100))
    return windows(ds, "train", l, h), windows(ds, "val", l, h)


def _toy_windows(rng, n, l, h, c=2):
    return [Window(rng.standard_normal((l, c)), rng.standard_normal((h, c)), np.arange(l + h) / 10.0, i)
            for i in range(n)]


@pytest.mark.parametrize("backbone", ["linear", "dlinear", "mlp"])
def test_backbone_gradients_match_finite_differences(rng, backbone):
    l, h = 6, 2
    params = init_forecaster(backbone, l, h, seed=3, hidden=3, kernel_size=3)
    assert sum(p.size for p in parameters(params.layers)) <= 64
    X, Y = rng.standard_normal((5, l, 2)), rng.standard_normal((5, h, 2))
    _, grads = mse_loss_and_grads(params, X, Y)
    num = finite_difference(lambda: mse_loss_and_grads(params, X, Y)[0], parameters(params.layers))
    assert_grads_close(grads, num)


def test_moving_average_rows_sum_to_one_and_replicate_edges():
    A = moving_average_matrix(6, 3)
    np.testing.assert_allclose(A.sum(axis=1), 1.0)
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    np.testing.assert_allclose(A @ x, [4 / 3, 2, 3, 4, 5, 17 / 3])


def test_pure_trend_is_learned():
    train, val = _trend_windows()
    model = train_forecaster(train, "linear", val, seed=0, config=TrainConfig(epochs=200, patience=20,
                                                                                learning_rate=1e-2))
    assert evaluate(model, val).mse < 1e-4


def test_zero_epochs_returns_initialization():
    train, _ = _trend_windows()
    init = init_forecaster("linear", 8, 4, seed=5)
    out = train_forecaster(train, init=init, config=TrainConfig(epochs=0))
    for a, b in zip(parameters(out.layers), parameters(init.layers)):
        np.testing.assert_array_equal(a, b)


def test_training_is_deterministic():
    train, val = _trend_windows()
    cfg = TrainConfig(epochs=5)
    a = train_forecaster(train, "mlp", val, seed=7, config=cfg)
    b = train_forecaster(train, "mlp", val, seed=7, config=cfg)
    for x, y in zip(parameters(a.layers), parameters(b.layers)):
        assert x.tobytes() == y.tobytes()


def test_last_value_predictor_on_constant_input():
    l, h = 5, 3
    W = np.zeros((l, h))
    W[-1, :] = 1.0
    params = ForecasterParams("linear", [LayerParams(W, np.zeros(h))], l, h)
    np.testing.assert_allclose(predict(params, np.full((l, 2), 4.2)), 4.2)


def test_zero_weights_output_bias():
    params = ForecasterParams("linear", [LayerParams(np.zeros((4, 2)), np.array([1.0, -1.0]))], 4, 2)
    np.testing.assert_allclose(predict(params, np.ones((4, 3))), [[1, 1, 1], [-1, -1, -1]])


def test_predict_rejects_wrong_lookback():
    with pytest.raises(DimensionError):
        predict(init_forecaster("linear", 4, 2, 0), np.zeros((5, 1)))


def test_evaluate_toy_cases():
    params = ForecasterParams("linear", [LayerParams(np.zeros((2, 2)), np.zeros(2))], 2, 2)
    perfect = [Window(np.ones((2, 1)), np.zeros((2, 1)), np.arange(4.0), 0)]
    assert evaluate(params, perfect).mae == 0 and evaluate(params, perfect).mse == 0
    off = [Window(np.ones((2, 1)), -np.ones((2, 1)), np.arange(4.0), 0)]
    rep = evaluate(params, off)
    assert (rep.mae, rep.mse) == (1.0, 1.0)
    # two windows with horizon values 1, -2 and 3, 0 against zero predictions
    two = [Window(np.zeros((2, 1)), np.array([[1.0], [-2.0]]), np.arange(4.0), 0),
           Window(np.zeros((2, 1)), np.array([[3.0], [0.0]]), np.arange(4.0), 1)]
    rep = evaluate(params, two)
    assert rep.mae == pytest.approx((1 + 2 + 3 + 0) / 4)
    assert rep.mse == pytest.approx((1 + 4 + 9 + 0) / 4)


def test_evaluate_in_raw_units():
    params = ForecasterParams("linear", [LayerParams(np.zeros((2, 1)), np.zeros(1))], 2, 1)
    w = [Window(np.zeros((2, 1)), np.ones((1, 1)), np.arange(3.0), 0)]
    assert evaluate(params, w, scale=(np.array([10.0]), np.array([3.0]))).mae == pytest.approx(3.0)


@settings(max_examples=20, deadline=None)
@given(st.permutations(range(6)))
def test_evaluate_invariant_to_window_order(perm):
    rng = np.random.default_rng(0)
    ws = _toy_windows(rng, 6, 4, 2)
    params = init_forecaster("linear", 4, 2, 1)
    a, b = evaluate(params, ws), evaluate(params, [ws[i] for i in perm])
    assert a.mae == pytest.approx(b.mae, rel=1e-12) and a.mse == pytest.approx(b.mse, rel=1e-12)


def test_zoo_folds_k2_ten_windows(rng):
    ws = _toy_windows(rng, 10, 4, 2)
    zoo = build_model_zoo(ws, K=2, seed=0, config=TrainConfig(epochs=2))
    assert zoo.K == 2
    for k in range(2):
        assert len(zoo.training_indices(k)) == 5


def test_each_window_held_out_exactly_once():
    fold = contiguous_folds(23, 4)
    assert sorted(set(fold)) == [0, 1, 2, 3]
    assert np.all(np.diff(fold) >= 0)
    counts = np.bincount(fold)
    assert counts.max() - counts.min() <= 1 and counts.sum() == 23


def test_zoo_is_deterministic(rng):
    ws = _toy_windows(rng, 12, 4, 2)
    a = build_model_zoo(ws, K=3, seed=4, config=TrainConfig(epochs=3))
    b = build_model_zoo(ws, K=3, seed=4, config=TrainConfig(epochs=3))
    for ma, mb in zip(a.members, b.members):
        for x, y in zip(parameters(ma.layers), parameters(mb.layers)):
            assert x.tobytes() == y.tobytes()


def test_zoo_rejects_bad_k(rng):
    ws = _toy_windows(rng, 3, 4, 2)
    with pytest.raises(ConfigError):
        build_model_zoo(ws, K=1)
    with pytest.raises(ConfigError):
        build_model_zoo(ws, K=4)
