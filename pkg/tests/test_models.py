import math

import numpy as np
import pytest

from fedplus import models
from fedplus.errors import DataError, DimensionError
from fedplus.models import Batch, LogisticShape

from .oracles import central_fd, predict_loop, rel_err, softmax_ce_loop


def random_instance(rng, d_in=None, d_out=None, n=None):
    d_in = d_in or int(rng.integers(1, 6))
    d_out = d_out or int(rng.integers(2, 5))
    n = n or int(rng.integers(1, 9))
    shape = LogisticShape(d_in, d_out)
    params = rng.normal(size=shape.size)
    batch = Batch(rng.normal(size=(n, d_in)), rng.integers(0, d_out, size=n))
    return shape, params, batch


def test_packing_round_trip(rng):
    shape = LogisticShape(3, 4)
    W, b = rng.normal(size=(4, 3)), rng.normal(size=4)
    p = shape.pack(W, b)
    assert p.shape == (shape.size,) == (16,)
    W2, b2 = shape.unpack(p)
    np.testing.assert_array_equal(W2, W)
    np.testing.assert_array_equal(b2, b)
    # row-major W first: entry (class 1, feature 0) sits at index 3
    assert p[3] == W[1, 0]


def test_zero_params_loss_is_log_classes(rng):
    shape = LogisticShape(60, 10)
    batch = Batch(rng.normal(size=(7, 60)), rng.integers(0, 10, size=7))
    assert math.isclose(models.loss(shape, np.zeros(shape.size), batch), math.log(10), abs_tol=1e-12)


def test_loss_vanishes_with_logit_gap():
    shape = LogisticShape(1, 3)
    batch = Batch(np.array([[1.0]]), np.array([2]))
    losses = []
    for gap in (5.0, 10.0):
        losses.append(models.loss(shape, shape.pack([[0.0], [0.0], [gap]], [0, 0, 0]), batch))
    assert losses[0] > losses[1] > 0
    assert losses[1] < 1e-4


def test_loss_matches_loop_oracle(rng):
    for _ in range(20):
        shape, params, batch = random_instance(rng)
        W, b = shape.unpack(params)
        ref = softmax_ce_loop(W.tolist(), b.tolist(), batch.features.tolist(), batch.labels.tolist())
        assert math.isclose(models.loss(shape, params, batch), ref, rel_tol=1e-12, abs_tol=1e-12)


def test_loss_stable_for_huge_logits():
    shape = LogisticShape(1, 2)
    batch = Batch(np.array([[1.0]]), np.array([0]))
    val = models.loss(shape, shape.pack([[1e4], [-1e4]], [0, 0]), batch)
    assert val == 0.0
    val = models.loss(shape, shape.pack([[-1e4], [1e4]], [0, 0]), batch)
    assert math.isclose(val, 2e4)


def test_loss_shift_invariance(rng):
    for _ in range(20):
        shape, params, batch = random_instance(rng)
        W, b = shape.unpack(params)
        shifted = shape.pack(W, b + rng.normal())
        assert abs(models.loss(shape, shifted, batch) - models.loss(shape, params, batch)) < 1e-12


def test_grad_matches_finite_differences(rng):
    for _ in range(20):
        shape, params, batch = random_instance(rng)
        g = models.grad(shape, params, batch)
        fd = central_fd(lambda p: models.loss(shape, p, batch), params, h=1e-5)
        assert rel_err(g, fd) < 1e-4


def test_grad_duplicate_samples_match_single(rng):
    shape, params, batch = random_instance(rng, n=1)
    doubled = Batch(np.repeat(batch.features, 3, axis=0), np.repeat(batch.labels, 3))
    np.testing.assert_allclose(models.grad(shape, params, doubled), models.grad(shape, params, batch), rtol=1e-12, atol=1e-15)


def test_grad_vanishes_after_long_gradient_descent():
    # Two points, each labelled 3:1 between the classes. Without a regularizer
    # a separable set has its optimum at infinity; the label mix keeps it
    # finite, with predicted probabilities 0.75 / 0.25.
    shape = LogisticShape(1, 2)
    X = np.array([[1.0]] * 4 + [[-1.0]] * 4)
    y = np.array([0, 0, 0, 1, 1, 1, 1, 0])
    batch = Batch(X, y)
    p = np.zeros(shape.size)
    for _ in range(20000):
        p -= 1.0 * models.grad(shape, p, batch)
    assert np.linalg.norm(models.grad(shape, p, batch)) < 1e-6
    W, b = shape.unpack(p)
    z = W[:, 0] - W[:, 0].mean()
    assert math.isclose(1 / (1 + math.exp(-(z[0] - z[1]))), 0.75, rel_tol=1e-6)


def test_accuracy_examples(rng):
    shape = LogisticShape(2, 3)
    batch = Batch(np.array([[1.0, -2.0]]), np.array([1]))
    assert models.accuracy(shape, shape.pack(np.zeros((3, 2)), [0, 5, 0]), batch) == 1.0
    labels = rng.integers(0, 3, size=50)
    batch = Batch(rng.normal(size=(50, 2)), labels)
    assert models.accuracy(shape, np.zeros(shape.size), batch) == np.mean(labels == 0)


def test_accuracy_matches_oracle(rng):
    for _ in range(20):
        shape, params, batch = random_instance(rng, n=30)
        W, b = shape.unpack(params)
        pred = predict_loop(W.tolist(), b.tolist(), batch.features.tolist())
        acc = models.accuracy(shape, params, batch)
        assert acc == np.mean(np.array(pred) == batch.labels)
        assert 0.0 <= acc <= 1.0


def test_quadratic():
    assert models.quadratic_loss([1, 2], [1, 2]) == 0
    np.testing.assert_array_equal(models.quadratic_grad([1, 2], [1, 2]), [0, 0])
    assert models.quadratic_loss([0, 4], [3, 0]) == 12.5
    np.testing.assert_array_equal(models.quadratic_grad([0, 4], [3, 0]), [3, -4])


def test_quadratic_grad_matches_finite_differences(rng):
    for _ in range(20):
        c = rng.normal(size=5)
        x = rng.normal(size=5)
        fd = central_fd(lambda v: models.quadratic_loss(c, v), x)
        assert rel_err(models.quadratic_grad(c, x), fd) < 1e-4


def test_errors(rng):
    shape = LogisticShape(2, 3)
    with pytest.raises(DataError):
        models.loss(shape, np.zeros(shape.size), Batch(np.zeros((1, 2)), np.array([3])))
    with pytest.raises(DataError):
        Batch(np.zeros((2, 2)), np.array([0]))
    with pytest.raises(DataError):
        Batch(np.zeros((0, 2)), np.array([], dtype=int))
    with pytest.raises(DimensionError):
        models.loss(shape, np.zeros(5), Batch(np.zeros((1, 2)), np.array([0])))
    with pytest.raises(DimensionError):
        models.quadratic_loss([0.0], [1.0, 2.0])
