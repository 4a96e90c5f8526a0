import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fedplus.aggregators import (
    CentralitySpec,
    aggregate,
    coordinate_median,
    geometric_median_objective,
    weiszfeld,
)
from fedplus.errors import AggregationError, ConfigError, DimensionError

from .oracles import geomedian_grid

KINDS = ("mean", "geometric-median", "coordinate-median")


def test_mean_example():
    np.testing.assert_allclose(aggregate(CentralitySpec("mean"), [[1, 2], [3, 4]]), [2, 3])


def test_weighted_mean():
    out = aggregate(CentralitySpec("mean", weights=(1.0, 3.0)), [[0.0], [4.0]])
    np.testing.assert_allclose(out, [3.0])


def test_coordinate_median_example():
    out = aggregate(CentralitySpec("coordinate-median"), [[1, 10], [2, 20], [9, 0]])
    np.testing.assert_array_equal(out, [2, 10])


def test_coordinate_median_even_count_takes_lower_middle():
    out = aggregate(CentralitySpec("coordinate-median"), [[1.0], [4.0], [2.0], [3.0]])
    np.testing.assert_array_equal(out, [2.0])


def test_weighted_coordinate_median():
    X = np.array([[0.0], [1.0], [2.0]])
    np.testing.assert_array_equal(coordinate_median(X, (1.0, 1.0, 5.0)), [2.0])
    np.testing.assert_array_equal(coordinate_median(X, (1.0, 1.0, 1.0)), [1.0])
    # equal weight halves: lower middle
    np.testing.assert_array_equal(coordinate_median(X[:2], (2.0, 2.0)), [0.0])


def test_geometric_median_1d_majority():
    out = aggregate(CentralitySpec("geometric-median"), [[0.0], [0.0], [10.0]])
    assert abs(out[0]) < 1e-6


def test_geometric_median_triangle_matches_grid():
    pts = [[0, 0], [4, 0], [0, 3]]
    ref = geomedian_grid(pts, lo=(-1, -1), hi=(5, 4))
    out = aggregate(CentralitySpec("geometric-median"), pts)
    assert np.linalg.norm(out - ref) < 1e-3


def test_geometric_median_random_instances_match_grid():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        n = int(rng.integers(3, 8))
        pts = rng.uniform(-3, 3, size=(n, 2))
        ref = geomedian_grid(pts)
        out = aggregate(CentralitySpec("geometric-median"), pts)
        assert np.linalg.norm(out - ref) < 1e-3


def test_objective_examples():
    assert geometric_median_objective([1.0, 2.0], [[1.0, 2.0]]) == 0
    assert geometric_median_objective([0, 0], [[3, 4]]) == 5
    assert geometric_median_objective([0, 0], [[3, 4], [0, 1]], weights=(2.0, 1.0)) == 11


def test_weiszfeld_never_worse_than_mean_start():
    rng = np.random.default_rng(7)
    for _ in range(50):
        X = rng.normal(size=(int(rng.integers(2, 9)), 4)) * rng.uniform(0.1, 10)
        z = weiszfeld(X)
        assert geometric_median_objective(z, X) <= geometric_median_objective(X.mean(axis=0), X) + 1e-12


def test_weiszfeld_objective_non_increasing():
    rng = np.random.default_rng(11)
    for _ in range(50):
        X = rng.standard_cauchy(size=(int(rng.integers(2, 10)), 3))
        trace = []
        weiszfeld(X, trace=trace)
        assert len(trace) >= 1
        for a, b in zip(trace, trace[1:]):
            assert b <= a + 1e-12 * max(1.0, a)


def test_errors():
    with pytest.raises(AggregationError):
        aggregate(CentralitySpec("mean"), [])
    with pytest.raises(DimensionError):
        aggregate(CentralitySpec("mean"), [[1.0, 2.0], [1.0]])
    with pytest.raises(ConfigError):
        aggregate(CentralitySpec("trimmed-mean"), [[1.0]])
    with pytest.raises(ConfigError):
        aggregate(CentralitySpec("mean", weights=(1.0, -1.0)), [[1.0], [2.0]])
    with pytest.raises(DimensionError):
        aggregate(CentralitySpec("mean", weights=(1.0, 1.0, 1.0)), [[1.0], [2.0]])


models_strategy = st.integers(1, 7).flatmap(
    lambda n: arrays(np.float64, (n, 3), elements=st.floats(-10, 10, allow_nan=False))
)
shift_strategy = arrays(np.float64, 3, elements=st.floats(-10, 10))

# Median kinds with hypothesis; the geometric median is only unique for points
# in general position, so it gets continuous random instances instead.


@pytest.mark.parametrize("kind", ["mean", "coordinate-median"])
@settings(max_examples=60, deadline=None)
@given(X=models_strategy, shift=shift_strategy)
def test_translation_equivariance(kind, X, shift):
    spec = CentralitySpec(kind)
    np.testing.assert_allclose(aggregate(spec, X + shift), aggregate(spec, X) + shift, atol=1e-9)


@pytest.mark.parametrize("kind", ["mean", "coordinate-median"])
@settings(max_examples=60, deadline=None)
@given(X=models_strategy, seed=st.integers(0, 2**32 - 1))
def test_permutation_invariance(kind, X, seed):
    perm = np.random.default_rng(seed).permutation(len(X))
    spec = CentralitySpec(kind)
    np.testing.assert_allclose(aggregate(spec, X[perm]), aggregate(spec, X), atol=1e-9)


def test_geometric_median_translation_and_permutation():
    rng = np.random.default_rng(99)
    spec = CentralitySpec("geometric-median")
    for _ in range(200):
        X = rng.normal(size=(int(rng.integers(1, 8)), 3)) * rng.uniform(0.1, 5)
        shift = rng.normal(size=3) * 5
        base = aggregate(spec, X)
        np.testing.assert_allclose(aggregate(spec, X + shift), base + shift, atol=1e-6)
        np.testing.assert_allclose(aggregate(spec, X[rng.permutation(len(X))]), base, atol=1e-6)


def test_geometric_median_snaps_to_optimal_point():
    X = np.array([[1.0, 0.0], [0.0, 1.5], [-0.2, -1.0], [1.0, 0.0], [3.0, 0.2]])
    np.testing.assert_array_equal(aggregate(CentralitySpec("geometric-median"), X), [1.0, 0.0])


@pytest.mark.parametrize("kind", KINDS)
@settings(max_examples=60, deadline=None)
@given(x=arrays(np.float64, 4, elements=st.floats(-1e6, 1e6, allow_nan=False)), n=st.integers(1, 6))
def test_identical_models_reproduced_exactly(kind, x, n):
    out = aggregate(CentralitySpec(kind), [x] * n)
    assert np.array_equal(out, x)


def test_breakdown_robustness():
    rng = np.random.default_rng(0)
    X = rng.uniform(-1e-3, 1e-3, size=(5, 3))
    X[2] = 1e6
    assert np.linalg.norm(aggregate(CentralitySpec("geometric-median"), X)) < 1e-2
    assert np.linalg.norm(aggregate(CentralitySpec("coordinate-median"), X)) < 1e-2
    assert np.linalg.norm(aggregate(CentralitySpec("mean"), X)) > 1e5
