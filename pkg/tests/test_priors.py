import numpy as np
import pytest

from sbicover.priors import IndependentNormal, LogUniformBox, UniformBox
from sbicover.rng import RngStream


def _quadrature_mass(prior, n=200001):
    lows, highs = prior.grid_box()
    width = (highs[0] - lows[0]) / n
    centers = (lows[0] + width * (np.arange(n) + 0.5))[:, None]
    return np.exp(prior.log_density(centers)).sum() * width


def test_uniform_box_density_is_inverse_volume():
    p = UniformBox([0.0, -1.0], [2.0, 3.0])
    assert p.log_density(np.array([1.0, 0.0])) == pytest.approx(-np.log(8.0))
    assert p.log_density(np.array([3.0, 0.0])) == -np.inf
    assert p.contains(np.array([0.0, -1.0]))  # boundary included
    assert not p.contains(np.array([0.0, 3.0001]))


def test_uniform_box_samples_inside_and_uniform():
    p = UniformBox([-2.0], [4.0])
    s = p.sample(20000, RngStream(0).gen)
    assert s.shape == (20000, 1)
    assert p.contains(s).all()
    # mean (6*k/4 - 2) at the quartiles of a uniform
    assert np.mean(s) == pytest.approx(1.0, abs=0.05)
    assert np.quantile(s, 0.25) == pytest.approx(-0.5, abs=0.06)


def test_uniform_box_integrates_to_one():
    assert _quadrature_mass(UniformBox([1.5], [9.0])) == pytest.approx(1.0, abs=1e-6)


def test_log_uniform_density_formula():
    p = LogUniformBox([1.0], [np.e])
    # density 1/theta on [1, e]
    assert p.log_density(np.array([2.0])) == pytest.approx(-np.log(2.0))
    assert p.log_density(np.array([0.5])) == -np.inf
    assert _quadrature_mass(p) == pytest.approx(1.0, abs=1e-4)


def test_log_uniform_samples_match_cdf():
    p = LogUniformBox([0.1, 1.0], [10.0, 100.0])
    s = p.sample(40000, RngStream(1).gen)
    assert p.contains(s).all()
    # log of a log-uniform is uniform: median = geometric midpoint
    assert np.median(s[:, 0]) == pytest.approx(1.0, rel=0.05)
    assert np.median(s[:, 1]) == pytest.approx(10.0, rel=0.05)


def test_independent_normal_density():
    p = IndependentNormal([1.0, -2.0], [0.5, 3.0])
    theta = np.array([1.5, 0.0])
    want = (-0.5 * ((0.5 / 0.5) ** 2 + (2.0 / 3.0) ** 2)
            - np.log(0.5) - np.log(3.0) - np.log(2 * np.pi))
    assert p.log_density(theta) == pytest.approx(want, rel=1e-12)
    assert _quadrature_mass(IndependentNormal([0.3], [1.7])) == pytest.approx(
        1.0, abs=1e-9)


def test_independent_normal_moments():
    p = IndependentNormal([2.0], [0.7])
    s = p.sample(40000, RngStream(2).gen)
    assert np.mean(s) == pytest.approx(2.0, abs=0.02)
    assert np.std(s) == pytest.approx(0.7, abs=0.02)


def test_batch_and_single_row_agree():
    for p in (UniformBox([0.0], [1.0]), LogUniformBox([1.0], [2.0]),
              IndependentNormal([0.0], [1.0])):
        batch = p.log_density(np.array([[0.5], [1.5]]))
        assert batch.shape == (2,)
        assert batch[0] == p.log_density(np.array([0.5]))


def test_constructor_validation():
    with pytest.raises(ValueError):
        UniformBox([0.0], [0.0])
    with pytest.raises(ValueError):
        LogUniformBox([0.0], [1.0])
    with pytest.raises(ValueError):
        IndependentNormal([0.0], [0.0])
    with pytest.raises(ValueError):
        UniformBox([0.0], [1.0]).log_density(np.zeros((3, 2)))
