"""Gaussian-process surrogate tests.

The kernel oracle at r=1 was computed by hand from the closed form
(1 + sqrt(5) + 5/3) * exp(-sqrt(5)).
"""

import math

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from divbo.gp import GaussianProcessSurrogate, matern52


def pinned_gp(**overrides):
    kwargs = dict(lengthscales=0.3, amplitude=1.0, noise=1e-8, seed=0)
    kwargs.update(overrides)
    return GaussianProcessSurrogate(**kwargs)


def random_dataset(n=8, d=3, seed=1):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(n, d)), rng.uniform(0.1, 0.9, size=n)


class TestMaternKernel:
    def test_unit_distance_value(self):
        expected = (1.0 + math.sqrt(5.0) + 5.0 / 3.0) * math.exp(-math.sqrt(5.0))
        assert expected == pytest.approx(0.5239941088318203, abs=1e-15)
        got = matern52(np.array([0.0]), np.array([1.0]), lengthscales=[1.0])
        assert got == pytest.approx(expected, abs=1e-15)

    def test_zero_distance_is_amplitude(self):
        x = np.array([0.3, 0.7])
        assert matern52(x, x, [1.0, 1.0], amplitude=2.5) == pytest.approx(2.5, abs=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a, b = rng.uniform(size=4), rng.uniform(size=4)
        ell = rng.uniform(0.1, 2.0, size=4)
        assert matern52(a, b, ell) == pytest.approx(matern52(b, a, ell), abs=1e-15)

    def test_anisotropic_lengthscales(self):
        # doubling a lengthscale halves the distance along that axis
        a = np.array([0.0, 0.0])
        b = np.array([1.0, 0.0])
        wide = matern52(a, b, [2.0, 1.0])
        narrow = matern52(np.array([0.0]), np.array([0.5]), [1.0])
        assert wide == pytest.approx(narrow, abs=1e-15)

    def test_matrix_shape(self):
        rng = np.random.default_rng(0)
        A = rng.uniform(size=(5, 3))
        B = rng.uniform(size=(7, 3))
        K = matern52(A, B, [0.5, 0.5, 0.5])
        assert K.shape == (5, 7)
        KA = matern52(A, A, [0.5, 0.5, 0.5])
        np.testing.assert_allclose(KA, KA.T, atol=1e-15)

    def test_decreasing_in_distance(self):
        xs = np.linspace(0.0, 5.0, 50)
        vals = [matern52(np.array([0.0]), np.array([x]), [1.0]) for x in xs]
        assert all(u > v for u, v in zip(vals, vals[1:]))

    def test_rejects_bad_hyperparameters(self):
        with pytest.raises(ValueError):
            matern52(np.array([0.0]), np.array([1.0]), [0.0])
        with pytest.raises(ValueError):
            matern52(np.array([0.0]), np.array([1.0]), [1.0], amplitude=-1.0)


class TestPinnedPosterior:
    def test_interpolates_training_data(self):
        X, y = random_dataset()
        gp = pinned_gp().fit(X, y)
        mean, var = gp.predict(X, return_var=True)
        np.testing.assert_allclose(mean, y, atol=1e-6)
        assert var.max() < 1e-6

    def test_far_field_reverts_to_prior(self):
        X, y = random_dataset()
        gp = pinned_gp().fit(X, y)
        mean, var = gp.predict(np.full((1, 3), 100.0), return_var=True)
        assert mean[0] == pytest.approx(np.mean(y), abs=1e-12)
        assert var[0] == pytest.approx(1.0, abs=1e-12)

    def test_variance_nonnegative_everywhere(self):
        X, y = random_dataset()
        gp = pinned_gp().fit(X, y)
        grid = np.random.default_rng(2).uniform(0, 1, size=(200, 3))
        _, var = gp.predict(grid, return_var=True)
        assert var.min() >= 0.0

    def test_joint_scaling_identity(self):
        # scaling amplitude and noise variance together leaves the mean
        # unchanged and scales the variance by the same factor
        X, y = random_dataset()
        c = 7.0
        g1 = pinned_gp(amplitude=1.0, noise=1e-6).fit(X, y)
        g2 = pinned_gp(amplitude=c, noise=c * 1e-6).fit(X, y)
        grid = np.random.default_rng(4).uniform(0, 1, size=(50, 3))
        m1, v1 = g1.predict(grid, return_var=True)
        m2, v2 = g2.predict(grid, return_var=True)
        np.testing.assert_allclose(m1, m2, atol=1e-10)
        np.testing.assert_allclose(v2, c * v1, rtol=1e-9)

    def test_duplicate_rows_survive_via_jitter(self):
        X = np.array([[0.2, 0.2], [0.2, 0.2], [0.8, 0.4]])
        y = np.array([0.5, 0.5, 0.9])
        gp = GaussianProcessSurrogate(lengthscales=0.5, amplitude=1.0, noise=1e-12, seed=0)
        gp.fit(X, y)
        mean = gp.predict(np.array([[0.2, 0.2]]))
        assert mean[0] == pytest.approx(0.5, abs=1e-3)

    def test_pinning_everything_skips_sampling(self):
        X, y = random_dataset()
        gp = pinned_gp(n_hyper_samples=5).fit(X, y)
        assert len(gp.samples_) == 1  # nothing left to sample


class TestSampledHyperparameters:
    def test_sample_count_and_shapes(self):
        X, y = random_dataset(n=10)
        gp = GaussianProcessSurrogate(n_hyper_samples=3, burn_in=20, thinning=5, seed=7)
        gp.fit(X, y)
        assert len(gp.samples_) == 3
        means, variances = gp.predict_samples(np.random.default_rng(1).uniform(size=(4, 3)))
        assert means.shape == (3, 4)
        assert variances.shape == (3, 4)

    def test_deterministic_given_seed(self):
        X, y = random_dataset(n=10)
        grid = np.random.default_rng(9).uniform(size=(6, 3))
        out = []
        for _ in range(2):
            gp = GaussianProcessSurrogate(n_hyper_samples=2, burn_in=20, thinning=5, seed=42)
            gp.fit(X, y)
            out.append(gp.predict(grid, return_var=True))
        np.testing.assert_array_equal(out[0][0], out[1][0])
        np.testing.assert_array_equal(out[0][1], out[1][1])

    def test_partial_pinning(self):
        X, y = random_dataset(n=10)
        gp = GaussianProcessSurrogate(
            n_hyper_samples=2, burn_in=10, thinning=2, noise=1e-6, seed=3
        )
        gp.fit(X, y)
        for s in gp.samples_:
            assert s.noise == pytest.approx(1e-6, rel=1e-12)

    def test_predict_mixes_mean_spread_into_variance(self):
        X, y = random_dataset(n=10)
        gp = GaussianProcessSurrogate(n_hyper_samples=4, burn_in=20, thinning=5, seed=11)
        gp.fit(X, y)
        grid = np.random.default_rng(5).uniform(size=(8, 3))
        means, variances = gp.predict_samples(grid)
        _, var = gp.predict(grid, return_var=True)
        np.testing.assert_allclose(var, variances.mean(axis=0) + means.var(axis=0), atol=1e-14)


class TestValidation:
    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            pinned_gp().fit(np.array([[0.5, 0.5, 0.5]]), np.array([0.5]))

    def test_predict_before_fit(self):
        with pytest.raises(NotFittedError):
            pinned_gp().predict(np.zeros((1, 3)))

    def test_wrong_lengthscale_count(self):
        X, y = random_dataset(d=3)
        gp = GaussianProcessSurrogate(lengthscales=[0.3, 0.3], amplitude=1.0, noise=1e-8)
        with pytest.raises(ValueError):
            gp.fit(X, y)

    def test_wrong_query_dimension(self):
        X, y = random_dataset(d=3)
        gp = pinned_gp().fit(X, y)
        with pytest.raises(ValueError):
            gp.predict(np.zeros((2, 5)))

    def test_rejects_nonpositive_pins(self):
        X, y = random_dataset()
        with pytest.raises(ValueError):
            GaussianProcessSurrogate(amplitude=-1.0, lengthscales=0.3, noise=1e-8).fit(X, y)
        with pytest.raises(ValueError):
            GaussianProcessSurrogate(noise=0.0, lengthscales=0.3, amplitude=1.0).fit(X, y)

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            pinned_gp().fit(np.zeros((4, 2)), np.zeros(3))
