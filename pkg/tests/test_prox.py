import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockprox.exceptions import DimensionError, OracleFailure
from blockprox.prox import (brute_force_prox_oracle, prox_box_indicator, prox_conjugate_moreau, prox_hinge,
                            prox_l12_pairs, prox_scaled_l2_distance, prox_scaled_l2_norm, prox_scaled_sq_l2,
                            prox_zero, prox_zero_indicator)


def catalog(rng):
    return [
        prox_zero(3),
        prox_scaled_l2_norm(0.4, 4),
        prox_hinge(1.0),
        prox_hinge(-2.5),
        prox_box_indicator(-1.0, 2.0, 3),
        prox_scaled_l2_distance(0.8, rng.standard_normal(5)),
        prox_scaled_sq_l2(1.7, rng.standard_normal(2)),
        prox_l12_pairs(2),
        prox_zero_indicator(2),
    ]


class TestClosedForms:
    def test_scaled_l2_norm(self):
        f = prox_scaled_l2_norm(1.0, 2)
        assert np.array_equal(f.prox([0.5, 0.0], 1.0), [0.0, 0.0])
        assert np.allclose(prox_scaled_l2_norm(0.1, 2).prox([2.0, 0.0], 1.0), [1.9, 0.0])
        assert np.array_equal(f.prox(np.zeros(2), 1.0), np.zeros(2))

    def test_hinge(self):
        assert np.allclose(prox_hinge(1.0).prox([3.0], 1.0), [3.0])
        assert np.allclose(prox_hinge(1.0).prox([-1.0], 1.0), [0.0])
        assert np.allclose(prox_hinge(-1.0).prox([1.0], 1.0), [0.0])

    def test_box(self):
        f = prox_box_indicator(0.0, 255.0, 3)
        assert np.array_equal(f.prox([300.0, 10.0, -4.0], 2.0), [255.0, 10.0, 0.0])

    def test_scaled_l2_distance(self):
        b = np.array([1.0, -2.0])
        assert np.array_equal(prox_scaled_l2_distance(3.0, b).prox(b, 1.0), b)
        assert np.allclose(prox_scaled_l2_distance(10.0, [0.0, 0.0]).prox([3.0, 0.0], 0.1), [2.0, 0.0])
        assert np.allclose(prox_scaled_l2_distance(1.0, [0.0, 0.0]).prox([1.0, 0.0], 5.0), [0.0, 0.0])

    def test_scaled_sq_l2(self):
        c = np.array([0.3, 4.0])
        assert np.allclose(prox_scaled_sq_l2(2.0, c).prox(c, 0.7), c)
        assert np.allclose(prox_scaled_sq_l2(5.0, [1.0]).prox([0.0], 0.1), [0.5])
        x = np.array([1.0, -1.0])
        assert np.linalg.norm(prox_scaled_sq_l2(1.0, c).prox(x, 1e-8) - x) < 1e-6

    def test_l12_pairs(self):
        f = prox_l12_pairs(1)
        assert np.array_equal(f.prox([0.0, 0.0], 1.0), [0.0, 0.0])
        assert np.allclose(f.prox([3.0, 4.0], 1.0), [2.4, 3.2])
        assert np.allclose(f.prox([3.0, 4.0], 10.0), [0.0, 0.0])

    def test_l12_pairs_rejects_odd(self):
        with pytest.raises(DimensionError):
            prox_l12_pairs(1).prox([1.0, 2.0, 3.0], 1.0)

    def test_zero(self):
        x = np.array([1.5, -2.0, 0.25])
        assert np.array_equal(prox_zero(3).prox(x, 3.0), x)

    def test_conjugate_examples(self):
        x = np.array([0.7, -1.2])
        assert np.allclose(prox_conjugate_moreau(prox_zero(2), x, 2.0), 0.0)
        assert np.allclose(prox_conjugate_moreau(prox_zero_indicator(2), x, 2.0), x)
        assert np.allclose(prox_conjugate_moreau(prox_scaled_l2_norm(1.0, 2), [0.5, 0.0], 1.0), [0.5, 0.0])
        assert np.allclose(prox_conjugate_moreau(prox_scaled_l2_norm(1.0, 2), [3.0, 4.0], 1.0), [0.6, 0.8])

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            prox_scaled_l2_norm(0.1, 2).prox([1.0, 2.0], 0.0)
        with pytest.raises(ValueError):
            prox_scaled_l2_norm(-1.0, 2)
        with pytest.raises(ValueError):
            prox_box_indicator(1.0, 1.0, 2)
        with pytest.raises(DimensionError):
            prox_scaled_l2_norm(0.1, 2).prox([1.0, 2.0, 3.0], 1.0)


class TestValues:
    def test_values(self):
        assert prox_scaled_l2_norm(0.1, 3)([2.0, 0.0, 0.0]) == pytest.approx(0.2)
        assert prox_box_indicator(0.0, 255.0, 2)([300.0, 1.0]) == np.inf
        assert prox_hinge(-1.0)([0.5]) == pytest.approx(1.5)
        assert prox_l12_pairs(2)([3.0, 0.0, 4.0, 1.0]) == pytest.approx(6.0)
        assert prox_zero_indicator(2)([0.0, 1e-300]) == np.inf


class TestOracle:
    def test_zero_function(self):
        x = np.array([0.3, -1.1])
        assert np.linalg.norm(brute_force_prox_oracle(prox_zero(2), x, 0.5, 1e-6) - x) < 1e-6

    @pytest.mark.parametrize("f", [prox_scaled_l2_norm(0.6, 3), prox_hinge(1.0), prox_hinge(-1.0)])
    def test_matches_closed_form(self, f):
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = 2.0 * rng.standard_normal(f.dim)
            gamma = rng.uniform(0.2, 2.0)
            assert np.linalg.norm(brute_force_prox_oracle(f, x, gamma, 1e-6) - f.prox(x, gamma)) < 1e-5

    def test_rejects_high_dimension(self):
        with pytest.raises(ValueError):
            brute_force_prox_oracle(prox_zero(6), np.zeros(6), 1.0)

    def test_flags_nonconvergence(self):
        with pytest.raises(OracleFailure):
            brute_force_prox_oracle(prox_scaled_l2_norm(1.0, 3), np.ones(3), 1.0, 1e-12, max_sweeps=1)


class TestProperties:
    def test_nonexpansive(self):
        rng = np.random.default_rng(1)
        for f in catalog(rng):
            for _ in range(100):
                x, y = 3.0 * rng.standard_normal((2, f.dim))
                gamma = rng.uniform(0.01, 5.0)
                gap = np.linalg.norm(f.prox(x, gamma) - f.prox(y, gamma))
                assert gap <= np.linalg.norm(x - y) + 1e-10

    def test_moreau_decomposition(self):
        # x = prox_{gamma f}(x) + gamma prox_{f*/gamma}(x/gamma)
        rng = np.random.default_rng(2)
        for f in catalog(rng):
            for _ in range(20):
                x = 3.0 * rng.standard_normal(f.dim)
                gamma = rng.uniform(0.1, 4.0)
                recon = f.prox(x, gamma) + gamma * prox_conjugate_moreau(f, x / gamma, 1.0 / gamma)
                assert np.allclose(recon, x, atol=1e-12, rtol=0)

    def test_local_minimizer(self):
        rng = np.random.default_rng(4)
        for f in catalog(rng):
            x = 2.0 * rng.standard_normal(f.dim)
            gamma = rng.uniform(0.1, 2.0)
            p = f.prox(x, gamma)
            base = f(p) + np.sum((p - x) ** 2) / (2 * gamma)
            for _ in range(50):
                d = rng.standard_normal(f.dim)
                d *= 1e-3 / np.linalg.norm(d)
                q = p + d
                assert base <= f(q) + np.sum((q - x) ** 2) / (2 * gamma) + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=4, max_size=4), st.floats(0.01, 20.0), st.floats(0.01, 5.0))
    def test_l2_norm_threshold(self, x, gamma, tau):
        x = np.array(x)
        p = prox_scaled_l2_norm(tau, 4).prox(x, gamma)
        nx = np.linalg.norm(x)
        if nx <= gamma * tau:
            assert np.array_equal(p, np.zeros(4))
        else:
            assert np.allclose(p, (1 - gamma * tau / nx) * x)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-20, 20), st.floats(0.01, 10.0), st.sampled_from([-2.0, -1.0, 0.5, 1.0, 3.0]))
    def test_hinge_optimality(self, x, gamma, beta):
        # p = prox(x) iff (x - p)/gamma is a subgradient of max(0, 1 - beta .) at p
        p = float(prox_hinge(beta).prox([x], gamma)[0])
        s = (x - p) / gamma
        margin = 1.0 - beta * p
        if margin > 1e-9:
            assert s == pytest.approx(-beta, abs=1e-9)
        elif margin < -1e-9:
            assert s == pytest.approx(0.0, abs=1e-9)
        else:
            lo, hi = sorted([0.0, -beta])
            assert lo - 1e-9 <= s <= hi + 1e-9
