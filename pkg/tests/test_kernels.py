import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpsurrogate import kernels
from gpsurrogate.design import lhd
from gpsurrogate.exceptions import DimensionMismatch, DomainError, UnsupportedNu
from gpsurrogate.kernels import (
    CorrelationSpec,
    Design,
    beta_from_theta,
    corr,
    corr_matrix,
    cross_corr,
    lambda_from_theta,
    rho_from_theta,
    theta_from_beta,
    theta_from_lambda,
    theta_from_rho,
)


def gauss_spec(d=1, theta=1.0):
    return CorrelationSpec(beta=np.full(d, math.log10(theta)), power=np.full(d, 2.0))


class TestCorrelationSpec:
    def test_theta_view(self):
        spec = CorrelationSpec(beta=np.array([0.0, 1.0]))
        assert np.allclose(spec.theta, [1.0, 10.0])

    def test_power_domain(self):
        with pytest.raises(DomainError):
            CorrelationSpec(beta=np.zeros(1), power=np.array([2.5]))

    def test_unsupported_nu(self):
        with pytest.raises(UnsupportedNu):
            CorrelationSpec(beta=np.zeros(1), family="matern", nu=0.75)

    def test_compact_needs_tau(self):
        with pytest.raises(DomainError):
            CorrelationSpec(beta=np.zeros(1), family="compact")

    def test_scalar_power_broadcasts(self):
        spec = CorrelationSpec(beta=np.zeros(3), power=1.5)
        assert np.allclose(spec.power, [1.5, 1.5, 1.5])


class TestCorr:
    @pytest.mark.parametrize(
        "spec",
        [
            gauss_spec(2),
            CorrelationSpec(beta=np.zeros(2), family="matern", nu=1.5),
            CorrelationSpec(beta=np.zeros(2), family="compact", tau=np.array([0.7, 0.7])),
        ],
    )
    def test_zero_distance_is_one(self, spec):
        x = np.array([0.3, 0.8])
        assert corr(spec, x, x) == 1.0

    def test_powexp_hand_value(self):
        assert corr(gauss_spec(), [0.0], [1.0]) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_compact_hand_value(self):
        spec = CorrelationSpec(beta=np.zeros(1), family="compact", tau=np.array([1.0]))
        got = corr(spec, [0.0], [0.5])
        assert got == pytest.approx(1.0 / math.pi, rel=1e-12)

    def test_compact_zero_at_support_edge(self):
        spec = CorrelationSpec(beta=np.zeros(1), family="compact", tau=np.array([0.4]))
        assert corr(spec, [0.0], [0.4]) == 0.0
        assert corr(spec, [0.0], [0.9]) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for spec in (gauss_spec(3, 2.0),
                     CorrelationSpec(beta=np.array([0.2, -0.1, 0.4]), family="matern", nu=2.5),
                     CorrelationSpec(beta=np.zeros(3), family="compact", tau=np.array([0.3, 0.5, 0.9]))):
            for _ in range(20):
                a, b = rng.random(3), rng.random(3)
                assert corr(spec, a, b) == pytest.approx(corr(spec, b, a), abs=1e-15)

    def test_values_in_range(self):
        rng = np.random.default_rng(1)
        specs = [gauss_spec(2, 5.0),
                 CorrelationSpec(beta=np.zeros(2), family="matern", nu=0.5),
                 CorrelationSpec(beta=np.zeros(2), family="compact", tau=np.array([0.2, 0.6]))]
        for spec in specs:
            for _ in range(50):
                v = corr(spec, rng.random(2), rng.random(2))
                assert -1.0 <= v <= 1.0

    def test_powexp_monotone_in_theta(self):
        h = [0.0, 0.35]
        vals = [corr(gauss_spec(theta=t), [0.1], [0.45]) for t in (0.5, 1.0, 5.0, 50.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            corr(gauss_spec(2), [0.1], [0.2])

    def test_matern_agrees_with_bessel_form(self):
        # oracle: the general Bessel-function expression from scipy
        from scipy.special import gamma as gamma_fn
        from scipy.special import kv

        rng = np.random.default_rng(3)
        for nu in (0.5, 1.5, 2.5):
            spec = CorrelationSpec(beta=np.array([0.3, -0.2]), family="matern", nu=nu)
            theta = spec.theta
            for _ in range(25):
                a, b = rng.random(2), rng.random(2)
                expected = 1.0
                for k in range(2):
                    t = math.sqrt(2 * nu) * abs(a[k] - b[k]) * theta[k]
                    if t == 0:
                        continue
                    expected *= t**nu * kv(nu, t) / (gamma_fn(nu) * 2 ** (nu - 1))
                assert corr(spec, a, b) == pytest.approx(expected, abs=1e-8)


class TestCorrMatrix:
    def test_single_point(self):
        r = corr_matrix(gauss_spec(), Design([[0.5]]))
        assert r.shape == (1, 1) and r[0, 0] == 1.0

    def test_duplicate_points_allowed(self):
        r = corr_matrix(gauss_spec(), Design([[0.2], [0.2]]))
        assert np.allclose(r, 1.0)

    def test_hand_two_point(self):
        r = corr_matrix(gauss_spec(), Design([[0.0], [1.0]]))
        e = math.exp(-1.0)
        assert np.allclose(r, [[1.0, e], [e, 1.0]], atol=1e-15)

    def test_symmetric_unit_diagonal(self):
        x = lhd(25, 3, seed=4)
        spec = CorrelationSpec(beta=np.array([0.5, 0.0, -0.3]))
        r = corr_matrix(spec, x)
        assert np.array_equal(r, r.T)
        assert np.all(np.diag(r) == 1.0)

    def test_psd_up_to_tolerance(self):
        x = lhd(30, 2, seed=5)
        r = corr_matrix(gauss_spec(2, 0.5), x)
        assert np.linalg.eigvalsh(r)[0] >= -1e-8 * 30

    def test_permutation_invariance(self):
        x = lhd(12, 2, seed=6)
        spec = gauss_spec(2, 3.0)
        r = corr_matrix(spec, x)
        perm = np.random.default_rng(0).permutation(12)
        r_perm = corr_matrix(spec, Design(x.points[perm]))
        assert np.array_equal(r_perm, r[np.ix_(perm, perm)])

    def test_compact_sparsity_monotone_in_tau(self):
        x = lhd(40, 2, seed=7)
        fractions = []
        for tau in (0.8, 0.4, 0.2, 0.1):
            spec = CorrelationSpec(beta=np.zeros(2), family="compact", tau=np.full(2, tau))
            r = corr_matrix(spec, x)
            fractions.append(np.mean(r == 0.0))
        assert all(a <= b for a, b in zip(fractions, fractions[1:]))


class TestCrossCorr:
    def test_training_point_gives_one(self):
        x = Design([[0.1], [0.9]])
        vec = cross_corr(gauss_spec(), x, [0.1])
        assert vec[0] == 1.0

    def test_hand_values(self):
        vec = cross_corr(gauss_spec(), Design([[0.0], [1.0]]), [0.5])
        assert np.allclose(vec, math.exp(-0.25), rtol=1e-12)

    def test_large_theta_limit(self):
        vec = cross_corr(gauss_spec(theta=1e6), Design([[0.0], [1.0]]), [0.5])
        assert np.all(vec < 1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cross_corr(gauss_spec(2), Design([[0.1, 0.2]]), [0.5])


class TestReparametrizations:
    def test_beta_zero(self):
        assert theta_from_beta(0.0) == 1.0

    def test_rho_hand_inverse(self):
        assert theta_from_rho(math.exp(-0.25)) == pytest.approx(1.0, rel=1e-12)

    def test_lambda_hand_inverse(self):
        assert theta_from_lambda(2.0) == pytest.approx(0.5, rel=1e-12)

    @given(st.floats(min_value=-6.0, max_value=6.0))
    def test_beta_round_trip(self, beta):
        assert beta_from_theta(theta_from_beta(beta)) == pytest.approx(beta, abs=1e-12)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=60)
    def test_lambda_round_trip(self, lam):
        assert lambda_from_theta(theta_from_lambda(lam)) == pytest.approx(lam, rel=1e-12)

    @given(st.floats(min_value=1e-6, max_value=1.0, exclude_max=True))
    @settings(max_examples=60)
    def test_rho_round_trip(self, rho):
        assert rho_from_theta(theta_from_rho(rho)) == pytest.approx(rho, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            theta_from_rho(1.0)
        with pytest.raises(DomainError):
            theta_from_rho(0.0)
        with pytest.raises(DomainError):
            theta_from_lambda(-1.0)
        with pytest.raises(DomainError):
            theta_from_beta(math.inf)


class TestCorrEvaluator:
    @pytest.mark.parametrize(
        "spec",
        [
            CorrelationSpec(beta=np.array([0.3, -0.5]), power=np.array([1.95, 1.6])),
            CorrelationSpec(beta=np.array([0.3, -0.5]), family="matern", nu=2.5),
            CorrelationSpec(beta=np.zeros(2), family="compact", tau=np.array([0.5, 0.8])),
        ],
    )
    def test_bitwise_match_with_corr_matrix(self, spec):
        x = lhd(18, 2, seed=8)
        evaluator = kernels.CorrEvaluator(spec, x)
        assert np.array_equal(evaluator(spec.beta), corr_matrix(spec, x))
