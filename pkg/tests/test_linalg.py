import io
import math

import numpy as np
import pytest

from gpsurrogate import linalg
from gpsurrogate.design import lhd
from gpsurrogate.exceptions import (
    AllSingularValuesTruncated,
    DimensionMismatch,
    InvalidKappaMax,
    NotPositiveDefinite,
)
from gpsurrogate.kernels import CorrelationSpec, corr_matrix


def random_spd(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return a @ a.T + n * np.eye(n)


class TestCholesky:
    def test_identity(self):
        l = linalg.cholesky(np.eye(3))
        assert np.allclose(l, np.eye(3))

    def test_hand_2x2(self):
        l = linalg.cholesky([[1.0, 0.5], [0.5, 1.0]])
        expected = np.array([[1.0, 0.0], [0.5, math.sqrt(0.75)]])
        assert np.allclose(l, expected, atol=1e-12)

    def test_rank_deficient_raises(self):
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky([[1.0, 1.0], [1.0, 1.0]])

    def test_asymmetric_rejected(self):
        with pytest.raises(DimensionMismatch):
            linalg.cholesky([[1.0, 0.2], [0.3, 1.0]])

    def test_reconstruction(self):
        m = random_spd(8, 0)
        l = linalg.cholesky(m)
        assert np.abs(l @ l.T - m).max() < 1e-10 * np.abs(m).max()


class TestSolveChol:
    def test_identity(self):
        l = linalg.cholesky(np.eye(2))
        assert np.allclose(linalg.solve_chol(l, [3.0, 4.0]), [3.0, 4.0])

    def test_hand_2x2(self):
        l = linalg.cholesky([[1.0, 0.5], [0.5, 1.0]])
        x = linalg.solve_chol(l, [1.0, 1.0])
        assert np.allclose(x, [2.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    def test_residual_oracle(self):
        m = random_spd(5, 1)
        w = np.arange(1.0, 6.0)
        x = linalg.solve_chol(linalg.cholesky(m), w)
        assert np.abs(m @ x - w).max() < 1e-10

    def test_dimension_mismatch(self):
        l = linalg.cholesky(np.eye(3))
        with pytest.raises(DimensionMismatch):
            linalg.solve_chol(l, [1.0, 2.0])

    @pytest.mark.parametrize("seed", range(6))
    def test_residual_property(self, seed):
        m = random_spd(12, seed)
        rng = np.random.default_rng(100 + seed)
        w = rng.normal(size=12)
        x = linalg.solve_chol(linalg.cholesky(m), w)
        assert np.abs(m @ x - w).max() < 1e-8 * np.abs(w).max()


class TestLogDet:
    def test_identity(self):
        assert linalg.log_det(linalg.cholesky(np.eye(10))) == 0.0

    def test_hand_diag(self):
        val = linalg.log_det(linalg.cholesky(np.diag([2.0, 2.0])))
        assert val == pytest.approx(math.log(4.0), abs=1e-12)

    def test_eigenvalue_oracle(self):
        m = random_spd(4, 3)
        expected = float(np.sum(np.log(np.linalg.eigvalsh(m))))
        assert linalg.log_det(linalg.cholesky(m)) == pytest.approx(expected, abs=1e-9)

    def test_spectral_cross_check_with_nugget(self):
        # log|R + delta I| agrees between the Cholesky and spectral routes
        m = random_spd(9, 4)
        delta = 0.37
        d = np.linalg.eigvalsh(m)
        spectral = float(np.sum(np.log(d + delta)))
        chol = linalg.log_det(linalg.cholesky(m + delta * np.eye(9)))
        assert chol == pytest.approx(spectral, abs=1e-8)


class TestSvd:
    def test_identity(self):
        dec = linalg.svd(np.eye(3))
        assert np.allclose(dec.singular_values, 1.0)

    def test_hand_2x2(self):
        dec = linalg.svd([[1.0, 0.5], [0.5, 1.0]])
        assert np.allclose(dec.singular_values, [1.5, 0.5], atol=1e-12)

    def test_reconstruction_on_correlation_matrices(self):
        spec = CorrelationSpec(beta=np.array([0.5, 0.0]))
        for seed in range(5):
            r = corr_matrix(spec, lhd(20, 2, seed=seed))
            dec = linalg.svd(r)
            recon = (dec.left_vectors * dec.singular_values) @ dec.right_vectors.T
            assert np.abs(recon - r).max() < 1e-10

    def test_nonincreasing(self):
        dec = linalg.svd(random_spd(7, 5))
        assert np.all(np.diff(dec.singular_values) <= 0)


class TestConditionNumber:
    def test_identity(self):
        assert linalg.condition_number(np.eye(5)) == 1.0

    def test_hand_2x2(self):
        assert linalg.condition_number([[1.0, 0.5], [0.5, 1.0]]) == pytest.approx(3.0, rel=1e-12)

    def test_singular_gives_inf(self):
        assert linalg.condition_number([[1.0, 1.0], [1.0, 1.0]]) == math.inf

    def test_scale_invariance(self):
        m = random_spd(6, 6)
        k1 = linalg.condition_number(m)
        k2 = linalg.condition_number(17.3 * m)
        assert k2 == pytest.approx(k1, rel=1e-9)

    def test_nugget_shift_identity(self):
        # kappa(R + delta I) = (lam_max + delta)/(lam_min + delta)
        spec = CorrelationSpec(beta=np.array([-0.5]))
        r = corr_matrix(spec, lhd(15, 1, seed=2))
        delta = 0.01
        eigs = np.linalg.eigvalsh(r)
        direct = linalg.condition_number(r + delta * np.eye(15))
        shifted = (eigs[-1] + delta) / (eigs[0] + delta)
        assert direct == pytest.approx(shifted, rel=1e-6)


class TestTruncatedInverse:
    def test_identity_eta_zero(self):
        assert np.allclose(linalg.truncated_inverse(np.eye(3), 0.0), np.eye(3))

    def test_hand_truncation(self):
        out = linalg.truncated_inverse(np.diag([4.0, 1.0]), eta=2.0)
        assert np.allclose(out, np.diag([0.25, 0.0]), atol=1e-14)

    def test_all_truncated(self):
        with pytest.raises(AllSingularValuesTruncated):
            linalg.truncated_inverse(np.diag([1.0, 1.0]), eta=5.0)

    def test_matches_exact_inverse(self):
        m = random_spd(6, 7)
        out = linalg.truncated_inverse(m, 0.0)
        assert np.abs(out - np.linalg.inv(m)).max() < 1e-8

    def test_matches_cholesky_inverse_columns(self):
        m = random_spd(5, 8)
        l = linalg.cholesky(m)
        cols = linalg.solve_chol(l, np.eye(5))
        assert np.abs(linalg.truncated_inverse(m, 0.0) - cols).max() < 1e-7


class TestNuggetLowerBound:
    def test_already_conditioned(self):
        assert linalg.nugget_lower_bound([1.0, 1.0, 1.0], 1e8) == 0.0

    def test_hand_value(self):
        # (lam_max - kappa*lam_min)/(kappa - 1) with eigs (2, 1e-10), kappa 1e4
        expected = (2.0 - 1e4 * 1e-10) / (1e4 - 1.0)
        got = linalg.nugget_lower_bound([2.0, 1e-10], 1e4)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(2.0001e-4, rel=1e-4)

    def test_invalid_kappa(self):
        with pytest.raises(InvalidKappaMax):
            linalg.nugget_lower_bound([1.0, 0.5], 1.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_bound_achieves_target_and_is_minimal(self, seed):
        rng = np.random.default_rng(seed)
        eigs = np.sort(rng.uniform(1e-12, 5.0, size=10))
        kappa_max = 1e6
        delta = linalg.nugget_lower_bound(eigs, kappa_max)
        after = (eigs[-1] + delta) / (eigs[0] + delta)
        assert after <= kappa_max * (1 + 1e-9)
        if delta > 0:
            slack = (eigs[-1] + 0.99 * delta) / (eigs[0] + 0.99 * delta)
            assert slack > kappa_max


class TestDecompositionBenchmark:
    def test_structure(self):
        report = linalg.decomposition_benchmark(10, 2, 5, seed=0)
        assert {r.method for r in report.rows} == set(linalg.BENCHMARK_METHODS)
        assert len(report.rows) == 4
        for r in report.rows:
            if r.failures < r.trials:
                assert math.isfinite(r.mean_recon_err)

    def test_cholesky_and_svd_beat_lu_and_qr(self):
        report = linalg.decomposition_benchmark(30, 2, 40, seed=3)
        lu = report.row("lu").mean_recon_err
        qr = report.row("qr").mean_recon_err
        for good in ("cholesky", "svd"):
            err = report.row(good).mean_recon_err
            assert err <= lu and err <= qr

    def test_near_identity_all_accurate(self):
        report = linalg.decomposition_benchmark(2, 2, 10, seed=1, log10_theta_range=(2.5, 3.0))
        for r in report.rows:
            assert r.failures == 0
            assert r.max_recon_err < 1e-12

    def test_strict_mode_rehabilitates_lu(self):
        report = linalg.decomposition_benchmark(30, 2, 20, seed=5, strict=True)
        assert report.row("lu").mean_recon_err < 1e-13

    def test_csv_format(self):
        report = linalg.decomposition_benchmark(5, 1, 3, seed=9)
        buf = io.StringIO()
        report.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# error_norm=max_abs"
        assert lines[1] == "method,n,d,trials,mean_recon_err,max_recon_err,mean_time_s,failures"
        assert len(lines) == 6
