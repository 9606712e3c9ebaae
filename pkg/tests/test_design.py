import numpy as np
import pytest

from gpsurrogate.design import lhd, maximin_improve, scale_to_unit, unscale_from_unit
from gpsurrogate.exceptions import DegenerateBounds, InvalidSize, OutOfBounds
from gpsurrogate.kernels import Design


class TestLhd:
    def test_single_point(self):
        x = lhd(1, 1, seed=0)
        assert x.points.shape == (1, 1)
        assert 0.0 <= x.points[0, 0] < 1.0

    def test_strata_occupancy(self):
        x = lhd(4, 2, seed=1)
        for k in range(2):
            strata = np.sort(np.floor(x.points[:, k] * 4).astype(int))
            assert np.array_equal(strata, [0, 1, 2, 3])

    def test_determinism(self):
        assert np.array_equal(lhd(7, 3, seed=42).points, lhd(7, 3, seed=42).points)

    def test_seeds_differ(self):
        assert not np.array_equal(lhd(7, 3, seed=1).points, lhd(7, 3, seed=2).points)

    def test_invalid_size(self):
        with pytest.raises(InvalidSize):
            lhd(0, 2)
        with pytest.raises(InvalidSize):
            lhd(3, 0)

    @pytest.mark.parametrize("n", [5, 20, 100])
    def test_marginal_uniformity(self, n):
        # empirical CDF of each coordinate within 1/n of uniform in sup norm
        x = lhd(n, 2, seed=n)
        for k in range(2):
            sorted_col = np.sort(x.points[:, k])
            ecdf_hi = (np.arange(1, n + 1)) / n
            ecdf_lo = np.arange(n) / n
            sup = max(np.abs(ecdf_hi - sorted_col).max(), np.abs(sorted_col - ecdf_lo).max())
            assert sup <= 1.0 / n + 1e-12


class TestMaximinImprove:
    def test_zero_passes_identity(self):
        x = lhd(8, 2, seed=3)
        out = maximin_improve(x, passes=0, seed=1)
        assert np.array_equal(out.points, x.points)

    def test_min_distance_never_decreases(self):
        from scipy.spatial.distance import pdist

        x = lhd(10, 2, seed=4)
        out = maximin_improve(x, passes=1000, seed=5)
        assert pdist(out.points).min() >= pdist(x.points).min()

    def test_latin_property_preserved(self):
        x = lhd(9, 3, seed=6)
        out = maximin_improve(x, passes=500, seed=7)
        for k in range(3):
            assert np.array_equal(np.sort(out.points[:, k]), np.sort(x.points[:, k]))

    def test_two_point_opposite_strata(self):
        # exhaustive check: after improvement the two points sit in
        # opposite strata (the only maximin arrangement for n=2, d=1)
        for seed in range(10):
            x = lhd(2, 1, seed=seed)
            out = maximin_improve(x, passes=50, seed=seed + 100)
            strata = np.sort(np.floor(out.points[:, 0] * 2).astype(int))
            assert np.array_equal(strata, [0, 1])
            assert abs(out.points[0, 0] - out.points[1, 0]) >= abs(x.points[0, 0] - x.points[1, 0])


class TestScaling:
    def test_unit_bounds_identity(self):
        raw = np.array([[0.25, 0.75]])
        out = scale_to_unit(raw, [(0.0, 1.0), (0.0, 1.0)])
        assert np.array_equal(out.points, raw)

    def test_midpoint(self):
        out = scale_to_unit([[5.0]], [(0.0, 10.0)])
        assert out.points[0, 0] == 0.5

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        bounds = [(-3.0, 7.0), (100.0, 250.0), (0.5, 0.6)]
        raw = np.column_stack([rng.uniform(lo, hi, size=40) for lo, hi in bounds])
        back = unscale_from_unit(scale_to_unit(raw, bounds), bounds)
        assert np.abs(back - raw).max() < 1e-12 * np.abs(raw).max()

    def test_degenerate_bounds(self):
        with pytest.raises(DegenerateBounds):
            scale_to_unit([[1.0]], [(2.0, 2.0)])

    def test_out_of_bounds_refused(self):
        with pytest.raises(OutOfBounds):
            scale_to_unit([[11.0]], [(0.0, 10.0)])

    def test_unscale_accepts_design(self):
        d = Design([[0.5]])
        assert unscale_from_unit(d, [(0.0, 4.0)])[0, 0] == 2.0
