"""Space-filling input generation and affine input scaling."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import DegenerateBounds, InvalidSize, OutOfBounds
from .kernels import Design
from .rng import spawn_rng


def lhd(n: int, d: int, seed: int = 0) -> Design:
    """Random Latin hypercube design on [0,1]^d.

    Each coordinate's n values occupy the n distinct strata
    [(j-1)/n, j/n), one point per stratum, uniformly jittered within the
    stratum (a jittered rather than midpoint LHD).  Deterministic for a
    fixed seed.
    """
    if n < 1 or d < 1:
        raise InvalidSize(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = spawn_rng(seed)
    pts = np.empty((n, d))
    for k in range(d):
        strata = rng.permutation(n)
        pts[:, k] = (strata + rng.random(n)) / n
    return Design(pts)


def _min_pairwise_distance(pts: np.ndarray) -> float:
    if pts.shape[0] < 2:
        return float("inf")
    return float(pdist(pts).min())


def maximin_improve(x: Design, passes: int, seed: int = 0) -> Design:
    """Greedy maximin polish of a Latin hypercube.

    Proposes random within-column swaps of two points' levels and accepts a
    swap only when the minimum pairwise distance does not decrease.  Swaps
    permute values within a column, so the Latin (one point per stratum)
    property is preserved exactly.
    """
    pts = x.points.copy()
    n, d = pts.shape
    if n < 2 or passes <= 0:
        return Design(pts)
    rng = spawn_rng(seed)
    best = _min_pairwise_distance(pts)
    for _ in range(passes):
        k = int(rng.integers(d))
        i, j = rng.choice(n, size=2, replace=False)
        pts[i, k], pts[j, k] = pts[j, k], pts[i, k]
        cand = _min_pairwise_distance(pts)
        if cand >= best:
            best = cand
        else:
            pts[i, k], pts[j, k] = pts[j, k], pts[i, k]
    return Design(pts)


def _check_bounds(bounds) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim == 1:
        bounds = bounds.reshape(1, 2)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise DegenerateBounds(f"bounds must be d pairs (lo, hi), got shape {bounds.shape}")
    if np.any(bounds[:, 0] >= bounds[:, 1]):
        bad = np.nonzero(bounds[:, 0] >= bounds[:, 1])[0]
        raise DegenerateBounds(f"lo >= hi for coordinate(s) {bad.tolist()}")
    return bounds


def scale_to_unit(raw, bounds) -> Design:
    """Affine map of raw data into [0,1]^d.

    Values outside their (lo, hi) bounds are reported as errors; clipping
    is refused because it silently moves data.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    bounds = _check_bounds(bounds)
    if raw.shape[1] != bounds.shape[0]:
        raise DegenerateBounds(f"{bounds.shape[0]} bounds for {raw.shape[1]} columns")
    lo, hi = bounds[:, 0], bounds[:, 1]
    if np.any(raw < lo) or np.any(raw > hi):
        n_bad = int(np.sum((raw < lo) | (raw > hi)))
        raise OutOfBounds(f"{n_bad} value(s) fall outside the declared bounds; refusing to clip")
    return Design((raw - lo) / (hi - lo))


def unscale_from_unit(x, bounds) -> np.ndarray:
    """Inverse of scale_to_unit; accepts a Design or a plain array."""
    pts = x.points if isinstance(x, Design) else np.atleast_2d(np.asarray(x, dtype=float))
    bounds = _check_bounds(bounds)
    if pts.shape[1] != bounds.shape[0]:
        raise DegenerateBounds(f"{bounds.shape[0]} bounds for {pts.shape[1]} columns")
    lo, hi = bounds[:, 0], bounds[:, 1]
    return lo + pts * (hi - lo)
