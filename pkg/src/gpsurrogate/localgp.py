"""Nearest-neighbor local GP prediction for large training sets.

A full GP on N points costs O(N^3) per likelihood evaluation; for large N
each query is instead answered by a small GP fitted only to the n nearest
training points of the query location.  Neighborhood lookup is a brute
force scan for moderate N and a uniform grid-bucket index beyond that (the
input dimension is small in the computer-experiment regime, so fancy
metric trees buy nothing).  Batch prediction distributes queries over
processes; per-query seeds are derived from the run seed and the query
index, so results are identical for any worker count.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DimensionMismatch, DomainError, NTooLarge
from .gpmodel import FitOptions, GpModel, PredictionResult, fit, predict
from .kernels import CorrelationSpec, Design
from .rng import derive_seed

#: Above this many training points, neighborhood queries go through the
#: grid-bucket index instead of a full distance scan.
BRUTE_FORCE_LIMIT = 50_000

#: Reduced multistart budget for the many small local fits.
LOCAL_FIT_DEFAULTS = dict(candidates_per_dim=50, keep_per_dim=20, clusters_per_dim=1)


def local_fit_options(**overrides) -> FitOptions:
    """FitOptions with the throughput-oriented local-search budget."""
    merged = dict(LOCAL_FIT_DEFAULTS)
    merged.update(overrides)
    return FitOptions(**merged)


class _GridIndex:
    """Uniform bucket grid over [0,1]^d for exact k-nearest-neighbor queries."""

    def __init__(self, points: np.ndarray):
        n, d = points.shape
        self.points = points
        self.cells_per_dim = max(2, min(64, int(round((n / 8.0) ** (1.0 / d)))))
        self.width = 1.0 / self.cells_per_dim
        coords = np.minimum((points / self.width).astype(int), self.cells_per_dim - 1)
        self.buckets = {}
        for idx, cell in enumerate(map(tuple, coords)):
            self.buckets.setdefault(cell, []).append(idx)

    def _ring(self, center, radius):
        m = self.cells_per_dim
        lo = [max(0, c - radius) for c in center]
        hi = [min(m - 1, c + radius) for c in center]
        for cell in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
            if max(abs(c - ctr) for c, ctr in zip(cell, center)) == radius:
                yield cell

    def query(self, x0: np.ndarray, n: int) -> np.ndarray:
        m = self.cells_per_dim
        center = tuple(min(int(c / self.width), m - 1) for c in x0)
        collected: list[int] = []
        radius = 0
        while True:
            for cell in self._ring(center, radius):
                collected.extend(self.buckets.get(cell, ()))
            if len(collected) >= n:
                idx = np.asarray(collected)
                dist2 = ((self.points[idx] - x0) ** 2).sum(axis=1)
                order = np.lexsort((idx, dist2))
                kth_dist = float(np.sqrt(dist2[order[n - 1]]))
                # any point in an unvisited ring is at least (radius)*width away
                if radius * self.width > kth_dist or radius >= m:
                    return idx[order[:n]]
            elif radius >= m:
                idx = np.asarray(collected)
                dist2 = ((self.points[idx] - x0) ** 2).sum(axis=1)
                return idx[np.lexsort((idx, dist2))][:n]
            radius += 1


@dataclass
class BigDataset:
    """Immutable-after-load training set, with a lazily built spatial index."""

    x: np.ndarray
    y: np.ndarray
    _index: _GridIndex | None = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.x.shape[0] != self.y.size:
            raise DimensionMismatch(f"{self.x.shape[0]} design rows but {self.y.size} responses")
        if self.x.shape[0] < 1:
            raise DomainError("dataset must hold at least one point")
        if self.x.min() < 0.0 or self.x.max() > 1.0:
            raise DomainError("dataset coordinates must lie in [0, 1]")

    @property
    def n_points(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


def knn_neighborhood(data: BigDataset, x0, n: int) -> np.ndarray:
    """Indices of the n nearest training points to x0 (Euclidean).

    Distance ties break by ascending row index, so the result is
    deterministic; the returned indices are ordered by (distance, index).
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (data.d,):
        raise DimensionMismatch(f"query must have dimension {data.d}, got shape {x0.shape}")
    if not 1 <= n <= data.n_points:
        raise NTooLarge(f"neighborhood size {n} outside [1, {data.n_points}]")
    if data.n_points <= BRUTE_FORCE_LIMIT:
        dist2 = ((data.x - x0) ** 2).sum(axis=1)
        order = np.lexsort((np.arange(data.n_points), dist2))
        return order[:n]
    if data._index is None:
        data._index = _GridIndex(data.x)
    return data._index.query(x0, n)


def predict_local(
    data: BigDataset,
    x0,
    n: int,
    spec_template: CorrelationSpec | None = None,
    opts: FitOptions | None = None,
) -> PredictionResult:
    """Fit a GP to the n-point neighborhood of x0 and predict there.

    The neighborhood subset is passed to the fitter in ascending row order,
    so with n equal to the dataset size this is exactly the full-GP fit.
    The result depends only on the neighborhood and the seed.
    """
    if n < 2:
        raise DomainError("local fits need a neighborhood of at least 2 points")
    opts = opts or local_fit_options()
    idx = np.sort(knn_neighborhood(data, x0, n))
    model = fit(Design(data.x[idx]), data.y[idx], spec_template=spec_template, opts=opts)
    return predict(model, x0)


# -- batch machinery ---------------------------------------------------------

_WORKER_STATE: dict = {}


def _init_worker(x, y, n, spec_template, opts):
    _WORKER_STATE["data"] = BigDataset(x, y)
    _WORKER_STATE["n"] = n
    _WORKER_STATE["spec"] = spec_template
    _WORKER_STATE["opts"] = opts


def _run_query(item):
    i, x0 = item
    opts = replace(_WORKER_STATE["opts"], seed=derive_seed(_WORKER_STATE["opts"].seed, 17, i))
    try:
        res = predict_local(_WORKER_STATE["data"], x0, _WORKER_STATE["n"],
                            spec_template=_WORKER_STATE["spec"], opts=opts)
        return i, res, None
    except Exception as err:  # collected, not fail-fast
        return i, None, err


def predict_local_batch(
    data: BigDataset,
    x0s,
    n: int,
    spec_template: CorrelationSpec | None = None,
    opts: FitOptions | None = None,
    workers: int = 1,
):
    """Local predictions for many query points.

    Returns (results, errors): ``results[i]`` is a PredictionResult or None,
    and ``errors`` collects (index, exception) pairs for failed queries.
    Every query gets its own seed derived from (opts.seed, index), so the
    output is identical whatever the worker count or schedule.
    """
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    if x0s.size == 0:
        return [], []
    if x0s.shape[1] != data.d:
        raise DimensionMismatch(f"queries have dimension {x0s.shape[1]}, dataset has {data.d}")
    opts = opts or local_fit_options()
    items = list(enumerate(x0s))
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(data.x, data.y, n, spec_template, opts),
        ) as pool:
            raw = list(pool.map(_run_query, items, chunksize=max(1, len(items) // (4 * workers))))
    else:
        _init_worker(data.x, data.y, n, spec_template, opts)
        raw = [_run_query(item) for item in items]
    results = [None] * len(items)
    errors = []
    for i, res, err in raw:
        if err is None:
            results[i] = res
        else:
            errors.append((i, err))
    return results, errors
