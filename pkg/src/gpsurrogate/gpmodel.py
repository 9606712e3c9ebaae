"""Scalar Gaussian-process surrogates: deviance, fitting, prediction.

The response is modelled as ``y(x) = mean(x) + z(x)`` with a zero-mean GP
z whose correlation structure comes from :mod:`gpsurrogate.kernels`.  Three
mean structures are supported: ``simple`` (mean pinned at 0), ``ordinary``
(constant mean, the default) and ``universal`` (linear in user basis
functions).  Profiling the likelihood gives closed forms for the mean
coefficients and the process variance, leaving a deviance that is a
function of the rate hyperparameters beta = log10(theta) alone; that
deviance is minimized by a multistart bounded quasi-Newton search.

Ill-conditioned correlation matrices are handled by a nugget policy: each
deviance evaluation factors ``R + delta I`` where delta is the smallest
diagonal inflation that caps the condition number (0 whenever the matrix
is already well conditioned).  Prediction can optionally run iterative
smoothing corrections that drive a nugget-stabilized predictor back toward
the interpolator.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.linalg.lapack import dpocon

from . import linalg
from .design import lhd
from .exceptions import (
    CorruptFile,
    DimensionMismatch,
    DomainError,
    NumericalIntegrityError,
    RankDeficientBasis,
    SchemaVersionMismatch,
    SurrogateError,
    TooFewPoints,
)
from .kernels import CorrelationSpec, CorrEvaluator, Design, corr_matrix, cross_corr_many
from .rng import derive_seed, spawn_rng

MODEL_SCHEMA_VERSION = 1
MEAN_MODES = ("simple", "ordinary", "universal")

#: Hard floor of the noisy-model nugget search space.
NUGGET_SEARCH_MIN = 1e-8

_HUGE = 1e300


@dataclass(frozen=True)
class FitOptions:
    """Knobs of the multistart deviance optimization.

    The multistart sizes are per optimization dimension: ``candidates_per_dim``
    space-filling points are screened, the ``keep_per_dim`` best are clustered
    into ``clusters_per_dim`` groups, and one bounded quasi-Newton search runs
    from each cluster center (plus one from the single best candidate).
    """

    kappa_max: float = linalg.DEFAULT_KAPPA_MAX
    candidates_per_dim: int = 200
    keep_per_dim: int = 80
    clusters_per_dim: int = 2
    beta_box: tuple = (-2.0, 3.0)
    step_tol: float = 1e-6
    max_iterations: int = 100
    predict_m: int = 1
    seed: int = 0
    workers: int = 1
    fd_step: float = 1e-4
    nugget_max: float = 1.0

    def __post_init__(self):
        if not (self.candidates_per_dim >= self.keep_per_dim >= self.clusters_per_dim >= 1):
            raise DomainError("need candidates_per_dim >= keep_per_dim >= clusters_per_dim >= 1")
        if not self.beta_box[0] < self.beta_box[1]:
            raise DomainError("beta search box must have lo < hi")
        if self.nugget_max < NUGGET_SEARCH_MIN:
            raise DomainError(f"nugget_max must be >= {NUGGET_SEARCH_MIN}")


@dataclass(frozen=True)
class PredictionResult:
    """Predictive mean and variance at a single query point."""

    mean: float
    variance: float
    clamped: bool = False


@dataclass
class GpModel:
    """A fitted scalar GP surrogate.  Treat as immutable once returned."""

    x: Design
    y: np.ndarray
    spec: CorrelationSpec
    mu_hat: float
    sigma2_hat: float
    nugget: float
    mean_mode: str
    chol_factor: np.ndarray
    deviance_at_fit: float
    kappa: float
    gamma_hat: np.ndarray | None = None
    basis: tuple | None = None
    basis_matrix: np.ndarray | None = None
    degenerate: bool = False
    noise_variance: float | None = None
    bounds: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def d(self) -> int:
        return self.x.d


# ---------------------------------------------------------------------------
# closed-form profiled estimates
# ---------------------------------------------------------------------------


def mu_hat(rinv_apply: Callable, y) -> float:
    """Profiled constant mean ``(1' R^-1 1)^-1 (1' R^-1 y)``.

    ``rinv_apply`` maps a vector to ``R^-1 v`` (two triangular solves from a
    Cholesky factor); no explicit inverse is ever formed.
    """
    y = np.asarray(y, dtype=float)
    ones = np.ones_like(y)
    return float(ones @ rinv_apply(y)) / float(ones @ rinv_apply(ones))


def sigma2_hat(rinv_apply: Callable, y, mu: float) -> float:
    """Profiled process variance ``(y-mu)' R^-1 (y-mu) / n`` (>= 0)."""
    y = np.asarray(y, dtype=float)
    z = y - mu
    return max(0.0, float(z @ rinv_apply(z)) / y.size)


def _profile(l: np.ndarray, y: np.ndarray, mean_mode: str, basis_matrix=None):
    """Profiled (mu, gamma, sigma2, residual) given the factor of R+delta*I."""
    n = y.size
    if mean_mode == "simple":
        sy = linalg.solve_chol(l, y)
        sigma2 = max(0.0, float(y @ sy) / n)
        return 0.0, None, sigma2, y
    if mean_mode == "ordinary":
        ones = np.ones(n)
        s1 = linalg.solve_chol(l, ones)
        sy = linalg.solve_chol(l, y)
        mu = float(ones @ sy) / float(ones @ s1)
        z = y - mu
        sigma2 = max(0.0, float(z @ (sy - mu * s1)) / n)
        return mu, None, sigma2, z
    f = basis_matrix
    sy = linalg.solve_chol(l, y)
    sf = linalg.solve_chol(l, f)
    gamma = np.linalg.solve(f.T @ sf, f.T @ sy)
    z = y - f @ gamma
    sigma2 = max(0.0, float(z @ (sy - sf @ gamma)) / n)
    return None, gamma, sigma2, z


# ---------------------------------------------------------------------------
# conditioning policy
# ---------------------------------------------------------------------------


def _kappa_estimate(a: np.ndarray, l: np.ndarray) -> float:
    """Cheap 1-norm condition estimate from an existing Cholesky factor."""
    anorm = float(np.abs(a).sum(axis=0).max())
    rcond, info = dpocon(l, anorm, uplo=b"L")
    if info != 0 or rcond <= 0.0:
        return float("inf")
    return 1.0 / float(rcond)


def _stabilized_cholesky(r: np.ndarray, kappa_max: float, nugget_request: float = 0.0):
    """Factor ``R + delta I`` with ``delta = max(nugget_request, delta_lb(R))``.

    Fast path: when the (possibly pre-inflated) matrix factors and a cheap
    condition estimate clears the cap with 4x headroom, no eigenvalues are
    computed.  Otherwise the exact spectrum decides the minimal nugget.
    Returns (factor, delta), or (None, delta) if factorization keeps failing.
    """
    n = r.shape[0]
    base = r if nugget_request == 0.0 else r + nugget_request * np.eye(n)
    try:
        l = np.linalg.cholesky(base)
    except np.linalg.LinAlgError:
        l = None
    # kappa_1 >= kappa_2 for symmetric matrices, so an estimate comfortably
    # below the cap certifies the 2-norm condition as well.
    if l is not None and _kappa_estimate(base, l) <= kappa_max / 4.0:
        return l, float(nugget_request)
    eigs = np.linalg.svd(r, compute_uv=False, hermitian=True)
    delta = max(float(nugget_request), linalg.nugget_lower_bound(eigs, kappa_max))
    if delta == nugget_request and l is not None:
        return l, float(nugget_request)
    trial = delta
    for _ in range(4):
        try:
            return np.linalg.cholesky(r + trial * np.eye(n)), trial
        except np.linalg.LinAlgError:
            trial = trial * 10.0 if trial > 0.0 else max(float(eigs[0]) * 1e-15, 1e-15)
    return None, trial


@dataclass(frozen=True)
class _Evaluation:
    dev: float
    mu: float | None
    gamma: np.ndarray | None
    sigma2: float
    nugget: float
    factor: np.ndarray | None


def _evaluate_at(
    spec: CorrelationSpec,
    x: Design,
    y: np.ndarray,
    kappa_max: float,
    mean_mode: str,
    basis_matrix=None,
    nugget_request: float = 0.0,
    r: np.ndarray | None = None,
) -> _Evaluation:
    if r is None:
        r = corr_matrix(spec, x)
    l, delta = _stabilized_cholesky(r, kappa_max, nugget_request)
    if l is None:
        return _Evaluation(math.inf, None, None, math.nan, delta, None)
    mu, gamma, sigma2, _ = _profile(l, y, mean_mode, basis_matrix)
    n = y.size
    with np.errstate(divide="ignore"):
        dev = linalg.log_det(l) + n * float(np.log(sigma2)) + n
    return _Evaluation(dev, mu, gamma, sigma2, delta, l)


def deviance(
    beta,
    x: Design,
    y,
    spec_template: CorrelationSpec,
    kappa_max: float = linalg.DEFAULT_KAPPA_MAX,
    nugget: float | None = None,
    mean_mode: str = "ordinary",
    basis_matrix=None,
) -> float:
    """Profiled deviance (-2 log likelihood up to a fixed additive constant).

    ``log|R_delta| + n log sigma2_hat + n`` with the profiled mean and
    variance substituted and delta from the conditioning policy (or
    ``max(nugget, policy floor)`` when an explicit nugget is requested).
    Returns +inf if factorization fails even after the nugget floor.
    """
    y = np.asarray(y, dtype=float)
    spec = spec_template.with_beta(beta)
    ev = _evaluate_at(spec, x, y, kappa_max, mean_mode, basis_matrix,
                      nugget_request=0.0 if nugget is None else float(nugget))
    return ev.dev


# ---------------------------------------------------------------------------
# multistart optimization machinery
# ---------------------------------------------------------------------------


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator, iters: int = 25) -> np.ndarray:
    """Lloyd's algorithm with k-means++ style seeding; ties go to the lowest index."""
    n = points.shape[0]
    k = min(k, n)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j:] = centers[0]
            break
        centers[j] = points[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    for _ in range(iters):
        dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        assign = np.argmin(dist, axis=1)
        moved = False
        for j in range(k):
            members = points[assign == j]
            if len(members):
                c = members.mean(axis=0)
                if not np.array_equal(c, centers[j]):
                    centers[j] = c
                    moved = True
        if not moved:
            break
    return centers


def _central_diff_grad(fun: Callable, v: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(v)
    for i in range(v.size):
        step = np.zeros_like(v)
        step[i] = h
        g[i] = (fun(v + step) - fun(v - step)) / (2.0 * h)
    return g


def _multistart_minimize(objective: Callable, box: Sequence, opts: FitOptions):
    """Screen, cluster, polish.  Deterministic for a fixed opts.seed.

    Returns (best_v, best_value); the best value never exceeds the objective
    at any screened candidate because the best candidate is itself one of
    the local-search starts.
    """
    dims = len(box)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    n_cand = opts.candidates_per_dim * dims
    n_keep = min(opts.keep_per_dim * dims, n_cand)
    n_clusters = min(opts.clusters_per_dim * dims, n_keep)

    unit = lhd(n_cand, dims, seed=derive_seed(opts.seed, 1)).points
    cand = lo + unit * (hi - lo)
    vals = np.array([objective(c) for c in cand])
    order = np.argsort(vals, kind="stable")
    kept = cand[order[:n_keep]]
    centers = _kmeans(kept, n_clusters, spawn_rng(opts.seed, 2))
    starts = np.vstack([centers, cand[order[0]][None, :]])

    def _polish(item):
        idx, start = item
        res = scipy.optimize.minimize(
            objective,
            x0=start,
            method="L-BFGS-B",
            jac=lambda v: _central_diff_grad(objective, v, opts.fd_step),
            bounds=list(box),
            options={"maxiter": opts.max_iterations, "gtol": opts.step_tol},
        )
        return float(res.fun), idx, np.asarray(res.x, dtype=float)

    items = list(enumerate(starts))
    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(_polish, items))
    else:
        results = [_polish(it) for it in items]
    best = min(results, key=lambda t: (t[0], t[1]))
    return best[2], best[0]


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _default_template(d: int) -> CorrelationSpec:
    return CorrelationSpec(beta=np.zeros(d), family="powexp")


def _as_design(x) -> Design:
    return x if isinstance(x, Design) else Design(x)


def _validate_training(x, y, min_n: int):
    x = _as_design(x)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != x.n:
        raise DimensionMismatch(f"{x.n} design points but {y.size} responses")
    if x.n < min_n:
        raise TooFewPoints(f"need at least {min_n} points, got {x.n}")
    if not np.all(np.isfinite(y)):
        raise DomainError("responses contain NaN or infinity")
    return x, y


def _model_kappa(spec: CorrelationSpec, x: Design, nugget: float) -> float:
    eigs = np.linalg.svd(corr_matrix(spec, x), compute_uv=False, hermitian=True)
    lo = float(eigs[-1]) + nugget
    if lo <= 0.0:
        return float("inf")
    return (float(eigs[0]) + nugget) / lo


def _assemble(spec, x, y, opts, mean_mode, basis, basis_matrix, ev: _Evaluation,
              degenerate=False, noisy=False) -> GpModel:
    if ev.factor is None:
        raise SurrogateError("correlation matrix could not be factorized at the fitted parameters")
    mu = 0.0 if ev.mu is None else float(ev.mu)
    model = GpModel(
        x=x,
        y=y,
        spec=spec,
        mu_hat=mu,
        sigma2_hat=float(ev.sigma2),
        nugget=float(ev.nugget),
        mean_mode=mean_mode,
        chol_factor=ev.factor,
        deviance_at_fit=float(ev.dev),
        kappa=_model_kappa(spec, x, ev.nugget),
        gamma_hat=None if ev.gamma is None else np.asarray(ev.gamma, dtype=float),
        basis=basis,
        basis_matrix=basis_matrix,
        degenerate=degenerate,
    )
    if noisy:
        model.noise_variance = model.nugget * model.sigma2_hat
    return model


def _fit_common(x, y, spec_template, opts, mean_mode, basis, basis_matrix, noisy):
    opts = opts or FitOptions()
    template = spec_template or _default_template(x.d)
    if template.d != x.d:
        raise DimensionMismatch(f"spec has dimension {template.d}, design has {x.d}")

    if float(np.ptp(y)) == 0.0:
        # Constant response: any beta is admissible, the profiled variance is
        # 0 and the surrogate is flat.  Flagged rather than rejected.
        mid = 0.5 * (opts.beta_box[0] + opts.beta_box[1])
        spec = template.with_beta(np.full(x.d, mid))
        ev = _evaluate_at(spec, x, y, opts.kappa_max, mean_mode, basis_matrix,
                          nugget_request=NUGGET_SEARCH_MIN if noisy else 0.0)
        return _assemble(spec, x, y, opts, mean_mode, basis, basis_matrix, ev,
                         degenerate=True, noisy=noisy)

    d = x.d
    box = [tuple(opts.beta_box)] * d
    if noisy:
        box = box + [(math.log10(NUGGET_SEARCH_MIN), math.log10(opts.nugget_max))]
    corr_of = CorrEvaluator(template, x)

    def objective(v):
        spec = template.with_beta(v[:d])
        req = 10.0 ** float(v[d]) if noisy else 0.0
        ev = _evaluate_at(spec, x, y, opts.kappa_max, mean_mode, basis_matrix,
                          nugget_request=req, r=corr_of(v[:d]))
        return min(ev.dev, _HUGE)

    best_v, _ = _multistart_minimize(objective, box, opts)
    spec = template.with_beta(best_v[:d])
    req = 10.0 ** float(best_v[d]) if noisy else 0.0
    ev = _evaluate_at(spec, x, y, opts.kappa_max, mean_mode, basis_matrix, nugget_request=req)
    return _assemble(spec, x, y, opts, mean_mode, basis, basis_matrix, ev, noisy=noisy)


def fit(x, y, spec_template: CorrelationSpec | None = None, opts: FitOptions | None = None,
        mean_mode: str = "ordinary") -> GpModel:
    """Fit a deterministic-simulator GP by multistart deviance minimization.

    The nugget is not estimated: each deviance evaluation applies the
    conditioning policy, so delta is 0 whenever the correlation matrix is
    healthy and exactly the stabilizing lower bound otherwise.
    Deterministic for a fixed ``opts.seed``.
    """
    if mean_mode not in ("simple", "ordinary"):
        raise DomainError("fit supports simple/ordinary means; use fit_universal for basis means")
    x, y = _validate_training(x, y, min_n=2)
    return _fit_common(x, y, spec_template, opts, mean_mode, None, None, noisy=False)


def fit_noisy(x, y, spec_template: CorrelationSpec | None = None,
              opts: FitOptions | None = None, mean_mode: str = "ordinary") -> GpModel:
    """Fit a noisy-simulator GP, estimating the noise-to-signal nugget.

    The nugget joins the optimization vector (searched on a log10 scale)
    with lower bound ``max(delta_lb, 1e-8)`` and upper bound
    ``opts.nugget_max``; the fitted predictor is a smoother, not an
    interpolator.  The estimated noise variance ``nugget * sigma2_hat`` is
    reported on the model.
    """
    if mean_mode not in ("simple", "ordinary"):
        raise DomainError("fit_noisy supports simple/ordinary means")
    x, y = _validate_training(x, y, min_n=3)
    return _fit_common(x, y, spec_template, opts, mean_mode, None, None, noisy=True)


def fit_universal(x, y, basis: Sequence[Callable], spec_template: CorrelationSpec | None = None,
                  opts: FitOptions | None = None) -> GpModel:
    """Universal kriging: mean linear in known basis functions.

    ``basis`` is the full list (f_0, ..., f_m) of callables point -> float
    with f_0 identically 1; the design matrix F must have full column rank.
    With only the constant basis this reproduces the ordinary-kriging fit
    exactly.
    """
    x, y = _validate_training(x, y, min_n=2)
    basis = tuple(basis)
    if not basis:
        raise RankDeficientBasis("need at least the constant basis function")
    f = np.column_stack([np.array([fj(p) for p in x.points], dtype=float) for fj in basis])
    if not np.allclose(f[:, 0], 1.0, atol=1e-12):
        raise DomainError("the first basis function must be identically 1")
    if np.linalg.matrix_rank(f) < f.shape[1]:
        raise RankDeficientBasis(
            f"basis design matrix has rank {np.linalg.matrix_rank(f)} < {f.shape[1]} columns"
        )
    return _fit_common(x, y, spec_template, opts, "universal", basis, f, noisy=False)


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def _residual_target(model: GpModel) -> np.ndarray:
    if model.mean_mode == "simple":
        return model.y
    if model.mean_mode == "ordinary":
        return model.y - model.mu_hat
    return model.y - model.basis_matrix @ model.gamma_hat


def _mean_offset(model: GpModel, x0s: np.ndarray) -> np.ndarray:
    if model.mean_mode == "simple":
        return np.zeros(x0s.shape[0])
    if model.mean_mode == "ordinary":
        return np.full(x0s.shape[0], model.mu_hat)
    if model.basis is None:
        raise SurrogateError("universal model was loaded without its basis callables")
    f0 = np.column_stack([np.array([fj(p) for p in x0s], dtype=float) for fj in model.basis])
    return f0 @ model.gamma_hat


def _correction_weights(model: GpModel, m: int) -> np.ndarray:
    """Solve weights after m-1 residual-correction passes (query independent).

    Pass 1 is the plain smoother ``a = (R+delta I)^-1 z``; each further pass
    predicts the current training residuals with the same smoother and adds
    the correction, so training residuals shrink monotonically and, when
    delta came purely from conditioning, converge to interpolation.
    """
    key = ("weights", m)
    if key not in model._cache:
        z = _residual_target(model)
        a = linalg.solve_chol(model.chol_factor, z)
        if m > 1:
            if "r0" not in model._cache:
                model._cache["r0"] = corr_matrix(model.spec, model.x)
            r0 = model._cache["r0"]
            for _ in range(m - 1):
                e = z - r0 @ a
                a = a + linalg.solve_chol(model.chol_factor, e)
        model._cache[key] = a
    return model._cache[key]


def predict_batch(model: GpModel, x0s, m: int = 1):
    """Vectorized prediction.

    Returns (means, variances, n_clamped).  The variance always comes from
    the single-pass formula ``sigma2 (1 - r' R_delta^-1 r)`` -- the
    iterated corrections sharpen the mean only.  Tiny negative variances
    (within -1e-10 relative of round-off) clamp to zero and are counted;
    anything more negative raises, because it signals a real defect.
    """
    if m < 1:
        raise DomainError("m must be >= 1")
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    if x0s.shape[1] != model.d:
        raise DimensionMismatch(f"query dimension {x0s.shape[1]} != model dimension {model.d}")
    r = cross_corr_many(model.spec, model.x, x0s)
    a = _correction_weights(model, m)
    means = _mean_offset(model, x0s) + r @ a
    # forward solve only: the quadratic form ||L^-1 r||^2 is nonnegative by
    # construction, so variance can only undershoot 0 by round-off in the
    # final subtraction.
    v = scipy.linalg.solve_triangular(model.chol_factor, r.T, lower=True, check_finite=False)
    quad = np.sum(v * v, axis=0)
    variances = model.sigma2_hat * (1.0 - quad)
    tol = 1e-10 * max(1.0, model.sigma2_hat)
    too_negative = variances < -tol
    if np.any(too_negative):
        raise NumericalIntegrityError(
            f"predictive variance fell below -{tol:g} at {int(np.sum(too_negative))} point(s)"
        )
    clamp = variances < 0.0
    variances = np.where(clamp, 0.0, variances)
    return means, variances, int(np.sum(clamp))


def predict(model: GpModel, x0, m: int = 1) -> PredictionResult:
    """BLUP mean and predictive variance at a single point.

    ``m`` is the number of smoothing-correction passes (1 = plain kriging
    predictor); see :func:`predict_batch` for the variance convention.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model.d,):
        raise DimensionMismatch(f"expected a point of dimension {model.d}, got shape {x0.shape}")
    means, variances, n_clamped = predict_batch(model, x0[None, :], m=m)
    return PredictionResult(mean=float(means[0]), variance=float(variances[0]),
                            clamped=bool(n_clamped))


def training_residuals(model: GpModel, m: int = 1) -> np.ndarray:
    """y_i - yhat(x_i) at the training points under m correction passes."""
    means, _, _ = predict_batch(model, model.x.points, m=m)
    return model.y - means


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _spec_to_doc(spec: CorrelationSpec) -> dict:
    return {
        "family": spec.family,
        "beta": spec.beta.tolist(),
        "power": None if spec.power is None else spec.power.tolist(),
        "nu": spec.nu,
        "tau": None if spec.tau is None else spec.tau.tolist(),
    }


def _spec_from_doc(doc: dict) -> CorrelationSpec:
    return CorrelationSpec(
        beta=np.asarray(doc["beta"], dtype=float),
        family=doc["family"],
        power=None if doc["power"] is None else np.asarray(doc["power"], dtype=float),
        nu=doc["nu"],
        tau=None if doc["tau"] is None else np.asarray(doc["tau"], dtype=float),
    )


def model_to_doc(model: GpModel) -> dict:
    if model.mean_mode == "universal":
        raise SurrogateError("universal-mean models hold arbitrary basis callables and do not serialize")
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "model_type": "gp",
        **_spec_to_doc(model.spec),
        "mean_mode": model.mean_mode,
        "mu_hat": model.mu_hat,
        "sigma2_hat": model.sigma2_hat,
        "nugget": model.nugget,
        "gamma_hat": None if model.gamma_hat is None else model.gamma_hat.tolist(),
        "degenerate": model.degenerate,
        "noise_variance": model.noise_variance,
        "deviance": model.deviance_at_fit,
        "kappa": model.kappa,
        "x": model.x.points.tolist(),
        "y": model.y.tolist(),
        "bounds": None if model.bounds is None else np.asarray(model.bounds, dtype=float).tolist(),
    }


def model_from_doc(doc: dict) -> GpModel:
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptFile("model document lacks a schema_version field")
    version = doc["schema_version"]
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"file uses schema version {version}, this build supports {MODEL_SCHEMA_VERSION}"
        )
    try:
        spec = _spec_from_doc(doc)
        x = Design(np.asarray(doc["x"], dtype=float))
        y = np.asarray(doc["y"], dtype=float)
        nugget = float(doc["nugget"])
        r = corr_matrix(spec, x)
        factor = np.linalg.cholesky(r + nugget * np.eye(x.n)) if nugget else np.linalg.cholesky(r)
        model = GpModel(
            x=x,
            y=y,
            spec=spec,
            mu_hat=float(doc["mu_hat"]),
            sigma2_hat=float(doc["sigma2_hat"]),
            nugget=nugget,
            mean_mode=doc["mean_mode"],
            chol_factor=factor,
            deviance_at_fit=float(doc["deviance"]),
            kappa=float(doc["kappa"]),
            gamma_hat=None if doc["gamma_hat"] is None else np.asarray(doc["gamma_hat"], dtype=float),
            degenerate=bool(doc["degenerate"]),
            noise_variance=doc["noise_variance"],
            bounds=None if doc.get("bounds") is None else np.asarray(doc["bounds"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise CorruptFile(f"model document is structurally invalid: {err}") from err
    return model


def save_model(model: GpModel, path) -> None:
    """Write a versioned JSON model document (bit-exact round trip)."""
    doc = model_to_doc(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> GpModel:
    """Read a model document written by :func:`save_model`."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise CorruptFile(f"not a valid model file: {err}") from err
    return model_from_doc(doc)
