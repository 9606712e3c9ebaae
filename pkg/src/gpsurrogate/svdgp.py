"""SVD-based surrogate for simulators with time-series output.

The L x N response matrix (rows = time steps, columns = runs) is factored
as ``Y = U D V'``; the emulator keeps the first p left singular vectors
scaled by their singular values as a fixed orthogonal basis
``b_i = d_i u_i`` and fits one independent zero-mean scalar GP to each
coefficient series ``c_i(x_j) = V[j, i]``.  A prediction assembles
``sum_i c_i(x0) b_i`` plus independent residual noise whose variance is
the mean squared truncation residual.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    AlignmentError,
    AllZeroSpectrum,
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
)
from .gpmodel import FitOptions, GpModel, fit, predict
from .kernels import CorrelationSpec, Design
from .rng import derive_seed


def _check_response(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] < 2 or y.shape[1] < 2:
        raise DimensionMismatch(f"response matrix must be L x N with L, N >= 2, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError("response matrix contains NaN or infinity")
    return y


def decompose(y):
    """Thin SVD of a response matrix with a reproducible sign convention.

    Returns (U, d, V) with ``y = U @ diag(d) @ V.T``; each left vector's
    first nonzero component is forced nonnegative (flipping u_i and v_i
    together leaves the product unchanged), so repeated decompositions of
    the same matrix agree exactly.
    """
    y = _check_response(y)
    try:
        u, d, vt = np.linalg.svd(y, full_matrices=False)
    except np.linalg.LinAlgError as err:
        raise ConvergenceFailure(f"SVD of the response matrix failed: {err}") from err
    v = vt.T
    u = u.copy()
    for i in range(d.size):
        nonzero = np.nonzero(np.abs(u[:, i]) > 1e-12)[0]
        if nonzero.size and u[nonzero[0], i] < 0.0:
            u[:, i] = -u[:, i]
            v[:, i] = -v[:, i]
    return u, d, v


def select_p(d, frac: float) -> int:
    """Number of basis vectors holding at least ``frac`` of the spectrum energy.

    Smallest p with ``sum_{i<=p} d_i^2 / sum_i d_i^2 >= frac`` (with a
    1e-12 relative slack so exact-fraction cases are not lost to rounding);
    ``frac = 1`` returns the numerical rank.
    """
    d = np.asarray(d, dtype=float)
    if d.size == 0 or float(d.max()) <= 0.0:
        raise AllZeroSpectrum("singular-value spectrum is identically zero")
    if not 0.0 < frac <= 1.0:
        raise DomainError(f"frac must lie in (0, 1], got {frac!r}")
    if frac == 1.0:
        tol = float(d[0]) * d.size * np.finfo(float).eps
        return int(np.sum(d > tol))
    energy = np.cumsum(d**2)
    target = frac * energy[-1] * (1.0 - 1e-12)
    return int(np.searchsorted(energy, target) + 1)


@dataclass
class SvdGpModel:
    """Dynamic surrogate: fixed time basis plus p coefficient GPs."""

    x: Design
    basis: np.ndarray              # (L, p), column i = d_i * u_i
    coef_models: tuple             # p zero-mean GpModels
    residual_var: float
    singular_values: np.ndarray    # full spectrum, length min(N, L)
    mean_series: np.ndarray | None = None

    @property
    def p(self) -> int:
        return self.basis.shape[1]

    @property
    def series_length(self) -> int:
        return self.basis.shape[0]


def fit_svdgp(
    x,
    y,
    frac: float = 0.95,
    spec_template: CorrelationSpec | None = None,
    opts: FitOptions | None = None,
    center: bool = False,
) -> SvdGpModel:
    """Fit the dynamic surrogate to an L x N response matrix.

    Column j of ``y`` is the series observed at design row j.  The number
    of retained directions comes from :func:`select_p`; the coefficient
    GPs are fitted independently (concurrently when ``opts.workers`` > 1)
    with per-index derived seeds, so the result does not depend on
    scheduling.  ``center=True`` removes the per-time-step mean series
    before the decomposition and restores it at prediction.
    """
    x = x if isinstance(x, Design) else Design(x)
    y = _check_response(y)
    if y.shape[1] != x.n:
        raise AlignmentError(f"{y.shape[1]} response columns but {x.n} design rows")
    opts = opts or FitOptions()

    mean_series = None
    work = y
    if center:
        mean_series = y.mean(axis=1)
        work = y - mean_series[:, None]

    u, d, v = decompose(work)
    p = select_p(d, frac)
    basis = u[:, :p] * d[:p]

    residual = work - basis @ v[:, :p].T
    residual_var = float(np.mean(residual**2))

    def _fit_one(i: int) -> GpModel:
        coef_opts = replace(opts, seed=derive_seed(opts.seed, 11, i), workers=1)
        return fit(x, v[:, i], spec_template=spec_template, opts=coef_opts, mean_mode="simple")

    indices = list(range(p))
    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            models = list(pool.map(_fit_one, indices))
    else:
        models = [_fit_one(i) for i in indices]

    return SvdGpModel(
        x=x,
        basis=basis,
        coef_models=tuple(models),
        residual_var=residual_var,
        singular_values=d,
        mean_series=mean_series,
    )


def predict_svdgp(model: SvdGpModel, x0):
    """Predictive mean series and pointwise variance series at one input.

    ``mean_t = sum_i c_i(x0) basis[t, i]`` and, because the coefficient
    GPs and the residual noise are independent,
    ``var_t = sum_i s_i^2(x0) basis[t, i]^2 + residual_var``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model.x.d,):
        raise DimensionMismatch(f"expected a point of dimension {model.x.d}, got shape {x0.shape}")
    coef_mean = np.empty(model.p)
    coef_var = np.empty(model.p)
    for i, gp in enumerate(model.coef_models):
        res = predict(gp, x0)
        coef_mean[i] = res.mean
        coef_var[i] = res.variance
    mean = model.basis @ coef_mean
    if model.mean_series is not None:
        mean = mean + model.mean_series
    variance = (model.basis**2) @ coef_var + model.residual_var
    return mean, variance


def svdgp_to_doc(model: SvdGpModel) -> dict:
    """Serializable document: the scalar-GP schema plus basis/spectrum blocks."""
    from .gpmodel import MODEL_SCHEMA_VERSION, model_to_doc

    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "model_type": "svdgp",
        "basis": model.basis.tolist(),
        "singular_values": model.singular_values.tolist(),
        "residual_var": model.residual_var,
        "mean_series": None if model.mean_series is None else model.mean_series.tolist(),
        "x": model.x.points.tolist(),
        "coefficient_models": [model_to_doc(m) for m in model.coef_models],
    }


def svdgp_from_doc(doc: dict) -> SvdGpModel:
    from .exceptions import CorruptFile, SchemaVersionMismatch
    from .gpmodel import MODEL_SCHEMA_VERSION, model_from_doc

    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptFile("model document lacks a schema_version field")
    if doc["schema_version"] != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"file uses schema version {doc['schema_version']}, this build supports {MODEL_SCHEMA_VERSION}"
        )
    try:
        return SvdGpModel(
            x=Design(np.asarray(doc["x"], dtype=float)),
            basis=np.asarray(doc["basis"], dtype=float),
            coef_models=tuple(model_from_doc(d) for d in doc["coefficient_models"]),
            residual_var=float(doc["residual_var"]),
            singular_values=np.asarray(doc["singular_values"], dtype=float),
            mean_series=None if doc["mean_series"] is None else np.asarray(doc["mean_series"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise CorruptFile(f"svdgp model document is structurally invalid: {err}") from err


def save_svdgp(model: SvdGpModel, path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(svdgp_to_doc(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_svdgp(path) -> SvdGpModel:
    import json

    from .exceptions import CorruptFile

    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise CorruptFile(f"not a valid model file: {err}") from err
    return svdgp_from_doc(doc)


def reconstruction_error(y, p: int) -> float:
    """Max-abs training reconstruction error using the first p directions."""
    y = _check_response(y)
    u, d, v = decompose(y)
    p = int(p)
    if not 1 <= p <= d.size:
        raise DomainError(f"p must lie in [1, {d.size}]")
    approx = (u[:, :p] * d[:p]) @ v[:, :p].T
    return float(np.max(np.abs(approx - y)))
