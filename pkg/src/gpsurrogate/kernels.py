"""Correlation functions and their hyperparameter reparametrizations.

Three product-form families over [0,1]^d inputs:

* ``powexp`` -- power-exponential ``prod_k exp(-theta_k |h_k|^p_k)`` with
  per-coordinate powers p_k in [1, 2] (p_k = 2 is the Gaussian kernel).
* ``matern`` -- Matern with half-integer smoothness nu in {0.5, 1.5, 2.5},
  evaluated through the closed-form expressions, with theta_k multiplying
  the distance (theta as an inverse length; note that parts of the
  geostatistics literature use the reciprocal convention).
* ``compact`` -- compactly supported kernel
  ``(1 - h/tau) cos(pi h/tau) + sin(pi h/tau)/pi`` for h < tau, exactly 0
  for h >= tau, so small tau sparsifies the correlation matrix.

The canonical internal storage for the rate hyperparameters is
``beta = log10(theta)``, the parametrization on which the deviance is
easiest to optimize; ``lambda = 1/theta`` (correlation length) and
``rho = exp(-theta/4)`` exist as conversion views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DimensionMismatch, DomainError, UnsupportedNu

FAMILIES = ("powexp", "matern", "compact")
MATERN_NU_VALUES = (0.5, 1.5, 2.5)

#: Default power for the power-exponential family.  Backing off from the
#: Gaussian kernel's p=2 to 1.95 substantially reduces the probability of
#: an ill-conditioned correlation matrix at negligible cost in smoothness.
DEFAULT_POWER = 1.95


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Design:
    """n points in [0,1]^d, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionMismatch(f"design must be a nonempty 2-d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("design contains non-finite coordinates")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise DomainError("design coordinates must lie in [0, 1]")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class CorrelationSpec:
    """Kernel family plus hyperparameters, with theta stored as beta = log10 theta."""

    beta: np.ndarray
    family: str = "powexp"
    power: np.ndarray | None = None
    nu: float | None = None
    tau: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        beta = _readonly(np.atleast_1d(self.beta))
        if beta.ndim != 1 or beta.size < 1:
            raise DimensionMismatch("beta must be a 1-d vector with at least one entry")
        if not np.all(np.isfinite(beta)):
            raise DomainError("beta entries must be finite")
        object.__setattr__(self, "beta", beta)
        d = beta.size

        if self.family == "powexp":
            power = np.full(d, DEFAULT_POWER) if self.power is None else np.atleast_1d(np.asarray(self.power, float))
            if power.size == 1 and d > 1:
                power = np.full(d, float(power[0]))
            if power.size != d:
                raise DimensionMismatch(f"power has {power.size} entries, expected {d}")
            if np.any(power < 1.0) or np.any(power > 2.0):
                raise DomainError("powers must lie in [1, 2]")
            object.__setattr__(self, "power", _readonly(power))
        elif self.power is not None:
            raise DomainError(f"power applies to the powexp family only, not {self.family!r}")

        if self.family == "matern":
            nu = 1.5 if self.nu is None else float(self.nu)
            if nu not in MATERN_NU_VALUES:
                raise UnsupportedNu(f"nu={nu!r} not supported; implemented values: {MATERN_NU_VALUES}")
            object.__setattr__(self, "nu", nu)
        elif self.nu is not None:
            raise DomainError(f"nu applies to the matern family only, not {self.family!r}")

        if self.family == "compact":
            if self.tau is None:
                raise DomainError("the compact family requires tau")
            tau = np.atleast_1d(np.asarray(self.tau, float))
            if tau.size == 1 and d > 1:
                tau = np.full(d, float(tau[0]))
            if tau.size != d:
                raise DimensionMismatch(f"tau has {tau.size} entries, expected {d}")
            if np.any(tau <= 0.0):
                raise DomainError("tau entries must be > 0")
            object.__setattr__(self, "tau", _readonly(tau))
        elif self.tau is not None:
            raise DomainError(f"tau applies to the compact family only, not {self.family!r}")

    @property
    def d(self) -> int:
        return self.beta.size

    @property
    def theta(self) -> np.ndarray:
        return 10.0 ** self.beta

    def with_beta(self, beta) -> "CorrelationSpec":
        return replace(self, beta=np.asarray(beta, dtype=float))


# ---------------------------------------------------------------------------
# kernel evaluation
# ---------------------------------------------------------------------------


def _per_coordinate(spec: CorrelationSpec, h: np.ndarray) -> np.ndarray:
    """Per-coordinate correlation factors for absolute distances h (..., d)."""
    theta = spec.theta
    if spec.family == "powexp":
        return np.exp(-theta * h**spec.power)
    if spec.family == "matern":
        t = math.sqrt(2.0 * spec.nu) * theta * h
        if spec.nu == 0.5:
            poly = 1.0
        elif spec.nu == 1.5:
            poly = 1.0 + t
        else:  # nu == 2.5
            poly = 1.0 + t + t**2 / 3.0
        return poly * np.exp(-t)
    # compact support: exactly zero at and beyond the cutoff
    s = h / spec.tau
    inside = s < 1.0
    s = np.where(inside, s, 0.0)
    vals = (1.0 - s) * np.cos(np.pi * s) + np.sin(np.pi * s) / np.pi
    return np.where(inside, vals, 0.0)


def _product_corr(spec: CorrelationSpec, h: np.ndarray) -> np.ndarray:
    if spec.family == "powexp":
        # sum-then-exp keeps this path bitwise identical to the cached
        # evaluator used inside fitting loops
        return np.exp(-(h**spec.power) @ spec.theta)
    return np.prod(_per_coordinate(spec, h), axis=-1)


def corr(spec: CorrelationSpec, xi, xj) -> float:
    """Correlation between two points under ``spec``.

    Always 1 at zero distance; symmetric in its arguments; the product over
    coordinates of the per-coordinate kernel values.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    xj = np.atleast_1d(np.asarray(xj, dtype=float))
    if xi.shape != (spec.d,) or xj.shape != (spec.d,):
        raise DimensionMismatch(f"points must have dimension {spec.d}, got {xi.shape} and {xj.shape}")
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(xj))):
        raise DomainError("points must have finite coordinates")
    return float(_product_corr(spec, np.abs(xi - xj)))


def corr_matrix(spec: CorrelationSpec, x: Design) -> np.ndarray:
    """n x n correlation matrix of a design.

    Symmetric with unit diagonal by construction.  Duplicate design points
    are permitted here and make the matrix singular; handling that is the
    fitter's job (nugget policy), which keeps kernel evaluation pure.
    """
    pts = x.points
    if pts.shape[1] != spec.d:
        raise DimensionMismatch(f"design dimension {pts.shape[1]} != spec dimension {spec.d}")
    h = np.abs(pts[:, None, :] - pts[None, :, :])
    return _product_corr(spec, h)


def cross_corr(spec: CorrelationSpec, x: Design, x0) -> np.ndarray:
    """Length-n vector of correlations between each design point and x0."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (spec.d,):
        raise DimensionMismatch(f"query point must have dimension {spec.d}, got shape {x0.shape}")
    h = np.abs(x.points - x0[None, :])
    return _product_corr(spec, h)


def cross_corr_many(spec: CorrelationSpec, x: Design, x0s) -> np.ndarray:
    """(m, n) cross-correlation block for m query points at once."""
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    if x0s.shape[1] != spec.d:
        raise DimensionMismatch(f"query points must have dimension {spec.d}, got shape {x0s.shape}")
    h = np.abs(x0s[:, None, :] - x.points[None, :, :])
    return _product_corr(spec, h)


class CorrEvaluator:
    """Repeated correlation-matrix evaluation for a fixed design.

    Hyperparameter optimization evaluates R(theta) hundreds to thousands of
    times while the design never changes, so the pairwise distances (and
    for the power-exponential family the powered distances) are computed
    once here; each call then costs one weighted contraction and one exp.
    Results are bitwise identical to ``corr_matrix``.
    """

    def __init__(self, spec_template: CorrelationSpec, x: Design):
        if x.d != spec_template.d:
            raise DimensionMismatch(f"design dimension {x.d} != spec dimension {spec_template.d}")
        self.template = spec_template
        pts = x.points
        h = np.abs(pts[:, None, :] - pts[None, :, :])
        if spec_template.family == "powexp":
            self._h_pow = h**spec_template.power
        elif spec_template.family == "matern":
            self._h = h
        else:
            # compactly supported kernels have no rate parameter at all
            self._fixed = _product_corr(spec_template, h)

    def __call__(self, beta) -> np.ndarray:
        spec = self.template
        theta = 10.0 ** np.asarray(beta, dtype=float)
        if spec.family == "powexp":
            return np.exp(-self._h_pow @ theta)
        if spec.family == "matern":
            t = math.sqrt(2.0 * spec.nu) * theta * self._h
            if spec.nu == 0.5:
                poly = 1.0
            elif spec.nu == 1.5:
                poly = 1.0 + t
            else:
                poly = 1.0 + t + t**2 / 3.0
            return np.prod(poly * np.exp(-t), axis=-1)
        return self._fixed


# ---------------------------------------------------------------------------
# reparametrizations of the rate hyperparameter
# ---------------------------------------------------------------------------


def theta_from_beta(beta) -> np.ndarray:
    """theta = 10**beta (beta is the log10 scale the optimizer works on)."""
    beta = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(beta)):
        raise DomainError("beta must be finite")
    return 10.0**beta


def beta_from_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DomainError("theta must be > 0")
    return np.log10(theta)


def theta_from_lambda(lam) -> np.ndarray:
    """theta = 1/lambda; lambda is the correlation-length view."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0.0):
        raise DomainError("correlation lengths must be > 0")
    return 1.0 / lam


def lambda_from_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DomainError("theta must be > 0")
    return 1.0 / theta


def theta_from_rho(rho) -> np.ndarray:
    """theta = -4 log(rho); rho in (0,1), with rho near 1 meaning a smoother fit."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0) or np.any(rho >= 1.0):
        raise DomainError("rho must lie strictly inside (0, 1)")
    return -4.0 * np.log(rho)


def rho_from_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DomainError("theta must be > 0")
    return np.exp(-theta / 4.0)
