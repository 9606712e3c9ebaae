"""Built-in test simulators.

Deterministic test functions standing in for expensive computer models:
a wavy 1-d function, the 6-d Hartmann minimization benchmark, and a
low-rank time-series generator for exercising the dynamic (SVD-based)
surrogate.  All are pure functions of their inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DomainError, InvalidLength


@dataclass(frozen=True)
class Simulator:
    """A named evaluatable: point -> scalar, or point -> series for dynamic ones."""

    name: str
    dim: int
    evaluate: Callable
    deterministic: bool = True
    series_length: int | None = None


def _check_unit_box(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1) if d == 1 else x.reshape(-1, d)
    if flat.size and (flat.min() < 0.0 or flat.max() > 1.0):
        raise DomainError(f"inputs must lie in [0,1]^{d}")
    return x


def onedim_test(x):
    """Wavy 1-d test response ``log(x + 0.1) + sin(5 pi x)`` on [0, 1].

    Accepts a scalar or an array and evaluates elementwise.
    """
    arr = _check_unit_box(x, 1)
    out = np.log(arr + 0.1) + np.sin(5.0 * np.pi * arr)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


# Standard 4-term Hartmann coefficients in 6 dimensions.  Embedded as data
# constants and guarded by a checksum so silent corruption cannot skew
# benchmark results.
_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)
_H6_SHA256 = "ee508a700ed1786dc8b3eaf4346e002eb45db68a6e2d5e659d35c5ac01aa3df8"


def _hartman6_checksum() -> str:
    h = hashlib.sha256()
    for block in (_H6_ALPHA, _H6_A, _H6_P):
        h.update(np.ascontiguousarray(block, dtype=np.float64).tobytes())
    return h.hexdigest()


def verify_hartman6_constants() -> None:
    digest = _hartman6_checksum()
    if digest != _H6_SHA256:
        raise RuntimeError(f"Hartmann-6 coefficient tables corrupted (sha256 {digest})")


verify_hartman6_constants()


def hartman6(x):
    """Six-dimensional Hartmann test function on [0,1]^6 (to be minimized).

    ``f(x) = -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2)``; the global
    minimum is approximately -3.32237.  Accepts a single point of shape (6,)
    or a batch of shape (m, 6).
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.shape[-1] != 6:
        raise DomainError(f"hartman6 expects 6 coordinates, got {pts.shape[-1]}")
    _check_unit_box(pts, 6)
    # (m, 4) exponents
    sq = (pts[:, None, :] - _H6_P[None, :, :]) ** 2
    inner = np.einsum("ij,mij->mi", _H6_A, sq)
    vals = -(np.exp(-inner) @ _H6_ALPHA)
    return float(vals[0]) if single else vals


def dynamic_toy(x, length: int):
    """Low-rank time-series simulator for the dynamic surrogate.

    For t = 1..L:
    ``y_t = x1 sin(2 pi t/L) + (1 - x1) cos(2 pi x2 t/L)`` with one extra
    additive term ``x_k sin(2 pi (k-1) t/L)`` per input beyond the second
    (for a 1-d input the cosine runs at fixed unit frequency).  The
    response matrix over any design therefore concentrates its energy in a
    handful of singular directions.
    """
    if length < 2:
        raise InvalidLength(f"series length must be >= 2, got {length}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise DomainError("input must be a single point with q >= 1 coordinates")
    _check_unit_box(x, x.size)
    t = np.arange(1, length + 1) / length
    x2 = x[1] if x.size >= 2 else 1.0
    y = x[0] * np.sin(2.0 * np.pi * t) + (1.0 - x[0]) * np.cos(2.0 * np.pi * x2 * t)
    for k in range(2, x.size):
        y = y + x[k] * np.sin(2.0 * np.pi * k * t)
    return y


def get_simulator(name: str, length: int = 50, qdim: int = 2) -> Simulator:
    """Look up a built-in simulator by CLI name."""
    if name == "onedim":
        return Simulator(name="onedim", dim=1, evaluate=lambda p: onedim_test(float(np.atleast_1d(p)[0])))
    if name == "hartman6":
        return Simulator(name="hartman6", dim=6, evaluate=lambda p: hartman6(np.asarray(p, float)))
    if name == "dynamic-toy":
        return Simulator(
            name="dynamic-toy",
            dim=qdim,
            evaluate=lambda p: dynamic_toy(np.asarray(p, float), length),
            series_length=length,
        )
    raise DomainError(f"unknown simulator {name!r}; available: onedim, hartman6, dynamic-toy")
