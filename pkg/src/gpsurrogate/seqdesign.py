"""Expected-improvement sequential design for global minimization.

Starting from a small space-filling design, points are added one at a time
at the maximizer of the expected improvement
``E[max(f_min - y(x), 0)]`` over a fresh candidate design, where the
expectation runs over the surrogate's normal predictive distribution.
The criterion trades off exploitation (low predicted mean) against
exploration (high predictive uncertainty), so the search does not stall in
a local basin the way a pure descent on the predicted mean would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .design import lhd
from .exceptions import EmptyCandidates, SimulatorFailure
from .gpmodel import FitOptions, GpModel, fit, predict_batch
from .kernels import CorrelationSpec, Design
from .rng import derive_seed
from .simulators import Simulator

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def expected_improvement(mean, sd, fmin):
    """Closed-form expected improvement under a normal predictive law.

    ``EI = (fmin - mean) Phi(u) + sd phi(u)`` with ``u = (fmin - mean)/sd``;
    at sd = 0 it degenerates to ``max(fmin - mean, 0)``.  Never negative,
    and strictly increasing in sd when the mean offers no improvement.
    Scalar or array arguments broadcast elementwise.
    """
    mean_a = np.asarray(mean, dtype=float)
    sd_a = np.asarray(sd, dtype=float)
    if np.any(sd_a < 0.0):
        raise ValueError("predictive standard deviation must be >= 0")
    fmin_a = np.asarray(fmin, dtype=float)
    gap = fmin_a - mean_a
    with np.errstate(divide="ignore", invalid="ignore"):
        u = gap / sd_a
        ei = gap * ndtr(u) + sd_a * np.exp(-0.5 * u * u) / _SQRT_2PI
    ei = np.where(sd_a == 0.0, np.maximum(gap, 0.0), ei)
    ei = np.maximum(ei, 0.0)
    if np.ndim(mean) == 0 and np.ndim(sd) == 0 and np.ndim(fmin) == 0:
        return float(ei)
    return ei


@dataclass(frozen=True)
class EiStep:
    step: int
    point: np.ndarray
    ei: float
    y: float
    fmin: float


@dataclass
class EiState:
    """Ledger of a sequential-minimization run."""

    x: np.ndarray                # evaluated inputs, one row per run
    y: np.ndarray                # responses in evaluation order
    fmin: float                  # running minimum of y
    n0: int
    n_total: int
    trace: list = field(default_factory=list)
    status: str = "running"      # running | done | stalled

    @property
    def best_point(self) -> np.ndarray:
        return self.x[int(np.argmin(self.y))]


def ei_step(state: EiState, model: GpModel, candidates: Design):
    """Pick the candidate with maximal expected improvement.

    Ties break at the lowest candidate index.  At already-evaluated points
    an interpolating surrogate has zero predictive sd and zero gap, so
    their EI is 0 and duplicates are never chosen while some distinct
    candidate still has positive EI.  A maximal EI of exactly 0 means the
    step is stalled; the caller decides what to do with that.
    """
    if candidates.n < 1:
        raise EmptyCandidates("candidate design is empty")
    means, variances, _ = predict_batch(model, candidates.points)
    ei = expected_improvement(means, np.sqrt(variances), state.fmin)
    j = int(np.argmax(ei))
    return candidates.points[j].copy(), float(ei[j])


def _evaluate(sim: Simulator, point: np.ndarray, state: EiState) -> float:
    try:
        return float(sim.evaluate(point))
    except Exception as err:
        state.status = "aborted"
        raise SimulatorFailure(f"simulator {sim.name!r} failed at {point.tolist()}: {err}",
                               state=state) from err


def ei_optimize(
    sim: Simulator,
    n0: int,
    n_total: int,
    candidate_count: int = 500,
    opts: FitOptions | None = None,
    spec_template: CorrelationSpec | None = None,
) -> EiState:
    """Sequential minimization of a simulator with an EI acquisition loop.

    An n0-point Latin hypercube seeds the surrogate; each iteration refits
    the GP from scratch (reproducibility beats warm starts at this scale),
    draws a fresh ``candidate_count``-point Latin hypercube, evaluates the
    simulator at the EI maximizer, and updates the running minimum.  Stops
    at ``n_total`` evaluations, or earlier with status ``stalled`` when
    every candidate has zero EI.  Deterministic for a fixed ``opts.seed``.
    """
    if not 2 <= n0 <= n_total:
        raise ValueError(f"need 2 <= n0 <= n_total, got n0={n0}, n_total={n_total}")
    opts = opts or FitOptions()

    x0 = lhd(n0, sim.dim, seed=derive_seed(opts.seed, 23, 0)).points
    state = EiState(x=x0, y=np.empty(0), fmin=math.inf, n0=n0, n_total=n_total)
    ys = [_evaluate(sim, p, state) for p in x0]
    state.y = np.array(ys)
    state.fmin = float(state.y.min())

    for k in range(1, n_total - n0 + 1):
        fit_opts = replace(opts, seed=derive_seed(opts.seed, 23, 2 * k))
        model = fit(Design(state.x), state.y, spec_template=spec_template, opts=fit_opts)
        candidates = lhd(candidate_count, sim.dim, seed=derive_seed(opts.seed, 23, 2 * k + 1))
        point, ei = ei_step(state, model, candidates)
        if ei == 0.0:
            state.status = "stalled"
            return state
        y_new = _evaluate(sim, point, state)
        state.x = np.vstack([state.x, point[None, :]])
        state.y = np.append(state.y, y_new)
        state.fmin = min(state.fmin, y_new)
        state.trace.append(EiStep(step=k, point=point, ei=ei, y=y_new, fmin=state.fmin))

    state.status = "done"
    return state
