"""Gaussian-process surrogate modelling toolkit for computer-simulator data.

Fit, stabilize, and predict with GP surrogates of deterministic and noisy
simulators; emulate time-series outputs through an SVD basis; approximate
big-data fits with local nearest-neighbor models; and minimize expensive
simulators by expected-improvement sequential design.
"""

from .design import lhd, maximin_improve, scale_to_unit, unscale_from_unit
from .gpmodel import (
    FitOptions,
    GpModel,
    PredictionResult,
    deviance,
    fit,
    fit_noisy,
    fit_universal,
    load_model,
    mu_hat,
    predict,
    predict_batch,
    save_model,
    sigma2_hat,
    training_residuals,
)
from .kernels import (
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
from .linalg import (
    DEFAULT_KAPPA_MAX,
    BenchmarkReport,
    cholesky,
    condition_number,
    decomposition_benchmark,
    log_det,
    nugget_lower_bound,
    solve_chol,
    svd,
    truncated_inverse,
)
from .localgp import BigDataset, knn_neighborhood, local_fit_options, predict_local, predict_local_batch
from .seqdesign import EiState, EiStep, ei_optimize, ei_step, expected_improvement
from .simulators import Simulator, dynamic_toy, get_simulator, hartman6, onedim_test
from .svdgp import SvdGpModel, decompose, fit_svdgp, predict_svdgp, select_p

__version__ = "0.1.0"
