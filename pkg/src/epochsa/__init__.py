"""Epoch-based stochastic approximation for smooth, strongly convex risks.

Solvers consume a stochastic problem (a distribution over nonnegative smooth
losses with certified constants) through an estimator-style fit interface;
the harness runs Monte-Carlo sweeps and verifies the solvers' expectation
guarantees empirically.
"""

from .bounds import (
    epoch_gd_risk_bound,
    fasa_risk_bound,
    fixed_epoch_risk_bound,
    sgd_distance_bound,
    sgd_risk_bound_constrained,
    sgd_risk_bound_unconstrained,
)
from .checks import run_all_checks
from .geometry import BallDomain, RunningMean, project, running_average, squared_distance
from .harness import (
    BoundReport,
    ExperimentPlan,
    RateFit,
    TrialResult,
    check_bound,
    epoch_decay_fit,
    fit_rate,
    run_trials,
)
from .problems import (
    ConstantsCertificate,
    LeastSquaresProblem,
    LogisticProblem,
    estimate_grad_variance,
    expected_risk,
    loss_grad,
    loss_value,
    make_least_squares,
    make_logistic,
    sample_loss,
)
from .solvers import (
    FASA,
    EpochGD,
    EpochGDF,
    EpochSchedule,
    FixedStepSGD,
    SolveTrace,
    epoch_gd,
    epoch_gd_f,
    fasa,
    fixed_step_sgd,
    iteration_complexity,
    sgd_epoch,
)

__version__ = "0.1.0"

__all__ = [
    "BallDomain",
    "BoundReport",
    "ConstantsCertificate",
    "EpochGD",
    "EpochGDF",
    "EpochSchedule",
    "ExperimentPlan",
    "FASA",
    "FixedStepSGD",
    "LeastSquaresProblem",
    "LogisticProblem",
    "RateFit",
    "RunningMean",
    "SolveTrace",
    "TrialResult",
    "check_bound",
    "epoch_decay_fit",
    "epoch_gd",
    "epoch_gd_f",
    "epoch_gd_risk_bound",
    "estimate_grad_variance",
    "expected_risk",
    "fasa",
    "fasa_risk_bound",
    "fit_rate",
    "fixed_epoch_risk_bound",
    "fixed_step_sgd",
    "iteration_complexity",
    "loss_grad",
    "loss_value",
    "make_least_squares",
    "make_logistic",
    "project",
    "run_all_checks",
    "run_trials",
    "running_average",
    "sample_loss",
    "sgd_distance_bound",
    "sgd_epoch",
    "sgd_risk_bound_constrained",
    "sgd_risk_bound_unconstrained",
    "squared_distance",
]
