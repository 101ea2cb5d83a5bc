"""Stochastic approximation solvers over ball-constrained problems.

The computational cores are plain functions (:func:`sgd_epoch`,
:func:`epoch_gd`, :func:`fasa`, :func:`epoch_gd_f`, :func:`fixed_step_sgd`)
returning a :class:`SolveTrace`. Thin estimator classes wrap them with the
familiar fit/get_params protocol so harness sweeps can clone a solver and
override its budget or seed without touching anything else.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import BallDomain
from .problems import Problem
from .validation import (
    as_generator,
    check_nonnegative,
    check_positive,
    check_positive_int,
    check_vector,
)

#: Draw-batch chunk for the fixed-step solver; bounds memory, fixed so that
#: generator consumption (hence the trace) never depends on machine state.
_CHUNK = 8192


@dataclass(frozen=True)
class EpochSchedule:
    """Doubling epoch lengths with halving step sizes.

    Epoch ``k`` (1-based) runs ``t1 * 2**(k-1)`` steps at step size
    ``eta1 / 2**(k-1)``.
    """

    eta1: float
    t1: int

    def __post_init__(self):
        check_positive(self.eta1, "eta1")
        check_positive_int(self.t1, "t1")

    def eta(self, k: int) -> float:
        return self.eta1 / 2.0 ** (k - 1)

    def size(self, k: int) -> int:
        return self.t1 * 2 ** (k - 1)

    def num_epochs(self, budget: int) -> int:
        """Largest k with ``t1 * (2**k - 1) <= budget``; 0 if even epoch 1 does not fit."""
        if budget < self.t1:
            return 0
        k = 1
        while self.t1 * (2 ** (k + 1) - 1) <= budget:
            k += 1
        return k

    def gradients_used(self, budget: int) -> int:
        return self.t1 * (2 ** self.num_epochs(budget) - 1)


@dataclass
class SolveTrace:
    """Epoch-boundary record of one solve.

    ``epoch_iterates[i]`` is the averaged iterate produced by epoch ``i+1``
    and handed to its successor; ``final`` is the returned point.
    ``phase_split`` marks how many leading epochs belong to a warm-start
    phase, when there is one.
    """

    epoch_iterates: list = field(default_factory=list)
    epoch_sizes: list = field(default_factory=list)
    epoch_etas: list = field(default_factory=list)
    gradients_consumed: int = 0
    final: np.ndarray = None
    degenerate: bool = False
    phase_split: int | None = None

    @property
    def num_epochs(self) -> int:
        return len(self.epoch_iterates)


def sgd_epoch(problem: Problem, rng, w1, eta: float, steps: int) -> np.ndarray:
    """One epoch of projected SGD from ``w1``.

    Returns the average of the pre-update iterates ``w_1 .. w_steps``; the
    post-update point ``w_{steps+1}`` is computed and discarded, so exactly
    ``steps`` gradient draws are consumed either way.
    """
    eta = check_positive(eta, "eta")
    steps = check_positive_int(steps, "steps")
    domain = problem.domain
    w = check_vector(w1, dim=domain.dim, name="w1").copy()
    if not domain.contains(w):
        raise ValueError("w1 lies outside the domain")

    rng = as_generator(rng)
    center = domain.center
    radius = domain.radius
    r_sq = radius * radius
    batch = problem.draw_batch(steps, rng)
    grad_at = problem.grad_at

    avg = np.zeros_like(w)
    for t in range(steps):
        avg += (w - avg) / (t + 1)
        w = w - eta * grad_at(batch, t, w)
        delta = w - center
        dist_sq = float(delta @ delta)
        if dist_sq > r_sq:
            w = center + delta * (radius / math.sqrt(dist_sq))
    return avg


def epoch_gd(problem: Problem, rng, eta1: float, t1: int, budget: int, w0) -> SolveTrace:
    """Projected SGD in doubling epochs with halving steps.

    Epoch ``k`` runs only if the cumulative gradient count through epoch
    ``k`` still fits the budget; each epoch restarts from the previous
    epoch's averaged iterate. A budget too small for even one epoch returns
    the start point flagged degenerate.
    """
    budget = check_positive_int(budget, "budget")
    w0 = check_vector(w0, dim=problem.domain.dim, name="w0")
    if not problem.domain.contains(w0):
        raise ValueError("w0 lies outside the domain")
    schedule = EpochSchedule(eta1, t1)
    k_total = schedule.num_epochs(budget)
    if k_total == 0:
        return SolveTrace(final=w0.copy(), degenerate=True)

    rng = as_generator(rng)
    trace = SolveTrace(final=w0.copy())
    w = w0
    for k in range(1, k_total + 1):
        eta_k = schedule.eta(k)
        size_k = schedule.size(k)
        w = sgd_epoch(problem, rng, w, eta_k, size_k)
        trace.epoch_iterates.append(w)
        trace.epoch_sizes.append(size_k)
        trace.epoch_etas.append(eta_k)
        trace.gradients_consumed += size_k
    trace.final = w
    return trace


def fasa(problem: Problem, rng, budget: int, alpha: float, w_bar=None) -> SolveTrace:
    """Two-phase epoch gradient descent.

    Phase 1 spends half the budget on a generic warm start (step ``1/lam``,
    first epoch of 4). Phase 2 restarts from the warm-start point with step
    ``1/(4L)`` and first-epoch size ``ceil(2**(alpha+3) * kappa)``, sized so
    the large epochs can exploit the high-quality initialization.
    """
    budget = check_positive_int(budget, "budget")
    if not alpha > 1.0:
        raise ValueError(f"alpha must be greater than 1, got {alpha}")
    cert = problem.constants
    domain = problem.domain
    if w_bar is None:
        w_bar = domain.center
    w_bar = check_vector(w_bar, dim=domain.dim, name="w_bar")
    if not domain.contains(w_bar):
        raise ValueError("w_bar lies outside the domain")

    rng = as_generator(rng)
    half = budget // 2
    phase2_t1 = math.ceil(2.0 ** (alpha + 3.0) * cert.kappa)

    if half < 1:
        return SolveTrace(final=w_bar.copy(), degenerate=True)
    phase1 = epoch_gd(problem, rng, 1.0 / cert.lam, 4, half, w_bar)
    phase2 = epoch_gd(problem, rng, 1.0 / (4.0 * cert.L), phase2_t1, half, phase1.final)

    return SolveTrace(
        epoch_iterates=phase1.epoch_iterates + phase2.epoch_iterates,
        epoch_sizes=phase1.epoch_sizes + phase2.epoch_sizes,
        epoch_etas=phase1.epoch_etas + phase2.epoch_etas,
        gradients_consumed=phase1.gradients_consumed + phase2.gradients_consumed,
        final=phase2.final,
        degenerate=phase1.degenerate or phase2.degenerate,
        phase_split=phase1.num_epochs,
    )


def epoch_gd_f(problem: Problem, rng, budget: int, beta: float, w0) -> SolveTrace:
    """Epoch gradient descent with a fixed step and fixed epoch length.

    Step ``1/(4 beta L)`` and epoch length ``ceil(16 beta kappa)``; runs
    ``budget // epoch_len`` epochs, each handing its averaged iterate to the
    next. Risk decays geometrically per epoch down to a floor set by the
    minimal risk over ``beta``.
    """
    budget = check_positive_int(budget, "budget")
    if not beta > 1.0:
        raise ValueError(f"beta must be greater than 1, got {beta}")
    cert = problem.constants
    w0 = check_vector(w0, dim=problem.domain.dim, name="w0")
    if not problem.domain.contains(w0):
        raise ValueError("w0 lies outside the domain")

    eta = 1.0 / (4.0 * beta * cert.L)
    epoch_len = math.ceil(16.0 * beta * cert.kappa)
    k_total = budget // epoch_len
    if k_total == 0:
        return SolveTrace(final=w0.copy(), degenerate=True)

    rng = as_generator(rng)
    trace = SolveTrace(final=w0.copy())
    w = w0
    for _ in range(k_total):
        w = sgd_epoch(problem, rng, w, eta, epoch_len)
        trace.epoch_iterates.append(w)
        trace.epoch_sizes.append(epoch_len)
        trace.epoch_etas.append(eta)
        trace.gradients_consumed += epoch_len
    trace.final = w
    return trace


def fixed_step_sgd(
    problem: Problem, rng, gamma: float, budget: int, w0, constrained: bool = True
) -> SolveTrace:
    """Plain SGD with a constant step, returning the last iterate.

    The distance to the optimum, not an average, is what this solver's
    guarantee controls, hence no averaging. Projection is applied only when
    ``constrained``; the unconstrained variant may leave the ball.
    """
    gamma = check_positive(gamma, "gamma")
    budget = check_positive_int(budget, "budget")
    cert = problem.constants
    if gamma >= 1.0 / cert.lam:
        raise ValueError(f"gamma must be below 1/lam = {1.0 / cert.lam}, got {gamma}")
    domain = problem.domain
    w = check_vector(w0, dim=domain.dim, name="w0").copy()
    if constrained and not domain.contains(w):
        raise ValueError("w0 lies outside the domain")

    rng = as_generator(rng)
    center = domain.center
    radius = domain.radius
    r_sq = radius * radius
    grad_at = problem.grad_at

    done = 0
    while done < budget:
        m = min(_CHUNK, budget - done)
        batch = problem.draw_batch(m, rng)
        for t in range(m):
            w = w - gamma * grad_at(batch, t, w)
            if constrained:
                delta = w - center
                dist_sq = float(delta @ delta)
                if dist_sq > r_sq:
                    w = center + delta * (radius / math.sqrt(dist_sq))
        done += m
    return SolveTrace(gradients_consumed=budget, final=w)


def iteration_complexity(kappa: float, f_star: float, epsilon: float, initial_gap: float) -> float:
    """Gradient budget that drives the fixed-epoch solver's bound below ``epsilon``.

    Uses ``beta = max(1, 4 f_star / epsilon)`` so the floor term contributes
    at most ``epsilon/2``, then enough epochs to halve the initial gap down
    to ``epsilon``.
    """
    kappa = check_positive(kappa, "kappa")
    epsilon = check_positive(epsilon, "epsilon")
    f_star = check_nonnegative(f_star, "f_star")
    initial_gap = check_positive(initial_gap, "initial_gap")
    beta = max(1.0, 4.0 * f_star / epsilon)
    rounds = max(math.ceil(math.log2(initial_gap / epsilon)), 1)
    return 16.0 * beta * kappa * rounds


def resolve_start(domain: BallDomain, start) -> np.ndarray:
    """Materialize a start-point policy: 'center', 'boundary', or an explicit point."""
    if isinstance(start, str):
        if start == "center":
            return domain.center.copy()
        if start == "boundary":
            return domain.boundary_point()
        raise ValueError(f"unknown start policy {start!r}")
    w0 = check_vector(start, dim=domain.dim, name="start")
    if not domain.contains(w0):
        raise ValueError("start point lies outside the domain")
    return w0


class BaseSolver:
    """Estimator-protocol base: constructor params are stored verbatim and
    introspectable, so ``sklearn.base.clone`` and grid sweeps work unchanged."""

    algorithm_name = "base"

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    def _solve(self, problem: Problem, rng, w0) -> SolveTrace:
        raise NotImplementedError

    def fit(self, problem: Problem, rng=None):
        """Run the solver on ``problem``; fitted state lands in ``trace_`` and ``coef_``."""
        rng = as_generator(self.random_state if rng is None else rng)
        w0 = resolve_start(problem.domain, self.start)
        trace = self._solve(problem, rng, w0)
        if not np.all(np.isfinite(trace.final)):
            raise FloatingPointError("solver produced a non-finite iterate")
        self.trace_ = trace
        self.coef_ = trace.final
        self.n_gradients_ = trace.gradients_consumed
        self.k_dagger_ = trace.num_epochs
        self.degenerate_ = trace.degenerate
        return self


class EpochGD(BaseSolver):
    """Doubling-epoch projected SGD.

    ``eta1=None`` resolves to ``1/lam`` from the problem certificate, the
    standard tuning for strongly convex risks.
    """

    algorithm_name = "epoch_gd"

    def __init__(self, eta1=None, t1=4, budget=1000, start="center", random_state=None):
        self.eta1 = eta1
        self.t1 = t1
        self.budget = budget
        self.start = start
        self.random_state = random_state

    def _solve(self, problem, rng, w0):
        eta1 = 1.0 / problem.constants.lam if self.eta1 is None else self.eta1
        return epoch_gd(problem, rng, eta1, self.t1, self.budget, w0)


class FASA(BaseSolver):
    """Two-phase epoch gradient descent (warm start, then condition-number-sized epochs)."""

    algorithm_name = "fasa"

    def __init__(self, alpha=2.0, budget=1000, start="center", random_state=None):
        self.alpha = alpha
        self.budget = budget
        self.start = start
        self.random_state = random_state

    def _solve(self, problem, rng, w0):
        return fasa(problem, rng, self.budget, self.alpha, w0)


class EpochGDF(BaseSolver):
    """Fixed-step, fixed-epoch-length epoch gradient descent."""

    algorithm_name = "epoch_gd_f"

    def __init__(self, beta=2.0, budget=1000, start="center", random_state=None):
        self.beta = beta
        self.budget = budget
        self.start = start
        self.random_state = random_state

    def _solve(self, problem, rng, w0):
        return epoch_gd_f(problem, rng, self.budget, self.beta, w0)


class FixedStepSGD(BaseSolver):
    """Constant-step SGD returning the last iterate.

    ``gamma=None`` resolves to ``1/(2L)`` from the certificate.
    """

    algorithm_name = "fixed_sgd"

    def __init__(self, gamma=None, budget=1000, constrained=True, start="center", random_state=None):
        self.gamma = gamma
        self.budget = budget
        self.constrained = constrained
        self.start = start
        self.random_state = random_state

    def _solve(self, problem, rng, w0):
        gamma = 1.0 / (2.0 * problem.constants.L) if self.gamma is None else self.gamma
        return fixed_step_sgd(problem, rng, gamma, self.budget, w0, constrained=self.constrained)


SOLVER_REGISTRY = {
    cls.algorithm_name: cls for cls in (EpochGD, FASA, EpochGDF, FixedStepSGD)
}
