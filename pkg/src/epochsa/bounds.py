"""Closed-form right-hand sides of the expectation guarantees.

Each function evaluates the exact bound its matching solver is certified to
meet, as a function of the problem constants and the solver configuration.
The harness compares these against empirical trial means.
"""

from __future__ import annotations

import math

from .validation import check_nonnegative, check_positive


def fasa_risk_bound(G: float, lam: float, kappa: float, f_star: float, budget: int, alpha: float) -> float:
    """Excess-risk bound for the two-phase solver.

    ``2**(a^2+5a+5) G^2 / (lam T^a)  +  2**(2a+5) kappa f_star / ((2**(a-1)-1) T)``
    with ``a = alpha``. Valid in the ``T >= kappa**alpha`` regime; callers flag
    smaller budgets but the value is still well defined.
    """
    if not alpha > 1.0:
        raise ValueError(f"alpha must be greater than 1, got {alpha}")
    G = check_positive(G, "G")
    lam = check_positive(lam, "lam")
    kappa = check_positive(kappa, "kappa")
    f_star = check_nonnegative(f_star, "f_star")
    T = check_positive(budget, "budget")
    lead = 2.0 ** (alpha * alpha + 5.0 * alpha + 5.0) * G * G / (lam * T**alpha)
    floor = 2.0 ** (2.0 * alpha + 5.0) * kappa * f_star / ((2.0 ** (alpha - 1.0) - 1.0) * T)
    return lead + floor


def fasa_in_regime(kappa: float, budget: int, alpha: float) -> bool:
    """Whether the budget reaches the regime the two-phase bound is stated for."""
    return budget >= kappa**alpha


def fixed_epoch_risk_bound(initial_gap: float, f_star: float, beta: float, k_dagger: int) -> float:
    """Excess-risk bound after ``k_dagger`` fixed-length epochs.

    ``initial_gap / 2**k_dagger + 2 f_star / beta``: geometric decay of the
    starting gap down to a floor proportional to the minimal risk.
    """
    if not beta > 1.0:
        raise ValueError(f"beta must be greater than 1, got {beta}")
    if k_dagger < 0:
        raise ValueError(f"k_dagger must be >= 0, got {k_dagger}")
    initial_gap = check_nonnegative(initial_gap, "initial_gap")
    f_star = check_nonnegative(f_star, "f_star")
    return initial_gap / 2.0**k_dagger + 2.0 * f_star / beta


def epoch_gd_risk_bound(G: float, lam: float, budget: int) -> float:
    """Baseline excess-risk bound ``32 G^2 / (lam T)`` for doubling-epoch SGD."""
    G = check_positive(G, "G")
    lam = check_positive(lam, "lam")
    T = check_positive(budget, "budget")
    return 32.0 * G * G / (lam * T)


def _contraction(gamma: float, lam: float, L: float) -> float:
    return 1.0 - 2.0 * gamma * lam * (1.0 - gamma * L)


def sgd_distance_bound(
    gamma: float, lam: float, L: float, f_star: float, steps: int, dist0_sq: float
) -> float:
    """Bound on ``E ||w_T - w*||^2`` for constant-step SGD.

    ``[1 - 2 gamma lam (1 - gamma L)]^T dist0_sq + 4 gamma L f_star / (lam (1 - gamma L))``.
    Requires ``gamma < 1/lam`` and ``gamma < 1/L`` so both factors are usable.
    """
    gamma = check_positive(gamma, "gamma")
    lam = check_positive(lam, "lam")
    L = check_positive(L, "L")
    if gamma >= 1.0 / lam:
        raise ValueError(f"gamma must be below 1/lam = {1.0 / lam}")
    if gamma >= 1.0 / L:
        raise ValueError(f"gamma must be below 1/L = {1.0 / L}")
    f_star = check_nonnegative(f_star, "f_star")
    dist0_sq = check_nonnegative(dist0_sq, "dist0_sq")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    rho = _contraction(gamma, lam, L)
    return rho**steps * dist0_sq + 4.0 * gamma * L * f_star / (lam * (1.0 - gamma * L))


def sgd_risk_bound_unconstrained(
    gamma: float, lam: float, L: float, f_star: float, steps: int, dist0_sq: float
) -> float:
    """Excess-risk bound for unconstrained constant-step SGD.

    Exactly ``L/2`` times the distance bound, which folds the floor term
    ``2 gamma L^2 f_star / (lam (1 - gamma L))`` in; valid when the expected
    gradient vanishes at the optimum.
    """
    return 0.5 * L * sgd_distance_bound(gamma, lam, L, f_star, steps, dist0_sq)


def sgd_risk_bound_constrained(
    gamma: float,
    lam: float,
    L: float,
    f_star: float,
    steps: int,
    dist0_sq: float,
    grad_norm_at_opt: float,
) -> float:
    """Excess-risk bound for projected constant-step SGD.

    Adds ``||grad F(w*)|| * sqrt(E ||w_T - w*||^2)`` on top of the
    smoothness term, covering optima pinned to the boundary.
    """
    grad_norm_at_opt = check_nonnegative(grad_norm_at_opt, "grad_norm_at_opt")
    dist_bound = sgd_distance_bound(gamma, lam, L, f_star, steps, dist0_sq)
    return grad_norm_at_opt * math.sqrt(dist_bound) + 0.5 * L * dist_bound
