"""Synthetic stochastic problems with certified curvature constants.

A problem is a distribution over nonnegative smooth losses together with a
certificate (L, lam, kappa, G, F_star) that provably holds over the problem's
ball domain, plus an exactly or Monte-Carlo evaluable expected risk, so that
the excess risk of any candidate point is a computable test quantity.

Two families are provided:

* least squares on instances drawn from an anisotropically scaled sphere,
  with bounded label noise, where every constant and the expected risk are
  exact closed forms;
* ridge-regularized logistic regression on the unit sphere, where the
  minimizer and minimal risk are estimated numerically once at construction
  and flagged inexact.

Instances live on spheres and noise is bounded (not Gaussian) because the
certificates promise almost-sure gradient bounds; unbounded draws would
break them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import BallDomain, project_raw
from .validation import (
    as_generator,
    check_nonnegative,
    check_positive,
    check_positive_int,
    check_vector,
)

#: Relative tolerance for the internal consistency of a certificate.
_CERT_RTOL = 1e-12

#: Logit scale applied to the latent parameter when generating logistic labels.
LOGISTIC_SHARPNESS = 4.0


@dataclass(frozen=True)
class ConstantsCertificate:
    """Curvature and gradient constants valid over the problem's domain.

    ``L`` bounds the smoothness of every sampled loss, ``lam`` the strong
    convexity of the expected risk, ``G`` the gradient norm of every sampled
    loss over the domain, and ``F_star`` is the minimal expected risk. When
    ``F_star_is_exact`` is false, ``F_star_std_error`` carries the Monte-Carlo
    standard error of the estimate.
    """

    L: float
    lam: float
    kappa: float
    G: float
    F_star: float
    F_star_is_exact: bool = True
    F_star_std_error: float = 0.0

    def __post_init__(self):
        check_positive(self.L, "L")
        check_positive(self.lam, "lam")
        check_positive(self.G, "G")
        check_nonnegative(self.F_star, "F_star")
        check_nonnegative(self.F_star_std_error, "F_star_std_error")
        if not math.isclose(self.kappa, self.L / self.lam, rel_tol=_CERT_RTOL):
            raise ValueError(
                f"kappa={self.kappa!r} inconsistent with L/lam={self.L / self.lam!r}"
            )
        if self.kappa < 1.0 - _CERT_RTOL:
            raise ValueError(f"kappa must be >= 1, got {self.kappa!r}")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class SquaredErrorLoss:
    """One draw (x, y): ``w -> (x.w - y)^2``."""

    x: np.ndarray
    y: float

    def value(self, w) -> float:
        r = float(self.x @ w) - self.y
        return r * r

    def grad(self, w) -> np.ndarray:
        return 2.0 * (float(self.x @ w) - self.y) * self.x


@dataclass(frozen=True)
class LogisticLoss:
    """One draw (x, y in {-1,+1}): ``w -> log(1 + exp(-y x.w)) + reg/2 ||w||^2``."""

    x: np.ndarray
    y: float
    reg: float = 0.0

    def value(self, w) -> float:
        w = np.asarray(w)
        margin = self.y * float(self.x @ w)
        val = float(np.logaddexp(0.0, -margin))
        if self.reg:
            val += 0.5 * self.reg * float(w @ w)
        return val

    def grad(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        margin = self.y * float(self.x @ w)
        g = (-self.y * float(_sigmoid(-margin))) * self.x
        if self.reg:
            g = g + self.reg * w
        return g


SampledLoss = Union[SquaredErrorLoss, LogisticLoss]


def _unit_sphere_rows(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    np.maximum(norms, np.finfo(float).tiny, out=norms)
    return z / norms


def _seeded_direction(seed: int, d: int, key: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


class LeastSquaresProblem:
    """Least squares with instances on a scaled sphere and bounded label noise.

    Draws ``x = diag(D) z`` with ``z`` uniform on the unit sphere and labels
    ``y = x.w_star + eps`` with ``eps`` uniform on ``[-a, a]``. The expected
    risk is the exact quadratic ``(w - w_star)' Sigma (w - w_star) + a^2/3``
    with ``Sigma = diag(D)^2 / d``, so every certificate entry is closed form.
    """

    kind = "least_squares"

    def __init__(self, d: int, scale_diag, radius: float, noise_halfwidth: float, seed: int):
        self.d = check_positive_int(d, "d")
        self.scale_diag = check_vector(scale_diag, dim=self.d, name="scale_diag")
        if np.any(self.scale_diag <= 0.0):
            raise ValueError("scale_diag entries must all be positive")
        self.radius = check_positive(radius, "radius")
        self.noise_halfwidth = check_nonnegative(noise_halfwidth, "noise_halfwidth")
        self.seed = int(seed)

        self.domain = BallDomain(np.zeros(self.d), self.radius)
        self.w_star = _seeded_direction(self.seed, self.d, key=0) * (self.radius / 2.0)
        self.sigma_diag = self.scale_diag**2 / self.d

        d_max = float(np.max(self.scale_diag))
        d_min = float(np.min(self.scale_diag))
        a = self.noise_halfwidth
        y_max = d_max * self.radius / 2.0 + a
        L = 2.0 * d_max**2
        lam = 2.0 * d_min**2 / self.d
        self.constants = ConstantsCertificate(
            L=L,
            lam=lam,
            kappa=L / lam,
            G=2.0 * d_max * (d_max * self.radius + y_max),
            F_star=a**2 / 3.0,
            F_star_is_exact=True,
        )

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "D": list(map(float, self.scale_diag)),
            "B": self.radius,
            "a": self.noise_halfwidth,
            "seed": self.seed,
        }

    # -- sampling ---------------------------------------------------------

    def _draw_design(self, n: int, rng: np.random.Generator):
        X = _unit_sphere_rows(n, self.d, rng) * self.scale_diag
        if self.noise_halfwidth > 0.0:
            eps = rng.uniform(-self.noise_halfwidth, self.noise_halfwidth, size=n)
        else:
            eps = np.zeros(n)
        return X, eps

    def sample_pairs(self, n: int, rng: np.random.Generator):
        """(X, y) arrays for ``n`` i.i.d. draws; consumes ``rng`` deterministically."""
        X, eps = self._draw_design(n, rng)
        return X, X @ self.w_star + eps

    def draw_batch(self, n: int, rng: np.random.Generator):
        """Solver-facing batch, kept in (X, eps) form so the residual
        ``x.(w - w_star) - eps`` cancels exactly at the optimum when the
        noise is zero (every stochastic gradient vanishes there)."""
        return self._draw_design(n, rng)

    def sample(self, rng) -> SquaredErrorLoss:
        X, y = self.sample_pairs(1, as_generator(rng))
        return SquaredErrorLoss(x=X[0], y=float(y[0]))

    def grad_at(self, batch, t: int, w: np.ndarray) -> np.ndarray:
        X, eps = batch
        x = X[t]
        return (2.0 * (x @ (w - self.w_star) - eps[t])) * x

    # -- vectorized loss algebra (shared by the check suite) ---------------

    @staticmethod
    def batch_values(X, y, w) -> np.ndarray:
        r = X @ w - y
        return r * r

    @staticmethod
    def batch_grads(X, y, w) -> np.ndarray:
        return 2.0 * (X @ w - y)[:, None] * X

    @staticmethod
    def rowwise_values(X, y, W) -> np.ndarray:
        r = np.einsum("ij,ij->i", X, W) - y
        return r * r

    @staticmethod
    def rowwise_grads(X, y, W) -> np.ndarray:
        return 2.0 * (np.einsum("ij,ij->i", X, W) - y)[:, None] * X

    # -- risk -------------------------------------------------------------

    def risk(self, w) -> float:
        """Expected risk at ``w``; exact, defined on all of R^d."""
        delta = np.asarray(w, dtype=np.float64) - self.w_star
        return float(delta @ (self.sigma_diag * delta)) + self.constants.F_star

    def expected_risk(self, w, with_std_error: bool = False):
        w = check_vector(w, dim=self.d, name="w")
        if not self.domain.contains(w):
            raise ValueError("w lies outside the domain; the certificate only covers the ball")
        value = self.risk(w)
        return (value, 0.0) if with_std_error else value

    def grad_norm_at_opt(self) -> float:
        # w_star is strictly interior, so the expected gradient vanishes there
        return 0.0


class LogisticProblem:
    """Ridge-regularized logistic regression with instances on the unit sphere.

    Labels follow ``P(y=+1|x) = sigmoid(s x.latent)`` for a seeded latent
    parameter of norm ``radius/2`` and fixed sharpness ``s``. The minimizer
    ``w_star`` is found once by deterministic projected gradient descent on a
    large empirical risk, and the minimal risk is the average loss at
    ``w_star`` over a larger fresh sample; both are flagged inexact. The
    expected risk at any point is the mean over a fixed evaluation pool, so
    repeated queries are deterministic.
    """

    kind = "logistic"

    def __init__(
        self,
        d: int,
        radius: float,
        reg: float,
        seed: int,
        train_size: int = 100_000,
        eval_pool_size: int = 100_000,
        f_star_draws: int = 1_000_000,
    ):
        self.d = check_positive_int(d, "d")
        self.radius = check_positive(radius, "radius")
        self.reg = check_positive(reg, "reg")
        self.seed = int(seed)
        self.sharpness = LOGISTIC_SHARPNESS

        self.domain = BallDomain(np.zeros(self.d), self.radius)
        self.latent = _seeded_direction(self.seed, self.d, key=0) * (self.radius / 2.0)
        L = 0.25 + self.reg

        train_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(1,))
        )
        X_train, y_train = self.sample_pairs(train_size, train_rng)
        self.w_star = self._fit_minimizer(X_train, y_train, L)

        eval_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(2,))
        )
        self._eval_X, self._eval_y = self.sample_pairs(eval_pool_size, eval_rng)
        self._eval_X.setflags(write=False)
        self._eval_y.setflags(write=False)

        fstar_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(3,))
        )
        f_star, f_star_se = self._mc_risk(self.w_star, f_star_draws, fstar_rng)
        self.constants = ConstantsCertificate(
            L=L,
            lam=self.reg,
            kappa=L / self.reg,
            G=1.0 + self.reg * self.radius,
            F_star=f_star,
            F_star_is_exact=False,
            F_star_std_error=f_star_se,
        )

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "B": self.radius,
            "mu": self.reg,
            "seed": self.seed,
        }

    # -- sampling ---------------------------------------------------------

    def sample_pairs(self, n: int, rng: np.random.Generator):
        X = _unit_sphere_rows(n, self.d, rng)
        p_plus = _sigmoid(self.sharpness * (X @ self.latent))
        y = np.where(rng.uniform(size=n) < p_plus, 1.0, -1.0)
        return X, y

    # the solver-facing batch and the public pairs coincide here
    draw_batch = sample_pairs

    def sample(self, rng) -> LogisticLoss:
        X, y = self.sample_pairs(1, as_generator(rng))
        return LogisticLoss(x=X[0], y=float(y[0]), reg=self.reg)

    def grad_at(self, batch, t: int, w: np.ndarray) -> np.ndarray:
        X, y = batch
        x = X[t]
        margin = y[t] * (x @ w)
        return (-y[t] * float(_sigmoid(-margin))) * x + self.reg * w

    # -- vectorized loss algebra -------------------------------------------

    def batch_values(self, X, y, w) -> np.ndarray:
        margins = y * (X @ w)
        return np.logaddexp(0.0, -margins) + 0.5 * self.reg * float(w @ w)

    def batch_grads(self, X, y, w) -> np.ndarray:
        margins = y * (X @ w)
        return (-y * _sigmoid(-margins))[:, None] * X + self.reg * np.asarray(w)

    def rowwise_values(self, X, y, W) -> np.ndarray:
        margins = y * np.einsum("ij,ij->i", X, W)
        return np.logaddexp(0.0, -margins) + 0.5 * self.reg * np.einsum("ij,ij->i", W, W)

    def rowwise_grads(self, X, y, W) -> np.ndarray:
        margins = y * np.einsum("ij,ij->i", X, W)
        return (-y * _sigmoid(-margins))[:, None] * X + self.reg * W

    # -- risk -------------------------------------------------------------

    def _fit_minimizer(self, X, y, L: float) -> np.ndarray:
        """Projected full-batch gradient descent on the empirical risk.

        Deterministic; the empirical risk inherits strong convexity from the
        ridge term, so a fixed 1/L step converges linearly.
        """
        w = np.zeros(self.d)
        for _ in range(100_000):
            g = self.batch_grads(X, y, w).mean(axis=0)
            w_next = project_raw(self.domain.center, self.radius, w - g / L)
            if float(np.linalg.norm(w_next - w)) <= 1e-13:
                w = w_next
                break
            w = w_next
        return w

    def _mc_risk(self, w, n: int, rng: np.random.Generator, chunk: int = 200_000):
        total = 0.0
        total_sq = 0.0
        remaining = n
        while remaining > 0:
            m = min(chunk, remaining)
            X, y = self.sample_pairs(m, rng)
            vals = self.batch_values(X, y, w)
            total += float(vals.sum())
            total_sq += float((vals * vals).sum())
            remaining -= m
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
        return mean, math.sqrt(var / n)

    def risk(self, w) -> float:
        """Fixed-pool Monte-Carlo mean of the loss at ``w``; deterministic per instance."""
        w = np.asarray(w, dtype=np.float64)
        return float(np.mean(self.batch_values(self._eval_X, self._eval_y, w)))

    def expected_risk(self, w, with_std_error: bool = False):
        w = check_vector(w, dim=self.d, name="w")
        if not self.domain.contains(w):
            raise ValueError("w lies outside the domain; the certificate only covers the ball")
        vals = self.batch_values(self._eval_X, self._eval_y, w)
        mean = float(np.mean(vals))
        if not with_std_error:
            return mean
        se = float(np.std(vals, ddof=1) / math.sqrt(vals.shape[0]))
        return mean, se

    def eval_pool_slice(self, n: int):
        """First ``n`` entries of the fixed evaluation pool (read-only views)."""
        return self._eval_X[:n], self._eval_y[:n]

    def grad_norm_at_opt(self) -> float:
        g = self.batch_grads(self._eval_X, self._eval_y, self.w_star).mean(axis=0)
        return float(np.linalg.norm(g))


Problem = Union[LeastSquaresProblem, LogisticProblem]


def make_least_squares(d, scale_diag, radius, noise_halfwidth, seed) -> LeastSquaresProblem:
    """Least-squares problem with exact constants; see :class:`LeastSquaresProblem`."""
    return LeastSquaresProblem(d, scale_diag, radius, noise_halfwidth, seed)


def make_logistic(d, radius, reg, seed, **sizes) -> LogisticProblem:
    """Ridge-logistic problem with estimated optimum; see :class:`LogisticProblem`."""
    return LogisticProblem(d, radius, reg, seed, **sizes)


# -- operation-style wrappers -------------------------------------------------


def sample_loss(problem: Problem, rng) -> SampledLoss:
    """One i.i.d. draw from the problem's loss distribution."""
    return problem.sample(rng)


def loss_value(f: SampledLoss, w) -> float:
    w = check_vector(w, dim=f.x.shape[0], name="w")
    return f.value(w)


def loss_grad(f: SampledLoss, w) -> np.ndarray:
    w = check_vector(w, dim=f.x.shape[0], name="w")
    return f.grad(w)


def expected_risk(problem: Problem, w) -> float:
    return problem.expected_risk(w)


def estimate_grad_variance(problem: Problem, w, n: int, rng, with_std_error: bool = False):
    """Unbiased estimate of ``E ||g - E g||^2`` over ``n`` fresh gradient draws.

    With ``with_std_error`` the Monte-Carlo standard error of the estimate is
    returned as well, which is what consistency checks between different
    sample sizes need.
    """
    w = check_vector(w, dim=problem.d, name="w")
    if not problem.domain.contains(w):
        raise ValueError("w lies outside the domain")
    n = check_positive_int(n, "n")
    if n < 2:
        raise ValueError("variance estimation needs n >= 2")
    X, y = problem.sample_pairs(n, as_generator(rng))
    grads = problem.batch_grads(X, y, w)
    centered = grads - grads.mean(axis=0)
    sq_dev = np.einsum("ij,ij->i", centered, centered)
    est = float(sq_dev.sum() / (n - 1))
    if not with_std_error:
        return est
    se = float(np.std(sq_dev, ddof=1) / math.sqrt(n)) * n / (n - 1)
    return est, se
