import math

import pytest

from epochsa.bounds import (
    _contraction,
    epoch_gd_risk_bound,
    fasa_in_regime,
    fasa_risk_bound,
    fixed_epoch_risk_bound,
    sgd_distance_bound,
    sgd_risk_bound_constrained,
    sgd_risk_bound_unconstrained,
)


class TestFasaRiskBound:
    def test_alpha_two_reduction(self):
        # at alpha = 2 the general form collapses to 2^19 G^2/(lam T^2) + 2^9 kappa F*/T
        for G, lam, kappa, f_star, T in [
            (6.0, 0.5, 4.0, 0.03, 512),
            (1.0, 1.0, 10.0, 0.0, 1000),
            (2.5, 0.1, 30.0, 0.5, 4096),
        ]:
            got = fasa_risk_bound(G, lam, kappa, f_star, T, alpha=2.0)
            want = 2.0**19 * G * G / (lam * T * T) + 2.0**9 * kappa * f_star / T
            assert got == pytest.approx(want, rel=1e-12)

    def test_worked_example(self):
        assert fasa_risk_bound(1.0, 0.5, 4.0, 0.0, 100, 2.0) == pytest.approx(104.8576)

    def test_zero_risk_leaves_only_lead_term(self):
        full = fasa_risk_bound(3.0, 0.5, 4.0, 0.0, 256, 2.5)
        lead = 2.0 ** (2.5**2 + 5 * 2.5 + 5) * 9.0 / (0.5 * 256**2.5)
        assert full == pytest.approx(lead, rel=1e-12)

    def test_alpha_must_exceed_one(self):
        with pytest.raises(ValueError):
            fasa_risk_bound(1.0, 0.5, 4.0, 0.0, 100, 1.0)

    def test_regime_flag(self):
        assert fasa_in_regime(4.0, 16, 2.0)
        assert not fasa_in_regime(4.0, 15, 2.0)


class TestFixedEpochRiskBound:
    def test_pure_geometric(self):
        assert fixed_epoch_risk_bound(1.0, 0.0, 2.0, 10) == pytest.approx(2.0**-10)

    def test_zero_epochs(self):
        assert fixed_epoch_risk_bound(0.97, 0.03, 4.0, 0) == pytest.approx(0.97 + 0.015)

    def test_worked_example(self):
        assert fixed_epoch_risk_bound(0.97, 0.03, 4.0, 5) == pytest.approx(0.0453125)

    def test_beta_validation(self):
        with pytest.raises(ValueError):
            fixed_epoch_risk_bound(1.0, 0.0, 1.0, 3)


class TestEpochGDRiskBound:
    def test_value(self):
        assert epoch_gd_risk_bound(6.6, 0.5, 1000) == pytest.approx(32 * 6.6**2 / 500.0)

    def test_decreases_in_budget(self):
        assert epoch_gd_risk_bound(1.0, 1.0, 2000) < epoch_gd_risk_bound(1.0, 1.0, 1000)


class TestSgdBounds:
    def test_half_smoothness_step_contraction(self):
        # gamma = 1/(2L) gives the contraction factor 1 - 1/(2 kappa)
        lam, L = 0.5, 2.0
        gamma = 1.0 / (2.0 * L)
        assert _contraction(gamma, lam, L) == pytest.approx(1.0 - lam / (2.0 * L))

    def test_zero_risk_pure_geometric(self):
        rhs = sgd_distance_bound(0.25, 0.5, 2.0, 0.0, 100, 4.0)
        assert rhs == pytest.approx((1.0 - 2 * 0.25 * 0.5 * 0.5) ** 100 * 4.0)

    def test_zero_steps_keeps_start_plus_floor(self):
        gamma, lam, L, f_star, d0 = 0.25, 0.5, 2.0, 0.03, 4.0
        rhs = sgd_distance_bound(gamma, lam, L, f_star, 0, d0)
        floor = 4 * gamma * L * f_star / (lam * (1 - gamma * L))
        assert rhs == pytest.approx(d0 + floor)

    def test_step_preconditions(self):
        with pytest.raises(ValueError):
            sgd_distance_bound(2.0, 0.5, 2.0, 0.0, 10, 1.0)  # gamma >= 1/lam
        with pytest.raises(ValueError):
            sgd_distance_bound(0.6, 0.5, 2.0, 0.0, 10, 1.0)  # gamma >= 1/L

    def test_unconstrained_risk_is_half_L_times_distance(self):
        args = (0.25, 0.5, 2.0, 0.03, 50, 4.0)
        assert sgd_risk_bound_unconstrained(*args) == pytest.approx(
            0.5 * 2.0 * sgd_distance_bound(*args)
        )

    def test_constrained_risk_adds_boundary_term(self):
        args = (0.25, 0.5, 2.0, 0.03, 50, 4.0)
        dist = sgd_distance_bound(*args)
        assert sgd_risk_bound_constrained(*args, grad_norm_at_opt=0.0) == pytest.approx(
            0.5 * 2.0 * dist
        )
        with_g = sgd_risk_bound_constrained(*args, grad_norm_at_opt=0.7)
        assert with_g == pytest.approx(0.7 * math.sqrt(dist) + 0.5 * 2.0 * dist)
