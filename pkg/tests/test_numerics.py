"""Special functions, root solving, quadrature: contracts and known values."""

import math

import numpy as np
import pytest

from prophet_lab.numerics import (
    Bracket,
    BracketingError,
    ConvergenceError,
    digamma,
    gamma_ratio,
    integrate_adaptive,
    log_gamma,
    solve_increasing_root,
)

EULER = 0.5772156649015329


class TestLogGamma:
    def test_known_points(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-13)

    def test_integer_factorials(self):
        fact = 1.0
        for n in range(0, 21):
            if n:
                fact *= n
            assert math.exp(log_gamma(n + 1.0)) == pytest.approx(fact, rel=1e-10)

    def test_recurrence_on_grid(self):
        for x in np.concatenate([np.arange(0.1, 2.0, 0.1), np.arange(2.0, 100.5, 2.5)]):
            lhs = log_gamma(x + 1.0) - log_gamma(x)
            assert lhs == pytest.approx(math.log(x), abs=1e-12, rel=1e-12)

    def test_matches_libm_over_range(self):
        x = 1e-3
        while x < 1e7:
            mine, ref = log_gamma(x), math.lgamma(x)
            assert mine == pytest.approx(ref, rel=1e-12, abs=1e-10)
            x *= 1.31

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            log_gamma(bad)


class TestGammaRatio:
    def test_integer_shift(self):
        assert gamma_ratio(3.0, 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_half_shift_pair(self):
        # Gamma(z+1) = z Gamma(z) with z = 1.5, and the reciprocal
        assert gamma_ratio(2.5, 1.5) == pytest.approx(1.5, rel=1e-12)
        assert gamma_ratio(1.5, 2.5) == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_large_arguments_unit_shift(self):
        # Gamma(x+1)/Gamma(x) = x exactly; exercises the cancellation-free path
        for x in (1e4, 1e6, 1e7):
            assert gamma_ratio(x + 1.0, x) == pytest.approx(x, rel=1e-12)

    def test_large_arguments_fractional_shift(self):
        # Gamma(x+1)/Gamma(x+0.5)^2 / (Gamma(x+1.5)/Gamma(x+1)) -> consistency
        x = 1e6
        left = gamma_ratio(x + 1.0, x + 0.5)
        right = gamma_ratio(x + 1.5, x + 1.0)
        # ratio of consecutive half-shifts tends to 1 with O(1/x) correction
        assert left / right == pytest.approx(1.0, rel=1e-6)
        assert left == pytest.approx(math.sqrt(x), rel=1e-6)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gamma_ratio(-1.0, 2.0)
        with pytest.raises(ValueError):
            gamma_ratio(2.0, 0.0)


class TestDigamma:
    def test_euler_mascheroni(self):
        assert digamma(1.0) == pytest.approx(-EULER, abs=1e-12)

    def test_harmonic_identity(self):
        # psi(r) = H_{r-1} - euler for integer r
        hsum = 0.0
        for r in range(2, 40):
            hsum += 1.0 / (r - 1)
            assert digamma(float(r)) == pytest.approx(hsum - EULER, abs=1e-10)

    def test_value_at_two_and_ten(self):
        assert digamma(2.0) == pytest.approx(1.0 - EULER, abs=1e-10)
        h9 = sum(1.0 / i for i in range(1, 10))
        assert digamma(10.0) == pytest.approx(h9 - EULER, abs=1e-10)

    def test_recurrence_on_grid(self):
        for x in np.concatenate([np.arange(0.1, 2.0, 0.1), np.arange(2.0, 100.5, 2.5)]):
            assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, abs=1e-10)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            digamma(0.0)
        with pytest.raises(ValueError):
            digamma(-3.5)


class TestRootSolver:
    def test_golden_ratio_quadratic(self):
        # oracle: the quadratic formula for x^2 + x - 1
        oracle = (math.sqrt(5.0) - 1.0) / 2.0
        root = solve_increasing_root(lambda x: x * x + x - 1.0, Bracket(0.0, 1.0), tol=1e-13)
        assert root == pytest.approx(oracle, abs=1e-13)

    def test_linear(self):
        root = solve_increasing_root(lambda x: x - 0.25, Bracket(0.0, 1.0))
        assert root == pytest.approx(0.25, abs=1e-13)

    def test_cube_root(self):
        root = solve_increasing_root(lambda x: x**3 - 8.0, Bracket(0.0, 3.0))
        assert root == pytest.approx(2.0, abs=1e-12)

    def test_randomized_monotone_polynomials(self):
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            coeffs = rng.uniform(0.1, 2.0, size=int(rng.integers(2, 6)))
            poly = np.append(coeffs, 0.0)  # positive coefficients: increasing on (0, inf)
            target = float(np.polyval(poly, rng.uniform(0.05, 0.95)))
            f = lambda x, p=poly, t=target: float(np.polyval(p, x)) - t
            root = solve_increasing_root(f, Bracket(0.0, 1.0), tol=1e-12)
            assert abs(f(root)) <= 1e-12

    def test_endpoint_root_allowed(self):
        assert solve_increasing_root(lambda x: x, Bracket(0.0, 1.0)) == 0.0

    def test_bracketing_error(self):
        with pytest.raises(BracketingError):
            solve_increasing_root(lambda x: x + 2.0, Bracket(0.0, 1.0))

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            Bracket(1.0, 1.0)


# (integrand, a, b, exact value, rel_tol to request)
KNOWN_INTEGRALS = [
    (lambda u: math.exp(-u), 0.0, math.inf, 1.0, 1e-10),
    (lambda u: u**-2, 2.0, math.inf, 0.5, 1e-10),
    (lambda u: math.sin(u), 0.0, math.pi, 2.0, 1e-10),
    (lambda u: math.cos(u), 0.0, math.pi / 2, 1.0, 1e-10),
    (lambda u: u**3 - 2 * u + 1.0, 0.0, 2.0, 2.0, 1e-10),
    (lambda u: 1.0 / (1.0 + u * u), 0.0, math.inf, math.pi / 2, 1e-10),
    (lambda u: math.exp(-u * u), 0.0, math.inf, math.sqrt(math.pi) / 2, 1e-10),
    (lambda u: math.log(u), 1.0, math.e, 1.0, 1e-10),
    (lambda u: u * math.exp(-u), 0.0, math.inf, 1.0, 1e-10),
    (lambda u: u**2 * math.exp(-u), 0.0, math.inf, 2.0, 1e-10),
    (lambda u: 1.0 / u, 1.0, math.e**2, 2.0, 1e-10),
    (lambda u: u**-1.5, 1.0, math.inf, 2.0, 1e-8),
    (lambda u: math.sqrt(u), 0.0, 1.0, 2.0 / 3.0, 1e-10),
    (lambda u: 1.0 / math.sqrt(u), 0.0, 1.0, 2.0, 1e-8),
    (lambda u: math.log(u), 0.0, 1.0, -1.0, 1e-8),
    (lambda u: u / (1.0 + u) ** 3, 0.0, math.inf, 0.5, 1e-10),
    (lambda u: math.exp(-2.0 * u) * math.cos(u), 0.0, math.inf, 0.4, 1e-10),
    (lambda u: 1.0 / (u * u + 4.0), 0.0, math.inf, math.pi / 4, 1e-10),
    (lambda u: u**4, -1.0, 1.0, 0.4, 1e-10),
    (lambda u: 2.0 * u * (1.0 - u) ** -0.5, 0.0, 1.0, 8.0 / 3.0, 1e-6),
]


class TestQuadrature:
    @pytest.mark.parametrize("case", KNOWN_INTEGRALS, ids=[f"int{i:02d}" for i in range(len(KNOWN_INTEGRALS))])
    def test_known_integrals_within_reported_error(self, case):
        f, a, b, exact, rel_tol = case
        res = integrate_adaptive(f, a, b, rel_tol=rel_tol)
        assert abs(res.value - exact) <= max(res.abs_error_estimate, 1e-13 * abs(exact))
        assert res.abs_error_estimate >= 0.0
        assert res.evaluations >= 15

    def test_beta_integral_oracle(self):
        # oracle: B(2, 1/2) * 2 via the log-gamma identity
        oracle = 2.0 * math.exp(log_gamma(2.0) + log_gamma(0.5) - log_gamma(2.5))
        res = integrate_adaptive(lambda u: 2.0 * u * (1.0 - u) ** -0.5, 0.0, 1.0, rel_tol=1e-6)
        assert res.value == pytest.approx(oracle, rel=1e-5)
        assert oracle == pytest.approx(8.0 / 3.0, rel=1e-14)

    def test_budget_exhaustion_carries_best_estimate(self):
        with pytest.raises(ConvergenceError) as err:
            integrate_adaptive(lambda u: math.sin(1.0 / u) if u > 0 else 0.0,
                               0.0, 1.0, rel_tol=1e-14, max_intervals=31)
        assert err.value.result is not None
        assert err.value.result.evaluations >= 15

    def test_bad_limits(self):
        with pytest.raises(ValueError):
            integrate_adaptive(lambda u: u, 1.0, 1.0)
