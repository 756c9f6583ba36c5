import numpy as np
import pytest

from zetapulse import DomainError, InvalidEnvelopeError, Term, ZetaSeries, check_admissible, eval_zeta


class TestEvaluate:
    def test_constant(self):
        """
        constant series has zero derivatives
        """
        assert eval_zeta(ZetaSeries.constant(np.pi / 4, 1.0), 0.3) == (pytest.approx(np.pi / 4), 0.0, 0.0)

    def test_not_series_at_midpoint(self):
        series = ZetaSeries(np.pi / 4, 0.69, (Term(3, -0.38, 1),))
        zeta, zeta_dot, zeta_ddot = eval_zeta(series, 0.345)
        assert zeta == pytest.approx(np.pi / 4 - 0.38, abs=1e-12)
        assert zeta_dot == pytest.approx(0.0, abs=1e-12)
        assert zeta_ddot == pytest.approx(0.38 * 3 * (np.pi / 0.69) ** 2, rel=1e-12)

    def test_endpoints_equal_a0(self):
        series = ZetaSeries(0.5, 2.0, (Term(1, 0.1, 1), Term(2, -0.2, 3), Term(3, 0.05, 2)))
        zeta, _, _ = series.evaluate(np.array([0.0, 2.0]))
        np.testing.assert_allclose(zeta, [0.5, 0.5], atol=1e-15)

    def test_derivatives_match_finite_differences(self):
        series = ZetaSeries(0.7, 1.3, (Term(1, 0.1, 2), Term(2, -0.15, 1), Term(4, 0.2, 3)))
        t = np.linspace(0.05, 1.25, 25)
        eps = 1e-5
        zeta, zeta_dot, zeta_ddot = series.evaluate(t)
        plus, _, _ = series.evaluate(t + eps)
        minus, _, _ = series.evaluate(t - eps)
        np.testing.assert_allclose(zeta_dot, (plus - minus) / (2 * eps), atol=1e-7)
        np.testing.assert_allclose(zeta_ddot, (plus - 2 * zeta + minus) / eps**2, atol=1e-3)

    def test_hadamard_series_matches_scalar_differences(self):
        """
        the singlet-triplet Hadamard series at t = 0.37 T against central differences of eval_zeta
        """
        series = ZetaSeries(3 * np.pi / 8, 0.942, (Term(2, -0.22, 4), Term(3, 0.18, 1)))
        t, h = 0.37 * series.T, series.T * 1e-5
        zeta, zeta_dot, zeta_ddot = eval_zeta(series, t)
        plus, minus = eval_zeta(series, t + h)[0], eval_zeta(series, t - h)[0]
        assert zeta_dot == pytest.approx((plus - minus) / (2 * h), rel=1e-6)
        assert zeta_ddot == pytest.approx((plus - 2 * zeta + minus) / h**2, rel=1e-6)

    def test_derivatives_on_random_series(self):
        """
        each derivative against central differences of the one below it, h = T * 1e-5
        """
        rng = np.random.default_rng(2024)
        for _ in range(100):
            T = rng.uniform(0.5, 2.0)
            terms = tuple(
                Term(int(rng.integers(1, 5)), rng.uniform(-0.2, 0.2), int(rng.integers(1, 5)))
                for _ in range(int(rng.integers(1, 4)))
            )
            series = ZetaSeries(rng.uniform(0.3, 1.2), T, terms)
            h = T * 1e-5
            t = rng.uniform(h, T - h, 100)
            _, zeta_dot, zeta_ddot = series.evaluate(t)
            plus, plus_dot, _ = series.evaluate(t + h)
            minus, minus_dot, _ = series.evaluate(t - h)
            first = (plus - minus) / (2 * h)
            second = (plus_dot - minus_dot) / (2 * h)
            np.testing.assert_allclose(zeta_dot, first, rtol=1e-5, atol=1e-5 * np.max(np.abs(zeta_dot)))
            np.testing.assert_allclose(zeta_ddot, second, rtol=1e-5, atol=1e-5 * np.max(np.abs(zeta_ddot)))

    def test_vectorized_matches_scalar(self):
        series = ZetaSeries(0.4, 1.0, (Term(2, 0.1, 2),))
        t = np.linspace(0.0, 1.0, 7)
        zeta, _, _ = series.evaluate(t)
        assert [eval_zeta(series, x)[0] for x in t] == pytest.approx(zeta.tolist())

    def test_outside_window(self):
        series = ZetaSeries.constant(0.5, 1.0)
        with pytest.raises(DomainError):
            series.evaluate(1.5)
        with pytest.raises(DomainError):
            series.evaluate(-0.1)

    def test_bad_terms(self):
        with pytest.raises(DomainError):
            Term(0, 0.1)
        with pytest.raises(DomainError):
            Term(2, 0.1, 0)
        with pytest.raises(DomainError):
            ZetaSeries.constant(0.5, 0.0)

    def test_dict_round_trip(self):
        series = ZetaSeries(3 * np.pi / 8, 0.942, (Term(2, -0.2218, 4), Term(3, 0.18, 1)))
        assert ZetaSeries.from_dict(series.to_dict()) == series

    def test_with_amplitude(self):
        series = ZetaSeries(0.5, 1.0, (Term(2, 0.1, 1), Term(3, 0.2, 1)))
        assert series.with_amplitude(1, -0.3).terms[1] == Term(3, -0.3, 1)
        assert series.with_amplitude(1, -0.3).terms[0] == series.terms[0]


class TestAdmissibility:
    def test_not_series_admissible(self):
        report = check_admissible(ZetaSeries(np.pi / 4, 0.69, (Term(3, -0.38, 1),)), 2 * np.pi)
        assert report.admissible
        assert report.violations == ()
        assert report.min_zeta == pytest.approx(np.pi / 4 - 0.38, abs=1e-6)
        assert report.max_zeta == pytest.approx(np.pi / 4)

    def test_range_violation(self):
        report = check_admissible(ZetaSeries(np.pi / 4, 1.0, (Term(1, 0.9, 1),)), 100.0)
        assert not report.admissible
        assert report.first("range") is not None
        assert report.max_zeta > np.pi / 2

    def test_zero_a0_is_divergence_proximity(self):
        report = check_admissible(ZetaSeries.constant(0.0, 1.0), 2 * np.pi)
        assert not report.admissible
        assert report.first("divergence-proximity").t == 0.0

    def test_slope_violation(self):
        """
        |zeta_dot| above the envelope
        """
        report = check_admissible(ZetaSeries(np.pi / 4, 0.1, (Term(1, 0.5, 1),)), 2 * np.pi)
        assert not report.admissible
        assert report.first("slope") is not None
        assert report.max_slope_ratio > 1

    def test_shrinking_guard_keeps_admissible(self):
        """
        a smaller margin never adds violations on the same grid
        """
        rng = np.random.default_rng(5)
        series_list = [ZetaSeries(0.15, 1.0, (Term(2, 0.3, 1),))]
        for _ in range(20):
            series_list.append(ZetaSeries(rng.uniform(0.05, 1.5), 1.0, (Term(3, rng.uniform(-0.3, 0.3), 1),)))
        guards = (0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4)
        for series in series_list:
            reports = [check_admissible(series, 2 * np.pi, guard=g) for g in guards]
            counts = [len(r.violations) for r in reports]
            assert counts == sorted(counts, reverse=True)
            flags = [r.admissible for r in reports]
            assert flags == sorted(flags)
        first = series_list[0]
        assert not check_admissible(first, 2 * np.pi, guard=0.2).admissible
        assert check_admissible(first, 2 * np.pi, guard=0.1).admissible

    def test_callable_envelope(self):
        series = ZetaSeries(np.pi / 4, 1.0, (Term(2, 0.2, 1),))
        assert check_admissible(series, lambda t: 2 * np.pi + np.sin(t)).admissible

    def test_nonpositive_envelope(self):
        with pytest.raises(InvalidEnvelopeError):
            check_admissible(ZetaSeries.constant(0.5, 1.0), 0.0)
        with pytest.raises(InvalidEnvelopeError):
            check_admissible(ZetaSeries.constant(0.5, 1.0), lambda t: 1.0 - 2 * t)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            check_admissible(ZetaSeries.constant(0.5, 1.0), 1.0, grid_points=10)
        with pytest.raises(DomainError):
            check_admissible(ZetaSeries.constant(0.5, 1.0), 1.0, guard=1.5)
