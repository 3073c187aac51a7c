import math

import numpy as np
import pytest

from smartdca import backtest, means, proofs
from smartdca.errors import ConfigError, DomainError
from smartdca.marketdata import PriceSeries, full_schedule, synth_uniform
from smartdca.modulators import SIGMOID, SIN1, TANH
from smartdca.strategy import StrategySpec


class TestTwoBuyClosedForms:
    def test_gas_example(self):
        mu_ri, mu_dca, mu_smart = proofs.two_buy_closed_forms(0.5, 1.5)
        assert mu_ri == pytest.approx(1.0, abs=1e-12)
        assert mu_dca == pytest.approx(0.75, abs=1e-12)
        assert mu_smart == pytest.approx(0.6, abs=1e-12)

    def test_equal_prices_coincide(self):
        assert proofs.two_buy_closed_forms(1.3, 1.3) == pytest.approx((1.3, 1.3, 1.3), rel=1e-14)

    def test_direct_arithmetic_pair(self):
        # (1+3)/2, 2*3/(1+3), 1*3*4/(1+9)
        assert proofs.two_buy_closed_forms(1.0, 3.0) == pytest.approx((2.0, 1.5, 1.2), rel=1e-14)

    def test_ordering_and_square_gap(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            p1, p2 = np.exp(rng.uniform(-6, 6, 2))
            mu_ri, mu_dca, mu_smart = proofs.two_buy_closed_forms(p1, p2)
            assert mu_ri >= mu_dca * (1 - 1e-12)
            assert mu_dca >= mu_smart * (1 - 1e-12)
            if abs(p1 - p2) > 1e-6 * max(p1, p2):
                assert mu_dca > mu_smart  # equality only at p1 == p2

    def test_agrees_with_backtest_on_two_point_series(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            p1, p2 = np.exp(rng.uniform(-3, 3, 2))
            series = PriceSeries((1, 2), np.asarray([p1, p2]))
            sched = full_schedule(series)
            want = proofs.two_buy_closed_forms(p1, p2)
            for spec, w in zip(
                (StrategySpec("RI"), StrategySpec("DCA"), StrategySpec("RHO", rho=1.0)), want
            ):
                got = backtest.run(series, sched, spec, keep_ledger=False).mu
                assert got == pytest.approx(w, rel=1e-12)

    def test_rejects_bad_prices(self):
        with pytest.raises(DomainError):
            proofs.two_buy_closed_forms(0.0, 1.0)


class TestMuNClosedForm:
    def test_n_zero_is_harmonic(self):
        assert proofs.mu_n_closed_form(0.5, 1.5, 0.0) == pytest.approx(0.75, rel=1e-14)

    def test_n_one_is_two_buy_smart(self):
        assert proofs.mu_n_closed_form(0.5, 1.5, 1.0) == pytest.approx(0.6, rel=1e-14)

    def test_n_five_direct_value(self):
        # 1*2*(1 + 2^5) / (1 + 2^6) = 66/65
        assert proofs.mu_n_closed_form(1.0, 2.0, 5.0) == pytest.approx(66.0 / 65.0, rel=1e-14)

    def test_non_increasing_in_n(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p1, p2 = np.exp(rng.uniform(-3, 3, 2))
            vals = [proofs.mu_n_closed_form(p1, p2, n) for n in np.arange(0, 8, 0.5)]
            for a, b in zip(vals, vals[1:]):
                assert a >= b * (1 - 1e-12)

    def test_agrees_with_backtest(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            p1, p2 = np.exp(rng.uniform(-2, 2, 2))
            series = PriceSeries((1, 2), np.asarray([p1, p2]))
            for n in (0.0, 1.0, 2.0, 4.0):
                spec = StrategySpec("RHO", rho=n, ref_price=p1, cash_cap_ratio=1e200)
                got = backtest.run(series, full_schedule(series), spec, keep_ledger=False).mu
                assert got == pytest.approx(proofs.mu_n_closed_form(p1, p2, n), rel=1e-12)

    def test_large_n_does_not_overflow(self):
        v = proofs.mu_n_closed_form(0.5, 1.5, 200.0)
        assert v == pytest.approx(0.5, rel=1e-9)  # tends to min price


class TestCauchySchwarz:
    def test_distinct_values_strict(self):
        rep = proofs.cauchy_schwarz_check([0.5, 1.5])
        assert rep.holds and rep.slack > 0

    def test_constant_vector_equality_is_exact(self):
        for m in (1, 2, 17):
            rep = proofs.cauchy_schwarz_check([0.37] * m)
            assert rep.holds
            assert rep.slack == 0.0

    def test_thousand_random_vectors(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            p = np.exp(rng.uniform(math.log(1e-4), math.log(1e4), int(rng.integers(1, 101))))
            assert proofs.cauchy_schwarz_check(p).holds

    def test_report_invariant(self):
        rep = proofs.cauchy_schwarz_check([1.0, 2.0, 3.0])
        assert rep.slack == rep.lhs - rep.rhs
        assert rep.holds == (rep.slack >= -rep.tolerance)


class TestFiniteDifferenceMonotonicity:
    GRID = np.arange(-1.0, 3.01, 0.25)

    def test_out_kind_tanh_random_vectors(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            x = np.exp(rng.uniform(-2, 2, 8))
            reports = proofs.finite_difference_monotonicity("out", x, TANH, self.GRID)
            assert all(r.holds for r in reports)
            assert any(r.label.startswith("pair-summand") for r in reports)

    def test_constant_vector_zero_differences(self):
        reports = proofs.finite_difference_monotonicity("out", [2.0] * 5, SIGMOID, self.GRID)
        fd = [r for r in reports if r.label.startswith("fd")]
        assert all(abs(r.lhs) < 1e-9 for r in fd)

    def test_in_kind_on_witness_has_negative_difference(self):
        witness = proofs.find_in_counterexample(2.0)
        reports = proofs.finite_difference_monotonicity(
            "in", witness, SIGMOID, np.arange(2.0, 3.01, 0.25)
        )
        fd = [r for r in reports if r.label.startswith("fd")]
        assert min(r.lhs for r in fd) < proofs.STRICT_NEGATIVE_FD

    def test_moment_and_expectation_kinds(self):
        x = [0.5, 1.0, 2.0]
        for rep in proofs.finite_difference_monotonicity("moment", x, TANH, self.GRID, xi=2.0):
            assert rep.holds
        for rep in proofs.finite_difference_monotonicity(
            "expectation", x, SIGMOID, self.GRID, g=lambda v: v**2
        ):
            assert rep.holds

    def test_lehmer_kind(self):
        reports = proofs.finite_difference_monotonicity("lehmer", [0.5, 2.0, 7.0], TANH, self.GRID)
        assert all(r.holds for r in reports)

    def test_grid_too_coarse_rejected(self):
        with pytest.raises(ConfigError, match="coarse"):
            proofs.finite_difference_monotonicity("out", [1.0, 2.0], TANH, [0.0, 1.0])

    def test_non_ascending_grid_rejected(self):
        with pytest.raises(ConfigError):
            proofs.finite_difference_monotonicity("out", [1.0, 2.0], TANH, [1.0, 0.5])

    def test_unknown_kind_rejected(self):
        with pytest.raises(DomainError):
            proofs.finite_difference_monotonicity("sideways", [1.0, 2.0], TANH, [0.0, 0.25])


class TestFindInCounterexample:
    @pytest.mark.parametrize("rho", [1.0, 2.0, 3.0, 5.0])
    def test_witness_found_below_threshold(self, rho):
        witness = proofs.find_in_counterexample(rho)
        assert witness.shape == (2,)
        assert np.all(witness < math.exp(-1.0 / rho))

    def test_witness_is_deterministic(self):
        a = proofs.find_in_counterexample(2.0)
        b = proofs.find_in_counterexample(2.0)
        assert a.tolist() == b.tolist()

    def test_witness_decreases_the_in_mean(self):
        witness = proofs.find_in_counterexample(2.0)
        lo = means.quasi_lehmer_in(witness, 2.0, SIGMOID)
        hi = means.quasi_lehmer_in(witness, 3.0, SIGMOID)
        assert hi < lo

    def test_invalid_rho(self):
        with pytest.raises(DomainError):
            proofs.find_in_counterexample(-1.0)


class TestOrderingChainCheck:
    def test_identity_chain_on_uniform_series(self):
        s = synth_uniform(100, 0.0, 2.0, seed=42)
        reports = proofs.ordering_chain_check(s, [-1.0, 0.0, 1.0, 2.0, 3.0],
                                              cash_cap_ratio=1e300)
        assert len(reports) == 5  # 4 consecutive pairs + min-price bound
        assert all(r.holds for r in reports)

    def test_constant_series_all_equal(self):
        s = PriceSeries(tuple(range(1, 6)), np.full(5, 1.7))
        reports = proofs.ordering_chain_check(s, [-1.0, 0.0, 2.0])
        assert all(r.holds for r in reports)
        for r in reports[:-1]:
            assert r.slack == pytest.approx(0.0, abs=1e-12)

    def test_sin1_out_chain(self):
        s = synth_uniform(80, 0.0, 2.0, seed=7)
        reports = proofs.ordering_chain_check(s, [0.0, 1.0, 2.0], f=SIN1, variant="out")
        assert all(r.holds for r in reports)

    def test_requires_ascending_rhos(self):
        s = synth_uniform(10, 0.0, 2.0, seed=7)
        with pytest.raises(DomainError):
            proofs.ordering_chain_check(s, [1.0, 0.0])


class TestRunVerification:
    def test_small_suite_all_hold(self):
        verdict = proofs.run_verification(
            seed=123, n_cs_vectors=500, n_chain_series=25, n_fd_vectors=10
        )
        assert verdict["all_hold"]
        assert verdict["rng"] == "numpy-pcg64"
        assert verdict["seed"] == 123
        names = {c["name"] for c in verdict["checks"]}
        assert {"two_buy_closed_forms", "cauchy_schwarz", "ordering_chain_identity",
                "out_monotonicity_fd", "in_counterexample", "lehmer_limit",
                "mean_identities"} <= names

    def test_fault_injection_fails_with_witness(self):
        verdict = proofs.run_verification(
            seed=123, n_cs_vectors=50, n_chain_series=5, n_fd_vectors=2, inject_fault=True
        )
        assert not verdict["all_hold"]
        cs = next(c for c in verdict["checks"] if c["name"] == "cauchy_schwarz")
        assert not cs["holds"]
        assert cs["violations"] and cs["violations"][0]["witness"]["length"] >= 1

    def test_deterministic_given_seed(self):
        a = proofs.run_verification(seed=9, n_cs_vectors=100, n_chain_series=5, n_fd_vectors=2)
        b = proofs.run_verification(seed=9, n_cs_vectors=100, n_chain_series=5, n_fd_vectors=2)
        for ca, cb in zip(a["checks"], b["checks"]):
            assert ca["worst_slack"] == cb["worst_slack"]
