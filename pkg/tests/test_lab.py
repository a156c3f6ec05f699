import math

import numpy as np
import pytest

from qrlab.errors import ConfigError, DataError, DomainError
from qrlab.exponents import DeltaResult, ExponentQuery, delta
from qrlab.lab import (
    ExperimentSpec,
    Measurement,
    ScalingFit,
    estimate_crossover,
    fit_power_law,
    run_experiment,
    verdict,
)

from fractions import Fraction


def synthetic_table(fn, rungs=7, p=2.0):
    hs = [0.5 * 2 ** -j for j in range(rungs)]
    return [Measurement(j, h, p, fn(h)) for j, h in enumerate(hs)]


class TestSpecValidation:
    def test_good(self):
        s = ExperimentSpec("zonal", "great_circle", (2, 4), tuple(64 * 2 ** j for j in range(6)))
        assert s.spec_hash() == s.spec_hash()

    @pytest.mark.parametrize("kwargs,field", [
        (dict(family="bogus"), "family"),
        (dict(target="bogus"), "target"),
        (dict(degrees=(64, 128, 256)), "degrees"),
        (dict(ps=(1.5,)), "ps"),
        (dict(tolerance=0.0), "tolerance"),
    ])
    def test_bad_fields(self, kwargs, field):
        base = dict(family="zonal", target="great_circle", ps=(2,),
                    degrees=tuple(64 * 2 ** j for j in range(6)))
        base.update(kwargs)
        with pytest.raises(ConfigError) as err:
            ExperimentSpec(**base)
        assert err.value.field == field


class TestRunExperiment:
    def test_constant_family(self):
        spec = ExperimentSpec("constant", "great_circle", (2, 4),
                              tuple(8 * 2 ** j for j in range(6)))
        res = run_experiment(spec)
        for m in res.table:
            assert m.value == pytest.approx((2 * math.pi) ** (1 / m.p), rel=1e-12)
        fit = fit_power_law(res.table, 2.0)
        assert abs(fit.slope) < 1e-10

    def test_highest_weight_equator_p_independent_modulus(self):
        spec = ExperimentSpec("highest_weight", "equator", (2, 3, 4),
                              tuple(16 * 2 ** j for j in range(6)))
        res = run_experiment(spec)
        by_l = {}
        for m in res.table:
            by_l.setdefault(m.degree, []).append(m.value / (2 * math.pi) ** (1 / m.p))
        for vals in by_l.values():
            assert max(vals) - min(vals) < 1e-10 * max(vals)

    def test_zonal_monotone_growth_large_p(self):
        spec = ExperimentSpec("zonal", "great_circle", (4, 6),
                              tuple(32 * 2 ** j for j in range(6)))
        res = run_experiment(spec)
        for p in (4.0, 6.0):
            vals = [m.value for m in sorted(res.table, key=lambda m: m.degree)
                    if m.p == p]
            assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_deterministic(self):
        spec = ExperimentSpec("zonal", "great_circle", (2,),
                              tuple(16 * 2 ** j for j in range(6)))
        a, b = run_experiment(spec), run_experiment(spec)
        assert a.table == b.table
        assert a.manifest["spec_hash"] == b.manifest["spec_hash"]


class TestFitPowerLaw:
    def test_pure_power_exact(self):
        fit = fit_power_law(synthetic_table(lambda h: h ** -0.5), 2.0)
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.residual < 1e-12 and not fit.trimmed

    def test_log_variant_recovers_gamma(self):
        fn = lambda h: h ** -0.5 * math.log(1 / h) ** 0.5
        table = synthetic_table(fn, rungs=8)
        fit = fit_power_law(table, 2.0, with_log=True)
        assert fit.slope == pytest.approx(0.5, abs=1e-9)
        assert fit.log_coefficient == pytest.approx(1.0, abs=1e-9)
        assert fit.residual < 1e-6
        plain = fit_power_law(table, 2.0, with_log=False)
        assert plain.slope > 0.5
        assert plain.residual > 10 * fit.residual

    def test_preasymptotic_trimming(self):
        table = synthetic_table(lambda h: h ** -0.5, rungs=8)
        table[0] = Measurement(0, table[0].h, 2.0, table[0].value * 1.5)
        table[1] = Measurement(1, table[1].h, 2.0, table[1].value * 1.2)
        fit = fit_power_law(table, 2.0)
        assert fit.trimmed and fit.rungs_used == 6
        assert fit.slope == pytest.approx(0.5, abs=1e-10)

    def test_rejects_short_or_bad(self):
        with pytest.raises(DataError):
            fit_power_law(synthetic_table(lambda h: h, rungs=4), 2.0)
        bad = synthetic_table(lambda h: -1.0)
        with pytest.raises(DataError):
            fit_power_law(bad, 2.0)


class TestVerdict:
    def make_fit(self, slope, residual=1e-8, with_log=False, gamma=0.0):
        return ScalingFit(slope, gamma, 0.0, residual, 7, with_log)

    def test_plain_pass_fail(self):
        theory = DeltaResult(Fraction(1, 4), False)
        assert verdict(self.make_fit(0.26), theory, 0.03).status == "pass"
        assert verdict(self.make_fit(0.40), theory, 0.03).status == "fail"

    def test_log_case_clear_winner(self):
        theory = delta(ExponentQuery(3, 1, 2))
        assert theory.log_half_power
        with_log = self.make_fit(0.5, residual=1e-7, with_log=True, gamma=1.0)
        without = self.make_fit(0.56, residual=1e-3)
        rep = verdict(with_log, theory, 0.05, fit_without_log=without)
        assert rep.status == "pass" and rep.residual_comparison == "smaller"

    def test_log_case_tied_is_inconclusive(self):
        theory = delta(ExponentQuery(3, 1, 2))
        with_log = self.make_fit(0.52, residual=1.00e-3, with_log=True)
        without = self.make_fit(0.53, residual=1.05e-3)
        rep = verdict(with_log, theory, 0.08, fit_without_log=without)
        assert rep.status == "inconclusive" and rep.residual_comparison == "tied"

    def test_log_case_worse_fails(self):
        theory = delta(ExponentQuery(3, 1, 2))
        with_log = self.make_fit(0.5, residual=2e-3, with_log=True)
        without = self.make_fit(0.5, residual=1e-4)
        assert verdict(with_log, theory, 0.05, fit_without_log=without).status == "fail"

    def test_log_case_needs_both(self):
        theory = delta(ExponentQuery(3, 1, 2))
        with pytest.raises(DomainError):
            verdict(self.make_fit(0.5, with_log=True), theory, 0.05)


class TestCrossover:
    def test_synthetic_intersection(self):
        # upper branch 1/2 - 1/p vs flat 1/4: crossing at p = 4
        inv_ps = [0.0, 0.1, 0.25]
        upper = [0.5 - q for q in inv_ps]
        lower = [0.25, 0.25, 0.25]
        assert estimate_crossover(inv_ps, upper, inv_ps, lower) == pytest.approx(4.0)

    def test_parallel_rejected(self):
        with pytest.raises(DataError):
            estimate_crossover([0, 0.25], [0.5, 0.25], [0, 0.25], [0.6, 0.35])


class TestAgainstTheory:
    def test_zonal_p6_slope(self):
        spec = ExperimentSpec("zonal", "great_circle", (6,),
                              tuple(64 * 2 ** j for j in range(6)))
        res = run_experiment(spec)
        fit = fit_power_law(res.table, 6.0)
        theory = delta(ExponentQuery(2, 1, 6))
        rep = verdict(fit, theory, 0.05)
        assert rep.status == "pass"
        assert fit.slope == pytest.approx(1 / 3, abs=0.05)
