"""Gauges, regularity profiles and family tail conditions."""

import math

import numpy as np
import pytest

from fplab.errors import ConfigurationError, InputError, RefusalError
from fplab.gauges import (
    Gauge,
    GaugeFamily,
    builtin_gauge,
    check_family_C6,
    check_family_C7,
    check_family_C7_multi,
    explicit_family,
    expression_gauge,
    family_member_array,
    iterate_gauge,
    iterated_family,
    regularity_grid,
    require_profile,
    verify_gauge_regularity,
)
from fplab.reports import Verdict


class TestGaugeBasics:
    def test_builtin_values(self):
        assert builtin_gauge("half")(3.0) == 1.5
        assert builtin_gauge("mk")(1.0) == 0.5
        assert builtin_gauge("id")(7.0) == 7.0
        step = builtin_gauge("step01")
        assert step(0.5) == 0.0
        assert step(1.0) == 1.0

    def test_unknown_builtin(self):
        with pytest.raises(ConfigurationError, match="unknown builtin"):
            builtin_gauge("exp")

    def test_expression_gauge(self):
        g = expression_gauge("7.0 * t / 12.0")
        assert g(12.0) == 7.0
        assert g.name == "7.0 * t / 12.0"
        named = expression_gauge("t / 2.0", name="halve")
        assert named.name == "halve"

    def test_working_range_guard(self):
        g = builtin_gauge("half", t_max=10.0)
        with pytest.raises(InputError, match="outside its working range"):
            g(-1.0)
        with pytest.raises(InputError, match="outside its working range"):
            g(10.5)

    def test_profile_validation(self):
        with pytest.raises(ConfigurationError, match="unknown gauge profile"):
            Gauge(name="bad", fn=lambda t: t, profile=frozenset({"smooth"}))
        with pytest.raises(ConfigurationError, match="t_max must be positive"):
            Gauge(name="bad", fn=lambda t: t, t_max=0.0)

    def test_apply_array_matches_scalar(self):
        g = builtin_gauge("mk")
        ts = np.array([0.0, 0.5, 1.0, 2.0, 100.0])
        out = g.apply_array(ts)
        assert out.shape == ts.shape
        for t, v in zip(ts, out):
            assert v == g(float(t))

    def test_apply_array_range_guard(self):
        g = builtin_gauge("half", t_max=1.0)
        with pytest.raises(InputError):
            g.apply_array(np.array([0.5, 2.0]))


class TestRegularity:
    """verify_gauge_regularity emits one REG-<entry> report per claim."""

    def test_builtin_profiles_pass(self):
        for name in ("half", "mk", "id", "step01"):
            g = builtin_gauge(name)
            reports = verify_gauge_regularity(g)
            assert [r.condition_id for r in reports] == sorted(
                f"REG-{e}" for e in g.profile
            )
            assert all(r.verdict is Verdict.PASS for r in reports), name

    def test_jump_defeats_continuity_claim(self):
        # step01 jumps at t=1; claiming full continuity must be caught there
        g = builtin_gauge("step01", profile=frozenset({"continuous"}))
        (rep,) = verify_gauge_regularity(g)
        assert rep.condition_id == "REG-continuous"
        assert rep.verdict is Verdict.FAIL
        assert any(w["t"] == 1.0 and w["side"] == "left" for w in rep.witnesses)

    def test_step_is_not_positive_on_positive(self):
        g = builtin_gauge("step01", profile=frozenset({"positive_on_positive"}))
        (rep,) = verify_gauge_regularity(g)
        assert rep.verdict is Verdict.FAIL
        assert rep.witnesses[0]["value"] == 0.0

    def test_identity_is_not_strictly_below_identity(self):
        g = Gauge(name="id-claims-below", fn=lambda t: t,
                  profile=frozenset({"strictly_below_identity"}))
        (rep,) = verify_gauge_regularity(g)
        assert rep.verdict is Verdict.FAIL
        w = rep.witnesses[0]
        assert w["value"] == w["t"] and w["margin"] == 0.0

    def test_tiny_positive_margin_still_strictly_below(self):
        # mk has margin t^2/(1+t), far below any slack near 0, yet the strict
        # claim holds everywhere and must not be refuted
        g = builtin_gauge("mk", profile=frozenset({"strictly_below_identity"}))
        (rep,) = verify_gauge_regularity(g)
        assert rep.verdict is Verdict.PASS

    def test_decreasing_gauge_fails_nondecreasing(self):
        g = Gauge(name="decay", fn=lambda t: 1.0 / (1.0 + t),
                  profile=frozenset({"nondecreasing", "zero_at_zero"}))
        reports = {r.condition_id: r for r in verify_gauge_regularity(g)}
        rep = reports["REG-nondecreasing"]
        assert rep.verdict is Verdict.FAIL
        assert rep.witnesses[0]["drop"] > 0
        assert reports["REG-zero_at_zero"].verdict is Verdict.FAIL
        assert reports["REG-zero_at_zero"].witnesses[0]["value"] == 1.0

    def test_invalid_values_fail_every_claim(self):
        g = Gauge(name="dips-negative", fn=lambda t: t - 0.5,
                  profile=frozenset({"nondecreasing", "continuous"}))
        reports = verify_gauge_regularity(g)
        assert len(reports) == 2
        for rep in reports:
            assert rep.verdict is Verdict.FAIL
            assert "invalid values" in rep.resolution_note

    def test_grid_guards(self):
        g = builtin_gauge("half")
        with pytest.raises(InputError, match="strictly increasing"):
            verify_gauge_regularity(g, grid=(0.0, 1.0))
        with pytest.raises(InputError, match="strictly increasing"):
            verify_gauge_regularity(g, grid=(0.0, 1.0, 1.0, 2.0))
        with pytest.raises(InputError, match="inside the gauge working range"):
            verify_gauge_regularity(g, grid=(0.0, 1.0, 2e3))

    def test_default_grid_shape(self):
        grid = regularity_grid()
        assert grid[0] == 0.0
        assert 1.0 in grid
        assert grid[-1] == 1e3
        assert all(b > a for a, b in zip(grid, grid[1:]))


class TestRequireProfile:
    def test_satisfied_requirement_is_silent(self):
        require_profile(builtin_gauge("mk"),
                        frozenset({"nondecreasing", "strictly_below_identity"}))

    def test_undeclared_entry_refuses(self):
        with pytest.raises(RefusalError, match="does not declare"):
            require_profile(builtin_gauge("id"), frozenset({"strictly_below_identity"}))

    def test_declared_but_failing_entry_refuses(self):
        g = Gauge(name="liar", fn=lambda t: t,
                  profile=frozenset({"strictly_below_identity"}))
        with pytest.raises(RefusalError, match="fails required regularity"):
            require_profile(g, frozenset({"strictly_below_identity"}))


class TestFamilies:
    def test_iterated_half_values(self):
        fam = iterated_family(builtin_gauge("half"))
        assert iterate_gauge(fam, 1, 1.0) == 0.5
        assert iterate_gauge(fam, 3, 1.0) == 0.125

    def test_iterated_mk_closed_form(self):
        # iterating t/(1+t) gives t/(1+n t)
        fam = iterated_family(builtin_gauge("mk"))
        for n in (1, 2, 5, 10):
            for t in (0.25, 1.0, 3.0):
                assert iterate_gauge(fam, n, t) == pytest.approx(
                    t / (1.0 + n * t), rel=1e-12
                )

    def test_member_index_guards(self):
        fam = iterated_family(builtin_gauge("half"))
        with pytest.raises(InputError, match="indexed from 1"):
            iterate_gauge(fam, 0, 1.0)
        two = explicit_family([builtin_gauge("half"), builtin_gauge("mk")],
                              zero_fixed=True)
        assert iterate_gauge(two, 2, 1.0) == 0.5
        with pytest.raises(InputError, match="has 2 members"):
            iterate_gauge(two, 3, 1.0)

    def test_family_member_array(self):
        fam = iterated_family(builtin_gauge("half"))
        ts = np.array([1.0, 2.0, 4.0])
        out = family_member_array(fam, 2, ts)
        assert np.array_equal(out, np.array([0.25, 0.5, 1.0]))
        with pytest.raises(InputError):
            family_member_array(fam, 0, ts)

    def test_family_validation(self):
        with pytest.raises(ConfigurationError, match="needs a base gauge"):
            GaugeFamily(kind="iterated", zero_fixed=True)
        with pytest.raises(ConfigurationError, match="at least one member"):
            GaugeFamily(kind="explicit", zero_fixed=True)
        with pytest.raises(ConfigurationError, match="unknown family kind"):
            GaugeFamily(kind="mixed", zero_fixed=True,
                        base=builtin_gauge("half"))

    def test_zero_fixed_inference(self):
        assert iterated_family(builtin_gauge("half")).zero_fixed
        shift_up = Gauge(name="shift-up", fn=lambda t: t + 1.0)
        assert not iterated_family(shift_up).zero_fixed

    def test_describe(self):
        assert iterated_family(builtin_gauge("half")).describe() == "iterated(half)"
        fam = explicit_family([builtin_gauge("half")] * 3, zero_fixed=True)
        assert fam.describe() == "explicit[3]"


class TestFamilyC6:
    def test_halving_family_passes(self):
        fam = iterated_family(builtin_gauge("half"))
        rep = check_family_C6(fam, (1.0, 0.5, 0.125))
        assert rep.verdict is Verdict.PASS
        for w in rep.witnesses:
            assert w["tail"] == "stabilized"
            assert w["limsup_estimate"] < 1e-12

    def test_constant_family_fails(self):
        one = Gauge(name="one", fn=lambda t: 1.0)
        fam = explicit_family([one] * 8, zero_fixed=False)
        rep = check_family_C6(fam, (1.0,))
        assert rep.verdict is Verdict.FAIL
        assert rep.witnesses == [
            {"eps": 1.0, "limsup_estimate": 1.0, "tail": "stabilized"}
        ]

    def test_oscillating_tail_is_inconclusive(self):
        lo = Gauge(name="lo", fn=lambda t: 0.3)
        hi = Gauge(name="hi", fn=lambda t: 0.6)
        fam = explicit_family([lo, hi] * 4, zero_fixed=False)
        rep = check_family_C6(fam, (1.0,))
        assert rep.verdict is Verdict.INCONCLUSIVE
        assert rep.witnesses[0]["tail"] == "unstable"

    def test_horizon_guard(self):
        fam = iterated_family(builtin_gauge("half"))
        with pytest.raises(InputError, match="at least 4"):
            check_family_C6(fam, (1.0,), n_horizon=3)


class TestFamilyC7:
    def test_halving_family_band_pull(self):
        # t=2 needs two halvings to get strictly below 1, t=1 needs one
        fam = iterated_family(builtin_gauge("half"))
        rep = check_family_C7(fam, 1.0)
        assert rep.verdict is Verdict.PASS
        assert rep.witnesses == [{"eps": 1.0, "delta": 1.0, "max_nu": 2}]

    def test_mk_family_band_pull(self):
        fam = iterated_family(builtin_gauge("mk"))
        rep = check_family_C7(fam, 1.0)
        assert rep.verdict is Verdict.PASS
        assert rep.witnesses[0]["max_nu"] == 1

    def test_mk_family_small_eps_index(self):
        fam = iterated_family(builtin_gauge("mk"))
        rep = check_family_C7(fam, 0.125)
        assert rep.verdict is Verdict.PASS
        assert rep.witnesses[0] == {"eps": 0.125, "delta": 1.0, "max_nu": 8}
        # closed form at the band endpoint: member 7 is still at or above
        # 1/8 there, member 8 is below it
        assert iterate_gauge(fam, 7, 1.125) >= 0.125
        assert iterate_gauge(fam, 8, 1.125) < 0.125

    def test_identity_family_is_inconclusive_not_fail(self):
        """A finite delta search cannot refute the existential, so exhausting
        every candidate reports inconclusive with the defeating points."""
        fam = iterated_family(builtin_gauge("id"))
        rep = check_family_C7(fam, 1.0)
        assert rep.verdict is Verdict.INCONCLUSIVE
        assert len(rep.witnesses) == 8
        assert rep.witnesses[0] == {"eps": 1.0, "delta": 1.0, "defeating_t": 1.0}
        assert "cannot refute" in rep.resolution_note

    def test_eps_guard(self):
        fam = iterated_family(builtin_gauge("half"))
        with pytest.raises(InputError, match="eps > 0"):
            check_family_C7(fam, 0.0)

    def test_multi_merges_worst_verdict(self):
        mk = iterated_family(builtin_gauge("mk"))
        rep = check_family_C7_multi(mk, (1.0, 0.5))
        assert rep.verdict is Verdict.PASS
        assert [w["max_nu"] for w in rep.witnesses] == [1, 2]
        ident = iterated_family(builtin_gauge("id"))
        assert check_family_C7_multi(ident, (1.0,)).verdict is Verdict.INCONCLUSIVE
