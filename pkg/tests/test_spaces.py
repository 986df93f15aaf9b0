"""Spaces, premetrics, regions and cyclic set pairs."""

import math

import numpy as np
import pytest

from fplab.errors import ConfigurationError, InputError
from fplab.expressions import compile_expression
from fplab.reports import Verdict
from fplab.spaces import (
    Box,
    CyclicSetting,
    DiskSet,
    IntervalSet,
    Space,
    composed_premetric,
    custom_premetric,
    default_region,
    estimate_set_gap,
    eval_premetric,
    metric_premetric,
    premetric_diagonal,
    premetric_matrix,
    sample_pairs,
    sample_points,
    shifted_premetric,
    verify_premetric_axioms,
)
from fplab.gauges import builtin_gauge

LINE = Space(id="line", dimension=1)
PLANE = Space(id="plane", dimension=2)


class TestSpaceBasics:
    def test_euclidean_distance(self):
        assert PLANE.distance(PLANE.point(0.0, 0.0), PLANE.point(3.0, 4.0)) == 5.0

    def test_p_norm(self):
        sp = Space(id="taxi", dimension=2, norm=1.0)
        assert sp.distance(sp.point(0.0, 0.0), sp.point(3.0, 4.0)) == 7.0

    def test_point_dimension_guard(self):
        with pytest.raises(InputError):
            LINE.point(1.0, 2.0)

    def test_membership_guard(self):
        other = Space(id="elsewhere", dimension=1)
        with pytest.raises(InputError):
            LINE.distance(LINE.point(0.0), other.point(1.0))

    def test_distance_matrix_matches_scalar(self):
        a = np.array([[0.0, 0.0], [1.0, 2.0]])
        b = np.array([[3.0, 4.0], [1.0, 2.0], [-1.0, 0.5]])
        mat = PLANE.distance_matrix(a, b)
        assert mat.shape == (2, 3)
        for i in range(2):
            for j in range(3):
                assert mat[i, j] == pytest.approx(
                    PLANE.distance(PLANE.point(*a[i]), PLANE.point(*b[j])))


class TestRegionsAndSets:
    def test_box_sampling_stays_inside(self):
        box = Box((-2.0, 0.0), (3.0, 1.0))
        rng = np.random.default_rng(7)
        coords = box.sample_coords(rng, 100)
        assert coords.shape == (100, 2)
        assert (coords[:, 0] >= -2.0).all() and (coords[:, 0] <= 3.0).all()
        assert (coords[:, 1] >= 0.0).all() and (coords[:, 1] <= 1.0).all()

    def test_default_region(self):
        box = default_region(PLANE)
        assert box.lows == (-10.0, -10.0) and box.highs == (10.0, 10.0)

    def test_interval_contains_and_guards(self):
        s = IntervalSet(LINE, 1.0, math.inf)
        assert s.contains(LINE.point(1.0))
        assert not s.contains(LINE.point(0.999))
        with pytest.raises(ConfigurationError):
            IntervalSet(LINE, 2.0, 1.0)
        with pytest.raises(ConfigurationError):
            IntervalSet(PLANE, 0.0, 1.0)

    def test_disk_contains(self):
        d = DiskSet(PLANE, (1.0, 1.0), 2.0)
        assert d.contains(PLANE.point(2.0, 2.0))
        assert not d.contains(PLANE.point(4.0, 1.0))

    def test_sampling_helpers(self):
        rng = np.random.default_rng(0)
        box = default_region(LINE)
        pts = sample_points(LINE, box, 5, rng)
        assert len(pts) == 5 and all(p.space_id == "line" for p in pts)
        pairs = sample_pairs(LINE, box, 4, rng)
        assert len(pairs) == 4


class TestCyclicSetting:
    def test_exact_gap_for_intervals(self):
        setting = CyclicSetting.derive(
            LINE,
            IntervalSet(LINE, 1.0, math.inf),
            IntervalSet(LINE, -math.inf, -1.0),
        )
        assert setting.gap == 2.0
        assert setting.gap_provenance == "exact"

    def test_exact_gap_for_disks(self):
        setting = CyclicSetting.derive(
            PLANE, DiskSet(PLANE, (0.0, 0.0), 1.0), DiskSet(PLANE, (5.0, 0.0), 1.0))
        assert setting.gap == 3.0
        assert setting.gap_provenance == "exact"

    def test_estimated_gap_is_conservative(self):
        # sampled estimate can only overshoot the true infimum
        class Half:
            space = LINE
            convex = True

            def contains(self, x):
                return x.coords[0] >= 1.0

            def sample(self, rng):
                return LINE.point(1.0 + rng.uniform(0.0, 5.0))

            def describe(self):
                return "custom-half-line"

        setting = CyclicSetting(LINE, Half(), IntervalSet(LINE, -math.inf, -1.0),
                                *estimate_set_gap(
                                    CyclicSetting(LINE, Half(),
                                                  IntervalSet(LINE, -math.inf, -1.0),
                                                  0.0, "estimated")))
        assert setting.gap >= 2.0
        assert setting.gap_provenance == "estimated"


class TestPremetrics:
    def test_metric_premetric_claims(self):
        p = metric_premetric(LINE)
        assert {"symmetric", "triangle", "tau_distance"} <= p.claims
        assert eval_premetric(p, LINE.point(1.0), LINE.point(4.0)) == 3.0

    def test_shifted_premetric_clamps_at_gap(self):
        setting = CyclicSetting.derive(
            LINE, IntervalSet(LINE, 1.0, math.inf), IntervalSet(LINE, -math.inf, -1.0))
        p = shifted_premetric(setting)
        assert eval_premetric(p, LINE.point(1.0), LINE.point(3.0)) == 0.0
        assert eval_premetric(p, LINE.point(3.0), LINE.point(-2.0)) == 3.0
        assert "mixed_triangle" in p.claims
        assert p.companion is not None and p.companion.kind == "metric"

    def test_composed_premetric_applies_gauge(self):
        p = composed_premetric(builtin_gauge("mk"), metric_premetric(LINE))
        x, y = LINE.point(0.0), LINE.point(3.0)
        assert eval_premetric(p, x, y) == pytest.approx(3.0 / 4.0)
        assert "symmetric" in p.claims

    def test_custom_premetric_from_expression(self):
        fn = compile_expression("abs(x[0] - y[0]) * abs(x[0] - y[0])", ("x", "y"))
        p = custom_premetric(LINE, fn, claims=frozenset({"symmetric"}))
        assert eval_premetric(p, LINE.point(1.0), LINE.point(3.0)) == 4.0

    def test_matrix_and_diagonal_match_scalar(self):
        p = composed_premetric(builtin_gauge("half"), metric_premetric(LINE))
        xs = np.array([[0.0], [1.0], [5.0]])
        ys = np.array([[2.0], [2.0], [2.0]])
        mat = premetric_matrix(p, xs, ys)
        diag = premetric_diagonal(p, xs, ys)
        for i in range(3):
            want = eval_premetric(p, LINE.point(*xs[i]), LINE.point(*ys[i]))
            assert diag[i] == pytest.approx(want)
            assert mat[i, i] == pytest.approx(want)


class TestAxiomVerification:
    def test_metric_axioms_pass(self):
        p = metric_premetric(PLANE)
        rng = np.random.default_rng(2)
        triples = [tuple(sample_points(PLANE, default_region(PLANE), 3, rng))
                   for _ in range(40)]
        reports = verify_premetric_axioms(p, triples)
        ids = {r.condition_id for r in reports}
        assert {"AX-SYM", "AX-TRI", "AX-TAU"} <= ids
        assert all(r.verdict is Verdict.PASS for r in reports)

    def test_broken_triangle_is_caught(self):
        fn = compile_expression(
            "abs(x[0] - y[0]) * abs(x[0] - y[0])", ("x", "y"))
        p = custom_premetric(LINE, fn, claims=frozenset({"triangle"}))
        pts = [LINE.point(v) for v in (0.0, 1.0, 2.0)]
        reports = verify_premetric_axioms(p, [tuple(pts)])
        tri = next(r for r in reports if r.condition_id == "AX-TRI")
        # squared distance: 4 > 1 + 1 through the midpoint
        assert tri.verdict is Verdict.FAIL
        assert tri.witnesses

    def test_mixed_axioms_need_companion(self):
        fn = compile_expression("abs(x[0] - y[0])", ("x", "y"))
        p = custom_premetric(LINE, fn, claims=frozenset({"mixed_triangle"}))
        pts = [LINE.point(v) for v in (0.0, 1.0, 2.0)]
        with pytest.raises(ConfigurationError):
            verify_premetric_axioms(p, [tuple(pts)])
