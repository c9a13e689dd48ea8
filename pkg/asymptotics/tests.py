import json
import math
import tempfile

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from domains.catalog import DomainSpec
from geometry.services import NotOnBoundary
from kernels.scans import NamedPair
from spectral.chi import ChiProfile
from spectral.projector import RotationGenerator, build_projector

from .fitting import AsymptoticsError, NonPositiveValue, fit_growth_order, is_strictly_decreasing, log_slope
from .predictions import (
    boundary_trace_prediction,
    predict,
    predict_A0,
    predict_b0,
    predict_b0_substituted,
    sphere_integral,
)
from .reports import AsymptoticsReport, Verdict, summary_frame, write_summary
from .services import (
    DepthTooLarge,
    boundary_leading_ratio_test,
    boundary_trace_test,
    growth_order_test,
    interior_damping_test,
    interior_decay_test,
    leading_ratio_test,
    offdiagonal_decay_test,
    trace_scan,
)

CHI = ChiProfile(center=1.5, radius=0.5)
LADDER = [50, 100, 200, 400]
BALL = DomainSpec.ball(2)
UNWEIGHTED = RotationGenerator.unweighted(2)
WEIGHTED = RotationGenerator((1.0, 2.0))


class PredictionTests(SimpleTestCase):
    def test_ball_b0_is_the_plain_moment(self):
        b0 = predict_b0((1.0, 0.0), CHI, UNWEIGHTED, BALL)
        self.assertAlmostEqual(b0, CHI.moment(2) / math.pi**2, places=12)

    def test_direct_and_substituted_routes_agree(self):
        for x in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8j)]:
            direct = predict_b0(x, CHI, WEIGHTED, BALL)
            substituted = predict_b0_substituted(x, CHI, WEIGHTED, BALL)
            self.assertAlmostEqual(direct, substituted, delta=1e-10 * direct)

    def test_weighted_points_differ_by_two_to_the_minus_three(self):
        at_one = predict_b0((1.0, 0.0), CHI, WEIGHTED, BALL)
        at_two = predict_b0((0.0, 1.0), CHI, WEIGHTED, BALL)
        self.assertAlmostEqual(at_two / at_one, 2.0**-3, places=9)

    def test_A0_on_the_circle_and_weighted_sphere(self):
        circle = predict_A0((1.0,), CHI, RotationGenerator.unweighted(1))
        self.assertAlmostEqual(circle, CHI.moment(0) / (2 * math.pi), places=12)
        sphere = predict_A0((1.0, 0.0), CHI, WEIGHTED)
        self.assertAlmostEqual(sphere, CHI.moment(1) / (2 * math.pi**2), places=12)

    def test_prediction_record(self):
        prediction = predict((0.0, 1.0), CHI, WEIGHTED, BALL)
        self.assertEqual(prediction.order_interior, 3)
        self.assertEqual(prediction.order_boundary, 2)
        self.assertAlmostEqual(prediction.alpha_at_point, 2.0, places=12)
        self.assertAlmostEqual(prediction.det_levi, 1.0, places=10)
        self.assertGreater(prediction.b0, 0)
        self.assertGreater(prediction.A0, 0)

    def test_ellipsoid_b0_uses_levi_determinant(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid((1.0, 4.0))
        b0 = predict_b0((0.0, 0.5), CHI, UNWEIGHTED, ellipsoid)
        # det 1/2, α = 1/2
        self.assertAlmostEqual(b0, 0.5 * 0.5**-3 * CHI.moment(2) / math.pi**2, places=9)

    def test_interior_point_is_rejected(self):
        with self.assertRaises(NotOnBoundary):
            predict_b0((0.5, 0.0), CHI, UNWEIGHTED, BALL)

    def test_sphere_volume(self):
        for n in (1, 2, 3):
            volume = sphere_integral(n, lambda s: np.ones(s.shape[0]), points=16)
            self.assertAlmostEqual(volume, 2 * math.pi**n / math.factorial(n - 1), places=10)

    def test_sphere_integral_of_a_modulus(self):
        # ∫_{S^3} |x_1|² dσ = π²
        value = sphere_integral(2, lambda s: s[:, 0], points=8)
        self.assertAlmostEqual(value, math.pi**2, places=12)

    def test_boundary_trace_prediction_matches_lattice_count(self):
        k = 300.0
        unweighted = boundary_trace_prediction(2, UNWEIGHTED, CHI, k, points=32)
        self.assertAlmostEqual(unweighted / (k**2 * CHI.moment(1)), 1.0, places=9)
        weighted = boundary_trace_prediction(2, WEIGHTED, CHI, k, points=32)
        self.assertAlmostEqual(weighted / (k**2 * CHI.moment(1) / 2.0), 1.0, places=9)


class FittingTests(SimpleTestCase):
    def test_pure_power_law(self):
        ks = [10, 20, 40, 80]
        fit = fit_growth_order(ks, [3.0 * k**3 for k in ks])
        self.assertAlmostEqual(fit.slope, 3.0, places=12)
        self.assertAlmostEqual(fit.constant, 3.0, places=9)
        self.assertLess(fit.residual, 1e-12)

    def test_non_positive_value(self):
        with self.assertRaises(NonPositiveValue) as ctx:
            fit_growth_order([1, 2, 3, 4], [1.0, 2.0, 0.0, 4.0])
        self.assertEqual(ctx.exception.index, 2)

    def test_too_few_samples(self):
        with self.assertRaises(AsymptoticsError):
            fit_growth_order([1, 2, 3], [1.0, 2.0, 3.0])

    def test_log_slope_and_monotonicity(self):
        self.assertAlmostEqual(log_slope([1, 2], [1.0, math.e]), 1.0, places=12)
        self.assertTrue(is_strictly_decreasing([3, 2, 1]))
        self.assertFalse(is_strictly_decreasing([3, 3, 1]))


class ReportTests(SimpleTestCase):
    def _report(self, claim_id, clauses):
        return AsymptoticsReport(
            claim_id=claim_id,
            description="d",
            ladder=[1.0, 2.0],
            clauses=clauses,
            empirical={"values": np.array([1.0, 2.0])},
            provenance={"seed": 1},
        )

    def test_verdict(self):
        self.assertEqual(self._report("a", {"x": True}).verdict, Verdict.PASS)
        self.assertEqual(self._report("a", {"x": True, "y": False}).verdict, Verdict.FAIL)
        self.assertEqual(self._report("a", {}).verdict, Verdict.FAIL)

    def test_combine_prefixes_clauses(self):
        merged = AsymptoticsReport.combine(
            "leading", "merged", [self._report("p", {"x": True}), self._report("q", {"x": False})]
        )
        self.assertEqual(set(merged.clauses), {"p.x", "q.x"})
        self.assertEqual(merged.failed_clauses(), ["q.x"])
        self.assertEqual(merged.verdict, Verdict.FAIL)

    def test_json_is_sorted_and_deterministic(self):
        report = self._report("b", {"z": True, "a": True}).with_provenance(config_hash="abc")
        text = report.to_json()
        self.assertEqual(text, report.to_json())
        data = json.loads(text)
        self.assertEqual(list(data), sorted(data))
        self.assertEqual(data["provenance"], {"config_hash": "abc", "seed": 1})
        self.assertEqual(data["verdict"], "pass")

    def test_write_and_summary(self):
        reports = [self._report("b", {"x": True}), self._report("a", {"x": False})]
        with tempfile.TemporaryDirectory() as tmp:
            path = reports[0].write(tmp)
            self.assertEqual(path.name, "report_b.json")
            summary = pd.read_csv(write_summary(reports, tmp))
        self.assertEqual(list(summary["claim_id"]), ["a", "b"])
        self.assertEqual(list(summary["verdict"]), ["fail", "pass"])
        self.assertEqual(summary_frame(reports)["clauses_total"].tolist(), [1, 1])


class LeadingRatioTests(SimpleTestCase):
    def test_unweighted_ball(self):
        report = leading_ratio_test((1.0, 0.0), CHI, UNWEIGHTED, LADDER)
        self.assertTrue(report.passed, report.clauses)
        self.assertLessEqual(abs(report.ratios[-1] - 1.0), 0.03)

    def test_disk(self):
        report = leading_ratio_test((1.0,), CHI, RotationGenerator.unweighted(1), LADDER)
        self.assertTrue(report.passed, report.clauses)

    def test_weighted_points(self):
        for x in [(1.0, 0.0), (0.0, 1.0)]:
            report = leading_ratio_test(x, CHI, WEIGHTED, [50, 100, 150, 200])
            self.assertEqual(report.tolerance, 0.10)
            self.assertTrue(report.passed, (x, report.clauses))

    def test_ellipsoid(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid((1.0, 4.0))
        report = leading_ratio_test((0.0, 0.5), CHI, UNWEIGHTED, [50, 100, 150, 200], domain=ellipsoid)
        self.assertTrue(report.passed, report.clauses)

    def test_scaling_chi_leaves_ratios_unchanged(self):
        plain = leading_ratio_test((1.0, 0.0), CHI, UNWEIGHTED, [50, 100])
        scaled = leading_ratio_test((1.0, 0.0), CHI.scaled(3.0), UNWEIGHTED, [50, 100])
        np.testing.assert_allclose(scaled.ratios, plain.ratios, rtol=1e-12)
        self.assertEqual(scaled.clauses, plain.clauses)

    def test_boundary_variant(self):
        report = boundary_leading_ratio_test((1.0, 0.0), CHI, UNWEIGHTED, LADDER)
        self.assertTrue(report.passed, report.clauses)


class GrowthOrderTests(SimpleTestCase):
    def test_interior_orders(self):
        for n in (1, 2, 3):
            x = (1.0,) + (0.0,) * (n - 1)
            report = growth_order_test(x, CHI, RotationGenerator.unweighted(n), LADDER)
            self.assertTrue(report.passed, (n, report.empirical["slope"]))

    def test_boundary_order(self):
        report = growth_order_test((1.0, 0.0), CHI, UNWEIGHTED, LADDER, boundary=True)
        self.assertEqual(report.predicted["order"], 2)
        self.assertTrue(report.passed, report.empirical["slope"])


class InteriorTests(SimpleTestCase):
    def test_damping_near_the_boundary(self):
        report = interior_damping_test((1.0, 0.0), 0.01, CHI, UNWEIGHTED, [100, 200, 400])
        self.assertTrue(report.passed, report.clauses)
        self.assertLess(report.predicted["rho"], 0)

    def test_zero_depth(self):
        report = interior_damping_test((1.0, 0.0), 0.0, CHI, UNWEIGHTED, [100, 200])
        np.testing.assert_allclose(report.empirical["ratio"], [1.0, 1.0], rtol=0, atol=0)
        np.testing.assert_allclose(report.ratios, [1.0, 1.0], atol=1e-10)

    def test_depth_limit(self):
        with self.assertRaises(DepthTooLarge):
            interior_damping_test((1.0, 0.0), 0.1, CHI, UNWEIGHTED, [100])

    def test_decay_inside(self):
        report = interior_decay_test((0.9, 0.0), CHI, UNWEIGHTED, [100, 200, 400])
        self.assertTrue(report.passed, report.clauses)
        self.assertAlmostEqual(report.predicted["slope"], 2 * 1.0 * (0.81 - 1) / 1.8, places=12)

    def test_damping_with_weighted_generator(self):
        report = interior_damping_test((0.0, 1.0), 0.01, CHI, WEIGHTED, [100, 200, 400])
        self.assertAlmostEqual(report.predicted["alpha"], 2.0, places=8)
        self.assertTrue(report.passed, report.clauses)
        np.testing.assert_allclose(report.ratios, 1.0, atol=0.02)

    def test_damping_on_ellipsoid(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid((1.0, 4.0))
        report = interior_damping_test((0.0, 0.5), 0.01, CHI, UNWEIGHTED, [100, 200, 400], domain=ellipsoid)
        self.assertAlmostEqual(report.predicted["alpha"], 0.5, places=8)
        self.assertTrue(report.passed, report.clauses)
        np.testing.assert_allclose(report.ratios, 1.0, atol=0.02)

    def test_decay_on_ellipsoid_matches_the_ball(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid((1.0, 4.0))
        report = interior_decay_test((0.0, 0.45), CHI, UNWEIGHTED, [100, 200, 400], domain=ellipsoid)
        self.assertTrue(report.passed, report.clauses)
        ball = interior_decay_test((0.9, 0.0), CHI, UNWEIGHTED, [100, 200, 400])
        self.assertAlmostEqual(report.predicted["slope"], ball.predicted["slope"], places=10)
        self.assertAlmostEqual(report.empirical["slope"], ball.empirical["slope"], places=9)

    def test_decay_rate_scales_with_alpha(self):
        report = interior_decay_test((0.0, 0.9), CHI, WEIGHTED, [100, 200, 400])
        self.assertAlmostEqual(report.predicted["alpha"], 2.0, places=8)
        self.assertAlmostEqual(report.predicted["slope"], 1.0 * (0.81 - 1) / 1.8, places=10)

    def test_origin_is_identically_zero(self):
        report = interior_decay_test((0.0, 0.0), CHI, UNWEIGHTED, [100, 200])
        self.assertEqual(report.clauses, {"identically_zero": True})


class OffDiagonalDecayTests(SimpleTestCase):
    def test_shipped_pairs(self):
        pairs = [
            NamedPair("half", (1.0, 0.0), (0.5, math.sqrt(0.75))),
            NamedPair("orth", (1.0, 0.0), (0.0, 1.0)),
            NamedPair("inner", (0.8, 0.0), (1.0, 0.0)),
        ]
        report = offdiagonal_decay_test(pairs, CHI, UNWEIGHTED, LADDER)
        self.assertTrue(report.passed, report.clauses)
        self.assertIn("orth.identically_zero", report.clauses)
        self.assertIn("half.k^8", report.clauses)
        self.assertAlmostEqual(report.predicted["half.series_rate"], math.log(0.5), places=12)

    def test_ladder_too_short(self):
        with self.assertRaises(AsymptoticsError):
            offdiagonal_decay_test([NamedPair("p", (1.0, 0.0), (0.0, 1.0))], CHI, UNWEIGHTED, [100])


class TraceTests(SimpleTestCase):
    def test_ball_traces(self):
        for n in (1, 2):
            report = trace_scan(DomainSpec.ball(n), RotationGenerator.unweighted(n), CHI, LADDER)
            self.assertTrue(report.passed, (n, report.clauses, report.empirical["slope"]))
            self.assertAlmostEqual(report.ratios[-1], 1.0, delta=0.02)

    def test_trace_is_linear_in_chi(self):
        plain = build_projector(BALL, UNWEIGHTED, CHI, 120).trace()
        doubled = build_projector(BALL, UNWEIGHTED, CHI.scaled(2.0), 120).trace()
        self.assertEqual(doubled, 2.0 * plain)

    def test_boundary_trace(self):
        report = boundary_trace_test(2, UNWEIGHTED, CHI, LADDER)
        self.assertEqual(report.tolerance, 0.05)
        self.assertTrue(report.passed, report.ratios)

    def test_weighted_and_disk_boundary_traces(self):
        weighted = boundary_trace_test(2, WEIGHTED, CHI, [50, 100, 200])
        self.assertEqual(weighted.tolerance, 0.10)
        self.assertTrue(weighted.passed, weighted.ratios)
        disk = boundary_trace_test(1, RotationGenerator.unweighted(1), CHI, [50, 100, 200, 400])
        self.assertTrue(disk.passed, disk.ratios)
