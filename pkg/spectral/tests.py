import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase, override_settings

from domains.catalog import CapacityExceeded, DomainSpec
from geometry.services import NonPositiveAlpha

from .chi import ChiProfile, InvalidChiProfile, SpectralError
from .galerkin import QuadratureBudgetExceeded, QuadratureSpec, galerkin_toeplitz_matrix
from .helffer_sjostrand import ResolventIllConditioned, _hs_pass, eigen_functional_calculus, helffer_sjostrand_chi
from .projector import (
    ProjectorBuilder,
    RotationGenerator,
    build_boundary_projector,
    build_projector,
    functional_square,
    projector_cutoff,
    toeplitz_eigenvalue,
)

CHI = ChiProfile(center=1.5, radius=0.5)


class ChiProfileTests(SimpleTestCase):
    def test_support_and_peak(self):
        self.assertAlmostEqual(CHI(1.5), math.exp(-1))
        self.assertAlmostEqual(CHI.sup, math.exp(-1))
        self.assertEqual(CHI(1.0), 0.0)
        self.assertEqual(CHI(2.0), 0.0)
        self.assertEqual(CHI(0.3), 0.0)
        values = CHI(np.linspace(0, 3, 301))
        self.assertTrue(np.all(values >= 0))
        self.assertLessEqual(values.max(), math.exp(-1))

    def test_support_must_be_positive(self):
        with self.assertRaisesMessage(InvalidChiProfile, "(0, +∞)"):
            ChiProfile(center=0.5, radius=0.5)
        with self.assertRaises(InvalidChiProfile):
            ChiProfile(center=1.0, radius=0.0)

    def test_signed_profiles_need_flag(self):
        with self.assertRaises(InvalidChiProfile):
            ChiProfile(1.5, 0.5, kind="dipole")
        with self.assertRaises(InvalidChiProfile):
            ChiProfile(1.5, 0.5, amplitude=-1.0)
        dipole = ChiProfile(1.5, 0.5, kind="dipole", allow_signed=True)
        self.assertTrue(dipole.is_signed)
        self.assertLess(dipole(1.3), 0)
        self.assertGreater(dipole(1.7), 0)

    def test_taylor_coefficients_reproduce_profile(self):
        h = 1e-3
        for chi in (CHI, CHI.squared(), ChiProfile(1.5, 0.5, kind="dipole", allow_signed=True)):
            t = np.array([1.1, 1.4, 1.5, 1.85])
            coeffs = chi.taylor(t, 8)
            series = coeffs @ (h ** np.arange(9))
            np.testing.assert_allclose(series, chi(t + h), rtol=1e-12, atol=1e-18)
            np.testing.assert_allclose(coeffs[:, 0], chi(t), rtol=1e-14)

    def test_taylor_vanishes_outside_support(self):
        coeffs = CHI.taylor(np.array([0.5, 2.5]), 5)
        self.assertFalse(np.any(coeffs))

    def test_substitution_identity(self):
        for alpha in (1.0, 2.0, 1.37):
            for power in (1, 2, 3):
                direct = CHI.scaled_moment(alpha, power)
                substituted = alpha ** -(power + 1) * CHI.moment(power)
                self.assertAlmostEqual(direct, substituted, places=10)

    def test_damped_scaled_moment(self):
        for alpha in (0.5, 1.0, 2.0):
            self.assertAlmostEqual(CHI.damped_scaled_moment(alpha, 2, 0.0), CHI.scaled_moment(alpha, 2), places=10)
        # χ(tα)e^{rt} over t equals α⁻¹χ(s)e^{rs/α} over s
        direct = CHI.damped_scaled_moment(2.0, 0, -3.0)
        substituted = 0.5 * CHI.damped_scaled_moment(1.0, 0, -1.5)
        self.assertAlmostEqual(direct, substituted, places=10)
        with self.assertRaises(SpectralError):
            CHI.damped_scaled_moment(0.0, 1, -1.0)

    def test_squaring_and_scaling(self):
        t = np.linspace(1.01, 1.99, 17)
        np.testing.assert_allclose(CHI.squared()(t), CHI(t) ** 2, rtol=1e-14)
        np.testing.assert_allclose(CHI.scaled(2.0)(t), 2 * CHI(t), rtol=0)


class RotationGeneratorTests(SimpleTestCase):
    def test_eigenvalues(self):
        self.assertEqual(toeplitz_eigenvalue(RotationGenerator((1.0, 1.0)), (3, 4)), 7)
        self.assertEqual(toeplitz_eigenvalue(RotationGenerator((1.0, 2.0)), (3, 4)), 11)
        self.assertEqual(toeplitz_eigenvalue(RotationGenerator((1.0, 2.0)), (0, 0)), 0)
        self.assertEqual(CHI.at_scale(0.0, 10), 0.0)

    def test_weights_must_be_positive(self):
        with self.assertRaises(SpectralError):
            RotationGenerator((1.0, 0.0))

    def test_reeb_like_on_model_boundaries(self):
        rng = np.random.default_rng(1)
        generator = RotationGenerator((1.0, 2.0))
        points = []
        for _ in range(10):
            z = rng.normal(size=2) + 1j * rng.normal(size=2)
            points.append(z / np.linalg.norm(z))
        for point, result in zip(points, generator.check_reeb_like(DomainSpec.ball(2), points)):
            self.assertAlmostEqual(result.alpha, abs(point[0]) ** 2 + 2 * abs(point[1]) ** 2, places=12)

    def test_reversed_flow_is_rejected(self):
        class Reversed(RotationGenerator):
            def field(self):
                forward = super().field()
                return lambda p: -forward(p)

        with self.assertRaises(NonPositiveAlpha):
            Reversed((1.0, 1.0)).check_reeb_like(DomainSpec.ball(2), [np.array([1, 0])])


class ProjectorTests(SimpleTestCase):
    def setUp(self):
        self.ball = DomainSpec.ball(2)
        self.unweighted = RotationGenerator.unweighted(2)

    def test_support_arithmetic(self):
        proj = build_projector(self.ball, self.unweighted, CHI, 10)
        self.assertEqual(sorted(set(proj.degrees.tolist())), list(range(11, 20)))
        proj = build_projector(self.ball, self.unweighted, CHI, 10.5)
        self.assertEqual(sorted(set(proj.degrees.tolist())), list(range(11, 21)))

    def test_rank(self):
        proj = build_projector(self.ball, self.unweighted, CHI, 100)
        self.assertEqual(proj.rank, 15049)
        self.assertEqual(proj.rank, sum(d + 1 for d in range(101, 200)))
        self.assertTrue(np.all(proj.weights > 0))
        self.assertTrue(np.all(proj.weights <= math.exp(-1)))

    def test_truncation_exactness(self):
        generator = RotationGenerator((1.0, 2.0))
        proj = build_projector(self.ball, generator, CHI, 17)
        wider = build_projector(self.ball, generator, CHI, 17, cutoff=projector_cutoff(generator, CHI, 17) + 15)
        np.testing.assert_array_equal(proj.alphas, wider.alphas)
        np.testing.assert_array_equal(proj.weights, wider.weights)
        np.testing.assert_array_equal(proj.log_norms, wider.log_norms)

    def test_composition(self):
        proj = build_projector(self.ball, self.unweighted, CHI, 30)
        squared = build_projector(self.ball, self.unweighted, CHI.squared(), 30)
        np.testing.assert_array_equal(squared.alphas, proj.alphas)
        np.testing.assert_allclose(squared.weights, functional_square(proj), rtol=1e-14)

    def test_trace_linearity(self):
        proj = build_projector(self.ball, self.unweighted, CHI, 40)
        doubled = build_projector(self.ball, self.unweighted, CHI.scaled(2.0), 40)
        self.assertEqual(doubled.trace(), 2 * proj.trace())

    def test_boundary_projector(self):
        interior = build_projector(self.ball, self.unweighted, CHI, 10)
        boundary = build_boundary_projector(2, self.unweighted, CHI, 10)
        np.testing.assert_array_equal(boundary.alphas, interior.alphas)
        circle = build_boundary_projector(1, RotationGenerator.unweighted(1), CHI, 20)
        self.assertEqual(circle.alphas[:, 0].tolist(), list(range(21, 40)))
        np.testing.assert_allclose(np.exp(circle.log_norms), 2 * math.pi, rtol=1e-14)

    def test_active_block(self):
        full = build_projector(self.ball, self.unweighted, CHI, 12)
        block = build_projector(self.ball, self.unweighted, CHI, 12, active=(True, False))
        self.assertTrue(np.all(block.alphas[:, 1] == 0))
        expected = full.alphas[full.alphas[:, 1] == 0]
        np.testing.assert_array_equal(block.alphas, expected)
        self.assertTrue(block.covers((True, False)))
        self.assertFalse(block.covers((True, True)))
        with self.assertRaises(SpectralError):
            block.trace()

    def test_builder_and_budget(self):
        builder = ProjectorBuilder(self.ball, self.unweighted, CHI, budget=100)
        with self.assertRaises(CapacityExceeded):
            builder(50)
        with override_settings(LAB_MAX_INDICES=1_000_000):
            self.assertEqual(ProjectorBuilder(self.ball, self.unweighted, CHI)(10).rank,
                             sum(d + 1 for d in range(11, 20)))

    def test_record_export(self):
        proj = build_projector(self.ball, self.unweighted, CHI, 10)
        with tempfile.TemporaryDirectory() as tmp:
            frame = pd.read_csv(proj.to_csv(Path(tmp) / "records.csv"))
        self.assertEqual(list(frame.columns), ["a0", "a1", "pairing", "weight", "log_norm_sq"])
        self.assertEqual(len(frame), proj.rank)

    def test_invalid_k(self):
        with self.assertRaises(SpectralError):
            build_projector(self.ball, self.unweighted, CHI, 0)


class GalerkinTests(SimpleTestCase):
    def test_disk_is_diagonal(self):
        matrix = galerkin_toeplitz_matrix(DomainSpec.ball(1), RotationGenerator.unweighted(1), 5)
        np.testing.assert_allclose(matrix, np.diag(np.arange(6.0)), atol=1e-8)

    def test_weighted_ball_off_diagonal(self):
        generator = RotationGenerator((1.0, 2.0))
        matrix = galerkin_toeplitz_matrix(DomainSpec.ball(2), generator, 3)
        off = matrix - np.diag(np.diag(matrix))
        self.assertLessEqual(np.max(np.abs(off)), 1e-8)
        self.assertLessEqual(np.max(np.abs(matrix - matrix.conj().T)), 1e-10)

    def test_matches_diagonal_path(self):
        from domains.catalog import multiindex_array

        for domain, generator in (
            (DomainSpec.ball(2), RotationGenerator((1.0, 2.0))),
            (DomainSpec.hermitian_ellipsoid([1.0, 4.0]), RotationGenerator((1.0, 1.0))),
        ):
            matrix = galerkin_toeplitz_matrix(domain, generator, 8)
            eigenvalues = generator.pairing(multiindex_array(2, 8))
            np.testing.assert_allclose(np.diag(matrix).real, eigenvalues, rtol=1e-2, atol=1e-8)
            chi = ChiProfile(center=0.5, radius=0.3)
            np.testing.assert_allclose(
                eigen_functional_calculus(matrix, chi, 10),
                np.diag(chi.at_scale(eigenvalues, 10)),
                atol=1e-6,
            )

    def test_budget(self):
        with self.assertRaises(QuadratureBudgetExceeded):
            galerkin_toeplitz_matrix(DomainSpec.ball(2), RotationGenerator.unweighted(2), 4, budget=100)
        with self.assertRaises(QuadratureBudgetExceeded):
            galerkin_toeplitz_matrix(
                DomainSpec.ball(2), RotationGenerator.unweighted(2), 2, QuadratureSpec(200, 200)
            )

    def test_degree_limit(self):
        with self.assertRaises(SpectralError):
            galerkin_toeplitz_matrix(DomainSpec.ball(1), RotationGenerator.unweighted(1), 13)


class HelfferSjostrandTests(SimpleTestCase):
    def test_diagonal_matrix(self):
        result = helffer_sjostrand_chi(np.diag([0.0, 5.0, 15.0]), CHI, 10)
        np.testing.assert_allclose(result, np.diag([0.0, 0.0, math.exp(-1)]), atol=1e-6)

    def test_random_hermitian_matrix(self):
        rng = np.random.default_rng(42)
        q, _ = np.linalg.qr(rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50)))
        matrix = (q * rng.uniform(0, 30, size=50)) @ q.conj().T
        matrix = 0.5 * (matrix + matrix.conj().T)
        result = helffer_sjostrand_chi(matrix, CHI, 10)
        oracle = eigen_functional_calculus(matrix, CHI, 10)
        self.assertLessEqual(np.linalg.norm(result - oracle, 2), 1e-6)

    def test_spectrum_outside_support(self):
        result = helffer_sjostrand_chi(np.diag([0.0, 3.0, 25.0, 40.0]), CHI, 10)
        self.assertLessEqual(np.max(np.abs(result)), 1e-8)

    def test_rejects_non_hermitian(self):
        with self.assertRaises(SpectralError):
            helffer_sjostrand_chi(np.array([[0.0, 1.0], [0.0, 0.0]]), CHI, 10)

    def _bounds(self, matrix, order, levels):
        a = np.asarray(matrix, dtype=complex)
        eigenvalues = np.linalg.eigvalsh(a)
        return [_hs_pass(a, eigenvalues, CHI, 10, order, 40 * 2**i, 12 * 2**i)[1] for i in range(levels)]

    def test_refinement_shrinks_the_near_spectrum_bound(self):
        for order in (1, 2):
            bounds = self._bounds(np.diag([13.0, 16.5]), order, 3)
            self.assertGreater(bounds[0], 0.0)
            self.assertTrue(all(b < a for a, b in zip(bounds, bounds[1:])), (order, bounds))

    def test_refinement_resolves_low_order_extension(self):
        matrix = np.diag([13.0, 16.5])
        coarse, fine = self._bounds(matrix, 2, 2)
        tolerance = math.sqrt(coarse * fine)
        with self.assertLogs("spectral.helffer_sjostrand", level="DEBUG") as logs:
            result = helffer_sjostrand_chi(matrix, CHI, 10, order=2, nodes=200, max_refinements=1, tolerance=tolerance)
        self.assertTrue(any("Refining" in line for line in logs.output))
        self.assertTrue(any("converged at level 1" in line for line in logs.output))
        np.testing.assert_allclose(result, eigen_functional_calculus(matrix, CHI, 10), atol=1e-6)

    def test_unresolved_spectrum_raises(self):
        with self.assertRaises(ResolventIllConditioned) as ctx:
            helffer_sjostrand_chi(np.diag([13.0, 16.5]), CHI, 10, order=0, max_refinements=0)
        self.assertEqual(ctx.exception.refinements, 0)
