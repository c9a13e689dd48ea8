import numpy as np
from django.test import SimpleTestCase

from .defining import (
    AmbientConvention,
    DefiningFunction,
    DegenerateGradient,
    apply_j,
    complex_hessian_from_real,
    finite_difference_gradient,
    finite_difference_hessian,
    normalize_defining_function,
    quadratic_defining_function,
    to_real,
)
from .services import (
    DimensionTooSmall,
    NonPositiveAlpha,
    NotOnBoundary,
    NotTangent,
    decompose_reeb_like,
    horizontal_basis,
    levi_matrix,
    levi_spectrum,
    omega0_at,
    rotation_field,
    tangent_frame,
)


def _ball(n):
    return quadratic_defining_function(np.ones(n))


class AmbientConventionTests(SimpleTestCase):
    def test_pairing_matches_real_metric(self):
        convention = AmbientConvention(n=3)
        rng = np.random.default_rng(3)
        for _ in range(5):
            u = rng.normal(size=3) + 1j * rng.normal(size=3)
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            self.assertAlmostEqual(
                abs(convention.pairing(u, v) - convention.pairing_from_metric(u, v)), 0.0, places=12
            )

    def test_coordinate_vectors_have_half_norm(self):
        convention = AmbientConvention(n=2)
        e = np.eye(2)
        self.assertAlmostEqual(convention.pairing_from_metric(e[0], e[0]).real, 0.5)
        self.assertAlmostEqual(abs(convention.pairing_from_metric(e[0], e[1])), 0.0)


class NormalizationTests(SimpleTestCase):
    def test_ball_boundary_point(self):
        rho = normalize_defining_function(_ball(2), to_real([1, 0]))
        p = to_real([1, 0])
        self.assertAlmostEqual(rho.value(p), 0.0)
        self.assertAlmostEqual(np.linalg.norm(rho.grad(p)), 1.0, places=12)

    def test_ball_interior_value(self):
        rho = normalize_defining_function(_ball(2), to_real([1, 0]))
        self.assertAlmostEqual(rho.value(to_real([0.5, 0])), -0.75)

    def test_ellipsoid_gradient_against_finite_differences(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([1, 0])
        rho = normalize_defining_function(raw, p)
        self.assertAlmostEqual(np.linalg.norm(rho.grad(p)), 1.0, places=12)
        np.testing.assert_allclose(
            rho.grad(p), finite_difference_gradient(rho.value, p), atol=1e-8
        )

    def test_hessian_against_finite_differences(self):
        rho = normalize_defining_function(quadratic_defining_function([1.0, 4.0]), to_real([1, 0]))
        for z in ([0.6, 0.3j], [0.0, 0.5]):
            p = to_real(z)
            np.testing.assert_allclose(
                rho.hessian(p), finite_difference_hessian(rho.value, p), atol=1e-5
            )

    def test_scaling_consistency(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([np.sqrt(0.5), np.sqrt(0.125) * 1j])
        a = normalize_defining_function(raw, p)
        b = normalize_defining_function(raw.scaled(7.5), p)
        self.assertAlmostEqual(a.value(p), b.value(p), places=10)
        np.testing.assert_allclose(a.grad(p), b.grad(p), atol=1e-10)
        np.testing.assert_allclose(a.hessian(p), b.hessian(p), atol=1e-10)

    def test_already_normalized_is_returned(self):
        rho = normalize_defining_function(_ball(1), to_real([1]))
        self.assertIs(normalize_defining_function(rho, to_real([1])), rho)

    def test_degenerate_gradient(self):
        with self.assertRaises(DegenerateGradient):
            normalize_defining_function(_ball(2), np.zeros(4))


class ContactFormTests(SimpleTestCase):
    def test_disk_contact_form_is_dy(self):
        contact = omega0_at(_ball(1), to_real([1]))
        np.testing.assert_allclose(contact.omega0, [0.0, 1.0], atol=1e-15)

    def test_omega0_on_reeb_direction(self):
        for raw, z in (
            (_ball(2), [0, 1j]),
            (quadratic_defining_function([1.0, 4.0]), [0, 0.5]),
            (quadratic_defining_function([2.0, 3.0, 5.0]), [0.3, 0.2j, np.sqrt((1 - 0.18 - 0.12) / 5)]),
        ):
            p = to_real(z)
            rho = normalize_defining_function(raw, p)
            contact = omega0_at(rho, p)
            self.assertAlmostEqual(contact.evaluate(contact.reeb_direction), 1.0, places=10)

    def test_omega0_annihilates_horizontal_vectors(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([np.sqrt(0.5), np.sqrt(0.125) * 1j])
        rho = normalize_defining_function(raw, p)
        contact = omega0_at(rho, p)
        grad = rho.grad(p)
        for v in horizontal_basis(rho, p):
            self.assertLess(abs(np.dot(grad, v)), 1e-10 * np.linalg.norm(v))
            self.assertLess(abs(np.dot(grad, apply_j(v))), 1e-10 * np.linalg.norm(v))
            self.assertLess(abs(contact.evaluate(v)), 1e-10 * np.linalg.norm(v))

    def test_ellipsoid_contact_matches_finite_differences(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([0, 0.5])
        rho = normalize_defining_function(raw, p)
        contact = omega0_at(rho, p)
        fd = apply_j(finite_difference_gradient(rho.value, p))
        np.testing.assert_allclose(contact.omega0, fd, atol=1e-8)
        np.testing.assert_allclose(contact.omega0, [0, 0, 0, 1], atol=1e-12)

    def test_unnormalized_input_gives_same_form(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([0, 0.5])
        np.testing.assert_allclose(
            omega0_at(raw, p).omega0,
            omega0_at(normalize_defining_function(raw, p), p).omega0,
            atol=1e-14,
        )

    def test_interior_point_is_rejected(self):
        with self.assertRaises(NotOnBoundary):
            omega0_at(_ball(2), to_real([0.5, 0]))


class LeviSpectrumTests(SimpleTestCase):
    def test_ball_eigenvalues(self):
        spectrum = levi_spectrum(_ball(2), to_real([0.6, 0.8j]))
        np.testing.assert_allclose(spectrum.eigenvalues, [1.0], atol=1e-12)
        spectrum = levi_spectrum(_ball(3), to_real([0, 0, 1]))
        np.testing.assert_allclose(spectrum.eigenvalues, [1.0, 1.0], atol=1e-12)
        self.assertAlmostEqual(spectrum.det_levi, 1.0, places=12)

    def test_ellipsoid_determinants(self):
        raw = quadratic_defining_function([1.0, 4.0])
        self.assertAlmostEqual(levi_spectrum(raw, to_real([1, 0])).det_levi, 4.0, places=12)
        self.assertAlmostEqual(levi_spectrum(raw, to_real([0, 0.5])).det_levi, 0.5, places=12)

    def test_ellipsoid_against_finite_difference_hessian(self):
        raw = quadratic_defining_function([1.0, 4.0])
        p = to_real([1, 0])
        rho = normalize_defining_function(raw, p)
        frame = tangent_frame(rho, p)
        h = complex_hessian_from_real(finite_difference_hessian(rho.value, p))
        oracle = np.linalg.eigvalsh(frame.T @ h @ np.conj(frame))
        np.testing.assert_allclose(levi_spectrum(rho, p).eigenvalues, oracle, atol=1e-5)

    def test_frame_independence(self):
        raw = quadratic_defining_function([2.0, 3.0, 5.0])
        p = to_real([0.3, 0.2j, np.sqrt((1 - 0.18 - 0.12) / 5)])
        rho = normalize_defining_function(raw, p)
        frame = tangent_frame(rho, p)
        rng = np.random.default_rng(11)
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        np.testing.assert_allclose(
            levi_spectrum(rho, p, frame @ q).eigenvalues,
            levi_spectrum(rho, p, frame).eigenvalues,
            atol=1e-9,
        )

    def test_conformal_covariance(self):
        raw = quadratic_defining_function([1.0, 4.0])
        factor = DefiningFunction(
            n=2,
            value=lambda p: 2.0 + p[0] ** 2 + p[1] ** 2,
            grad=lambda p: np.array([2 * p[0], 2 * p[1], 0.0, 0.0]),
            hessian=lambda p: np.diag([2.0, 2.0, 0.0, 0.0]),
        )
        p = to_real([np.sqrt(0.5), np.sqrt(0.125) * 1j])
        frame = tangent_frame(raw, p)
        np.testing.assert_allclose(
            levi_matrix(raw.times(factor), p, frame),
            factor.value(p) * levi_matrix(raw, p, frame),
            atol=1e-8,
        )

    def test_dimension_one(self):
        spectrum = levi_spectrum(_ball(1), to_real([1]))
        self.assertEqual(spectrum.eigenvalues, ())
        self.assertEqual(spectrum.det_levi, 1.0)
        self.assertTrue(spectrum.dimension_too_small)
        with self.assertRaises(DimensionTooSmall):
            levi_spectrum(_ball(1), to_real([1]), strict=True)


class ReebDecompositionTests(SimpleTestCase):
    def test_unweighted_rotation_on_ball(self):
        field = rotation_field([1.0, 1.0])
        for z in ([1, 0], [0.6, 0.8j], [np.sqrt(0.5), -np.sqrt(0.5)]):
            result = decompose_reeb_like(field, _ball(2), to_real(z))
            self.assertAlmostEqual(result.alpha, 1.0, places=12)
            self.assertLess(np.linalg.norm(result.z_component), 1e-12)

    def test_weighted_rotation_alpha(self):
        field = rotation_field([1.0, 2.0])
        z = np.array([0.6, 0.8j])
        result = decompose_reeb_like(field, _ball(2), to_real(z))
        expected = abs(z[0]) ** 2 + 2 * abs(z[1]) ** 2
        self.assertAlmostEqual(result.alpha, expected, places=12)
        self.assertTrue(1.0 <= result.alpha <= 2.0)

    def test_horizontal_perturbation_round_trip(self):
        rho = normalize_defining_function(_ball(2), to_real([1, 0]))
        p = to_real([1, 0])
        contact = omega0_at(rho, p)
        perturbation = 0.3 * horizontal_basis(rho, p)[0] - 0.1 * horizontal_basis(rho, p)[1]

        def field(q):
            return 1.7 * contact.reeb_direction + perturbation

        result = decompose_reeb_like(field, rho, p)
        self.assertAlmostEqual(result.alpha, 1.7, places=12)
        np.testing.assert_allclose(result.z_component, perturbation, atol=1e-12)
        np.testing.assert_allclose(
            result.alpha * contact.reeb_direction + result.z_component, field(p), atol=1e-10
        )

    def test_radial_field_is_not_tangent(self):
        with self.assertRaises(NotTangent):
            decompose_reeb_like(lambda q: np.asarray(q, dtype=float), _ball(2), to_real([1, 0]))

    def test_reversed_rotation_is_not_reeb_like(self):
        field = rotation_field([1.0, 1.0])
        with self.assertRaises(NonPositiveAlpha):
            decompose_reeb_like(lambda q: -field(q), _ball(2), to_real([1, 0]))
