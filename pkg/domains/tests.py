import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from .catalog import (
    CapacityExceeded,
    DomainSpec,
    InvalidDomain,
    MultiIndex,
    NormTable,
    build_norm_table,
    count_multiindices,
    enumerate_multiindices,
    log_monomial_norm_sq,
    log_sphere_monomial_norm_sq,
    monomial_norm_sq,
    multiindex_array,
    sphere_monomial_norm_sq,
)
from .oracles import (
    bergman_kernel_exact_ball,
    monomial_norm_sq_oracle,
    oracle_streams,
    sphere_monomial_norm_sq_oracle,
    szego_kernel_exact_sphere,
)


class DomainSpecTests(SimpleTestCase):
    def test_unit_ellipsoid_canonicalizes_to_ball(self):
        self.assertEqual(DomainSpec.hermitian_ellipsoid([1, 1]).canonical(), DomainSpec.ball(2))
        ellipsoid = DomainSpec.hermitian_ellipsoid([1, 4])
        self.assertEqual(ellipsoid.canonical(), ellipsoid)

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidDomain):
            DomainSpec.hermitian_ellipsoid([1, 0])
        with self.assertRaises(InvalidDomain):
            DomainSpec.hermitian_ellipsoid([])
        with self.assertRaises(InvalidDomain):
            DomainSpec("ball", 2, (1.0, 2.0))


class EnumerationTests(SimpleTestCase):
    def test_graded_lexicographic_order(self):
        self.assertEqual(
            [m.alpha for m in enumerate_multiindices(2, 1)], [(0, 0), (1, 0), (0, 1)]
        )
        rows = [tuple(r) for r in multiindex_array(3, 2)]
        self.assertEqual(
            rows,
            [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
             (2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)],
        )

    def test_counts(self):
        layer = multiindex_array(3, 4, min_degree=4)
        self.assertEqual(len(layer), 15)
        self.assertEqual(len(multiindex_array(2, 200)), 20301)
        self.assertEqual(count_multiindices(2, 200), 20301)
        indices = enumerate_multiindices(3, 6)
        self.assertEqual(len(set(indices)), len(indices))
        self.assertTrue(all(m.degree == sum(m.alpha) for m in indices))

    def test_budget(self):
        with self.assertRaises(CapacityExceeded) as ctx:
            multiindex_array(3, 100, budget=1000)
        self.assertEqual(ctx.exception.requested, math.comb(103, 3))
        with override_settings(LAB_MAX_INDICES=10):
            with self.assertRaises(CapacityExceeded):
                enumerate_multiindices(2, 4)


class NormTests(SimpleTestCase):
    def test_disk_norms(self):
        disk = DomainSpec.ball(1)
        self.assertAlmostEqual(monomial_norm_sq(disk, (0,)), math.pi)
        for m in (1, 5, 70, 300):
            self.assertAlmostEqual(monomial_norm_sq(disk, (m,)) * (m + 1) / math.pi, 1.0, places=12)

    def test_ellipsoid_constant(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid([1, 4])
        self.assertAlmostEqual(monomial_norm_sq(ellipsoid, (0, 0)), math.pi**2 / 8)

    def test_scaling_law(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid([1.5, 4.0])
        ball = DomainSpec.ball(2)
        for alpha in ((0, 0), (3, 1), (10, 20), (45, 40)):
            scaled = monomial_norm_sq(ellipsoid, alpha) * 1.5 ** (alpha[0] + 1) * 4.0 ** (alpha[1] + 1)
            self.assertAlmostEqual(scaled / monomial_norm_sq(ball, alpha), 1.0, places=13)

    def test_log_space_matches_exact_arithmetic(self):
        ball = DomainSpec.ball(3)
        for alpha in ((20, 20, 20), (1, 2, 3)):
            self.assertAlmostEqual(
                math.exp(log_monomial_norm_sq(ball, alpha)) / monomial_norm_sq(ball, alpha), 1.0, places=12
            )
        self.assertTrue(np.isfinite(log_monomial_norm_sq(ball, (400, 300, 200))))

    def test_sphere_norms(self):
        self.assertAlmostEqual(sphere_monomial_norm_sq(1, (7,)), 2 * math.pi)
        self.assertAlmostEqual(sphere_monomial_norm_sq(2, (0, 0)), 2 * math.pi**2)
        self.assertAlmostEqual(sphere_monomial_norm_sq(2, (1, 0)), math.pi**2)
        self.assertAlmostEqual(
            math.exp(log_sphere_monomial_norm_sq(2, (3, 4))), sphere_monomial_norm_sq(2, (3, 4))
        )

    def test_ball_table_is_monotone(self):
        table = build_norm_table(DomainSpec.ball(2), 30)
        norms = table.norms
        self.assertFalse(table.problems())
        for index, value in norms.items():
            self.assertGreater(value, 0)
            for j in range(2):
                bumped = list(index.alpha)
                bumped[j] += 1
                bigger = MultiIndex(tuple(bumped))
                if bigger in norms:
                    self.assertLess(norms[bigger], value)

    def test_table_csv_round_trip_and_corruption(self):
        domain = DomainSpec.hermitian_ellipsoid([1, 4])
        table = build_norm_table(domain, 12)
        with tempfile.TemporaryDirectory() as tmp:
            path = table.to_csv(Path(tmp) / "norms.csv")
            loaded = NormTable.from_csv(path, domain)
        np.testing.assert_array_equal(loaded.alphas, table.alphas)
        np.testing.assert_allclose(loaded.log_norms, table.log_norms, rtol=0, atol=1e-15)
        corrupted = NormTable(domain, 12, table.alphas, table.log_norms + np.where(np.arange(len(table.alphas)) == 5, 0.1, 0.0))
        self.assertTrue(corrupted.problems())


class MonteCarloOracleTests(SimpleTestCase):
    def test_disk_area(self):
        result = monomial_norm_sq_oracle(DomainSpec.ball(1), (0,), 1_000_000, rng=oracle_streams(1, 1)[0])
        self.assertTrue(result.agrees_with(math.pi, sigmas=3))

    def test_closed_forms(self):
        streams = oracle_streams(2, 3)
        result = monomial_norm_sq_oracle(DomainSpec.ball(2), (1, 0), 400_000, rng=streams[0])
        self.assertTrue(result.agrees_with(math.pi**2 / 6, sigmas=3))
        result = monomial_norm_sq_oracle(DomainSpec.hermitian_ellipsoid([2, 2]), (0, 0), 400_000, rng=streams[1])
        self.assertTrue(result.agrees_with(math.pi**2 / 8, sigmas=3))
        result = sphere_monomial_norm_sq_oracle(2, (1, 0), 400_000, rng=streams[2])
        self.assertTrue(result.agrees_with(math.pi**2, sigmas=3))

    def test_random_indices(self):
        rng = np.random.default_rng(5)
        domains = [DomainSpec.ball(2), DomainSpec.hermitian_ellipsoid([1, 4]), DomainSpec.ball(3)]
        streams = oracle_streams(7, 50)
        for i in range(50):
            domain = domains[i % 3]
            alpha = tuple(int(v) for v in rng.integers(0, 3, size=domain.n))
            result = monomial_norm_sq_oracle(domain, alpha, 200_000, rng=streams[i])
            self.assertTrue(result.agrees_with(monomial_norm_sq(domain, alpha)), (domain, alpha, result))

    def test_sample_floor(self):
        from .catalog import DomainError

        with self.assertRaises(DomainError):
            monomial_norm_sq_oracle(DomainSpec.ball(1), (0,), 100)


class ExactKernelTests(SimpleTestCase):
    def test_origin_values(self):
        self.assertAlmostEqual(bergman_kernel_exact_ball(1, [0], [0]).value.real, 1 / math.pi)
        self.assertAlmostEqual(bergman_kernel_exact_ball(2, [0, 0], [0, 0]).value.real, 2 / math.pi**2)

    def test_disk_series(self):
        ball = DomainSpec.ball(1)
        alphas = multiindex_array(1, 200)
        series = np.sum(np.exp(alphas[:, 0] * math.log(0.25) - log_monomial_norm_sq(ball, alphas)))
        exact = bergman_kernel_exact_ball(1, [0.5], [0.5]).value.real
        self.assertAlmostEqual(exact, 16 / (9 * math.pi))
        self.assertLess(abs(series / exact - 1), 1e-10)

    def test_ball_series_at_radius_point_nine(self):
        ball = DomainSpec.ball(2)
        z = np.array([0.54, 0.72j])
        alphas = multiindex_array(2, 200)
        logs = alphas @ np.log(np.abs(z) ** 2) - log_monomial_norm_sq(ball, alphas)
        series = np.sum(np.exp(logs))
        exact = bergman_kernel_exact_ball(2, z, z)
        self.assertFalse(exact.near_singular)
        self.assertLess(abs(series / exact.value.real - 1), 1e-6)

    def test_near_singular_flag(self):
        self.assertTrue(bergman_kernel_exact_ball(2, [1, 0], [1, 0]).near_singular)
        self.assertTrue(szego_kernel_exact_sphere(2, [1, 0], [1, 0]).near_singular)

    def test_szego_series_against_interior_point(self):
        z = np.array([0.6, 0.8j])
        w = np.array([0.5, 0.25j])
        alphas = multiindex_array(2, 200)
        monomials = np.prod((z * np.conj(w))[None, :] ** alphas, axis=1)
        series = np.sum(monomials * np.exp(-log_sphere_monomial_norm_sq(2, alphas)))
        exact = szego_kernel_exact_sphere(2, z, w)
        self.assertFalse(exact.near_singular)
        self.assertAlmostEqual(exact.value.real, 2 / math.pi**2, places=12)
        self.assertLess(abs(series / exact.value - 1), 1e-10)

    def test_szego_circle(self):
        # n = 1: 1/(2π(1 − z w̄))
        exact = szego_kernel_exact_sphere(1, [1.0], [0.5]).value
        self.assertAlmostEqual(exact.real, 1 / math.pi)
        self.assertAlmostEqual(exact.imag, 0.0)
