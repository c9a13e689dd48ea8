import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from domains.catalog import DomainSpec
from spectral.chi import ChiProfile
from spectral.projector import ProjectorBuilder, ProjectorVariant, RotationGenerator, build_projector

from .scans import (
    NamedPair,
    NamedPoint,
    diagonal_scan,
    evaluate,
    offdiagonal_scan,
    write_plot_data,
    write_scan_csv,
)
from .services import KernelError, OutsideDomain, UnstableSummation, degree_sum_kernel_ball, kernel_eval

CHI = ChiProfile(center=1.5, radius=0.5)
BALL = DomainSpec.ball(2)
UNWEIGHTED = RotationGenerator.unweighted(2)


def _sphere_points(count, seed):
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < count:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        if np.min(np.abs(z)) >= 0.2:
            points.append(z)
    return points


class KernelEvalTests(SimpleTestCase):
    def test_boundary_diagonal_degree_sum(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 100)
        expected = sum(CHI(d / 100) * (d + 1) * (d + 2) / math.pi**2 for d in range(101, 200))
        for z in ([1, 0], [0.6, 0.8j]):
            value = kernel_eval(proj, z, z).value
            self.assertEqual(value.imag, 0.0)
            self.assertLess(abs(value.real / expected - 1), 1e-10)
            oracle = degree_sum_kernel_ball(2, CHI, 100, z, z)
            self.assertLess(abs(value / oracle - 1), 1e-10)

    def test_offdiagonal_degree_sum(self):
        z, w = np.array([0.3, 0.4j]), np.array([0.5, 0.2j])
        for n_degree in (30, 60):
            proj = build_projector(BALL, UNWEIGHTED, CHI, n_degree)
            value = kernel_eval(proj, z, w).value
            oracle = degree_sum_kernel_ball(2, CHI, n_degree, z, w)
            self.assertLess(abs(value - oracle), 1e-10 * abs(oracle))

    def test_boundary_variant_degree_sum(self):
        builder = ProjectorBuilder(BALL, UNWEIGHTED, CHI, ProjectorVariant.BOUNDARY.value)
        z = np.array([0.6, 0.8j])
        value = kernel_eval(builder(80), z, z).value
        oracle = degree_sum_kernel_ball(2, CHI, 80, z, z, boundary=True)
        self.assertLess(abs(value / oracle - 1), 1e-10)
        expected = sum(CHI(d / 80) * (d + 1) / (2 * math.pi**2) for d in range(81, 160))
        self.assertLess(abs(value.real / expected - 1), 1e-10)

    def test_exact_zeros(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 50)
        self.assertEqual(kernel_eval(proj, [1, 0], [0, 1]).value, 0)
        sample = kernel_eval(proj, [0, 0], [0, 0])
        self.assertEqual(sample.value, 0)
        self.assertEqual(sample.terms_used, 0)

    def test_hermitian_symmetry_and_positivity(self):
        proj = build_projector(BALL, RotationGenerator((1.0, 2.0)), CHI, 12)
        points = _sphere_points(6, 3)
        for z in points:
            for w in points:
                a = kernel_eval(proj, z, w).value
                b = kernel_eval(proj, w, z).value
                self.assertLessEqual(abs(a - b.conjugate()), 1e-12 * max(abs(a), 1e-300))
            diag = kernel_eval(proj, z, z).value
            self.assertEqual(diag.imag, 0.0)
            self.assertGreater(diag.real, 0.0)

    def test_rotation_equivariance(self):
        generator = RotationGenerator((1.0, 2.0))
        proj = build_projector(BALL, generator, CHI, 15)
        z, w = _sphere_points(2, 9)
        base = kernel_eval(proj, z, w).value
        for theta in (0.3, 1.7, -2.2):
            rotated = kernel_eval(proj, generator.flow(theta, z), generator.flow(theta, w)).value
            self.assertLessEqual(abs(rotated - base), 1e-12 * abs(base))

    def test_cauchy_schwarz_and_gram(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 10)
        points = _sphere_points(20, 17)
        gram = np.array([[kernel_eval(proj, p, q).value for q in points] for p in points])
        diag = gram.diagonal().real
        bound = np.outer(diag, diag) + 1e-10 * np.outer(1 + diag, 1 + diag)
        self.assertTrue(np.all(np.abs(gram) ** 2 <= bound))
        self.assertGreaterEqual(np.linalg.eigvalsh(gram).min(), -1e-10 * np.trace(gram).real)

    def test_wide_term_range(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 400)
        x = np.array([1, 1]) / math.sqrt(2)
        with self.assertRaises(UnstableSummation) as ctx:
            kernel_eval(proj, x, x)
        self.assertGreater(ctx.exception.log_range, 300)
        value = evaluate(proj, x, x).value
        oracle = degree_sum_kernel_ball(2, CHI, 400, x, x)
        self.assertLess(abs(value / oracle - 1), 1e-10)

    def test_block_must_cover_support(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 20, active=(True, False))
        self.assertNotEqual(kernel_eval(proj, [1, 0], [1, 0]).value, 0)
        with self.assertRaises(KernelError):
            kernel_eval(proj, [0.6, 0.8], [0.6, 0.8])

    def test_points_outside_the_closed_domain(self):
        proj = build_projector(BALL, UNWEIGHTED, CHI, 20)
        with self.assertRaises(OutsideDomain) as ctx:
            kernel_eval(proj, [1.1, 0], [1, 0])
        self.assertAlmostEqual(ctx.exception.value, 1.21)
        with self.assertRaises(OutsideDomain):
            kernel_eval(proj, [0.5, 0], [0.9, 0.9j])
        with self.assertRaises(OutsideDomain):
            degree_sum_kernel_ball(2, CHI, 20, [0.8, 0.8], [0.1, 0])

    def test_ellipsoid_closure_uses_shape_weights(self):
        ellipsoid = DomainSpec.hermitian_ellipsoid((1.0, 4.0))
        proj = build_projector(ellipsoid, UNWEIGHTED, CHI, 20)
        self.assertGreater(kernel_eval(proj, [0, 0.5], [0, 0.5]).value.real, 0)
        with self.assertRaises(OutsideDomain):
            kernel_eval(proj, [0, 0.6], [0, 0.6])


class ScanTests(SimpleTestCase):
    def setUp(self):
        self.builder = ProjectorBuilder(BALL, UNWEIGHTED, CHI)
        self.ladder = [50, 100, 200, 400]

    def test_diagonal_scan(self):
        points = [NamedPoint("x1", (1, 0)), NamedPoint("origin", (0, 0))]
        rows = diagonal_scan(self.builder, points, self.ladder)
        self.assertEqual([(r.point_id, r.k) for r in rows][:4], [("origin", float(k)) for k in self.ladder])
        self.assertTrue(all(r.value == 0 for r in rows if r.point_id == "origin"))
        growth = [r.value.real for r in rows if r.point_id == "x1"]
        self.assertTrue(all(b > 7 * a for a, b in zip(growth, growth[1:])))

    def test_offdiagonal_scan(self):
        pairs = [
            NamedPair("half", (1, 0), (0.5, math.sqrt(0.75))),
            NamedPair("orth", (1, 0), (0, 1)),
        ]
        rows = offdiagonal_scan(self.builder, pairs, self.ladder)
        self.assertTrue(all(r.value == 0 for r in rows if r.point_id == "orth"))
        for r in rows:
            if r.point_id == "half":
                bound = r.k**3 * 0.5 ** (2 * r.k * CHI.t_min)
                self.assertLess(abs(r.value), bound)

    def test_ladder_must_ascend(self):
        with self.assertRaises(KernelError):
            diagonal_scan(self.builder, [NamedPoint("x1", (1, 0))], [100, 50])

    def test_outputs(self):
        rows = diagonal_scan(self.builder, [NamedPoint("x1", (1, 0))], self.ladder)
        with tempfile.TemporaryDirectory() as tmp:
            [csv_path] = write_scan_csv(rows, tmp, "diagonal")
            [dat_path] = write_plot_data(rows, tmp, "diagonal")
            frame = pd.read_csv(csv_path)
            data = np.loadtxt(dat_path)
            self.assertEqual(Path(csv_path).name, "scan_diagonal_x1.csv")
        self.assertEqual(list(frame.columns), ["point_id", "k", "re_value", "im_value", "terms_used"])
        self.assertEqual(len(frame), 4)
        self.assertEqual(data.shape, (4, 2))
        np.testing.assert_allclose(data[:, 1], frame["re_value"].to_numpy())
