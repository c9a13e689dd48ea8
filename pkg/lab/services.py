"""Verification suites: each turns a RunConfig into one report per claim."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable

import numpy as np

from asymptotics.reports import AsymptoticsReport
from asymptotics.services import (
    boundary_leading_ratio_test,
    boundary_trace_test,
    growth_order_test,
    interior_damping_test,
    interior_decay_test,
    leading_ratio_test,
    offdiagonal_decay_test,
    trace_scan,
)
from domains.catalog import NormTable, monomial_norm_sq, multiindex_array, sphere_monomial_norm_sq
from domains.oracles import monomial_norm_sq_oracle, oracle_streams, sphere_monomial_norm_sq_oracle
from kernels.scans import evaluate
from spectral.chi import ChiKind
from spectral.galerkin import galerkin_toeplitz_matrix
from spectral.helffer_sjostrand import eigen_functional_calculus, helffer_sjostrand_chi
from spectral.projector import build_projector, functional_square

from .config import RunConfig
from .forms import Suite

logger = logging.getLogger(__name__)

STRUCTURE_K = 10.0
GRAM_POINTS = 20
HS_K = 10.0
HS_TOLERANCE = 1e-6
GALERKIN_OFF_DIAGONAL = 1e-8
GALERKIN_RTOL = 1e-2


def _normalized(point) -> tuple[complex, ...]:
    z = np.asarray(point, dtype=complex)
    return tuple(complex(v) for v in z / np.linalg.norm(z))


# ---- suites ----

def run_leading(config: RunConfig) -> AsymptoticsReport:
    parts = []
    for point in config.boundary_points:
        parts.append(
            leading_ratio_test(
                point.z, config.chi, config.generator, config.k_ladder,
                domain=config.domain, budget=config.max_indices, claim_id=point.id,
            )
        )
        if len(config.k_ladder) >= 4:
            parts.append(
                growth_order_test(
                    point.z, config.chi, config.generator, config.k_ladder,
                    domain=config.domain, budget=config.max_indices, claim_id=f"{point.id}_growth",
                )
            )
    return AsymptoticsReport.combine(Suite.LEADING.value, Suite.LEADING.label, parts)


def run_trace(config: RunConfig) -> AsymptoticsReport:
    return trace_scan(
        config.domain, config.generator, config.chi, config.k_ladder,
        budget=config.max_indices, claim_id=Suite.TRACE.value,
    )


def run_interior(config: RunConfig) -> AsymptoticsReport:
    parts = []
    anchor = config.boundary_points[0]
    parts.append(
        interior_damping_test(
            anchor.z, config.depth, config.chi, config.generator, config.k_ladder,
            domain=config.domain, budget=config.max_indices, claim_id=f"{anchor.id}_damping",
        )
    )
    for point in config.interior_points:
        parts.append(
            interior_decay_test(
                point.z, config.chi, config.generator, config.k_ladder,
                domain=config.domain, budget=config.max_indices, claim_id=point.id,
            )
        )
    return AsymptoticsReport.combine(Suite.INTERIOR.value, Suite.INTERIOR.label, parts)


def run_offdiag(config: RunConfig) -> AsymptoticsReport:
    return offdiagonal_decay_test(
        config.pairs, config.chi, config.generator, config.k_ladder,
        domain=config.domain, budget=config.max_indices, claim_id=Suite.OFFDIAGONAL.value,
    )


def run_boundary(config: RunConfig) -> AsymptoticsReport:
    """Szegő variant on S^{2n−1}; boundary points are projected onto the sphere."""
    parts = []
    for point in config.boundary_points:
        z = _normalized(point.z)
        parts.append(
            boundary_leading_ratio_test(
                z, config.chi, config.generator, config.k_ladder,
                budget=config.max_indices, claim_id=point.id,
            )
        )
        if len(config.k_ladder) >= 4:
            parts.append(
                growth_order_test(
                    z, config.chi, config.generator, config.k_ladder,
                    boundary=True, budget=config.max_indices, claim_id=f"{point.id}_growth",
                )
            )
    if config.boundary_trace:
        parts.append(
            boundary_trace_test(
                config.domain.n, config.generator, config.chi, config.k_ladder,
                budget=config.max_indices, claim_id="trace",
            )
        )
    return AsymptoticsReport.combine(Suite.BOUNDARY.value, Suite.BOUNDARY.label, parts)


# ---- oracles ----

def _random_indices(rng: np.random.Generator, n: int, count: int, max_degree: int) -> list[tuple[int, ...]]:
    out = []
    for _ in range(count):
        degree = int(rng.integers(0, max_degree + 1))
        out.append(tuple(int(v) for v in rng.multinomial(degree, [1.0 / n] * n)))
    return out


def norm_oracle_report(config: RunConfig, *, norm_table: Path | None = None) -> AsymptoticsReport:
    """Closed-form monomial norms against Monte Carlo, within 4 standard errors."""
    domain, n = config.domain, config.domain.n
    streams = oracle_streams(config.seed, 2 * config.random_indices + 1)
    alphas = _random_indices(streams[0], n, config.random_indices, config.max_degree)

    interior, sphere = [], []
    for i, alpha in enumerate(alphas):
        exact = monomial_norm_sq(domain, alpha)
        estimate = monomial_norm_sq_oracle(domain, alpha, config.mc_samples, rng=streams[1 + 2 * i])
        interior.append((alpha, exact, estimate.estimate, estimate.standard_error, estimate.agrees_with(exact)))
        exact = sphere_monomial_norm_sq(n, alpha)
        estimate = sphere_monomial_norm_sq_oracle(n, alpha, config.mc_samples, rng=streams[2 + 2 * i])
        sphere.append((alpha, exact, estimate.estimate, estimate.standard_error, estimate.agrees_with(exact)))

    clauses = {
        "monte_carlo": all(row[-1] for row in interior),
        "sphere_monte_carlo": all(row[-1] for row in sphere),
    }
    empirical = {
        "disagreements": [list(row[0]) for row in interior if not row[-1]],
        "sphere_disagreements": [list(row[0]) for row in sphere if not row[-1]],
    }
    if norm_table is not None:
        problems = NormTable.from_csv(norm_table, domain).problems()
        clauses["norm_table"] = not problems
        empirical["norm_table_problems"] = problems

    return AsymptoticsReport(
        claim_id="norms",
        description="closed-form monomial norms against Monte Carlo",
        inputs={"domain": domain.label(), "indices": [list(a) for a in alphas], "samples": config.mc_samples},
        empirical=empirical,
        tolerance=4.0,
        clauses=clauses,
        provenance={"seed": config.seed},
    )


def hs_oracle_report(config: RunConfig) -> AsymptoticsReport:
    """χ_k(A) by Helffer–Sjöstrand against the eigendecomposition."""
    rng = oracle_streams(config.seed + 1, 1)[0]
    size = config.hs_size
    q, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    spectrum = rng.uniform(0.0, 1.5 * HS_K * config.chi.t_max, size=size)
    matrix = (q * spectrum) @ q.conj().T
    matrix = 0.5 * (matrix + matrix.conj().T)

    result = helffer_sjostrand_chi(matrix, config.chi, HS_K)
    oracle = eigen_functional_calculus(matrix, config.chi, HS_K)
    error = float(np.linalg.norm(result - oracle, 2))
    return AsymptoticsReport(
        claim_id="helffer_sjostrand",
        description="Helffer-Sjostrand functional calculus against eigendecomposition",
        inputs={"size": size, "k": HS_K},
        empirical={"spectral_norm_error": error},
        tolerance=HS_TOLERANCE,
        clauses={"agreement": error <= HS_TOLERANCE},
    )


def galerkin_oracle_report(config: RunConfig) -> AsymptoticsReport:
    """Quadrature Toeplitz matrix on monomials is diagonal with entries ⟨λ,α⟩."""
    degree = config.galerkin_degree
    matrix = galerkin_toeplitz_matrix(
        config.domain, config.generator, degree, budget=config.max_quadrature_nodes
    )
    eigenvalues = config.generator.pairing(multiindex_array(config.domain.n, degree))
    off = matrix - np.diag(np.diag(matrix))
    off_max = float(np.max(np.abs(off), initial=0.0))
    asymmetry = float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))
    diagonal = np.diag(matrix).real
    diagonal_ok = bool(np.all(np.abs(diagonal - eigenvalues) <= GALERKIN_RTOL * np.abs(eigenvalues) + 1e-8))
    return AsymptoticsReport(
        claim_id="galerkin",
        description="Galerkin matrix of the Toeplitz operator against the diagonal realization",
        inputs={"domain": config.domain.label(), "weights": list(config.generator.weights), "degree": degree},
        empirical={"off_diagonal_max": off_max, "asymmetry": asymmetry, "diagonal": diagonal.tolist()},
        predicted={"diagonal": eigenvalues.tolist()},
        tolerance=GALERKIN_RTOL,
        clauses={
            "off_diagonal": off_max <= GALERKIN_OFF_DIAGONAL,
            "self_adjoint": asymmetry <= GALERKIN_OFF_DIAGONAL,
            "diagonal": diagonal_ok,
        },
    )


def _boundary_samples(config: RunConfig, count: int) -> list[np.ndarray]:
    rng = oracle_streams(config.seed + 2, 1)[0]
    a = np.asarray(config.domain.a, dtype=float)
    points = []
    while len(points) < count:
        z = rng.normal(size=config.domain.n) + 1j * rng.normal(size=config.domain.n)
        z /= np.sqrt(np.sum(a * np.abs(z) ** 2))
        if np.min(np.abs(z)) >= 0.2:
            points.append(z)
    return points


def structure_report(config: RunConfig) -> AsymptoticsReport:
    """Truncation exactness, rotation equivariance, positivity and functional-calculus identities."""
    domain, generator, chi = config.domain, config.generator, config.chi
    k0 = config.k_ladder[0]

    proj = build_projector(domain, generator, chi, k0, budget=config.max_indices)
    wider = build_projector(domain, generator, chi, k0, cutoff=proj.cutoff + 5, budget=config.max_indices)
    clauses = {
        "truncation": bool(
            np.array_equal(proj.alphas, wider.alphas) and np.array_equal(proj.weights, wider.weights)
        ),
        "trace_linearity": build_projector(domain, generator, chi.scaled(2.0), k0, budget=config.max_indices).trace()
        == 2.0 * proj.trace(),
    }
    if chi.kind == ChiKind.BUMP:
        squared = build_projector(domain, generator, chi.squared(), k0, budget=config.max_indices)
        clauses["composition"] = bool(
            np.array_equal(squared.alphas, proj.alphas)
            and np.allclose(squared.weights, functional_square(proj), rtol=1e-13, atol=0.0)
        )

    small = build_projector(domain, generator, chi, STRUCTURE_K, budget=config.max_indices)
    points = _boundary_samples(config, GRAM_POINTS)
    z, w = points[0], points[1]
    base = evaluate(small, z, w).value
    rotated = [evaluate(small, generator.flow(t, z), generator.flow(t, w)).value for t in (0.3, 1.7, -2.2)]
    clauses["rotation_equivariance"] = all(abs(r - base) <= 1e-12 * max(abs(base), 1e-300) for r in rotated)

    empirical: dict = {}
    if not chi.is_signed:
        gram = np.array([[evaluate(small, p, q).value for q in points] for p in points])
        diag = gram.diagonal().real
        bound = np.outer(diag, diag) + 1e-10 * np.outer(1 + diag, 1 + diag)
        min_eig = float(np.linalg.eigvalsh(gram).min())
        clauses["cauchy_schwarz"] = bool(np.all(np.abs(gram) ** 2 <= bound))
        clauses["positive_gram"] = min_eig >= -1e-10 * float(np.trace(gram).real)
        empirical["gram_min_eigenvalue"] = min_eig

    return AsymptoticsReport(
        claim_id="structure",
        description="exactness and symmetry properties of the projector",
        inputs={"k": k0, "structure_k": STRUCTURE_K, "gram_points": GRAM_POINTS},
        empirical=empirical,
        clauses=clauses,
    )


def run_oracles(config: RunConfig, *, norm_table: Path | None = None) -> AsymptoticsReport:
    parts = [
        norm_oracle_report(config, norm_table=norm_table),
        hs_oracle_report(config),
        galerkin_oracle_report(config),
        structure_report(config),
    ]
    return AsymptoticsReport.combine(Suite.ORACLES.value, Suite.ORACLES.label, parts)


SUITE_RUNNERS: dict[str, Callable[[RunConfig], AsymptoticsReport]] = {
    Suite.LEADING: run_leading,
    Suite.TRACE: run_trace,
    Suite.INTERIOR: run_interior,
    Suite.OFFDIAGONAL: run_offdiag,
    Suite.BOUNDARY: run_boundary,
    Suite.ORACLES: run_oracles,
}


def run_suite(config: RunConfig, suite: str, *, norm_table: Path | None = None) -> AsymptoticsReport:
    if suite == Suite.ORACLES:
        report = run_oracles(config, norm_table=norm_table)
    else:
        report = SUITE_RUNNERS[Suite(suite)](config)
    logger.info("Suite %s: %s", suite, report.verdict)
    return report.with_provenance(**config.provenance())
