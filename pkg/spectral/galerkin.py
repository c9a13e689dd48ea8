"""Galerkin matrix of R = −iT_λ in the normalized monomial basis, by quadrature.

Ball nodes are nested polar Gauss–Legendre rules, one radial variable per
complex axis (r_j ∈ [0, √(1 − r_1² − … − r_{j−1}²)]) times a trapezoid rule
in each angle. The ellipsoid is reached by the substitution w_j = √a_j z_j.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.special import roots_legendre

from domains.catalog import DomainSpec, log_monomial_norm_sq, multiindex_array

from .chi import SpectralError
from .projector import RotationGenerator

logger = logging.getLogger(__name__)

MAX_GALERKIN_DEGREE = 12
NODE_CHUNK = 20_000


class QuadratureBudgetExceeded(SpectralError):
    def __init__(self, message: str, *, requested: int, budget: int):
        super().__init__(message)
        self.requested = requested
        self.budget = budget


@dataclass(frozen=True)
class QuadratureSpec:
    radial_points: int
    angular_points: int

    @classmethod
    def exact_for(cls, n: int, max_degree: int) -> "QuadratureSpec":
        """Rules integrating every product z^α z̄^β with |α|, |β| ≤ D exactly."""
        return cls(radial_points=max_degree + n + 1, angular_points=2 * max_degree + 1)

    def node_count(self, n: int) -> int:
        return (self.radial_points * self.angular_points) ** n


def _ball_radial_nodes(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(m)
    unit_nodes = 0.5 * (x + 1.0)
    unit_weights = 0.5 * w
    radii = np.zeros((1, 0))
    weights = np.ones(1)
    remaining = np.ones(1)
    for _ in range(n):
        r = remaining[:, None] * unit_nodes[None, :]
        jacobian = remaining[:, None] * unit_weights[None, :] * r
        radii = np.concatenate([np.repeat(radii, m, axis=0), r.reshape(-1, 1)], axis=1)
        weights = (weights[:, None] * jacobian).reshape(-1)
        remaining = np.sqrt(np.clip(remaining[:, None] ** 2 - r**2, 0.0, None)).reshape(-1)
    return radii, weights


def _angle_grid(n: int, count: int) -> np.ndarray:
    theta = 2.0 * math.pi * np.arange(count) / count
    grids = np.meshgrid(*([theta] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def galerkin_toeplitz_matrix(
    domain: DomainSpec,
    generator: RotationGenerator,
    max_degree: int,
    quadrature_spec: QuadratureSpec | None = None,
    *,
    budget: int | None = None,
) -> np.ndarray:
    """Entries (Rφ_β | φ_α)_M, rows α and columns β in graded lexicographic order."""
    if max_degree > MAX_GALERKIN_DEGREE:
        raise SpectralError(f"Galerkin oracle is limited to D ≤ {MAX_GALERKIN_DEGREE}")
    if generator.n != domain.n:
        raise SpectralError(f"generator has {generator.n} weights for a domain with n={domain.n}")
    n = domain.n
    spec = quadrature_spec or QuadratureSpec.exact_for(n, max_degree)
    budget = settings.LAB_MAX_QUADRATURE_NODES if budget is None else budget
    requested = spec.node_count(n)
    if requested > budget:
        raise QuadratureBudgetExceeded(
            f"{requested} quadrature nodes requested, budget is {budget}",
            requested=requested,
            budget=budget,
        )

    alphas = multiindex_array(n, max_degree)
    inv_norms = np.exp(-0.5 * np.asarray(log_monomial_norm_sq(domain, alphas)))
    lam = np.asarray(generator.weights, dtype=float)
    scale = 1.0 / np.sqrt(np.asarray(domain.a, dtype=float))

    radii, radial_weights = _ball_radial_nodes(n, spec.radial_points)
    angles = _angle_grid(n, spec.angular_points)
    angle_weight = (2.0 * math.pi / spec.angular_points) ** n
    volume_factor = float(np.prod(scale**2))

    size = alphas.shape[0]
    matrix = np.zeros((size, size), dtype=complex)
    lowered = np.clip(alphas[:, None, :] - np.eye(n, dtype=np.int64)[None, :, :], 0, None)

    # all (radial, angle) pairs, processed in chunks
    total = radii.shape[0] * angles.shape[0]
    for start in range(0, total, NODE_CHUNK):
        idx = np.arange(start, min(start + NODE_CHUNK, total))
        ri, ai = np.divmod(idx, angles.shape[0])
        w = radii[ri] * np.exp(1j * angles[ai])
        z = w * scale
        node_weights = radial_weights[ri] * angle_weight * volume_factor

        powers = np.prod(z[:, None, :] ** alphas[None, :, :], axis=2)
        values = powers * inv_norms
        # Σ_j λ_j z_j ∂_j z^β = Σ_j λ_j β_j z^β
        derivative = np.zeros_like(values)
        for j in range(n):
            partial = np.prod(z[:, None, :] ** lowered[None, :, j, :], axis=2)
            derivative += lam[j] * alphas[:, j] * z[:, j : j + 1] * partial
        applied = derivative * inv_norms
        matrix += (np.conj(values) * node_weights[:, None]).T @ applied

    logger.debug("Galerkin matrix for %s at D=%s from %s nodes", domain.label(), max_degree, total)
    return matrix
