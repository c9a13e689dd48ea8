"""Leading coefficients b₀ and A₀ computed from the boundary geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from django.conf import settings
from scipy.special import roots_legendre

from domains.catalog import DomainSpec
from geometry.defining import normalize_defining_function, to_real
from geometry.services import NonPositiveAlpha, decompose_reeb_like, levi_spectrum
from spectral.chi import ChiProfile
from spectral.projector import RotationGenerator

__all__ = [
    "NonPositiveAlpha",
    "Prediction",
    "boundary_geometry",
    "boundary_trace_prediction",
    "predict",
    "predict_A0",
    "predict_b0",
    "predict_b0_substituted",
    "sphere_integral",
]


@dataclass(frozen=True)
class Prediction:
    point: tuple[complex, ...]
    b0: float
    A0: float
    order_interior: int
    order_boundary: int
    alpha_at_point: float
    det_levi: float


def boundary_geometry(domain: DomainSpec, generator: RotationGenerator, x) -> tuple[float, float]:
    """(ω₀(T_λ)(x), det 𝓛ₓ) for the normalized defining function of ``domain``."""
    p = to_real(x)
    rho = normalize_defining_function(domain.defining_function(), p)
    det_levi = levi_spectrum(rho, p).det_levi
    alpha = decompose_reeb_like(generator.field(), rho, p).alpha
    return alpha, det_levi


def predict_b0(x, chi: ChiProfile, generator: RotationGenerator, domain: DomainSpec) -> float:
    """π⁻ⁿ det 𝓛ₓ ∫₀^∞ χ(t α(x)) tⁿ dt."""
    alpha, det_levi = boundary_geometry(domain, generator, x)
    return det_levi * chi.scaled_moment(alpha, domain.n) / math.pi**domain.n


def predict_b0_substituted(x, chi: ChiProfile, generator: RotationGenerator, domain: DomainSpec) -> float:
    """Same value through π⁻ⁿ det 𝓛ₓ α^{−(n+1)} ∫χ(s)sⁿ ds."""
    alpha, det_levi = boundary_geometry(domain, generator, x)
    n = domain.n
    return det_levi * alpha ** -(n + 1) * chi.moment(n) / math.pi**n


def predict_A0(x, chi: ChiProfile, generator: RotationGenerator, domain: DomainSpec | None = None) -> float:
    """(1/2πⁿ) det 𝓛ₓ ∫₀^∞ χ(t α(x)) t^{n−1} dt, on the unit sphere unless given."""
    domain = domain or DomainSpec.ball(generator.n)
    alpha, det_levi = boundary_geometry(domain, generator, x)
    n = domain.n
    return det_levi * chi.scaled_moment(alpha, n - 1) / (2.0 * math.pi**n)


def predict(x, chi: ChiProfile, generator: RotationGenerator, domain: DomainSpec) -> Prediction:
    alpha, det_levi = boundary_geometry(domain, generator, x)
    n = domain.n
    return Prediction(
        point=tuple(complex(v) for v in np.asarray(x, dtype=complex)),
        b0=det_levi * chi.scaled_moment(alpha, n) / math.pi**n,
        A0=det_levi * chi.scaled_moment(alpha, n - 1) / (2.0 * math.pi**n),
        order_interior=n + 1,
        order_boundary=n,
        alpha_at_point=alpha,
        det_levi=det_levi,
    )


def _simplex_rule(dim: int, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed-coordinate Gauss–Legendre rule on {s ∈ ℝ^{dim+1}_{≥0} : Σs = 1}."""
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    x, w = roots_legendre(points)
    u1, w1 = 0.5 * (x + 1.0), 0.5 * w
    grids = np.meshgrid(*([u1] * dim), indexing="ij")
    u = np.stack([g.reshape(-1) for g in grids], axis=1)
    weights = np.prod(np.stack(np.meshgrid(*([w1] * dim), indexing="ij"), axis=0).reshape(dim, -1), axis=0)
    s = np.empty((u.shape[0], dim + 1))
    remaining = np.ones(u.shape[0])
    for j in range(dim):
        s[:, j] = remaining * u[:, j]
        weights = weights * remaining
        remaining = remaining * (1.0 - u[:, j])
    s[:, dim] = remaining
    return s, weights


def sphere_integral(n: int, func: Callable[[np.ndarray], np.ndarray], points: int | None = None) -> float:
    """∫_{S^{2n−1}} f dσ for torus-invariant f, given as a function of s_j = |x_j|².

    The angles integrate to (2π)ⁿ exactly; dσ = 2^{1−n}(2π)ⁿ ds on the simplex.
    """
    points = settings.LAB_SPHERE_POINTS if points is None else points
    s, weights = _simplex_rule(n - 1, points)
    values = np.asarray(func(s), dtype=float).reshape(-1)
    return float((2.0 * math.pi) ** n * 2.0 ** (1 - n) * np.dot(weights, values))


def boundary_trace_prediction(
    n: int, generator: RotationGenerator, chi: ChiProfile, k: float, *, points: int | None = None
) -> float:
    """(kⁿ/2πⁿ) ∫_X ∫ det 𝓛ₓ χ(t α(x)) t^{n−1} dt dσ(x) on the unit sphere."""
    sphere = DomainSpec.ball(n)
    moment = chi.moment(n - 1)

    def integrand(s: np.ndarray) -> np.ndarray:
        values = np.empty(s.shape[0])
        for i, row in enumerate(s):
            alpha, det_levi = boundary_geometry(sphere, generator, np.sqrt(row))
            values[i] = det_levi * alpha**-n * moment
        return values

    return k**n / (2.0 * math.pi**n) * sphere_integral(n, integrand, points)
