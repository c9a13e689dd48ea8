"""Defining functions of model domains and their normalization.

Points of ℂⁿ are carried as real vectors of length 2n in interleaved order
``(x_1, y_1, …, x_n, y_n)`` with ``z_j = x_j + i y_j``. The ambient metric is
the Euclidean one on ℝ²ⁿ and the volume is Lebesgue measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Array = np.ndarray
DEGENERATE_GRADIENT = 1e-10


class GeometryError(Exception):
    """Raised when a geometric computation cannot be carried out."""


class DegenerateGradient(GeometryError):
    """Raised when |∇ρ| vanishes where a normalization is requested."""

    def __init__(self, message: str, *, gradient_norm: float | None = None):
        super().__init__(message)
        self.gradient_norm = gradient_norm


def to_real(z) -> Array:
    """Interleave a complex vector into ``(x_1, y_1, …, x_n, y_n)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p = np.empty(2 * z.size)
    p[0::2] = z.real
    p[1::2] = z.imag
    return p


def to_complex(p) -> Array:
    p = np.asarray(p, dtype=float)
    return p[0::2] + 1j * p[1::2]


def apply_j(v) -> Array:
    """Complex structure on ℝ²ⁿ: J∂x_j = ∂y_j, J∂y_j = −∂x_j."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


def complex_hessian_from_real(hessian: Array) -> Array:
    """∂²ρ/∂z_j∂z̄_k assembled from the real Hessian in interleaved order."""
    hxx = hessian[0::2, 0::2]
    hyy = hessian[1::2, 1::2]
    hxy = hessian[0::2, 1::2]
    hyx = hessian[1::2, 0::2]
    return 0.25 * ((hxx + hyy) + 1j * (hxy - hyx))


@dataclass(frozen=True)
class AmbientConvention:
    """Euclidean metric on ℝ²ⁿ, Lebesgue volume, ⟨∂/∂z_j|∂/∂z_k⟩ = δ_jk/2."""

    n: int
    metric: str = "euclidean"
    volume: str = "lebesgue"

    def pairing(self, u, v) -> complex:
        """Hermitian pairing of two (1,0)-vectors given by their ∂/∂z components."""
        return 0.5 * complex(np.vdot(np.asarray(v, dtype=complex), np.asarray(u, dtype=complex)))

    def pairing_from_metric(self, u, v) -> complex:
        """Same pairing computed from the real metric via ∂/∂z = (∂/∂x − i∂/∂y)/2."""
        return complex(np.sum(self.real_components(u) * np.conj(self.real_components(v))))

    def real_components(self, u) -> Array:
        u = np.asarray(u, dtype=complex)
        comps = np.empty(2 * self.n, dtype=complex)
        comps[0::2] = 0.5 * u
        comps[1::2] = -0.5j * u
        return comps


@dataclass(frozen=True)
class DefiningFunction:
    """A smooth real function on ℝ²ⁿ with exact first and second derivatives.

    ``third`` returns the tensor of third derivatives; ``None`` means they
    vanish identically (quadratic polynomials).
    """

    n: int
    value: Callable[[Array], float]
    grad: Callable[[Array], Array]
    hessian: Callable[[Array], Array]
    third: Optional[Callable[[Array], Array]] = None
    normalized: bool = False

    def complex_hessian(self, p) -> Array:
        return complex_hessian_from_real(self.hessian(np.asarray(p, dtype=float)))

    def complex_gradient(self, p) -> Array:
        """∂ρ/∂z_j = (∂ρ/∂x_j − i ∂ρ/∂y_j)/2."""
        g = self.grad(np.asarray(p, dtype=float))
        return 0.5 * (g[0::2] - 1j * g[1::2])

    def scaled(self, c: float) -> "DefiningFunction":
        third = None if self.third is None else (lambda p: c * self.third(p))
        return DefiningFunction(
            n=self.n,
            value=lambda p: c * self.value(p),
            grad=lambda p: c * self.grad(p),
            hessian=lambda p: c * self.hessian(p),
            third=third,
        )

    def times(self, factor: "DefiningFunction") -> "DefiningFunction":
        """Product f·ρ with a smooth factor carried in the same container."""

        def value(p):
            return factor.value(p) * self.value(p)

        def grad(p):
            return factor.value(p) * self.grad(p) + self.value(p) * factor.grad(p)

        def hessian(p):
            gf, gr = factor.grad(p), self.grad(p)
            return (
                factor.value(p) * self.hessian(p)
                + np.outer(gf, gr)
                + np.outer(gr, gf)
                + self.value(p) * factor.hessian(p)
            )

        return DefiningFunction(n=self.n, value=value, grad=grad, hessian=hessian)


def quadratic_defining_function(a) -> DefiningFunction:
    """ρ(z) = Σ a_j |z_j|² − 1, the raw defining function of a Hermitian ellipsoid."""
    a = np.asarray(a, dtype=float)
    n = a.size
    diag = np.repeat(2.0 * a, 2)
    hess = np.diag(diag)

    def value(p):
        p = np.asarray(p, dtype=float)
        return float(np.sum(0.5 * diag * p * p) - 1.0)

    def grad(p):
        return diag * np.asarray(p, dtype=float)

    def hessian(p):
        return hess.copy()

    return DefiningFunction(n=n, value=value, grad=grad, hessian=hessian)


def _gradient_norm(rho: DefiningFunction, p: Array) -> tuple[Array, float]:
    g = rho.grad(p)
    norm = float(np.linalg.norm(g))
    if norm < DEGENERATE_GRADIENT:
        raise DegenerateGradient(
            f"|∇ρ| = {norm:.3e} is below {DEGENERATE_GRADIENT:g}", gradient_norm=norm
        )
    return g, norm


def normalize_defining_function(raw: DefiningFunction, x) -> DefiningFunction:
    """Return ρ̂ = ρ/|∇ρ|, so that |∇ρ̂| = 1 on the boundary.

    ``x`` is the boundary point the caller works at; the gradient there must
    not degenerate. Value, gradient and Hessian of ρ̂ follow from the product
    rule applied to ρ·g with g = |∇ρ|⁻¹.
    """
    _gradient_norm(raw, np.asarray(x, dtype=float))
    if raw.normalized:
        return raw

    def value(p):
        p = np.asarray(p, dtype=float)
        _, norm = _gradient_norm(raw, p)
        return raw.value(p) / norm

    def grad(p):
        p = np.asarray(p, dtype=float)
        g, norm = _gradient_norm(raw, p)
        hg = raw.hessian(p) @ g
        return g / norm - raw.value(p) * hg / norm**3

    def hessian(p):
        p = np.asarray(p, dtype=float)
        g, norm = _gradient_norm(raw, p)
        h = raw.hessian(p)
        hg = h @ g
        inv_grad = -hg / norm**3
        curvature = h @ h
        if raw.third is not None:
            curvature = curvature + np.tensordot(raw.third(p), g, axes=([2], [0]))
        inv_hess = 3.0 * np.outer(hg, hg) / norm**5 - curvature / norm**3
        return h / norm + np.outer(g, inv_grad) + np.outer(inv_grad, g) + raw.value(p) * inv_hess

    return DefiningFunction(n=raw.n, value=value, grad=grad, hessian=hessian, normalized=True)


def finite_difference_gradient(value: Callable[[Array], float], p, step: float = 1e-6) -> Array:
    """Central-difference gradient; an oracle only."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = step
        out[i] = (value(p + e) - value(p - e)) / (2 * step)
    return out


def finite_difference_hessian(value: Callable[[Array], float], p, step: float = 1e-4) -> Array:
    """Central-difference real Hessian; an oracle only."""
    p = np.asarray(p, dtype=float)
    m = p.size
    out = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            ei = np.zeros(m)
            ej = np.zeros(m)
            ei[i] = step
            ej[j] = step
            out[i, j] = (
                value(p + ei + ej) - value(p + ei - ej) - value(p - ei + ej) + value(p - ei - ej)
            ) / (4 * step * step)
    return out
