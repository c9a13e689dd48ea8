"""Boundary geometry of model domains: contact form, Levi form, Reeb-like fields."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .defining import (
    DefiningFunction,
    GeometryError,
    apply_j,
    normalize_defining_function,
    to_complex,
    to_real,
)

logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-8
TANGENCY_TOLERANCE = 1e-8


class NotOnBoundary(GeometryError):
    def __init__(self, message: str, *, value: float | None = None):
        super().__init__(message)
        self.value = value


class DimensionTooSmall(GeometryError):
    """Raised in strict mode when T^{1,0}X is zero-dimensional (n = 1)."""


class NotTangent(GeometryError):
    def __init__(self, message: str, *, normal_component: float | None = None):
        super().__init__(message)
        self.normal_component = normal_component


class NonPositiveAlpha(GeometryError):
    """Raised when ω₀(T) ≤ 0, i.e. the field is not Reeb-like at the point."""

    def __init__(self, message: str, *, alpha: float | None = None):
        super().__init__(message)
        self.alpha = alpha


@dataclass(frozen=True)
class ContactData:
    point: np.ndarray
    omega0: np.ndarray
    reeb_direction: np.ndarray

    def evaluate(self, v) -> float:
        return float(np.dot(self.omega0, np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class LeviSpectrum:
    point: np.ndarray
    eigenvalues: tuple[float, ...]
    det_levi: float
    dimension_too_small: bool = False
    non_positive: bool = False


@dataclass(frozen=True)
class ReebDecomposition:
    point: np.ndarray
    alpha: float
    z_component: np.ndarray = field(repr=False)


def _as_point(x) -> np.ndarray:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return to_real(x)
    return x.astype(float)


def _normalized(rho: DefiningFunction, p: np.ndarray) -> DefiningFunction:
    return rho if rho.normalized else normalize_defining_function(rho, p)


def _check_boundary(rho: DefiningFunction, p: np.ndarray) -> None:
    value = rho.value(p)
    if abs(value) > BOUNDARY_TOLERANCE:
        raise NotOnBoundary(f"|ρ(x)| = {abs(value):.3e} exceeds {BOUNDARY_TOLERANCE:g}", value=value)


def omega0_at(rho: DefiningFunction, x) -> ContactData:
    """ω₀ = −dρ∘J at a boundary point, in the real coordinate frame.

    An unnormalized ``rho`` is normalized first, which yields ω₀ = −J∘d(ρ/|dρ|).
    """
    p = _as_point(x)
    rho = _normalized(rho, p)
    _check_boundary(rho, p)
    grad = rho.grad(p)
    # ω₀(v) = −∇ρ·Jv = (J∇ρ)·v since Jᵀ = −J
    reeb = apply_j(grad)
    return ContactData(point=p, omega0=reeb.copy(), reeb_direction=reeb)


def tangent_frame(rho: DefiningFunction, x) -> np.ndarray:
    """Orthonormal frame of T^{1,0}X as the columns of an n×(n−1) complex matrix.

    Orthonormal for ⟨·|·⟩, so each column has standard norm √2. Seeds are the
    coordinate vectors in index order with the largest-pivot coordinate left out.
    """
    p = _as_point(x)
    c = rho.complex_gradient(p)
    n = c.size
    normal = np.conj(c) / np.linalg.norm(c)
    pivot = int(np.argmax(np.abs(normal)))
    basis = [normal]
    for j in range(n):
        if j == pivot:
            continue
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        for b in basis:
            v = v - np.vdot(b, v) * b
        basis.append(v / np.linalg.norm(v))
    frame = np.array(basis[1:], dtype=complex).T.reshape(n, n - 1)
    return np.sqrt(2.0) * frame


def horizontal_basis(rho: DefiningFunction, x) -> list[np.ndarray]:
    """Real basis of HX = T X ∩ J T X built from the T^{1,0}X frame."""
    frame = tangent_frame(rho, x)
    vectors = []
    for col in frame.T:
        vectors.append(to_real(col))
        vectors.append(to_real(1j * col))
    return vectors


def levi_matrix(rho: DefiningFunction, x, frame: np.ndarray | None = None) -> np.ndarray:
    p = _as_point(x)
    frame = tangent_frame(rho, p) if frame is None else np.asarray(frame, dtype=complex)
    h = rho.complex_hessian(p)
    return frame.T @ h @ np.conj(frame)


def levi_spectrum(
    rho: DefiningFunction, x, frame: np.ndarray | None = None, *, strict: bool = False
) -> LeviSpectrum:
    p = _as_point(x)
    rho = _normalized(rho, p)
    _check_boundary(rho, p)
    if rho.n < 2:
        if strict:
            raise DimensionTooSmall("T^{1,0}X is zero-dimensional for n = 1")
        return LeviSpectrum(point=p, eigenvalues=(), det_levi=1.0, dimension_too_small=True)

    eigenvalues = np.linalg.eigvalsh(levi_matrix(rho, p, frame))
    non_positive = bool(np.any(eigenvalues <= 0))
    if non_positive:
        logger.warning("Levi form not positive at %s: eigenvalues %s", p, eigenvalues)
    return LeviSpectrum(
        point=p,
        eigenvalues=tuple(float(v) for v in eigenvalues),
        det_levi=float(np.prod(eigenvalues)),
        non_positive=non_positive,
    )


def rotation_field(weights) -> Callable[[np.ndarray], np.ndarray]:
    """Real form of T_λ = Σ λ_j(x_j∂y_j − y_j∂x_j)."""
    lam = np.asarray(weights, dtype=float)

    def field_at(p) -> np.ndarray:
        z = to_complex(_as_point(p))
        return to_real(1j * lam * z)

    return field_at


def decompose_reeb_like(field_at: Callable, rho: DefiningFunction, x) -> ReebDecomposition:
    """Split a tangent field as α·J∇ρ + Z with Z ∈ HX and α = ω₀(field)."""
    p = _as_point(x)
    rho = _normalized(rho, p)
    contact = omega0_at(rho, p)
    v = np.asarray(field_at(p), dtype=float)
    grad = rho.grad(p)

    normal = float(np.dot(grad, v))
    if abs(normal) > TANGENCY_TOLERANCE:
        raise NotTangent(f"|dρ(T)| = {abs(normal):.3e} at {p}", normal_component=normal)

    alpha = contact.evaluate(v)
    if alpha <= 0:
        raise NonPositiveAlpha(f"ω₀(T) = {alpha:.6g} is not positive at {p}", alpha=alpha)

    z = v - alpha * contact.reeb_direction
    norm_z = float(np.linalg.norm(z))
    bound = 1e-10 * norm_z + 1e-12
    if abs(np.dot(grad, z)) > bound + abs(normal) or abs(contact.evaluate(z)) > bound:
        raise GeometryError(f"horizontal part left HX at {p}")
    return ReebDecomposition(point=p, alpha=float(alpha), z_component=z)
