"""Exact finite-rank realization of χ_k(T_R) on the monomial eigenbasis."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from django.db import models

from domains.catalog import (
    DomainSpec,
    MultiIndex,
    log_monomial_norm_sq,
    log_sphere_monomial_norm_sq,
    multiindex_array,
)
from geometry.defining import to_real
from geometry.services import ReebDecomposition, decompose_reeb_like, rotation_field

from .chi import ChiProfile, SpectralError

logger = logging.getLogger(__name__)


class ProjectorVariant(models.TextChoices):
    INTERIOR = "interior", "Bergman (interior)"
    BOUNDARY = "boundary", "Szegő (boundary)"


@dataclass(frozen=True)
class RotationGenerator:
    """T_λ = Σ λ_j(x_j∂y_j − y_j∂x_j); R = −iT_λ acts on z^α by ⟨λ,α⟩."""

    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.weights:
            raise SpectralError("a rotation generator needs at least one weight")
        if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
            raise SpectralError(f"rotation weights must be positive: {self.weights}")

    @classmethod
    def unweighted(cls, n: int) -> "RotationGenerator":
        return cls((1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    def pairing(self, alphas) -> np.ndarray:
        return np.asarray(alphas, dtype=float) @ np.asarray(self.weights, dtype=float)

    def field(self):
        return rotation_field(self.weights)

    def flow(self, theta: float, z) -> np.ndarray:
        return np.exp(1j * theta * np.asarray(self.weights)) * np.asarray(z, dtype=complex)

    def check_reeb_like(self, domain: DomainSpec, points: Iterable) -> list[ReebDecomposition]:
        """ω₀(T_λ) > 0 at each boundary point; NonPositiveAlpha otherwise."""
        rho = domain.defining_function()
        return [decompose_reeb_like(self.field(), rho, to_real(z)) for z in points]


def toeplitz_eigenvalue(generator: RotationGenerator, alpha) -> float:
    values = alpha.alpha if isinstance(alpha, MultiIndex) else tuple(alpha)
    if len(values) != generator.n:
        raise SpectralError(f"multi-index length {len(values)} does not match n={generator.n}")
    return float(sum(w * a for w, a in zip(generator.weights, values)))


def projector_cutoff(generator: RotationGenerator, chi: ChiProfile, k: float) -> int:
    """Smallest D with every weight-carrying α satisfying |α| ≤ D."""
    return int(math.ceil(k * chi.t_max / min(generator.weights)))


@dataclass(frozen=True, eq=False)
class SpectralProjectorRep:
    domain: DomainSpec
    generator: RotationGenerator
    chi: ChiProfile
    k: float
    cutoff: int
    variant: str
    alphas: np.ndarray = field(repr=False)
    pairings: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    log_norms: np.ndarray = field(repr=False)
    active: tuple[bool, ...] | None = None

    @property
    def rank(self) -> int:
        return int(self.alphas.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return self.alphas.sum(axis=1)

    @property
    def records(self) -> list[tuple[MultiIndex, float, float, float]]:
        return [
            (MultiIndex(tuple(int(v) for v in row)), float(p), float(w), float(l))
            for row, p, w, l in zip(self.alphas, self.pairings, self.weights, self.log_norms)
        ]

    @property
    def is_boundary(self) -> bool:
        return self.variant == ProjectorVariant.BOUNDARY

    def trace(self) -> float:
        if self.active is not None and not all(self.active):
            raise SpectralError("trace needs the full projector, not a coordinate block")
        return math.fsum(self.weights.tolist())

    def covers(self, support: Sequence[bool]) -> bool:
        if self.active is None:
            return True
        return all(a or not s for a, s in zip(self.active, support))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.alphas, columns=[f"a{j}" for j in range(self.domain.n)])
        frame["pairing"] = self.pairings
        frame["weight"] = self.weights
        frame["log_norm_sq"] = self.log_norms
        return frame

    def to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


def _build(
    domain: DomainSpec,
    generator: RotationGenerator,
    chi: ChiProfile,
    k: float,
    variant: str,
    *,
    active: Sequence[bool] | None,
    cutoff: int | None,
    budget: int | None,
) -> SpectralProjectorRep:
    if not (k > 0):
        raise SpectralError(f"k must be positive, got {k}")
    if generator.n != domain.n:
        raise SpectralError(f"generator has {generator.n} weights for a domain with n={domain.n}")
    natural = projector_cutoff(generator, chi, k)
    if cutoff is None:
        cutoff = natural
    elif cutoff < natural:
        raise SpectralError(f"cutoff {cutoff} is below the exact truncation degree {natural}")

    n = domain.n
    if active is None:
        mask = np.ones(n, dtype=bool)
    else:
        mask = np.asarray(active, dtype=bool)
        if mask.size != n:
            raise SpectralError(f"active pattern has {mask.size} entries for n={n}")
    active_count = int(mask.sum())
    min_degree = int(math.floor(k * chi.t_min / max(generator.weights)))

    if active_count == 0:
        alphas = np.zeros((1 if min_degree == 0 else 0, n), dtype=np.int64)
    else:
        block = multiindex_array(active_count, cutoff, min_degree=min_degree, budget=budget)
        alphas = np.zeros((block.shape[0], n), dtype=np.int64)
        alphas[:, mask] = block

    pairings = generator.pairing(alphas)
    weights = np.asarray(chi.at_scale(pairings, k), dtype=float).reshape(-1)
    keep = weights != 0.0
    alphas, pairings, weights = alphas[keep], pairings[keep], weights[keep]
    if variant == ProjectorVariant.BOUNDARY:
        log_norms = np.asarray(log_sphere_monomial_norm_sq(n, alphas), dtype=float).reshape(-1)
    else:
        log_norms = np.asarray(log_monomial_norm_sq(domain, alphas), dtype=float).reshape(-1)

    logger.debug(
        "Built %s projector on %s at k=%s: cutoff %s, %s records",
        variant, domain.label(), k, cutoff, len(weights),
    )
    return SpectralProjectorRep(
        domain=domain,
        generator=generator,
        chi=chi,
        k=float(k),
        cutoff=cutoff,
        variant=variant,
        alphas=alphas,
        pairings=pairings,
        weights=weights,
        log_norms=log_norms,
        active=None if active is None else tuple(bool(v) for v in mask),
    )


def build_projector(
    domain: DomainSpec,
    generator: RotationGenerator,
    chi: ChiProfile,
    k: float,
    *,
    active: Sequence[bool] | None = None,
    cutoff: int | None = None,
    budget: int | None = None,
) -> SpectralProjectorRep:
    """χ_k(T_R) on the Bergman space of ``domain``.

    ``active`` restricts the records to multi-indices supported on the flagged
    coordinates, which is all a kernel evaluation at points vanishing
    elsewhere can see.
    """
    return _build(
        domain, generator, chi, k, ProjectorVariant.INTERIOR.value,
        active=active, cutoff=cutoff, budget=budget,
    )


def build_boundary_projector(
    n: int,
    generator: RotationGenerator,
    chi: ChiProfile,
    k: float,
    *,
    active: Sequence[bool] | None = None,
    cutoff: int | None = None,
    budget: int | None = None,
) -> SpectralProjectorRep:
    """χ_k of the Szegő–Toeplitz operator on the unit sphere S^{2n−1}."""
    return _build(
        DomainSpec.ball(n), generator, chi, k, ProjectorVariant.BOUNDARY.value,
        active=active, cutoff=cutoff, budget=budget,
    )


def functional_square(proj: SpectralProjectorRep) -> np.ndarray:
    """Eigenweights of χ_k(T_R)², record by record."""
    return proj.weights * proj.weights


@dataclass(frozen=True)
class ProjectorBuilder:
    """Rebuilds a projector per k; used by the scans."""

    domain: DomainSpec
    generator: RotationGenerator
    chi: ChiProfile
    variant: str = ProjectorVariant.INTERIOR.value
    budget: int | None = None

    def __call__(self, k: float, active: Sequence[bool] | None = None) -> SpectralProjectorRep:
        if self.variant == ProjectorVariant.BOUNDARY:
            return build_boundary_projector(
                self.domain.n, self.generator, self.chi, k, active=active, budget=self.budget
            )
        return build_projector(self.domain, self.generator, self.chi, k, active=active, budget=self.budget)
