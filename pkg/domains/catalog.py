"""Model domains with closed-form monomial norms and multi-index enumeration."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd
from django.conf import settings
from django.db import models
from scipy.special import gammaln

from geometry.defining import DefiningFunction, quadratic_defining_function

logger = logging.getLogger(__name__)

LOG_SPACE_DEGREE = 60


class DomainError(Exception):
    """Raised when a domain or its norm data is unusable."""


class InvalidDomain(DomainError):
    pass


class CapacityExceeded(DomainError):
    def __init__(self, message: str, *, requested: int, budget: int):
        super().__init__(message)
        self.requested = requested
        self.budget = budget


class NormTableError(DomainError):
    pass


class DomainKind(models.TextChoices):
    BALL = "ball", "Ball"
    ELLIPSOID = "ellipsoid", "Hermitian ellipsoid"


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int
    a: tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidDomain(f"dimension must be at least 1, got {self.n}")
        if len(self.a) != self.n:
            raise InvalidDomain(f"expected {self.n} shape parameters, got {len(self.a)}")
        if any(not (v > 0 and math.isfinite(v)) for v in self.a):
            raise InvalidDomain(f"shape parameters must be positive: {self.a}")
        if self.kind not in DomainKind.values:
            raise InvalidDomain(f"unknown domain kind {self.kind!r}")
        if self.kind == DomainKind.BALL and any(v != 1.0 for v in self.a):
            raise InvalidDomain("a ball has unit shape parameters")

    @classmethod
    def ball(cls, n: int) -> "DomainSpec":
        return cls(DomainKind.BALL.value, n, (1.0,) * n)

    @classmethod
    def hermitian_ellipsoid(cls, a: Iterable[float]) -> "DomainSpec":
        a = tuple(float(v) for v in a)
        return cls(DomainKind.ELLIPSOID.value, len(a), a)

    def canonical(self) -> "DomainSpec":
        if all(v == 1.0 for v in self.a):
            return DomainSpec.ball(self.n)
        return self

    @property
    def is_ball(self) -> bool:
        return self.canonical().kind == DomainKind.BALL

    def defining_function(self) -> DefiningFunction:
        return quadratic_defining_function(self.a)

    def contains(self, z, *, closed: bool = True) -> bool:
        s = float(np.sum(np.asarray(self.a) * np.abs(np.asarray(z, dtype=complex)) ** 2))
        return s <= 1.0 + 1e-12 if closed else s < 1.0

    def label(self) -> str:
        if self.is_ball:
            return f"ball-n{self.n}"
        return "ellipsoid-" + "-".join(f"{v:g}" for v in self.a)


@dataclass(frozen=True)
class MultiIndex:
    alpha: tuple[int, ...]
    degree: int = field(init=False)

    def __post_init__(self):
        if any(v < 0 for v in self.alpha):
            raise DomainError(f"multi-index entries must be nonnegative: {self.alpha}")
        object.__setattr__(self, "degree", int(sum(self.alpha)))

    def __len__(self) -> int:
        return len(self.alpha)


# ----------------------------- enumeration ------------------------------
def count_multiindices(n: int, max_degree: int, min_degree: int = 0) -> int:
    upper = math.comb(max_degree + n, n)
    lower = math.comb(min_degree - 1 + n, n) if min_degree > 0 else 0
    return upper - lower


@lru_cache(maxsize=4096)
def _layer(n: int, d: int) -> np.ndarray:
    """All α with |α| = d, first coordinate descending (lexicographic order)."""
    if n == 1:
        return np.array([[d]], dtype=np.int64)
    if n == 2:
        first = np.arange(d, -1, -1, dtype=np.int64)
        layer = np.column_stack([first, d - first])
        layer.setflags(write=False)
        return layer
    blocks = []
    for first in range(d, -1, -1):
        rest = _layer(n - 1, d - first)
        block = np.empty((rest.shape[0], n), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        blocks.append(block)
    layer = np.concatenate(blocks)
    layer.setflags(write=False)
    return layer


def _check_budget(requested: int, budget: int | None) -> None:
    budget = settings.LAB_MAX_INDICES if budget is None else budget
    if requested > budget:
        raise CapacityExceeded(
            f"{requested} multi-indices requested, budget is {budget}",
            requested=requested,
            budget=budget,
        )


def multiindex_array(
    n: int, max_degree: int, *, min_degree: int = 0, budget: int | None = None
) -> np.ndarray:
    """Rows α with min_degree ≤ |α| ≤ max_degree in graded lexicographic order."""
    if n < 1 or max_degree < 0:
        raise DomainError(f"invalid enumeration request n={n}, D={max_degree}")
    min_degree = max(0, min_degree)
    if min_degree > max_degree:
        return np.empty((0, n), dtype=np.int64)
    _check_budget(count_multiindices(n, max_degree, min_degree), budget)
    return np.concatenate([_layer(n, d) for d in range(min_degree, max_degree + 1)])


def enumerate_multiindices(n: int, max_degree: int, *, budget: int | None = None) -> list[MultiIndex]:
    return [MultiIndex(tuple(int(v) for v in row)) for row in multiindex_array(n, max_degree, budget=budget)]


# -------------------------------- norms ---------------------------------
def _alphas(alpha) -> np.ndarray:
    if isinstance(alpha, MultiIndex):
        alpha = alpha.alpha
    return np.atleast_2d(np.asarray(alpha, dtype=np.int64))


def log_monomial_norm_sq(domain: DomainSpec, alpha) -> np.ndarray | float:
    """log ∫_M |z^α|² dV, vectorized over rows of ``alpha``."""
    single = isinstance(alpha, MultiIndex) or np.ndim(alpha) == 1
    rows = _alphas(alpha)
    if rows.shape[1] != domain.n:
        raise DomainError(f"multi-index length {rows.shape[1]} does not match n={domain.n}")
    n = domain.n
    degree = rows.sum(axis=1)
    logs = n * math.log(math.pi) + gammaln(rows + 1).sum(axis=1) - gammaln(n + degree + 1)
    if not domain.is_ball:
        log_a = np.log(np.asarray(domain.a))
        logs = logs - ((rows + 1) * log_a).sum(axis=1)
    return float(logs[0]) if single else logs


def log_sphere_monomial_norm_sq(n: int, alpha) -> np.ndarray | float:
    """log ∫_{S^{2n−1}} |ζ^α|² dσ."""
    single = isinstance(alpha, MultiIndex) or np.ndim(alpha) == 1
    rows = _alphas(alpha)
    if rows.shape[1] != n:
        raise DomainError(f"multi-index length {rows.shape[1]} does not match n={n}")
    degree = rows.sum(axis=1)
    logs = math.log(2.0) + n * math.log(math.pi) + gammaln(rows + 1).sum(axis=1) - gammaln(n + degree)
    return float(logs[0]) if single else logs


def monomial_norm_sq(domain: DomainSpec, alpha) -> float:
    """‖z^α‖² on the domain: π^n α!/(n+|α|)!·∏a_j^{−(α_j+1)}."""
    index = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(int(v) for v in alpha))
    if len(index) != domain.n:
        raise DomainError(f"multi-index length {len(index)} does not match n={domain.n}")
    if index.degree > LOG_SPACE_DEGREE:
        return math.exp(log_monomial_norm_sq(domain, index))
    value = math.pi**domain.n * math.prod(math.factorial(v) for v in index.alpha)
    value /= math.factorial(domain.n + index.degree)
    if not domain.is_ball:
        value *= math.prod(a ** -(v + 1) for a, v in zip(domain.a, index.alpha))
    return value


def sphere_monomial_norm_sq(n: int, alpha) -> float:
    index = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(int(v) for v in alpha))
    if len(index) != n:
        raise DomainError(f"multi-index length {len(index)} does not match n={n}")
    if index.degree > LOG_SPACE_DEGREE:
        return math.exp(log_sphere_monomial_norm_sq(n, index))
    value = 2 * math.pi**n * math.prod(math.factorial(v) for v in index.alpha)
    return value / math.factorial(n - 1 + index.degree)


# ------------------------------ norm tables ------------------------------
@dataclass(frozen=True)
class NormTable:
    domain: DomainSpec
    cutoff: int
    alphas: np.ndarray = field(repr=False)
    log_norms: np.ndarray = field(repr=False)

    @property
    def norms(self) -> dict[MultiIndex, float]:
        return {
            MultiIndex(tuple(int(v) for v in row)): float(math.exp(value))
            for row, value in zip(self.alphas, self.log_norms)
        }

    def problems(self) -> list[str]:
        issues = []
        if not np.all(np.isfinite(self.log_norms)):
            issues.append("non-finite entries")
        expected = log_monomial_norm_sq(self.domain, self.alphas)
        mismatch = np.abs(np.asarray(expected) - self.log_norms) > 1e-9
        if np.any(mismatch):
            issues.append(f"{int(mismatch.sum())} entries disagree with the closed form")
        return issues

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.alphas, columns=[f"a{j}" for j in range(self.domain.n)])
        frame["log_norm_sq"] = self.log_norms
        return frame

    def to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Path | str, domain: DomainSpec) -> "NormTable":
        frame = pd.read_csv(path)
        columns = [f"a{j}" for j in range(domain.n)]
        missing = [c for c in columns + ["log_norm_sq"] if c not in frame.columns]
        if missing:
            raise NormTableError(f"{path} is missing columns {missing}")
        alphas = frame[columns].to_numpy(dtype=np.int64)
        log_norms = frame["log_norm_sq"].to_numpy(dtype=float)
        cutoff = int(alphas.sum(axis=1).max()) if len(alphas) else 0
        return cls(domain=domain, cutoff=cutoff, alphas=alphas, log_norms=log_norms)


def build_norm_table(domain: DomainSpec, cutoff: int, *, budget: int | None = None) -> NormTable:
    alphas = multiindex_array(domain.n, cutoff, budget=budget)
    log_norms = np.asarray(log_monomial_norm_sq(domain, alphas), dtype=float)
    logger.debug("Norm table for %s up to degree %s: %s entries", domain.label(), cutoff, len(alphas))
    return NormTable(domain=domain, cutoff=cutoff, alphas=alphas, log_norms=log_norms)
