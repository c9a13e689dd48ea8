"""Independent checks of the closed-form norms: Monte Carlo and classical kernels."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from django.conf import settings

from .catalog import DomainError, DomainSpec, MultiIndex

MIN_SAMPLES = 10_000
CHUNK = 100_000
NEAR_SINGULAR = 1e-12


class OracleEstimate(NamedTuple):
    estimate: float
    standard_error: float

    def agrees_with(self, value: float, sigmas: float = 4.0) -> bool:
        # rounding floor for integrands that are constant on the sample set
        return abs(self.estimate - value) <= sigmas * self.standard_error + 1e-12 * abs(value)


class ExactKernelValue(NamedTuple):
    value: complex
    near_singular: bool


def oracle_streams(seed: int | None, count: int) -> list[np.random.Generator]:
    """Independent generators, one per task, spawned from a single seed."""
    seed = settings.LAB_SEED if seed is None else seed
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _alpha(alpha) -> np.ndarray:
    if isinstance(alpha, MultiIndex):
        alpha = alpha.alpha
    return np.asarray(alpha, dtype=float)


def _check_samples(samples: int) -> None:
    if samples < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo oracle needs at least {MIN_SAMPLES} samples, got {samples}")


def _accumulate(draw, samples: int, volume: float) -> OracleEstimate:
    total = 0.0
    total_sq = 0.0
    remaining = samples
    while remaining:
        size = min(CHUNK, remaining)
        values = draw(size)
        total += float(values.sum())
        total_sq += float(np.dot(values, values))
        remaining -= size
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    return OracleEstimate(volume * mean, volume * math.sqrt(variance / samples))


def monomial_norm_sq_oracle(
    domain: DomainSpec, alpha, samples: int, *, rng: np.random.Generator | None = None
) -> OracleEstimate:
    """Rejection sampling of ∫_M |z^α|² dV in the bounding box of the domain."""
    _check_samples(samples)
    rng = rng or oracle_streams(None, 1)[0]
    a = np.asarray(domain.a, dtype=float)
    exponents = _alpha(alpha)
    half = 1.0 / np.sqrt(a)
    volume = float(np.prod((2.0 * half) ** 2))

    def draw(size):
        x = rng.uniform(-half, half, size=(size, domain.n))
        y = rng.uniform(-half, half, size=(size, domain.n))
        r2 = x * x + y * y
        inside = (r2 * a).sum(axis=1) < 1.0
        return np.where(inside, np.prod(r2**exponents, axis=1), 0.0)

    return _accumulate(draw, samples, volume)


def sphere_monomial_norm_sq_oracle(
    n: int, alpha, samples: int, *, rng: np.random.Generator | None = None
) -> OracleEstimate:
    """Uniform points on S^{2n−1} from normalized Gaussian vectors."""
    _check_samples(samples)
    rng = rng or oracle_streams(None, 1)[0]
    exponents = _alpha(alpha)
    area = 2.0 * math.pi**n / math.factorial(n - 1)

    def draw(size):
        g = rng.normal(size=(size, 2 * n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r2 = g[:, 0::2] ** 2 + g[:, 1::2] ** 2
        return np.prod(r2**exponents, axis=1)

    return _accumulate(draw, samples, area)


def _pairing(z, w) -> complex:
    return complex(np.sum(np.asarray(z, dtype=complex) * np.conj(np.asarray(w, dtype=complex))))


def bergman_kernel_exact_ball(n: int, z, w) -> ExactKernelValue:
    """n!/πⁿ·(1 − ⟨z,w⟩)^{−(n+1)}."""
    gap = 1.0 - _pairing(z, w)
    if gap == 0:
        return ExactKernelValue(complex(math.inf), True)
    value = math.factorial(n) / math.pi**n * gap ** (-(n + 1))
    return ExactKernelValue(complex(value), abs(gap) < NEAR_SINGULAR)


def szego_kernel_exact_sphere(n: int, z, w) -> ExactKernelValue:
    """(n−1)!/(2πⁿ)·(1 − ⟨z,w⟩)^{−n}, for |z| = 1 and |w| < 1 or vice versa."""
    gap = 1.0 - _pairing(z, w)
    if gap == 0:
        return ExactKernelValue(complex(math.inf), True)
    value = math.factorial(n - 1) / (2.0 * math.pi**n) * gap ** (-n)
    return ExactKernelValue(complex(value), abs(gap) < NEAR_SINGULAR)
