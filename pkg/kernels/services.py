"""Evaluation of the Schwartz kernel χ_k(T_R)(z, w) from projector records."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.special import gammaln

from spectral.chi import ChiProfile
from spectral.projector import SpectralProjectorRep

logger = logging.getLogger(__name__)

# same slack the run config applies to boundary points
CLOSURE_SLACK = 1e-9


class KernelError(Exception):
    """Raised when a kernel value cannot be evaluated reliably."""


class UnstableSummation(KernelError):
    def __init__(self, message: str, *, log_range: float, limit: float):
        super().__init__(message)
        self.log_range = log_range
        self.limit = limit


class OutsideDomain(KernelError):
    """Raised for points outside the closed domain of the projector."""

    def __init__(self, message: str, *, value: float | None = None):
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class KernelSample:
    z: tuple[complex, ...]
    w: tuple[complex, ...]
    k: float
    value: complex
    terms_used: int
    max_term_log: float
    min_term_log: float


def common_support(z, w) -> np.ndarray:
    """Coordinates where both points are nonzero; only those carry α_j > 0."""
    return (np.asarray(z, dtype=complex) != 0) & (np.asarray(w, dtype=complex) != 0)


def _check_closed(a, point: np.ndarray, label: str) -> None:
    s = float(np.sum(np.asarray(a, dtype=float) * np.abs(point) ** 2))
    if s > 1.0 + CLOSURE_SLACK:
        raise OutsideDomain(f"{label} lies outside the closed domain: Σ a_j|{label}_j|² = {s:.12g}", value=s)


def kernel_eval(
    proj: SpectralProjectorRep,
    z,
    w,
    *,
    precise: bool = False,
    log_range_limit: float | None = None,
) -> KernelSample:
    """Σ_α χ(⟨λ,α⟩/k)·z^α·conj(w^α)/‖z^α‖², summed by degree layer.

    Terms spanning more than e^limit raise UnstableSummation unless
    ``precise`` is set, in which case every term goes through a correctly
    rounded summation instead.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape != (proj.domain.n,) or w.shape != (proj.domain.n,):
        raise KernelError(f"points must have {proj.domain.n} coordinates")
    _check_closed(proj.domain.a, z, "z")
    _check_closed(proj.domain.a, w, "w")
    support = common_support(z, w)
    if not proj.covers(support):
        raise KernelError("projector block does not cover the common support of z and w")
    limit = settings.LAB_SUMMATION_LOG_RANGE if log_range_limit is None else log_range_limit

    alphas = proj.alphas
    usable = np.all((alphas == 0) | support[None, :], axis=1)
    alphas = alphas[usable]
    weights = proj.weights[usable]
    log_norms = proj.log_norms[usable]
    sample = dict(z=tuple(complex(v) for v in z), w=tuple(complex(v) for v in w), k=proj.k)
    if alphas.shape[0] == 0:
        return KernelSample(**sample, value=0j, terms_used=0, max_term_log=-math.inf, min_term_log=-math.inf)

    with np.errstate(divide="ignore"):
        log_moduli = np.where(support, np.log(np.abs(z)) + np.log(np.abs(w)), 0.0)
    phases = np.where(support, np.angle(z * np.conj(w)), 0.0)
    log_terms = alphas @ log_moduli - log_norms
    phase = alphas @ phases

    top = float(log_terms.max())
    bottom = float(log_terms.min())
    if top - bottom > limit and not precise:
        raise UnstableSummation(
            f"term magnitudes span e^{top - bottom:.1f}, above e^{limit:g}",
            log_range=top - bottom,
            limit=limit,
        )

    terms = weights * np.exp(log_terms - top) * np.exp(1j * phase)
    degrees = alphas.sum(axis=1)
    if precise:
        total = complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))
    else:
        # records arrive in graded order; sum each degree layer, then layers ascending
        starts = np.flatnonzero(np.r_[True, degrees[1:] != degrees[:-1]])
        ends = np.r_[starts[1:], degrees.size]
        total = 0j
        for start, end in zip(starts, ends):
            total += np.sum(terms[start:end])
    value = complex(math.exp(top) * total)
    return KernelSample(
        **sample,
        value=value,
        terms_used=int(alphas.shape[0]),
        max_term_log=top,
        min_term_log=bottom,
    )


def degree_sum_kernel_ball(n: int, chi: ChiProfile, k: float, z, w, *, boundary: bool = False) -> complex:
    """Σ_d χ(d/k)·c_d·⟨z,w⟩^d for the ball with λ = (1, …, 1).

    c_d = (d+n)!/(πⁿ d!) for the Bergman kernel and (d+n−1)!/(2πⁿ d!) on the sphere.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_closed(np.ones(n), z, "z")
    _check_closed(np.ones(n), w, "w")
    inner = complex(np.sum(z * np.conj(w)))
    d = np.arange(int(math.floor(k * chi.t_min)), int(math.ceil(k * chi.t_max)) + 1)
    weights = chi.at_scale(d, k)
    d, weights = d[weights != 0], weights[weights != 0]
    if d.size == 0 or inner == 0:
        return 0j
    if boundary:
        log_coeffs = gammaln(d + n) - gammaln(d + 1) - math.log(2.0) - n * math.log(math.pi)
    else:
        log_coeffs = gammaln(d + n + 1) - gammaln(d + 1) - n * math.log(math.pi)
    log_terms = log_coeffs + d * math.log(abs(inner))
    top = float(log_terms.max())
    terms = weights * np.exp(log_terms - top) * np.exp(1j * d * np.angle(inner))
    return complex(math.exp(top) * np.sum(terms))
