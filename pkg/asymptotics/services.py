"""Verdicts for the kernel asymptotics.

Each test builds the projectors it needs over a k ladder, compares exact
kernel values or traces against the predicted constants and returns an
AsymptoticsReport. Nothing here knows about run configs or output files.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from domains.catalog import DomainSpec
from geometry.defining import normalize_defining_function, to_real
from kernels.scans import NamedPair, evaluate, offdiagonal_scan, values_for
from kernels.services import common_support
from spectral.chi import ChiProfile
from spectral.projector import (
    ProjectorBuilder,
    ProjectorVariant,
    RotationGenerator,
    build_projector,
    build_boundary_projector,
    projector_cutoff,
)

from .fitting import AsymptoticsError, NonPositiveValue, fit_growth_order, is_non_increasing, is_strictly_decreasing, log_slope
from .predictions import boundary_geometry, boundary_trace_prediction, predict_A0, predict_b0
from .reports import AsymptoticsReport

logger = logging.getLogger(__name__)

__all__ = [
    "AsymptoticsError",
    "DepthTooLarge",
    "NonPositiveValue",
    "boundary_leading_ratio_test",
    "boundary_trace_test",
    "growth_order_test",
    "interior_damping_test",
    "interior_decay_test",
    "leading_ratio_test",
    "offdiagonal_decay_test",
    "trace_scan",
]

MAX_DEPTH = 0.05
ORDER_TOLERANCE = 0.05
DECAY_POWERS = (4, 6, 8)
ENVELOPE_SLOPE = -0.5


class DepthTooLarge(AsymptoticsError):
    def __init__(self, message: str, *, depth: float | None = None):
        super().__init__(message)
        self.depth = depth


def default_tolerance(domain: DomainSpec, generator: RotationGenerator) -> float:
    """3% on the unweighted ball, 10% for weighted generators or ellipsoids."""
    return 0.03 if domain.is_ball and generator.is_unweighted else 0.10


def boundary_trace_tolerance(generator: RotationGenerator) -> float:
    return 0.05 if generator.is_unweighted else 0.10


# ---- helpers ----

def _point(x) -> tuple[complex, ...]:
    return tuple(complex(v) for v in np.asarray(x, dtype=complex).reshape(-1))


def _ladder(k_ladder: Sequence[float]) -> list[float]:
    ladder = [float(k) for k in k_ladder]
    if not ladder:
        raise AsymptoticsError("k ladder is empty")
    if any(k <= 0 for k in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise AsymptoticsError(f"k ladder must be positive and strictly ascending: {ladder}")
    return ladder


def _provenance(generator: RotationGenerator, chi: ChiProfile, ladder: list[float]) -> dict:
    return {"ladder": ladder, "cutoffs": [projector_cutoff(generator, chi, k) for k in ladder]}


def _chi_inputs(chi: ChiProfile) -> dict:
    return {"center": chi.center, "radius": chi.radius, "amplitude": chi.amplitude, "kind": chi.kind}


def _diagonal_values(builder: ProjectorBuilder, x, ladder: list[float]) -> np.ndarray:
    active = tuple(bool(v) for v in common_support(x, x))
    values = []
    for k in ladder:
        proj = builder(k, active)
        values.append(evaluate(proj, x, x).value.real)
    return np.array(values)


def _rho_hat(domain: DomainSpec, z) -> float:
    p = to_real(z)
    return float(normalize_defining_function(domain.defining_function(), p).value(p))


def _radial_projection(domain: DomainSpec, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return z / math.sqrt(float(np.sum(np.asarray(domain.a) * np.abs(z) ** 2)))


def _ratio_clauses(ladder: list[float], ratios: np.ndarray, tolerance: float) -> tuple[dict, dict]:
    errors = np.abs(ratios - 1.0)
    clauses = {
        "final_ratio": bool(errors[-1] <= tolerance),
        "monotone_error": is_non_increasing(list(errors)),
    }
    fitted = {}
    if len(ladder) >= 2 and np.all(errors > 0):
        slope, intercept = np.polyfit(np.log(ladder), np.log(errors), 1)
        fitted = {"envelope_slope": float(slope), "envelope_constant": float(math.exp(intercept))}
        clauses["envelope"] = bool(slope <= ENVELOPE_SLOPE)
    return clauses, fitted


# ---- leading coefficients ----

def leading_ratio_test(
    x,
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    domain: DomainSpec | None = None,
    tolerance: float | None = None,
    budget: int | None = None,
    claim_id: str = "leading",
) -> AsymptoticsReport:
    """r(k) = K(x,x;k) / (kⁿ⁺¹ b₀(x)) should approach 1 like C/k."""
    domain = domain or DomainSpec.ball(generator.n)
    ladder = _ladder(k_ladder)
    tolerance = default_tolerance(domain, generator) if tolerance is None else tolerance
    n = domain.n

    b0 = predict_b0(x, chi, generator, domain)
    values = _diagonal_values(ProjectorBuilder(domain, generator, chi, budget=budget), x, ladder)
    ratios = values / (np.array(ladder) ** (n + 1) * b0)
    clauses, fitted = _ratio_clauses(ladder, ratios, tolerance)
    alpha, det_levi = boundary_geometry(domain, generator, x)

    logger.info("%s at %s: r(k_max) = %.6f", claim_id, _point(x), ratios[-1])
    return AsymptoticsReport(
        claim_id=claim_id,
        description="K(x,x;k)/(k^(n+1) b0(x)) -> 1 at a boundary point",
        inputs={"domain": domain.label(), "weights": list(generator.weights), "point": _point(x), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"kernel": values.tolist(), **fitted},
        predicted={"b0": b0, "alpha": alpha, "det_levi": det_levi, "order": n + 1},
        ratios=ratios.tolist(),
        tolerance=tolerance,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


def boundary_leading_ratio_test(
    x,
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    tolerance: float | None = None,
    budget: int | None = None,
    claim_id: str = "boundary_leading",
) -> AsymptoticsReport:
    """r_b(k) = K_b(x,x;k) / (kⁿ A₀(x)) for the Szegő variant on the sphere."""
    sphere = DomainSpec.ball(generator.n)
    ladder = _ladder(k_ladder)
    tolerance = default_tolerance(sphere, generator) if tolerance is None else tolerance
    n = sphere.n

    a0 = predict_A0(x, chi, generator, sphere)
    builder = ProjectorBuilder(sphere, generator, chi, ProjectorVariant.BOUNDARY.value, budget=budget)
    values = _diagonal_values(builder, x, ladder)
    ratios = values / (np.array(ladder) ** n * a0)
    clauses, fitted = _ratio_clauses(ladder, ratios, tolerance)

    logger.info("%s at %s: r_b(k_max) = %.6f", claim_id, _point(x), ratios[-1])
    return AsymptoticsReport(
        claim_id=claim_id,
        description="K_b(x,x;k)/(k^n A0(x)) -> 1 on the sphere",
        inputs={"n": n, "weights": list(generator.weights), "point": _point(x), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"kernel": values.tolist(), **fitted},
        predicted={"A0": a0, "order": n},
        ratios=ratios.tolist(),
        tolerance=tolerance,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


def growth_order_test(
    x,
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    domain: DomainSpec | None = None,
    boundary: bool = False,
    budget: int | None = None,
    claim_id: str | None = None,
) -> AsymptoticsReport:
    """Fitted log-log slope of K(x,x;k): n+1 for Bergman, n for Szegő."""
    domain = DomainSpec.ball(generator.n) if boundary or domain is None else domain
    ladder = _ladder(k_ladder)
    variant = ProjectorVariant.BOUNDARY if boundary else ProjectorVariant.INTERIOR
    order = domain.n if boundary else domain.n + 1
    claim_id = claim_id or ("boundary_growth" if boundary else "growth")

    values = _diagonal_values(ProjectorBuilder(domain, generator, chi, variant.value, budget=budget), x, ladder)
    fit = fit_growth_order(ladder, values)
    logger.info("%s at %s: slope %.4f, expected %s", claim_id, _point(x), fit.slope, order)
    return AsymptoticsReport(
        claim_id=claim_id,
        description=f"{variant.label} diagonal grows like k^{order}",
        inputs={"domain": domain.label(), "weights": list(generator.weights), "point": _point(x), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"kernel": values.tolist(), "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual},
        predicted={"order": order},
        tolerance=ORDER_TOLERANCE,
        clauses={"order": abs(fit.slope - order) <= ORDER_TOLERANCE},
        provenance=_provenance(generator, chi, ladder),
    )


# ---- interior ----

def interior_damping_test(
    x,
    depth: float,
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    domain: DomainSpec | None = None,
    tolerance: float = 0.10,
    budget: int | None = None,
    claim_id: str = "damping",
) -> AsymptoticsReport:
    """K(z,z;k)/K(x,x;k) against ∫χ(tα) tⁿ e^{2ktρ̂(z)} / ∫χ(tα) tⁿ on the inward ray z = (1−s)x.

    α = ω₀(T)(x). The slope clause compares d log K(z,z;k)/dk with the slope
    of the model k^{n+1}∫χ(tα) tⁿ e^{2ktρ̂}; the limit 2·(t_min/α)·ρ̂ is
    reported alongside.
    """
    if not (0.0 <= depth <= MAX_DEPTH):
        raise DepthTooLarge(f"depth {depth} is outside [0, {MAX_DEPTH}]", depth=depth)
    domain = domain or DomainSpec.ball(generator.n)
    ladder = _ladder(k_ladder)
    n = domain.n
    x = np.asarray(x, dtype=complex)
    z = (1.0 - depth) * x
    rho = _rho_hat(domain, z)
    alpha, _ = boundary_geometry(domain, generator, x)

    builder = ProjectorBuilder(domain, generator, chi, budget=budget)
    at_x = _diagonal_values(builder, x, ladder)
    at_z = _diagonal_values(builder, z, ladder)
    empirical = at_z / at_x
    base = chi.scaled_moment(alpha, n)
    damped = np.array([chi.damped_scaled_moment(alpha, n, 2.0 * k * rho) for k in ladder])
    predicted = damped / base
    ratios = empirical / predicted

    model = np.array(ladder) ** (n + 1) * damped
    slope = log_slope(ladder, at_z) if len(ladder) >= 2 else float("nan")
    model_slope = log_slope(ladder, model) if len(ladder) >= 2 else float("nan")
    clauses = {"ratio": bool(np.all(np.abs(ratios - 1.0) <= tolerance))}
    if len(ladder) >= 2:
        clauses["slope"] = bool(abs(slope / model_slope - 1.0) <= tolerance)

    logger.info("%s at depth %s: worst ratio error %.4f", claim_id, depth, float(np.max(np.abs(ratios - 1.0))))
    return AsymptoticsReport(
        claim_id=claim_id,
        description="normal damping K(z,z;k)/K(x,x;k) along an inward ray",
        inputs={"domain": domain.label(), "weights": list(generator.weights), "point": _point(x), "depth": depth, "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"boundary_kernel": at_x.tolist(), "interior_kernel": at_z.tolist(), "ratio": empirical.tolist(), "slope": slope},
        predicted={
            "rho": rho,
            "alpha": alpha,
            "ratio": predicted.tolist(),
            "slope": model_slope,
            "asymptotic_slope": 2.0 * chi.t_min / alpha * rho,
        },
        ratios=ratios.tolist(),
        tolerance=tolerance,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


def interior_decay_test(
    z,
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    domain: DomainSpec | None = None,
    powers: Sequence[int] = DECAY_POWERS,
    tolerance: float = 0.10,
    budget: int | None = None,
    claim_id: str = "interior_decay",
) -> AsymptoticsReport:
    """|K(z,z;k)|·k^N decreasing at an interior point, rate 2·(t_min/α)·ρ̂(z).

    α is taken at the radial projection of z onto the boundary.
    """
    domain = domain or DomainSpec.ball(generator.n)
    ladder = _ladder(k_ladder)
    magnitudes = np.abs(_diagonal_values(ProjectorBuilder(domain, generator, chi, budget=budget), z, ladder))

    empirical: dict = {"kernel": magnitudes.tolist()}
    predicted: dict = {}
    if not np.any(magnitudes):
        clauses = {"identically_zero": True}
    else:
        ks = np.array(ladder)
        clauses = {f"k^{p}": is_strictly_decreasing(list(magnitudes * ks**p)) for p in powers}
        if len(ladder) >= 2:
            rho = _rho_hat(domain, z)
            alpha, _ = boundary_geometry(domain, generator, _radial_projection(domain, z))
            rate = 2.0 * chi.t_min / alpha * rho
            slope = log_slope(ladder, magnitudes)
            empirical["slope"] = slope
            predicted.update(rho=rho, alpha=alpha, slope=rate)
            clauses["rate"] = bool(abs(slope / rate - 1.0) <= tolerance)

    logger.info("%s at %s: %s", claim_id, _point(z), clauses)
    return AsymptoticsReport(
        claim_id=claim_id,
        description="superpolynomial decay of K(z,z;k) inside the domain",
        inputs={"domain": domain.label(), "weights": list(generator.weights), "point": _point(z), "powers": list(powers), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical=empirical,
        predicted=predicted,
        tolerance=tolerance,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


def offdiagonal_decay_test(
    pairs: Sequence[NamedPair],
    chi: ChiProfile,
    generator: RotationGenerator,
    k_ladder: Sequence[float],
    *,
    domain: DomainSpec | None = None,
    powers: Sequence[int] = DECAY_POWERS,
    budget: int | None = None,
    claim_id: str = "offdiag",
) -> AsymptoticsReport:
    """|K(x,y;k)|·k^N decreasing over the upper half of the ladder, per pair."""
    domain = domain or DomainSpec.ball(generator.n)
    ladder = _ladder(k_ladder)
    if len(ladder) < 2:
        raise AsymptoticsError("off-diagonal decay needs at least two values of k")
    start = min(len(ladder) // 2, len(ladder) - 2)

    rows = offdiagonal_scan(ProjectorBuilder(domain, generator, chi, budget=budget), pairs, ladder)
    clauses: dict[str, bool] = {}
    empirical: dict = {}
    predicted: dict = {}
    for pair in sorted(pairs, key=lambda p: p.id):
        ks, values = values_for(rows, pair.id)
        magnitudes = np.abs(values)
        empirical[pair.id] = magnitudes.tolist()
        upper_k, upper = ks[start:], magnitudes[start:]
        if not np.any(upper):
            clauses[f"{pair.id}.identically_zero"] = True
            continue
        for p in powers:
            clauses[f"{pair.id}.k^{p}"] = is_strictly_decreasing(list(upper * upper_k**p))
        inner = abs(complex(np.vdot(np.asarray(pair.w, dtype=complex), np.asarray(pair.z, dtype=complex))))
        if magnitudes[-1] > 0:
            empirical[f"{pair.id}.rate"] = math.log(magnitudes[-1]) / ks[-1]
        if inner > 0:
            predicted[f"{pair.id}.series_rate"] = chi.t_min * math.log(inner)

    logger.info("%s: %s of %s clauses hold", claim_id, sum(clauses.values()), len(clauses))
    return AsymptoticsReport(
        claim_id=claim_id,
        description="off-diagonal decay of K(x,y;k)",
        inputs={
            "domain": domain.label(),
            "weights": list(generator.weights),
            "pairs": {p.id: [_point(p.z), _point(p.w)] for p in pairs},
            "powers": list(powers),
            "chi": _chi_inputs(chi),
        },
        ladder=ladder,
        empirical=empirical,
        predicted=predicted,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


# ---- traces ----

def _trace_reference(n: int, generator: RotationGenerator, chi: ChiProfile) -> float:
    """lim Tr/kⁿ = ∫χ t^{n−1} dt / ((n−1)! ∏λ_j), by counting lattice points."""
    return chi.moment(n - 1) / (math.factorial(n - 1) * float(np.prod(generator.weights)))


def trace_scan(
    domain: DomainSpec,
    generator: RotationGenerator,
    chi: ChiProfile,
    k_ladder: Sequence[float],
    *,
    budget: int | None = None,
    claim_id: str = "trace",
) -> AsymptoticsReport:
    """Tr χ_k(T_R)/kⁿ stays in a bounded band and the fitted order is n."""
    ladder = _ladder(k_ladder)
    n = domain.n
    traces = np.array([build_projector(domain, generator, chi, k, budget=budget).trace() for k in ladder])
    normalized = traces / np.array(ladder) ** n
    upper = normalized[len(ladder) // 2:]
    low, high = 0.5 * float(np.min(upper)), 2.0 * float(np.max(upper))
    fit = fit_growth_order(ladder, traces)
    reference = _trace_reference(n, generator, chi)

    clauses = {
        "band": bool(np.all((normalized >= low) & (normalized <= high))),
        "order": abs(fit.slope - n) <= ORDER_TOLERANCE,
    }
    logger.info("%s on %s: order %.4f", claim_id, domain.label(), fit.slope)
    return AsymptoticsReport(
        claim_id=claim_id,
        description="C1 k^n <= Tr chi_k(T_R) <= C2 k^n",
        inputs={"domain": domain.label(), "weights": list(generator.weights), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"trace": traces.tolist(), "normalized": normalized.tolist(), "slope": fit.slope, "residual": fit.residual},
        predicted={"order": n, "band": [low, high], "limit": reference},
        ratios=(normalized / reference).tolist(),
        tolerance=ORDER_TOLERANCE,
        clauses=clauses,
        provenance=_provenance(generator, chi, ladder),
    )


def boundary_trace_test(
    n: int,
    generator: RotationGenerator,
    chi: ChiProfile,
    k_ladder: Sequence[float],
    *,
    tolerance: float | None = None,
    budget: int | None = None,
    claim_id: str = "boundary_trace",
) -> AsymptoticsReport:
    """Exact Szegő trace against (kⁿ/2πⁿ)∫_X∫ det 𝓛ₓ χ(tα(x)) t^{n−1} dt dσ."""
    ladder = _ladder(k_ladder)
    tolerance = boundary_trace_tolerance(generator) if tolerance is None else tolerance
    traces = np.array([build_boundary_projector(n, generator, chi, k, budget=budget).trace() for k in ladder])
    unit = boundary_trace_prediction(n, generator, chi, 1.0)
    predicted = unit * np.array(ladder) ** n
    ratios = traces / predicted

    logger.info("%s: ratio at k_max %.6f", claim_id, ratios[-1])
    return AsymptoticsReport(
        claim_id=claim_id,
        description="boundary trace against the sphere integral of the leading symbol",
        inputs={"n": n, "weights": list(generator.weights), "chi": _chi_inputs(chi)},
        ladder=ladder,
        empirical={"trace": traces.tolist()},
        predicted={"trace": predicted.tolist(), "per_k^n": unit},
        ratios=ratios.tolist(),
        tolerance=tolerance,
        clauses={"final_ratio": bool(abs(ratios[-1] - 1.0) <= tolerance)},
        provenance=_provenance(generator, chi, ladder),
    )
