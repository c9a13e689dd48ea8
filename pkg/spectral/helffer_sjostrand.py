"""χ_k(A) for Hermitian A by the Helffer–Sjöstrand formula.

    χ_k(A) = −(1/π) ∬ ∂̄χ̃_k(z) (z − A)⁻¹ dx dy

with the almost-analytic extension χ̃_k(x+iy) = τ(y) Σ_{m≤N} χ_k^{(m)}(x)(iy)^m/m!
and a C³ cutoff τ equal to 1 for |y| ≤ Y/2 and 0 for |y| ≥ Y. Only the upper
half-plane is integrated; the lower half contributes the adjoint.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from django.conf import settings
from scipy.special import roots_legendre

from .chi import ChiProfile, SpectralError

logger = logging.getLogger(__name__)

MAX_SIZE = 200
PANEL_NODES = 12
# half-height Y of the rectangle as a fraction of the width of supp χ_k
HEIGHT_FRACTION = 0.025
# summed bound on the contribution of nodes within one cell of the spectrum
RESOLVENT_TOLERANCE = 1e-8
SOLVE_ENTRIES = 4_000_000


class ResolventIllConditioned(SpectralError):
    def __init__(self, message: str, *, refinements: int):
        super().__init__(message)
        self.refinements = refinements


def eigen_functional_calculus(matrix, chi: ChiProfile, k: float) -> np.ndarray:
    """V diag(χ(λ/k)) V* from a dense eigendecomposition."""
    a = np.asarray(matrix, dtype=complex)
    values, vectors = np.linalg.eigh(a)
    return (vectors * chi.at_scale(values, k)) @ vectors.conj().T


def _cutoff(y: np.ndarray, height: float) -> tuple[np.ndarray, np.ndarray]:
    v = np.clip((height - np.abs(y)) / (0.5 * height), 0.0, 1.0)
    tau = v**4 * (35.0 - 84.0 * v + 70.0 * v**2 - 20.0 * v**3)
    dtau = 140.0 * v**3 * (1.0 - v) ** 3 * (-2.0 / height) * np.sign(y)
    return tau, dtau


def _panel_rule(lo: float, hi: float, panels: int, per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    return nodes, weights


def _hs_pass(
    a: np.ndarray,
    eigenvalues: np.ndarray,
    chi: ChiProfile,
    k: float,
    order: int,
    x_panels: int,
    y_nodes: int,
) -> tuple[np.ndarray, float, int]:
    """One quadrature pass: the matrix, the near-spectrum error bound and its node count."""
    size = a.shape[0]
    lo, hi = k * chi.t_min, k * chi.t_max
    height = HEIGHT_FRACTION * (hi - lo)

    xs, wx = _panel_rule(lo, hi, x_panels, PANEL_NODES)
    near_y, near_w = _panel_rule(0.0, 0.5 * height, 1, y_nodes)
    band_y, band_w = _panel_rule(0.5 * height, height, 1, y_nodes)
    ys = np.concatenate([near_y, band_y])
    wy = np.concatenate([near_w, band_w])
    cell = math.hypot((hi - lo) / (x_panels * PANEL_NODES), 0.5 * height / y_nodes)

    coeffs = chi.taylor(xs / k, order + 1) * (float(k) ** -np.arange(order + 2))[None, :]
    live = np.any(coeffs != 0.0, axis=1)
    xs, wx, coeffs = xs[live], wx[live], coeffs[live]

    tau, dtau = _cutoff(ys, height)
    iy_powers = (1j * ys)[:, None] ** np.arange(order + 1)[None, :]
    # ∂̄χ̃ = ½[τ(N+1)c_{N+1}(iy)^N + iτ' Σ_{m≤N} c_m (iy)^m]
    polynomial = np.einsum("xm,ym->xy", coeffs[:, : order + 1], iy_powers)
    remainder = (order + 1) * coeffs[:, order + 1][:, None] * (iy_powers[:, order] * tau)[None, :]
    dbar = 0.5 * (remainder + 1j * dtau[None, :] * polynomial)
    weight = wx[:, None] * wy[None, :]

    # ‖(z − A)⁻¹‖ = 1/dist(z, spec A); only nodes within one cell of the spectrum count
    if eigenvalues.size and xs.size:
        dx = np.min(np.abs(xs[:, None] - eigenvalues[None, :]), axis=1)
        dist = np.hypot(dx[:, None], ys[None, :])
    else:
        dist = np.full(weight.shape, np.inf)
    near = dist < cell
    bound = float(np.sum(np.abs(dbar[near]) * weight[near] / dist[near])) / math.pi
    flagged = int(np.count_nonzero(near & (dbar != 0.0)))

    g = (dbar * weight).reshape(-1)
    z = (xs[:, None] + 1j * ys[None, :]).reshape(-1)
    keep = g != 0.0
    g, z = g[keep], z[keep]

    identity = np.eye(size, dtype=complex)
    total = np.zeros((size, size), dtype=complex)
    batch = max(1, SOLVE_ENTRIES // (size * size))
    for start in range(0, z.size, batch):
        zb = z[start : start + batch]
        shifted = zb[:, None, None] * identity[None, :, :] - a[None, :, :]
        resolvents = np.linalg.solve(shifted, np.broadcast_to(identity, shifted.shape))
        total += np.einsum("b,bij->ij", g[start : start + batch], resolvents)

    result = -(1.0 / math.pi) * (total + total.conj().T)
    return result, bound, flagged


def helffer_sjostrand_chi(
    matrix,
    chi: ChiProfile,
    k: float,
    *,
    order: int | None = None,
    nodes: int | None = None,
    max_refinements: int | None = None,
    tolerance: float = RESOLVENT_TOLERANCE,
) -> np.ndarray:
    """Refines the grid until the nodes within a cell of the spectrum contribute at most ``tolerance``."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpectralError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_SIZE:
        raise SpectralError(f"Helffer–Sjöstrand oracle is limited to size ≤ {MAX_SIZE}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-10 * scale:
        raise SpectralError("matrix is not Hermitian")
    if not (k > 0):
        raise SpectralError(f"k must be positive, got {k}")

    order = settings.LAB_HS_ORDER if order is None else order
    nodes = settings.LAB_HS_NODES if nodes is None else nodes
    max_refinements = settings.LAB_HS_MAX_REFINEMENTS if max_refinements is None else max_refinements
    eigenvalues = np.linalg.eigvalsh(a) if a.size else np.zeros(0)

    x_panels = max(int(math.ceil(1.0 / HEIGHT_FRACTION)), int(math.ceil(nodes / PANEL_NODES)))
    y_nodes = PANEL_NODES
    bound = math.inf
    for level in range(max_refinements + 1):
        result, bound, flagged = _hs_pass(a, eigenvalues, chi, k, order, x_panels, y_nodes)
        if bound <= tolerance:
            logger.debug("Helffer–Sjöstrand converged at level %s (%s x-panels)", level, x_panels)
            return result
        logger.debug("Refining Helffer–Sjöstrand grid: %s nodes near the spectrum, bound %.3e", flagged, bound)
        x_panels *= 2
        y_nodes *= 2
    raise ResolventIllConditioned(
        f"nodes near the spectrum still contribute {bound:.3e} > {tolerance:.1e} after {max_refinements} refinements",
        refinements=max_refinements,
    )
