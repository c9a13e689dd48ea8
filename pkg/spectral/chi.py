"""Compactly supported bump profiles χ and their semiclassical rescalings χ_k."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.db import models
from scipy import integrate

TAYLOR_FLOOR = 1.0 / 600.0


class SpectralError(Exception):
    """Raised when a spectral computation cannot be carried out."""


class InvalidChiProfile(SpectralError):
    pass


class ChiKind(models.TextChoices):
    BUMP = "bump", "Bump"
    DIPOLE = "dipole", "Signed dipole"


@dataclass(frozen=True)
class ChiProfile:
    """χ(t) = A·exp(−p/(1−u²))·(u if dipole) with u = (t−c)/r, zero for |u| ≥ 1."""

    center: float
    radius: float
    amplitude: float = 1.0
    kind: str = ChiKind.BUMP.value
    power: int = 1
    allow_signed: bool = False

    def __post_init__(self):
        if not (self.radius > 0):
            raise InvalidChiProfile(f"χ radius must be positive, got {self.radius}")
        if not (self.center - self.radius > 0):
            raise InvalidChiProfile(
                f"χ must be supported in (0, +∞): c − r = {self.center - self.radius:g} is not positive"
            )
        if self.kind not in ChiKind.values:
            raise InvalidChiProfile(f"unknown χ kind {self.kind!r}")
        if self.power < 1:
            raise InvalidChiProfile(f"χ power must be at least 1, got {self.power}")
        if self.amplitude == 0 or not math.isfinite(self.amplitude):
            raise InvalidChiProfile("χ amplitude must be finite and nonzero")
        if self.is_signed and not self.allow_signed:
            raise InvalidChiProfile("signed χ profiles require allow_signed")

    @property
    def t_min(self) -> float:
        return self.center - self.radius

    @property
    def t_max(self) -> float:
        return self.center + self.radius

    @property
    def is_signed(self) -> bool:
        return self.kind == ChiKind.DIPOLE or self.amplitude < 0

    @property
    def sup(self) -> float:
        if self.kind == ChiKind.BUMP:
            return abs(self.amplitude) * math.exp(-self.power)
        return float(np.max(np.abs(self(np.linspace(self.t_min, self.t_max, 2001)))))

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        u = (t_arr - self.center) / self.radius
        inside = np.abs(u) < 1.0
        w = np.where(inside, 1.0 - u * u, 1.0)
        value = np.where(inside, self.amplitude * np.exp(-self.power / w), 0.0)
        if self.kind == ChiKind.DIPOLE:
            value = value * u
        return float(value) if value.ndim == 0 else value

    def at_scale(self, values, k: float):
        """χ_k(λ) = χ(λ/k)."""
        return self(np.asarray(values, dtype=float) / k)

    def scaled(self, factor: float) -> "ChiProfile":
        return ChiProfile(
            self.center, self.radius, self.amplitude * factor, self.kind, self.power, self.allow_signed
        )

    def squared(self) -> "ChiProfile":
        if self.kind != ChiKind.BUMP:
            raise InvalidChiProfile("only bump profiles are closed under squaring")
        return ChiProfile(
            self.center, self.radius, self.amplitude**2, self.kind, 2 * self.power, self.allow_signed
        )

    def taylor(self, t, order: int) -> np.ndarray:
        """Coefficients a_m(t), m ≤ order, with χ(t+h) = Σ a_m h^m.

        Power-series arithmetic on w = 1 − u², its reciprocal and the
        exponential; rows where χ(t) < e^{−600p} are set to zero.
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        u0 = (t_arr - self.center) / self.radius
        w0 = 1.0 - u0 * u0
        live = w0 > TAYLOR_FLOOR
        w0 = np.where(live, w0, 1.0)
        w1 = -2.0 * u0

        q = np.zeros((order + 1, t_arr.size))
        q[0] = 1.0 / w0
        for m in range(1, order + 1):
            acc = w1 * q[m - 1]
            if m >= 2:
                acc = acc - q[m - 2]
            q[m] = -acc / w0
        g = -self.power * q

        e = np.zeros_like(q)
        e[0] = np.exp(g[0])
        for m in range(1, order + 1):
            e[m] = sum(j * g[j] * e[m - j] for j in range(1, m + 1)) / m

        if self.kind == ChiKind.DIPOLE:
            d = np.empty_like(e)
            d[0] = u0 * e[0]
            d[1:] = u0 * e[1:] + e[:-1]
            e = d

        scale = self.radius ** -np.arange(order + 1, dtype=float)
        coeffs = self.amplitude * e.T * scale
        coeffs[~live] = 0.0
        return coeffs

    def moment(self, power: int) -> float:
        """∫ χ(t) t^p dt over the support, adaptive Gauss–Kronrod at 1e−12."""
        return _moment(self, int(power))

    def scaled_moment(self, alpha: float, power: int) -> float:
        """∫₀^∞ χ(t·α) t^p dt integrated directly over [t_min/α, t_max/α]."""
        value, _ = integrate.quad(
            lambda t: self(t * alpha) * t**power,
            self.t_min / alpha,
            self.t_max / alpha,
            epsabs=1e-12,
            epsrel=1e-12,
            limit=200,
        )
        return float(value)

    def damped_scaled_moment(self, alpha: float, power: int, rate: float) -> float:
        """∫₀^∞ χ(t·α) t^p e^{rate·t} dt over [t_min/α, t_max/α]."""
        if alpha <= 0:
            raise SpectralError(f"scale must be positive, got {alpha}")
        value, _ = integrate.quad(
            lambda t: self(t * alpha) * t**power * math.exp(rate * t),
            self.t_min / alpha,
            self.t_max / alpha,
            epsabs=0.0,
            epsrel=1e-12,
            limit=200,
        )
        return float(value)


@lru_cache(maxsize=512)
def _moment(chi: ChiProfile, power: int) -> float:
    value, _ = integrate.quad(
        lambda t: chi(t) * t**power, chi.t_min, chi.t_max, epsabs=1e-12, epsrel=1e-12, limit=200
    )
    return float(value)
