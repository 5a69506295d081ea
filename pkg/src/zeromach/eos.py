"""Pressure laws for the gas and the liquid phase.

Both families share a power-law inverse

    tau(p) = A * q(p)**(-1/g),    q(p) = a + b*p,

with ``q = p`` for the gamma-law gas and ``q = p_bar + kappa**2 (p - p_bar)``
for the kappa-scaled Tait liquid. Everything below (wave curves, sound
speeds, inverse sound speeds) is written once against that form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

P_MIN = 1e-8


class InadmissiblePressure(ValueError):
    """Raised for pressures at or below the floor, or outside the law's range."""


class GasState(NamedTuple):
    """Primitive unknowns ``(p, v)`` of the Lagrangian p-system."""

    p: float
    v: float


class PressureLaw:
    """Base class; subclasses fill in the power-law coefficients."""

    # tau = A * q**(-1/g) with q = a + b*p
    A: float
    g: float
    a: float
    b: float

    def reduced(self, p: float) -> float:
        """Rescaled pressure ``q``; the identity for the gas."""
        return self.a + self.b * p

    def check(self, p: float) -> float:
        q = self.a + self.b * p
        if not (p > P_MIN and q > 0.0) or math.isinf(p):
            raise InadmissiblePressure(f"pressure {p!r} inadmissible for {self!r}")
        return q

    @property
    def p_lower(self) -> float:
        """Infimum of admissible pressures."""
        if self.a < 0.0:
            return max(P_MIN, -self.a / self.b)
        return P_MIN

    # --- constitutive maps -------------------------------------------------

    def tau(self, p: float) -> float:
        q = self.check(p)
        return self.A * q ** (-1.0 / self.g)

    def dtau(self, p: float) -> float:
        q = self.check(p)
        return -self.b * self.A / self.g * q ** (-1.0 / self.g - 1.0)

    def pressure(self, tau: float) -> float:
        """Inverse of :meth:`tau`, i.e. ``P(tau)``."""
        if tau <= 0.0:
            raise InadmissiblePressure(f"specific volume {tau!r} must be positive")
        q = (tau / self.A) ** (-self.g)
        return (q - self.a) / self.b

    def char_speed(self, p: float) -> float:
        """Lagrangian sound speed ``sqrt(-1/tau'(p))``."""
        return 1.0 / math.sqrt(-self.dtau(p))

    def p_of_char_speed(self, c: float) -> float:
        """Pressure at which :meth:`char_speed` equals ``c``."""
        q = (self.b * self.A * c * c / self.g) ** (self.g / (self.g + 1.0))
        return (q - self.a) / self.b

    def strength_weight(self) -> float:
        """Factor turning a pressure jump into a front strength."""
        return 1.0

    # --- Lax curves --------------------------------------------------------

    def tau_drop(self, p: float, p0: float) -> float:
        """``tau(p0) - tau(p)`` without cancellation for nearby pressures."""
        q0 = self.check(p0)
        self.check(p)
        x = self.b * (p - p0) / q0
        return -self.A * q0 ** (-1.0 / self.g) * math.expm1(-math.log1p(x) / self.g)

    def wave_curve(self, p: float, p0: float) -> float:
        """Velocity increment ``W(p; p0)`` along the Lax curve through ``p0``.

        Shock branch for ``p > p0``, rarefaction integral otherwise. ``W`` is
        increasing, C1, and vanishes at ``p0``.
        """
        if p > p0:
            return math.sqrt((p - p0) * self.tau_drop(p, p0))
        q0 = self.check(p0)
        self.check(p)
        x = math.log1p(self.b * (p - p0) / q0)
        g = self.g
        scale = math.sqrt(self.A / (g * self.b))
        if g == 1.0:
            return scale * x
        beta = (g - 1.0) / (2.0 * g)
        return scale / beta * q0**beta * math.expm1(beta * x)

    def dwave_curve(self, p: float, p0: float) -> float:
        """Derivative of :meth:`wave_curve` with respect to ``p``."""
        if p > p0:
            dp = p - p0
            drop = self.tau_drop(p, p0)
            w2 = dp * drop
            if w2 <= 1e-300:
                return math.sqrt(-self.dtau(p0))
            return (drop - dp * self.dtau(p)) / (2.0 * math.sqrt(w2))
        return math.sqrt(-self.dtau(p))

    def shock_speed(self, p: float, p0: float) -> float:
        """Unsigned Rankine-Hugoniot speed ``sqrt(-dp/dtau)`` between two pressures."""
        if p == p0:
            return self.char_speed(p)
        lo, hi = (p, p0) if p < p0 else (p0, p)
        return math.sqrt((hi - lo) / self.tau_drop(hi, lo))


@dataclass(frozen=True)
class GammaGas(PressureLaw):
    """``P(tau) = k / tau**gamma``."""

    k: float = 1.0
    gamma: float = 1.4

    def __post_init__(self):
        if not (self.k > 0 and self.gamma > 0):
            raise ValueError(f"GammaGas needs k > 0 and gamma > 0, got {self.k}, {self.gamma}")
        object.__setattr__(self, "A", self.k ** (1.0 / self.gamma))
        object.__setattr__(self, "g", float(self.gamma))
        object.__setattr__(self, "a", 0.0)
        object.__setattr__(self, "b", 1.0)


@dataclass(frozen=True)
class TaitLiquid(PressureLaw):
    """Tait liquid ``T(p) = p**(-1/n)`` evaluated at ``p_bar + kappa**2 (p - p_bar)``."""

    n: float = 7.0
    p_bar: float = 1.0
    kappa: float = 0.1

    def __post_init__(self):
        if not (self.n > 0 and self.p_bar > 0 and self.kappa > 0):
            raise ValueError(
                f"TaitLiquid needs n, p_bar, kappa > 0, got {self.n}, {self.p_bar}, {self.kappa}"
            )
        k2 = self.kappa**2
        object.__setattr__(self, "A", 1.0)
        object.__setattr__(self, "g", float(self.n))
        object.__setattr__(self, "a", self.p_bar * (1.0 - k2))
        object.__setattr__(self, "b", k2)

    @property
    def tau_bar(self) -> float:
        return self.p_bar ** (-1.0 / self.n)

    @classmethod
    def from_compressibility(cls, n: float, tau_bar: float, beta: float) -> "TaitLiquid":
        """Build from the isothermal compressibility, ``kappa**2 = n beta / tau_bar**n``."""
        return cls(n=n, p_bar=tau_bar ** (-n), kappa=math.sqrt(n * beta / tau_bar**n))

    def with_kappa(self, kappa: float) -> "TaitLiquid":
        return TaitLiquid(self.n, self.p_bar, kappa)

    def strength_weight(self) -> float:
        return self.kappa


# Functional aliases -------------------------------------------------------


def tau_of_p(law: PressureLaw, p: float) -> float:
    return law.tau(p)


def dtau_dp(law: PressureLaw, p: float) -> float:
    return law.dtau(p)


def char_speed(law: PressureLaw, p: float) -> float:
    return law.char_speed(p)


def wave_curve_W(law: PressureLaw, p: float, p0: float) -> float:
    return law.wave_curve(p, p0)
