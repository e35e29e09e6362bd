"""Background (rectilinear) state, pressure law and instability window."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import DomainError

STATE_KEYS = ("rho_dot", "v1_plus", "g11_plus", "g12_plus", "c", "eps0")
DEFAULT_EPS0 = 0.05


@dataclass(frozen=True)
class PressureLaw:
    """Barotropic law p(rho) together with its derivative."""

    evaluate: Callable[[float], float]
    derivative: Callable[[float], float]
    name: str = "custom"

    @classmethod
    def linear(cls, c0: float = 1.0) -> "PressureLaw":
        return cls(lambda rho: c0**2 * rho, lambda rho: c0**2, f"linear(c0={c0})")

    @classmethod
    def power(cls, gamma: float, kappa: float = 1.0) -> "PressureLaw":
        return cls(
            lambda rho: kappa * rho**gamma,
            lambda rho: kappa * gamma * rho ** (gamma - 1.0),
            f"power(gamma={gamma})",
        )


def sound_speed(law: PressureLaw, rho: float) -> float:
    if not rho > 0:
        raise DomainError(f"density must be positive, got rho={rho!r}")
    dp = law.derivative(rho)
    if not dp > 0:
        raise DomainError(f"p'(rho) must be positive, got p'({rho!r})={dp!r}")
    return math.sqrt(dp)


class Classification(str, Enum):
    BELOW = "BelowWindow"
    IN_UNIFORM = "InUniformWindow"
    MARGINAL = "MarginalBand"
    ABOVE = "AboveWindow"


@dataclass(frozen=True)
class StabilityWindow:
    u_low: float
    u_upp: float
    eps0: float
    classification: Classification


@dataclass(frozen=True)
class BackgroundState:
    """Upper-side background values; the lower side follows by antisymmetry."""

    rho_dot: float
    v1_plus: float
    g11_plus: float
    g12_plus: float
    c: float
    eps0: float = DEFAULT_EPS0

    def __post_init__(self):
        for key in STATE_KEYS:
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise DomainError(f"{key} must be a real number, got {val!r}")
            if not math.isfinite(val):
                raise DomainError(f"{key} must be finite, got {val!r}")
        if self.rho_dot <= 0:
            raise DomainError(f"rho_dot must be positive, got {self.rho_dot!r}")
        if self.c < 0:
            raise DomainError(f"c must be nonnegative, got {self.c!r}")
        if self.eps0 <= 0:
            raise DomainError(f"eps0 must be positive, got {self.eps0!r}")

    @classmethod
    def from_law(cls, law: PressureLaw, rho_dot, v1_plus, g11_plus, g12_plus, eps0=DEFAULT_EPS0):
        return cls(rho_dot, v1_plus, g11_plus, g12_plus, sound_speed(law, rho_dot), eps0)

    @classmethod
    def from_km(cls, K: float, M: float, c: float = 1.0, eps0: float = DEFAULT_EPS0, rho_dot: float = 1.0):
        """State with deformation along the first column and nonnegative slip."""
        if K < 0 or M < 0:
            raise DomainError(f"K and M must be nonnegative, got K={K!r}, M={M!r}")
        return cls(rho_dot, M * c, K * c, 0.0, c, eps0)

    @classmethod
    def from_dict(cls, data: dict) -> "BackgroundState":
        unknown = set(data) - set(STATE_KEYS)
        if unknown:
            raise DomainError(f"unknown state keys: {sorted(unknown)}")
        missing = [k for k in STATE_KEYS[:5] if k not in data]
        if missing:
            raise DomainError(f"missing state keys: {missing}")
        return cls(**{k: data[k] for k in STATE_KEYS if k in data})

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in STATE_KEYS}

    # lower side
    @property
    def rho_minus(self) -> float:
        return self.rho_dot

    @property
    def v1_minus(self) -> float:
        return -self.v1_plus

    @property
    def g11_minus(self) -> float:
        return -self.g11_plus

    @property
    def g12_minus(self) -> float:
        return -self.g12_plus

    @property
    def g_sq(self) -> float:
        """G11^2 + G12^2 (same on both sides)."""
        return self.g11_plus**2 + self.g12_plus**2

    @property
    def K(self) -> float:
        return elastic_parameters(self)[0]

    @property
    def M(self) -> float:
        return elastic_parameters(self)[1]

    def window(self) -> StabilityWindow:
        return stability_window(self)


def elastic_parameters(state: BackgroundState) -> tuple[float, float]:
    if state.c == 0:
        raise DomainError("sound speed c = 0: K and M are undefined")
    return math.hypot(state.g11_plus, state.g12_plus) / state.c, abs(state.v1_plus) / state.c


WINDOW_RTOL = 1e-12


def stability_window(state: BackgroundState) -> StabilityWindow:
    c = state.c
    u_low = math.hypot(state.g11_plus, state.g12_plus)
    u_upp = math.sqrt(state.g_sq + 2.0 * c * c)
    speed = abs(state.v1_plus)
    # endpoints are included; allow for rounding in c * M
    tol = WINDOW_RTOL * u_upp
    if u_low + c * state.eps0 - tol <= speed <= u_upp - c * state.eps0 + tol:
        cls = Classification.IN_UNIFORM
    elif u_low < speed < u_upp:
        cls = Classification.MARGINAL
    elif speed <= u_low:
        cls = Classification.BELOW
    else:
        cls = Classification.ABOVE
    return StabilityWindow(u_low, u_upp, state.eps0, cls)
