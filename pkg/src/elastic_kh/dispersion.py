"""Decay rates, front symbol, quartic roots and the bound constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .state import BackgroundState, elastic_parameters

WINDOW_SLACK = 1e-12


@dataclass(frozen=True)
class FrequencyPoint:
    tau: complex
    eta: float

    @property
    def in_Xi(self) -> bool:
        return in_xi(self.tau, self.eta)


def in_xi(tau, eta) -> bool:
    tau = np.asarray(tau, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(eta))):
        return False
    return bool(np.all(tau.real > 0))


def _require_xi(tau, eta):
    if not in_xi(tau, eta):
        raise DomainError(f"frequency point outside Xi (need Re(tau) > 0): tau={tau!r}, eta={eta!r}")


def complex_sqrt_halfplane(z):
    """Square root with Re >= 0 and sign(Im w) = sign(Im z), sign(0) = +1.

    Uses whichever of the two half-angle components is free of cancellation
    and recovers the other one from Im z = 2 Re w Im w.
    """
    z = np.asarray(z, dtype=complex)
    a, b = z.real, z.imag
    r = np.hypot(a, b)
    sgn = np.where(b < 0, -1.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.sqrt((r + np.abs(a)) / 2.0)
        small = np.where(big > 0, np.abs(b) / (2.0 * big), 0.0)
    x = np.where(a >= 0, big, small)
    y = np.where(a >= 0, small, big) * sgn
    w = x + 1j * y
    return w[()] if w.ndim == 0 else w


@dataclass(frozen=True)
class MuPair:
    """Decay rates and the Cartesian data (a, b, r) of the upper radicand."""

    mu_plus: complex
    mu_minus: complex
    a: float
    b: float
    r: float


def _radicands(state, tau, eta):
    c2 = state.c**2
    v = state.v1_plus
    zp = ((tau + 1j * v * eta) ** 2 + state.g_sq * eta**2) / c2 + eta**2
    zm = ((tau - 1j * v * eta) ** 2 + state.g_sq * eta**2) / c2 + eta**2
    return zp, zm


def decay_rates(state: BackgroundState, tau, eta):
    """Vectorized (mu+, mu-) for arrays of tau and eta with Re tau > 0."""
    elastic_parameters(state)
    tau = np.asarray(tau, dtype=complex)
    eta = np.asarray(eta, dtype=float)
    _require_xi(tau, eta)
    zp, zm = _radicands(state, tau, eta)
    return complex_sqrt_halfplane(zp), complex_sqrt_halfplane(zm)


def mu_pair(state: BackgroundState, p: FrequencyPoint) -> MuPair:
    mp, mm = decay_rates(state, p.tau, p.eta)
    zp, _ = _radicands(state, complex(p.tau), float(p.eta))
    return MuPair(complex(mp), complex(mm), zp.real, zp.imag, abs(zp))


def mu_residual(state: BackgroundState, p: FrequencyPoint) -> float:
    """max |mu^2 - radicand| over both roots."""
    pair = mu_pair(state, p)
    zp, zm = _radicands(state, complex(p.tau), float(p.eta))
    return max(abs(pair.mu_plus**2 - zp), abs(pair.mu_minus**2 - zm))


def symbol_direct(state: BackgroundState, p: FrequencyPoint):
    tau, eta = np.asarray(p.tau, dtype=complex), np.asarray(p.eta, dtype=float)
    mp, mm = decay_rates(state, tau, eta)
    v = state.v1_plus
    out = tau**2 - v**2 * eta**2 - 2j * v * eta * tau * (mp - mm) / (mp + mm) + state.g_sq * eta**2
    return out[()] if np.ndim(out) == 0 else out


def symbol_reduced(state: BackgroundState, p: FrequencyPoint):
    eta = np.asarray(p.eta, dtype=float)
    mp, mm = decay_rates(state, p.tau, eta)
    out = state.c**2 * (mp * mm - eta**2)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SymbolRoots:
    x1_sq: float
    x2_sq: float
    x1: float | None
    lam: float
    y2: float


def quartic_coefficients(state: BackgroundState) -> tuple[float, float, float]:
    """(1, p, q) of X^4 + p X^2 + q = 0."""
    v2, g2, c2 = state.v1_plus**2, state.g_sq, state.c**2
    p = 2.0 * (v2 + g2 + c2)
    q = v2**2 - 2.0 * (g2 + c2) * v2 + g2**2 + 2.0 * c2 * g2
    return 1.0, p, q


def quartic_roots(state: BackgroundState) -> SymbolRoots:
    elastic_parameters(state)
    v2, g2, c2 = state.v1_plus**2, state.g_sq, state.c**2
    x2_sq = -(v2 + g2 + c2) - math.sqrt(c2 * c2 + 4.0 * (g2 + c2) * v2)
    # product of roots form: exact zero at both window ends, no cancellation
    x1_sq = (v2 - g2) * (v2 - g2 - 2.0 * c2) / x2_sq
    x1 = math.sqrt(x1_sq) if x1_sq >= 0 else None
    return SymbolRoots(x1_sq, x2_sq, x1, x1_sq, math.sqrt(-x2_sq))


def growth_rate(state: BackgroundState, eta: float) -> float:
    roots = quartic_roots(state)
    if not roots.x1_sq > 0:
        raise DomainError(f"no unstable root: x1_sq={roots.x1_sq!r} <= 0 (state outside the open window)")
    return roots.x1 * abs(eta)


def _scaled_mu_product(state, X):
    """mu~+ mu~- at tau = X eta, i.e. the decay-rate product divided by eta^2."""
    X = np.asarray(X, dtype=complex)
    mp, mm = decay_rates(state, X, np.ones_like(X.real))
    return mp * mm


class SimpleRootCheck(NamedTuple):
    phi_value: float
    dphi_dX: float


def check_simple_root(state: BackgroundState, eta: float) -> SimpleRootCheck:
    if eta == 0:
        raise DomainError("eta must be nonzero")
    X1 = growth_rate(state, 1.0)
    h = 1e-6 * max(1.0, X1)
    phi0 = _scaled_mu_product(state, X1) - 1.0
    dphi = (_scaled_mu_product(state, X1 + h) - _scaled_mu_product(state, X1 - h)) / (2.0 * h)
    return SimpleRootCheck(float(np.real(phi0)), float(np.real(dphi)))


def dphi_dx_closed_form(state: BackgroundState) -> float:
    """Derivative of mu~+ mu~- at X1 obtained by differentiating mu~^2 exactly."""
    X1 = growth_rate(state, 1.0)
    prod = _scaled_mu_product(state, X1)
    c = state.c
    return float(np.real(2.0 * X1 * (X1**2 + state.v1_plus**2 + state.g_sq + c**2) / (c**4 * prod)))


@dataclass(frozen=True)
class ExclusionReport:
    y2: float
    mu_product: complex
    distance_to_minus_one: float
    in_xi: bool


def verify_x2_excluded(state: BackgroundState, offset: float = 1e-8) -> ExclusionReport:
    """Approach tau = i Y2 eta from the right half-plane and report mu~+ mu~-."""
    roots = quartic_roots(state)
    prod = complex(_scaled_mu_product(state, offset + 1j * roots.y2))
    return ExclusionReport(roots.y2, prod, abs(prod + 1.0), in_xi(1j * roots.y2, 1.0))


@dataclass(frozen=True)
class BoundConstants:
    c1: float
    c_star: float
    c2: float
    c3: float


def _require_uniform_window(state):
    K, M = elastic_parameters(state)
    lo, hi = K + state.eps0, math.sqrt(K * K + 2.0) - state.eps0
    tol = WINDOW_SLACK * max(1.0, hi)
    if not (lo - tol <= M <= hi + tol):
        raise DomainError(f"M={M!r} outside the uniform window [{lo!r}, {hi!r}]")
    return K, M


def bound_constants(state: BackgroundState) -> BoundConstants:
    """Uniform constants over the eps0-shrunk window.

    c2 is dimensionless: |i eta (tau +- i v eta) / D+-| <= c2 / c.
    """
    K, _ = _require_uniform_window(state)
    e = state.eps0
    k2 = K * K
    m_lo = K + e
    z_lo = math.sqrt(1.0 + 4.0 * (k2 + 1.0) * m_lo**2)
    c1 = 2.0 - 2.0 * (z_lo - 2.0 * m_lo**2)
    s = math.sqrt(k2 + 2.0)
    z_hi = math.sqrt((2.0 * k2 + 3.0) ** 2 - 4.0 * (k2 + 1.0) * e * (2.0 * s - e))
    c_star = 1.0 / (math.sqrt(2.0) * math.sqrt(1.0 + z_hi - 2.0 * (s - e) ** 2))
    d = z_lo - k2 - 1.0
    c2 = math.sqrt(d / (d * d + 2.0 * k2 * (z_lo - 2.0 * m_lo**2 - k2 - 1.0) + k2 * k2))
    c3 = 1.0 / (state.c**2 * d)
    return BoundConstants(c1, c_star, c2, c3)
