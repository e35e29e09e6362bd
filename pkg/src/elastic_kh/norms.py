"""Piecewise Sobolev norms on the front and on the two half-planes.

Transform convention: forward psi_hat(eta) = int psi(x1) exp(-i x1 eta) dx1,
inverse psi(x1) = (1/2pi) int psi_hat(eta) exp(i x1 eta) d eta. All norms
are computed on the spectral side, so for a front field the j = 0 norm is
sqrt(2 pi) times the physical L2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError

INVERSE_PREFACTOR = 1.0 / (2.0 * math.pi)
FRONT_RTOL = 1e-8
MAX_LEVEL = 20


def inverse_transform_weights(band, points_per_unit: int = 512):
    """Uniform eta grid on the band and trapezoid weights including 1/(2 pi)."""
    lo, hi = map(float, band)
    if not hi > lo:
        raise ValueError(f"empty eta band {band!r}")
    n = max(2, int(math.ceil(points_per_unit * (hi - lo))) + 1)
    eta = np.linspace(lo, hi, n)
    w = np.full(n, (hi - lo) / (n - 1))
    w[[0, -1]] *= 0.5
    return eta, w * INVERSE_PREFACTOR


def inverse_transform(amplitude: Callable, band, x1, points_per_unit: int = 512):
    eta, w = inverse_transform_weights(band, points_per_unit)
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    return np.exp(1j * np.outer(x1, eta)) @ (np.asarray(amplitude(eta), dtype=complex) * w)


@dataclass(frozen=True)
class SpectralDensity:
    """Amplitude supported on a bounded band.

    For a front field amplitude(eta) returns complex values. For an interior
    field it returns one component or a list of components, where each
    component is an ExponentialProfile, a pair of them (upper, lower), or a
    list of profiles whose sum is the component.
    """

    amplitude: Callable
    band: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.band
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"density must have bounded support, got band {self.band!r}")
        if hi < lo:
            raise DomainError(f"band must satisfy lo <= hi, got {self.band!r}")

    def __call__(self, eta):
        return self.amplitude(eta)

    def __add__(self, other: "SpectralDensity") -> "SpectralDensity":
        band = (min(self.band[0], other.band[0]), max(self.band[1], other.band[1]))

        def amp(eta):
            a, b = _masked(self, eta), _masked(other, eta)
            if _is_front(a):
                return np.asarray(a) + np.asarray(b)
            ca, cb = _components(a), _components(b)
            if len(ca) != len(cb):
                raise ValueError("cannot add densities with different component counts")
            return [x + y for x, y in zip(ca, cb)]

        return SpectralDensity(amp, band)

    def scaled(self, alpha) -> "SpectralDensity":
        def amp(eta):
            a = self.amplitude(eta)
            if _is_front(a):
                return alpha * np.asarray(a)
            return [[p.scaled(alpha) for p in comp] for comp in _components(a)]

        return SpectralDensity(amp, self.band)


def _is_front(a) -> bool:
    return isinstance(a, (np.ndarray, complex, float, int))


def _components(a) -> list:
    """Normalize an interior amplitude to a list of lists of profiles."""
    if hasattr(a, "coefficient"):
        return [[a]]
    out = []
    for comp in a:
        if hasattr(comp, "coefficient"):
            out.append([comp])
        else:
            out.append(list(comp))
    return out


def _masked(density: SpectralDensity, eta):
    eta = np.asarray(eta, dtype=float)
    inside = (eta >= density.band[0]) & (eta <= density.band[1])
    a = density.amplitude(eta)
    if _is_front(a):
        return np.where(inside, a, 0.0)
    return [[p.scaled(np.where(inside, 1.0, 0.0)) for p in comp] for comp in _components(a)]


def adaptive_trapezoid(fn: Callable, lo: float, hi: float, rtol: float = FRONT_RTOL, atol: float = 0.0):
    """Composite trapezoid, doubling the panel count until successive values agree."""
    if hi <= lo:
        return 0.0
    n = 16
    x = np.linspace(lo, hi, n + 1)
    y = np.asarray(fn(x), dtype=float)
    h = (hi - lo) / n
    total = h * (y.sum() - 0.5 * (y[0] + y[-1]))
    for _ in range(MAX_LEVEL - 4):
        h *= 0.5
        mids = lo + h * (2 * np.arange(n) + 1)
        new = 0.5 * total + h * np.asarray(fn(mids), dtype=float).sum()
        n *= 2
        if abs(new - total) <= max(rtol * abs(new), atol):
            return new
        total = new
    return total


def front_norm(density: SpectralDensity, j: int) -> float:
    _check_order(j)
    lo, hi = density.band
    return math.sqrt(adaptive_trapezoid(lambda e: (1.0 + e**2) ** j * np.abs(_masked(density, e)) ** 2, lo, hi))


def _check_order(j):
    if int(j) != j or j < 0:
        raise ValueError(f"regularity must be a nonnegative integer, got {j!r}")


def exponential_norm_density(components, eta, j: int):
    """Integrand in eta of the squared H^j half-plane norm, summed over components."""
    weight = 1.0 + np.asarray(eta, dtype=float) ** 2
    total = np.zeros_like(weight)
    for comp in components:
        for side in ("upper", "lower"):
            terms = [p for p in comp if p.side == side]
            for pk in terms:
                for pl in terms:
                    mk, ml = np.asarray(pk.decay), np.asarray(pl.decay)
                    if np.any(np.real(mk) <= 0):
                        raise DomainError("decay rate with nonpositive real part")
                    cross = pk.coefficient * np.conj(pl.coefficient) / (mk + np.conj(ml))
                    prod = mk * np.conj(ml)
                    for s in range(j + 1):
                        total = total + np.real(weight ** (j - s) * cross * prod**s)
    return total


def halfspace_norm_exponential(density: SpectralDensity, j: int) -> float:
    """Closed form in x2, using int_0^inf |d^s exp(-mu x)|^2 dx = |mu|^(2s) / (2 Re mu)."""
    _check_order(j)
    lo, hi = density.band
    fn = lambda e: exponential_norm_density(_components(_masked(density, e)), e, j)
    return math.sqrt(max(adaptive_trapezoid(fn, lo, hi), 0.0))


@dataclass(frozen=True)
class QuadratureGrid:
    band: tuple[float, float]
    eta_points: int = 401
    x2_max: float = 40.0
    x2_points: int = 4001


@dataclass(frozen=True)
class QuadratureNorm:
    value: float
    truncation_error: float
    warning: str | None

    def __float__(self):
        return self.value


def halfspace_norm_quadrature(sampler: Callable, j: int, grid: QuadratureGrid, rtol: float = 1e-8) -> QuadratureNorm:
    """Tensor-product Simpson evaluation of the squared half-plane norm.

    sampler(eta, x2, order, side) returns the order-th x2 derivative of the
    field on the given side ("upper" or "lower") with shape (len(eta), len(x2));
    x2 is signed, so it is >= 0 on the upper side and <= 0 on the lower one.
    """
    _check_order(j)
    eta = np.linspace(*grid.band, grid.eta_points)
    y = np.linspace(0.0, grid.x2_max, grid.x2_points)
    weight = 1.0 + eta**2
    inner = np.zeros_like(eta)
    tail = np.zeros_like(eta)
    for side, x2 in (("upper", y), ("lower", -y[::-1])):
        for s in range(j + 1):
            vals = np.abs(np.asarray(sampler(eta, x2, s, side))) ** 2
            inner += weight ** (j - s) * simpson(vals, x=x2, axis=1)
            edge = vals[:, -1] if x2[-1] > 0 else vals[:, 0]
            nxt = vals[:, -2] if x2[-1] > 0 else vals[:, 1]
            dx = y[1] - y[0]
            with np.errstate(divide="ignore", invalid="ignore"):
                rate = np.where((edge > 0) & (nxt > edge), np.log(nxt / np.where(edge > 0, edge, 1.0)) / dx, 0.0)
                est = np.where(rate > 0, edge / np.where(rate > 0, rate, 1.0), np.where(edge > 0, np.inf, 0.0))
            tail += weight ** (j - s) * est
    total = float(simpson(inner, x=eta))
    tail_total = float(simpson(tail, x=eta)) if np.all(np.isfinite(tail)) else math.inf
    value = math.sqrt(max(total, 0.0))
    trunc = tail_total / (2.0 * value) if value > 0 else 0.0
    warning = None
    if not tail_total <= rtol * max(total, 1e-300) and total > 0:
        warning = f"field has not decayed at x2_max={grid.x2_max}: estimated relative tail {tail_total / total:.3e}"
    return QuadratureNorm(value, trunc, warning)


def combined_norm(f=None, h=None, v=None, G=None, k: int = 0) -> float:
    """||f||_{H^k(front)} + ||h|| + ||v|| + ||G|| with interior norms on both half-planes."""
    total = front_norm(f, k) if f is not None else 0.0
    for comp in (h, v, G):
        if comp is not None:
            total += halfspace_norm_exponential(comp, k)
    return total
