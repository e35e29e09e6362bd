"""Explicit normal modes of the linearized front problem.

Every field of a mode is a single exponential in x2 on each half-line, so
profiles are kept symbolically (coefficient and decay rate) and evaluated on
demand. All builders broadcast over arrays of eta, tau and g_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dispersion import decay_rates, quartic_roots, symbol_direct, FrequencyPoint, in_xi
from .errors import DomainError, SingularDenominatorError
from .norms import inverse_transform_weights
from .state import BackgroundState

UPPER, LOWER = "upper", "lower"
SINGULAR_RTOL = 1e-12
ON_SHELL_RTOL = 1e-10
FIELDS = ("h", "w1", "w2", "E11", "E21", "E12", "E22")


@dataclass(frozen=True)
class ExponentialProfile:
    """coefficient * exp(-decay x2) for x2 > 0, or coefficient * exp(decay x2) for x2 < 0."""

    coefficient: complex | np.ndarray
    decay: complex | np.ndarray
    side: str

    def __post_init__(self):
        if self.side not in (UPPER, LOWER):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")

    def __call__(self, x2, order: int = 0):
        """Value of the order-th x2 derivative at x2 (x2 taken on this profile's side)."""
        x2 = np.asarray(x2, dtype=float)
        sgn = -1.0 if self.side == UPPER else 1.0
        rate = sgn * np.asarray(self.decay)
        return np.asarray(self.coefficient) * rate**order * np.exp(rate * x2)

    def scaled(self, factor) -> "ExponentialProfile":
        return ExponentialProfile(np.asarray(self.coefficient) * factor, self.decay, self.side)

    def conj(self) -> "ExponentialProfile":
        return ExponentialProfile(np.conj(self.coefficient), np.conj(self.decay), self.side)


@dataclass(frozen=True)
class ProfilePair:
    upper: ExponentialProfile
    lower: ExponentialProfile

    def __iter__(self):
        return iter((self.upper, self.lower))

    def at(self, x2, order: int = 0):
        """Evaluate at signed x2: x2 >= 0 uses the upper profile, x2 < 0 the lower."""
        x2 = np.asarray(x2, dtype=float)
        return np.where(x2 >= 0, self.upper(np.maximum(x2, 0.0), order), self.lower(np.minimum(x2, 0.0), order))


@dataclass(frozen=True)
class NormalMode:
    state: BackgroundState
    eta: float | np.ndarray
    tau: complex | np.ndarray
    g_hat: complex | np.ndarray
    m_hat: ProfilePair
    w1_hat: ProfilePair
    w2_hat: ProfilePair
    e_hat: dict  # (i, j) -> ProfilePair, i, j in {1, 2}
    on_shell: bool

    def profiles(self) -> dict:
        out = {"h": self.m_hat, "w1": self.w1_hat, "w2": self.w2_hat}
        for (i, j), pair in sorted(self.e_hat.items()):
            out[f"E{i}{j}"] = pair
        return out


def _side_data(state, side):
    """Background values (v1, G11, G12) seen from one side."""
    if side == UPPER:
        return state.v1_plus, state.g11_plus, state.g12_plus
    return state.v1_minus, state.g11_minus, state.g12_minus


def _arrays(eta, tau, g_hat):
    eta = np.asarray(eta, dtype=float)
    tau = np.asarray(tau, dtype=complex)
    g_hat = np.asarray(g_hat, dtype=complex)
    return eta, tau, g_hat


def _advect(state, side, tau, eta):
    """tau + i v1 eta for the given side, with a singularity guard."""
    v = _side_data(state, side)[0]
    out = tau + 1j * v * eta
    scale = np.abs(tau) + (abs(v) + math.sqrt(state.g_sq) + state.c) * np.abs(eta)
    if np.any(np.abs(out) <= SINGULAR_RTOL * scale):
        raise SingularDenominatorError(f"tau + i v1 eta vanishes on the {side} side", side)
    return out


def _denominator(state, side, tau, eta):
    adv = _advect(state, side, tau, eta)
    d = adv**2 + state.g_sq * eta**2
    scale = np.abs(tau) ** 2 + (state.v1_plus**2 + state.g_sq + state.c**2) * eta**2
    if np.any(np.abs(d) <= SINGULAR_RTOL * scale):
        raise SingularDenominatorError(f"(tau +- i v1 eta)^2 + G^2 eta^2 vanishes on the {side} side", side)
    return adv, d


def pressure_coefficient(state: BackgroundState, eta, tau, g_hat):
    """4 i v1 tau eta g / (c^2 (mu+ + mu-)), the common value of m at x2 = 0."""
    eta, tau, g_hat = _arrays(eta, tau, g_hat)
    mp, mm = decay_rates(state, tau, eta)
    return 4j * state.v1_plus * tau * eta * g_hat / (state.c**2 * (mp + mm))


def build_pressure(state: BackgroundState, eta, tau, g_hat) -> ProfilePair:
    eta, tau, g_hat = _arrays(eta, tau, g_hat)
    mp, mm = decay_rates(state, tau, eta)
    coef = 4j * state.v1_plus * tau * eta * g_hat / (state.c**2 * (mp + mm))
    return ProfilePair(ExponentialProfile(coef, mp, UPPER), ExponentialProfile(coef, mm, LOWER))


def build_velocity(state: BackgroundState, eta, tau, g_hat) -> tuple[ProfilePair, ProfilePair]:
    eta, tau, g_hat = _arrays(eta, tau, g_hat)
    mp, mm = decay_rates(state, tau, eta)
    c2 = state.c**2
    jump = (mp - mm) * g_hat
    ap, dp = _denominator(state, UPPER, tau, eta)
    am, dm = _denominator(state, LOWER, tau, eta)
    w1 = ProfilePair(
        ExponentialProfile(-jump * c2 * 1j * eta * ap / dp, mp, UPPER),
        ExponentialProfile(-jump * c2 * 1j * eta * am / dm, mm, LOWER),
    )
    w2 = ProfilePair(
        ExponentialProfile(jump * c2 * mp * ap / dp, mp, UPPER),
        ExponentialProfile(-jump * c2 * mm * am / dm, mm, LOWER),
    )
    return w1, w2


def build_deformation(state: BackgroundState, eta, tau, g_hat) -> dict:
    eta, tau, g_hat = _arrays(eta, tau, g_hat)
    w1, w2 = build_velocity(state, eta, tau, g_hat)
    out = {}
    for side in (UPPER, LOWER):
        _, g11, g12 = _side_data(state, side)
        adv = _advect(state, side, tau, eta)
        for i, w in ((1, w1), (2, w2)):
            prof = getattr(w, side)
            for j, g in ((1, g11), (2, g12)):
                out.setdefault((i, j), {})[side] = prof.scaled(1j * g * eta / adv)
    return {key: ProfilePair(val[UPPER], val[LOWER]) for key, val in out.items()}


def is_on_shell(state: BackgroundState, eta, tau) -> bool:
    eta, tau, _ = _arrays(eta, tau, 0)
    sym = symbol_direct(state, FrequencyPoint(tau, eta))
    scale = np.abs(tau) ** 2 + (state.v1_plus**2 + state.g_sq + state.c**2) * eta**2
    return bool(np.all(np.abs(sym) <= ON_SHELL_RTOL * np.maximum(scale, 1e-300)))


def build_mode(state: BackgroundState, eta, tau=None, g_hat=1.0) -> NormalMode:
    """Normal mode at (tau, eta); tau defaults to the unstable root X1 |eta|."""
    eta = np.asarray(eta, dtype=float)
    if tau is None:
        roots = quartic_roots(state)
        if not roots.x1_sq > 0:
            raise DomainError("no unstable root: state outside the open instability window")
        tau = roots.x1 * np.abs(eta)
    tau = np.asarray(tau, dtype=complex)
    if not in_xi(tau, eta):
        raise DomainError(f"frequency point outside Xi: tau={tau!r}")
    m = build_pressure(state, eta, tau, g_hat)
    w1, w2 = build_velocity(state, eta, tau, g_hat)
    e = build_deformation(state, eta, tau, g_hat)
    return NormalMode(state, eta, tau, np.asarray(g_hat, dtype=complex), m, w1, w2, e, is_on_shell(state, eta, tau))


def _rel(terms):
    terms = [np.asarray(t) for t in terms]
    res = np.abs(sum(terms))
    scale = sum(np.abs(t) for t in terms)
    return np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), 0.0)


def interior_residual(state: BackgroundState, mode: NormalMode, sample_x2) -> float:
    """Max normalized residual of the interior equations on both half-lines.

    Rows: mass, two momentum components, four deformation equations and the
    second-order pressure equation. sample_x2 are depths; each is used as +d
    on the upper side and -d on the lower side.
    """
    depths = np.abs(np.asarray(sample_x2, dtype=float))
    tau, eta = mode.tau, mode.eta
    c2 = state.c**2
    worst = 0.0
    for side in (UPPER, LOWER):
        v, g11, g12 = _side_data(state, side)
        x = depths if side == UPPER else -depths
        adv = tau + 1j * v * eta
        m = getattr(mode.m_hat, side)
        w = {1: getattr(mode.w1_hat, side), 2: getattr(mode.w2_hat, side)}
        e = {k: getattr(p, side) for k, p in mode.e_hat.items()}
        g = {1: g11, 2: g12}
        rows = [
            _rel([adv * m(x), 1j * eta * w[1](x), w[2](x, 1)]),
            _rel([adv * w[1](x), c2 * 1j * eta * m(x), -1j * eta * g[1] * e[(1, 1)](x), -1j * eta * g[2] * e[(1, 2)](x)]),
            _rel([adv * w[2](x), c2 * m(x, 1), -1j * eta * g[1] * e[(2, 1)](x), -1j * eta * g[2] * e[(2, 2)](x)]),
            _rel([adv**2 * m(x), c2 * eta**2 * m(x), -c2 * m(x, 2), state.g_sq * eta**2 * m(x)]),
        ]
        for i in (1, 2):
            for j in (1, 2):
                rows.append(_rel([adv * e[(i, j)](x), -1j * eta * g[j] * w[i](x)]))
        worst = max(worst, max(float(np.max(r)) for r in rows))
    return worst


def boundary_residuals(state: BackgroundState, mode: NormalMode) -> dict:
    """Normalized residuals of the interface conditions at x2 = 0."""
    tau, eta, g = mode.tau, mode.eta, mode.g_hat
    v = state.v1_plus
    c2 = state.c**2
    up, lo = UPPER, LOWER
    out = {
        "kinematic_upper": _rel([mode.w2_hat.upper(0.0), -(tau + 1j * v * eta) * g]),
        "kinematic_lower": _rel([mode.w2_hat.lower(0.0), -(tau - 1j * v * eta) * g]),
        "velocity_jump": _rel([mode.w2_hat.upper(0.0), -mode.w2_hat.lower(0.0), -2j * v * eta * g]),
        "pressure_jump": _rel([mode.m_hat.upper(0.0), -mode.m_hat.lower(0.0)]),
        "pressure_derivative_jump": _rel(
            [c2 * mode.m_hat.upper(0.0, 1), -c2 * mode.m_hat.lower(0.0, 1), 4j * v * tau * eta * g]
        ),
    }
    for side, (_, g11, g12) in ((up, _side_data(state, up)), (lo, _side_data(state, lo))):
        for j, gj in ((1, g11), (2, g12)):
            prof = getattr(mode.e_hat[(2, j)], side)
            out[f"deformation_2{j}_{side}"] = _rel([prof(0.0), -1j * gj * eta * g])
    return {k: float(np.max(val)) for k, val in out.items()}


def front_symbol_residual(state: BackgroundState, eta, tau, g_hat):
    return symbol_direct(state, FrequencyPoint(tau, eta)) * g_hat


@dataclass(frozen=True)
class ModeSpec:
    """Superposition of on-shell modes with spectral amplitude chi on a band."""

    state: BackgroundState
    amplitude: Callable
    band: tuple[float, float]
    points_per_unit: int = 512


def synthesize_physical(spec: ModeSpec, t: float, x1, x2=None, fields=("f",) + FIELDS) -> dict:
    """Real parts of the inverse transforms of the on-shell superposition at time t.

    The front "f" is returned with shape (len(x1),); interior fields with
    shape (len(x1), len(x2)), using the upper profile for x2 >= 0 and the lower
    one for x2 < 0.
    """
    eta, wts = inverse_transform_weights(spec.band, spec.points_per_unit)
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    roots = quartic_roots(spec.state)
    if not roots.x1_sq > 0:
        raise DomainError("no unstable root: state outside the open instability window")
    amp = np.asarray(spec.amplitude(eta), dtype=complex) * np.exp(roots.x1 * np.abs(eta) * t)
    phase = np.exp(1j * np.outer(x1, eta)) * wts  # (nx1, neta)
    out = {}
    if "f" in fields:
        out["f"] = np.real(phase @ amp)
    interior = [f for f in fields if f != "f"]
    if interior:
        if x2 is None:
            raise ValueError("x2 samples are required for interior fields")
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        keep = amp != 0
        mode = build_mode(spec.state, eta[keep], g_hat=amp[keep])
        profs = mode.profiles()
        for name in interior:
            vals = np.zeros((eta.size, x2.size), dtype=complex)
            vals[keep] = _sample(profs[name], x2)
            out[name] = np.real(phase @ vals)
    return out


def _sample(pair: ProfilePair, x2):
    """Profile values for every eta (rows) at every signed x2 (columns)."""
    up = pair.upper
    lo = pair.lower
    xu = np.maximum(x2, 0.0)[None, :]
    xl = np.minimum(x2, 0.0)[None, :]
    cu, du = np.asarray(up.coefficient)[:, None], np.asarray(up.decay)[:, None]
    cl, dl = np.asarray(lo.coefficient)[:, None], np.asarray(lo.decay)[:, None]
    return np.where(x2[None, :] >= 0, cu * np.exp(-du * xu), cl * np.exp(dl * xl))
