"""Band-limited sequences of unstable modes: small data that grows without bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import bound_constants, quartic_roots, _require_uniform_window
from .errors import DomainError
from .modes import build_mode
from .norms import adaptive_trapezoid, exponential_norm_density

NORM_RTOL = 1e-12
OVERFLOW_LOG10 = 300.0


def _bump_shape(eta, n):
    t = 2.0 * (np.asarray(eta, dtype=float) - n) - 1.0
    inside = np.abs(t) < 1.0
    safe = np.where(inside, t, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe**2)), 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """s * exp(-1/(1 - t^2)), t = 2(eta - n) - 1, supported in (n, n+1)."""

    n: int
    j: int
    cbar_j: float
    scale: float

    def __call__(self, eta):
        return self.scale * _bump_shape(eta, self.n)

    @property
    def band(self) -> tuple[float, float]:
        return float(self.n), float(self.n + 1)

    def weighted_integral(self, power: float, growth: float = 0.0) -> float:
        """int (1 + eta^2)^power exp(2 growth (eta - n)) chi^2 d eta."""
        n = self.n
        fn = lambda e: (1.0 + e**2) ** power * np.exp(2.0 * growth * (e - n)) * self(e) ** 2
        return adaptive_trapezoid(fn, n, n + 1, rtol=NORM_RTOL)


def make_bump(n: int, j: int, cbar_j: float = 1.0) -> BumpProfile:
    if n < 1 or j < 0:
        raise DomainError(f"need n >= 1 and j >= 0, got n={n!r}, j={j!r}")
    if not cbar_j > 0:
        raise DomainError(f"cbar_j must be positive, got {cbar_j!r}")
    raw = BumpProfile(n, j, cbar_j, 1.0).weighted_integral(j + 1)
    return BumpProfile(n, j, cbar_j, 1.0 / (cbar_j * n * math.sqrt(raw)))


@dataclass(frozen=True)
class NormSet:
    """Front, pressure, velocity and deformation norms, with exact log10 values."""

    log10_f: float
    log10_h: float
    log10_v: float
    log10_G: float

    @staticmethod
    def _val(lg):
        return 10.0**lg if lg < OVERFLOW_LOG10 else math.inf

    @property
    def f(self):
        return self._val(self.log10_f)

    @property
    def h(self):
        return self._val(self.log10_h)

    @property
    def v(self):
        return self._val(self.log10_v)

    @property
    def G(self):
        return self._val(self.log10_G)

    def as_dict(self) -> dict:
        return {"f": self.f, "h": self.h, "v": self.v, "G": self.G}

    @property
    def log10_combined(self) -> float:
        logs = np.array([self.log10_f, self.log10_h, self.log10_v, self.log10_G])
        top = logs.max()
        return float(top + np.log10(np.sum(10.0 ** (logs - top))))


def _log10_sqrt(x):
    return 0.5 * math.log10(x) if x > 0 else -math.inf


def _sequence_norms(state, n, regularity, t, bump):
    """Exact norms of the on-shell mode with g_hat = bump at time t.

    The growth exp(X1 eta t) is split as exp(X1 n t) * exp(X1 (eta - n) t) so
    only the bounded part enters the quadrature.
    """
    x1 = quartic_roots(state).x1
    lo, hi = bump.band
    shift = x1 * n * t / math.log(10.0)

    def fields(e):
        mode = build_mode(state, e, g_hat=bump(e) * np.exp(x1 * (e - n) * t))
        v = [mode.w1_hat, mode.w2_hat]
        G = [mode.e_hat[k] for k in sorted(mode.e_hat)]
        return [mode.m_hat], v, G

    def integral(pick):
        def fn(e):
            inside = (e > lo) & (e < hi)
            out = np.zeros_like(e)
            if np.any(inside):
                comps = [[p.upper, p.lower] for p in fields(e[inside])[pick]]
                out[inside] = exponential_norm_density(comps, e[inside], regularity)
            return out

        return adaptive_trapezoid(fn, lo, hi, rtol=NORM_RTOL)

    f2 = bump.weighted_integral(regularity, x1 * t)
    h2, v2, G2 = integral(0), integral(1), integral(2)
    return NormSet(*(shift + _log10_sqrt(q) for q in (f2, h2, v2, G2)))


@dataclass(frozen=True)
class InitialNorms:
    norms: NormSet
    bounds: dict  # component -> C_univ, with norm <= C_univ / n
    within_bounds: bool


def universal_constants(state, j: int, cbar_j: float = 1.0) -> dict:
    """Constants C with ||component(0)||_{H^j} <= C / n for every n."""
    bc = bound_constants(state)
    ch = math.sqrt(8.0 * bc.c_star * (j + 1)) / cbar_j
    cv = 4.0 * state.c * bc.c2 * math.sqrt(bc.c_star * (j + 1)) / cbar_j
    cg = math.sqrt(state.g_sq * bc.c3) * cv
    return {"f": 1.0 / cbar_j, "h": ch, "v": cv, "G": cg}


def sequence_initial_norms(state, n: int, j: int, cbar_j: float = 1.0) -> InitialNorms:
    _require_uniform_window(state)
    bump = make_bump(n, j, cbar_j)
    norms = _sequence_norms(state, n, j, 0.0, bump)
    consts = universal_constants(state, j, cbar_j)
    tol = 1.0 + 1e-9
    ok = all(getattr(norms, k) <= tol * consts[k] / n for k in consts)
    return InitialNorms(norms, consts, ok)


@dataclass(frozen=True)
class GrownNorms:
    norms: NormSet
    log10_lower_bounds: dict
    lower_bounds_hold: bool


def sequence_grown_norms(state, n: int, k: int, t: float, j: int | None = None, cbar_j: float = 1.0) -> GrownNorms:
    """Time-t norms in H^k of the sequence normalized for regularity j (default k)."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    _require_uniform_window(state)
    j = k if j is None else j
    bump = make_bump(n, j, cbar_j)
    x1 = quartic_roots(state).x1
    norms = _sequence_norms(state, n, k, t, bump)
    bc = bound_constants(state)
    K2 = state.K**2
    ln10 = math.log(10.0)
    base = bump.weighted_integral(k, x1 * t)
    lg_base = 2.0 * x1 * n * t / ln10 + math.log10(base)
    f0 = _sequence_norms(state, n, k, 0.0, bump).log10_f
    lower = {
        "f": f0 + x1 * n * t / ln10,
        "h": 0.5 * (math.log10(bc.c1) + lg_base),
        "v": 0.5 * (math.log10((K2 + 2.0) * state.c**2 * bc.c1 / 8.0) + lg_base),
        "G": 0.5 * (math.log10(2.0 * state.g_sq * bc.c1 / 8.0) + lg_base) if state.g_sq > 0 else -math.inf,
    }
    slack = 1e-9
    ok = all(getattr(norms, f"log10_{key}") >= val - slack for key, val in lower.items())
    return GrownNorms(norms, lower, ok)


def find_n_star(state, alpha: float, T0: float, j: int, k: int, cbar_j: float = 1.0, n_max: int = 10**9) -> int:
    """Smallest n with exp(2 X1 n T0) / (1 + (n+1)^2)^(j-k+1) >= (alpha cbar_j n)^2."""
    if not alpha > 0 or not T0 > 0:
        raise DomainError(f"alpha and T0 must be positive, got alpha={alpha!r}, T0={T0!r}")
    if j < k:
        raise DomainError(f"need j >= k, got j={j}, k={k}")
    _require_uniform_window(state)
    x1 = quartic_roots(state).x1
    start = 1
    chunk = 4096
    while start <= n_max:
        n = np.arange(start, min(start + chunk, n_max + 1), dtype=float)
        lhs = 2.0 * x1 * n * T0 - (j - k + 1) * np.log1p((n + 1.0) ** 2)
        rhs = 2.0 * np.log(alpha * cbar_j * n)
        hit = np.nonzero(lhs >= rhs)[0]
        if hit.size:
            return int(n[hit[0]])
        start += chunk
        chunk *= 2
    raise DomainError(f"no n <= {n_max} satisfies the growth condition")


@dataclass(frozen=True)
class TableRow:
    n: int
    initial: NormSet
    grown: NormSet

    @property
    def log10_ratio(self) -> float:
        return self.grown.log10_combined - self.initial.log10_combined


def illposedness_table(state, j: int, k: int, T0: float, n_list, cbar_j: float = 1.0) -> list[TableRow]:
    if j < k:
        raise DomainError(f"need j >= k, got j={j}, k={k}")
    _require_uniform_window(state)
    rows = []
    for n in sorted(int(x) for x in n_list):
        bump = make_bump(n, j, cbar_j)
        rows.append(TableRow(n, _sequence_norms(state, n, j, 0.0, bump), _sequence_norms(state, n, k, T0, bump)))
    return rows
