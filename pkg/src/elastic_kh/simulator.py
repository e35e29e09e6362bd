"""Per-wavenumber simulation of the linearized two-sided system.

Each half-line carries the seven fields (h, w1, w2, E11, E21, E12, E22) on
nodes y_k = k dx, k = 0..N-1, with y = x2 above the front and y = -x2 below
it; the front amplitude g_hat is the last unknown. The normal derivative is a
diagonal-norm summation-by-parts operator (fourth order inside, second order
at the boundary rows). Interface and outer conditions act weakly on the
characteristic variables R = c h + w2 and S = c h - w2, which makes the
semi-discrete energy balance an exact identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, NumericalFailure
from .state import BackgroundState

FIELDS = ("h", "w1", "w2", "E11", "E21", "E12", "E22")
REDUCED_FIELDS = ("h", "w1", "w2", "P1", "P2")
SIDES = ("upper", "lower")
MIN_POINTS = 16
BLOWUP = 1e100
DENSE_LIMIT = 2600

_H_EDGE = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0
_D_EDGE = [
    [-24 / 17, 59 / 34, -4 / 17, -3 / 34],
    [-1 / 2, 0.0, 1 / 2],
    [4 / 43, -59 / 86, 0.0, 59 / 86, -4 / 43],
    [3 / 98, 0.0, -59 / 98, 0.0, 32 / 49, -4 / 49],
]
_D_INNER = np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12])


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"L must be positive, got {self.L!r}")
        if int(self.N) != self.N or self.N < MIN_POINTS:
            raise DomainError(f"N must be an integer >= {MIN_POINTS}, got {self.N!r}")

    @property
    def spacing(self) -> float:
        return self.L / (self.N - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N)


def sbp_first_derivative(N: int, dx: float):
    """Diagonal-norm SBP first derivative: returns (D, H) with H D + (H D)^T = diag(-1, 0, .., 0, 1)."""
    if N < 2 * len(_D_EDGE) + 1:
        raise DomainError(f"N={N} too small for the difference stencil")
    D = sp.lil_matrix((N, N))
    for i in range(4, N - 4):
        D[i, i - 2 : i + 3] = _D_INNER
    for i, row in enumerate(_D_EDGE):
        for j, val in enumerate(row):
            D[i, j] = val
            D[N - 1 - i, N - 1 - j] = -val
    H = np.ones(N)
    H[:4] = _H_EDGE
    H[-4:] = _H_EDGE[::-1]
    return (D.tocsr() / dx), H * dx


def _side_values(state: BackgroundState, side: str):
    """(v1, G11, G12, orientation) on one side; orientation maps d/dy to d/dx2."""
    if side == "upper":
        return state.v1_plus, state.g11_plus, state.g12_plus, 1.0
    return state.v1_minus, state.g11_minus, state.g12_minus, -1.0


@dataclass
class Generator:
    """Semi-discrete generator d u/dt = A u, with u = (upper fields, lower fields, g_hat)."""

    state: BackgroundState
    eta: float
    grid: Grid1D
    matrix: sp.csr_matrix
    reduced: sp.csr_matrix
    weights: np.ndarray  # diagonal of the energy norm for the full vector
    H: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def index(self, side: str, name: str, fields=FIELDS) -> slice:
        N = self.grid.N
        k = SIDES.index(side) * len(fields) + fields.index(name)
        return slice(k * N, (k + 1) * N)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _assemble(state, eta, grid, fields):
    """Sparse generator over the given field layout (full or reduced)."""
    N, dx, c = grid.N, grid.spacing, state.c
    D, H = sbp_first_derivative(N, dx)
    nf = len(fields)
    n = 2 * nf * N + 1
    ig = n - 1
    blocks = {}

    def add(row, col, mat):
        key = (row, col)
        blocks[key] = blocks[key] + mat if key in blocks else mat

    eye = sp.identity(N, format="csr", dtype=complex)
    g_sq = state.g_sq
    for s, side in enumerate(SIDES):
        v, g11, g12, o = _side_values(state, side)
        idx = {name: s * nf + k for k, name in enumerate(fields)}
        adv = -1j * v * eta
        for name in fields:
            add(idx[name], idx[name], adv * eye)
        add(idx["h"], idx["w1"], -1j * eta * eye)
        add(idx["h"], idx["w2"], -o * D)
        add(idx["w1"], idx["h"], -c**2 * 1j * eta * eye)
        add(idx["w2"], idx["h"], -o * c**2 * D)
        if "P1" in idx:
            add(idx["w1"], idx["P1"], 1j * eta * eye)
            add(idx["w2"], idx["P2"], 1j * eta * eye)
            add(idx["P1"], idx["w1"], 1j * eta * g_sq * eye)
            add(idx["P2"], idx["w2"], 1j * eta * g_sq * eye)
        else:
            for j, g in ((1, g11), (2, g12)):
                for i in (1, 2):
                    add(idx[f"w{i}"], idx[f"E{i}{j}"], 1j * eta * g * eye)
                    add(idx[f"E{i}{j}"], idx[f"w{i}"], 1j * eta * g * eye)
    nb = 2 * nf
    A = sp.bmat([[blocks.get((r, q)) for q in range(nb)] for r in range(nb)], format="lil", dtype=complex)
    A.resize((n, n))

    def at(side, name, node):
        return (SIDES.index(side) * nf + fields.index(name)) * N + node

    def sat(target_rows, coeffs, terms, weight):
        for (row, rc) in zip(target_rows, coeffs):
            for col, tc in terms:
                A[row, col] += rc * tc / weight

    v = state.v1_plus
    J = 2j * v * eta  # velocity jump per unit g_hat
    h0, hN = H[0], H[-1]
    # upper interface: R+ - (R- + J g)
    terms_r = [(at("upper", "h", 0), c), (at("upper", "w2", 0), 1.0), (at("lower", "h", 0), -c), (at("lower", "w2", 0), -1.0), (ig, -J)]
    sat([at("upper", "h", 0), at("upper", "w2", 0)], [-0.5, -0.5 * c], terms_r, h0)
    # lower interface: S- - (S+ + J g)
    terms_s = [(at("lower", "h", 0), c), (at("lower", "w2", 0), -1.0), (at("upper", "h", 0), -c), (at("upper", "w2", 0), 1.0), (ig, -J)]
    sat([at("lower", "h", 0), at("lower", "w2", 0)], [-0.5, 0.5 * c], terms_s, h0)
    # outer absorbing rows: incoming S on the upper side, incoming R on the lower side
    last = N - 1
    sat([at("upper", "h", last), at("upper", "w2", last)], [-0.5, 0.5 * c], [(at("upper", "h", last), c), (at("upper", "w2", last), -1.0)], hN)
    sat([at("lower", "h", last), at("lower", "w2", last)], [-0.5, -0.5 * c], [(at("lower", "h", last), c), (at("lower", "w2", last), 1.0)], hN)
    # front: g' = w2* - i v eta g with w2* = (R- + J g - S+) / 2
    for col, val in ((at("lower", "h", 0), c), (at("lower", "w2", 0), 1.0), (at("upper", "h", 0), -c), (at("upper", "w2", 0), 1.0)):
        A[ig, col] += 0.5 * val
    A[ig, ig] += 0.5 * J - 1j * v * eta
    return A.tocsr(), H


def assemble_generator(state: BackgroundState, eta: float, grid: Grid1D) -> Generator:
    if state.c <= 0:
        raise DomainError("sound speed must be positive")
    full, H = _assemble(state, eta, grid, FIELDS)
    reduced, _ = _assemble(state, eta, grid, REDUCED_FIELDS)
    per_field = [state.c**2 * H] + [H] * (len(FIELDS) - 1)
    weights = np.concatenate(per_field * 2 + [np.ones(1)])
    return Generator(state, float(eta), grid, full, reduced, weights, H)


@dataclass
class SimState:
    upper: dict
    lower: dict
    g_hat: complex
    eta: float
    time: float = 0.0

    def to_vector(self) -> np.ndarray:
        parts = [np.asarray(getattr(self, side)[name], dtype=complex) for side in SIDES for name in FIELDS]
        return np.concatenate(parts + [np.array([self.g_hat], dtype=complex)])

    @classmethod
    def from_vector(cls, gen: Generator, u, time: float = 0.0) -> "SimState":
        u = np.asarray(u)
        sides = {side: {name: u[gen.index(side, name)].copy() for name in FIELDS} for side in SIDES}
        return cls(sides["upper"], sides["lower"], complex(u[-1]), gen.eta, time)

    @classmethod
    def zeros(cls, grid: Grid1D, eta: float) -> "SimState":
        z = lambda: {name: np.zeros(grid.N, dtype=complex) for name in FIELDS}
        return cls(z(), z(), 0j, eta)


def sample_mode(mode, grid: Grid1D) -> SimState:
    """Nodal values of an (on- or off-shell) NormalMode for a scalar eta."""
    y = grid.nodes
    profs = mode.profiles()
    upper = {name: np.asarray(profs[name].upper(y), dtype=complex) for name in FIELDS}
    lower = {name: np.asarray(profs[name].lower(-y), dtype=complex) for name in FIELDS}
    return SimState(upper, lower, complex(mode.g_hat), float(mode.eta))


def discrete_energy(gen: Generator, u) -> float:
    u = np.asarray(u)
    return 0.5 * float(np.sum(gen.weights * np.abs(u) ** 2))


def _edge_values(gen, u):
    N = gen.grid.N
    out = {}
    for side in SIDES:
        h = u[gen.index(side, "h")]
        w = u[gen.index(side, "w2")]
        out[side] = (h[0], w[0], h[N - 1], w[N - 1])
    return out


def discrete_flux(gen: Generator, u) -> float:
    """Boundary terms of d/dt of the discrete energy; equals Re(u^H W A u)."""
    u = np.asarray(u)
    c = gen.state.c
    J = 2j * gen.state.v1_plus * gen.eta * u[-1]
    e = _edge_values(gen, u)
    hu0, wu0, huN, wuN = e["upper"]
    hl0, wl0, hlN, wlN = e["lower"]
    R_up, R_lo = c * hu0 + wu0, c * hl0 + wl0
    S_up, S_lo = c * hu0 - wu0, c * hl0 - wl0
    g_r, g_s = R_lo + J, S_up + J
    w_star = 0.5 * (R_lo + J - S_up)
    flux = c**2 * np.real(np.conj(hu0) * wu0) - 0.5 * c * np.real(np.conj(R_up) * (R_up - g_r))
    flux += -(c**2) * np.real(np.conj(huN) * wuN) - 0.5 * c * abs(c * huN - wuN) ** 2
    flux += -(c**2) * np.real(np.conj(hl0) * wl0) - 0.5 * c * np.real(np.conj(S_lo) * (S_lo - g_s))
    flux += c**2 * np.real(np.conj(hlN) * wlN) - 0.5 * c * abs(c * hlN + wlN) ** 2
    flux += np.real(np.conj(u[-1]) * w_star)
    return float(flux)


def physical_flux(gen: Generator, u) -> float:
    """Per-wavenumber image of the front terms 2 c^2 h v1 d1 f + v2 f, with interface h averaged."""
    u = np.asarray(u)
    c, v, eta = gen.state.c, gen.state.v1_plus, gen.eta
    e = _edge_values(gen, u)
    h_mid = 0.5 * (e["upper"][0] + e["lower"][0])
    g = u[-1]
    return float(np.real(2j * c**2 * v * eta * np.conj(h_mid) * g + np.conj(g) * e["upper"][1]))


def interface_defect(gen: Generator, u) -> float:
    """max(|h+(0) - h-(0)|, |w2+(0) - w2-(0) - 2 i v1 eta g|), relative to the state size."""
    u = np.asarray(u)
    e = _edge_values(gen, u)
    J = 2j * gen.state.v1_plus * gen.eta * u[-1]
    d = max(abs(e["upper"][0] - e["lower"][0]), abs(e["upper"][1] - e["lower"][1] - J))
    scale = float(np.max(np.abs(u))) if u.size else 0.0
    return d / scale if scale > 0 else 0.0


def max_stable_dt(gen: Generator, cfl: float = 0.4) -> float:
    K, M = gen.state.K, gen.state.M
    return cfl * gen.grid.spacing / (gen.state.c * (1.0 + M + K))


@dataclass
class Trajectory:
    times: np.ndarray
    energy: np.ndarray
    flux: np.ndarray
    physical_flux: np.ndarray
    states: np.ndarray  # saved state vectors, one row per saved time
    saved_times: np.ndarray
    dt: float
    reflection: float
    interface_defect: float
    warnings: list = field(default_factory=list)

    @property
    def log_norm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 0.5 * np.log(2.0 * self.energy)


def _support_radius(gen, u, tol):
    y = gen.grid.nodes
    peak = float(np.max(np.abs(u))) if u.size else 0.0
    if peak == 0:
        return 0.0
    radius = 0.0
    for side in SIDES:
        block = np.stack([np.abs(u[gen.index(side, name)]) for name in FIELDS])
        hits = np.nonzero(block.max(axis=0) > tol * peak)[0]
        if hits.size:
            radius = max(radius, y[hits[-1]])
    return radius


def reflection_time(gen: Generator, u, tol: float = 1e-8) -> float:
    """Time before waves launched at the edge of the data reach the outer boundary."""
    return (gen.grid.L - _support_radius(gen, np.asarray(u), tol)) / gen.state.c


def evolve(gen: Generator, initial: SimState, dt: float, T: float, cfl: float = 0.4, save_every: int = 1) -> Trajectory:
    """Classical fourth-order Runge-Kutta integration of the semi-discrete system."""
    limit = max_stable_dt(gen, cfl)
    if not dt > 0 or dt > limit * (1.0 + 1e-12):
        raise DomainError(f"dt={dt!r} violates the CFL limit {limit!r} (cfl={cfl})")
    if T < 0:
        raise DomainError(f"T must be nonnegative, got {T!r}")
    A = gen.matrix
    u = initial.to_vector()
    if u.size != gen.size:
        raise DomainError("initial state does not match the generator grid")
    steps = int(math.ceil(T / dt - 1e-12))
    warnings = []
    t_ref = reflection_time(gen, u)
    if T > t_ref:
        warnings.append(f"T={T:g} exceeds the reflection time {t_ref:.6g}; outer-boundary effects may enter")
    outer = np.array([gen.index(side, name).stop - 1 for side in SIDES for name in FIELDS])
    times = initial.time + dt * np.arange(steps + 1)
    energy = np.empty(steps + 1)
    flux = np.empty(steps + 1)
    pflux = np.empty(steps + 1)
    saved, saved_t = [], []
    peak = edge = defect = 0.0
    for n in range(steps + 1):
        energy[n] = discrete_energy(gen, u)
        flux[n] = discrete_flux(gen, u)
        pflux[n] = physical_flux(gen, u)
        size = float(np.max(np.abs(u)))
        peak = max(peak, size)
        edge = max(edge, float(np.max(np.abs(u[outer]))))
        defect = max(defect, interface_defect(gen, u))
        if n % save_every == 0 or n == steps:
            saved.append(u.copy())
            saved_t.append(times[n])
        if not np.isfinite(size) or size > BLOWUP:
            raise NumericalFailure(f"solution exceeded {BLOWUP:g} at t={times[n]:.6g} (step {n})")
        if n == steps:
            break
        k1 = A @ u
        k2 = A @ (u + 0.5 * dt * k1)
        k3 = A @ (u + 0.5 * dt * k2)
        k4 = A @ (u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Trajectory(
        times, energy, flux, pflux, np.array(saved), np.array(saved_t), dt,
        edge / peak if peak > 0 else 0.0, defect, warnings,
    )


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    intercept: float
    confident: bool
    efolds: float


def measure_growth(series, times=None, discard: float = 0.2) -> GrowthFit:
    """Least-squares slope of log ||u|| against t after dropping the first samples.

    series is a Trajectory or an array of norms (then times are required).
    """
    if isinstance(series, Trajectory):
        times, logn = series.times, series.log_norm
    else:
        logn = np.log(np.asarray(series, dtype=float))
        times = np.asarray(times, dtype=float)
    start = int(math.floor(discard * len(times)))
    t, y = times[start:], logn[start:]
    ok = np.isfinite(y)
    t, y = t[ok], y[ok]
    if t.size < 2:
        return GrowthFit(0.0, float("nan"), False, 0.0)
    rate, intercept = np.polyfit(t, y, 1)
    efolds = float(rate * (t[-1] - t[0]))
    return GrowthFit(float(rate), float(intercept), bool(rate > 0 and efolds >= 2.0), efolds)


@dataclass(frozen=True)
class Eigenpair:
    value: complex
    vector: np.ndarray  # reduced-layout eigenvector
    method: str


def _gershgorin(A) -> float:
    return float(np.max(np.asarray(abs(A).sum(axis=1)).ravel()))


def _semigroup_operator(A, t_total):
    """LinearOperator applying RK4 steps that approximate exp(t_total A)."""
    h_max = 2.5 / _gershgorin(A)
    steps = max(1, int(math.ceil(t_total / h_max)))
    h = t_total / steps

    def apply(x):
        x = np.asarray(x, dtype=complex).ravel()
        for _ in range(steps):
            k1 = A @ x
            k2 = A @ (x + 0.5 * h * k1)
            k3 = A @ (x + 0.5 * h * k2)
            k4 = A @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return x

    return spla.LinearOperator(A.shape, matvec=apply, dtype=complex)


def leading_eigenpair(gen: Generator, method: str = "auto", horizon: float | None = None) -> Eigenpair:
    """Eigenvalue of the reduced generator with the largest real part.

    method "dense" runs a full eigendecomposition; "semigroup" runs Arnoldi
    on an RK4 approximation of exp(t A), whose dominant eigenvectors are those
    of A with the largest real part, then takes the Rayleigh quotient on A.
    """
    A = gen.reduced
    if method == "auto":
        method = "dense" if A.shape[0] <= DENSE_LIMIT else "semigroup"
    try:
        if method == "dense":
            vals, vecs = sla.eig(A.toarray())
            k = int(np.argmax(vals.real))
            return Eigenpair(complex(vals[k]), vecs[:, k], "dense")
        if method != "semigroup":
            raise ValueError(f"unknown method {method!r}")
        scale = gen.state.c * max(abs(gen.eta), 0.25)
        t = horizon if horizon is not None else 4.0 / scale
        op = _semigroup_operator(A, t)
        rng = np.random.default_rng(0)
        v0 = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
        mus, vecs = spla.eigs(op, k=1, ncv=24, which="LM", v0=v0, tol=1e-10, maxiter=500)
    except (spla.ArpackNoConvergence, sla.LinAlgError) as exc:
        raise NumericalFailure(f"eigen-solver failed: {exc}") from exc
    best = None
    for k in range(len(mus)):
        x = vecs[:, k]
        lam = complex(np.vdot(x, A @ x) / np.vdot(x, x))
        if best is None or lam.real > best.value.real:
            best = Eigenpair(lam, x, "semigroup")
    return best


def spectral_abscissa(gen: Generator, method: str = "auto") -> float:
    """Largest real part over the spectrum of the full generator.

    The combinations Q_i = -G12 E_i1 + G11 E_i2 evolve by pure advection, so
    they contribute eigenvalues -+ i v1 eta with zero real part; the rest of
    the spectrum is that of the reduced generator.
    """
    lam = leading_eigenpair(gen, method).value.real
    return max(lam, 0.0)


def expand_reduced(gen: Generator, x) -> np.ndarray:
    """Map a reduced-layout vector (h, w1, w2, P1, P2) to the full layout.

    Deformation entries are recovered as E_ij = G_j P_i / |G|^2 (Q_i = 0).
    """
    x = np.asarray(x)
    N = gen.grid.N
    out = np.zeros(gen.size, dtype=complex)
    g_sq = gen.state.g_sq
    for side in SIDES:
        _, g11, g12, _ = _side_values(gen.state, side)
        for name in ("h", "w1", "w2"):
            out[gen.index(side, name)] = x[gen.index(side, name, REDUCED_FIELDS)]
        if g_sq > 0:
            for i in (1, 2):
                P = x[gen.index(side, f"P{i}", REDUCED_FIELDS)]
                out[gen.index(side, f"E{i}1")] = g11 * P / g_sq
                out[gen.index(side, f"E{i}2")] = g12 * P / g_sq
    out[-1] = x[-1]
    return out


@dataclass(frozen=True)
class EnergyMonitor:
    times: np.ndarray
    dEdt: np.ndarray
    flux: np.ndarray
    residual: np.ndarray


def energy_monitor(traj: Trajectory) -> EnergyMonitor:
    """|dE/dt - flux| with dE/dt from fourth-order centered differences in time."""
    E = traj.energy
    if E.size < 5:
        z = np.zeros(0)
        return EnergyMonitor(z, z, z, z)
    dt = traj.dt
    dE = (E[:-4] - 8.0 * E[1:-3] + 8.0 * E[3:-1] - E[4:]) / (12.0 * dt)
    flux = traj.flux[2:-2]
    return EnergyMonitor(traj.times[2:-2], dE, flux, np.abs(dE - flux))
