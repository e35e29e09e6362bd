"""Command-line front end: analyze, mode, simulate, hadamard.

Each subcommand reads an optional JSON config (--config) and applies flag
overrides on top. Exit codes: 0 success, 1 empty or no result, 2 usage or
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import jsonschema
import numpy as np

from . import dispersion, hadamard, modes, simulator
from .errors import DomainError, NumericalFailure, SingularDenominatorError
from .state import BackgroundState, Classification, stability_window

EXIT_OK, EXIT_EMPTY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "ELASTIC_KH_THREADS"


class UsageError(Exception):
    pass


class NoResult(Exception):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("elastic_kh").joinpath("schemas", f"{name}.json").read_text()
    schema = json.loads(text)
    if name != "background":
        schema.setdefault("$defs", {})["background"] = load_schema("background")
    return schema


def validate(instance, name: str):
    try:
        jsonschema.validate(instance, load_schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"{name}: {path}: {exc.message}") from None


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items):
    """Parallel map that returns results in input order."""
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt(x) -> str:
    """17 significant digits; empty for None/NaN; mantissa/exponent text beyond float range."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.17g}"


def fmt_log10(lg: float) -> str:
    """Format 10**lg, switching to a mantissa/exponent string when it exceeds 1e300."""
    if lg == -math.inf:
        return fmt(0.0)
    if lg < hadamard.OVERFLOW_LOG10:
        return fmt(10.0**lg)
    e = math.floor(lg)
    return f"{10.0 ** (lg - e):.15f}e+{e}"


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    _emit(path, buf.getvalue())


def write_json(path, obj):
    _emit(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def write_plot_data(path, xlabel, ylabel, xs, ys):
    if not path:
        return
    lines = [f"# {xlabel} {ylabel}"]
    lines += [f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys)]
    _emit(path, "\n".join(lines) + "\n")


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _samples(spec, default):
    if spec is None:
        spec = default
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["num"])
    return np.asarray(spec, dtype=float)


def _background(cfg) -> BackgroundState:
    if "background" not in cfg:
        raise UsageError("missing 'background' section")
    try:
        return BackgroundState.from_dict(cfg["background"])
    except DomainError as exc:
        raise UsageError(f"invalid background: {exc}") from None


def load_config(args, schema: str) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    for key, val in vars(args).items():
        if key in ("config", "command", "func") or val is None:
            continue
        if key in ("rho_dot", "v1_plus", "g11_plus", "g12_plus", "c_state", "eps0_state"):
            bg = cfg.setdefault("background", {"rho_dot": 1.0, "v1_plus": 0.0, "g11_plus": 0.0, "g12_plus": 0.0, "c": 1.0})
            bg[key.replace("_state", "")] = val
            continue
        cfg[key] = val
    validate(cfg, schema)
    return cfg


# analyze


ANALYZE_HEADER = ["K", "M", "c", "x1_sq", "x2_sq", "X1", "u_low", "u_upp", "classification", "C1", "C_star", "C2", "C3"]


def analyze_row(state: BackgroundState) -> list:
    K, M = state.K, state.M
    roots = dispersion.quartic_roots(state)
    win = stability_window(state)
    inside = win.classification in (Classification.IN_UNIFORM, Classification.MARGINAL)
    row = [K, M, state.c, roots.x1_sq, roots.x2_sq, roots.x1 if inside and roots.x1_sq > 0 else None]
    row += [win.u_low, win.u_upp, win.classification.value]
    if win.classification == Classification.IN_UNIFORM:
        bc = dispersion.bound_constants(state)
        row += [bc.c1, bc.c_star, bc.c2, bc.c3]
    else:
        row += [None] * 4
    return row


def cmd_analyze(cfg: dict) -> int:
    if "background" in cfg:
        states = [_background(cfg)]
    else:
        c = cfg.get("c", 1.0)
        eps0 = cfg.get("eps0", 0.05)
        Ks = _samples(cfg.get("K"), [0.0])
        Ms = _samples(cfg.get("M"), [])
        pairs = [(K, M) for K in Ks for M in Ms]
        if cfg.get("endpoints"):
            pairs = sorted(set(pairs + [(K, M) for K in Ks for M in (K, math.sqrt(K * K + 2.0))]))
        states = [BackgroundState.from_km(K, M, c, eps0) for K, M in pairs]
    if not states:
        raise NoResult("empty sweep: no (K, M) pairs")
    rows = ordered_map(analyze_row, states)
    if cfg.get("format") == "json":
        write_json(cfg.get("output"), [dict(zip(ANALYZE_HEADER, r)) for r in rows])
    else:
        write_csv(cfg.get("output"), ANALYZE_HEADER, rows)
    write_plot_data(cfg.get("plot_data"), "M", "X1", [r[1] for r in rows], [r[5] if r[5] is not None else 0.0 for r in rows])
    return EXIT_OK


# mode


def mode_metadata(state, mode, sample_depths) -> dict:
    pair = dispersion.decay_rates(state, mode.tau, mode.eta)
    interior = modes.interior_residual(state, mode, sample_depths)
    boundary = modes.boundary_residuals(state, mode)
    sym = complex(modes.front_symbol_residual(state, mode.eta, mode.tau, mode.g_hat))
    scale = abs(complex(mode.tau)) ** 2 + (state.v1_plus**2 + state.g_sq + state.c**2) * float(mode.eta) ** 2
    meta = {
        "background": state.to_dict(),
        "eta": float(mode.eta),
        "tau": _cplx(mode.tau),
        "g_hat": _cplx(mode.g_hat),
        "on_shell": bool(mode.on_shell),
        "mu_plus": _cplx(pair[0]),
        "mu_minus": _cplx(pair[1]),
        "interior_residual": interior,
        "boundary_residuals": boundary,
        "residual": max([interior] + (list(boundary.values()) if mode.on_shell else [])),
        "front_symbol_residual": abs(sym) / (scale * max(abs(complex(mode.g_hat)), 1e-300)),
        "profiles": {
            name: {
                side: {"coefficient": _cplx(getattr(p, side).coefficient), "decay": _cplx(getattr(p, side).decay)}
                for side in ("upper", "lower")
            }
            for name, p in mode.profiles().items()
        },
    }
    validate(meta, "mode_metadata")
    return meta


def cmd_mode(cfg: dict) -> int:
    state = _background(cfg)
    eta = float(cfg.get("eta", 1.0))
    tau = cfg.get("tau")
    if isinstance(tau, list):
        tau = complex(*tau)
    g_hat = complex(*cfg.get("g_hat", [1.0, 0.0]))
    try:
        mode = modes.build_mode(state, eta, tau, g_hat)
    except DomainError as exc:
        if "no unstable root" in str(exc):
            raise NoResult(str(exc)) from None
        raise UsageError(str(exc)) from None
    x1 = _samples(cfg.get("x1"), [0.0])
    x2 = _samples(cfg.get("x2"), {"start": -5.0, "stop": 5.0, "num": 11})
    t = float(cfg.get("t", 0.0))
    growth = np.exp(complex(mode.tau) * t)
    rows = []
    phase = np.exp(1j * eta * x1) * growth
    for a, ph in zip(x1, phase):
        rows.append([a, 0.0, "f", float(np.real(complex(mode.g_hat) * ph))])
        for name, pair in mode.profiles().items():
            vals = np.real(pair.at(x2) * ph)
            rows += [[a, b, name, v] for b, v in zip(x2, vals)]
    meta = mode_metadata(state, mode, np.abs(x2))
    if cfg.get("format") == "json":
        write_json(cfg.get("output"), [dict(zip(["x1", "x2", "field", "value"], r)) for r in rows])
    else:
        write_csv(cfg.get("output"), ["x1", "x2", "field", "value"], rows)
    if cfg.get("metadata"):
        write_json(cfg["metadata"], meta)
    else:
        sys.stderr.write(json.dumps({"residual": meta["residual"], "on_shell": meta["on_shell"]}) + "\n")
    w2 = mode.w2_hat
    write_plot_data(cfg.get("plot_data"), "x2", "Re_w2", x2, np.real(w2.at(x2) * growth))
    return EXIT_OK


# simulate


def _pulse(grid, eta):
    y = grid.nodes
    st = simulator.SimState.zeros(grid, eta)
    center = min(4.5, 0.25 * grid.L)
    st.upper["h"][:] = np.exp(-((y - center) ** 2))
    st.lower["w2"][:] = 0.5 * np.exp(-((y - center) ** 2))
    return st


def cmd_simulate(cfg: dict) -> int:
    state = _background(cfg)
    eta = float(cfg.get("eta", 1.0))
    N = int(cfg.get("N", 512))
    L = float(cfg.get("L", 40.0 / max(1.0, 0.2 * abs(eta))))
    T = float(cfg.get("T", 8.0))
    cfl = float(cfg.get("cfl", 0.4))
    try:
        grid = simulator.Grid1D(L, N)
        gen = simulator.assemble_generator(state, eta, grid)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    limit = simulator.max_stable_dt(gen, cfl)
    dt = float(cfg.get("dt", limit))
    if dt > limit * (1.0 + 1e-12):
        raise UsageError(f"dt={dt!r} violates the CFL limit {limit!r} (cfl={cfl})")
    roots = dispersion.quartic_roots(state)
    in_window = roots.x1_sq > 0 and eta != 0
    initial = cfg.get("initial", "mode" if in_window else "pulse")
    if initial == "mode":
        if not in_window:
            raise NoResult("no unstable root: cannot seed with the on-shell mode")
        init = simulator.sample_mode(modes.build_mode(state, eta), grid)
    else:
        init = _pulse(grid, eta)
    traj = simulator.evolve(gen, init, dt, T, cfl)
    fit = simulator.measure_growth(traj)
    pair = simulator.leading_eigenpair(gen, cfg.get("eig_method", "auto"))
    abscissa = max(pair.value.real, 0.0)
    predicted = roots.x1 * abs(eta) if in_window else 0.0
    mon = simulator.energy_monitor(traj)
    residual = np.full(traj.times.size, np.nan)
    residual[2:-2] = mon.residual
    rows = [[t, ln, e, r] for t, ln, e, r in zip(traj.times, traj.log_norm, traj.energy, residual)]
    write_csv(cfg.get("output"), ["t", "log_norm", "energy", "residual"], rows)
    warning = "; ".join(traj.warnings) or None
    summary = {
        "fitted_rate": fit.rate,
        "fit_confident": fit.confident,
        "abscissa": abscissa,
        "eigenvalue": _cplx(pair.value),
        "eig_method": pair.method,
        "predicted_rate": predicted,
        "relative_error": abs(fit.rate - predicted) / predicted if predicted > 0 else None,
        "abscissa_relative_error": abs(abscissa - predicted) / predicted if predicted > 0 else None,
        "max_energy_residual": float(mon.residual.max()) if mon.residual.size else 0.0,
        "reflection": traj.reflection,
        "interface_defect": traj.interface_defect,
        "warning": warning,
        "eta": eta,
        "N": N,
        "L": L,
        "dt": dt,
        "T": T,
    }
    validate(summary, "simulate_summary")
    if cfg.get("summary"):
        write_json(cfg["summary"], summary)
    else:
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    write_plot_data(cfg.get("plot_data"), "t", "log_norm", traj.times, traj.log_norm)
    return EXIT_OK


# hadamard

HADAMARD_HEADER = ["n", "norm_f0", "norm_h0", "norm_v0", "norm_G0", "norm_f_T", "norm_h_T", "norm_v_T", "norm_G_T", "log10_ratio"]


def cmd_hadamard(cfg: dict) -> int:
    state = _background(cfg)
    j = int(cfg.get("j", 3))
    k = int(cfg.get("k", j))
    if j < k:
        raise UsageError(f"need j >= k, got j={j}, k={k}")
    T0 = float(cfg.get("T0", 1.0))
    n_list = sorted(set(cfg.get("n_list", [5, 10, 20, 40])))
    cbar = float(cfg.get("cbar_j", 1.0))
    try:
        dispersion.bound_constants(state)
    except DomainError as exc:
        raise NoResult(f"state outside the uniform window: {exc}") from None
    if not n_list:
        raise NoResult("empty n_list")

    def one(n):
        return hadamard.illposedness_table(state, j, k, T0, [n], cbar)[0]

    rows = ordered_map(one, n_list)
    out = []
    for r in rows:
        a, b = r.initial, r.grown
        out.append(
            [r.n] + [fmt_log10(x) for x in (a.log10_f, a.log10_h, a.log10_v, a.log10_G, b.log10_f, b.log10_h, b.log10_v, b.log10_G)] + [r.log10_ratio]
        )
    write_csv(cfg.get("output"), HADAMARD_HEADER, out)
    alpha = cfg.get("alpha")
    summary = {
        "j": j,
        "k": k,
        "T0": T0,
        "X1": dispersion.quartic_roots(state).x1,
        "alpha": alpha,
        "n_star": hadamard.find_n_star(state, alpha, T0, j, k, cbar) if alpha else None,
        "universal_constants": hadamard.universal_constants(state, j, cbar),
        "rows": len(rows),
    }
    validate(summary, "hadamard_summary")
    if cfg.get("summary"):
        write_json(cfg["summary"], summary)
    write_plot_data(cfg.get("plot_data"), "n", "log10_ratio", [r.n for r in rows], [r.log10_ratio for r in rows])
    return EXIT_OK


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--plot-data", dest="plot_data", help="write two-column x y data to this path")


def _add_background_flags(p):
    g = p.add_argument_group("background state (overrides the config's background entries)")
    g.add_argument("--rho-dot", dest="rho_dot", type=float)
    g.add_argument("--v1-plus", dest="v1_plus", type=float)
    g.add_argument("--g11-plus", dest="g11_plus", type=float)
    g.add_argument("--g12-plus", dest="g12_plus", type=float)
    g.add_argument("--sound-speed", dest="c_state", type=float)
    g.add_argument("--margin", dest="eps0_state", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elastic-kh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="roots, window classification and bound constants over a K x M sweep")
    _add_common(p)
    _add_background_flags(p)
    p.add_argument("--K", type=float, nargs="*")
    p.add_argument("--M", type=float, nargs="*")
    p.add_argument("--c", type=float)
    p.add_argument("--eps0", type=float)
    p.add_argument("--endpoints", action="store_const", const=True, help="add the rows M = K and M = sqrt(K^2 + 2)")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_analyze, schema="analyze_config")

    p = sub.add_parser("mode", help="sample an explicit normal mode")
    _add_common(p)
    _add_background_flags(p)
    p.add_argument("--eta", type=float)
    p.add_argument("--tau", type=float, nargs="+", help="real tau or 're im'; default: the unstable root")
    p.add_argument("--t", type=float)
    p.add_argument("--metadata", help="path for the JSON metadata")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_mode, schema="mode_config")

    p = sub.add_parser("simulate", help="time-march and eigen-solve the discretized system")
    _add_common(p)
    _add_background_flags(p)
    p.add_argument("--eta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--initial", choices=["mode", "pulse"])
    p.add_argument("--eig-method", dest="eig_method", choices=["auto", "dense", "semigroup"])
    p.add_argument("--summary", help="path for the JSON summary")
    p.set_defaults(func=cmd_simulate, schema="simulate_config")

    p = sub.add_parser("hadamard", help="norm table of the ill-posedness sequence")
    _add_common(p)
    _add_background_flags(p)
    p.add_argument("--j", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--T0", type=float)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="*")
    p.add_argument("--cbar-j", dest="cbar_j", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--summary", help="path for the JSON summary")
    p.set_defaults(func=cmd_hadamard, schema="hadamard_config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    func, schema = args.func, args.schema
    del args.schema
    if args.command == "mode" and args.tau is not None:
        if len(args.tau) > 2:
            sys.stderr.write("error: --tau takes one or two numbers\n")
            return EXIT_USAGE
        args.tau = args.tau[0] if len(args.tau) == 1 else list(args.tau)
    try:
        cfg = load_config(args, schema)
        return func(cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except NoResult as exc:
        sys.stderr.write(f"no result: {exc}\n")
        return EXIT_EMPTY
    except (NumericalFailure, SingularDenominatorError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
