"""Command-line front end.

Subcommands read a JSON run configuration (geometry + lattice + exactly one
command block) and write one deterministic table, CSV or JSON, to a file or
stdout.  Exit codes: 0 success, 2 configuration error, 3 numerical error,
1 internal error.

Environment: POINTSCATTER_THREADS caps the worker threads used to fan out
independent grid-point evaluations (default 1; evaluation order never
affects the output, rows are assembled in grid order).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .amplitudes import bare_amplitudes, conjugation_residuals, unitarity_residuals
from .composition import compose_block
from .dynamics import GaussianPacket, evolve
from .errors import ConfigError, NumericalError, PointScatterError, ValidationError
from .greens import green, green_single
from .model import (
    Geometry,
    Lattice,
    Line,
    delta,
    delta_prime,
    geometry_from_dict,
    lattice_from_list,
    make_interaction,
)
from .oracle import oracle_block_amplitudes, oracle_green
from .spectrum import density_of_states, find_bound_states, find_eigenvalues

COMMAND_BLOCKS = ("green", "spectrum", "bound", "dos", "evolve")


# ---------------------------------------------------------------------------
# Config access helpers.  Every failure names the offending field.
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"--config {path}: cannot read ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--config {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"--config {path}: top level must be an object")
    return data


def _require(block: dict, field: str, ctx: str):
    if field not in block:
        raise ConfigError(f"{ctx}.{field}: missing")
    return block[field]


def _as_float(value, ctx: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{ctx}: expected a number, got {value!r}")
    return float(value)


def _as_grid(value, ctx: str) -> np.ndarray:
    """A grid is either a list of numbers or {start, stop, num}."""
    if isinstance(value, dict):
        start = _as_float(_require(value, "start", ctx), f"{ctx}.start")
        stop = _as_float(_require(value, "stop", ctx), f"{ctx}.stop")
        num = _require(value, "num", ctx)
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError(f"{ctx}.num: expected a positive integer, got {num!r}")
        return np.linspace(start, stop, num)
    if isinstance(value, (list, tuple)) and value:
        return np.array([_as_float(v, f"{ctx}[{i}]") for i, v in enumerate(value)])
    raise ConfigError(f"{ctx}: expected a non-empty list or {{start, stop, num}} object")


def _as_k(value, ctx: str) -> complex:
    """A wavenumber is a real number or a [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{ctx}: a complex wavenumber is a [re, im] pair")
        return complex(_as_float(value[0], f"{ctx}[0]"), _as_float(value[1], f"{ctx}[1]"))
    return complex(_as_float(value, ctx))


def _check_blocks(cfg: dict, wanted: str | None) -> None:
    present = [name for name in COMMAND_BLOCKS if name in cfg]
    if wanted is None:
        if present:
            raise ConfigError(
                f"{present[0]}: command block not allowed here (amplitudes takes --k only)"
            )
        return
    if present != [wanted]:
        missing = f"{wanted}: command block missing"
        extra = ", ".join(name for name in present if name != wanted)
        raise ConfigError(f"{extra}: unexpected command block(s)" if extra else missing)
    if not isinstance(cfg[wanted], dict):
        raise ConfigError(f"{wanted}: expected an object, got {cfg[wanted]!r}")


def _geometry_lattice(cfg: dict) -> tuple[Geometry, Lattice]:
    if "geometry" not in cfg:
        raise ConfigError("geometry: missing")
    geom = geometry_from_dict(cfg["geometry"])
    lat = lattice_from_list(cfg.get("lattice", []))
    return geom, lat


def _max_workers() -> int:
    raw = os.environ.get("POINTSCATTER_THREADS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"POINTSCATTER_THREADS: expected an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"POINTSCATTER_THREADS: expected >= 1, got {n}")
    return n


def _fan_out(func: Callable, items: Sequence) -> list:
    """Apply func over items, optionally on a thread pool, preserving order."""
    workers = min(_max_workers(), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# Output writers.  Floats are printed with %.{precision}g so identical
# configs produce byte-identical files.
# ---------------------------------------------------------------------------


def _output_conf(cfg: dict) -> tuple[str | None, str, int]:
    out = cfg.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError(f"output: expected an object, got {out!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError(f"output.path: expected a string, got {path!r}")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format: expected csv or json, got {fmt!r}")
    precision = out.get("precision", 15)
    if isinstance(precision, bool) or not isinstance(precision, int) or precision < 1:
        raise ConfigError(f"output.precision: expected a positive integer, got {precision!r}")
    return path, fmt, precision


def _fmt(value, precision: int) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.{precision}g}"


def _emit(header: list[str], rows: list[list], cfg: dict) -> None:
    path, fmt, precision = _output_conf(cfg)
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v, precision) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        cells = [
            [v if isinstance(v, (str, int)) else float(_fmt(v, precision)) for v in row]
            for row in rows
        ]
        text = json.dumps({"columns": header, "rows": cells}, separators=(",", ":")) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Subcommand runners.  Each returns (header, rows).
# ---------------------------------------------------------------------------


def _run_amplitudes(cfg: dict, k_arg: float | None) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, None)
    if k_arg is None:
        raise ConfigError("--k: required for the amplitudes subcommand")
    _, lat = _geometry_lattice(cfg)
    if not lat.interactions:
        raise ConfigError("lattice: amplitudes needs at least one interaction")
    header = [
        "k",
        "Re_R_plus",
        "Im_R_plus",
        "Re_R_minus",
        "Im_R_minus",
        "Re_T_plus",
        "Im_T_plus",
        "Re_T_minus",
        "Im_T_minus",
        "site",
        "y",
    ]
    rows = []
    for index, item in enumerate(lat.interactions):
        amp = bare_amplitudes(item.params, k_arg)
        rows.append(
            [
                k_arg,
                amp.r_plus.real,
                amp.r_plus.imag,
                amp.r_minus.real,
                amp.r_minus.imag,
                amp.t_plus.real,
                amp.t_plus.imag,
                amp.t_minus.real,
                amp.t_minus.imag,
                index,
                item.position,
            ]
        )
    return header, rows


def _run_green(cfg: dict) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, "green")
    geom, lat = _geometry_lattice(cfg)
    block = cfg["green"]
    x_f_grid = _as_grid(_require(block, "x_f_grid", "green"), "green.x_f_grid")
    x_i = _as_float(_require(block, "x_i", "green"), "green.x_i")
    k = _as_k(_require(block, "k", "green"), "green.k")
    evals = _fan_out(lambda x_f: green(geom, lat, float(x_f), x_i, k), list(x_f_grid))
    header = ["x_f", "x_i", "k", "Re_G", "Im_G", "branch"]
    rows = []
    for ev in evals:
        k_col = ev.k.k.real if ev.k.k.imag == 0.0 else complex(ev.k.k)
        rows.append([ev.x_f, ev.x_i, k_col, ev.value.real, ev.value.imag, ev.branch.value])
    return header, rows


def _run_spectrum(cfg: dict) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, "spectrum")
    geom, lat = _geometry_lattice(cfg)
    block = cfg["spectrum"]
    k_min = _as_float(_require(block, "k_min", "spectrum"), "spectrum.k_min")
    k_max = _as_float(_require(block, "k_max", "spectrum"), "spectrum.k_max")
    result = find_eigenvalues(geom, lat, k_min, k_max)
    header = ["k", "E", "multiplicity", "residual"]
    rows = [[r.k, r.k * r.k, r.multiplicity, r.residual] for r in result.eigen_k]
    return header, rows


def _run_bound(cfg: dict) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, "bound")
    geom, lat = _geometry_lattice(cfg)
    block = cfg["bound"]
    kappa_max = _as_float(_require(block, "kappa_max", "bound"), "bound.kappa_max")
    result = find_bound_states(geom, lat, kappa_max)
    header = ["Re_k", "Im_k", "E", "residual"]
    rows = [[r.k.real, r.k.imag, r.E, r.residual] for r in result.bound_k]
    return header, rows


def _run_dos(cfg: dict) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, "dos")
    geom, lat = _geometry_lattice(cfg)
    block = cfg["dos"]
    E_grid = _as_grid(_require(block, "E_grid", "dos"), "dos.E_grid")
    window_raw = _require(block, "x_window", "dos")
    if not isinstance(window_raw, (list, tuple)) or len(window_raw) != 2:
        raise ConfigError("dos.x_window: expected an [a, b] pair")
    window = (
        _as_float(window_raw[0], "dos.x_window[0]"),
        _as_float(window_raw[1], "dos.x_window[1]"),
    )
    header = ["E", "rho"]
    if "eta" in block:
        eta = _as_float(block["eta"], "dos.eta")
        rho = density_of_states(geom, lat, E_grid, eta, window)
        rows = [[E, r] for E, r in zip(E_grid, rho)]
    else:
        # Default broadening scales with the energy so high-E rows stay
        # resolvable: eta = 1e-3 max(1, |E|), applied per grid point.
        def one(E: float) -> float:
            return density_of_states(geom, lat, [E], 1e-3 * max(1.0, abs(E)), window)[0]

        rho = _fan_out(lambda E: one(float(E)), list(E_grid))
        rows = [[E, r] for E, r in zip(E_grid, rho)]
    return header, rows


def _run_evolve(cfg: dict) -> tuple[list[str], list[list]]:
    _check_blocks(cfg, "evolve")
    geom, lat = _geometry_lattice(cfg)
    block = cfg["evolve"]
    pk = _require(block, "packet", "evolve")
    if not isinstance(pk, dict):
        raise ConfigError(f"evolve.packet: expected an object, got {pk!r}")
    try:
        packet = GaussianPacket(
            x0=_as_float(_require(pk, "x0", "evolve.packet"), "evolve.packet.x0"),
            k0=_as_float(_require(pk, "k0", "evolve.packet"), "evolve.packet.k0"),
            sigma=_as_float(_require(pk, "sigma", "evolve.packet"), "evolve.packet.sigma"),
        )
    except ValidationError as exc:
        raise ConfigError(f"evolve.packet: {exc}") from exc
    times = _as_grid(_require(block, "times", "evolve"), "evolve.times")
    grid = _as_grid(_require(block, "grid", "evolve"), "evolve.grid")
    result = evolve(geom, lat, packet, times, grid)
    header = ["t", "x", "Re_psi", "Im_psi", "prob"]
    rows = []
    for i, t in enumerate(result.times):
        for j, x in enumerate(result.grid):
            psi = result.values[i, j]
            rows.append([t, x, psi.real, psi.imag, abs(psi) ** 2])
    return header, rows


# ---------------------------------------------------------------------------
# Self test: closed-form regressions plus a unitarity sweep.
# ---------------------------------------------------------------------------


def _selftest() -> int:
    failures = 0

    def check(label: str, worst: float, tol: float) -> None:
        nonlocal failures
        ok = worst <= tol
        failures += 0 if ok else 1
        print(f"{'ok  ' if ok else 'FAIL'} {label}: max deviation {worst:.3e} (tol {tol:g})")

    # Frozen amplitude values for the two named one-parameter families.
    amp = bare_amplitudes(delta(2.0), 1.0)
    worst = max(
        abs(amp.r_plus - (-0.5 - 0.5j)),
        abs(amp.r_minus - (-0.5 - 0.5j)),
        abs(amp.t_plus - (0.5 - 0.5j)),
        abs(amp.t_minus - (0.5 - 0.5j)),
    )
    check("delta amplitudes (gamma=2, k=1)", worst, 1e-15)

    amp = bare_amplitudes(delta_prime(2.0), 1.0)
    worst = max(
        abs(amp.r_plus - (0.5 - 0.5j)),
        abs(amp.r_minus - (0.5 - 0.5j)),
        abs(amp.t_plus - (0.5 + 0.5j)),
        abs(amp.t_minus - (0.5 + 0.5j)),
    )
    check("delta-prime amplitudes (gamma=2, k=1)", worst, 1e-15)

    # Closed-form Green function values for a single delta on the line.
    g = green_single(delta(2.0), 0.0, 1.0, -1.0, 1.0)
    worst = abs(g.value - np.exp(2.0j) / (2.0j - 2.0))
    g = green_single(delta(2.0), 0.0, -1.0, -2.0, 1.0)
    expected = np.exp(1.0j) / 2.0j + (2.0 / (2.0j - 2.0)) * np.exp(3.0j) / 2.0j
    worst = max(worst, abs(g.value - expected))
    check("single-delta Green function closed forms", worst, 1e-14)

    # Unitarity and conjugation residuals over a deterministic sample.
    rng = np.random.default_rng(20260819)
    worst = 0.0
    for _ in range(2000):
        a, d = rng.uniform(-3.0, 3.0, size=2)
        b = rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0])
        c = (a * d - 1.0) / b
        p = make_interaction(a, b, c, d, rng.uniform(0.0, 2.0 * math.pi))
        for k in (0.1, 0.5, 1.0, 3.7, 10.0):
            worst = max(worst, *unitarity_residuals(bare_amplitudes(p, k)))
            worst = max(worst, *conjugation_residuals(p, k))
    check("unitarity/conjugation sweep (2000 interactions x 5 k)", worst, 1e-12)

    # Composed blocks and Green functions against the transfer-matrix route.
    worst = 0.0
    for _ in range(5):
        n = int(rng.integers(1, 4))
        items = []
        ys = np.sort(rng.uniform(-2.0, 2.0, size=n))
        for y in ys:
            a, d = rng.uniform(-2.0, 2.0, size=2)
            b = rng.uniform(0.1, 2.0) * rng.choice([-1.0, 1.0])
            items.append((make_interaction(a, b, (a * d - 1.0) / b, d), float(y)))
        lat = lattice_from_list(
            [
                {"a": p.a, "b": p.b, "c": p.c, "d": p.d, "omega_phase": p.omega_phase, "y": y}
                for p, y in items
            ]
        )
        for k in (0.7, 2.3):
            blk = compose_block(lat, 1, len(lat), k)
            ora = oracle_block_amplitudes(lat, 1, len(lat), k)
            worst = max(
                worst,
                abs(blk.r_plus - ora.r_plus),
                abs(blk.r_minus - ora.r_minus),
                abs(blk.t_plus - ora.t_plus),
                abs(blk.t_minus - ora.t_minus),
            )
            for x_f, x_i in ((-3.1, -2.9), (2.8, -2.7), (0.1, 0.4)):
                gv = green(Line(), lat, x_f, x_i, k).value
                worst = max(worst, abs(gv - oracle_green(Line(), lat, x_f, x_i, k)))
    check("random lattices vs transfer-matrix oracle", worst, 1e-10)

    print("selftest:", "PASS" if failures == 0 else f"FAIL ({failures} group(s))")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# Entry point.
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointscatter",
        description="Exact scattering, Green functions, spectra and dynamics "
        "for 1D generalized point interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "amplitudes": "bare scattering amplitudes of every lattice site at one k",
        "green": "Green function on an x_f grid",
        "spectrum": "positive-energy eigenvalues of a box or ring",
        "bound": "bound states of a line or half line",
        "dos": "local density of states on an energy grid",
        "evolve": "Gaussian wave-packet evolution",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        if name == "amplitudes":
            p.add_argument("--k", type=float, default=None, help="wavenumber to evaluate at")
    sub.add_parser("selftest", help="run built-in closed-form and unitarity checks")
    return parser


_RUNNERS = {
    "green": _run_green,
    "spectrum": _run_spectrum,
    "bound": _run_bound,
    "dos": _run_dos,
    "evolve": _run_evolve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return _selftest()
    try:
        cfg = _load_config(args.config)
        if args.command == "amplitudes":
            header, rows = _run_amplitudes(cfg, args.k)
        else:
            header, rows = _RUNNERS[args.command](cfg)
        _emit(header, rows, cfg)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except PointScatterError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
