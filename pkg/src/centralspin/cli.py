"""Command-line front end.

Every subcommand writes CSV output plus one ``<command>_manifest.json`` into
``--out``.  Option values resolve as flags > ``--config`` JSON > defaults;
the config keys are the long option names with dashes turned into
underscores, and a previous manifest is itself a valid config.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 partial sweep.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import AXIS_NAMES, evolve, initial_state, phase_sweep
from .fullbasis import (
    DisorderSpec,
    FullBasisModel,
    MAX_SATELLITES,
    disorder_order_parameter,
    disorder_series,
    product_state,
    rng_identity,
    sector_embedding,
)
from .krylov import (
    effective_dimension,
    fragmentation_census,
    overlap_map,
    parse_sampler,
)
from .operators import ModelParams, NumericalError, build_floquet, build_sector
from .outputs import (
    load_config,
    parse_angle,
    write_csv,
    write_manifest,
    write_svg_heatmap,
)
from .scars import scar_scatter
from .verification import format_table, run_all

log = logging.getLogger("centralspin")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 1, 2, 3
INTERACTIONS = ("ising", "xx", "heisenberg", "xxz")

COMMON_DEFAULTS = {
    "type": None,
    "n": 21,
    "twice_j": None,
    "a": None,
    "axy": None,
    "az": None,
    "bz": 0.0,
    "bnz": 0.0,
    "omega": 1.0,
    "theta": "0",
    "theta_e": None,
    "theta_n": None,
    "workers": None,
    "out": ".",
}
COMMAND_DEFAULTS = {
    "evolve": {"initial": "J-down", "cycles": 1000, "stride": 1},
    "phase": {"x": None, "y": None, "initial": "J-up", "cycles": 10_000, "svg": False},
    "krylov": {"initial": "J-up", "sampler": "fig2", "threshold": 1e-3},
    "scar": {"n": 10},
    "disorder": {
        "n": 5, "delta": 0.0, "delta_kind": "variance", "seed": 0, "realizations": 10,
        "initial": None, "cycles": 50_000, "series": False, "stride": 1, "realization": 0,
        "aggregate": False,
    },
    "verify": {},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--config", help="JSON file with option values (or a previous manifest)")
    g.add_argument("--type", choices=INTERACTIONS, help="interaction type; fixes which couplings are used")
    g.add_argument("--n", type=int, help="number of satellite spins N")
    g.add_argument("--twice-j", type=int, help="sector 2j (default N, the largest sector)")
    g.add_argument("--a", type=float, help="shared coupling A (both A_xy and A_z where the type uses them)")
    g.add_argument("--axy", type=float, help="flip-flop coupling A_xy")
    g.add_argument("--az", type=float, help="Ising coupling A_z")
    g.add_argument("--bz", type=float, help="central-spin field B_z")
    g.add_argument("--bnz", type=float, help="satellite field B^n_z")
    g.add_argument("--omega", type=float, help="drive frequency omega (T = 2 pi / omega)")
    g.add_argument("--theta", help="pulse error for both species; radians or e.g. 0.1pi")
    g.add_argument("--theta-e", help="pulse error of the central spin (overrides --theta)")
    g.add_argument("--theta-n", help="pulse error of the satellites (overrides --theta)")
    g.add_argument("--workers", type=int, help="worker processes (default: available cores)")
    g.add_argument("--out", help="output directory (default: current directory)")


def _flag(p, *names, **kw):
    p.add_argument(*names, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centralspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"centralspin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", help="staggered magnetization time series")
    _model_options(p)
    _flag(p, "--initial", help="J-up, J-down, -J-up, -J-down or m:<twice_m>,<up|down>")
    _flag(p, "--cycles", type=int, help="number of Floquet cycles")
    _flag(p, "--stride", type=int, help="record every stride-th cycle")

    p = sub.add_parser("phase", help="order parameter over a two-parameter grid")
    _model_options(p)
    axis_help = f"axis as name:start:stop:count, name in {{{','.join(AXIS_NAMES)}}}"
    _flag(p, "--x", help=axis_help)
    _flag(p, "--y", help=axis_help)
    _flag(p, "--initial", help="initial state (default J-up)")
    _flag(p, "--cycles", type=int, help="N_C, cycles in the time average")
    p.add_argument("--svg", action="store_const", const=True, default=None, help="also write an SVG heatmap")

    p = sub.add_parser("krylov", help="overlap map and Floquet-Krylov dimension census")
    _model_options(p)
    _flag(p, "--initial", help="initial state for the overlap map")
    _flag(p, "--sampler", help="fig2, stride:<s>,max:<M> or list:<n1>,<n2>,...")
    _flag(p, "--threshold", type=float, help="occupation threshold for the effective dimension")

    p = sub.add_parser("scar", help="entropy and polarized overlaps of every Floquet eigenstate")
    _model_options(p)

    p = sub.add_parser("disorder", help="order parameter under Gaussian A_xy disorder (full basis)")
    _model_options(p)
    _flag(p, "--delta", type=float, help="disorder strength of A_xy")
    _flag(p, "--delta-kind", choices=("variance", "std"), help="whether --delta is a variance or a std")
    _flag(p, "--seed", type=int, help="base seed (64-bit unsigned)")
    _flag(p, "--realizations", type=int, help="number of disorder realizations")
    _flag(p, "--initial", help="product state <satellites>,<central> e.g. uuuuu,d; or J-up style")
    _flag(p, "--cycles", type=int, help="N_C, cycles in the time average")
    p.add_argument("--series", action="store_const", const=True, default=None,
                   help="write the time series of one realization instead")
    _flag(p, "--stride", type=int, help="series mode: record every stride-th cycle")
    _flag(p, "--realization", type=int, help="series mode: realization index")
    p.add_argument("--aggregate", action="store_const", const=True, default=None,
                   help="also record mean and std over realizations in the manifest")

    sub.add_parser("verify", help="run oracle and cross-engine self-checks")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags for ``args.command``."""
    command = args.command
    options = dict(COMMON_DEFAULTS)
    options.update(COMMAND_DEFAULTS[command])
    known = set(options)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            config = load_config(config_path)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from exc
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(
                f"unknown config keys for '{command}': {', '.join(unknown)}; "
                f"allowed: {', '.join(sorted(known))}"
            )
        options.update(config)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return options


def _angle(options: dict, key: str) -> float:
    try:
        return parse_angle(options[key])
    except ValueError as exc:
        raise UsageError(f"--{key.replace('_', '-')}: {exc}") from exc


def model_params(options: dict, swept: frozenset = frozenset()) -> ModelParams:
    """Couplings from the interaction type and the coupling flags.

    Couplings named in ``swept`` are set per grid cell, so they may be
    missing here.
    """
    kind, a, axy, az = options["type"], options["a"], options["axy"], options["az"]
    if swept & {"a", "a_xy", "a_z"} and all(v is None for v in (a, axy, az)):
        a = 0.0

    def first(*values):
        return next((v for v in values if v is not None), None)

    if kind == "ising":
        if axy not in (None, 0, 0.0):
            raise UsageError("--type ising has A_xy = 0; drop --axy or pick another type")
        a_xy, a_z = 0.0, first(az, a)
    elif kind == "xx":
        if az not in (None, 0, 0.0):
            raise UsageError("--type xx has A_z = 0; drop --az or pick another type")
        a_xy, a_z = first(axy, a), 0.0
    elif kind == "heisenberg":
        if axy is not None and az is not None and axy != az:
            raise UsageError("--type heisenberg needs A_xy == A_z; pass a single --a")
        a_xy = a_z = first(a, axy, az)
    elif kind == "xxz":
        a_xy, a_z = first(axy, a), first(az, a)
    else:
        a_xy, a_z = first(axy, a, 0.0), first(az, a, 0.0)
    if a_xy is None or a_z is None:
        raise UsageError(f"--type {kind} needs its coupling: pass --a, --axy or --az")

    theta = _angle(options, "theta")
    theta_e = theta if options["theta_e"] is None else _angle(options, "theta_e")
    theta_n = theta if options["theta_n"] is None else _angle(options, "theta_n")
    try:
        return ModelParams(
            a_xy=float(a_xy), a_z=float(a_z), b_z=float(options["bz"]), omega=float(options["omega"]),
            theta_e=theta_e, theta_n=theta_n, b_nz=float(options["bnz"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _sector(options: dict):
    try:
        return build_sector(int(options["n"]), options["twice_j"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _state(basis, spec: str) -> np.ndarray:
    try:
        return initial_state(basis, spec)
    except (ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"--initial: {exc}") from exc


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _workers(options: dict) -> int:
    w = options["workers"]
    return os.cpu_count() or 1 if w is None else int(w)


def parse_axis(text: str) -> tuple[str, np.ndarray]:
    """``name:start:stop:count`` with linear spacing; angles accept ``pi``."""
    parts = str(text).split(":")
    if len(parts) != 4:
        raise UsageError(f"bad axis {text!r}; expected name:start:stop:count")
    name = parts[0].strip().lower()
    if name not in AXIS_NAMES:
        raise UsageError(f"invalid axis name {name!r}; choose from {', '.join(AXIS_NAMES)}")
    try:
        start, stop = parse_angle(parts[1]), parse_angle(parts[2])
        count = int(parts[3])
    except ValueError as exc:
        raise UsageError(f"bad axis {text!r}: {exc}") from exc
    if count < 1:
        raise UsageError(f"axis {name}: count must be >= 1")
    if start > stop:
        raise UsageError(f"axis {name}: start must be <= stop")
    return name, np.linspace(start, stop, count)


def _typed_axis(name: str, kind: str | None) -> str:
    # keep the interaction type fixed while sweeping its coupling
    fixed = {"ising": ("a_xy", "a_z"), "xx": ("a_z", "a_xy")}
    if kind in fixed:
        frozen, free = fixed[kind]
        if name == frozen:
            raise UsageError(f"--type {kind} fixes {frozen}; it cannot be swept")
        if name == "a":
            return free
    if kind == "xxz" and name == "a":
        raise UsageError("--type xxz has independent couplings; sweep a_xy or a_z")
    if kind == "heisenberg" and name in ("a_xy", "a_z"):
        raise UsageError("--type heisenberg keeps A_xy == A_z; sweep 'a'")
    return name


def _manifest_params(options: dict) -> dict:
    return {k: v for k, v in options.items() if k != "config"}


def _info(options: dict, params: ModelParams, **extra) -> dict:
    metadata = {"model": params.as_dict(), **extra.pop("metadata", {})}
    return {"parameters": _manifest_params(options), "metadata": metadata, **extra}


def cmd_evolve(options: dict) -> tuple[list, dict]:
    params = model_params(options)
    basis = _sector(options)
    psi0 = _state(basis, options["initial"])
    cycles, stride = int(options["cycles"]), int(options["stride"])
    _require(cycles >= 0, "--cycles must be >= 0")
    _require(stride >= 1, "--stride must be >= 1")
    series = evolve(build_floquet(params, basis), psi0, cycles, stride, basis=basis)
    path = write_csv(
        Path(options["out"]) / "evolve.csv", ["cycle", "magnetization", "staggered"],
        zip(series.cycles.tolist(), series.magnetization.tolist(), series.staggered.tolist()),
    )
    return [path], _info(options, params)


def cmd_phase(options: dict) -> tuple[list, dict]:
    _require(options["x"] is not None and options["y"] is not None, "phase needs --x and --y axes")
    x_name, xs = parse_axis(options["x"])
    y_name, ys = parse_axis(options["y"])
    x_name, y_name = _typed_axis(x_name, options["type"]), _typed_axis(y_name, options["type"])
    _require(x_name != y_name, "--x and --y must sweep different quantities")
    params = model_params(options, frozenset((x_name, y_name)))
    basis = _sector(options)
    _state(basis, options["initial"])
    cycles = int(options["cycles"])
    _require(cycles >= 1, "--cycles must be >= 1")
    grid = phase_sweep(
        params, x_name, xs, y_name, ys, options["initial"], cycles,
        n_satellites=basis.n_satellites, twice_j=basis.twice_j, workers=_workers(options),
    )
    out = Path(options["out"])
    rows = [(float(x), float(y), float(grid.order_parameter[iy, ix]))
            for iy, y in enumerate(ys) for ix, x in enumerate(xs)]
    paths = [write_csv(out / "phase.csv", ["x", "y", "order_parameter"], rows)]
    if options["svg"]:
        paths.append(write_svg_heatmap(
            out / "phase.svg", xs, ys, grid.order_parameter, x_name, y_name,
            title=f"order parameter, N={basis.n_satellites}, N_C={cycles}",
        ))
    warnings = [f"cell x={f['x']!r} y={f['y']!r} failed: {f['error']}" for f in grid.failures]
    return paths, _info(
        options, params, warnings=warnings, partial=bool(grid.failures),
        metadata={"x_axis": x_name, "y_axis": y_name, "row_order": "row-major, y outer"},
    )


def cmd_krylov(options: dict) -> tuple[list, dict]:
    params = model_params(options)
    basis = _sector(options)
    psi0 = _state(basis, options["initial"])
    try:
        cycles = parse_sampler(str(options["sampler"]))
    except ValueError as exc:
        raise UsageError(f"--sampler: {exc}") from exc
    threshold = float(options["threshold"])
    _require(0 < threshold < 1, "--threshold must lie in (0, 1)")
    fmap = overlap_map(params, basis, psi0, cycles)
    occupied, ipr = effective_dimension(fmap, threshold)
    out = Path(options["out"])
    paths = [
        write_csv(out / "krylov_overlaps.csv", ["cycle", *fmap.labels],
                  ([int(n), *map(float, row)] for n, row in zip(fmap.sampled_cycles, fmap.overlaps))),
        write_csv(out / "krylov_spread.csv", ["cycle", "occupied", "ipr"],
                  zip(fmap.sampled_cycles.tolist(), occupied.tolist(), ipr.tolist())),
    ]
    ideal = ModelParams(params.a_xy, params.a_z, params.b_z, params.omega, 0.0, 0.0, params.b_nz)
    census = fragmentation_census(ideal, basis)
    paths.append(write_csv(
        out / "krylov_census.csv",
        ["twice_m", "sigma", "dimension", "expected_dimension", "span_residual"],
        ([c["twice_m"], c["sigma"].letter, c["dimension"], c["expected_dimension"],
          float(c["span_residual"])] for c in census),
    ))
    return paths, _info(
        options, params, metadata={"census": "Floquet-Krylov dimensions at theta = 0 for every basis state"},
    )


def cmd_scar(options: dict) -> tuple[list, dict]:
    params = model_params(options)
    n = int(options["n"])
    _require(n % 2 == 0, f"scar needs an even N to split the satellites into equal halves; got N={n}")
    _require(options["twice_j"] in (None, n), "scar works in the fully symmetric sector; drop --twice-j")
    basis = _sector(options)
    records = scar_scatter(params, basis)
    path = write_csv(
        Path(options["out"]) / "scar.csv",
        ["quasienergy_over_omega", "entropy_nats", "overlap_plus", "overlap_minus", "degenerate_flag"],
        ([r.quasienergy_over_omega, r.entropy, r.overlap_plus, r.overlap_minus, int(r.degenerate)]
         for r in records),
    )
    return [path], _info(
        options, params, metadata={"entropy_units": "nats", "bipartition": "N/2 | N/2 satellites"},
    )


def _disorder_state(spec: str | None, n: int) -> np.ndarray:
    if spec is None:
        return product_state("u" * n, "d")
    text = spec.strip()
    if text.lower().startswith("bits:"):
        text = text[5:]
    if "," in text and not text.lower().startswith("m:"):
        sats, central = text.split(",", 1)
        if set(sats.strip().lower()) <= set("ud"):
            _require(len(sats.strip()) == n, f"--initial needs {n} satellite characters, got {len(sats.strip())}")
            try:
                return product_state(sats, central)
            except ValueError as exc:
                raise UsageError(f"--initial: {exc}") from exc
    basis = build_sector(n)
    return sector_embedding(n) @ _state(basis, text)


def cmd_disorder(options: dict) -> tuple[list, dict]:
    params = model_params(options)
    n = int(options["n"])
    _require(1 <= n <= MAX_SATELLITES, f"disorder runs in the full basis; N must be in 1..{MAX_SATELLITES}")
    delta = float(options["delta"])
    _require(delta >= 0, "--delta must be >= 0")
    kind = options["delta_kind"]
    _require(kind in ("variance", "std"), "--delta-kind must be variance or std")
    std = math.sqrt(delta) if kind == "variance" else delta
    seed = int(options["seed"])
    try:
        spec = DisorderSpec(params.a_xy, std, seed, int(options["realizations"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    base = FullBasisModel.homogeneous(params, n)
    psi0 = _disorder_state(options["initial"], n)
    cycles = int(options["cycles"])
    out = Path(options["out"])
    extra = {"seeds": [seed], "rng": rng_identity(),
             "metadata": {"coupling_std": std, "delta_kind": kind}}
    if options["series"]:
        stride, which = int(options["stride"]), int(options["realization"])
        _require(cycles >= 0 and stride >= 1, "--cycles must be >= 0 and --stride >= 1")
        _require(0 <= which, "--realization must be >= 0")
        series = disorder_series(spec, base, psi0, cycles, stride, which)
        path = write_csv(
            out / "disorder_series.csv", ["cycle", "magnetization", "staggered"],
            zip(series.cycles.tolist(), series.magnetization.tolist(), series.staggered.tolist()),
        )
        extra["metadata"]["realization"] = which
        return [path], _info(options, params, **extra)
    _require(cycles >= 1, "--cycles must be >= 1")
    values = disorder_order_parameter(spec, base, psi0, cycles, _workers(options))
    if options["aggregate"]:
        extra["metadata"].update(aggregation="mean_std", mean=float(np.mean(values)),
                                 std=float(np.std(values)))
    else:
        extra["metadata"]["aggregation"] = "none (single realizations)"
    path = write_csv(
        out / "disorder.csv", ["realization", "seed", "delta_axy", "order_parameter"],
        ((r, seed, delta, float(v)) for r, v in enumerate(values)),
    )
    return [path], _info(options, params, **extra)


COMMANDS = {
    "evolve": cmd_evolve,
    "phase": cmd_phase,
    "krylov": cmd_krylov,
    "scar": cmd_scar,
    "disorder": cmd_disorder,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        try:
            results = run_all()
        except NumericalError as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(format_table(results))
        return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL

    started = time.time()
    try:
        options = resolve(args)
        Path(options["out"]).mkdir(parents=True, exist_ok=True)
        paths, info = COMMANDS[args.command](options)
    except UsageError as exc:
        print(f"centralspin {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"centralspin {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"centralspin {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    partial = info.pop("partial", False)
    manifest = write_manifest(
        Path(options["out"]), command=args.command, outputs=paths,
        started=started, finished=time.time(), name=f"{args.command}_manifest.json", **info,
    )
    for p in [*paths, manifest]:
        print(p)
    for w in info.get("warnings", []):
        log.warning(w)
    return EXIT_PARTIAL if partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
