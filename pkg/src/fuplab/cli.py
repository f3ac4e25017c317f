"""Command line runner: ``fuplab <command> [options]``.

Options come from three places, highest priority first: explicit flags, the
``params`` map of a ``--config`` JSON file, built-in defaults.  Payloads are
deterministic for a fixed configuration and seed; every file written with
``--output`` gets a ``<output>.manifest.json`` next to it.

Exit codes: 0 success, 2 invalid input, 3 numerical or construction failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import __version__
from .errors import FuplabError, InvalidInputError, NumericalError, ResourceError
from .interval_sets import IntervalSet, cantor_set, porosity_check, random_porous

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

CONFIG_KEYS = {"command", "params", "seed", "output_path", "format"}

DEFAULTS = {
    "porosity": {"nu": None, "alpha0": None, "alpha1": 1.0, "set": None, "cantor": None, "random": False},
    "embed": {"nu": None, "alpha0": None, "set": None, "random": False, "extra_levels": 4, "regularity": 0},
    "fup": {
        "kernel": "fourier",
        "w": 1.0,
        "dmin": 0.0,
        "rho": 0.9,
        "h_min_exp": 14,
        "h_max_exp": 6,
        "oversample": 8,
        "mode": "raw",
        "cantor": 12,
        "plus": None,
        "minus": None,
        "nu": 0.3,
        "dim_cap": 2**17,
        "tol": 1e-10,
        "norm_method": "lanczos",
        "full_window": False,
    },
    "words count": {"n0": None, "alpha": None, "h": None, "rho": None, "beta": None, "verify_exhaustive": False},
    "words classify": {"word": None, "alpha": None},
    "flow avg": {"T": 100.0, "n": 20, "steps_per_unit": 50, "mc_samples": 100_000, "radius": 1.0, "group": None},
    "flow hit": {"radius": 0.5, "n": 100, "s_max": 400.0, "direction": "stable", "group": None},
    "flow witness": {
        "tau_grid": "1,0.5,0.25",
        "n": 50,
        "T": 600.0,
        "radius": 0.3,
        "nu1": 0.005,
        "slice_samples": 3,
        "group": None,
    },
}

# commands that draw random numbers and therefore insist on --seed
RANDOMIZED = {"flow avg", "flow hit", "flow witness"}


class Payload:
    """A JSON document plus an optional CSV table of per-sample rows."""

    def __init__(self, data: dict, header: Optional[list] = None, rows: Optional[list] = None):
        self.data = data
        self.header = header
        self.rows = rows or []

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.data, indent=2) + "\n"
        if self.header is None:
            raise InvalidInputError("this command has no CSV form; use --json")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


# --- argument parsing -----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="emit JSON (default)")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", help="emit CSV rows")
    p.add_argument("--output", help="write the payload here and a manifest next to it")
    p.add_argument("--seed", type=int, help="seed for every random draw")
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel sweeps")
    p.add_argument("--config", help="JSON config; its params fill options not given as flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fuplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("porosity", help="certify porosity of an interval set")
    _common(p)
    _set_source(p)
    p.add_argument("--nu", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha1", type=float)

    p = sub.add_parser("embed", help="embed a porous set in a regular Cantor set")
    _common(p)
    _set_source(p, cantor=False)
    p.add_argument("--nu", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--extra-levels", type=int)
    p.add_argument("--regularity", type=int, help="number of sampled intervals for the regularity check")

    p = sub.add_parser("fup", help="masked operator norms over an h sweep")
    _common(p)
    p.add_argument("--kernel", choices=["fourier", "hyperbolic"])
    p.add_argument("--w", type=float)
    p.add_argument("--dmin", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--h-min-exp", type=int, help="smallest h is 2^-h_min_exp")
    p.add_argument("--h-max-exp", type=int, help="largest h is 2^-h_max_exp")
    p.add_argument("--oversample", type=int)
    p.add_argument("--mode", choices=["raw", "embedded"])
    p.add_argument("--cantor", type=int, help="triadic Cantor level used for both masks")
    p.add_argument("--plus", help="JSON interval set for Omega_+ (columns)")
    p.add_argument("--minus", help="JSON interval set for Omega_- (rows)")
    p.add_argument("--full-window", action="store_const", const=True, help="control run: masks are the whole window")
    p.add_argument("--nu", type=float, help="porosity used in embedded mode")
    p.add_argument("--dim-cap", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--norm-method", choices=["power", "lanczos"])

    words = sub.add_parser("words", help="word combinatorics").add_subparsers(dest="action", required=True)
    p = words.add_parser("count", help="count uncontrolled words and X")
    _common(p)
    p.add_argument("--n0", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--verify-exhaustive", action="store_const", const=True)
    p = words.add_parser("classify", help="X/Y membership of a word")
    _common(p)
    p.add_argument("--word")
    p.add_argument("--alpha", type=float)

    flow = sub.add_parser("flow", help="horocycle and geodesic flow experiments").add_subparsers(dest="action", required=True)
    p = flow.add_parser("avg", help="horocycle averages against the Liouville mean")
    _common(p)
    p.add_argument("--T", type=float)
    p.add_argument("--n", type=int, help="number of base points")
    p.add_argument("--steps-per-unit", type=int)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--radius", type=float, help="radius of the bump observable")
    p.add_argument("--group", help="group JSON file (default: Bolza preset)")
    p = flow.add_parser("hit", help="hitting times of a ball at the base point")
    _common(p)
    p.add_argument("--radius", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--s-max", type=float)
    p.add_argument("--direction", choices=["stable", "unstable"])
    p.add_argument("--group")
    p = flow.add_parser("witness", help="porosity witnesses along the unstable horocycle")
    _common(p)
    p.add_argument("--tau-grid")
    p.add_argument("--n", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--nu1", type=float)
    p.add_argument("--slice-samples", type=int)
    p.add_argument("--group")
    return parser


def _set_source(p: argparse.ArgumentParser, cantor: bool = True) -> None:
    p.add_argument("--set", help="JSON interval set file")
    if cantor:
        p.add_argument("--cantor", type=int, help="use the triadic Cantor set of this level")
    p.add_argument("--random", action="store_const", const=True, help="draw a seeded random porous set")


def command_key(args) -> str:
    return args.command if not getattr(args, "action", None) else f"{args.command} {args.action}"


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError(f"config {path}: top level must be an object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InvalidInputError(f"config {path}: unknown keys {sorted(unknown)}")
    return data


def resolve(args) -> dict:
    """Merge flags over config params over defaults; returns the effective options."""
    key = command_key(args)
    defaults = DEFAULTS[key]
    cfg = load_config(args.config) if args.config else {}
    if "command" in cfg and cfg["command"] not in (key, args.command):
        raise InvalidInputError(f"config is for command {cfg['command']!r}, not {key!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise InvalidInputError("config params must be an object")
    params = {k.replace("-", "_"): v for k, v in params.items()}
    unknown = set(params) - set(defaults)
    if unknown:
        raise InvalidInputError(f"config: unknown params for {key}: {sorted(unknown)}")
    opts = {}
    for name, default in defaults.items():
        flag = getattr(args, name, None)
        opts[name] = flag if flag is not None else params.get(name, default)
    opts["seed"] = args.seed if args.seed is not None else cfg.get("seed")
    opts["format"] = args.format or cfg.get("format", "json").lower()
    opts["output"] = args.output or cfg.get("output_path")
    opts["threads"] = max(1, args.threads)
    if opts["format"] not in ("json", "csv"):
        raise InvalidInputError(f"format must be json or csv, got {opts['format']!r}")
    return opts


def _need(opts: dict, *names: str) -> None:
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise InvalidInputError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _need_seed(opts: dict, why: str) -> int:
    if opts["seed"] is None:
        raise InvalidInputError(f"--seed is required for {why}")
    return int(opts["seed"])


def _read_set(path: str) -> IntervalSet:
    try:
        with open(path, encoding="utf-8") as fh:
            return IntervalSet.from_json(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read set {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"set {path}: malformed JSON at line {exc.lineno}, column {exc.colno}") from exc


def _source_set(opts: dict, warnings: list) -> tuple[IntervalSet, dict]:
    sources = [k for k in ("set", "cantor", "random") if opts.get(k) not in (None, False)]
    if len(sources) != 1:
        raise InvalidInputError("give exactly one of --set, --cantor, --random")
    if opts.get("set"):
        return _read_set(opts["set"]), {"set": opts["set"]}
    if opts.get("cantor") is not None:
        return cantor_set(int(opts["cantor"])), {"cantor": opts["cantor"]}
    _need(opts, "nu", "alpha0")
    seed = _need_seed(opts, "random sets")
    return random_porous(opts["nu"], opts["alpha0"], seed), {"random": True}


def _load_group(path: Optional[str]):
    from .hyperbolic_dynamics import FuchsianGroup, bolza

    if path is None:
        return bolza()
    try:
        with open(path, encoding="utf-8") as fh:
            return FuchsianGroup.from_json(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read group {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"group {path}: malformed JSON at line {exc.lineno}, column {exc.colno}") from exc


def _pool_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- commands -------------------------------------------------------------------


def cmd_porosity(opts: dict, warnings: list) -> Payload:
    _need(opts, "nu", "alpha0")
    omega, _ = _source_set(opts, warnings)
    report = porosity_check(omega, opts["nu"], opts["alpha0"], opts["alpha1"])
    data = {"set": omega.to_json(), "report": report.to_json()}
    header = ["certified", "nu_nominal", "nu_certified", "worst_ratio", "windows_checked", "witness_lo", "witness_hi"]
    w = report.witness
    row = [report.certified, report.nu_nominal, report.nu_certified, report.to_json()["worst_ratio"], report.windows_checked, None if w is None else w.lo, None if w is None else w.hi]
    return Payload(data, header, [row])


def cmd_embed(opts: dict, warnings: list) -> Payload:
    from .regular_sets import RegularMeasure, containment_check, embed_porous, regularity_check

    _need(opts, "nu", "alpha0")
    omega, _ = _source_set(opts, warnings)
    tree = embed_porous(omega, opts["nu"], opts["alpha0"], extra_levels=int(opts["extra_levels"]))
    mu = RegularMeasure(tree)
    data = {
        "set": omega.to_json(),
        "tree": tree.to_json(),
        "containment": containment_check(omega, tree, opts["alpha0"]),
        "delta": mu.delta,
        "C_R": mu.C_R,
    }
    rows = []
    if opts["regularity"]:
        seed = _need_seed(opts, "the regularity check")
        report = regularity_check(mu, int(opts["regularity"]), seed, keep_rows=True)
        data["regularity"] = report.to_json()
        rows = [[float(a), float(b), float(c)] for a, b, c in report.rows]
    return Payload(data, ["scale", "ratio_upper", "ratio_lower"], rows)


def cmd_fup(opts: dict, warnings: list) -> Payload:
    import warnings as pywarnings

    from .fup_numerics import KernelSpec, fup_experiment

    spec = KernelSpec(phase=opts["kernel"], w=float(opts["w"]), d_min=float(opts["dmin"]))
    lo, hi = int(opts["h_max_exp"]), int(opts["h_min_exp"])
    if lo > hi:
        raise InvalidInputError("--h-max-exp must not exceed --h-min-exp")
    hs = [2.0**-k for k in range(lo, hi + 1)]
    if opts["full_window"]:
        full = IntervalSet.from_json({"window": [0, 1], "parts": [[0, 1]]})
        plus = minus = full
    elif opts["plus"] or opts["minus"]:
        _need(opts, "plus", "minus")
        plus, minus = _read_set(opts["plus"]), _read_set(opts["minus"])
    else:
        plus = minus = cantor_set(int(opts["cantor"]))
    with pywarnings.catch_warnings():
        pywarnings.simplefilter("ignore", RuntimeWarning)
        result = fup_experiment(
            plus,
            minus,
            float(opts["nu"]),
            spec,
            float(opts["rho"]),
            hs,
            mode=opts["mode"],
            oversample=int(opts["oversample"]),
            dim_cap=int(opts["dim_cap"]),
            tol=float(opts["tol"]),
            threads=opts["threads"],
            seed=int(opts["seed"] or 0),
            norm_method=opts["norm_method"],
        )
    warnings.extend(result.warnings)
    header = ["h", "rho", "dim", "norm_masked", "norm_unmasked", "oversample"]
    rows = [[r[k] for k in header] for r in result.rows]
    return Payload({"kernel": spec.to_json(), **result.to_json()}, header, rows)


def cmd_words_count(opts: dict, warnings: list) -> Payload:
    from .words import PartitionParams, count_X, derive_params

    if opts["n0"] is not None or opts["alpha"] is not None:
        _need(opts, "n0", "alpha")
        if not (0 < opts["alpha"] < 1):
            raise InvalidInputError("alpha must lie in (0, 1)")
        if opts["n0"] < 1:
            raise InvalidInputError("n0 must be >= 1")
        params = PartitionParams(int(opts["n0"]), float(opts["alpha"]), h=opts["h"])
    else:
        _need(opts, "h", "rho", "beta")
        params = derive_params(opts["h"], opts["rho"], opts["beta"])
    try:
        report = count_X(params, verify_exhaustive=bool(opts["verify_exhaustive"]))
    except ResourceError as exc:
        report = exc.report
        warnings.append(str(exc))
    data = {**report.to_json(), "params": params.to_json()}
    header = ["N0", "alpha", "n_uncontrolled", "n_X", "stirling_bound", "exhaustive"]
    return Payload(data, header, [[params.N0, params.alpha, report.n_uncontrolled, report.n_X, report.stirling_bound, report.exhaustive]])


def cmd_words_classify(opts: dict, warnings: list) -> Payload:
    from .words import parse_word, xy_membership

    _need(opts, "word", "alpha")
    label, block = xy_membership(parse_word(str(opts["word"])), opts["alpha"])
    return Payload({"word": str(opts["word"]), "alpha": opts["alpha"], "set": label, "block": block}, ["set", "block"], [[label, block]])


def cmd_flow_avg(opts: dict, warnings: list) -> Payload:
    from .hyperbolic_dynamics import Observable, horocycle_average, liouville_average, random_points

    seed = _need_seed(opts, "flow experiments")
    group = _load_group(opts["group"])
    f = Observable(radius=float(opts["radius"]))
    pts_seed, mc_seed = np.random.SeedSequence(seed).generate_state(2)
    pts = random_points(int(opts["n"]), int(pts_seed), group)
    T = float(opts["T"])
    n_steps = max(2, int(math.ceil(T * int(opts["steps_per_unit"]))))
    mc = liouville_average(f, int(opts["mc_samples"]), int(mc_seed), group)
    avgs = _pool_map(lambda p: horocycle_average(f, p, T, n_steps, group), pts, opts["threads"])
    errors = [abs(a - mc.mean) for a in avgs]
    data = {
        "T": T,
        "n_steps": n_steps,
        "liouville": mc.to_json(),
        "max_error": max(errors),
        "mean_error": float(np.mean(errors)),
        "averages": avgs,
    }
    try:
        data["exact_mean"] = f.exact_mean(group)
    except InvalidInputError:
        pass
    rows = [[i, T, a, e] for i, (a, e) in enumerate(zip(avgs, errors))]
    return Payload(data, ["point", "T", "average", "abs_error"], rows)


def cmd_flow_hit(opts: dict, warnings: list) -> Payload:
    from .hyperbolic_dynamics import IDENTITY, Ball, hitting_time, random_points

    seed = _need_seed(opts, "flow experiments")
    group = _load_group(opts["group"])
    ball = Ball(IDENTITY, float(opts["radius"]))
    pts = random_points(int(opts["n"]), seed, group)
    times = _pool_map(lambda p: hitting_time(ball, p, float(opts["s_max"]), opts["direction"], group), pts, opts["threads"])
    hit = [t for t in times if t is not None]
    data = {"radius": ball.radius, "s_max": float(opts["s_max"]), "hit": len(hit), "n": len(times), "T_emp": max(hit) if hit else None, "times": times}
    return Payload(data, ["point", "hitting_time"], [[i, t] for i, t in enumerate(times)])


def cmd_flow_witness(opts: dict, warnings: list) -> Payload:
    from .errors import WitnessError
    from .hyperbolic_dynamics import SliceSpec, default_targets, porosity_witness, random_points

    seed = _need_seed(opts, "flow experiments")
    group = _load_group(opts["group"])
    try:
        taus = [float(x) for x in str(opts["tau_grid"]).split(",") if x.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"bad --tau-grid {opts['tau_grid']!r}") from exc
    balls = default_targets(float(opts["radius"]))
    spec = SliceSpec(1.0, float(opts["nu1"]), "unstable", int(opts["slice_samples"]))
    pts = random_points(int(opts["n"]), seed, group)
    T = float(opts["T"])

    def one(job):
        tau, i = job
        try:
            r = porosity_witness(balls, pts[i], tau, T, spec, group)
            return [tau, i, r.j, r.w, r.s_w, r.s0, r.verified, r.max_distance]
        except WitnessError as exc:
            return [tau, i, None, None, None, None, False, str(exc)]

    rows = _pool_map(one, [(tau, i) for tau in taus for i in range(len(pts))], opts["threads"])
    verified = sum(bool(r[6]) for r in rows)
    data = {
        "T": T,
        "tau_grid": taus,
        "targets": [b.to_json() for b in balls],
        "verified": verified,
        "cases": len(rows),
        "fraction_verified": verified / len(rows) if rows else 0.0,
    }
    header = ["tau", "point", "j", "w", "s_w", "s0", "verified", "max_distance"]
    return Payload(data, header, rows)


COMMANDS = {
    "porosity": cmd_porosity,
    "embed": cmd_embed,
    "fup": cmd_fup,
    "words count": cmd_words_count,
    "words classify": cmd_words_classify,
    "flow avg": cmd_flow_avg,
    "flow hit": cmd_flow_hit,
    "flow witness": cmd_flow_witness,
}


def write_outputs(text: str, opts: dict, key: str, warnings: list, wall: float) -> None:
    path = opts["output"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    manifest = {
        "config_echo": {"command": key, **{k: v for k, v in opts.items() if k != "output"}, "output_path": path},
        "tool_version": __version__,
        "wall_time": wall,
        "warnings": warnings,
    }
    with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    key = command_key(args)
    warnings: list = []
    start = time.perf_counter()
    try:
        opts = resolve(args)
        if key in RANDOMIZED:
            _need_seed(opts, key)
        payload = COMMANDS[key](opts, warnings)
        text = payload.render(opts["format"])
    except InvalidInputError as exc:
        print(f"fuplab {key}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"fuplab {key}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FuplabError as exc:
        print(f"fuplab {key}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for w in warnings:
        print(f"fuplab {key}: warning: {w}", file=sys.stderr)
    if opts["output"]:
        write_outputs(text, opts, key, warnings, time.perf_counter() - start)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
