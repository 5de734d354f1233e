"""Command-line front end.

Every run writes one file (or stdout): a timestamp line, then the run
metadata, then the result rows.  Apart from the timestamp the output is a
deterministic function of the parameters and seed.

    zetalab moment --k 1 --t0 10000 --t1 20000
    zetalab cos-moments --support 2,3,5,7 --max-weight 6 --t 100000 --format json
    zetalab split --k 2 --T 10000 --samples 10000 --threshold 0.5 --base 0.08

Exit codes: 0 success, 2 usage, 3 domain/bounds/capability, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import itertools
import json
import math
import sys
from pathlib import Path
from typing import Callable

from . import __version__
from .errors import ConfigError, LabError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BOUNDS = 3
EXIT_IO = 4

TIMESTAMP_PREFIX = "# generated "


class UsageError(Exception):
    pass


# ------------------------------------------------------------------- output


def render(meta: dict, rows: list[dict], fmt: str) -> str:
    """Serialize metadata and rows (without the timestamp line)."""
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    if rows:
        fields = list(rows[0].keys())
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _csv_cell(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return v


def parse(text: str, fmt: str) -> tuple[dict, list[dict]]:
    """Inverse of render; a leading timestamp line is skipped.

    CSV cells come back as strings, which render writes out unchanged.
    """
    if text.startswith(TIMESTAMP_PREFIX):
        text = text.split("\n", 1)[1]
    if fmt == "json":
        doc = json.loads(text)
        return doc["meta"], doc["rows"]
    meta = {}
    lines = text.splitlines(keepends=True)
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("# "):
            body_start = i
            break
        key, _, value = line[2:].rstrip("\n").partition(": ")
        meta[key] = json.loads(value)
    else:
        body_start = len(lines)
    rows = list(csv.DictReader(io.StringIO("".join(lines[body_start:]))))
    return meta, rows


def read_output(path: str | Path, fmt: str | None = None) -> tuple[dict, list[dict]]:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    return parse(path.read_text(encoding="utf-8"), fmt)


def _timestamp() -> str:
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
    return TIMESTAMP_PREFIX + now.isoformat() + "\n"


# ------------------------------------------------------------- subcommands


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _overrides(args):
    from .polys import ScheduleOverrides

    return ScheduleOverrides(ratio=args.ratio, threshold=args.threshold, base=args.base)


def run_moment(args) -> list[dict]:
    from .zeta import moment_quadrature_multi, second_moment_main_term

    rows = []
    for est in moment_quadrature_multi(_floats(args.k), args.t0, args.t1, args.nodes_per_unit):
        logt = math.log(args.t0)
        row = {
            "k": est.k,
            "t0": est.t0,
            "t1": est.t1,
            "value": est.value,
            "nodes": est.nodes,
            "max_node_spacing": est.max_node_spacing,
            "ratio_T_logT": est.value / (args.t0 * logt ** (est.k * est.k)),
            "main_term": second_moment_main_term(args.t0, args.t1) if est.k == 1 else "",
        }
        rows.append(row)
    return rows


def run_deficit(args) -> list[dict]:
    import numpy as np

    from .kernel import uniform_heights
    from .polys import upper_bound_rhs
    from .primes import sieve
    from .zeta import abs_zeta_half

    x = args.x if args.x is not None else args.T**args.x_exp
    table = sieve(max(100, math.ceil(max(x, math.log(args.T)))))
    ts = uniform_heights(args.T, args.samples, args.seed)
    rhs = upper_bound_rhs(ts, x, args.T, table)
    with np.errstate(divide="ignore"):
        logz = np.log(abs_zeta_half(ts))
    return [
        {"t": float(t), "rhs": float(r), "log_abs_zeta": float(z), "deficit": float(r - z)}
        for t, r, z in zip(ts, rhs, logz)
    ]


def run_cos_moments(args) -> list[dict]:
    from .kernel import FactoredInteger, cos_product_main_term, cos_product_quadrature

    support = _ints(args.support)
    rows = []
    for alphas in itertools.product(range(args.max_weight + 1), repeat=len(support)):
        if sum(alphas) > args.max_weight:
            continue
        n = FactoredInteger(tuple((p, a) for p, a in zip(support, alphas) if a))
        main = cos_product_main_term(n, args.t)
        quad = cos_product_quadrature(n, args.t)
        rows.append(
            {
                "n": n.value,
                "factors": "*".join(f"{p}^{a}" for p, a in n.factors) or "1",
                "main_term": main,
                "quadrature": quad,
                "error_over_n": abs(quad - main) / n.value,
            }
        )
    rows.sort(key=lambda r: r["n"])
    return rows


def run_split(args) -> list[dict]:
    from .kernel import empirical_split_moment
    from .polys import beta_schedule
    from .primes import sieve

    sched = beta_schedule(args.k, args.T, _overrides(args))
    hi = max(sched.cutoff(sched.cap_index), math.log(args.T), 100)
    table = sieve(math.ceil(hi))
    rep = empirical_split_moment(args.k, args.T, sched, args.samples, table, args.seed)
    rows = [
        {
            "class": c.name,
            "count": c.count,
            "measure_fraction": c.measure_fraction,
            "contribution": c.contribution,
            "stderr": c.stderr,
            "surrogate": c.surrogate,
            "surrogate_stderr": c.surrogate_stderr,
        }
        for c in rep.classes
    ]
    rows.append(
        {
            "class": "total",
            "count": rep.samples,
            "measure_fraction": 1.0,
            "contribution": rep.total,
            "stderr": rep.total_stderr,
            "surrogate": "",
            "surrogate_stderr": "",
        }
    )
    return rows


def run_random_model(args) -> list[dict]:
    from .primes import sieve
    from .random_model import ModelConfig, mgf_monte_carlo

    table = sieve(max(100, math.ceil(max(_floats(args.x)))))
    rows = []
    for scheme in args.scheme.split(","):
        for k in _floats(args.k):
            for x in _floats(args.x):
                cfg = ModelConfig(x=x, weight_scheme=scheme, k=k, n_samples=args.samples, seed=args.seed)
                res = mgf_monte_carlo(cfg, table)
                rows.append({"scheme": scheme, "k": k, "x": x, **res.__dict__})
    return rows


def run_constants(args) -> list[dict]:
    from .primes import sieve
    from .random_model import a_constant, a_tail_bound, f_rmt, f_rmt_extrapolated, optimal_length

    table = sieve(args.prime_limit)
    rows = []
    for k in _floats(args.k):
        a = a_constant(k, args.prime_limit, args.m_terms, table=table)
        f = f_rmt(k, args.N)
        row = {
            "k": k,
            "a": a,
            "a_tail_bound": a_tail_bound(k, args.prime_limit),
            "f_rmt": f,
            "f_rmt_extrapolated": f_rmt_extrapolated(k, args.N),
            "a_times_f": a * f,
            "optimal_logx": "",
            "bound_factor": "",
        }
        if k >= 1:
            row["optimal_logx"], row["bound_factor"] = optimal_length(k, args.T)
        rows.append(row)
    return rows


def run_quadratic(args) -> list[dict]:
    from .quadratic import LValueCache, discriminant_array, quadratic_moment

    cache = LValueCache(args.cache)
    if args.lvalues:
        return [
            {"d": int(d), "l_half": cache.get(int(d), args.tol)}
            for d in discriminant_array(args.X, 2 * args.X)
        ]
    rows = []
    for k in _floats(args.k):
        rep = quadratic_moment(k, args.X, cache=cache, overrides=_overrides(args), tol=args.tol)
        row = rep.to_dict()
        row.pop("schedule")
        rows.append(row)
    return rows


# ---------------------------------------------------------------- parser


def _schedule_flags(p):
    p.add_argument("--ratio", type=float, default=20.0, help="schedule ratio")
    p.add_argument("--threshold", type=float, help="schedule threshold override")
    p.add_argument("--base", type=float, help="first schedule exponent override")


# name -> (runner, required parameters)
COMMANDS: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "moment": (run_moment, ("k", "t0", "t1")),
    "deficit": (run_deficit, ("T",)),
    "cos-moments": (run_cos_moments, ("support", "max_weight", "t")),
    "split": (run_split, ("k", "T")),
    "random-model": (run_random_model, ("x", "k")),
    "constants": (run_constants, ("k",)),
    "quadratic": (run_quadratic, ("X",)),
}
# alternative subcommand names
ALIASES = {"prop1": "deficit", "prop2": "cos-moments"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="zetalab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("moment", parents=[common], help="quadrature of |zeta(1/2+it)|^(2k)")
    p.add_argument("--k", help="comma-separated k values")
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--nodes-per-unit", type=float, default=40.0)

    p = sub.add_parser("deficit", aliases=["prop1"], parents=[common], help="upper-bound deficit at random heights")
    p.add_argument("--T", type=float)
    p.add_argument("--x", type=float, help="polynomial length (overrides --x-exp)")
    p.add_argument("--x-exp", type=float, default=0.1, help="x = T^x_exp")
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("cos-moments", aliases=["prop2"], parents=[common], help="mean values of cosine products")
    p.add_argument("--support", help="comma-separated primes")
    p.add_argument("--max-weight", type=int)
    p.add_argument("--t", type=float)

    p = sub.add_parser("split", parents=[common], help="moment split over the T / S(j) partition")
    p.add_argument("--k", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--samples", type=int, default=10_000)
    _schedule_flags(p)

    p = sub.add_parser("random-model", parents=[common], help="random Euler product MGF")
    p.add_argument("--x", help="comma-separated prime cutoffs")
    p.add_argument("--k", help="comma-separated k values")
    p.add_argument("--scheme", default="plain", help="plain, smooth or both comma-separated")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("constants", parents=[common], help="a(k), f(k) and the optimal length")
    p.add_argument("--k", help="comma-separated k values")
    p.add_argument("--prime-limit", type=int, default=100_000)
    p.add_argument("--m-terms", type=int, default=200)
    p.add_argument("--N", type=int, default=10_000)
    p.add_argument("--T", type=float, default=1e6, help="height for the optimal length")

    p = sub.add_parser("quadratic", parents=[common], help="central values of quadratic twists")
    p.add_argument("--X", type=float)
    p.add_argument("--k", default="1", help="comma-separated k values")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--cache", help="L-value cache CSV")
    p.add_argument("--lvalues", action="store_true", help="emit one row per discriminant")
    _schedule_flags(p)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command = ALIASES.get(args.command, args.command)
    if args.config:
        try:
            conf = read_config(args.config)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(conf) - set(known))
        if unknown:
            sub.error(f"unknown config keys: {', '.join(unknown)}")
        # config values become defaults, so explicit flags still win
        sub.set_defaults(**{k: v for k, v in conf.items() if k not in ("config", "command")})
        args = parser.parse_args(argv)
        args.command = ALIASES.get(args.command, args.command)
        for key, action in known.items():
            if getattr(args, key, None) == "true" and action.const is True:
                setattr(args, key, True)
    _, required = COMMANDS[args.command]
    missing = [r for r in required if getattr(args, r) is None]
    if missing:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.error("missing required: " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


def metadata(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "config", "format", "command")}
    return {"command": args.command, "version": __version__, "seed": args.seed, "parameters": params}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"zetalab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"zetalab: {exc}", file=sys.stderr)
        return EXIT_IO

    runner, _ = COMMANDS[args.command]
    try:
        rows = runner(args)
    except ConfigError as exc:
        print(f"zetalab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LabError as exc:
        print(f"zetalab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BOUNDS
    except ValueError as exc:
        print(f"zetalab: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"zetalab: {exc}", file=sys.stderr)
        return EXIT_IO

    text = _timestamp() + render(metadata(args), rows, args.format)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"zetalab: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
