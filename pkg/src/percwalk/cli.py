"""Command-line driver: ``percwalk {single,two,sweep,estimate,verify}``.

Each run writes ``OUT.csv`` plus a ``OUT.json`` sidecar holding the full
run configuration, or a single ``OUT.json`` with ``--format json``.
Exit codes: 0 success, 2 configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .estimation import DEFAULT_INPUTS, estimate
from .inputs import parse_input
from .lattice import Regime
from .montecarlo import EnsembleSpec, run_ensemble
from .observables import QUANTITIES, mean_and_stderr
from .twowalker import fluctuation_identity

log = logging.getLogger("percwalk")

EXIT_CONFIG = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        grid = np.linspace(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise ConfigError(f"--p-grid expects lo:hi:count, got {text!r}") from exc
    if grid.size < 2 or grid.min() < 0 or grid.max() > 1:
        raise ConfigError("--p-grid must have >= 2 points inside [0, 1]")
    return grid


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("PERCWALK_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError as exc:
        raise ConfigError(f"PERCWALK_SEED is not an integer: {env!r}") from exc


def config_dict(args) -> dict:
    skip = {"func", "t0"}
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in vars(args).items() if k not in skip}


def write_table(args, header: list[str], rows, extra_meta: dict | None = None, suffix: str = "") -> Path:
    out = Path(args.out + suffix)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "percwalk_version": __version__,
        "config": config_dict(args),
        "master_seed": args.seed,
        "wall_time_s": time.perf_counter() - args.t0,
    }
    if extra_meta:
        meta.update(extra_meta)
    rows = [list(r) for r in rows]
    if args.format == "json":
        path = out.with_suffix(".json")
        meta["columns"] = header
        meta["rows"] = [[v if isinstance(v, str) else float(v) for v in r] for r in rows]
        path.write_text(json.dumps(meta, indent=1))
        return path
    path = out.with_suffix(".csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    out.with_suffix(".json").write_text(json.dumps(meta, indent=1))
    return path


def _validate(args) -> None:
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    if hasattr(args, "p") and args.p is not None and not 0 <= args.p <= 1:
        raise ConfigError("--p must lie in [0, 1]")
    if getattr(args, "averages", 1) < 1:
        raise ConfigError("--averages must be >= 1")


def cmd_single(args) -> int:
    spec = parse_input(args.input)
    if not spec.is_single:
        raise ConfigError("single expects a single:* input")
    averages = 1 if Regime.parse(args.regime) is Regime.PERFECT else args.averages
    res = run_ensemble(EnsembleSpec(averages, args.steps, args.regime, args.p, args.input, args.seed), args.workers)
    x = np.arange(-args.steps, args.steps + 1)
    path = write_table(args, ["position", "probability"], zip(x, res.probs))
    print(path)
    return 0


DIFFS = ("boson-classical", "fermion-classical", "classical-product")


def cmd_two(args) -> int:
    spec = parse_input(args.input)
    if spec.is_single:
        raise ConfigError("two expects a two-walker input")
    averages = 1 if Regime.parse(args.regime) is Regime.PERFECT else args.averages
    n = args.steps

    def averaged(name, keep=False):
        return run_ensemble(EnsembleSpec(averages, n, args.regime, args.p, name, args.seed, keep), args.workers)

    res = averaged(args.input)
    x = np.arange(-n, n + 1)

    def grid_rows(m):
        return ((x[i], x[j], m[i, j]) for i in range(x.size) for j in range(x.size))

    print(write_table(args, ["i", "j", "probability"], grid_rows(res.mean.probs)))
    for diff in args.diff or []:
        if diff == "classical-product":
            if averages < 2:
                raise ConfigError("classical-product needs --averages >= 2 and a random regime")
            cl = averaged("psi_s", keep=True)
            dec = fluctuation_identity(cl.marginals1, cl.marginals2)
            m = dec.direct_average - dec.product_term
        else:
            kind = {"boson-classical": "phi_plus", "fermion-classical": "psi_minus"}[diff]
            m = averaged(kind).mean.probs - averaged("psi_s").mean.probs
        print(write_table(args, ["i", "j", "difference"], grid_rows(m), {"difference": diff}, suffix=f"_{diff}"))
    return 0


def cmd_sweep(args) -> int:
    from .montecarlo import sample_observables

    if args.averages < 2:
        raise ConfigError("sweep needs --averages >= 2 for a standard error")
    inputs = args.input.split(",") if args.input else ["phi_plus", "psi_minus", "psi_s"]
    specs = [parse_input(s) for s in inputs]
    for s in specs:
        if s.is_single and args.quantity not in ("V", "C"):
            raise ConfigError(f"quantity {args.quantity} needs a two-walker input")
    samples = sample_observables(specs, [args.quantity], args.regime, args.p_grid, args.steps,
                                 args.averages, args.seed, args.workers)
    rows = []
    for s in specs:
        mean, err = mean_and_stderr(samples[s.name][args.quantity])
        rows += [(s.name, p, m, e) for p, m, e in zip(args.p_grid, mean, err)]
    print(write_table(args, ["input", "p", "mean", "stderr"], rows))
    return 0


def cmd_estimate(args) -> int:
    if args.steps % 2 == 0:
        warnings.warn("even step count: origin events do not vanish at p=1; an odd count is recommended")
    inputs = args.input.split(",") if args.input else list(DEFAULT_INPUTS)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # parity warning already issued once above
        rep = estimate(args.steps, args.regime, args.p_grid, args.averages, args.seed,
                       args.epsilon, args.fit_degree, inputs, args.workers)
    rows = []
    for name, c in rep.curves.items():
        for k, p in enumerate(c.p_grid):
            rows.append((name, p, c.p_sim[k], c.stderr[k], c.fitted[k], c.slope[k], c.n_min[k],
                         "1" if c.unreliable[k] else "0"))
    header = ["input", "p", "p_sim", "stderr", "p_fit", "slope", "n_min", "unreliable"]
    print(write_table(args, header, rows, {"report": rep.to_dict()}))
    for w in rep.windows:
        print(f"{w.input_name:>14s} optimal for p in [{w.p_lo:.3f}, {w.p_hi:.3f}]")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all(corrupt_bond=args.inject_fault)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, steps=15, regime="dynamic", averages=1000, inp=None):
        p.add_argument("--steps", type=int, default=steps)
        p.add_argument("--regime", choices=[r.value for r in Regime], default=regime)
        p.add_argument("--input", default=inp)
        p.add_argument("--averages", type=int, default=averages)
        p.add_argument("--seed", type=lambda s: int(s, 0), default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("single", help="averaged single-walker distribution")
    common(p, inp="single:phi+")
    p.add_argument("--p", type=float, default=0.75)
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("two", help="averaged two-walker joint distribution")
    common(p, inp="psi_s")
    p.add_argument("--p", type=float, default=0.75)
    p.add_argument("--diff", action="append", choices=DIFFS, help="also write a difference grid")
    p.set_defaults(func=cmd_two)

    p = sub.add_parser("sweep", help="observable versus p")
    common(p, averages=5000)
    p.add_argument("--quantity", choices=QUANTITIES, type=str.upper, default="M")
    p.add_argument("--p-grid", type=parse_grid, default=parse_grid("0:1:41"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="percolation-parameter estimation bounds")
    common(p, steps=7, regime="static", averages=20000)
    p.add_argument("--p-grid", type=parse_grid, default=parse_grid("0:1:41"))
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--fit-degree", type=int, default=5)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run the reference checks")
    p.add_argument("--inject-fault", action="store_true", help="corrupt one bond in the fast path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    args.t0 = time.perf_counter()
    try:
        if args.command != "verify":
            args.seed = resolve_seed(args.seed)
            if args.out is None:
                args.out = f"percwalk_{args.command}"
            _validate(args)
            if getattr(args, "epsilon", 1) <= 0:
                raise ConfigError("--epsilon must be positive")
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
