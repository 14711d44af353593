"""Command-line interface: energies, scans, critical points, obstructions, spectra, asymptotics, verify."""

from __future__ import annotations

import os

# thread count for the BLAS backends; must be set before numpy loads
_threads = os.environ.get("WILLMORE4_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import csv  # noqa: E402
import io  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402
from dataclasses import dataclass, fields, replace  # noqa: E402
from typing import Sequence  # noqa: E402

from . import __version__  # noqa: E402
from .errors import WillmoreError  # noqa: E402

FORMATS = ("json", "csv")


class UsageError(Exception):
    """Invalid arguments detected after parsing (exit status 2)."""


@dataclass(frozen=True)
class RunConfig:
    resolution: int = 32
    energy_rel: float = 1e-6
    obstruction_rel: float = 1e-6
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.resolution < 8:
            raise UsageError("resolution must be at least 8")
        if self.energy_rel <= 0 or self.obstruction_rel <= 0:
            raise UsageError("tolerances must be positive")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")


def load_config(path: str | None) -> dict:
    """Read ``key = value`` lines (``#`` comments allowed) into typed RunConfig fields."""
    if path is None:
        return {}
    types = {f.name: f.type for f in fields(RunConfig)}
    casts = {"int": int, "float": float, "str": str}
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = casts[types[key]](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from exc
    return out


def parse_params(text: str | None) -> dict:
    """``k=v,k=v`` with integer or float values."""
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"bad parameter {item!r}; expected key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError as exc:
                raise UsageError(f"parameter {key} is not a number: {value!r}") from exc
    return out


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"range must look like lo:hi, got {text!r}") from exc
    return lo, hi


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _emit(payload, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    rows = payload if isinstance(payload, list) else [payload]
    flat = [_flatten(r) for r in rows]
    keys = list(dict.fromkeys(k for r in flat for k in r))
    w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, name + "."))
        elif isinstance(v, (list, tuple)):
            out[name] = ";".join(str(x) for x in v)
        else:
            out[name] = v
    return out


# -- subcommands ----------------------------------------------------------------------------


def _chart(family: str, params: dict):
    from .charts import PRODUCT_FAMILIES, make_family_chart

    # product-sphere radii are rescaled onto the unit sphere
    return make_family_chart(family, normalize=family in PRODUCT_FAMILIES, **params)


def cmd_energy(args, cfg: RunConfig, out) -> int:
    from .energies import energy

    chart = _chart(args.family, parse_params(args.params))
    if args.background and args.background != chart.background.kind:
        raise UsageError(f"family {args.family} lives in the {chart.background.kind} background, "
                         f"not {args.background}")
    rep = energy(chart, resolution=cfg.resolution)
    if rep.est_error > cfg.energy_rel * max(abs(rep.E), 1e-300):
        print(f"warning: estimated error {rep.est_error:.3g} exceeds energy_rel * |E|; "
              "increase --res", file=sys.stderr)
    _emit(rep.as_dict(), cfg.format, out)
    return 0


def cmd_scan(args, cfg: RunConfig, out) -> int:
    from .families import family_arity, scan_grid

    lo, hi = _parse_range(args.range)
    fixed = {}
    for key, value in parse_params(args.fixed).items():
        if not (key.startswith("t") and key[1:].isdigit()):
            raise UsageError(f"fixed ratios are named t1, t2, ...; got {key!r}")
        fixed[int(key[1:]) - 1] = float(value)
    pts, vals = scan_grid(args.family, lo, hi, args.steps, fixed)
    arity = family_arity(args.family)
    out.write(f"# family={args.family}\n# range={lo}:{hi}\n# steps={args.steps}\n# grid=geometric\n")
    out.write("# t_i=r_i/r_last\n# quantity=Ebar (128 E)\n")
    for i, v in sorted(fixed.items()):
        out.write(f"# fixed_t{i + 1}={v}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow([f"t{i + 1}" for i in range(arity)] + ["Ebar"])
    for p, v in zip(pts, vals):
        w.writerow([repr(float(x)) for x in p] + [repr(float(v))])
    return 0


def cmd_critical(args, cfg: RunConfig, out) -> int:
    from .families import find_critical_points

    rows = [{"family": c.family, "classification": c.classification, "t": list(c.t),
             "radii": list(c.radii), "radii_squared": list(c.radii_squared), "Ebar": c.Ebar,
             "grad_norm": c.grad_norm}
            for c in find_critical_points(args.family)]
    _emit(rows, cfg.format, out)
    return 0


def cmd_obstruction(args, cfg: RunConfig, out) -> int:
    from .obstruction import obstruction_norms

    chart = _chart(args.family, parse_params(args.params))
    res = args.res if args.res is not None else 12
    norms = obstruction_norms(chart, resolution=res)
    payload = {"family": chart.family, "params": _plain(chart.params), "k": chart.k,
               "background": chart.background.kind, "resolution": res, "nodes": norms.nodes,
               "sup": norms.sup, "l2": norms.l2, "term_scale": norms.term_scale,
               "scaled_sup": norms.scaled_sup, "critical": norms.scaled_sup < cfg.obstruction_rel}
    _emit(payload, cfg.format, out)
    return 0


def _plain(params: dict) -> dict:
    return {k: v for k, v in params.items() if isinstance(v, (int, float, str))}


def cmd_spectrum(args, cfg: RunConfig, out) -> int:
    from .variation import jacobi_spectrum

    table = jacobi_spectrum(args.surface, args.jmax)
    if cfg.format == "csv":
        _emit([{"lambda": r.lam, "mult": r.mult, "cJ": r.cJ} for r in table.rows], "csv", out)
    else:
        _emit(table.as_dict(), "json", out)
    return 0


def cmd_asymptotics(args, cfg: RunConfig, out) -> int:
    from .asymptotics import ASYMPTOTIC_COEFFICIENT, asymptotic_fit

    fit = asymptotic_fit(_parse_floats(args.a_list))
    payload = {"a": fit.a.tolist(), "Ebar": fit.Ebar.tolist(), "Ebar_over_a4_limit": fit.coefficient,
               "target": ASYMPTOTIC_COEFFICIENT, "target_expr": "256 pi^2 / 35",
               "rel_err": abs(fit.coefficient - ASYMPTOTIC_COEFFICIENT) / ASYMPTOTIC_COEFFICIENT}
    _emit(payload, cfg.format, out)
    return 0


def cmd_verify(args, cfg: RunConfig, out) -> int:
    from .acceptance import run_suite

    results = run_suite(args.suite, seed=cfg.seed)
    for r in results:
        out.write(r.line() + "\n")
    failed = sum(not r.passed for r in results)
    out.write(f"{len(results) - failed} passed, {failed} failed\n")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="willmore4", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    def add_globals(parser, default):
        parser.add_argument("--config", default=default,
                            help="file of 'key = value' lines (resolution, energy_rel, "
                                 "obstruction_rel, format, seed); flags override it")
        parser.add_argument("--format", choices=FORMATS, default=default, help="output format (default json)")
        parser.add_argument("--seed", type=int, default=default, help="seed for randomized checks")

    add_globals(p, None)
    # the same options after the subcommand; SUPPRESS keeps them from resetting earlier values
    common = argparse.ArgumentParser(add_help=False)
    add_globals(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def with_res(sp):
        sp.add_argument("--res", type=int, help="quadrature resolution per parameter")
        return sp

    e = with_res(sub.add_parser("energy", parents=[common], help="energy of a family chart"))
    e.add_argument("--family", required=True)
    e.add_argument("--params", help="k=v,... (product-sphere radii are normalized)")
    e.add_argument("--background", choices=("euclidean", "sphere"))
    e.set_defaults(func=cmd_energy)

    s = sub.add_parser("scan", parents=[common], help="closed-form Ebar over a geometric grid of radius ratios (CSV)")
    s.add_argument("--family", required=True)
    s.add_argument("--range", required=True, help="lo:hi")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--fixed", help="t1=v,... ratios held fixed")
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("critical", parents=[common], help="critical points of a product family")
    c.add_argument("--family", required=True)
    c.set_defaults(func=cmd_critical)

    o = with_res(sub.add_parser("obstruction", parents=[common], help="sup and L2 norms of the obstruction field"))
    o.add_argument("--family", required=True)
    o.add_argument("--params")
    o.set_defaults(func=cmd_obstruction)

    sp = sub.add_parser("spectrum", parents=[common], help="Jacobi spectrum table")
    sp.add_argument("--surface", required=True, type=str.lower, choices=("s4", "s2xs2"))
    sp.add_argument("--jmax", type=int, default=2)
    sp.set_defaults(func=cmd_spectrum)

    a = sub.add_parser("asymptotics", parents=[common], help="fit the a^4 coefficient of Ebar for dilated anchor rings")
    a.add_argument("--a-list", default="20,40,80,160")
    a.set_defaults(func=cmd_asymptotics)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    v.add_argument("--suite", choices=("all", "fast"), default="all")
    v.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    """Entry point returning the exit status (0 ok, 1 verify failure, 2 usage error)."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        base = load_config(args.config)
        overrides = {"format": args.format, "seed": args.seed,
                     "resolution": getattr(args, "res", None)}
        cfg = replace(RunConfig(**base), **{k: v for k, v in overrides.items() if v is not None})
        buf = io.StringIO()
        code = args.func(args, cfg, buf)
    except (UsageError, WillmoreError, ValueError, KeyError) as exc:
        print(f"willmore4 {args.command}: error: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
