"""Command-line entry point: ``trustlink <subcommand> [options]``.

Parameter precedence, highest first: explicit flag (``--p 0.5``), the
current sweep value (``--sweep p:0.3:0.9:7``), the config file, built-in
defaults. The config file comes from ``--config`` or the
``TRUSTLINK_CONFIG`` environment variable.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

from . import __version__
from . import area as area_mod
from . import configfile, figures, reports
from .design import solve_joint, solve_min_d, solve_min_w
from .model import DomainError, StrategySpec

FLAG_KEYS = {
    "c": "c",
    "p": "p",
    "t": "t",
    "tau": "tau",
    "t_sc": "t_sc",
    "t_ave": "t_ave",
    "d": "env.d",
    "w": "env.w",
    "utility": "utility.kind",
    "gamma0": "utility.gamma0",
    "phi": "utility.phi",
}

SWEEP_KEYS = {"w": "env.w", "d": "env.d", "p": "p", "tau": "tau", "t": "t"}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.12g" % value
    if value is None:
        return ""
    return str(value)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--sweep expects var:start:stop:steps, got {text!r}")
    var, start, stop, steps = parts
    if var not in SWEEP_KEYS:
        raise UsageError(f"cannot sweep {var!r}; choose one of {', '.join(SWEEP_KEYS)}")
    try:
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise UsageError(f"bad numbers in --sweep {text!r}") from None
    if steps < 2 or not start < stop:
        raise UsageError("--sweep needs start < stop and steps >= 2")
    return var, reports.linspace(start, stop, steps)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--sweep", help="var:start:stop:steps with var in w, d, p, tau, t")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--episodes", type=int, default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="output path (a directory for reproduce-figure)")
    for flag in ("c", "p", "t", "tau", "t_sc", "t_ave", "d", "w", "gamma0", "phi"):
        common.add_argument("--" + flag.replace("_", "-"), dest=flag, type=float)
    common.add_argument("--utility", choices=("linear", "exponential"))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="trustlink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trustlink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("payoff", parents=[common], help="closed-form long-term payoffs over a sweep")
    p.add_argument("--j", type=int, default=2, help="JDEF recovery lag")

    sub.add_parser("thresholds", parents=[common], help="outage thresholds over w, or w-bounds over d")

    opt = sub.add_parser("optimize", help="design price and trial time")
    osub = opt.add_subparsers(dest="mode", required=True)
    o = osub.add_parser("min-w", parents=[common])
    o.add_argument("--d-max", type=float, required=True)
    o = osub.add_parser("min-d", parents=[common])
    o.add_argument("--w-min", type=float, required=True)
    o = osub.add_parser("joint", parents=[common])
    o.add_argument("--w-min", type=float, required=True)
    o.add_argument("--d-max", type=float, required=True)

    ar = sub.add_parser("area", help="cooperation-area analysis (linear utility)")
    asub = ar.add_subparsers(dest="mode", required=True)
    asub.add_parser("classify", parents=[common])
    asub.add_parser("compute", parents=[common])
    a = asub.add_parser("map", parents=[common])
    a.add_argument("--grid", type=int, default=400)
    a = asub.add_parser("maximize", parents=[common])
    a.add_argument("--grid", type=int, default=400)
    a.add_argument("--budget", type=int, default=20000)

    t = sub.add_parser("tradeoff", parents=[common], help="efficiency, integrity and margin over slot time")
    t.add_argument("--steps", type=int, default=50)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo protocol simulation")
    s.add_argument("--client", default="COOP")
    s.add_argument("--sp", default="COOP")
    s.add_argument("--horizon", choices=("geometric", "exponential"), default="geometric")

    f = sub.add_parser("reproduce-figure", parents=[common], help="data bundle behind one figure")
    f.add_argument("figure", choices=figures.FIGURE_IDS)

    r = sub.add_parser("rerun", help="re-execute a run manifest and compare outputs")
    r.add_argument("manifest")
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    return parser


def resolve_values(args) -> dict:
    values = configfile.load(args.config)
    return values


def flag_values(args) -> dict:
    out = {}
    for attr, key in FLAG_KEYS.items():
        val = getattr(args, attr, None)
        if val is not None:
            out[key] = val
    return out


def scenario_points(args, default_sweep: str | None):
    """Sweep points as (value, Scenario), honouring flag > sweep > file."""
    base = resolve_values(args)
    flags = flag_values(args)
    spec = args.sweep or default_sweep
    if spec is None:
        vals = {**base, **flags}
        return None, [(None, configfile.build(vals))]
    var, grid = parse_sweep(spec)
    points = []
    for x in grid:
        vals = {**base, SWEEP_KEYS[var]: x, **flags}
        points.append((x, configfile.build(vals)))
    return var, points


def single_scenario(args):
    return configfile.build({**resolve_values(args), **flag_values(args)})


def run_command(args) -> list[tuple[str, list, list]]:
    """Compute the tables for ``args``; one entry per output file."""
    cmd = args.command
    if cmd == "payoff":
        _, pts = scenario_points(args, "w:0.01:0.99:99")
        return [("payoff",) + reports.payoff_table(pts, args.j)]
    if cmd == "thresholds":
        var, pts = scenario_points(args, "w:0.01:0.99:99")
        if var == "w":
            return [("thresholds",) + reports.threshold_table_w(pts)]
        if var == "d":
            return [("thresholds",) + reports.threshold_table_d(pts)]
        raise UsageError("thresholds sweeps w or d only")
    if cmd == "optimize":
        sc = single_scenario(args)
        c, t, util = sc.cfg.c, sc.cfg.t, sc.util
        if args.mode == "min-w":
            sol = solve_min_w(c, t, util, args.d_max)
        elif args.mode == "min-d":
            sol = solve_min_d(c, t, util, args.w_min)
        else:
            sol = solve_joint(c, t, util, args.w_min, args.d_max)
        return [("design",) + reports.design_table(sol)]
    if cmd == "area":
        sc = single_scenario(args)
        if args.mode == "classify":
            return [("classify",) + reports.classify_table(sc)]
        if args.mode == "compute":
            return [("area",) + reports.area_table(sc)]
        if sc.util.kind != "linear":
            raise DomainError("area map and maximize need a linear utility")
        if args.mode == "map":
            return [("map",) + reports.area_map_table(args.grid, sc.cfg.c, sc.cfg.t, sc.util.gamma0)]
        opt = area_mod.maximize_area(sc.cfg.c, sc.cfg.t, sc.util, grid=args.grid, budget=args.budget)
        return [("maximize",) + reports.maximize_table(opt)]
    if cmd == "tradeoff":
        if args.sweep:
            var, pts = scenario_points(args, None)
            if var != "t":
                raise UsageError("tradeoff sweeps t only")
            sc = pts[0][1]
            ts = [x for x, _ in pts]
        else:
            sc = single_scenario(args)
            ts = reports.tradeoff_grid(sc, args.steps)
        return [("tradeoff",) + reports.tradeoff_table(ts, sc)]
    if cmd == "simulate":
        client, sp = StrategySpec.parse(args.client), StrategySpec.parse(args.sp)
        episodes = args.episodes or 100_000
        _, pts = scenario_points(args, None)
        rows = [
            reports.simulate_row(x, sc, client, sp, args.horizon, episodes, args.seed, args.workers)
            for x, sc in pts
        ]
        return [("simulate", reports.SIM_HEADER, rows)]
    if cmd == "reproduce-figure":
        episodes = args.episodes or 20_000
        return figures.build(args.figure, episodes, args.seed, args.workers)
    raise UsageError(f"unknown command {cmd!r}")


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_outputs(args, argv, tables) -> None:
    rendered = [(name, render_csv(h, rows)) for name, h, rows in tables]
    if not args.out:
        for i, (name, text) in enumerate(rendered):
            if len(rendered) > 1:
                sys.stdout.write(("\n" if i else "") + f"# {name}\n")
            sys.stdout.write(text)
        return
    snapshot = {**resolve_values(args), **flag_values(args)}
    if args.command == "reproduce-figure":
        os.makedirs(args.out, exist_ok=True)
        files = {}
        for name, text in rendered:
            path = os.path.join(args.out, f"{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            files[f"{name}.csv"] = _sha(text)
        manifest_path = os.path.join(args.out, "manifest.json")
        outputs = files
    else:
        text = rendered[0][1]
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        manifest_path = args.out + ".manifest.json"
        outputs = {"csv": _sha(text)}
    manifest = {
        "tool": "trustlink",
        "version": __version__,
        "subcommand": args.command,
        "argv": list(argv),
        "config": snapshot,
        "seed": args.seed,
        "workers": args.workers,
        "output": os.path.abspath(args.out),
        "sha256": outputs,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _replace_option(argv, flag, value):
    out, skip = [], False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == flag:
            skip = True
            continue
        if tok.startswith(flag + "="):
            continue
        out.append(tok)
    return out + [flag, str(value)]


def rerun(args) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = list(manifest["argv"])
    out = args.out or manifest["output"]
    argv = _replace_option(argv, "--out", out)
    if args.workers is not None:
        argv = _replace_option(argv, "--workers", args.workers)
    code = dispatch(argv)
    if code != 0:
        return code
    if manifest["subcommand"] == "reproduce-figure":
        new_path = os.path.join(out, "manifest.json")
    else:
        new_path = out + ".manifest.json"
    with open(new_path, encoding="utf-8") as fh:
        fresh = json.load(fh)
    same = fresh["sha256"] == manifest["sha256"]
    print("reproduced: " + ("identical" if same else "DIFFERENT"), file=sys.stderr)
    return 0 if same else 1


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "rerun":
            return rerun(args)
        if args.episodes is not None and args.episodes < 1:
            raise UsageError("--episodes must be >= 1")
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        tables = run_command(args)
        write_outputs(args, argv, tables)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"trustlink: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, OSError) as exc:
        print(f"trustlink: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
