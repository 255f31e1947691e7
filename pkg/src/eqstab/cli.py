"""Command-line front end.

    eqstab analyze   --builtin example2 --region 0.01:10
    eqstab portrait  --builtin example3 --region 0:2,0:2 --seeds 10 --csv p.csv --svg p.svg
    eqstab simulate  --file sys.txt --x0 1.5,0,0 --t-end 20
    eqstab sweep-eig --builtin example4 --region=0:2,-1:1,-1:1 --grid 5 --csv field.csv
    eqstab popov     --builtin example2 --region 0.01:10
    eqstab bendixson --builtin greitzer --g 0.7986 --region 0.55:0.75,0.5:0.75
    eqstab compressor {characteristic|boundary|sweep|surge} [--g G | --phi-star PHI]

Exit status: 0 on success, 1 on analysis failure, 2 on usage errors.  The
JSON report goes to ``--out`` or, if absent, to stdout.  Regions starting with
a minus sign need the ``--region=...`` spelling.
"""

from __future__ import annotations

import argparse
import sys as _sys

import numpy as np

from . import __version__
from .errors import EqstabError, PreconditionError
from .greitzer import (
    KOFF_SURGE_FLOW, CompressorParams, characteristic, characteristic_peak, eigen_sweep,
    equilibrium_for_g, g_for_equilibrium, surge_boundary, surge_experiment,
)
from .report import (
    SCHEMA_VERSION, Line, PlotSeries, dumps_report, emit_csv, emit_svg, write_csv,
)
from .sim import integrate, outcome, phase_portrait
from .stability import (
    bendixson_test, classify, eigen_field, find_equilibria, popov_test, taylor_lure,
)
from .sysdef import BUILTINS, builtin, parse_system

__all__ = ["main", "run_cli"]


class UsageError(Exception):
    pass


def _parse_region(text, n):
    try:
        parts = [tuple(float(v) for v in chunk.split(":")) for chunk in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --region {text!r}; expected a:b[,a:b...]") from None
    if any(len(p) != 2 for p in parts):
        raise UsageError(f"bad --region {text!r}; expected a:b[,a:b...]")
    if len(parts) == 1 and n > 1:
        parts = parts * n
    if len(parts) != n:
        raise UsageError(f"--region gives {len(parts)} ranges for a {n}-dimensional system")
    if any(lo > hi for lo, hi in parts):
        raise UsageError("--region ranges must have lo <= hi")
    return parts


def _parse_vector(text, n, flag):
    try:
        v = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"bad {flag} {text!r}") from None
    if len(v) != n:
        raise UsageError(f"{flag} needs {n} comma-separated values")
    return v


def _load_system(args):
    if args.file and args.builtin:
        raise UsageError("give either --file or --builtin, not both")
    if args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read system file {args.file!r}: {exc.strerror}") from None
        return parse_system(text, name=None)
    if args.builtin:
        if args.builtin == "greitzer":
            if args.g is None:
                raise UsageError("--builtin greitzer needs --g")
            return builtin("greitzer", g=args.g)
        if args.builtin not in BUILTINS:
            raise UsageError(f"unknown built-in {args.builtin!r}; choose from {', '.join(BUILTINS)}")
        return builtin(args.builtin)
    raise UsageError("a system is required: --file PATH or --builtin NAME")


def _system_info(sys):
    return {
        "name": sys.name,
        "dim": sys.n,
        "definition": sys.to_text().splitlines(),
        "digest": sys.digest(),
    }


def _eq_json(eq):
    return {"x": list(eq.x), "residual": eq.residual}


def _spectrum_json(spec):
    return None if spec is None else [{"re": z.real, "im": z.imag} for z in spec.values]


def _report(command, parameters, **body):
    rep = {"schema": SCHEMA_VERSION, "tool": "eqstab", "version": __version__,
           "command": command, "parameters": parameters}
    rep.update(body)
    return rep


def _trajectory_series(trajs, sys, name):
    lines = []
    for k, tr in enumerate(trajs):
        if tr is None:
            continue
        if sys.n == 1:
            lines.append(Line(f"#{k}", tr.t, tr.x[:, 0]))
        else:
            lines.append(Line(f"#{k}", tr.x[:, 0], tr.x[:, 1]))
    if sys.n == 1:
        return PlotSeries(name, "t", "x1", tuple(lines))
    return PlotSeries(name, "x1", "x2", tuple(lines))


# ---------------------------------------------------------------------------
# Subcommands

def cmd_analyze(args):
    sys = _load_system(args)
    region = _parse_region(_required(args.region, "--region"), sys.n)
    v = classify(sys, region, grid=args.grid)
    return _report("analyze", {"region": region, "grid": args.grid, "tol_zero": v.tol_zero},
                   system=_system_info(sys),
                   equilibria=[_eq_json(e) for e in v.equilibria],
                   uniqueness={"status": v.uniqueness.status, "count": v.uniqueness.count,
                               "region": v.uniqueness.region},
                   spectrum=_spectrum_json(v.spectrum),
                   verdict={"kind": v.kind, "method_note": v.method_note})


def cmd_portrait(args):
    sys = _load_system(args)
    region = _parse_region(_required(args.region, "--region"), sys.n)
    t_end = args.t_end if args.t_end is not None else 20.0
    portrait = phase_portrait(sys, region, args.seeds, t_end, rng_seed=args.seed)
    eqs = find_equilibria(sys, region)
    entries = []
    for k, (x0, tr) in enumerate(zip(portrait.seeds, portrait.trajectories)):
        entry = {"seed_state": list(x0)}
        if tr is None:
            entry["error"] = portrait.failures[k]
        else:
            entry["termination"] = tr.termination
            entry["final"] = list(tr.final)
            if len(eqs) == 1:
                out = outcome(tr, eqs[0])
                entry["outcome"] = out.kind
        entries.append(entry)
    if args.csv:
        rows = [[k, t] + list(x) for k, tr in enumerate(portrait.trajectories) if tr is not None
                for t, x in zip(tr.t, tr.x)]
        write_csv(args.csv, ["trajectory", "t"] + [f"x{i}" for i in range(1, sys.n + 1)], rows)
    if args.svg:
        emit_svg(_trajectory_series(portrait.trajectories, sys, f"Phase portrait: {sys.name or 'system'}"),
                 args.svg)
    return _report("portrait", {"region": region, "seeds": args.seeds, "seed": args.seed,
                                "t_end": t_end},
                   system=_system_info(sys), equilibria=[_eq_json(e) for e in eqs],
                   trajectories=entries)


def cmd_simulate(args):
    sys = _load_system(args)
    x0 = _parse_vector(_required(args.x0, "--x0"), sys.n, "--x0")
    t_end = args.t_end if args.t_end is not None else 20.0
    opts = {"method": args.method}
    if args.method == "rk4":
        opts["h"] = args.h
    tr = integrate(sys, x0, t_end, **opts)
    if args.csv:
        emit_csv(tr, args.csv)
    if args.svg:
        emit_svg(_trajectory_series([tr], sys, f"Trajectory: {sys.name or 'system'}"), args.svg)
    return _report("simulate", {"x0": x0, "t_end": t_end, "method": args.method},
                   system=_system_info(sys),
                   trajectory={"termination": tr.termination, "detail": tr.detail,
                               "samples": len(tr.t), "t_final": tr.t[-1], "final": list(tr.final)})


def cmd_sweep_eig(args):
    sys = _load_system(args)
    region = _parse_region(_required(args.region, "--region"), sys.n)
    grid = args.grid or 5
    field = eigen_field(sys, region, grid)
    if args.csv:
        emit_csv(field, args.csv)
    max_re = [s.max_real for s in field.spectra]
    if args.svg and max_re:
        series = PlotSeries.single("Largest eigenvalue real part per node", "node", "max Re",
                                   list(range(len(max_re))), max_re)
        emit_svg(series, args.svg)
    return _report("sweep-eig", {"region": region, "grid": grid},
                   system=_system_info(sys),
                   nodes=len(field.points), skipped=[list(p) for p in field.skipped],
                   max_real_part={"min": min(max_re) if max_re else None,
                                  "max": max(max_re) if max_re else None},
                   nodes_with_positive_real_part=sum(1 for v in max_re if v > 0))


def cmd_popov(args):
    sys = _load_system(args)
    region = _parse_region(_required(args.region, "--region"), sys.n)
    eqs = find_equilibria(sys, region, grid=args.grid)
    if len(eqs) != 1:
        raise EqstabError(f"expected a unique equilibrium in the region, found {len(eqs)}")
    lure = taylor_lure(sys, eqs[0])
    params = {"region": region, "k": "inf", "frequencies": [1e-3, 1e3, 400],
              "gammas": [1e-3, 1e3, 120]}
    base = dict(system=_system_info(sys), equilibrium=_eq_json(eqs[0]),
                lure={"A": lure.A, "b": lure.b, "c": lure.c, "d": lure.d})
    try:
        res = popov_test(lure)
    except PreconditionError as exc:
        rep = _report("popov", params, status="precondition_failed", message=str(exc), **base)
        raise _ReportedFailure(rep) from exc
    return _report("popov", params, status="ok",
                   popov={"feasible": res.feasible, "gamma": res.gamma, "margin": res.margin},
                   **base)


def cmd_bendixson(args):
    sys = _load_system(args)
    region = _parse_region(_required(args.region, "--region"), sys.n)
    grid = args.grid or 41
    v = bendixson_test(sys, region, grid)
    return _report("bendixson", {"region": region, "grid": grid},
                   system=_system_info(sys),
                   bendixson={"kind": v.kind, "divergence_min": v.div_min,
                              "divergence_max": v.div_max, "nodes": v.nodes,
                              "skipped": [list(p) for p in v.skipped]})


def _compressor_params(args):
    return CompressorParams(psi_c0=args.psi_c0, H=args.H, W=args.W, B=args.B)


def _params_json(p):
    return {"psi_c0": p.psi_c0, "H": p.H, "W": p.W, "B": p.B}


def cmd_compressor(args):
    p = _compressor_params(args)
    action = args.action
    if action == "characteristic":
        n = args.grid or 161
        phi = np.linspace(0.0, 0.8, n)
        psi = characteristic(phi, p)
        if args.csv:
            write_csv(args.csv, ["phi", "psi_c"], zip(phi, psi))
        if args.svg:
            emit_svg(PlotSeries.single("Compressor characteristic", "phi", "psi_c", phi, psi),
                     args.svg)
        return _report("compressor characteristic", {"grid": n}, params=_params_json(p),
                       peak={"phi": characteristic_peak(p),
                             "psi_c": characteristic(characteristic_peak(p), p)})
    if action == "boundary":
        b = surge_boundary(p)
        return _report("compressor boundary", {"tol": 1e-6}, params=_params_json(p),
                       phi_surge=b.phi, bracket=[b.lower, b.upper],
                       phi_peak=characteristic_peak(p),
                       koff_reference_phi=KOFF_SURGE_FLOW)
    if action == "sweep":
        n = args.grid or 200
        rows = eigen_sweep(np.linspace(0.01, 0.8, n), p)
        if args.csv:
            emit_csv(rows, args.csv)
        if args.svg:
            emit_svg(PlotSeries.single("Eigenvalue real part versus flow", "phi", "real part",
                                       [r.phi for r in rows], [r.real_part for r in rows]),
                     args.svg)
        b = surge_boundary(p)
        return _report("compressor sweep", {"grid": n, "range": [0.01, 0.8]},
                       params=_params_json(p), rows=len(rows),
                       max_discriminant=max(r.discriminant for r in rows),
                       max_crosscheck_error=max(r.crosscheck_error for r in rows),
                       phi_surge=b.phi)
    # surge
    if (args.g is None) == (args.phi_star is None):
        raise UsageError("compressor surge needs exactly one of --g or --phi-star")
    g = args.g if args.g is not None else g_for_equilibrium(args.phi_star, p)
    t_end = args.t_end if args.t_end is not None else 300.0
    eq = equilibrium_for_g(g, p)
    traj, cycle = surge_experiment(g, p, t_end)
    out = outcome(traj, [eq.phi, eq.psi], 1e-6)
    if args.csv:
        emit_csv(traj, args.csv)
    if args.svg:
        emit_svg(PlotSeries.single("Surge experiment phase plane", "phi", "psi",
                                   traj.x[:, 0], traj.x[:, 1], label="trajectory"), args.svg)
    return _report("compressor surge", {"g": g, "t_end": t_end, "perturbation": 0.01},
                   params=_params_json(p),
                   equilibrium={"phi": eq.phi, "psi": eq.psi},
                   outcome=out.kind,
                   limit_cycle={"detected": cycle.detected, "amplitude": cycle.amplitude,
                                "period": cycle.period, "peaks": cycle.peaks,
                                "reason": cycle.reason},
                   trajectory={"termination": traj.termination, "samples": len(traj.t)})


class _ReportedFailure(Exception):
    def __init__(self, report):
        super().__init__(report.get("message", "analysis failed"))
        self.report = report


def _required(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="eqstab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eqstab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, region=True):
        p.add_argument("--file", help="system-definition file")
        p.add_argument("--builtin", help=f"built-in system ({', '.join(BUILTINS)})")
        p.add_argument("--g", type=float, help="throttle parameter for the greitzer built-in")
        if region:
            p.add_argument("--region", help="box a:b[,a:b...] (one range is broadcast)")
        p.add_argument("--grid", type=int, help="grid nodes per axis")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", help="CSV output path")
        p.add_argument("--svg", help="SVG output path")

    p = sub.add_parser("analyze", help="equilibria and extended-Jacobian verdict")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("portrait", help="trajectories from several seeds")
    common(p)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="PRNG seed for seed states")
    p.add_argument("--t-end", type=float)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("simulate", help="single trajectory")
    common(p, region=False)
    p.add_argument("--x0", help="initial state a,b,...")
    p.add_argument("--t-end", type=float)
    p.add_argument("--method", choices=("rkf45", "rk4"), default="rkf45")
    p.add_argument("--h", type=float, default=0.01, help="rk4 step")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-eig", help="Jacobian spectra over a grid")
    common(p)
    p.set_defaults(func=cmd_sweep_eig)

    p = sub.add_parser("popov", help="Popov criterion on the scalar Lur'e form")
    common(p)
    p.set_defaults(func=cmd_popov)

    p = sub.add_parser("bendixson", help="divergence sign test for planar systems")
    common(p)
    p.set_defaults(func=cmd_bendixson)

    p = sub.add_parser("compressor", help="Greitzer compressor analyses")
    p.add_argument("action", choices=("characteristic", "boundary", "sweep", "surge"))
    p.add_argument("--g", type=float)
    p.add_argument("--phi-star", type=float, help="equilibrium flow (alternative to --g)")
    p.add_argument("--t-end", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--psi-c0", type=float, default=0.352)
    p.add_argument("--H", type=float, default=0.18)
    p.add_argument("--W", type=float, default=0.25)
    p.add_argument("--B", type=float, default=0.8)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_compressor)
    return parser


def _emit(report, args, stdout):
    text = dumps_report(report)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or _sys.stdout
    stderr = stderr or _sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
    except UsageError as exc:
        stderr.write(f"eqstab: error: {exc}\n")
        return 2
    except _ReportedFailure as exc:
        _emit(exc.report, args, stdout)
        stderr.write(f"eqstab: {exc}\n")
        return 1
    except (EqstabError, ValueError, KeyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        failure = _report(args.command, {}, status="error", error=str(exc))
        _emit(failure, args, stdout)
        stderr.write(f"eqstab: analysis failed: {exc}\n")
        return 1
    except OSError as exc:
        stderr.write(f"eqstab: cannot write output: {exc}\n")
        return 1
    try:
        _emit(report, args, stdout)
    except OSError as exc:
        stderr.write(f"eqstab: cannot write output: {exc}\n")
        return 1
    return 0


def main():
    _sys.exit(run_cli())


if __name__ == "__main__":
    main()
