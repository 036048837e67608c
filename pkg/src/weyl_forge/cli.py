"""Command-line front end: ``weyl-forge <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 numerical failure (diagnostics on
standard error).  Every run writes a JSON manifest next to its outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io as wio
from .axis_measure import AxisMeasure, total_mass
from .constraints import (conformal_scalar_residual, hamiltonian_defect, momentum_defect,
                          refinement_study, surface_jet)
from .embedding import (EmbeddingConfig, MetricProfile, dirichlet_map, embed_profile,
                        embed_profile_general)
from .errors import WeylForgeError
from .harmonic_field import HarmonicField
from .inverse_solver import (BartnikTarget, InverseConfig, UnknownVector, degradation_threshold,
                             h_scaling_scan, initial_unknowns, scan_table, small_h_probe,
                             solve_bartnik_inverse)
from .masses import mass_report
from .profile_geometry import BoundaryData, ProfileCurve, flat_boundary_data, induced_boundary_data
from .weyl_metric import SolutionConfig, WeylSolution

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _load_config(path):
    return {} if path is None else wio.read_json(path)


def _load_solution(args, cfg):
    """WeylSolution from --measure (axis measure JSON) or --field (field or solution JSON)."""
    sol_cfg = SolutionConfig.from_dict(cfg.get("solution", {}))
    if getattr(args, "measure", None) and getattr(args, "field", None):
        raise UsageError("give either --measure or --field, not both")
    if getattr(args, "measure", None):
        return WeylSolution.from_measure(AxisMeasure.from_dict(wio.read_json(args.measure)), sol_cfg)
    if getattr(args, "field", None):
        doc = wio.read_json(args.field)
        if "field" in doc:
            if "config" in doc:
                sol_cfg = SolutionConfig.from_dict(doc["config"])
            doc = doc["field"]
        return WeylSolution(HarmonicField.from_dict(doc), sol_cfg)
    return WeylSolution.flat()


def _load_curve(args):
    if getattr(args, "curve", None):
        return ProfileCurve.from_csv(Path(args.curve).read_text())
    if getattr(args, "sphere", None) is not None:
        return ProfileCurve.sphere(args.sphere, args.nodes)
    raise UsageError("a curve is required (--curve FILE or --sphere RADIUS)")


def _inputs(args, *names):
    return [getattr(args, n) for n in names if getattr(args, n, None)]


def _out_dir(args):
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _finish(manifest, args, name):
    manifest.finish()
    manifest.write(Path(args.out_dir) / f"{name}.manifest.json")


def _print_table(rows):
    for key, val in rows:
        print(f"{key},{val}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solution(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("solution", cfg, _inputs(args, "measure", "field", "config"))
    sol = _load_solution(args, cfg)
    doc = {"field": sol.field.to_dict(),
           "config": {"r_anchor_factor": sol.config.r_anchor_factor, "quad_tol": sol.config.quad_tol},
           "adm_mass": sol.adm_mass()}
    out = man.add_output(wio.write_text(_out_dir(args) / args.out, wio.canonical_json(doc)))
    _print_table([("adm_mass", repr(sol.adm_mass())), ("total_mass", repr(total_mass(sol.field.measure))),
                  ("output", out)])
    _finish(man, args, "solution")
    return EXIT_OK


def cmd_boundary_data(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("boundary-data", cfg, _inputs(args, "measure", "field", "curve", "config"))
    sol = _load_solution(args, cfg)
    curve = _load_curve(args)
    data = induced_boundary_data(sol, curve)
    out = _out_dir(args)
    man.add_output(wio.write_text(out / args.out, data.to_csv()))
    rep = mass_report(sol, curve)
    man.add_output(wio.write_text(out / (Path(args.out).stem + ".masses.json"), wio.canonical_json(rep.to_dict())))
    if args.plot:
        from .plotting import plot_boundary_data
        man.add_output(plot_boundary_data(data, out / args.plot, title="boundary data"))
    _print_table([(k, repr(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()])
    _finish(man, args, "boundary-data")
    return EXIT_OK


def cmd_masses(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("masses", cfg, _inputs(args, "measure", "field", "curve", "config"))
    rep = mass_report(_load_solution(args, cfg), _load_curve(args))
    man.add_output(wio.write_text(_out_dir(args) / args.out, wio.canonical_json(rep.to_dict())))
    _print_table([(k, repr(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()])
    _finish(man, args, "masses")
    return EXIT_OK


def cmd_verify(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("verify", cfg, _inputs(args, "measure", "field", "curve", "config"))
    sol = _load_solution(args, cfg)
    curve = _load_curve(args)
    study = refinement_study(sol, curve, n_coarse=args.n_coarse, n_fine=args.n_fine)
    rows = []
    for name, (coarse, fine) in study.items():
        rows.append((name, coarse.n, coarse.sup_residual, fine.n, fine.sup_residual, fine.refinement_slope))
    # conformal trace at points between the curve and a larger copy of it
    rng = np.random.default_rng(args.seed)
    theta = rng.uniform(0.2, np.pi - 0.2, args.points)
    r0, z0 = curve.point_at(theta)
    scale = rng.uniform(1.1, 2.0, args.points)
    pts = np.column_stack([np.abs(r0) * scale, z0 * scale])
    trace = conformal_scalar_residual(sol, pts)
    rows.append(("conformal_trace", args.points, trace.sup_residual, "", "", ""))
    print("identity,n_coarse,sup_coarse,n_fine,sup_fine,slope")
    for row in rows:
        print(",".join("" if v == "" else (repr(v) if isinstance(v, float) else str(v)) for v in row))
    rep = mass_report(sol, curve)
    _print_table([(k, repr(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()])
    out = _out_dir(args)
    if args.out:
        lines = ["identity,n_coarse,sup_coarse,n_fine,sup_fine,slope"]
        lines += [",".join("" if v == "" else (repr(v) if isinstance(v, float) else str(v)) for v in row)
                  for row in rows]
        man.add_output(wio.write_text(out / args.out, "\n".join(lines) + "\n"))
    if args.plot:
        from .plotting import plot_residuals
        jet = surface_jet(sol, curve.resampled(args.n_fine))
        man.add_output(plot_residuals(jet.theta, {"hamiltonian": hamiltonian_defect(jet),
                                                  "momentum": momentum_defect(jet)},
                                      out / args.plot, title="constraint residuals"))
    _finish(man, args, "verify")
    worst = max(fine.sup_residual for _, fine in study.values())
    if not worst <= args.tol:
        print(f"constraint residual {worst:.3e} exceeds {args.tol:.1e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_embed(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("embed", cfg, _inputs(args, "profile", "field", "measure", "config"))
    profile = MetricProfile.from_csv(Path(args.profile).read_text())
    ecfg = EmbeddingConfig.from_dict(cfg.get("embedding", cfg))
    if args.general:
        sol = _load_solution(args, cfg)
        result = embed_profile_general(profile, sol, ecfg)
    else:
        if args.field or args.measure:
            raise UsageError("--field/--measure need --general")
        result = embed_profile(profile, ecfg)
    out = _out_dir(args)
    reps = result.representatives if args.emit_all else result.representatives[:1]
    files = []
    for k, rep in enumerate(reps):
        files.append(man.add_output(wio.write_text(out / f"{args.prefix}_{k}.csv", rep.curve.to_csv())))
    doc = result.to_dict()
    doc["files"] = files
    man.add_output(wio.write_text(out / f"{args.prefix}.json", wio.canonical_json(doc)))
    if args.plot:
        from .plotting import plot_profiles
        man.add_output(plot_profiles([r.curve for r in reps], out / args.plot,
                                     labels=[r.label for r in reps], title=f"multiplicity: {result.multiplicity}"))
    _print_table([("multiplicity", result.multiplicity), ("representatives", result.count),
                  ("max_round_trip_residual", repr(max(result.round_trip_residuals)))])
    _finish(man, args, "embed")
    return EXIT_OK


def _inverse_config(cfg):
    return InverseConfig.from_dict(cfg.get("inverse", cfg))


def cmd_invert(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("invert", cfg, _inputs(args, "target", "initial", "config"))
    icfg = _inverse_config(cfg)
    target = BartnikTarget.from_boundary_data(BoundaryData.from_csv(Path(args.target).read_text()),
                                              "external file")
    target.validate()
    initial = (UnknownVector.from_dict(wio.read_json(args.initial)) if args.initial
               else initial_unknowns(target, icfg))
    rep = solve_bartnik_inverse(target, initial, icfg)
    out = _out_dir(args)
    man.add_output(wio.write_text(out / args.out, wio.canonical_json(rep.to_dict(timing=False))))
    if rep.curve is not None:
        man.add_output(wio.write_text(out / (Path(args.out).stem + ".curve.csv"), rep.curve.to_csv()))
    if args.plot and rep.curve is not None:
        from .plotting import plot_profiles
        man.add_output(plot_profiles([rep.curve], out / args.plot, labels=[rep.status], title="solved boundary"))
    man.extra["solve_seconds"] = rep.wall_time
    _print_table([("status", rep.status), ("resid_sup", repr(rep.resid_sup)),
                  ("iterations", rep.iterations), ("min_u", repr(rep.min_u)), ("min_H", repr(rep.min_H))])
    _finish(man, args, "invert")
    if not rep.converged:
        print(f"inverse solve did not converge: {rep.status} (residual {rep.resid_sup:.3e})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _parse_grid(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc


def cmd_scan(args):
    cfg = _load_config(args.config)
    man = wio.RunManifest.start("scan", cfg, _inputs(args, "target", "config"))
    icfg = _inverse_config(cfg)
    data = BoundaryData.from_csv(Path(args.target).read_text())
    gamma = (data.theta, data.alpha, data.beta)
    grid = _parse_grid(args.grid)
    jobs = args.jobs or os.cpu_count() or 1
    continuation = not args.no_continuation
    if args.kind == "h-scaling":
        values = sorted(grid)
        reports = h_scaling_scan(gamma, data.H, values, icfg, continuation=continuation, jobs=jobs)
        xlabel = "lambda"
    else:
        values = sorted(grid, reverse=True)
        reports = small_h_probe(gamma, values, icfg, continuation=continuation, jobs=jobs)
        xlabel = "h"
    out = _out_dir(args)
    man.add_output(wio.write_text(out / args.out, scan_table(values, reports, timing=args.timings)))
    man.extra["seconds"] = [rep.wall_time for rep in reports]
    if args.kind == "h-scaling":
        man.extra["lambda_star"] = degradation_threshold(values, reports)
        print(f"lambda_star,{man.extra['lambda_star']}")
    if args.plot:
        from .plotting import plot_scan
        man.add_output(plot_scan(values, reports, out / args.plot, xlabel=xlabel, title=args.kind))
    sys.stdout.write(scan_table(values, reports, timing=args.timings))
    _finish(man, args, "scan")
    return EXIT_OK


# ---------------------------------------------------------------------------
# self tests: the trivial examples of each subcommand's module
# ---------------------------------------------------------------------------

def _check(name, ok):
    print(f"{'PASS' if ok else 'FAIL'} {name}")
    return bool(ok)


def _selftest_solution():
    oks = [
        _check("empty measure has zero mass", total_mass(AxisMeasure.empty()) == 0.0),
        _check("empty measure potential vanishes", WeylSolution.flat().field.jet(0.4, 0.3)[0] == 0.0),
        _check("flat lambda vanishes", WeylSolution.flat().lambda_eval(1.0, 0.5) == 0.0),
    ]
    return all(oks)


def _selftest_boundary_data():
    d = induced_boundary_data(WeylSolution.flat(), ProfileCurve.sphere(1.0, 65))
    d2 = flat_boundary_data(ProfileCurve.sphere(2.0, 65))
    return all([
        _check("flat unit sphere alpha = 1", np.max(np.abs(d.alpha - 1.0)) <= 1e-10),
        _check("flat unit sphere beta = sin", np.max(np.abs(d.beta - np.sin(d.theta))) <= 1e-10),
        _check("flat unit sphere H = 2", np.max(np.abs(d.H - 2.0)) <= 1e-10),
        _check("flat sphere radius 2 H = 1", np.max(np.abs(d2.H - 1.0)) <= 1e-10),
    ])


def _selftest_masses():
    rep = mass_report(WeylSolution.flat(), ProfileCurve.sphere(1.0, 65))
    return all([
        _check("flat unit sphere adm = 0", rep.adm == 0.0),
        _check("flat unit sphere hawking = 0", abs(rep.hawking) <= 1e-10),
        _check("flat unit sphere area = 4 pi", abs(rep.boundary_area - 4 * np.pi) <= 1e-10),
        _check("horizon equivalent mass = 1/2", abs(rep.horizon_equiv_mass - 0.5) <= 1e-10),
    ])


def _selftest_verify():
    from .constraints import hamiltonian_residual, momentum_residual
    jet = surface_jet(WeylSolution.flat(), ProfileCurve.sphere(1.0, 65))
    s2 = np.sin(jet.theta) ** 2
    return all([
        _check("flat unit sphere A = gamma, H = 2, K = 1",
               max(np.max(np.abs(jet.A_thth - 1.0)), np.max(np.abs(jet.A_phph - s2)),
                   np.max(np.abs(jet.H - 2.0)), np.max(np.abs(jet.K - 1.0))) <= 1e-7),
        # sixth-order differences on 65 nodes: grid tolerance is about 1e-8
        _check("flat sphere hamiltonian residual", hamiltonian_residual(jet).sup_residual <= 1e-7),
        _check("flat sphere momentum residual", momentum_residual(jet).sup_residual <= 1e-7),
    ])


def _selftest_embed():
    from .errors import Inadmissible
    prof = MetricProfile.from_functions(lambda t: np.ones_like(t), np.sin)
    res = embed_profile(prof)
    c = res.curves[0]
    ok_sphere = res.multiplicity == "unique" and np.max(np.abs(c.r - np.sin(c.theta))) <= 1e-10 \
        and np.max(np.abs(np.abs(c.z) - np.abs(np.cos(c.theta)))) <= 1e-10
    ell = dirichlet_map(ProfileCurve.from_functions(np.sin, lambda t: 2 * np.cos(t)))
    ok_ell = np.max(np.abs(ell.alpha - np.sqrt(np.cos(ell.theta) ** 2 + 4 * np.sin(ell.theta) ** 2))) <= 1e-10
    try:
        embed_profile(MetricProfile.from_functions(lambda t: np.ones_like(t), lambda t: 1.5 * np.sin(t)))
        rejected = False
    except Inadmissible:
        rejected = True
    general = embed_profile_general(prof, WeylSolution.flat())
    return all([
        _check("round sphere embeds uniquely", ok_sphere),
        _check("flat ellipse metric", ok_ell),
        _check("beta' > alpha rejected", rejected),
        _check("zero field reduces to flat embedding",
               np.max(np.abs(general.curves[0].z - c.z)) <= 1e-12),
    ])


def _selftest_invert():
    from .inverse_solver import bartnik_forward
    d1 = bartnik_forward(UnknownVector.sphere(1.0, 12, 12, 24))
    d2 = bartnik_forward(UnknownVector.sphere(1.7, 12, 12, 24))
    return all([
        _check("zero strengths, unit sphere -> (1, sin, 2)",
               np.max(np.abs(d1.alpha - 1)) <= 1e-10 and np.max(np.abs(d1.H - 2)) <= 1e-9),
        _check("zero strengths, sphere a -> (a, a sin, 2/a)",
               np.max(np.abs(d2.alpha - 1.7)) <= 1e-10 and np.max(np.abs(d2.H - 2 / 1.7)) <= 1e-9),
    ])


def _selftest_scan():
    from .errors import NotMorse
    d = flat_boundary_data(ProfileCurve.sphere(1.0, 65))
    try:
        small_h_probe((d.theta, d.alpha, d.beta), [0.5])
        refused = False
    except NotMorse:
        refused = True
    return all([
        _check("empty h grid gives empty table", small_h_probe((d.theta, d.alpha, d.beta), []) == []),
        _check("round metric refused as not Morse", refused),
    ])


SELFTESTS = {
    "solution": _selftest_solution,
    "boundary-data": _selftest_boundary_data,
    "masses": _selftest_masses,
    "verify": _selftest_verify,
    "embed": _selftest_embed,
    "invert": _selftest_invert,
    "scan": _selftest_scan,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, source=True, curve=True):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out-dir", default=".", help="directory for outputs and the manifest")
    p.add_argument("--selftest", action="store_true", help="run this subcommand's built-in checks")
    if source:
        p.add_argument("--measure", help="axis measure JSON")
        p.add_argument("--field", help="harmonic field or solution JSON")
    if curve:
        p.add_argument("--curve", help="profile curve CSV (theta,r,z)")
        p.add_argument("--sphere", type=float, help="use a coordinate sphere of this radius")
        p.add_argument("--nodes", type=int, default=65, help="nodes for --sphere")


def build_parser():
    ap = _Parser(prog="weyl-forge", description="Weyl static vacuum metrics and their Bartnik data.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solution", help="build a solution from an axis measure or field")
    _add_common(p, curve=False)
    p.add_argument("--out", default="solution.json")
    p.set_defaults(func=cmd_solution)

    p = sub.add_parser("boundary-data", help="induced (alpha, beta, H) on a profile surface")
    _add_common(p)
    p.add_argument("--out", default="boundary_data.csv")
    p.add_argument("--plot", help="also render alpha, beta, H to this image file")
    p.set_defaults(func=cmd_boundary_data)

    p = sub.add_parser("masses", help="ADM, Hawking and horizon-equivalent masses")
    _add_common(p)
    p.add_argument("--out", default="masses.json")
    p.set_defaults(func=cmd_masses)

    p = sub.add_parser("verify", help="constraint residuals with a refinement study")
    _add_common(p)
    p.add_argument("--n-coarse", type=int, default=65)
    p.add_argument("--n-fine", type=int, default=129)
    p.add_argument("--points", type=int, default=10, help="interior points for the conformal trace check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--out", help="also write the residual table to this CSV")
    p.add_argument("--plot", help="render nodal residuals to this image file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("embed", help="isometric embedding of a metric profile")
    _add_common(p, curve=False)
    p.add_argument("--profile", required=False, help="metric profile CSV (theta,alpha,beta)")
    p.add_argument("--general", action="store_true", help="embed into the Weyl space of --field/--measure")
    p.add_argument("--emit-all", action="store_true", help="write every representative")
    p.add_argument("--prefix", default="embed")
    p.add_argument("--plot", help="render the representatives to this image file")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("invert", help="solve for (curve, sources) with given Bartnik data")
    _add_common(p, source=False, curve=False)
    p.add_argument("--target", required=False, help="boundary data CSV (theta,alpha,beta,H)")
    p.add_argument("--initial", help="initial unknowns JSON")
    p.add_argument("--out", default="invert.json")
    p.add_argument("--plot", help="render the solved boundary to this image file")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("scan", help="h-scaling scan or small-h probe")
    _add_common(p, source=False, curve=False)
    p.add_argument("--target", required=False,
                   help="boundary data CSV; gamma from (alpha, beta), H_base from H")
    p.add_argument("--kind", choices=("h-scaling", "small-h"), default="h-scaling")
    p.add_argument("--grid", default="0.5,1,2", help="comma-separated lambda or h values")
    p.add_argument("--jobs", type=int, default=0,
                   help="worker processes (default: logical cores); used only with --no-continuation")
    p.add_argument("--no-continuation", action="store_true", help="solve grid values independently")
    p.add_argument("--timings", action="store_true", help="fill the seconds column (breaks byte-identity)")
    p.add_argument("--out", default="scan.csv")
    p.add_argument("--plot", help="render the scan diagnostics to this image file")
    p.set_defaults(func=cmd_scan)
    return ap


_REQUIRED = {"embed": ("profile",), "invert": ("target",), "scan": ("target",)}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.selftest:
            return EXIT_OK if SELFTESTS[args.command]() else EXIT_NUMERIC
        for name in _REQUIRED.get(args.command, ()):
            if not getattr(args, name):
                raise UsageError(f"--{name} is required")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        # unreadable or malformed input files
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WeylForgeError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())
