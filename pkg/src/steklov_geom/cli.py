"""Command-line interface: ``steklov-geom <command> ...``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__, zoo
from .bounds import BoundsError, bound_report, hyperbolic_constants
from .cheeger import CheegerError, level_set_sweep
from .dtn_eigen import SolverError, mixed_spectrum, steklov_spectrum
from .fem import AssemblyError, assemble_stiffness, dump_coo
from .spectra import collar_mixed, cylinder_mixed, cylinder_steklov, rho
from .surface import HyperbolicCollar, SurfaceError, build_surface, geometric_data, spec_from_dict, triangulate
from .verify import SUITES, Workbench, resolve_suites, run

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_surface(args):
    """Return ``(surface, zoo_entry_or_None)`` from ``--surface`` or ``--zoo``."""
    if args.zoo:
        try:
            entry = zoo.get(args.zoo)
        except KeyError as exc:
            raise InputError(str(exc)) from exc
        return entry.surface(), entry
    if not args.surface:
        raise InputError("give --surface PATH or --zoo NAME")
    try:
        with open(args.surface) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read surface spec: {exc}") from exc
    if isinstance(doc, dict) and "surface" in doc:
        doc = doc["surface"]
    spec, scale = spec_from_dict(doc)
    return build_surface(spec, scale, name=args.surface), None


def _mesh_size(surface, args) -> float:
    if args.h is not None:
        if not args.h > 0:
            raise InputError("--h must be positive")
        return args.h
    a = max(surface.boundary_lengths)
    return 0.02 * (min(a, surface.L) if surface.L > 0 else a)


def _strip_depth(surface, args) -> float:
    if getattr(args, "strip_depth", None) is not None:
        return args.strip_depth
    t0, t1 = surface.t_range
    half = 0.5 * (t1 - t0)
    return surface.depth if 0 < surface.depth < half else 0.5 * half


def cmd_spectrum(args) -> int:
    surface, _ = _load_surface(args)
    mesh = triangulate(surface, _mesh_size(surface, args), quadrature=args.quadrature)
    if args.problem == "steklov":
        K = assemble_stiffness(mesh)
        res = steklov_spectrum(mesh, args.k, K)
        target = mesh
    else:
        target = mesh.boundary_strips(_strip_depth(surface, args), cut_label=2)
        K = assemble_stiffness(target)
        res = mixed_spectrum(target, (0, 1), (2,), args.problem, args.k, K)
    if args.dump_matrix:
        dump_coo(K, args.dump_matrix)
    if args.eigenfunction:
        _write(res.eigenfunction_csv(target, args.index), args.eigenfunction)
    _write(res.to_csv(), args.output)
    return EXIT_OK


def cmd_closed_form(args) -> int:
    if args.family == "rho":
        _write(f"{rho()!r}\n", None)
        return EXIT_OK
    if args.family == "cylinder":
        spec = cylinder_steklov(args.R, args.T, args.k)
    elif args.family == "collar":
        spec = collar_mixed(args.a, args.kind, args.k)
    else:
        spec = cylinder_mixed(args.a, args.L, args.kind, args.k)
    _write(spec.to_csv(), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        resolve_suites(args.suite)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc

    def progress(rec):
        if not args.quiet:
            print(f"{rec.verdict:>14}  {rec.check_id}", file=sys.stderr)

    report = run(args.suite, args.h, Workbench(args.h), on_record=progress)
    _write(report.to_json(timings=args.timings), args.report)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_constants(args) -> int:
    rep = hyperbolic_constants(args.g, args.b)
    _write(rep.to_json() if args.format == "json" else rep.to_csv(), args.output)
    return EXIT_OK


def cmd_bounds(args) -> int:
    surface, _ = _load_surface(args)
    mesh = triangulate(surface, _mesh_size(surface, args))
    res = steklov_spectrum(mesh, args.k)
    geom = geometric_data(surface, mesh)
    rep = bound_report(geom, res.sigma, tol=args.tol, collar=isinstance(surface.spec, HyperbolicCollar))
    _write(rep.to_json() if args.format == "json" else rep.to_csv(), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    surface, _ = _load_surface(args)
    mesh = triangulate(surface, _mesh_size(surface, args))
    res = steklov_spectrum(mesh, max(1, args.index))
    sweep = level_set_sweep(mesh, res.extensions[:, args.index])
    _write(sweep.to_csv(), args.output)
    return EXIT_OK


def _surface_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--surface", help="path to a JSON surface spec")
    g.add_argument("--zoo", help="name of a built-in surface preset")
    p.add_argument("--h", type=float, default=None, help="target edge length (default 0.02*min(a, L))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steklov-geom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="FEM Steklov or mixed spectrum as CSV (k, sigma, residual)")
    _surface_args(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--problem", choices=["steklov", "N", "D"], default="steklov",
                   help="mixed problems are solved on the boundary strips")
    p.add_argument("--strip-depth", type=float, default=None)
    p.add_argument("--quadrature", choices=["centroid", "midpoint"], default="centroid")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--eigenfunction", default=None, help="write the harmonic extension of eigenpair --index")
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--dump-matrix", default=None, help="write the stiffness matrix as 'row col value' lines")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("closed-form", help="closed-form spectra and the constant rho")
    fam = p.add_subparsers(dest="family", required=True)
    c = fam.add_parser("cylinder")
    c.add_argument("--R", type=float, required=True)
    c.add_argument("--T", type=float, required=True)
    c.add_argument("--k", type=int, default=6)
    c.add_argument("--output", "-o", default=None)
    fam.add_parser("rho")
    c = fam.add_parser("collar")
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--kind", choices=["N", "D"], default="N")
    c.add_argument("--k", type=int, default=6)
    c.add_argument("--output", "-o", default=None)
    c = fam.add_parser("mixed", help="flat strip of boundary length a and depth L")
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--L", type=float, required=True)
    c.add_argument("--kind", choices=["N", "D"], default="N")
    c.add_argument("--k", type=int, default=6)
    c.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("verify", help="run acceptance suites over the surface zoo")
    p.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES + ('all',))}")
    p.add_argument("--report", default="verification-report.json")
    p.add_argument("--h", type=float, default=None, help="mesh factor: h = factor*min(a, L) (default 0.02)")
    p.add_argument("--timings", action="store_true", help="include per-check runtimes (breaks byte-identity)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("constants", help="constants of the hyperbolic bound for signature (g, b)")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("bounds", help="evaluate every bound against the FEM spectrum")
    _surface_args(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="level-set sweep of an eigenfunction as CSV")
    _surface_args(p)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SurfaceError, BoundsError, CheegerError, AssemblyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
