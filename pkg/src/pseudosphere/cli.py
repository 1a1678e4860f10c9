"""Command-line driver.

Subcommands: build, lift, bianchi, verify, export, sweep.  Exit codes:
0 success, 1 verification failure, 2 configuration/domain error,
3 numeric failure during computation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bianchi as bt
from . import codazzi as cz
from . import fieldcalc as fc
from . import geometry as gm
import pseudosphere.lift as lf
from . import serialization as sz
from . import verify as vf
from .errors import (
    BlowUp,
    ConfigError,
    DegenerateImmersion,
    DomainViolation,
    GridTooSmall,
    KernelVanishes,
    LeftDomain,
    NoDegeneracy,
    NonFiniteEntry,
    NotHorospherical,
    OriginSingularity,
    PathInconsistency,
    PivotLoss,
    RankAmbiguous,
    SeedDegenerate,
    SpecMismatch,
)

CONFIG_ERRORS = (ConfigError, DomainViolation, GridTooSmall, ValueError)
NUMERIC_ERRORS = (
    BlowUp, PivotLoss, PathInconsistency, NonFiniteEntry, RankAmbiguous,
    NotHorospherical, SeedDegenerate, KernelVanishes, LeftDomain,
    OriginSingularity, DegenerateImmersion, NoDegeneracy, SpecMismatch,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_spec_args(p, required=True):
    p.add_argument("--example", type=int, choices=(1, 2), required=required,
                   help="surface family (1 or 2)")
    p.add_argument("--a", type=float, default=2.0,
                   help="family-2 parameter, must be > 1")
    p.add_argument("--n1", type=int, default=129)
    p.add_argument("--n2", type=int, default=129)
    p.add_argument("--c0", type=float, default=None,
                   help="initial b22 level on the starting line")
    p.add_argument("--v1-min", type=float, default=None)
    p.add_argument("--v1-max", type=float, default=None)
    p.add_argument("--v2-min", type=float, default=None)
    p.add_argument("--v2-max", type=float, default=None)
    p.add_argument("--out", type=Path, default=Path("out"),
                   help="output directory")


def _add_lift_args(p):
    p.add_argument("--n3", type=int, default=lf.DEFAULT_N3)
    p.add_argument("--v3-min", type=float, default=lf.DEFAULT_V3_RANGE[0])
    p.add_argument("--v3-max", type=float, default=lf.DEFAULT_V3_RANGE[1])


def make_spec(args) -> cz.SurfaceSpec:
    case = cz.EXAMPLE1 if args.example == 1 else cz.EXAMPLE2
    custom = [args.v1_min, args.v1_max, args.v2_min, args.v2_max]
    if any(v is not None for v in custom):
        if any(v is None for v in custom):
            raise ConfigError(
                "either give all four of --v1-min/--v1-max/--v2-min/--v2-max "
                "or none")
        domain = fc.Grid2(args.v1_min, args.v1_max, args.v2_min, args.v2_max,
                          args.n1, args.n2)
        return cz.SurfaceSpec(case, domain, a=args.a, c0=args.c0)
    base = cz.default_spec(case, a=args.a, n1=args.n1, n2=args.n2)
    if args.c0 is None:
        return base
    return cz.SurfaceSpec(case, base.domain, a=args.a, c0=args.c0)


def _tolerances(args) -> vf.Tolerances:
    return vf.Tolerances(
        algebraic=getattr(args, "tol_algebraic", 1e-10),
        pointwise=getattr(args, "tol_pointwise", 5e-4),
        curvature=getattr(args, "tol_curvature", 5e-3),
    )


def _outdir(args) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_build(args):
    spec = make_spec(args)
    out = _outdir(args)
    surface = cz.build_surface(spec)
    sz.save_surface(out / "surface.csv", surface)
    sz.save_codazzi(out / "codazzi.csv", surface.solution)
    sz.write_manifest(
        out / "manifest.json", spec, vf.Tolerances().to_dict(),
        ["surface.csv", "codazzi.csv"], vf.__version__,
        extra={"command": "build",
               "metric_residual": surface.metric_residual,
               "codazzi_residual": surface.codazzi_residual,
               "path_deviation": surface.path_deviation})
    print(f"built {spec.case}: metric residual {surface.metric_residual:.3e},"
          f" reduced-system residual {surface.codazzi_residual:.3e}")
    print(f"wrote surface.csv, codazzi.csv, manifest.json to {out}")
    return EXIT_OK


def cmd_lift(args):
    spec = make_spec(args)
    out = _outdir(args)
    surface = cz.build_surface(spec)
    lifted = lf.lift(surface, spec, v3_range=(args.v3_min, args.v3_max),
                     n3=args.n3)
    sz.save_surface(out / "surface.csv", surface)
    sz.save_codazzi(out / "codazzi.csv", surface.solution)
    sz.save_immersion(out / "lift.csv", lifted.x)
    g_err = float(np.max(np.abs(
        gm.induced_metric(lifted.x).g
        - lf.lift_metric_reference(spec, lifted.grid))[lifted.grid.interior()]))
    sz.write_manifest(
        out / "manifest.json", spec, vf.Tolerances().to_dict(),
        ["surface.csv", "codazzi.csv", "lift.csv"], vf.__version__,
        extra={"command": "lift", "grid3": lifted.grid.to_dict(),
               "lift_metric_error": g_err})
    print(f"lifted {spec.case}: metric error vs closed form {g_err:.3e}")
    print(f"wrote lift.csv (+ surface/codazzi) to {out}")
    return EXIT_OK


def cmd_bianchi(args):
    spec = make_spec(args)
    out = _outdir(args)
    surface = cz.build_surface(spec)
    lifted = lf.lift(surface, spec, v3_range=(args.v3_min, args.v3_max),
                     n3=args.n3)
    result = bt.bianchi_transform(lifted.x)
    inter = lifted.grid.interior()
    sig = result.ranks.sigmas
    stats = {
        "rank2_fraction": result.ranks.rank_fraction(2, inter),
        "sigma3_over_sigma1_max":
            float(np.max((sig[..., 2] / sig[..., 0])[inter])),
        "sigma2_over_sigma1_min":
            float(np.min((sig[..., 1] / sig[..., 0])[inter])),
        "affine_span_dim": fc.affine_span_dim(result.image.values[inter]),
    }
    sz.save_immersion(out / "image.csv", result.image)
    sz.write_manifest(
        out / "manifest.json", spec, vf.Tolerances().to_dict(),
        ["image.csv"], vf.__version__,
        extra={"command": "bianchi", "grid3": lifted.grid.to_dict(),
               "rank_summary": stats})
    print(f"transformed {spec.case}: rank-2 fraction "
          f"{stats['rank2_fraction']:.4f}, affine span "
          f"{stats['affine_span_dim']}")
    print(f"wrote image.csv, manifest.json to {out}")
    return EXIT_OK


def cmd_verify(args):
    if args.sweep_a:
        return cmd_sweep(args)
    spec = make_spec(args)
    out = _outdir(args)
    tols = _tolerances(args)
    report = vf.verify_example(spec, n3=args.n3, tols=tols)
    ident = vf.verify_case_identification(spec, n3=args.n3, tols=tols)
    report.checks.extend(ident.checks)
    sz.write_json(out / "report.json", report.to_dict())
    (out / "report.txt").write_text(report.summary() + "\n")
    print(report.summary())
    print(f"wrote report.json, report.txt to {out}")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_sweep(args):
    out = _outdir(args)
    values = tuple(float(v) for v in args.sweep_a.split(","))
    if any(v <= 1.0 for v in values):
        raise ConfigError("sweep parameters must satisfy a > 1")
    report = vf.sweep_image_curvature(values, n=args.sweep_n)
    sz.write_json(out / "sweep.json", report.to_dict())
    rows = report.checks[0].measured
    print(f"{'a':>6}  {'K measured':>14}  {'K expected':>14}  {'max err':>10}")
    for r in rows:
        print(f"{r['a']:>6}  {r['K_measured']:>14.8f}  "
              f"{r['K_expected']:>14.8f}  {r['max_error']:>10.2e}")
    print(report.summary())
    print(f"wrote sweep.json to {out}")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_export(args):
    out = _outdir(args)
    files = []
    if args.control_beltrami:
        grid = fc.Grid2(0.5, 2.0, 0.0, 2.0 * np.pi, args.n1, args.n2)
        x = bt.beltrami_surface(grid)
        sz.export_obj_mesh(out / "beltrami.obj", x.values)
        files.append("beltrami.obj")
        result = bt.bianchi_transform(x)
        span = fc.affine_span_dim(result.image.values)
        if span <= 1:
            # image collapsed to a curve: emit its centerline as a polyline
            center = result.image.values.mean(axis=1)
            sz.export_obj_polyline(out / "beltrami_image.obj", center)
        else:
            sz.export_obj_mesh(out / "beltrami_image.obj",
                               result.image.values)
        files.append("beltrami_image.obj")
        sz.write_json(out / "export.json",
                      {"files": sorted(files), "beltrami_image_span": span,
                       "version": vf.__version__})
        print(f"Beltrami control: image affine span {span} -> "
              f"{'polyline' if span <= 1 else 'mesh'}")
        print(f"wrote {', '.join(files)} to {out}")
        return EXIT_OK

    if args.example is None:
        raise ConfigError("export needs --example 1|2 or --control-beltrami")
    spec = make_spec(args)
    surface = cz.build_surface(spec)
    sz.export_obj_mesh(out / "surface.obj", surface.x.values)
    files.append("surface.obj")
    lifted = lf.lift(surface, spec, v3_range=(args.v3_min, args.v3_max),
                     n3=args.n3)
    mid = lifted.grid.n3 // 2
    sz.export_obj_mesh(out / "lift_slice.obj",
                       lifted.x.values[:, :, mid, :3])
    files.append("lift_slice.obj")
    result = bt.bianchi_transform(lifted.x)
    imsurf = bt.image_surface(result)
    sz.export_obj_mesh(out / "image.obj", imsurf.values)
    files.append("image.obj")
    _, K = gm.shape_operator(imsurf)
    sz.export_curvature_attribute(out / "image.curv", K)
    files.append("image.curv")
    sz.write_json(out / "export.json",
                  {"files": sorted(files), "spec": spec.to_dict(),
                   "version": vf.__version__})
    print(f"wrote {', '.join(files)} to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="pseudosphere",
        description="Construct pseudo-spherical submanifolds of R^5, apply "
                    "the Bianchi transformation, and verify the geometry.")
    sub = p.add_subparsers(dest="command", required=True)

    pb = sub.add_parser("build", help="solve the reduced system and "
                        "reconstruct the base surface")
    _add_spec_args(pb)
    pb.set_defaults(func=cmd_build)

    pl = sub.add_parser("lift", help="build and lift to R^5")
    _add_spec_args(pl)
    _add_lift_args(pl)
    pl.set_defaults(func=cmd_lift)

    pt = sub.add_parser("bianchi", help="apply the Bianchi transformation")
    _add_spec_args(pt)
    _add_lift_args(pt)
    pt.set_defaults(func=cmd_bianchi)

    pv = sub.add_parser("verify", help="run the full verification battery")
    _add_spec_args(pv)
    _add_lift_args(pv)
    pv.add_argument("--tol-pointwise", type=float, default=5e-4)
    pv.add_argument("--tol-curvature", type=float, default=5e-3)
    pv.add_argument("--tol-algebraic", type=float, default=1e-10)
    pv.add_argument("--sweep-a", type=str, default=None,
                    help="comma-separated parameter list; runs the "
                         "curvature sweep instead of the single-case battery")
    pv.add_argument("--sweep-n", type=int, default=65)
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("sweep", help="image-curvature parameter sweep")
    ps.add_argument("--sweep-a", type=str, default="1.5,2,4,8",
                    help="comma-separated parameter values (each > 1)")
    ps.add_argument("--sweep-n", type=int, default=65)
    ps.add_argument("--out", type=Path, default=Path("out"))
    ps.set_defaults(func=cmd_sweep)

    pe = sub.add_parser("export", help="export OBJ meshes")
    _add_spec_args(pe, required=False)
    _add_lift_args(pe)
    pe.add_argument("--control-beltrami", action="store_true",
                    help="export the classical tractrix control instead")
    pe.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        print(f"numeric failure ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
