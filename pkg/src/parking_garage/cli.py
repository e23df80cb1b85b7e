"""Command-line front end: ``garage <subcommand> ...``.

Exit status 0 on success, 1 on non-convergence, 2 on parameter or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigurationError, balance_report, load_configuration, save_configuration
from .dihedral import (
    FamilyConvergenceError,
    FamilySpec,
    ParameterError,
    closed_form,
    cyclotomic_identities_check,
    lift,
    reduced_residual,
    save_json,
    solve_family,
    Family,
)
from .mesh import MeshParameterError, MeshParams, build_limit_mesh, export_height_csv, export_obj
from .solver import CollisionError, SolveOptions, random_search, solve
from .vortex import VortexCollisionError, detect_rigid_rotation, integrate

DEFAULT_SEED = 20240601


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 2 with our own message
        raise UsageError(message)


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GARAGE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"GARAGE_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _options(args: argparse.Namespace) -> SolveOptions:
    base = SolveOptions.load(args.options) if getattr(args, "options", None) else SolveOptions()
    return SolveOptions(
        max_iterations=args.max_iter if args.max_iter is not None else base.max_iterations,
        tolerance=args.tol if args.tol is not None else base.tolerance,
        damping=args.damping if args.damping is not None else base.damping,
        gauge=base.gauge,
        seed=_seed(args),
    )


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _out_path(args: argparse.Namespace) -> Path | None:
    return Path(args.output) if args.output else None


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_configuration(args.input)
    tol = args.rank_tol
    report = balance_report(cfg, tol=tol, k=args.k)
    text = _dump(report.to_dict())
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    opts = _options(args)
    out = _out_path(args)
    if args.input:
        outcome = solve(load_configuration(args.input), opts)
        print(_dump({"residual": outcome.residual_norm, "iterations": outcome.iterations,
                     "converged": outcome.converged, "message": outcome.message}))
        if out:
            save_configuration(outcome.config, out, residual=outcome.residual_norm,
                               iterations=outcome.iterations)
        return 0 if outcome.converged else 1
    if args.charges is None:
        raise UsageError("solve needs --input or --charges")
    try:
        charges = [int(c) for c in args.charges.split(",")]
    except ValueError:
        raise UsageError(f"--charges must be comma separated integers, got {args.charges!r}") from None
    results = random_search(len(charges), charges, args.trials, opts)
    payload = [r.to_dict() for r in results]
    text = _dump(payload)
    if out:
        out.write_text(text + "\n")
    print(_dump({"solutions": len(results), "residuals": [r.residual_norm for r in results]}))
    return 0 if results else 1


def cmd_dihedral(args: argparse.Namespace) -> int:
    spec = FamilySpec(Family.parse(args.family), args.k, args.n1, args.n2, args.origin_charge)
    if spec.family in (Family.KARCHER_SCHERK, Family.FISCHER_KOCH):
        d = closed_form(spec)
    else:
        d = solve_family(spec, _options(args))
    cfg = lift(d)
    summary = {
        "family": spec.to_dict(),
        "p11": float(d.radii_ray1[0]),
        "reduced": d.to_dict(),
        "reduced_residual": reduced_residual(d),
        "lifted_points": cfg.n,
    }
    print(_dump(summary))
    prefix = args.output or f"{spec.family.value}_k{spec.k}"
    save_json(d, f"{prefix}_reduced.json")
    save_configuration(cfg, f"{prefix}_lifted.json")
    return 0


def cmd_mesh(args: argparse.Namespace) -> int:
    cfg = load_configuration(args.input)
    params = MeshParams(
        neck_radius=args.neck_radius,
        sheets=args.sheets,
        radial_resolution=args.radial_resolution,
        angular_resolution=args.angular_resolution,
        outer_radius=args.outer_radius,
    )
    mesh = build_limit_mesh(cfg, params)
    out = args.output or "limit_surface.obj"
    export_obj(mesh, out)
    if args.csv:
        export_height_csv(mesh, args.csv)
    print(_dump({"obj": str(out), "vertices": int(mesh.vertices.shape[0]),
                 "triangles": int(mesh.triangles.shape[0]),
                 "components": mesh.component_names()}))
    return 0


def cmd_vortex(args: argparse.Namespace) -> int:
    cfg = load_configuration(args.input)
    if args.steps is not None:
        steps = args.steps
    else:
        steps = int(math.ceil(args.periods * 4 * math.pi**2 / args.dt))
    circ = None
    if args.circulations is not None:
        try:
            circ = [float(c) for c in args.circulations.split(",")]
        except ValueError:
            raise UsageError(f"--circulations must be comma separated numbers, got {args.circulations!r}") from None
    traj = integrate(cfg, args.dt, steps, circ)
    diag = detect_rigid_rotation(traj, args.rigid_tol)
    out = args.output or "trajectory.csv"
    traj.to_csv(out)
    text = _dump(diag.to_dict())
    print(text)
    diag_path = args.diagnostics or str(Path(out).with_suffix(".json"))
    Path(diag_path).write_text(text + "\n")
    return 0


def cmd_identities(args: argparse.Namespace) -> int:
    grid = np.linspace(0.3, 2.5, args.grid)
    worst = [0.0, 0.0]
    for k in range(args.k_min, args.k_max + 1):
        for x in grid:
            for y in grid:
                if abs(x**k - y**k) < 1e-6 * max(x, y) ** k:
                    continue
                d1, d2 = cyclotomic_identities_check(k, x, y)
                worst = [max(worst[0], d1), max(worst[1], d2)]
    print(_dump({"k_range": [args.k_min, args.k_max], "max_deviation_first": worst[0],
                 "max_deviation_second": worst[1]}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="garage", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True

    def solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-12)")
        p.add_argument("--max-iter", type=int, default=None, help="Newton iterations (default 200)")
        p.add_argument("--damping", type=float, default=None)
        p.add_argument("--options", help="SolveOptions JSON file")
        p.add_argument("--seed", type=int, default=None)

    def out_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output", "--out", dest="output")

    p = sub.add_parser("verify", help="balance report for a configuration")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=None, help="dihedral order for the genus table")
    p.add_argument("--rank-tol", type=float, default=1e-8)
    out_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="Newton solve or random multi-start search")
    p.add_argument("--input")
    p.add_argument("--charges", help="comma separated charges for a random search")
    p.add_argument("--trials", type=int, default=100)
    solver_flags(p)
    out_flag(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dihedral", help="closed-form or solved dihedral family member")
    p.add_argument("--family", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n1", type=int, default=1)
    p.add_argument("--n2", type=int, default=0)
    p.add_argument("--origin-charge", type=int, default=0, choices=(-1, 0, 1))
    solver_flags(p)
    out_flag(p)
    p.set_defaults(func=cmd_dihedral)

    p = sub.add_parser("mesh", help="OBJ mesh of the limit surface")
    p.add_argument("--input", required=True)
    p.add_argument("--sheets", type=int, default=2)
    p.add_argument("--neck-radius", type=float, default=0.1)
    p.add_argument("--radial-resolution", type=int, default=8)
    p.add_argument("--angular-resolution", type=int, default=96)
    p.add_argument("--outer-radius", type=float, default=None)
    p.add_argument("--csv", help="also write (x, y, sheet, height) samples")
    out_flag(p)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("vortex", help="point-vortex simulation with rigid-rotation check")
    p.add_argument("--input", required=True)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--periods", type=float, default=1.0, help="in units of 4 pi^2")
    p.add_argument("--circulations", help="comma separated; default = charges")
    p.add_argument("--rigid-tol", type=float, default=1e-5)
    p.add_argument("--diagnostics")
    out_flag(p)
    p.set_defaults(func=cmd_vortex)

    p = sub.add_parser("identities", help="check the roots-of-unity sums over a k-grid")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--grid", type=int, default=9)
    p.set_defaults(func=cmd_identities)
    return parser


_LIST_FLAGS = ("--charges", "--circulations")


def _glue_list_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--charges -1,1`` into ``--charges=-1,1`` so leading minus signs parse."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_list_values(argv))
        return args.func(args)
    except UsageError as exc:
        print(f"garage: error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"garage: error: cannot read {exc.filename}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"garage: error: malformed JSON: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, ParameterError, MeshParameterError, ValueError) as exc:
        print(f"garage: error: {exc}", file=sys.stderr)
        return 2
    except (FamilyConvergenceError, CollisionError, VortexCollisionError) as exc:
        print(f"garage: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
