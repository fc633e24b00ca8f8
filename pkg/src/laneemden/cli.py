"""Command-line front end: solve, study, poisson-check, diagnose."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import nondegeneracy_gap
from .errors import ConfigError, DimensionError, LaneEmdenError, MeshError, NumericsError
from .mesh import (
    Mesh,
    build_unit_square,
    mesh_from_tokens,
    read_mesh,
    refine_uniform,
)
from .minimizer import MinimizerConfig, solve_extremal
from .study import (
    poisson_center_value,
    poisson_rate_study,
    rows_to_csv,
    run_study,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def export_solution(mesh: Mesh, field: np.ndarray, path) -> None:
    """Mesh text format followed by a `values` section, one float per vertex."""
    field = np.asarray(field, dtype=np.float64)
    if field.shape != (mesh.n_vertices,):
        raise DimensionError("field length does not match mesh")
    try:
        with open(path, "w") as f:
            f.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
            for (x, y), b in zip(mesh.vertices, mesh.is_boundary):
                f.write(f"{float(x)!r} {float(y)!r} {int(b)}\n")
            for i, j, k in mesh.triangles:
                f.write(f"{i} {j} {k}\n")
            f.write("values\n")
            for v in field:
                f.write(f"{v:.17g}\n")
    except OSError as e:
        raise OSError(f"cannot write solution to {path}: {e}") from e


def import_solution(path):
    """Inverse of export_solution; returns (mesh, field)."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise OSError(f"cannot read solution from {path}: {e}") from e
    nv, nt = (int(tok) for tok in lines[0].split())
    header = 1 + nv + nt
    if len(lines) <= header or lines[header].strip() != "values":
        raise MeshError(f"{path}: missing `values` section")
    values = np.array([float(s) for s in lines[header + 1: header + 1 + nv]])
    if values.size != nv:
        raise MeshError(f"{path}: expected {nv} values")
    mesh = mesh_from_tokens(" ".join(lines[:header]).split(), where=str(path))
    return mesh, values


def _load_domain(domain: str, level: int) -> Mesh:
    if domain == "unit-square":
        return build_unit_square(level)
    if domain.startswith("mesh:"):
        mesh = read_mesh(domain[len("mesh:"):])
        for _ in range(level):
            mesh = refine_uniform(mesh)
        return mesh
    raise ConfigError(f"unknown domain {domain!r} (use unit-square or mesh:<path>)")


def _add_solver_flags(sp):
    sp.add_argument("--p", type=float, default=4.0,
                    help="exponent of the nonlinearity |u|^(p-2) u, p > 2")
    sp.add_argument("--eta", type=float, default=0.2, help="descent step size")
    sp.add_argument("--max-iters", type=int, default=400)
    sp.add_argument("--iters-fixed", type=int, default=None,
                    help="run exactly N descent steps (published protocol: 60)")
    sp.add_argument("--quotient-tol", type=float, default=1e-10)
    sp.add_argument("--inner-tol", type=float, default=1e-12)
    sp.add_argument("--quad-degree", type=int, default=5)
    sp.add_argument("--scaling", choices=["lambda1", "unit-norm"], default="lambda1")
    sp.add_argument("--domain", default="unit-square",
                    help="unit-square or mesh:<path> to a coarse mesh file")
    sp.add_argument("--out-dir", default=".", help="output directory")
    sp.add_argument("--threads", type=int, default=1,
                    help="accepted for compatibility; computation is deterministic")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="laneemden",
        description="P1 finite elements for Sobolev-inequality extremals "
                    "(ground states of the Lane-Emden equation) on convex polygons.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="compute one extremal and export it")
    _add_solver_flags(sp)
    sp.add_argument("--level", type=int, default=5, help="refinement level")

    sp = sub.add_parser("study", help="multi-level rate study (CSV output)")
    _add_solver_flags(sp)
    sp.add_argument("--levels", type=int, default=7, help="largest table row j")

    sp = sub.add_parser("poisson-check",
                        help="manufactured-solution validation of the linear solver")
    sp.add_argument("--levels", type=int, default=6, help="finest level")
    sp.add_argument("--out-dir", default=".")

    sp = sub.add_parser("diagnose", help="non-degeneracy gap of one extremal")
    _add_solver_flags(sp)
    sp.add_argument("--level", type=int, default=5)
    return ap


def _config_from_args(args) -> MinimizerConfig:
    return MinimizerConfig(
        p=args.p,
        eta=args.eta,
        max_iters=args.max_iters,
        quotient_tol=args.quotient_tol,
        inner_tol=args.inner_tol,
        quad_degree=args.quad_degree,
        iters_fixed=args.iters_fixed,
    )


def _stamp() -> str:
    return time.strftime("%Y%m%d-%H%M%S")


def _run(args) -> int:
    out_dir = Path(getattr(args, "out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "solve":
        config = _config_from_args(args)
        mesh = _load_domain(args.domain, args.level)
        sol = solve_extremal(mesh, config)
        field = sol.field if args.scaling == "lambda1" else sol.normalized_field
        path = out_dir / f"solution_p{args.p:g}_L{args.level}_{_stamp()}.txt"
        export_solution(mesh, field, path)
        print(f"level {args.level}  p {args.p:g}  c_h {sol.c_h:.10f}  "
              f"residual {sol.fixed_point_residual:.3e}  iters {sol.iterations}  "
              f"linf {sol.linf:.6f}")
        print(f"wrote {path}")
        if not sol.converged:
            print("warning: iteration did not stagnate; best iterate exported",
                  file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK

    if args.command == "study":
        config = _config_from_args(args)
        rows = run_study(args.p, args.levels, config, scaling=args.scaling,
                         progress=lambda msg: print(msg, file=sys.stderr))
        csv_text = rows_to_csv(rows)
        path = out_dir / f"study_p{args.p:g}_j{args.levels}_{_stamp()}.csv"
        path.write_text(csv_text)
        print(csv_text, end="")
        print(f"wrote {path}", file=sys.stderr)
        return EXIT_OK

    if args.command == "poisson-check":
        rows = poisson_rate_study(j_min=max(1, args.levels - 4), j_max=args.levels)
        print("j,err_l2,rate_l2,err_h1,rate_h1")
        for r in rows:
            rl2 = "" if r.rate_l2 is None else f"{r.rate_l2:.4f}"
            rh1 = "" if r.rate_h1 is None else f"{r.rate_h1:.4f}"
            print(f"{r.j},{r.err_l2:.6e},{rl2},{r.err_h1:.6e},{rh1}")
        center = poisson_center_value(level=min(args.levels, 6))
        print(f"center value (f=1, level {min(args.levels, 6)}): {center:.7f}")
        return EXIT_OK

    if args.command == "diagnose":
        config = _config_from_args(args)
        mesh = _load_domain(args.domain, args.level)
        sol = solve_extremal(mesh, config)
        report = nondegeneracy_gap(mesh, sol, args.p)
        print(f"level {report.level}  p {report.p:g}  gap {report.gap:.6e}  "
              f"positive {report.positive}")
        return EXIT_OK if report.positive else EXIT_NUMERICAL

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericsError,) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"i/o failure: {e}", file=sys.stderr)
        return EXIT_IO
    except LaneEmdenError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
