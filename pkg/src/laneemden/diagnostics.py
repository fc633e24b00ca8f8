"""Structural checks on computed extremals: linearized gap, sup-norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assembly
from .errors import ConfigError
from .mesh import Mesh
from .minimizer import ExtremalSolution
from .sparse import smallest_eig_constrained

RESIDUAL_PRECONDITION = 1e-4


@dataclass
class GapReport:
    level: int
    p: float
    gap: float
    positive: bool


def nondegeneracy_gap(mesh: Mesh, solution: ExtremalSolution, p: float,
                      tol: float = 1e-6) -> GapReport:
    """Smallest eigenvalue of the linearized operator K - (p-1) W against K,
    constrained to the energy-orthogonal complement of the extremal.

    A positive gap is the discrete counterpart of non-degeneracy of the
    minimizer; W is the mass matrix weighted by |U|^(p-2).
    """
    if solution.fixed_point_residual > RESIDUAL_PRECONDITION:
        raise ConfigError(
            f"extremal residual {solution.fixed_point_residual:.2e} too large "
            f"for a meaningful gap (need <= {RESIDUAL_PRECONDITION})"
        )
    K = assembly.assemble_stiffness(mesh)
    W = assembly.assemble_weighted_mass(mesh, solution.field, p - 2.0)
    A = assembly.restrict_interior(K.add(W, -(p - 1.0)), mesh)
    B = assembly.restrict_interior(K, mesh)
    c = solution.field[mesh.interior]
    if not np.any(c):
        # degenerate zero input: quotient reduces to x'Kx / x'Kx = 1
        return GapReport(level=mesh.level, p=p, gap=1.0, positive=True)
    gap = smallest_eig_constrained(A, B, c, tol=tol)
    return GapReport(level=mesh.level, p=p, gap=gap, positive=gap > 0.0)


def linf_norm(mesh: Mesh, u: np.ndarray) -> float:
    """Sup norm of a P1 field (attained at a vertex)."""
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        return 0.0
    return float(np.abs(u).max())
