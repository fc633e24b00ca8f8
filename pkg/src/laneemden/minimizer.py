"""Normalized gradient descent for the discrete Sobolev extremal.

One step: solve the Poisson problem K w = F(u) on the interior, move
u <- u - eta (u - w), renormalize to unit L^p norm.  The converged
iterate is rescaled so the Euler-Lagrange multiplier equals 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import assembly
from .errors import ConfigError, NumericsError
from .mesh import Mesh
from .sparse import SparseOperator, cg_solve

DEGENERATE_NORM = 1e-14


@dataclass
class MinimizerConfig:
    """Iteration controls; p is the main-text exponent (nonlinearity |u|^(p-2) u)."""

    p: float
    eta: float = 0.2
    max_iters: int = 400
    quotient_tol: float = 1e-10
    residual_tol: float = 1e-8
    inner_tol: float = 1e-12
    quad_degree: int = 5
    iters_fixed: Optional[int] = None  # paper-protocol mode: exactly N steps

    def __post_init__(self):
        if self.p <= 2:
            raise ConfigError(f"p must be > 2, got {self.p}")
        if not (0 < self.eta < 1):
            raise ConfigError(f"eta must be in (0, 1), got {self.eta}")
        for name in ("quotient_tol", "residual_tol", "inner_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.iters_fixed is not None and self.iters_fixed < 1:
            raise ConfigError("iters_fixed must be >= 1")


@dataclass
class ExtremalSolution:
    """Discrete extremal in both scalings, plus convergence diagnostics."""

    field: np.ndarray             # multiplier-1 scaling
    normalized_field: np.ndarray  # unit L^p norm
    c_h: float                    # discrete best constant (final quotient)
    iterations: int
    fixed_point_residual: float   # |K U - F(U)| / |F(U)| on interior nodes
    linf: float
    converged: bool


class _Workspace:
    """Per-mesh operators shared across descent steps."""

    def __init__(self, mesh: Mesh, config: MinimizerConfig):
        if mesh.interior.size == 0:
            raise ConfigError("mesh has no interior vertices")
        self.mesh = mesh
        self.config = config
        self.K = assembly.assemble_stiffness(mesh)
        self.K_int = assembly.restrict_interior(self.K, mesh)
        self.interior = mesh.interior


def initial_guess(mesh: Mesh, p: float, quad_degree: int = 5) -> np.ndarray:
    """1 on interior nodes, 0 on the boundary, scaled to unit L^p norm."""
    if mesh.interior.size == 0:
        raise ConfigError("mesh has no interior vertices")
    u = np.zeros(mesh.n_vertices)
    u[mesh.interior] = 1.0
    return u / assembly.lp_norm(mesh, u, p, quad_degree)


def rayleigh_quotient(mesh: Mesh, u: np.ndarray, p: float, quad_degree: int = 5,
                      K: Optional[SparseOperator] = None) -> float:
    """|grad u|_L2 / |u|_Lp for the P1 field u."""
    u = np.asarray(u, dtype=np.float64)
    if not np.any(u):
        raise ValueError("Rayleigh quotient undefined for the zero field")
    if K is None:
        K = assembly.assemble_stiffness(mesh)
    energy = float(u @ K.matvec(u))
    return np.sqrt(energy) / assembly.lp_norm(mesh, u, p, quad_degree)


def _normalize(ws: _Workspace, u: np.ndarray) -> np.ndarray:
    norm = assembly.lp_norm(ws.mesh, u, ws.config.p, ws.config.quad_degree)
    if norm < DEGENERATE_NORM:
        raise NumericsError("degenerate iterate: vanishing L^p norm")
    return u / norm


def _step(ws: _Workspace, u: np.ndarray, w0: Optional[np.ndarray] = None):
    """One descent + renormalization step; returns (u_next, w_interior).

    The gradient is evaluated on the multiplier-1 rescaling s u of the
    unit-norm iterate (s^(p-2) = u'Ku when |u|_p = 1), which keeps the
    inverse-Laplacian term on the same scale as u; in unit-norm variables
    this multiplies the solved field w by the current energy.  Stepping on
    the raw unit-norm iterate contracts only at a rate ~ eta / energy and
    cannot finish in the published iteration budget.
    """
    cfg = ws.config
    energy = float(u @ ws.K.matvec(u))
    F = assembly.nonlinear_load(ws.mesh, u, cfg.p, cfg.quad_degree)
    w_int, _ = cg_solve(ws.K_int, F[ws.interior], tol=cfg.inner_tol, x0=w0)
    w = assembly.extend_zero(w_int, ws.mesh)
    u_next = u - cfg.eta * (u - energy * w)
    return _normalize(ws, u_next), w_int


def descent_step(mesh: Mesh, u: np.ndarray, config: MinimizerConfig) -> np.ndarray:
    """Single normalized gradient-descent step (u must have unit L^p norm)."""
    if config.eta == 0.0:
        return np.array(u, dtype=np.float64)
    next_u, _ = _step(_Workspace(mesh, config), u)
    return next_u


def _lambda1_state(ws: _Workspace, u: np.ndarray):
    """Quotient, multiplier-1 scale, and fixed-point residual of a unit-norm iterate."""
    cfg = ws.config
    Ku = ws.K.matvec(u)
    energy = float(u @ Ku)
    quotient = np.sqrt(energy)
    F = assembly.nonlinear_load(ws.mesh, u, cfg.p, cfg.quad_degree)
    # With |u|_p = 1 the multiplier-1 scale s satisfies s^(p-2) = energy,
    # and the scaled residual reduces to |Ku - energy F| / (energy |F|).
    r = Ku[ws.interior] - energy * F[ws.interior]
    denom = energy * float(np.linalg.norm(F[ws.interior]))
    residual = float(np.linalg.norm(r)) / denom if denom > 0 else np.inf
    scale = energy ** (1.0 / (cfg.p - 2.0))
    return quotient, scale, residual


def solve_extremal(mesh: Mesh, config: MinimizerConfig,
                   u0: Optional[np.ndarray] = None) -> ExtremalSolution:
    """Iterate from the flat initial guess until the quotient stagnates.

    Stops when the relative quotient change drops below quotient_tol and
    the Euler-Lagrange residual is below residual_tol (or after exactly
    iters_fixed steps in paper-protocol mode).  Returns the best iterate
    flagged unconverged if max_iters is exhausted.
    """
    ws = _Workspace(mesh, config)
    if u0 is None:
        u = initial_guess(mesh, config.p, config.quad_degree)
    else:
        u = _normalize(ws, np.asarray(u0, dtype=np.float64))

    quotient, scale, residual = _lambda1_state(ws, u)
    converged = False
    iterations = 0
    w_int = None
    for k in range(1, config.max_iters + 1):
        u, w_int = _step(ws, u, w0=w_int)
        iterations = k
        prev = quotient
        quotient, scale, residual = _lambda1_state(ws, u)
        if config.iters_fixed is not None:
            if k >= config.iters_fixed:
                converged = True
                break
        elif (abs(quotient - prev) <= config.quotient_tol * quotient
              and residual <= config.residual_tol):
            converged = True
            break

    field = scale * u
    if field.sum() < 0.0:  # resolve the +-U dichotomy to the positive branch
        field = -field
        u = -u
    return ExtremalSolution(
        field=field,
        normalized_field=u,
        c_h=quotient,
        iterations=iterations,
        fixed_point_residual=residual,
        linf=float(np.abs(field).max()),
        converged=converged,
    )
