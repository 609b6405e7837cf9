"""Method-of-lines solver for the 1-D reaction-diffusion system.

Explicit RK4 stepping with an enforced stability bound: the step must stay
below both the diffusion limit dx^2 / (2 max D) and 2 / rho, where rho bounds
the source Jacobian spectral radius (Gershgorin row sums over all nodes).
Boundary nodes are Dirichlet-held and never evolve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    Grid1D,
    ReactionDiffusionModel,
    SpatialProfile,
    as_state,
    interior_full_rhs,
)
from .errors import (
    BoundaryNodeError,
    ContractViolationError,
    ConvergenceError,
    DivergenceError,
    StabilityError,
)

__all__ = [
    "BoundaryConditions",
    "SolverSettings",
    "SteadyResult",
    "laplacian",
    "linear_initial_profile",
    "stable_dt",
    "step",
    "integrate_to_steady",
]


@dataclass(frozen=True)
class BoundaryConditions:
    """Dirichlet values at x = 0 and x = 1."""

    left_state: np.ndarray
    right_state: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "left_state", as_state(self.left_state))
        object.__setattr__(self, "right_state", as_state(self.right_state))
        if self.left_state.shape != self.right_state.shape:
            raise ContractViolationError("boundary states must have equal dimension")


@dataclass(frozen=True)
class SolverSettings:
    node_count: int = 101
    dt_safety: float = 0.8
    steady_tol: float = 1e-8
    max_time: float = 1e4

    def __post_init__(self):
        if self.node_count < 3:
            raise ContractViolationError("node_count must be >= 3")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ContractViolationError("dt_safety must lie in (0, 1]")
        if self.steady_tol < 0.0:
            raise ContractViolationError("steady_tol must be >= 0")


@dataclass(frozen=True)
class SteadyResult:
    profile: SpatialProfile
    elapsed_time: float
    residual_history: tuple  # ((t, residual), ...) logged every 100 steps
    steps: int
    wall_seconds: float


def laplacian(profile: SpatialProfile, node_index: int) -> np.ndarray:
    """Second central difference at an interior node, componentwise."""
    N = profile.grid.node_count
    if not 0 < node_index < N - 1:
        raise BoundaryNodeError(f"node {node_index} is not interior")
    S = profile.states
    dx = profile.grid.spacing
    return (S[node_index - 1] - 2.0 * S[node_index] + S[node_index + 1]) / (dx * dx)


def linear_initial_profile(left, right, grid: Grid1D) -> SpatialProfile:
    """Straight lines joining the boundary states, componentwise."""
    left = as_state(left)
    right = as_state(right)
    x = grid.nodes
    states = left + np.outer(x, right - left)
    states[0] = left     # endpoints exact regardless of rounding in the blend
    states[-1] = right
    return SpatialProfile(grid, states)


def source_spectral_radius_bound(model: ReactionDiffusionModel, states: np.ndarray) -> float:
    """Gershgorin row-sum bound on |lambda| of the source Jacobian, max over nodes."""
    J = model.jacobian(states)
    return float(np.abs(J).sum(axis=-1).max())


def stable_dt(model: ReactionDiffusionModel, profile: SpatialProfile,
              safety: float = 1.0) -> float:
    """Largest admissible step: safety * min(dx^2/(2 max D), 2/rho)."""
    dx = profile.grid.spacing
    dmax = float(model.diffusion.max())
    diff_limit = dx * dx / (2.0 * dmax) if dmax > 0.0 else np.inf
    rho = source_spectral_radius_bound(model, profile.states)
    src_limit = 2.0 / rho if rho > 0.0 else np.inf
    return safety * min(diff_limit, src_limit)


def _rk4_states(model: ReactionDiffusionModel, states: np.ndarray, dx: float,
                dt: float) -> np.ndarray:
    k1 = interior_full_rhs(model, states, dx)
    k2 = interior_full_rhs(model, states + (0.5 * dt) * k1, dx)
    k3 = interior_full_rhs(model, states + (0.5 * dt) * k2, dx)
    k4 = interior_full_rhs(model, states + dt * k3, dx)
    return states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(profile: SpatialProfile, model: ReactionDiffusionModel, dt: float,
         dt_safety: float = 1.0) -> SpatialProfile:
    """One explicit RK4 step of all interior nodes; boundaries copied unchanged."""
    if dt <= 0.0:
        raise ContractViolationError("dt must be positive")
    limit = stable_dt(model, profile, safety=dt_safety)
    if dt > limit:
        raise StabilityError(f"dt = {dt:g} exceeds stable bound {limit:g}")
    new_states = _rk4_states(model, profile.states, profile.grid.spacing, dt)
    if not np.all(np.isfinite(new_states)):
        raise DivergenceError("integration produced non-finite values")
    return profile.with_states(new_states)


def integrate_to_steady(model: ReactionDiffusionModel, bc: BoundaryConditions,
                        settings: SolverSettings | None = None) -> SteadyResult:
    """March the linear initial profile to stationarity.

    Convergence is judged by the sup-norm of the full interior RHS, checked
    (and logged) every 100 steps; the step size is refreshed on the same
    cadence from the current stability bound.
    """
    settings = settings or SolverSettings()
    grid = Grid1D(settings.node_count)
    profile = linear_initial_profile(bc.left_state, bc.right_state, grid)
    states = np.array(profile.states)
    dx = grid.spacing
    t = 0.0
    nstep = 0
    history = []
    dt = None
    wall0 = time.perf_counter()
    while True:
        k1 = interior_full_rhs(model, states, dx)
        if nstep % 100 == 0:
            residual = float(np.abs(k1[1:-1]).max())
            history.append((t, residual))
            if residual < settings.steady_tol:
                break
            if t > settings.max_time:
                raise ConvergenceError(
                    f"no stationary profile by t = {settings.max_time:g}",
                    residual=residual,
                )
            snapshot = SpatialProfile(grid, states)
            dt = stable_dt(model, snapshot, safety=settings.dt_safety)
        k2 = interior_full_rhs(model, states + (0.5 * dt) * k1, dx)
        k3 = interior_full_rhs(model, states + (0.5 * dt) * k2, dx)
        k4 = interior_full_rhs(model, states + dt * k3, dx)
        states = states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(states)):
            raise DivergenceError(f"integration diverged at t = {t:g}")
        t += dt
        nstep += 1
    return SteadyResult(
        profile=SpatialProfile(grid, states),
        elapsed_time=t,
        residual_history=tuple(history),
        steps=nstep,
        wall_seconds=time.perf_counter() - wall0,
    )
