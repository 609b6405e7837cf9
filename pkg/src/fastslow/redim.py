"""Reaction-diffusion manifolds by projected pseudo-time relaxation.

A 1-D manifold is a graph (theta, Y(theta), Z(theta)) over theta = X, a 2-D
manifold a graph Z(theta1, theta2) over (theta1, theta2) = (X, Y).  Keeping
the graph coordinates frozen and evolving only the remaining components with

    d(psi_k)/dtau = G_k - sum_j (d psi_k / d theta_j) G_{theta_j},
    G = source + local diffusion,

is equivalent, at stationarity, to the projected evolution
(I - Psi_theta Psi_theta^+) G = 0 for non-degenerate graphs; the projector
identities and the co-vanishing of both residuals are enforced by tests
rather than assumed.

The local diffusion closure needs the spatial gradients of the manifold
parameters; by default they are interpolated from a detailed stationary
profile (chi(theta) = dX/dx at the x where X(x) = theta), with a constant
override available.

Relaxation uses explicit RK4 with per-node stable steps (diffusion CFL on
the theta grid, source spectral-radius bound, and an advective limit for the
graph-correction term).  Per-node steps only recondition the pseudo-time
path: the converged manifold satisfies the same pointwise residual test as
with a global step, and reaches it orders of magnitude sooner when the
gradient estimate is strongly non-uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ReactionDiffusionModel, SpatialProfile, as_state
from .errors import (
    BoundaryNodeError,
    ContractViolationError,
    ConvergenceError,
    DegenerateParametrizationError,
    ParametrizationError,
)

__all__ = [
    "GradientEstimate",
    "Manifold1D",
    "Manifold2D",
    "pseudo_inverse",
    "tangent_projector",
    "gradient_estimate_from_profile",
    "constant_gradient",
    "local_diffusion_1d",
    "local_diffusion_2d",
    "redim_rhs_1d",
    "evolve_redim_1d",
    "evolve_redim_2d",
]

GRAM_COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# projector algebra
# ---------------------------------------------------------------------------

def pseudo_inverse(Psi_theta) -> np.ndarray:
    """Moore-Penrose pseudo-inverse (Psi^T Psi)^{-1} Psi^T of a tall full-rank
    tangent matrix."""
    P = np.array(Psi_theta, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    gram = P.T @ P
    if np.linalg.cond(gram) > GRAM_COND_LIMIT:
        raise DegenerateParametrizationError(
            "tangent matrix is rank deficient (Gram condition number too large)"
        )
    return np.linalg.solve(gram, P.T)


def tangent_projector(Psi_theta) -> np.ndarray:
    """Orthogonal projector I - Psi Psi^+ onto the normal space of the graph."""
    P = np.array(Psi_theta, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    return np.eye(P.shape[0]) - P @ pseudo_inverse(P)


# ---------------------------------------------------------------------------
# gradient-estimate closure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientEstimate:
    """Spatial gradients of the manifold parameters as functions of theta1.

    ``knots`` are increasing theta1 values; ``values`` is (K,) for 1-D mode
    (dX/dx) or (K, 2) for 2-D mode (dX/dx, dY/dx).  Outside the knot range
    the nearest value extends constantly.  A constant estimate uses a single
    pair of knots.
    """

    mode: str
    knots: np.ndarray
    values: np.ndarray

    def chi1(self, theta) -> np.ndarray:
        v = self.values if self.mode == "1d" else self.values[:, 0]
        return np.interp(np.asarray(theta, dtype=float), self.knots, v)

    def chi2(self, theta) -> np.ndarray:
        if self.mode != "2d":
            raise ContractViolationError("chi2 requires a 2-D gradient estimate")
        return np.interp(np.asarray(theta, dtype=float), self.knots, self.values[:, 1])


def constant_gradient(values, mode: str = "1d") -> GradientEstimate:
    """Constant chi (1-D) or constant (chi1, chi2) pair (2-D)."""
    knots = np.array([0.0, 1.0])
    if mode == "1d":
        v = float(np.atleast_1d(values)[0])
        return GradientEstimate("1d", knots, np.array([v, v]))
    if mode == "2d":
        pair = np.atleast_1d(np.asarray(values, dtype=float))
        if pair.size == 1:
            pair = np.array([pair[0], pair[0]])
        return GradientEstimate("2d", knots, np.array([pair, pair]))
    raise ContractViolationError(f"unknown gradient mode {mode!r}")


def gradient_estimate_from_profile(profile: SpatialProfile,
                                   parametrization: str = "1d") -> GradientEstimate:
    """Derive chi from a detailed stationary profile via the map x -> X(x).

    Requires X strictly monotone along x; the derivative dX/dx (and dY/dx in
    2-D mode) is taken by central differences on the x grid and re-indexed by
    theta = X.
    """
    if parametrization not in ("1d", "2d"):
        raise ContractViolationError(f"unknown parametrization {parametrization!r}")
    x = profile.grid.nodes
    X = profile.states[:, 0]
    dX = np.diff(X)
    if np.all(dX > 0.0):
        flip = False
    elif np.all(dX < 0.0):
        flip = True
    else:
        raise ParametrizationError(
            "profile X component is not strictly monotone in x"
        )
    dXdx = np.gradient(X, x)
    if parametrization == "1d":
        knots, values = X, dXdx
    else:
        dYdx = np.gradient(profile.states[:, 1], x)
        knots, values = X, np.stack([dXdx, dYdx], axis=1)
    if flip:
        knots, values = knots[::-1], values[::-1]
    return GradientEstimate(parametrization, knots.copy(), np.array(values))


# ---------------------------------------------------------------------------
# manifold containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Manifold1D:
    """Graph-form curve (theta, Y, Z) with chi sampled on the theta grid."""

    theta_grid: np.ndarray
    states: np.ndarray   # (M, n); states[:, 0] == theta_grid
    chi: np.ndarray      # (M,)

    def __post_init__(self):
        if self.theta_grid.shape[0] < 3:
            raise ContractViolationError("need at least 3 theta nodes")
        if self.states.shape[0] != self.theta_grid.shape[0]:
            raise ContractViolationError("states/theta length mismatch")

    @property
    def spacing(self) -> float:
        return float(self.theta_grid[1] - self.theta_grid[0])


@dataclass(frozen=True)
class Manifold2D:
    """Graph-form surface Z(theta1, theta2) with per-node gradient closure."""

    theta1_grid: np.ndarray
    theta2_grid: np.ndarray
    Z_values: np.ndarray   # (M1, M2)
    chi1: np.ndarray       # (M1, M2)
    chi2: np.ndarray       # (M1, M2)

    def __post_init__(self):
        M1, M2 = self.theta1_grid.shape[0], self.theta2_grid.shape[0]
        if M1 < 3 or M2 < 3:
            raise ContractViolationError("need at least 3 nodes per theta axis")
        if self.Z_values.shape != (M1, M2):
            raise ContractViolationError("Z_values shape mismatch")

    @property
    def spacing(self):
        return (float(self.theta1_grid[1] - self.theta1_grid[0]),
                float(self.theta2_grid[1] - self.theta2_grid[0]))

    def state(self, i: int, j: int) -> np.ndarray:
        return np.array([self.theta1_grid[i], self.theta2_grid[j], self.Z_values[i, j]])


# ---------------------------------------------------------------------------
# local diffusion and the 1-D projected RHS
# ---------------------------------------------------------------------------

def local_diffusion_1d(manifold: Manifold1D, model: ReactionDiffusionModel,
                       j: int) -> np.ndarray:
    """delta * chi^2 * Psi_thetatheta at an interior theta node.

    The first (graph) component is identically zero: X == theta is linear in
    theta, so its second derivative vanishes analytically.
    """
    M = manifold.theta_grid.shape[0]
    if not 0 < j < M - 1:
        raise BoundaryNodeError(f"theta node {j} is not interior")
    dth = manifold.spacing
    S = manifold.states
    sec = (S[j - 1] - 2.0 * S[j] + S[j + 1]) / (dth * dth)
    out = model.diffusion * (manifold.chi[j] ** 2) * sec
    out[0] = 0.0
    return out


def local_diffusion_2d(manifold: Manifold2D, model: ReactionDiffusionModel,
                       i: int, j: int) -> float:
    """Gradient-contracted Hessian of Z at an interior node, scaled by delta.

    Only the Z component is nonzero: the X = theta1 and Y = theta2 components
    have vanishing theta-Hessians.
    """
    M1, M2 = manifold.theta1_grid.shape[0], manifold.theta2_grid.shape[0]
    if not (0 < i < M1 - 1 and 0 < j < M2 - 1):
        raise BoundaryNodeError(f"node ({i}, {j}) is not interior")
    d1, d2 = manifold.spacing
    Zv = manifold.Z_values
    z11 = (Zv[i - 1, j] - 2.0 * Zv[i, j] + Zv[i + 1, j]) / (d1 * d1)
    z22 = (Zv[i, j - 1] - 2.0 * Zv[i, j] + Zv[i, j + 1]) / (d2 * d2)
    z12 = (Zv[i + 1, j + 1] - Zv[i + 1, j - 1] - Zv[i - 1, j + 1] + Zv[i - 1, j - 1]) / (4.0 * d1 * d2)
    c1, c2 = manifold.chi1[i, j], manifold.chi2[i, j]
    delta = float(model.diffusion[-1])
    return delta * (c1 * c1 * z11 + 2.0 * c1 * c2 * z12 + c2 * c2 * z22)


def redim_rhs_1d(manifold: Manifold1D, model: ReactionDiffusionModel, j: int):
    """Graph-form normal evolution rate (dY, dZ) at an interior node."""
    M = manifold.theta_grid.shape[0]
    if not 0 < j < M - 1:
        raise BoundaryNodeError(f"theta node {j} is not interior")
    dth = manifold.spacing
    S = manifold.states
    G = model.source(S[j]) + local_diffusion_1d(manifold, model, j)
    Y_t = (S[j + 1, 1] - S[j - 1, 1]) / (2.0 * dth)
    Z_t = (S[j + 1, 2] - S[j - 1, 2]) / (2.0 * dth)
    return G[1] - Y_t * G[0], G[2] - Z_t * G[0]


# ---------------------------------------------------------------------------
# vectorized relaxation internals
# ---------------------------------------------------------------------------

def _rhs_1d_interior(states, chi, dth, model):
    """(M, n) array of graph-form rates; boundary rows zero."""
    out = np.zeros_like(states)
    sec = (states[:-2] - 2.0 * states[1:-1] + states[2:]) / (dth * dth)
    L = model.diffusion * (chi[1:-1, None] ** 2) * sec
    L[:, 0] = 0.0
    G = model.source(states[1:-1]) + L
    slope = (states[2:] - states[:-2]) / (2.0 * dth)
    out[1:-1, 1:] = G[:, 1:] - slope[:, 1:] * G[:, [0]]
    return out


def _node_dt_1d(states, chi, dth, model, safety):
    """Per-node stable step: diffusion CFL, source bound, advective limit."""
    J = model.jacobian(states)
    rho = np.abs(J).sum(axis=-1).max(axis=-1)
    dmax = float(model.diffusion.max())
    diff_rate = 2.0 * dmax * chi * chi / (dth * dth)
    adv_rate = np.abs(model.source(states)[:, 0]) / dth
    rate = np.maximum(np.maximum(diff_rate, 0.5 * rho), adv_rate)
    return safety / np.maximum(rate, 1e-300)


def evolve_redim_1d(model: ReactionDiffusionModel, anchors, M: int = 101,
                    grad: GradientEstimate | None = None, tol: float = 1e-8,
                    safety: float = 0.8, max_steps: int = 2_000_000,
                    local_dt: bool = True) -> Manifold1D:
    """Relax the straight-line initial curve to a stationary 1-D manifold.

    ``anchors`` are (left_state, right_state); their first components set the
    theta range and both endpoints stay Dirichlet-pinned throughout.
    """
    left = as_state(anchors[0], model.dimension)
    right = as_state(anchors[1], model.dimension)
    if left[0] == right[0]:
        raise ContractViolationError("anchors must differ in the graph coordinate")
    if grad is None:
        grad = constant_gradient(0.0, "1d")
    theta = np.linspace(left[0], right[0], M)
    dth = float(theta[1] - theta[0])
    frac = (theta - left[0]) / (right[0] - left[0])
    states = left + np.outer(frac, right - left)
    states[:, 0] = theta
    states[0] = left
    states[-1] = right
    chi = np.asarray(grad.chi1(theta), dtype=float)

    dt = None
    for nstep in range(max_steps + 1):
        k1 = _rhs_1d_interior(states, chi, dth, model)
        if nstep % 50 == 0:
            residual = float(np.abs(k1[1:-1, 1:]).max())
            if residual < tol:
                return Manifold1D(theta_grid=theta, states=states, chi=chi)
            node_dt = _node_dt_1d(states, chi, dth, model, safety)
            dt = node_dt[:, None] if local_dt else float(node_dt.min())
        k2 = _rhs_1d_interior(states + 0.5 * dt * k1, chi, dth, model)
        k3 = _rhs_1d_interior(states + 0.5 * dt * k2, chi, dth, model)
        k4 = _rhs_1d_interior(states + dt * k3, chi, dth, model)
        states = states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(states)):
            raise ConvergenceError("1-D manifold relaxation diverged")
    raise ConvergenceError(
        f"1-D manifold not stationary after {max_steps} steps",
        residual=float(np.abs(_rhs_1d_interior(states, chi, dth, model)[1:-1, 1:]).max()),
    )


def _d1(A, d, axis):
    """First derivative along an axis: central interior, one-sided 2nd-order edges."""
    A = np.moveaxis(A, axis, 0)
    out = np.empty_like(A)
    out[1:-1] = (A[2:] - A[:-2]) / (2.0 * d)
    out[0] = (-3.0 * A[0] + 4.0 * A[1] - A[2]) / (2.0 * d)
    out[-1] = (3.0 * A[-1] - 4.0 * A[-2] + A[-3]) / (2.0 * d)
    return np.moveaxis(out, 0, axis)


def _d2(A, d, axis):
    """Second derivative along an axis: central interior, one-sided edges."""
    A = np.moveaxis(A, axis, 0)
    out = np.empty_like(A)
    out[1:-1] = (A[:-2] - 2.0 * A[1:-1] + A[2:]) / (d * d)
    out[0] = (2.0 * A[0] - 5.0 * A[1] + 4.0 * A[2] - A[3]) / (d * d)
    out[-1] = (2.0 * A[-1] - 5.0 * A[-2] + 4.0 * A[-3] - A[-4]) / (d * d)
    return np.moveaxis(out, 0, axis)


def _rhs_2d(Zv, TH1, TH2, C1, C2, d1, d2, model, frozen):
    z = np.stack([TH1, TH2, Zv], axis=-1)
    Phi = model.source(z)
    Z1 = _d1(Zv, d1, 0)
    Z2 = _d1(Zv, d2, 1)
    z11 = _d2(Zv, d1, 0)
    z22 = _d2(Zv, d2, 1)
    z12 = _d1(Z1, d2, 1)
    delta = float(model.diffusion[-1])
    LZ = delta * (C1 * C1 * z11 + 2.0 * C1 * C2 * z12 + C2 * C2 * z22)
    out = (Phi[..., 2] + LZ) - Z1 * Phi[..., 0] - Z2 * Phi[..., 1]
    out[frozen] = 0.0
    return out


def evolve_redim_2d(model: ReactionDiffusionModel, theta1_range, theta2_range,
                    M1: int = 61, M2: int = 61,
                    grad: GradientEstimate | None = None, tol: float = 1e-8,
                    initial_z=None, hold: str = "theta1",
                    safety: float = 0.8, max_steps: int = 2_000_000,
                    anchor_values=(None, None)) -> Manifold2D:
    """Relax Z(theta1, theta2) to a stationary 2-D manifold.

    Initialization is a straight line in theta1 between ``anchor_values``
    (constant along theta2) unless ``initial_z`` is given.  ``hold`` selects
    which boundary nodes stay pinned at their initial values:

    - ``"theta1"`` (default): only the theta1-extreme edges, where the
      manifold is anchored; the theta2-extreme edges relax with one-sided
      differences.  Holding all four edges pins the initialization error of
      the free edges into the solution, which is visible wherever the
      manifold hugs a theta2 edge.
    - ``"all"``: every boundary node (fully Dirichlet relaxation).
    - ``"none"``: free relaxation of the whole grid (useful without
      diffusion, where the slow manifold is pointwise attracting and needs
      no boundary data).
    """
    if hold not in ("theta1", "all", "none"):
        raise ContractViolationError(f"unknown hold mode {hold!r}")
    t1 = np.linspace(theta1_range[0], theta1_range[1], M1)
    t2 = np.linspace(theta2_range[0], theta2_range[1], M2)
    d1 = float(t1[1] - t1[0])
    d2 = float(t2[1] - t2[0])
    TH1, TH2 = np.meshgrid(t1, t2, indexing="ij")

    if initial_z is not None:
        Zv = np.array(initial_z, dtype=float)
        if Zv.shape != (M1, M2):
            raise ContractViolationError("initial_z shape mismatch")
    else:
        z_lo, z_hi = anchor_values
        if z_lo is None or z_hi is None:
            raise ContractViolationError(
                "anchor_values (Z at theta1 endpoints) required without initial_z"
            )
        line = z_lo + (z_hi - z_lo) * (t1 - t1[0]) / (t1[-1] - t1[0])
        Zv = np.repeat(line[:, None], M2, axis=1)

    if grad is None:
        grad = constant_gradient((0.0, 0.0), "2d")
    c1_line = np.asarray(grad.chi1(t1), dtype=float)
    c2_line = np.asarray(grad.chi2(t1), dtype=float)
    C1 = np.repeat(c1_line[:, None], M2, axis=1)
    C2 = np.repeat(c2_line[:, None], M2, axis=1)

    frozen = np.zeros((M1, M2), dtype=bool)
    if hold in ("theta1", "all"):
        frozen[0, :] = frozen[-1, :] = True
    if hold == "all":
        frozen[:, 0] = frozen[:, -1] = True

    dt = None
    for nstep in range(max_steps + 1):
        k1 = _rhs_2d(Zv, TH1, TH2, C1, C2, d1, d2, model, frozen)
        if nstep % 50 == 0:
            residual = float(np.abs(k1[~frozen]).max()) if (~frozen).any() else 0.0
            if residual < tol:
                return Manifold2D(theta1_grid=t1, theta2_grid=t2, Z_values=Zv,
                                  chi1=C1, chi2=C2)
            z = np.stack([TH1, TH2, Zv], axis=-1)
            Phi = model.source(z)
            rho = np.abs(model.jacobian(z)).sum(axis=-1).max(axis=-1)
            delta = float(model.diffusion[-1])
            diff_rate = 2.0 * delta * (np.abs(C1) / d1 + np.abs(C2) / d2) ** 2
            adv_rate = np.abs(Phi[..., 0]) / d1 + np.abs(Phi[..., 1]) / d2
            rate = np.maximum(np.maximum(diff_rate, rho * 0.5), adv_rate)
            dt = safety / np.maximum(rate, 1e-300)
        k2 = _rhs_2d(Zv + 0.5 * dt * k1, TH1, TH2, C1, C2, d1, d2, model, frozen)
        k3 = _rhs_2d(Zv + 0.5 * dt * k2, TH1, TH2, C1, C2, d1, d2, model, frozen)
        k4 = _rhs_2d(Zv + dt * k3, TH1, TH2, C1, C2, d1, d2, model, frozen)
        Zv = Zv + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(Zv)):
            raise ConvergenceError("2-D manifold relaxation diverged")
    raise ConvergenceError(
        f"2-D manifold not stationary after {max_steps} steps",
        residual=float(np.abs(_rhs_2d(Zv, TH1, TH2, C1, C2, d1, d2, model, frozen)[~frozen]).max()),
    )
