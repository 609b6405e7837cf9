"""Built-in reference models and the equilibrium solver.

Two models are provided: the 3-species Michaelis-Menten enzyme system used
throughout, and a linear shifted model ``F(z) = A (z - z*)`` which has
closed-form behaviour and serves as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ReactionDiffusionModel, as_state, eval_source
from .errors import ContractViolationError, ConvergenceError, SingularJacobianError

__all__ = [
    "MichaelisMentenParams",
    "michaelis_menten_source",
    "michaelis_menten_model",
    "linear_model",
    "equilibrium",
    "MM_SPECIES",
]

MM_SPECIES = ("X", "Y", "Z")


@dataclass(frozen=True)
class MichaelisMentenParams:
    """Rate-constant ratios and the common diffusion coefficient."""

    L1: float = 0.99
    L2: float = 1.0
    L3: float = 0.05
    L4: float = 0.1
    mu: float = 1.0
    delta: float = 0.01

    def __post_init__(self):
        if min(self.L1, self.L2, self.L3, self.L4, self.mu) <= 0.0:
            raise ContractViolationError("rate-constant ratios must be positive")
        if self.L1 == 1.0:
            raise ContractViolationError("L1 = 1 destroys the isolated equilibrium")
        if self.delta < 0.0:
            raise ContractViolationError("diffusion coefficient must be >= 0")

    def asdict(self) -> dict:
        return {
            "L1": self.L1, "L2": self.L2, "L3": self.L3,
            "L4": self.L4, "mu": self.mu, "delta": self.delta,
        }


def michaelis_menten_source(params: MichaelisMentenParams, z) -> np.ndarray:
    """Reaction rates of the 3-species enzyme system, vectorized over states.

    The Z component is the (1/L2)-weighted combination of the X balance and
    mu times the Y balance, which makes (0, sqrt(3)-1, sqrt(3)-1) an exact
    equilibrium for the default parameters.
    """
    z = np.asarray(z, dtype=float)
    X, Y, Z = z[..., 0], z[..., 1], z[..., 2]
    p = params
    fY = -p.L3 * Y * Z + (p.L4 / p.L2) * (1.0 - Y)
    fX = -X * Z + p.L1 * (1.0 - Z - p.mu * (1.0 - Y))
    fZ = (1.0 / p.L2) * ((-X * Z + 1.0 - Z - p.mu * (1.0 - Y)) + p.mu * fY)
    return np.stack([fX, fY, fZ], axis=-1)


def michaelis_menten_jacobian(params: MichaelisMentenParams, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    X, Y, Z = z[..., 0], z[..., 1], z[..., 2]
    p = params
    o = np.zeros_like(X)
    dY_dY = -p.L3 * Z - p.L4 / p.L2
    dY_dZ = -p.L3 * Y
    row_x = np.stack([-Z, p.L1 * p.mu + o, -X - p.L1], axis=-1)
    row_y = np.stack([o, dY_dY + o, dY_dZ], axis=-1)
    row_z = np.stack(
        [-Z / p.L2,
         (p.mu / p.L2) * (1.0 + dY_dY),
         (1.0 / p.L2) * (-X - 1.0 + p.mu * dY_dZ)],
        axis=-1,
    )
    return np.stack([row_x, row_y, row_z], axis=-2)


def michaelis_menten_model(params: MichaelisMentenParams | None = None) -> ReactionDiffusionModel:
    """The enzyme model with its analytic Jacobian and working box."""
    p = params or MichaelisMentenParams()
    lo = np.array([0.0, 0.0, 0.0])
    hi = np.array([2.0, 1.0, 1.0])
    return ReactionDiffusionModel(
        name="michaelis-menten",
        species=MM_SPECIES,
        source=lambda z: michaelis_menten_source(p, z),
        jac=lambda z: michaelis_menten_jacobian(p, z),
        diffusion=np.full(3, p.delta),
        working_box=(lo, hi),
        params=p.asdict(),
    )


def linear_model(A, z_star, diffusion=None, name: str = "linear") -> ReactionDiffusionModel:
    """Shifted linear model F(z) = A (z - z*); Newton is exact in one step."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolationError("A must be a square matrix")
    n = A.shape[0]
    z_star = as_state(z_star, n)
    eig = np.linalg.eigvals(A)
    if np.any(np.abs(eig.real) < 1e-14):
        raise ContractViolationError("A must have no eigenvalue with zero real part")
    if diffusion is None:
        diffusion = np.zeros(n)

    def source(z):
        return (np.asarray(z, dtype=float) - z_star) @ A.T

    def jac(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(A, z.shape[:-1] + (n, n)).copy()

    return ReactionDiffusionModel(
        name=name,
        species=tuple(f"z{i+1}" for i in range(n)),
        source=source,
        jac=jac,
        diffusion=diffusion,
        params={"A": A.tolist(), "z_star": z_star.tolist()},
    )


def equilibrium(model: ReactionDiffusionModel, initial_guess, tol: float = 1e-12,
                max_iter: int = 100) -> np.ndarray:
    """Newton solve of source(z) = 0 with 0.5 step damping on non-decrease."""
    if tol <= 0.0:
        raise ContractViolationError("tol must be positive")
    z = np.array(as_state(initial_guess, model.dimension))
    res = eval_source(model, z)
    for _ in range(max_iter):
        rnorm = np.abs(res).max()
        if rnorm < tol:
            out = z.copy()
            out.setflags(write=False)
            return out
        J = model.jacobian(z)
        try:
            dz = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(
                f"singular Jacobian at iterate {z}"
            ) from exc
        step = 1.0
        for _ in range(60):
            z_new = z + step * dz
            res_new = eval_source(model, z_new)
            if np.abs(res_new).max() < rnorm:
                break
            step *= 0.5
        else:
            raise ConvergenceError(
                "Newton damping failed to reduce the residual", residual=rnorm
            )
        z, res = z_new, res_new
    raise ConvergenceError(
        f"no equilibrium after {max_iter} Newton iterations",
        residual=float(np.abs(res).max()),
    )
