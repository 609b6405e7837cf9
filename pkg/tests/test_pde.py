import numpy as np
import pytest

from fastslow.core import Grid1D, SpatialProfile, eval_full_rhs
from fastslow.errors import BoundaryNodeError, ConvergenceError, DivergenceError, StabilityError
from fastslow.models import MichaelisMentenParams, michaelis_menten_model
from fastslow.pde import (
    BoundaryConditions,
    SolverSettings,
    integrate_to_steady,
    laplacian,
    linear_initial_profile,
    stable_dt,
    step,
)

YEQ = np.sqrt(3.0) - 1.0
Z_EQ = np.array([0.0, YEQ, YEQ])
Z_RIGHT = np.array([2.0, 0.0, 1.0])


def _sin_profile(n):
    g = Grid1D(n)
    return SpatialProfile(g, np.sin(np.pi * g.nodes)[:, None]), g


# ---------------------------------------------------------------------------
# laplacian
# ---------------------------------------------------------------------------

def test_laplacian_linear_profile():
    g = Grid1D(51)
    profile = SpatialProfile(g, (0.3 + 1.7 * g.nodes)[:, None])
    for i in (1, 25, 49):
        assert laplacian(profile, i)[0] == pytest.approx(0.0, abs=1e-9)


def test_laplacian_quadratic_exact():
    g = Grid1D(41)
    profile = SpatialProfile(g, (g.nodes ** 2)[:, None])
    for i in range(1, 40):
        assert laplacian(profile, i)[0] == pytest.approx(2.0, abs=1e-9)


def test_laplacian_sine_value():
    profile, g = _sin_profile(101)
    mid = 50
    val = laplacian(profile, mid)[0]
    assert abs(val - (-np.pi ** 2)) < 9e-3


def test_laplacian_second_order_convergence():
    errs = []
    for n in (101, 201):
        profile, g = _sin_profile(n)
        x = g.nodes
        errs.append(max(
            abs(laplacian(profile, i)[0] + np.pi ** 2 * np.sin(np.pi * x[i]))
            for i in range(1, n - 1)
        ))
    ratio = errs[0] / errs[1]
    assert 3.7 <= ratio <= 4.3


def test_laplacian_boundary_rejected():
    profile, _ = _sin_profile(11)
    with pytest.raises(BoundaryNodeError):
        laplacian(profile, 0)
    with pytest.raises(BoundaryNodeError):
        laplacian(profile, 10)


# ---------------------------------------------------------------------------
# initial profile
# ---------------------------------------------------------------------------

def test_initial_profile_endpoints_exact():
    profile = linear_initial_profile(Z_EQ, Z_RIGHT, Grid1D(101))
    assert np.array_equal(profile.states[0], Z_EQ)
    assert np.array_equal(profile.states[-1], Z_RIGHT)


def test_initial_profile_midpoint():
    profile = linear_initial_profile(Z_EQ, Z_RIGHT, Grid1D(101))
    mid = profile.states[50]
    assert mid == pytest.approx(0.5 * (Z_EQ + Z_RIGHT), abs=1e-14)
    assert mid == pytest.approx([1.0, 0.3660254, 0.8660254], abs=1e-7)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def test_step_fixed_point_at_equilibrium():
    m = michaelis_menten_model()
    profile = SpatialProfile(Grid1D(21), np.tile(Z_EQ, (21, 1)))
    dt = stable_dt(m, profile, safety=0.5)
    after = step(profile, m, dt)
    # interior motion is O(|phi(eq)|) ~ 1e-16 per unit time
    assert np.abs(after.states - profile.states).max() < 1e-15


def test_step_keeps_boundaries_bit_exact():
    m = michaelis_menten_model()
    profile = linear_initial_profile(Z_EQ, Z_RIGHT, Grid1D(41))
    p = profile
    for _ in range(25):
        p = step(p, m, stable_dt(m, p, safety=0.8))
    assert np.array_equal(p.states[0], profile.states[0])
    assert np.array_equal(p.states[-1], profile.states[-1])


def test_step_rejects_unstable_dt():
    m = michaelis_menten_model()
    profile = linear_initial_profile(Z_EQ, Z_RIGHT, Grid1D(41))
    with pytest.raises(StabilityError):
        step(profile, m, 1e3)


def test_step_detects_divergence():
    # a source that returns NaN while its declared Jacobian stays harmless,
    # so the stability guard cannot catch the failure first
    from fastslow.core import ReactionDiffusionModel
    m = ReactionDiffusionModel(
        name="nan-source",
        species=("a", "b"),
        source=lambda z: np.full_like(np.asarray(z, dtype=float), np.nan),
        jac=lambda z: np.zeros(np.asarray(z).shape[:-1] + (2, 2)),
        diffusion=np.zeros(2),
    )
    profile = SpatialProfile(Grid1D(5), np.ones((5, 2)))
    with pytest.raises(DivergenceError):
        step(profile, m, 1e-3)


def test_residual_decreases_over_first_steps():
    m = michaelis_menten_model()
    p = linear_initial_profile(Z_EQ, Z_RIGHT, Grid1D(101))

    def residual(profile):
        return max(
            np.abs(eval_full_rhs(m, profile, i)).max()
            for i in range(1, profile.grid.node_count - 1)
        )

    history = [residual(p)]
    for _ in range(10):
        p = step(p, m, stable_dt(m, p, safety=0.8))
        history.append(residual(p))
    assert all(b < a for a, b in zip(history, history[1:]))


# ---------------------------------------------------------------------------
# steady state
# ---------------------------------------------------------------------------

def test_steady_profile_converged(steady_101, mm_model):
    result = steady_101.value
    interior = [
        np.abs(eval_full_rhs(mm_model, result.profile, i)).max()
        for i in range(1, result.profile.grid.node_count - 1)
    ]
    assert max(interior) < 1e-8
    assert np.array_equal(result.profile.states[-1], Z_RIGHT)
    assert result.profile.states[0] == pytest.approx(Z_EQ, abs=1e-10)


def test_steady_profile_history_is_logged(steady_101):
    hist = steady_101.value.residual_history
    assert len(hist) > 10
    times = [t for t, _ in hist]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert hist[-1][1] < 1e-8 <= hist[0][1]


def test_steady_grid_refinement(steady_101, steady_201):
    coarse = steady_101.value.profile.states
    fine = steady_201.value.profile.states
    assert np.abs(fine[::2] - coarse).max() <= 1e-3


def test_zero_diffusion_equilibrium_bcs():
    m = michaelis_menten_model(MichaelisMentenParams(delta=0.0))
    bc = BoundaryConditions(Z_EQ, Z_EQ)
    result = integrate_to_steady(m, bc, SolverSettings(node_count=21))
    assert np.abs(result.profile.states - Z_EQ).max() < 1e-10
    assert result.steps == 0


def test_unreachable_tolerance_errors():
    m = michaelis_menten_model()
    bc = BoundaryConditions(Z_EQ, Z_RIGHT)
    with pytest.raises(ConvergenceError):
        integrate_to_steady(m, bc, SolverSettings(node_count=21, steady_tol=0.0, max_time=0.1))


def test_profile_x_component_monotone(steady_101):
    X = steady_101.value.profile.states[:, 0]
    assert np.all(np.diff(X) > 0.0)
