#!/usr/bin/env python3
"""Grid-refinement study: stationary profiles at N = 51, 101, 201 and the
second-order convergence of the discrete Laplacian.

Usage: python scripts/grid_refinement.py
"""

import time

import numpy as np

from fastslow.core import Grid1D, SpatialProfile
from fastslow.models import equilibrium, michaelis_menten_model
from fastslow.pde import BoundaryConditions, SolverSettings, integrate_to_steady, laplacian


def laplacian_error(n):
    g = Grid1D(n)
    profile = SpatialProfile(g, np.sin(np.pi * g.nodes)[:, None])
    return max(
        abs(laplacian(profile, i)[0] + np.pi ** 2 * np.sin(np.pi * g.nodes[i]))
        for i in range(1, n - 1)
    )


def main():
    model = michaelis_menten_model()
    z_eq = equilibrium(model, [1.0, 0.5, 0.5])
    bc = BoundaryConditions(z_eq, np.array([2.0, 0.0, 1.0]))

    print("Laplacian on sin(pi x):")
    errs = {n: laplacian_error(n) for n in (51, 101, 201, 401)}
    prev = None
    for n, err in errs.items():
        ratio = "" if prev is None else f"  ratio {prev / err:.3f}"
        print(f"  N = {n:4d}: max err {err:.3e}{ratio}")
        prev = err

    print("Stationary profiles:")
    profiles = {}
    for n in (51, 101, 201):
        t0 = time.perf_counter()
        result = integrate_to_steady(model, bc, SolverSettings(node_count=n))
        profiles[n] = result.profile.states
        print(f"  N = {n:4d}: steps {result.steps:7d}, t_end {result.elapsed_time:8.2f}, "
              f"wall {time.perf_counter() - t0:6.2f}s")
    for coarse, fine in ((51, 101), (101, 201)):
        d = np.abs(profiles[fine][::2] - profiles[coarse]).max()
        print(f"  sup diff N={coarse} vs N={fine} at shared nodes: {d:.3e}")


if __name__ == "__main__":
    main()
