"""Independent straight-line particle swarm used to pin convergence thresholds.

This is a from-scratch transcription of the same velocity/position rules the
library implements, written with plain Python lists and the stdlib RNG, with
no shared code or shared random streams. Its only job is to provide an
implementation-independent yardstick: the frozen threshold in the acceptance
suite was produced by running this module once and recording the result
(see that test for the frozen value).

Run directly to reproduce the pilot:

    python3 -m tests.pso_reference
"""

from __future__ import annotations

import random
import statistics


def sphere(x: list[float]) -> float:
    return sum(c * c for c in x)


def run_sphere_pso(
    seed: int,
    dim: int = 10,
    swarm_size: int = 30,
    iterations: int = 2000,
    c1: float = 2.0,
    c2: float = 2.0,
) -> float:
    """Plain-list PSO on the sphere function; returns the final best fitness."""
    rng = random.Random(seed)
    lower, upper = -5.12, 5.12
    vmax = 0.5 * (upper - lower)

    positions = [[rng.uniform(lower, upper) for _ in range(dim)] for _ in range(swarm_size)]
    velocities = [[rng.uniform(-vmax, vmax) for _ in range(dim)] for _ in range(swarm_size)]
    pbest_pos = [list(p) for p in positions]
    pbest_fit = [sphere(p) for p in positions]
    gbest_fit = min(pbest_fit)
    gbest_pos = list(pbest_pos[pbest_fit.index(gbest_fit)])

    for _ in range(iterations):
        for i in range(swarm_size):
            fit = sphere(positions[i])
            if fit < pbest_fit[i]:
                pbest_fit[i] = fit
                pbest_pos[i] = list(positions[i])
        best_index = min(range(swarm_size), key=lambda i: pbest_fit[i])
        if pbest_fit[best_index] < gbest_fit:
            gbest_fit = pbest_fit[best_index]
            gbest_pos = list(pbest_pos[best_index])
        for i in range(swarm_size):
            for d in range(dim):
                r1 = rng.random()
                r2 = rng.random()
                v = (
                    velocities[i][d]
                    + c1 * r1 * (pbest_pos[i][d] - positions[i][d])
                    + c2 * r2 * (gbest_pos[d] - positions[i][d])
                )
                velocities[i][d] = min(vmax, max(-vmax, v))
                positions[i][d] += velocities[i][d]
    return gbest_fit


def pilot_median(seeds=range(1, 21)) -> float:
    return statistics.median(run_sphere_pso(seed) for seed in seeds)


if __name__ == "__main__":
    finals = {seed: run_sphere_pso(seed) for seed in range(1, 21)}
    for seed, fit in finals.items():
        print(f"seed={seed} final={fit!r}")
    print(f"median={statistics.median(finals.values())!r}")
