"""Benchmark objectives, TSP instance handling, and the exact TSP oracle.

The brute-force solver exists so stochastic results can be checked against
ground truth; it shares no code with the colony engine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .aco import DistanceGraph, Tour
from .core import ConfigError, ObjectiveSpec, RngStream

# Exhaustive enumeration above this is a factorial blowup, not a test oracle.
BRUTE_FORCE_MAX_NODES = 11


def sphere(x) -> float:
    """f(x) = sum of squares; minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def rastrigin(x) -> float:
    """f(x) = 10d + sum(x^2 - 10 cos(2 pi x)); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x) -> float:
    """Banana valley, sum of 100(x[i+1]-x[i]^2)^2 + (1-x[i])^2; minimum 0 at all ones."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ConfigError(f"rosenbrock needs dimension >= 2, got {x.size}")
    head, tail = x[:-1], x[1:]
    return float(np.sum(100.0 * (tail - head * head) ** 2 + (1.0 - head) ** 2))


@dataclass(frozen=True, eq=False)
class BenchmarkFunction:
    """A named objective plus its known optimum for verification."""

    name: str
    spec: ObjectiveSpec
    known_optimum: tuple[np.ndarray, float]


def _make_benchmark(name, fn, half_range, optimum_at, dimension, min_dim=1):
    if dimension < min_dim:
        raise ConfigError(f"{name} needs dimension >= {min_dim}, got {dimension}")
    spec = ObjectiveSpec(
        dimension=dimension,
        lower_bound=np.full(dimension, -half_range),
        upper_bound=np.full(dimension, half_range),
        evaluate=fn,
    )
    return BenchmarkFunction(name=name, spec=spec, known_optimum=(optimum_at(dimension), 0.0))


_BENCHMARK_BUILDERS = {
    "sphere": lambda d: _make_benchmark("sphere", sphere, 5.12, np.zeros, d),
    "rastrigin": lambda d: _make_benchmark("rastrigin", rastrigin, 5.12, np.zeros, d),
    "rosenbrock": lambda d: _make_benchmark("rosenbrock", rosenbrock, 2.048, np.ones, d, min_dim=2),
}

BENCHMARK_NAMES = tuple(sorted(_BENCHMARK_BUILDERS))


def benchmark(name: str, dimension: int) -> BenchmarkFunction:
    """Look up a benchmark by name at the given dimension."""
    try:
        builder = _BENCHMARK_BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown benchmark {name!r}; available: {', '.join(BENCHMARK_NAMES)}"
        ) from None
    return builder(dimension)


@dataclass(frozen=True, eq=False)
class TspInstance:
    """A symmetric TSP instance, optionally backed by 2D coordinates."""

    name: str
    graph: DistanceGraph
    coordinates: Optional[np.ndarray] = None

    @classmethod
    def from_coordinates(cls, name: str, coordinates) -> "TspInstance":
        coords = np.asarray(coordinates, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ConfigError(f"coordinates must have shape (n, 2), got {coords.shape}")
        delta = coords[:, None, :] - coords[None, :, :]
        distance = np.sqrt((delta**2).sum(axis=-1))
        coords.flags.writeable = False
        return cls(name=name, graph=DistanceGraph(distance), coordinates=coords)

    @property
    def n(self) -> int:
        return self.graph.n


def load_tsp_instance(text: str, name: str = "instance") -> TspInstance:
    """Parse the plain-text instance format.

    Lines starting with '#' and blank lines are ignored. The first
    significant line is the node count n, followed by n lines of
    "index x y" with consecutive 0-based indices.
    """
    n = None
    coords = None
    seen = set()
    next_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ConfigError(f"line {lineno}: expected node count, got {line!r}") from None
            if n < 3:
                raise ConfigError(f"line {lineno}: n < 3 (got {n})")
            coords = np.zeros((n, 2), dtype=float)
            continue
        if next_index >= n:
            raise ConfigError(f"line {lineno}: more than {n} point lines")
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: expected 'index x y', got {line!r}")
        try:
            index = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError(f"line {lineno}: malformed point line {line!r}") from None
        if index in seen:
            raise ConfigError(f"line {lineno}: duplicate point index {index}")
        if index != next_index:
            raise ConfigError(f"line {lineno}: expected index {next_index}, got {index}")
        seen.add(index)
        coords[index] = (x, y)
        next_index += 1
    if n is None:
        raise ConfigError("empty instance: no node count found")
    if next_index != n:
        raise ConfigError(f"expected {n} points, found {next_index}")
    return TspInstance.from_coordinates(name, coords)


def serialize_tsp_instance(instance: TspInstance) -> str:
    """Inverse of :func:`load_tsp_instance` for coordinate-based instances."""
    if instance.coordinates is None:
        raise ConfigError("only coordinate-based instances can be serialized")
    lines = [str(instance.n)]
    for i, (x, y) in enumerate(instance.coordinates):
        lines.append(f"{i} {float(x)!r} {float(y)!r}")
    return "\n".join(lines) + "\n"


def random_tsp_instance(n: int, stream: RngStream) -> TspInstance:
    """n points drawn uniformly from the unit square, deterministic per stream."""
    if n < 3:
        raise ConfigError(f"instance needs at least 3 nodes, got {n}")
    coords = stream.next_uniforms(2 * n).reshape(n, 2)
    return TspInstance.from_coordinates(f"random{n}", coords)


def enumerate_distinct_tours(n: int) -> Iterator[tuple[int, ...]]:
    """All (n-1)!/2 distinct closed tours, node 0 first, one direction each.

    Direction duplicates are dropped by requiring the second node to be
    smaller than the last; output is in lexicographic order.
    """
    for perm in itertools.permutations(range(1, n)):
        if perm[0] < perm[-1]:
            yield (0,) + perm


def brute_force_tsp(instance: TspInstance) -> Tour:
    """Exact shortest closed tour by exhaustive enumeration.

    Refuses instances above BRUTE_FORCE_MAX_NODES nodes. Ties go to the
    lexicographically smallest order, which the enumeration visits first.
    """
    n = instance.n
    if n > BRUTE_FORCE_MAX_NODES:
        raise ConfigError(
            f"brute force refused: {n} nodes exceeds the limit of {BRUTE_FORCE_MAX_NODES}"
        )
    d = instance.graph.distance
    best_order = None
    best_length = math.inf
    for order in enumerate_distinct_tours(n):
        total = 0.0
        prev = 0
        for node in order[1:]:
            total += d[prev, node]
            prev = node
        total += d[prev, 0]
        if total < best_length:
            best_length = total
            best_order = order
    return Tour(order=best_order, length=float(best_length))
