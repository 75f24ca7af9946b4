"""Shared foundations: seeded random streams, objectives, traces, termination.

Every stochastic component in this package draws from an :class:`RngStream`,
a counter-based Philox generator keyed by ``(seed, stream_id)``. Stream
derivation is a pure function of its arguments, so any run is replayable
from its seed alone and independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

# Recorded in run metadata; changing the generator breaks replayability of
# previously published seeds.
RNG_ALGORITHM = "philox4x64"

_U64_MAX = 2**64 - 1


class ConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class ContractError(ValueError):
    """An operation was called outside its documented preconditions."""


class RngStream:
    """One independent random stream, owned by a single agent or run.

    Two streams built from the same ``(seed, stream_id)`` produce identical
    draw sequences; distinct ids share no state.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int):
        if not 0 <= seed <= _U64_MAX:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if not 0 <= stream_id <= _U64_MAX:
            raise ConfigError(f"stream_id must be a 64-bit unsigned integer, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        self._gen = np.random.Generator(np.random.Philox(key=(seed << 64) | stream_id))

    def next_uniform(self) -> float:
        """Draw one uniform value in [0, 1) and advance the stream."""
        return float(self._gen.random())

    def next_uniforms(self, n: int) -> np.ndarray:
        """Draw ``n`` uniforms in [0, 1); identical to ``n`` scalar draws."""
        return self._gen.random(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def derive_stream(seed: int, stream_id: int) -> RngStream:
    """Build the independent stream for ``(seed, stream_id)``.

    Pure in its arguments: calling twice yields streams that replay the
    same sequence.
    """
    return RngStream(seed, stream_id)


def next_uniform(stream: RngStream) -> float:
    """Draw one uniform value in [0, 1) from ``stream``."""
    return stream.next_uniform()


def fitness_key(value: float) -> float:
    """Comparison key under which non-finite fitnesses never win.

    NaN and both infinities map to +inf, so a non-finite evaluation is
    treated as no improvement while ordinary comparisons are unchanged.
    """
    return value if math.isfinite(value) else math.inf


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """A box-bounded minimization objective.

    ``evaluate`` must be deterministic: the same input vector always yields
    the same fitness.
    """

    dimension: int
    lower_bound: np.ndarray
    upper_bound: np.ndarray
    evaluate: Callable[[np.ndarray], float]

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        lower = np.asarray(self.lower_bound, dtype=float)
        upper = np.asarray(self.upper_bound, dtype=float)
        if lower.shape != (self.dimension,) or upper.shape != (self.dimension,):
            raise ConfigError(
                f"bounds must have shape ({self.dimension},), "
                f"got {lower.shape} and {upper.shape}"
            )
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ConfigError("bounds must be finite")
        if not (lower < upper).all():
            raise ConfigError("lower_bound must be strictly below upper_bound in every dimension")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower_bound", lower)
        object.__setattr__(self, "upper_bound", upper)


@dataclass(frozen=True)
class TerminationCriteria:
    """Stop after ``max_iterations``, or earlier once the best fitness
    reaches ``target_fitness`` (when set)."""

    max_iterations: int
    target_fitness: Optional[float] = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")


class TraceEntry(NamedTuple):
    iteration: int
    best_fitness: float
    evaluations: int


@dataclass(frozen=True)
class RunTrace:
    """Per-iteration best-so-far record of one seeded run.

    ``entries`` hold the cumulative objective-call count alongside each
    best fitness; ``non_finite_evals`` counts evaluations that returned
    NaN or infinity (always treated as no improvement).
    """

    seed: int
    entries: tuple[TraceEntry, ...] = ()
    non_finite_evals: int = 0

    @property
    def evaluations(self) -> int:
        return self.entries[-1].evaluations if self.entries else 0

    @property
    def best_fitness(self) -> float:
        if not self.entries:
            raise ContractError("trace has no entries")
        return self.entries[-1].best_fitness


def record_iteration(
    trace: RunTrace,
    iteration: int,
    best: float,
    evaluations: Optional[int] = None,
) -> RunTrace:
    """Append one iteration record, keeping the best-so-far floor.

    ``iteration`` must be consecutive (0 for an empty trace). The recorded
    fitness is the minimum of ``best`` and the previous entry, so the
    trace is non-increasing by construction. ``evaluations`` is the
    caller-maintained cumulative objective-call count; omitted, it carries
    the previous value forward.
    """
    expected = trace.entries[-1].iteration + 1 if trace.entries else 0
    if iteration != expected:
        raise ContractError(f"iteration must be {expected}, got {iteration}")
    if evaluations is None:
        evaluations = trace.evaluations
    floor = best
    if trace.entries:
        prev = trace.entries[-1].best_fitness
        if not fitness_key(best) < fitness_key(prev):
            floor = prev
    entry = TraceEntry(iteration, floor, evaluations)
    return RunTrace(
        seed=trace.seed,
        entries=trace.entries + (entry,),
        non_finite_evals=trace.non_finite_evals,
    )


def should_terminate(trace: RunTrace, criteria: TerminationCriteria) -> bool:
    """True once the iteration budget is spent or the target is reached."""
    if len(trace.entries) >= criteria.max_iterations:
        return True
    if criteria.target_fitness is not None:
        if not trace.entries:
            raise ContractError("target_fitness set but trace has no entries")
        return trace.entries[-1].best_fitness <= criteria.target_fitness
    return False
