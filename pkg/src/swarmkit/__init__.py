"""Deterministic swarm optimizers: particle swarms and ant colonies.

Both optimizers draw every random number from Philox counter-based
streams derived purely from ``(seed, stream_id)``, so runs are exactly
reproducible across processes and machines.
"""

from .aco import (
    AcoConfig,
    DistanceGraph,
    PheromoneMatrix,
    Tour,
    construct_tour,
    deposit,
    evaporate,
    initialize_pheromones,
    optimize_aco,
    tour_length,
    transition_probabilities,
)
from .cli import (
    ExperimentConfig,
    RunSummary,
    aggregate_bests,
    emit_summary,
    emit_trace_csv,
    main,
    parse_config,
    parse_trace_csv,
    run_experiment,
)
from .core import (
    RNG_ALGORITHM,
    ConfigError,
    ContractError,
    ObjectiveSpec,
    RngStream,
    RunTrace,
    TerminationCriteria,
    TraceEntry,
    derive_stream,
    fitness_key,
    next_uniform,
    record_iteration,
    should_terminate,
)
from .problems import (
    BENCHMARK_NAMES,
    BRUTE_FORCE_MAX_NODES,
    BenchmarkFunction,
    TspInstance,
    benchmark,
    brute_force_tsp,
    enumerate_distinct_tours,
    load_tsp_instance,
    random_tsp_instance,
    rastrigin,
    rosenbrock,
    serialize_tsp_instance,
    sphere,
)
from .pso import (
    Global,
    Particle,
    PsoConfig,
    Ring,
    SwarmState,
    clamp_velocity,
    initialize_swarm,
    optimize,
    select_guide,
    step,
    update_pbest,
    update_position,
    update_velocity,
)

__version__ = "0.1.0"

__all__ = [
    "AcoConfig",
    "BENCHMARK_NAMES",
    "aggregate_bests",
    "BRUTE_FORCE_MAX_NODES",
    "BenchmarkFunction",
    "ConfigError",
    "ContractError",
    "DistanceGraph",
    "ExperimentConfig",
    "Global",
    "ObjectiveSpec",
    "Particle",
    "PheromoneMatrix",
    "PsoConfig",
    "RNG_ALGORITHM",
    "Ring",
    "RngStream",
    "RunSummary",
    "RunTrace",
    "SwarmState",
    "TerminationCriteria",
    "Tour",
    "TraceEntry",
    "TspInstance",
    "benchmark",
    "brute_force_tsp",
    "clamp_velocity",
    "construct_tour",
    "deposit",
    "derive_stream",
    "emit_summary",
    "emit_trace_csv",
    "enumerate_distinct_tours",
    "evaporate",
    "fitness_key",
    "initialize_pheromones",
    "initialize_swarm",
    "load_tsp_instance",
    "main",
    "next_uniform",
    "optimize",
    "optimize_aco",
    "parse_config",
    "parse_trace_csv",
    "random_tsp_instance",
    "rastrigin",
    "record_iteration",
    "rosenbrock",
    "run_experiment",
    "select_guide",
    "serialize_tsp_instance",
    "should_terminate",
    "sphere",
    "step",
    "tour_length",
    "transition_probabilities",
    "update_pbest",
    "update_position",
    "update_velocity",
]
