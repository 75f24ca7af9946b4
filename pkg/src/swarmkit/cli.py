"""Experiment harness: config parsing, multi-seed runs, traces, summaries.

Config files are flat ``key=value`` lines with ``#`` comments. Every run
writes one ``trace_seed<SEED>.csv`` per seed (streamed row by row, then
atomically renamed into place) plus one ``summary.json``. Identical
configs produce byte-identical trace files regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .aco import AcoConfig, optimize_aco
from .core import (
    RNG_ALGORITHM,
    ConfigError,
    ContractError,
    RunTrace,
    TerminationCriteria,
    TraceEntry,
)
from .problems import BENCHMARK_NAMES, TspInstance, benchmark, brute_force_tsp, load_tsp_instance
from .pso import Global, PsoConfig, Ring, optimize

DEFAULT_OUTPUT_DIR = "runs"
TRACE_HEADER = "iteration,best_fitness,evaluations"

_U64_MAX = 2**64 - 1

_COMMON_KEYS = ("algorithm", "problem", "seeds", "max_iterations", "target_fitness", "output")
_PSO_KEYS = ("dim", "swarm_size", "c1", "c2", "vmax", "topology", "ring_k")
_ACO_KEYS = ("num_ants", "alpha", "beta", "rho", "q", "tau0", "tau_floor")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment description with defaults filled in."""

    algorithm: str
    problem: str
    seeds: tuple[int, ...]
    max_iterations: int
    target_fitness: Optional[float] = None
    output: Optional[str] = None
    # pso
    dim: Optional[int] = None
    swarm_size: Optional[int] = None
    c1: float = 2.0
    c2: float = 2.0
    vmax: Optional[float] = None
    topology: str = "global"
    ring_k: int = 1
    # aco
    num_ants: Optional[int] = None
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.5
    q: float = 1.0
    tau0: float = 1.0
    tau_floor: float = 1e-12


@dataclass(frozen=True)
class RunSummary:
    """Per-seed results and their aggregates for one experiment."""

    algorithm: str
    problem: str
    rng_algorithm: str
    config: dict
    per_seed: tuple[dict, ...]
    aggregate: dict
    total_evaluations: int


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"invalid integer for {key}: {value!r}") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"invalid number for {key}: {value!r}") from None


def _parse_seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise ConfigError(f"invalid seed {text!r}") from None
    if not 0 <= seed <= _U64_MAX:
        raise ConfigError(f"seed {seed} out of 64-bit unsigned range")
    return seed


def _parse_seeds(value: str) -> tuple[int, ...]:
    """Either "a..b" (inclusive) or a comma-separated list."""
    if ".." in value:
        lo_text, _, hi_text = value.partition("..")
        lo, hi = _parse_seed(lo_text.strip()), _parse_seed(hi_text.strip())
        if lo > hi:
            raise ConfigError(f"seed range {value!r} is empty (start exceeds end)")
        return tuple(range(lo, hi + 1))
    seeds = tuple(_parse_seed(part.strip()) for part in value.split(","))
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate seeds are not allowed")
    return seeds


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a flat key=value config.

    Unknown keys, keys for the other algorithm, type mismatches, and
    constraint violations all raise :class:`ConfigError` naming the key.
    """
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = key.strip(), value.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        pairs[key] = value

    algorithm = pairs.pop("algorithm", None)
    if algorithm is None:
        raise ConfigError("missing required key algorithm")
    if algorithm not in ("pso", "aco"):
        raise ConfigError(f"algorithm must be pso or aco, got {algorithm!r}")

    allowed = set(_COMMON_KEYS) | set(_PSO_KEYS if algorithm == "pso" else _ACO_KEYS)
    other = set(_ACO_KEYS if algorithm == "pso" else _PSO_KEYS)
    for key in pairs:
        if key in allowed:
            continue
        if key in other:
            raise ConfigError(f"key {key} is not valid for algorithm {algorithm}")
        raise ConfigError(f"unknown key {key}")

    for required in ("problem", "seeds", "max_iterations"):
        if required not in pairs:
            raise ConfigError(f"missing required key {required}")

    values: dict = {
        "algorithm": algorithm,
        "problem": pairs.pop("problem"),
        "seeds": _parse_seeds(pairs.pop("seeds")),
        "max_iterations": _parse_int("max_iterations", pairs.pop("max_iterations")),
    }
    if not values["seeds"]:
        raise ConfigError("seeds must name at least one seed")
    if values["max_iterations"] < 1:
        raise ConfigError(f"max_iterations must be >= 1, got {values['max_iterations']}")
    if "target_fitness" in pairs:
        values["target_fitness"] = _parse_float("target_fitness", pairs.pop("target_fitness"))
    if "output" in pairs:
        values["output"] = pairs.pop("output")

    if algorithm == "pso":
        _parse_pso_keys(pairs, values)
    else:
        _parse_aco_keys(pairs, values)
    return ExperimentConfig(**values)


def _parse_pso_keys(pairs: dict, values: dict) -> None:
    for required in ("dim", "swarm_size"):
        if required not in pairs:
            raise ConfigError(f"missing required key {required}")
    if values["problem"] not in BENCHMARK_NAMES:
        raise ConfigError(
            f"unknown benchmark {values['problem']!r} for problem; "
            f"available: {', '.join(BENCHMARK_NAMES)}"
        )
    values["dim"] = _parse_int("dim", pairs.pop("dim"))
    values["swarm_size"] = _parse_int("swarm_size", pairs.pop("swarm_size"))
    if values["dim"] < 1:
        raise ConfigError(f"dim must be >= 1, got {values['dim']}")
    if values["swarm_size"] < 1:
        raise ConfigError(f"swarm_size must be >= 1, got {values['swarm_size']}")
    for key in ("c1", "c2", "vmax"):
        if key in pairs:
            values[key] = _parse_float(key, pairs.pop(key))
    if values.get("c1", 2.0) < 0 or values.get("c2", 2.0) < 0:
        raise ConfigError("c1 and c2 must be >= 0")
    if values.get("vmax") is not None and values["vmax"] <= 0:
        raise ConfigError(f"vmax must be > 0, got {values['vmax']}")
    if "topology" in pairs:
        values["topology"] = pairs.pop("topology")
        if values["topology"] not in ("global", "ring"):
            raise ConfigError(f"topology must be global or ring, got {values['topology']!r}")
    explicit_ring_k = "ring_k" in pairs
    if explicit_ring_k:
        values["ring_k"] = _parse_int("ring_k", pairs.pop("ring_k"))
    ring_k = values.get("ring_k", 1)
    if (explicit_ring_k or values.get("topology") == "ring") and not (
        1 <= ring_k < values["swarm_size"]
    ):
        raise ConfigError(
            f"ring_k must be in [1, swarm_size), got {ring_k} "
            f"with swarm_size={values['swarm_size']}"
        )


def _parse_aco_keys(pairs: dict, values: dict) -> None:
    if "num_ants" in pairs:
        values["num_ants"] = _parse_int("num_ants", pairs.pop("num_ants"))
        if values["num_ants"] < 1:
            raise ConfigError(f"num_ants must be >= 1, got {values['num_ants']}")
    for key in ("alpha", "beta", "rho", "q", "tau0", "tau_floor"):
        if key in pairs:
            values[key] = _parse_float(key, pairs.pop(key))
    if values.get("alpha", 1.0) < 0 or values.get("beta", 2.0) < 0:
        raise ConfigError("alpha and beta must be >= 0")
    if not 0.0 <= values.get("rho", 0.5) <= 1.0:
        raise ConfigError(f"rho out of [0,1], got {values['rho']}")
    if values.get("q", 1.0) <= 0:
        raise ConfigError(f"q must be > 0, got {values['q']}")
    if values.get("tau_floor", 1e-12) <= 0:
        raise ConfigError(f"tau_floor must be > 0, got {values['tau_floor']}")
    if values.get("tau0", 1.0) < values.get("tau_floor", 1e-12):
        raise ConfigError("tau0 must be >= tau_floor")


def _config_echo(config: ExperimentConfig) -> dict:
    echo = {
        "algorithm": config.algorithm,
        "problem": config.problem,
        "max_iterations": config.max_iterations,
        "target_fitness": config.target_fitness,
        "seeds": list(config.seeds),
    }
    if config.algorithm == "pso":
        echo.update(
            dim=config.dim,
            swarm_size=config.swarm_size,
            c1=config.c1,
            c2=config.c2,
            vmax=config.vmax,
            topology=config.topology,
            ring_k=config.ring_k,
        )
    else:
        echo.update(
            num_ants=config.num_ants,
            alpha=config.alpha,
            beta=config.beta,
            rho=config.rho,
            q=config.q,
            tau0=config.tau0,
            tau_floor=config.tau_floor,
        )
    return echo


def _termination(config: ExperimentConfig) -> TerminationCriteria:
    return TerminationCriteria(
        max_iterations=config.max_iterations, target_fitness=config.target_fitness
    )


def _pso_engine_config(config: ExperimentConfig) -> PsoConfig:
    topology = Ring(config.ring_k) if config.topology == "ring" else Global()
    return PsoConfig(
        swarm_size=config.swarm_size,
        termination=_termination(config),
        c1=config.c1,
        c2=config.c2,
        vmax=config.vmax,
        topology=topology,
    )


def _aco_engine_config(config: ExperimentConfig) -> AcoConfig:
    return AcoConfig(
        termination=_termination(config),
        num_ants=config.num_ants,
        alpha=config.alpha,
        beta=config.beta,
        rho=config.rho,
        q=config.q,
        tau0=config.tau0,
        tau_floor=config.tau_floor,
    )


def _load_instance(path: str) -> TspInstance:
    return load_tsp_instance(Path(path).read_text(), name=Path(path).stem)


def _trace_row(entry: TraceEntry) -> str:
    return f"{entry.iteration},{entry.best_fitness!r},{entry.evaluations}"


def emit_trace_csv(trace: RunTrace) -> str:
    """Plot-ready CSV; floats use round-trip-exact repr, rows in order."""
    lines = [TRACE_HEADER]
    lines.extend(_trace_row(entry) for entry in trace.entries)
    return "\n".join(lines) + "\n"


def parse_trace_csv(text: str, seed: int = 0) -> RunTrace:
    """Inverse of :func:`emit_trace_csv` (the seed lives in the filename)."""
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ConfigError(f"trace must start with header {TRACE_HEADER!r}")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: expected 3 columns, got {line!r}")
        entries.append(TraceEntry(int(parts[0]), float(parts[1]), int(parts[2])))
    return RunTrace(seed=seed, entries=tuple(entries))


class _TraceWriter:
    """Streams trace rows to a temp file; renames into place only on success."""

    def __init__(self, final_path: Path):
        self.final_path = final_path
        self.tmp_path = final_path.with_name(final_path.name + ".tmp")
        self._fh = None

    def __enter__(self):
        self._fh = open(self.tmp_path, "w", newline="")
        self._fh.write(TRACE_HEADER + "\n")
        return self

    def __call__(self, entry: TraceEntry) -> None:
        self._fh.write(_trace_row(entry) + "\n")
        self._fh.flush()

    def __exit__(self, exc_type, exc, tb):
        self._fh.close()
        if exc_type is None:
            os.replace(self.tmp_path, self.final_path)
        else:
            self.tmp_path.unlink(missing_ok=True)
        return False


def _run_single(config: ExperimentConfig, seed: int, out_dir: str) -> dict:
    """Execute one seeded run, streaming its trace file. Worker-safe."""
    trace_path = Path(out_dir) / f"trace_seed{seed}.csv"
    started = time.perf_counter()
    with _TraceWriter(trace_path) as writer:
        if config.algorithm == "pso":
            bench = benchmark(config.problem, config.dim)
            _, best, trace = optimize(bench.spec, _pso_engine_config(config), seed, on_iteration=writer)
        else:
            instance = _load_instance(config.problem)
            best_tour, trace = optimize_aco(
                instance.graph, _aco_engine_config(config), seed, on_iteration=writer
            )
            best = best_tour.length
    return {
        "seed": seed,
        "best_fitness": best,
        "evaluations": trace.evaluations,
        "wall_clock_seconds": time.perf_counter() - started,
    }


def run_experiment(
    config: ExperimentConfig,
    output_dir: Optional[str] = None,
    workers: int = 1,
) -> RunSummary:
    """One run per seed; writes per-seed traces plus summary.json.

    Seeds may execute in parallel worker processes; results and files are
    identical for any worker count because each run is fully isolated.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    out = Path(output_dir if output_dir is not None else (config.output or DEFAULT_OUTPUT_DIR))
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(config, seed, str(out)) for seed in config.seeds]
    if workers == 1 or len(jobs) == 1:
        results = [_run_single(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_single, *job) for job in jobs]
            try:
                results = [f.result() for f in futures]
            except BaseException:
                for future in futures:
                    future.cancel()
                raise

    summary = RunSummary(
        algorithm=config.algorithm,
        problem=config.problem,
        rng_algorithm=RNG_ALGORITHM,
        config=_config_echo(config),
        per_seed=tuple(results),
        aggregate=aggregate_bests([r["best_fitness"] for r in results]),
        total_evaluations=sum(r["evaluations"] for r in results),
    )
    _atomic_write(out / "summary.json", emit_summary(summary))
    return summary


def aggregate_bests(bests: list) -> dict:
    """Summary statistics over per-seed best fitnesses, exactly recomputable."""
    return {
        "min": min(bests),
        "median": statistics.median(bests),
        "mean": statistics.fmean(bests),
    }


def emit_summary(summary: RunSummary) -> str:
    """Deterministically ordered JSON for the summary (plus trailing LF)."""
    payload = {
        "algorithm": summary.algorithm,
        "problem": summary.problem,
        "rng_algorithm": summary.rng_algorithm,
        "config": summary.config,
        "per_seed": list(summary.per_seed),
        "aggregate": summary.aggregate,
        "total_evaluations": summary.total_evaluations,
    }
    return json.dumps(payload, indent=2) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, newline="")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _cmd_run(args) -> int:
    config = parse_config(args.config.read_text())
    summary = run_experiment(config, output_dir=args.output, workers=args.workers)
    for record in summary.per_seed:
        print(
            f"seed={record['seed']} best={record['best_fitness']!r} "
            f"evaluations={record['evaluations']}"
        )
    agg = summary.aggregate
    print(f"aggregate min={agg['min']!r} median={agg['median']!r} mean={agg['mean']!r}")
    return 0


def _cmd_brute_force(args) -> int:
    instance = _load_instance(str(args.instance))
    tour = brute_force_tsp(instance)
    print("tour:", " ".join(str(node) for node in tour.order))
    print(f"length: {tour.length!r}")
    return 0


def _cmd_validate(args) -> int:
    parse_config(args.config.read_text())
    print("ok")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="swarmkit",
        description="Deterministic swarm optimizers with a multi-seed experiment harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute a multi-seed experiment from a config file")
    run_parser.add_argument("config", type=Path, help="flat key=value config file")
    run_parser.add_argument("--output", default=None, help="output directory (overrides config)")
    run_parser.add_argument("--workers", type=int, default=1, help="parallel seed runners")

    brute_parser = sub.add_parser("brute-force", help="print the exact oracle tour of an instance")
    brute_parser.add_argument("instance", type=Path, help="TSP instance file")

    validate_parser = sub.add_parser("validate", help="parse a config file without running it")
    validate_parser.add_argument("config", type=Path)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "brute-force":
            return _cmd_brute_force(args)
        return _cmd_validate(args)
    except (ConfigError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
