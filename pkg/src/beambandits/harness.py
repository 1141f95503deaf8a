"""Declarative Monte-Carlo sweeps: config parsing, parallel trial execution,
aggregation with confidence intervals, and CSV output.

Config files are flat ``key = value`` text.  List-valued keys take comma
separation; the integer keys ``K`` and ``T1`` also accept ``lo:step:hi``
ranges (inclusive).  Keys::

    policy       list of: ub3, seqhalv, lse          (required)
    K            beam counts                          (required)
    T1           exploration budgets                  (required)
    d            distances in meters                  (default 20)
    alpha        path-loss exponents                  (default 1.74)
    T            total period in slots                (default 3000)
    trials       Monte-Carlo trials per cell          (default 1000)
    master_seed  sweep-level seed                     (default 0)
    noise_model  complex-gaussian | gaussian          (default complex-gaussian)
    metric       error_prob | throughput | both       (default both)
    output       default CSV path                     (optional)
    fixed_instance  true: one instance per cell       (default false)
    v            fixed spatial angle in [-1, 1]       (default: fresh draw per trial)
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .baselines import LineSearchElimination, SequentialHalving
from .channel import (
    ChannelInstance,
    ChannelParams,
    build_unimodal_los_instance,
)
from .core import BanditError, Policy
from .ub3 import UB3


class ConfigError(BanditError):
    """Malformed or inconsistent experiment configuration."""


class IOWriteFailed(BanditError):
    """Result files could not be written."""


POLICIES: dict[str, type[Policy]] = {
    "ub3": UB3,
    "seqhalv": SequentialHalving,
    "lse": LineSearchElimination,
}

_TRIAL_CHUNK = 250  # fixed so chunking never depends on the worker count


@dataclass(frozen=True)
class ExperimentConfig:
    policies: tuple[str, ...]
    arm_counts: tuple[int, ...]
    budgets: tuple[int, ...]
    distances: tuple[float, ...] = (20.0,)
    alphas: tuple[float, ...] = (1.74,)
    period: int = 3000
    trials: int = 1000
    master_seed: int = 0
    noise_model: str = "complex-gaussian"
    metric: str = "both"
    output: str | None = None
    fixed_instance: bool = False
    spatial_angle: float | None = None

    def __post_init__(self) -> None:
        if not self.policies or not self.arm_counts or not self.budgets:
            raise ConfigError("policy, K, and T1 must be nonempty")
        unknown = [p for p in self.policies if p not in POLICIES]
        if unknown:
            raise ConfigError(f"unknown policies {unknown}; choose from {sorted(POLICIES)}")
        if any(k < 2 for k in self.arm_counts):
            raise ConfigError("K values must be >= 2")
        if any(t < 1 for t in self.budgets):
            raise ConfigError("T1 values must be >= 1")
        if any(d <= 0 for d in self.distances):
            raise ConfigError("distances must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if self.noise_model not in ("complex-gaussian", "gaussian"):
            raise ConfigError("noise_model must be complex-gaussian or gaussian")
        if self.metric not in ("error_prob", "throughput", "both"):
            raise ConfigError("metric must be error_prob, throughput, or both")
        if self.wants_throughput and self.period <= max(self.budgets):
            raise ConfigError("T must exceed every T1 when throughput is measured")
        if self.spatial_angle is not None and not -1.0 <= self.spatial_angle <= 1.0:
            raise ConfigError("v must lie in [-1, 1]")

    @property
    def wants_throughput(self) -> bool:
        return self.metric in ("throughput", "both")


@dataclass(frozen=True)
class Cell:
    policy: str
    arm_count: int
    budget: int
    distance: float
    alpha: float

    def key(self) -> tuple:
        return (self.policy, self.arm_count, self.budget, self.distance, self.alpha)


@dataclass
class TrialBatch:
    """Aggregated Monte-Carlo results for one sweep cell."""

    cell: Cell
    trials: int
    error_rate: float = math.nan
    error_ci95: float = math.nan
    mean_throughput: float = math.nan
    throughput_ci95: float = math.nan
    mean_samples_used: float = math.nan
    skipped: bool = False
    skip_reason: str | None = None
    detail: dict[str, np.ndarray] | None = field(default=None, repr=False)


def _parse_int_list(value: str, key: str) -> tuple[int, ...]:
    value = value.strip()
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: range syntax is lo:step:hi, got {value!r}")
        try:
            lo, step, hi = (int(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        if step <= 0 or hi < lo:
            raise ConfigError(f"{key}: need step > 0 and hi >= lo in {value!r}")
        return tuple(range(lo, hi + 1, step))
    try:
        return tuple(int(p.strip()) for p in value.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _parse_float_list(value: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(p.strip()) for p in value.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat key=value config text into an :class:`ExperimentConfig`."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()

    known = {
        "policy", "K", "T1", "d", "alpha", "T", "trials", "master_seed",
        "noise_model", "metric", "output", "fixed_instance", "v",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for required in ("policy", "K", "T1"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    try:
        kwargs: dict = {
            "policies": tuple(p.strip() for p in raw["policy"].split(",") if p.strip()),
            "arm_counts": _parse_int_list(raw["K"], "K"),
            "budgets": _parse_int_list(raw["T1"], "T1"),
        }
        if "d" in raw:
            kwargs["distances"] = _parse_float_list(raw["d"], "d")
        if "alpha" in raw:
            kwargs["alphas"] = _parse_float_list(raw["alpha"], "alpha")
        if "T" in raw:
            kwargs["period"] = int(raw["T"])
        if "trials" in raw:
            kwargs["trials"] = int(raw["trials"])
        if "master_seed" in raw:
            kwargs["master_seed"] = int(raw["master_seed"])
        if "noise_model" in raw:
            kwargs["noise_model"] = raw["noise_model"]
        if "metric" in raw:
            kwargs["metric"] = raw["metric"]
        if "output" in raw:
            kwargs["output"] = raw["output"]
        if "fixed_instance" in raw:
            kwargs["fixed_instance"] = _parse_bool(raw["fixed_instance"], "fixed_instance")
        if "v" in raw:
            kwargs["spatial_angle"] = float(raw["v"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def throughput(selected: int, instance: ChannelInstance, period: int, budget: int) -> float:
    """Data-phase throughput: best-beam-normalized mean power of the selected
    beam times the remaining period slots."""
    if period <= budget:
        raise ValueError("period must exceed the exploration budget")
    ratio = instance.mean(selected) / instance.mean(instance.optimal_arm())
    return ratio * (period - budget)


def sweep_cells(config: ExperimentConfig) -> list[Cell]:
    """Cells in canonical (policy, K, T1, d, alpha) order."""
    cells = [
        Cell(*combo)
        for combo in itertools.product(
            config.policies, config.arm_counts, config.budgets,
            config.distances, config.alphas,
        )
    ]
    return sorted(cells, key=Cell.key)


def _trial_rng(master_seed: int, cell_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, cell_index, trial]))


def _cell_params(config: ExperimentConfig, cell: Cell) -> ChannelParams:
    return ChannelParams(
        num_beams=cell.arm_count,
        distance_m=cell.distance,
        path_loss_exponent=cell.alpha,
        spatial_angle=config.spatial_angle,
    )


def _fixed_cell_instance(config: ExperimentConfig, cell: Cell, cell_index: int) -> ChannelInstance:
    # Sentinel trial id beyond any real trial keeps this stream disjoint.
    rng = _trial_rng(config.master_seed, cell_index, 2**33)
    return build_unimodal_los_instance(_cell_params(config, cell), rng, config.noise_model)


def _run_chunk(
    config: ExperimentConfig, cell: Cell, cell_index: int, start: int, end: int
) -> dict[str, np.ndarray]:
    """Run trials [start, end) of one cell; deterministic per trial id."""
    n = end - start
    errors = np.zeros(n, dtype=bool)
    outputs = np.zeros(n, dtype=np.int64)
    optima = np.zeros(n, dtype=np.int64)
    thr = np.full(n, np.nan)
    samples = np.zeros(n, dtype=np.int64)
    policy = POLICIES[cell.policy]()
    params = _cell_params(config, cell)
    fixed = _fixed_cell_instance(config, cell, cell_index) if config.fixed_instance else None
    for i, trial in enumerate(range(start, end)):
        rng = _trial_rng(config.master_seed, cell_index, trial)
        instance = fixed if fixed is not None else build_unimodal_los_instance(
            params, rng, config.noise_model
        )
        run = policy.solve(instance, cell.budget, rng)
        optimum = instance.optimal_arm()
        outputs[i] = run.output_arm
        optima[i] = optimum
        errors[i] = run.output_arm != optimum
        samples[i] = run.samples_used
        if config.wants_throughput:
            thr[i] = throughput(run.output_arm, instance, config.period, cell.budget)
    return {
        "errors": errors, "outputs": outputs, "optima": optima,
        "throughput": thr, "samples": samples,
    }


def _run_chunk_task(args: tuple) -> tuple[int, int, dict[str, np.ndarray]]:
    config, cell, cell_index, start, end = args
    return cell_index, start, _run_chunk(config, cell, cell_index, start, end)


def binomial_ci95(p_hat: float, n: int) -> float:
    """Normal-approximation 95% half-width for a proportion."""
    return 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / n)


def t_ci95(values: np.ndarray) -> float:
    """Student-t 95% half-width for a sample mean; 0 for degenerate samples."""
    n = values.size
    if n < 2:
        return 0.0
    sd = float(np.std(values, ddof=1))
    if sd == 0.0:
        return 0.0
    return float(stats.t.ppf(0.975, n - 1)) * sd / math.sqrt(n)


def _aggregate(cell: Cell, config: ExperimentConfig,
               merged: dict[str, np.ndarray], keep_trials: bool) -> TrialBatch:
    n = config.trials
    err = float(np.mean(merged["errors"]))
    batch = TrialBatch(
        cell=cell,
        trials=n,
        error_rate=err,
        error_ci95=binomial_ci95(err, n),
        mean_samples_used=float(np.mean(merged["samples"])),
        detail=merged if keep_trials else None,
    )
    if config.wants_throughput:
        batch.mean_throughput = float(np.mean(merged["throughput"]))
        batch.throughput_ci95 = t_ci95(merged["throughput"])
    return batch


def run_sweep(
    config: ExperimentConfig, workers: int = 1, keep_trials: bool = False
) -> list[TrialBatch]:
    """Run every cell of the sweep; deterministic given the master seed.

    Chunks of trials fan out over a process pool when ``workers > 1``.  Cell
    and trial seeding depend only on (master_seed, cell index, trial id), and
    aggregation runs over trial-ordered arrays, so any worker count produces
    identical results.  Infeasible cells are recorded as skipped, not fatal.
    """
    cells = sweep_cells(config)
    batches: list[TrialBatch] = []
    tasks = []
    runnable: dict[int, Cell] = {}
    for cell_index, cell in enumerate(cells):
        policy = POLICIES[cell.policy]()
        try:
            need = policy.min_budget(cell.arm_count)
        except BanditError as exc:
            batches.append(TrialBatch(cell=cell, trials=0, skipped=True, skip_reason=str(exc)))
            continue
        if cell.budget < need:
            reason = f"budget {cell.budget} below feasibility threshold {need}"
            batches.append(TrialBatch(cell=cell, trials=0, skipped=True,
                                      skip_reason=f"BudgetTooSmall: {reason}"))
            continue
        runnable[cell_index] = cell
        for start in range(0, config.trials, _TRIAL_CHUNK):
            end = min(start + _TRIAL_CHUNK, config.trials)
            tasks.append((config, cell, cell_index, start, end))

    chunk_results: dict[int, dict[int, dict[str, np.ndarray]]] = {i: {} for i in runnable}
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell_index, start, result in pool.map(_run_chunk_task, tasks):
                chunk_results[cell_index][start] = result
    else:
        for task in tasks:
            cell_index, start, result = _run_chunk_task(task)
            chunk_results[cell_index][start] = result

    for cell_index, cell in runnable.items():
        parts = chunk_results[cell_index]
        merged = {
            name: np.concatenate([parts[s][name] for s in sorted(parts)])
            for name in ("errors", "outputs", "optima", "throughput", "samples")
        }
        batches.append(_aggregate(cell, config, merged, keep_trials))

    batches.sort(key=lambda b: b.cell.key())
    return batches


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "NA"
    return f"{value:.6g}"


CSV_HEADER = (
    "policy,K,T1,d,alpha,trials,error_rate,error_ci95,"
    "mean_throughput,throughput_ci95,mean_samples_used"
)


def write_results(batches: list[TrialBatch], path: str | Path) -> None:
    """Write one CSV row per cell, sorted by cell key, floats to 6 significant
    digits; skipped cells get NA metrics and a line in a sibling ``.skipped``
    log."""
    if not batches:
        raise ValueError("no batches to write")
    path = Path(path)
    rows = [CSV_HEADER]
    skipped_lines = []
    for batch in sorted(batches, key=lambda b: b.cell.key()):
        c = batch.cell
        prefix = f"{c.policy},{c.arm_count},{c.budget},{_fmt(c.distance)},{_fmt(c.alpha)}"
        if batch.skipped:
            rows.append(f"{prefix},{batch.trials},NA,NA,NA,NA,NA")
            skipped_lines.append(f"{prefix}: {batch.skip_reason}")
        else:
            rows.append(
                f"{prefix},{batch.trials},{_fmt(batch.error_rate)},{_fmt(batch.error_ci95)},"
                f"{_fmt(batch.mean_throughput)},{_fmt(batch.throughput_ci95)},"
                f"{_fmt(batch.mean_samples_used)}"
            )
    try:
        path.write_text("\n".join(rows) + "\n")
        if skipped_lines:
            path.with_name(path.name + ".skipped").write_text(
                "\n".join(skipped_lines) + "\n"
            )
    except OSError as exc:
        raise IOWriteFailed(f"cannot write results to {path}: {exc}") from exc


def write_trace(batches: list[TrialBatch], path: str | Path) -> None:
    """Per-trial dump (requires a sweep run with ``keep_trials=True``)."""
    lines = ["policy,K,T1,d,alpha,trial,output_arm,optimal_arm,error,samples_used"]
    for batch in sorted(batches, key=lambda b: b.cell.key()):
        if batch.skipped or batch.detail is None:
            continue
        c = batch.cell
        detail = batch.detail
        for t in range(batch.trials):
            lines.append(
                f"{c.policy},{c.arm_count},{c.budget},{_fmt(c.distance)},{_fmt(c.alpha)},"
                f"{t},{detail['outputs'][t]},{detail['optima'][t]},"
                f"{int(detail['errors'][t])},{detail['samples'][t]}"
            )
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOWriteFailed(f"cannot write trace to {path}: {exc}") from exc
