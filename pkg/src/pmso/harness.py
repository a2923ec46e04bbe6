"""
Experiment campaigns: config files, multi-seed runs, statistics and CSV output.

Run ``i`` of a campaign uses seed ``base_seed + i``, so any single run can be
reproduced on its own. Standard deviations are population (``ddof=0``) values.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .optimizer import RunResult, SwarmConfig, run
from .solar import (
    ArrayArrangement,
    DiscreteConfig,
    PowerCurve,
    PVParams,
    baseline_tct,
    load_arrangement,
    load_irradiance,
    max_power,
    row_currents,
    run_discrete_pmso,
    save_arrangement,
    short_wide_shadow,
)
from .testbed import BASIC_IDS, COMPOSITION_IDS, ObjectiveSpec, make_spec, with_data

logger = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "RunRecord",
    "SummaryStats",
    "build_objective",
    "load_config",
    "run_experiment",
    "save_config",
    "summarize",
    "write_convergence_csv",
    "write_power_curve_csv",
    "write_summary_csv",
]

MODES = ("benchmark", "solar")
FUNCTION_IDS = BASIC_IDS + COMPOSITION_IDS

# hyperparameter keys and their parsers; which ones apply depends on the mode
_INT_HYPER = ("NG", "IG", "IL", "S_IL", "L_IL", "B", "NC", "max_evaluations")
_FLOAT_HYPER = ("N_init", "S_N", "L_N", "U_N", "F", "N_GB", "convergence_eps", "time_budget")
_BOOL_HYPER = ("accept_ties",)
_SOLAR_HYPER = {"NG", "IG", "IL", "S_IL", "L_IL", "max_evaluations", "accept_ties"}
_BENCH_HYPER = set(_INT_HYPER) | set(_FLOAT_HYPER)

CONVERGENCE_HEADER = ("iteration", "evaluations", "best_fitness")
SUMMARY_HEADER = ("function", "dim", "best", "mean", "std")
CURVE_HEADER = ("remaining_rows", "V_a_volts", "I_amperes", "P_watts")
SOLAR_RUNS_HEADER = ("run", "seed", "p_max_watts", "evaluations")


class ConfigError(ValueError):
    """Bad experiment configuration; the message names the key and, when known, the line."""


@dataclass
class ExperimentSpec:
    """
    Everything needed to reproduce a campaign.

    ``hyper`` holds only the hyperparameters set explicitly; the rest come from
    :meth:`SwarmConfig.from_range` (benchmark) or :class:`DiscreteConfig` (solar).
    ``irradiance = None`` in solar mode means the shipped 9 x 9 shadow.
    """

    mode: str = "benchmark"
    function: str = "F1"
    dim: int = 2
    instance_seed: int = 0
    shift_file: Optional[str] = None
    rotation_file: Optional[str] = None
    irradiance: Optional[str] = None
    arrangement: Optional[str] = None
    runs: int = 30
    seed: int = 0
    out_dir: str = "results"
    hyper: dict = field(default_factory=dict)

    def run_seed(self, index: int) -> int:
        return self.seed + index

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.runs, int) and self.runs >= 1):
            raise ConfigError(f"runs: must be a positive integer, got {self.runs!r}")
        allowed = _BENCH_HYPER if self.mode == "benchmark" else _SOLAR_HYPER
        for key in self.hyper:
            if key not in allowed:
                raise ConfigError(f"{key}: not a {self.mode} hyperparameter")
        if self.mode == "benchmark":
            if self.function not in FUNCTION_IDS:
                raise ConfigError(f"function: unknown id {self.function!r}")
            if self.dim < 2:
                raise ConfigError(f"dim: must be at least 2, got {self.dim}")
            # builds the config once so cross-field constraints fail early
            swarm_config(self, build_objective(self), 0)
        else:
            discrete_config(self, 0)


@dataclass
class RunRecord:
    """
    Outcome of one run. ``best_fitness`` is the objective value for benchmarks
    and the array power in watts for solar runs; ``error`` is ``best - f_min``
    for benchmarks and ``None`` for solar.
    """

    index: int
    seed: int
    function: str
    dim: int
    best_fitness: float
    error: Optional[float]
    evaluations: int
    iterations: int
    trace: list
    best_position: Optional[np.ndarray] = None
    arrangement: Optional[ArrayArrangement] = None
    curve: Optional[PowerCurve] = None


@dataclass(frozen=True)
class SummaryStats:
    function: str
    dim: int
    best: float
    mean: float
    std: float


# ---------------------------------------------------------------------------
# Building runs
# ---------------------------------------------------------------------------


def build_objective(spec: ExperimentSpec) -> ObjectiveSpec:
    obj = make_spec(spec.function, spec.dim, seed=spec.instance_seed)
    if spec.shift_file or spec.rotation_file:
        obj = with_data(obj, spec.shift_file, spec.rotation_file)
    return obj


def swarm_config(spec: ExperimentSpec, obj: ObjectiveSpec, seed: int) -> SwarmConfig:
    try:
        return SwarmConfig.from_range(obj.bounds, obj.init_bounds, seed=seed, **spec.hyper)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def discrete_config(spec: ExperimentSpec, seed: int) -> DiscreteConfig:
    try:
        return DiscreteConfig(seed=seed, **spec.hyper)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _noise_rng(obj: ObjectiveSpec, seed: int) -> Optional[np.random.Generator]:
    # F4 noise gets its own stream so it never shifts the optimizer's draws
    return np.random.default_rng([seed, 0xF4]) if obj.function_id == "F4" else None


def _benchmark_record(index: int, seed: int, obj: ObjectiveSpec, result: RunResult) -> RunRecord:
    return RunRecord(
        index=index,
        seed=seed,
        function=obj.function_id,
        dim=obj.dim,
        best_fitness=result.best_fitness,
        error=result.best_fitness - obj.f_min,
        evaluations=result.evaluations,
        iterations=result.iterations,
        trace=result.trace,
        best_position=result.best_position,
    )


def _check_writable(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=out_dir):
            pass
    except OSError as exc:
        raise OSError(f"output directory {out_dir} is not writable: {exc}") from exc


def run_experiment(spec: ExperimentSpec, write: bool = True) -> list:
    """
    Execute ``spec.runs`` seeded runs and return their :class:`RunRecord` list.

    With ``write`` the output directory is checked before the first run and
    each run's CSVs are written as soon as it finishes.
    """
    spec.validate()
    out_dir = Path(spec.out_dir)
    if write:
        _check_writable(out_dir)
    if spec.mode == "benchmark":
        return _run_benchmark(spec, out_dir if write else None)
    return _run_solar(spec, out_dir if write else None)


def _run_benchmark(spec: ExperimentSpec, out_dir: Optional[Path]) -> list:
    obj = build_objective(spec)
    records = []
    for i in range(spec.runs):
        seed = spec.run_seed(i)
        result = run(swarm_config(spec, obj, seed), obj.bind(_noise_rng(obj, seed)))
        record = _benchmark_record(i, seed, obj, result)
        logger.info("%s D=%d run %d: error %.6g after %d evaluations", obj.function_id, obj.dim, i, record.error, record.evaluations)
        if out_dir is not None:
            write_convergence_csv(record, out_dir / f"{obj.function_id}_D{obj.dim}_run{i:02d}_convergence.csv")
        records.append(record)
    if out_dir is not None:
        write_summary_csv([summarize(records)], out_dir / f"{obj.function_id}_D{obj.dim}_summary.csv")
    return records


def _solar_inputs(spec: ExperimentSpec):
    k = short_wide_shadow() if spec.irradiance is None else load_irradiance(spec.irradiance)
    arrangement = None if spec.arrangement is None else load_arrangement(spec.arrangement, k)
    return k, arrangement


def _run_solar(spec: ExperimentSpec, out_dir: Optional[Path]) -> list:
    p = PVParams()
    k, arrangement = _solar_inputs(spec)
    rows, cols = k.shape
    tct_power, tct_curve = baseline_tct(k, p)
    baselines = [("TCT", tct_power)]
    if out_dir is not None:
        write_power_curve_csv(tct_curve, out_dir / "tct_curve.csv")
    if arrangement is not None:
        power, curve = max_power(row_currents(arrangement, p), p.V_m)
        baselines.append(("arrangement", power))
        if out_dir is not None:
            write_power_curve_csv(curve, out_dir / "arrangement_curve.csv")

    records = []
    for i in range(spec.runs):
        seed = spec.run_seed(i)
        result = run_discrete_pmso(discrete_config(spec, seed), k, p)
        _, curve = max_power(row_currents(result.best, p), p.V_m)
        record = RunRecord(
            index=i,
            seed=seed,
            function="solar",
            dim=rows * cols,
            best_fitness=result.p_max,
            error=None,
            evaluations=result.evaluations,
            iterations=result.iterations,
            trace=result.trace,
            arrangement=result.best,
            curve=curve,
        )
        logger.info("solar run %d: %.6g W after %d evaluations", i, result.p_max, result.evaluations)
        if out_dir is not None:
            stem = f"solar_run{i:02d}"
            write_convergence_csv(record, out_dir / f"{stem}_convergence.csv")
            write_power_curve_csv(curve, out_dir / f"{stem}_curve.csv")
            save_arrangement(out_dir / f"{stem}_arrangement.txt", result.best)
        records.append(record)

    if out_dir is not None:
        _write_rows(
            out_dir / "solar_runs.csv",
            SOLAR_RUNS_HEADER,
            [(r.index, r.seed, repr(float(r.best_fitness)), r.evaluations) for r in records],
        )
        _write_rows(out_dir / "baselines.csv", ("configuration", "p_max_watts"), [(n, repr(float(v))) for n, v in baselines])
    return records


# ---------------------------------------------------------------------------
# Statistics and CSV
# ---------------------------------------------------------------------------


def summarize(records) -> SummaryStats:
    """Best, mean and population std of the final errors of benchmark records."""
    records = list(records)
    if not records:
        raise ValueError("summarize needs at least one record")
    if any(r.error is None for r in records):
        raise ValueError("summarize applies to benchmark records only")
    keys = {(r.function, r.dim) for r in records}
    if len(keys) != 1:
        raise ValueError(f"records mix several targets: {sorted(keys)}")
    # sorted so the float sums do not depend on record order
    errors = np.sort(np.array([r.error for r in records], dtype=float))
    function, dim = keys.pop()
    return SummaryStats(function, dim, float(errors[0]), float(errors.mean()), float(errors.std()))


def _write_rows(path, header, rows) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_convergence_csv(record: RunRecord, path) -> None:
    _write_rows(path, CONVERGENCE_HEADER, [(it, ev, repr(float(f))) for it, ev, f in record.trace])


def write_summary_csv(stats, path) -> None:
    rows = [(s.function, s.dim, repr(s.best), repr(s.mean), repr(s.std)) for s in stats]
    _write_rows(path, SUMMARY_HEADER, rows)


def write_power_curve_csv(curve: PowerCurve, path) -> None:
    rows = zip(
        curve.remaining_rows,
        map(repr, curve.voltages),
        map(repr, curve.currents),
        map(repr, curve.powers),
    )
    _write_rows(path, CURVE_HEADER, rows)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def _optional_str(text: str) -> Optional[str]:
    return None if text.lower() == "none" else text


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SPEC_PARSERS = {
    "mode": str,
    "function": str,
    "dim": int,
    "instance_seed": int,
    "shift_file": _optional_str,
    "rotation_file": _optional_str,
    "irradiance": _optional_str,
    "arrangement": _optional_str,
    "runs": int,
    "seed": int,
    "out_dir": str,
}
_HYPER_PARSERS = {
    **{k: int for k in _INT_HYPER},
    **{k: float for k in _FLOAT_HYPER},
    **{k: _parse_bool for k in _BOOL_HYPER},
}
_POSITIVE = {"NG", "IG", "IL", "S_IL", "L_IL", "B", "N_init", "S_N", "L_N", "U_N", "N_GB", "convergence_eps", "time_budget"}
_NONNEGATIVE = {"NC", "max_evaluations"}


def _check_value(key: str, value) -> None:
    if key in _POSITIVE and not value > 0:
        raise ValueError(f"must be positive, got {value}")
    if key in _NONNEGATIVE and value < 0:
        raise ValueError(f"must be nonnegative, got {value}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"must be finite, got {value}")
    if key == "F" and not 0 < value <= 1:
        raise ValueError(f"must lie in (0, 1], got {value}")


def parse_config(text: str, source: str = "<config>") -> ExperimentSpec:
    """Parse ``key = value`` lines (``#`` starts a comment) into a validated spec."""
    values = {}
    hyper = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, _, value_text = (part.strip() for part in line.partition("="))
        parser = _SPEC_PARSERS.get(key) or _HYPER_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{where}: {key}: unknown key")
        if key in values or key in hyper:
            raise ConfigError(f"{where}: {key}: given twice")
        try:
            value = parser(value_text)
            _check_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key}: {exc}") from exc
        (values if key in _SPEC_PARSERS else hyper)[key] = value
    spec = ExperimentSpec(hyper=hyper, **values)
    try:
        spec.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return spec


def load_config(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def format_config(spec: ExperimentSpec) -> str:
    lines = []
    for f in dataclasses.fields(spec):
        if f.name == "hyper":
            continue
        value = getattr(spec, f.name)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    for key, value in spec.hyper.items():
        lines.append(f"{key} = {repr(value) if isinstance(value, float) else value}")
    return "\n".join(lines) + "\n"


def save_config(spec: ExperimentSpec, path) -> None:
    Path(path).write_text(format_config(spec))


def apply_overrides(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    """Copy of ``spec`` with the non-``None`` keyword values replaced (CLI flags)."""
    kept = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(spec, **kept)
