"""
Partially shaded PV arrays in total-cross-tied (TCT) wiring, and their reconfiguration.

Cells in a row are wired in parallel and rows in series, so a row delivers
``I_m * sum(k)`` amperes where ``k`` are the irradiance factors of its cells.
Bypassing the weakest rows one by one trades voltage for current; the array
power is the best of those ``R`` operating points.

Cells may only move inside their own column. An :class:`ArrayArrangement`
records, for every slot ``(row, column)``, which original row the occupying
cell came from. The discrete PMSO variant searches over these arrangements.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .textmatrix import format_matrix, load_matrix, parse_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "ArrayArrangement",
    "ArrangementError",
    "DiscreteConfig",
    "DiscreteResult",
    "InstanceTooLargeError",
    "PVParams",
    "PowerCurve",
    "arrangement_distance",
    "array_power",
    "baseline_tct",
    "brute_force_best",
    "load_arrangement",
    "load_irradiance",
    "local_search_discrete",
    "max_power",
    "row_currents",
    "run_discrete_pmso",
    "save_arrangement",
    "save_irradiance",
    "short_wide_shadow",
    "wave_swap_pass",
]

BRUTE_FORCE_LIMIT = 10**7


class ArrangementError(ValueError):
    """A grid of labels that is not a per-column permutation."""


class InstanceTooLargeError(ValueError):
    """Exhaustive search would exceed the candidate budget."""


@dataclass(frozen=True)
class PVParams:
    """Module voltage ``V_m`` (V) and current at 1000 W/m^2 ``I_m`` (A)."""

    V_m: float = 22.512
    I_m: float = 3.902

    def __post_init__(self):
        if not (self.V_m > 0 and self.I_m > 0):
            raise ValueError("V_m and I_m must be positive")


def validate_irradiance(k) -> np.ndarray:
    k = np.array(k, dtype=float)
    if k.ndim != 2 or k.size == 0:
        raise ValueError("irradiance must be a non-empty R x C matrix")
    if not np.all((k >= 0.0) & (k <= 1.0)):
        raise ValueError("irradiance factors must lie in [0, 1]")
    k.setflags(write=False)
    return k


@dataclass
class ArrayArrangement:
    """
    Placement of cells in an ``R x C`` array.

    ``labels[r, c]`` is the original row (0-based) of the cell now sitting in
    row ``r`` of column ``c``. ``irradiance`` is indexed by original position.
    """

    labels: np.ndarray
    irradiance: np.ndarray

    def __post_init__(self):
        self.irradiance = validate_irradiance(self.irradiance)
        labels = np.array(self.labels, dtype=np.intp)
        if labels.shape != self.irradiance.shape:
            raise ArrangementError(f"labels shape {labels.shape} does not match irradiance {self.irradiance.shape}")
        rows = labels.shape[0]
        expected = np.arange(rows)
        for c in range(labels.shape[1]):
            if not np.array_equal(np.sort(labels[:, c]), expected):
                raise ArrangementError(f"column {c + 1} is not a permutation of rows 1..{rows}")
        self.labels = labels

    @classmethod
    def identity(cls, irradiance) -> "ArrayArrangement":
        k = validate_irradiance(irradiance)
        rows, cols = k.shape
        return cls(np.tile(np.arange(rows)[:, None], (1, cols)), k)

    @property
    def shape(self) -> tuple:
        return self.labels.shape

    def factors(self) -> np.ndarray:
        """Irradiance factor of the cell in every slot."""
        return self.irradiance[self.labels, np.arange(self.labels.shape[1])]

    def copy(self) -> "ArrayArrangement":
        new = object.__new__(ArrayArrangement)
        new.labels = self.labels.copy()
        new.irradiance = self.irradiance
        return new

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArrayArrangement):
            return NotImplemented
        return np.array_equal(self.labels, other.labels) and np.array_equal(self.irradiance, other.irradiance)


@dataclass(frozen=True)
class PowerCurve:
    """Operating points from no bypass (all ``R`` rows) down to a single remaining row."""

    remaining_rows: tuple
    voltages: tuple
    currents: tuple
    powers: tuple

    @property
    def points(self) -> list:
        return list(zip(self.remaining_rows, self.voltages, self.currents, self.powers))

    def __len__(self) -> int:
        return len(self.powers)


def row_currents(arr: ArrayArrangement, p: PVParams) -> np.ndarray:
    return p.I_m * arr.factors().sum(axis=1)


def max_power(currents, V_m: float) -> tuple:
    """
    Best operating point when the weakest rows are bypassed one at a time.

    With currents sorted ascending, rank ``r`` (1-based) keeps ``R - r + 1`` rows
    in series at the current of that row. Returns ``(p_max, PowerCurve)``.
    """
    cur = np.sort(np.asarray(currents, dtype=float))
    rows = cur.size
    if rows < 1:
        raise ValueError("need at least one row")
    remaining = np.arange(rows, 0, -1)
    volts = remaining * V_m
    powers = volts * cur
    curve = PowerCurve(
        remaining_rows=tuple(int(n) for n in remaining),
        voltages=tuple(volts.tolist()),
        currents=tuple(cur.tolist()),
        powers=tuple(powers.tolist()),
    )
    return float(powers.max()), curve


def array_power(arr: ArrayArrangement, p: PVParams) -> float:
    return max_power(row_currents(arr, p), p.V_m)[0]


def baseline_tct(irr, p: PVParams) -> tuple:
    """Power of the unshuffled TCT wiring: ``(p_max, PowerCurve)``."""
    return max_power(row_currents(ArrayArrangement.identity(irr), p), p.V_m)


def arrangement_distance(a: ArrayArrangement, b: ArrayArrangement) -> float:
    """Normalized count of slots holding different cells: ``sqrt(mismatches / (R * C))``."""
    if a.labels.shape != b.labels.shape:
        raise ValueError(f"shape mismatch: {a.labels.shape} vs {b.labels.shape}")
    return math.sqrt(np.count_nonzero(a.labels != b.labels) / a.labels.size)


def _swap(labels: np.ndarray, c: int, r1: int, r2: int) -> None:
    labels[r1, c], labels[r2, c] = labels[r2, c], labels[r1, c]


def wave_swap_pass(arr: ArrayArrangement, gb: ArrayArrangement, rng: np.random.Generator) -> ArrayArrangement:
    """
    Discrete sea wave: shuffle cells inside their columns, harder the further ``arr`` is from ``gb``.

    For each column the distance to ``gb`` is recomputed (earlier columns may
    already have changed). Each cell then moves with probability equal to that
    distance, by ``round(U(-w, w))`` rows with ``w = round(R * distance)``;
    columns wrap around as rings.
    """
    if arr.labels.shape != gb.labels.shape:
        raise ValueError("arrangement and global best differ in shape")
    rows, cols = arr.labels.shape
    lab = arr.labels.tolist()
    target = gb.labels.tolist()
    size = rows * cols
    mismatches = sum(a != b for row, trow in zip(lab, target) for a, b in zip(row, trow))
    for c in range(cols):
        distance = math.sqrt(mismatches / size)
        if distance == 0.0:
            continue
        width = round(rows * distance)
        moves = rng.random(rows).tolist()
        steps = rng.uniform(-width, width, rows).tolist()
        for r in range(rows):
            if moves[r] < distance:
                r2 = (r + round(steps[r])) % rows
                a, b = lab[r][c], lab[r2][c]
                t1, t2 = target[r][c], target[r2][c]
                mismatches += (b != t1) + (a != t2) - (a != t1) - (b != t2)
                lab[r][c], lab[r2][c] = b, a
    return _wrap(np.array(lab, dtype=np.intp), arr.irradiance)


def local_search_discrete(arr: ArrayArrangement, rng: np.random.Generator) -> ArrayArrangement:
    """Swap two distinct, uniformly chosen cells of one uniformly chosen column."""
    rows, cols = arr.labels.shape
    if rows < 2:
        raise ValueError("need at least two rows to swap")
    out = arr.copy()
    c = int(rng.integers(cols))
    r1, r2 = (int(v) for v in rng.choice(rows, size=2, replace=False))
    _swap(out.labels, c, r1, r2)
    return out


def brute_force_best(irr, p: PVParams, limit: int = BRUTE_FORCE_LIMIT) -> tuple:
    """
    Exact optimum by enumerating every per-column permutation.

    Column 1 stays fixed because relabeling rows does not change the power.
    Returns ``(p_max, ArrayArrangement)``.
    """
    k = validate_irradiance(irr)
    rows, cols = k.shape
    count = math.factorial(rows) ** (cols - 1)
    if count > limit:
        raise InstanceTooLargeError(f"{rows}x{cols} array needs {count} candidates, limit is {limit}")
    perms = np.array(list(itertools.permutations(range(rows))), dtype=np.intp)
    # contribution of column c to every row, for every permutation of that column
    contrib = [k[perms, c] for c in range(cols)]
    best_power = -math.inf
    best_choice = None
    for choice in itertools.product(range(len(perms)), repeat=cols - 1):
        sums = contrib[0][0].copy()
        for c, idx in enumerate(choice, start=1):
            sums += contrib[c][idx]
        power = max_power(p.I_m * sums, p.V_m)[0]
        if power > best_power:
            best_power = power
            best_choice = choice
    labels = np.empty((rows, cols), dtype=np.intp)
    labels[:, 0] = perms[0]
    for c, idx in enumerate(best_choice or (), start=1):
        labels[:, c] = perms[idx]
    return best_power, ArrayArrangement(labels, k)


@dataclass
class DiscreteConfig:
    """
    Hyperparameters of the discrete PMSO search.

    Neighborhood sizes do not apply: the local move is always a single swap.
    """

    NG: int = 40
    IG: int = 1_000_000
    IL: int = 50
    S_IL: int = 5
    L_IL: int = 50
    max_evaluations: int = 50_000
    accept_ties: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("NG", "IG", "IL", "S_IL", "L_IL"):
            value = getattr(self, name)
            if not (isinstance(value, (int, np.integer)) and value >= 1):
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.L_IL > self.IL:
            raise ValueError(f"L_IL ({self.L_IL}) must not exceed IL ({self.IL})")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be positive")


@dataclass
class DiscreteResult:
    best: ArrayArrangement
    p_max: float
    trace: list = field(default_factory=list)
    evaluations: int = 0
    iterations: int = 0


def run_discrete_pmso(
    cfg: DiscreteConfig,
    irr,
    p: PVParams,
    rng: Optional[np.random.Generator] = None,
    observer=None,
) -> DiscreteResult:
    """
    Maximize array power over in-column arrangements.

    Particles start from random in-column shuffles. Every later global
    iteration the GB founder is reset to GB and the others get a
    :func:`wave_swap_pass`, followed by ``IL`` greedy single-swap moves.
    ``trace`` holds ``(iteration, evaluations, best power)`` per iteration.
    """
    k = validate_irradiance(irr)
    rows, cols = k.shape
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    I_m, V_m = p.I_m, p.V_m
    weights = V_m * np.arange(rows, 0, -1)
    weight_list = weights.tolist()
    kl = k.tolist()
    evaluations = 0

    def fitness(labels: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        return _power_of(_row_sums(labels.tolist(), kl), weight_list, I_m)

    particles = []
    powers = []
    for i in range(cfg.NG):
        for _ in range(100 + 1):
            labels = np.stack([rng.permutation(rows) for _ in range(cols)], axis=1)
            if not any(np.array_equal(labels, q) for q in particles):
                break
        else:
            logger.warning("particle %d: no distinct arrangement after 100 redraws", i)
        particles.append(labels)
        powers.append(fitness(labels))
    founder = int(np.argmax(powers))
    gb_labels = particles[founder].copy()
    gb_power = powers[founder]

    IL = cfg.IL
    iteration = 0
    trace = []
    gb = ArrayArrangement(gb_labels, k)
    while evaluations < cfg.max_evaluations and iteration < cfg.IG:
        for i in range(cfg.NG):
            if evaluations >= cfg.max_evaluations:
                break
            if iteration > 0:
                if i == founder:
                    particles[i] = gb.labels.copy()
                    current = gb_power
                else:
                    arr = _wrap(particles[i], k)
                    particles[i] = wave_swap_pass(arr, gb, rng).labels
                    current = fitness(particles[i])
            else:
                current = powers[i]
            steps = min(IL, cfg.max_evaluations - evaluations)
            labels, lb = _local_phase(particles[i], current, kl, steps, rng, weight_list, I_m, cfg.accept_ties)
            evaluations += steps
            particles[i] = labels
            if lb > gb_power:
                gb_power = lb
                gb = _wrap(labels.copy(), k)
                founder = i
        IL = max(IL - cfg.S_IL, cfg.L_IL)
        iteration += 1
        trace.append((iteration, evaluations, gb_power))
        if observer is not None:
            observer(iteration, evaluations, gb_power)

    return DiscreteResult(best=gb, p_max=gb_power, trace=trace, evaluations=evaluations, iterations=iteration)


def _row_sums(lab, kl):
    cols = len(kl[0])
    return [sum(kl[row[c]][c] for c in range(cols)) for row in lab]


def _power_of(sums, weights, I_m):
    return max(w * (I_m * s) for w, s in zip(weights, sorted(sums)))


def _local_phase(labels, start, kl, steps, rng, weights, I_m, accept_ties):
    """
    ``steps`` single-swap moves from ``labels``; each is kept if it improves
    (or, with ``accept_ties``, does not worsen) the running local best.

    Works on nested lists and only re-sums the two touched rows per move.
    Row sums always run over columns in order so equal rows give equal floats.
    """
    rows, cols = labels.shape
    lab = labels.tolist()
    sums = _row_sums(lab, kl)
    cs = rng.integers(cols, size=steps).tolist()
    r1s = rng.integers(rows, size=steps).tolist()
    r2s = rng.integers(rows - 1, size=steps).tolist()
    lb = start
    for c, r1, r2 in zip(cs, r1s, r2s):
        if r2 >= r1:
            r2 += 1
        a, b = lab[r1], lab[r2]
        a[c], b[c] = b[c], a[c]
        s1, s2 = sums[r1], sums[r2]
        sums[r1] = sum(kl[a[j]][j] for j in range(cols))
        sums[r2] = sum(kl[b[j]][j] for j in range(cols))
        value = _power_of(sums, weights, I_m)
        if value > lb or (accept_ties and value == lb):
            lb = value
        else:
            a[c], b[c] = b[c], a[c]
            sums[r1], sums[r2] = s1, s2
    return np.array(lab, dtype=np.intp), lb


def _wrap(labels: np.ndarray, k: np.ndarray) -> ArrayArrangement:
    # trusted internal construction; skips permutation validation
    arr = object.__new__(ArrayArrangement)
    arr.labels = labels
    arr.irradiance = k
    return arr


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def load_irradiance(path) -> np.ndarray:
    return validate_irradiance(load_matrix(path))


def save_irradiance(path, k) -> None:
    Path(path).write_text(format_matrix(validate_irradiance(k)))


def short_wide_shadow() -> np.ndarray:
    """The shipped 9 x 9 short-and-wide shadow (TCT row sums 8.1 x 5, 6.6, 3.6 x 3)."""
    text = resources.files("pmso.data").joinpath("short_wide_shadow.txt").read_text()
    return validate_irradiance(parse_matrix(text, "short_wide_shadow.txt"))


def load_arrangement(path, irradiance) -> ArrayArrangement:
    """Read a grid of 1-based original-row labels and validate it against ``irradiance``."""
    path = Path(path)
    grid = parse_matrix(path.read_text(), str(path), dtype=int)
    try:
        return ArrayArrangement(grid - 1, irradiance)
    except ArrangementError as exc:
        raise ArrangementError(f"{path}: {exc}") from exc


def save_arrangement(path, arr: ArrayArrangement) -> None:
    Path(path).write_text(format_matrix(arr.labels + 1))
