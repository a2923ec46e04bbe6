"""
Continuous Pontogammarus Maeoticus Swarm Optimization (PMSO).

Each particle ("Gammarus") alternates between two phases per global iteration:

* a sea wave that moves it relative to the global best (GB), toward GB for the
  ``NC`` closest particles and in a random direction for the others, with a
  strength proportional to its distance from GB;
* a foraging phase of ``IL`` hill-climbing samples inside a ball whose radius
  adapts when the particle stagnates.

The particle that found GB is put exactly on GB instead of being waved.
Minimization throughout.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import (
    Bounds,
    clamp_to_bounds,
    compose_wave,
    direction_angles,
    euclidean_distance,
    random_angles,
    sample_in_ball,
)

logger = logging.getLogger(__name__)

__all__ = [
    "COLLISION_RETRIES",
    "BallStream",
    "Particle",
    "RunResult",
    "Status",
    "SwarmConfig",
    "SwarmState",
    "Termination",
    "adapt_neighborhood",
    "apply_wave",
    "check_stop",
    "classify_proximity",
    "decrement_IL",
    "init_neighborhood",
    "initialize_swarm",
    "local_search_step",
    "run",
]

COLLISION_RETRIES = 100

Objective = Callable[[np.ndarray], float]
Observer = Callable[[int, int, float], None]


class Status(enum.Enum):
    NO_CHANGE = "NoChange"
    INCREASE = "Increase"
    DECREASE = "Decrease"


class Termination(enum.Enum):
    CONVERGED = "converged"
    TIMEOUT = "timeout"
    ITERATION_CAP = "iteration-cap"
    EVALUATION_CAP = "evaluation-cap"


@dataclass
class SwarmConfig:
    """
    Hyperparameters of a PMSO run.

    ``bounds`` is the feasible box that waves and samples are clamped to; it may
    have infinite limits. ``init_bounds`` is where the swarm is seeded and must
    be finite; it defaults to ``bounds``.

    Stop criteria: ``IG`` global iterations always applies; ``max_evaluations``
    defaults to ``10000 * D``; ``convergence_eps`` and ``time_budget`` are off
    unless set. Pass ``max_evaluations=0`` to disable the evaluation cap.
    """

    bounds: Bounds
    NG: int = 40
    IG: int = 1_000_000
    IL: int = 50
    S_IL: int = 5
    L_IL: int = 10
    N_init: float = 1.0
    S_N: float = 0.1
    L_N: float = 1e-6
    U_N: float = 10.0
    B: int = 5
    F: float = 0.1
    N_GB: float = 0.1
    NC: int = 10
    init_bounds: Optional[Bounds] = None
    max_evaluations: Optional[int] = None
    convergence_eps: Optional[float] = None
    time_budget: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.init_bounds is None:
            self.init_bounds = self.bounds
        if self.max_evaluations is None:
            self.max_evaluations = 10_000 * self.dim
        self.validate()

    @classmethod
    def from_range(cls, bounds: Bounds, init_bounds: Optional[Bounds] = None, **overrides) -> "SwarmConfig":
        """
        Build a config whose length-scale hyperparameters follow the search range.

        ``range`` is the mean width of ``init_bounds`` (or ``bounds``). Defaults:
        ``N_init = 0.05 range``, ``S_N = 0.1 N_init``, ``L_N = 1e-6 range``,
        ``U_N = 0.5 range``, ``N_GB = 0.01 range`` and ``NC = ceil(NG / 4)``.
        Any keyword given explicitly wins.
        """
        region = init_bounds if init_bounds is not None else bounds
        width = region.mean_width
        if not math.isfinite(width):
            raise ValueError("initialization region must be finite")
        ng = overrides.get("NG", cls.NG)
        n_init = overrides.get("N_init", 0.05 * width)
        params = dict(
            N_init=n_init,
            S_N=0.1 * n_init,
            L_N=1e-6 * width,
            U_N=0.5 * width,
            N_GB=0.01 * width,
            NC=math.ceil(ng / 4),
        )
        params.update(overrides)
        return cls(bounds=bounds, init_bounds=init_bounds, **params)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ValueError(msg)

        need(self.dim >= 2, f"dimension must be at least 2, got {self.dim}")
        need(self.init_bounds.dim == self.dim, "init_bounds and bounds differ in dimension")
        need(self.init_bounds.is_finite, "init_bounds must be finite")
        for name in ("NG", "IG", "IL", "S_IL", "L_IL", "B"):
            value = getattr(self, name)
            need(isinstance(value, (int, np.integer)) and value >= 1, f"{name} must be a positive integer, got {value!r}")
        for name in ("N_init", "S_N", "L_N", "U_N", "N_GB"):
            value = getattr(self, name)
            need(value > 0 and math.isfinite(value), f"{name} must be a positive finite number, got {value!r}")
        need(0 < self.F <= 1, f"F must lie in (0, 1], got {self.F}")
        need(self.L_IL <= self.IL, f"L_IL ({self.L_IL}) must not exceed IL ({self.IL})")
        need(self.L_N <= self.N_init <= self.U_N, "need L_N <= N_init <= U_N")
        need(self.L_N <= self.N_GB <= self.U_N, "need L_N <= N_GB <= U_N")
        need(0 <= self.NC <= self.NG, f"NC must lie in [0, NG], got {self.NC}")
        need(self.max_evaluations >= 0, "max_evaluations must be nonnegative")
        if self.convergence_eps is not None:
            need(self.convergence_eps > 0, "convergence_eps must be positive")
        if self.time_budget is not None:
            need(self.time_budget > 0, "time_budget must be positive")


@dataclass
class Particle:
    position: np.ndarray
    radius: float
    buffer_size: int
    status: Status = Status.NO_CHANGE
    buffer: deque = field(init=False)
    lb_position: Optional[np.ndarray] = None
    lb_fitness: float = math.inf

    def __post_init__(self):
        self.buffer = deque(maxlen=self.buffer_size)

    def reset_local_phase(self) -> None:
        self.status = Status.NO_CHANGE
        self.buffer.clear()
        self.lb_position = None
        self.lb_fitness = math.inf


@dataclass
class SwarmState:
    particles: list
    gb_position: np.ndarray
    gb_fitness: float
    founder: int
    evaluations: int = 0
    iteration: int = 0
    IL: int = 1
    prev_gb_fitness: Optional[float] = None


@dataclass(eq=False)
class RunResult:
    best_position: np.ndarray
    best_fitness: float
    trace: list
    termination: Termination
    evaluations: int
    iterations: int

    def __eq__(self, other):
        # exact equality, positions compared element by element
        if not isinstance(other, RunResult):
            return NotImplemented
        return (
            np.array_equal(self.best_position, other.best_position)
            and self.best_fitness == other.best_fitness
            and self.trace == other.trace
            and self.termination is other.termination
            and self.evaluations == other.evaluations
            and self.iterations == other.iterations
        )


class _Counted:
    """Evaluation counter around the objective; NaN becomes +inf."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.count = 0
        self._warned = False

    def __call__(self, x: np.ndarray) -> float:
        self.count += 1
        value = float(self.objective(x))
        if value != value:
            return self.nan_to_inf(x)
        return value

    def nan_to_inf(self, x: np.ndarray) -> float:
        if not self._warned:
            logger.warning("objective returned NaN at %s; treating as +inf", x)
            self._warned = True
        return math.inf


def initialize_swarm(cfg: SwarmConfig, objective: Objective, rng: np.random.Generator) -> SwarmState:
    """Scatter ``NG`` particles uniformly over the initialization region and evaluate them once."""
    region = cfg.init_bounds
    evaluate = objective if isinstance(objective, _Counted) else _Counted(objective)
    start = evaluate.count
    positions = []
    particles = []
    fitness = []
    for i in range(cfg.NG):
        for _ in range(COLLISION_RETRIES + 1):
            candidate = rng.uniform(region.lower, region.upper)
            if all(euclidean_distance(candidate, q) >= cfg.N_init for q in positions):
                break
        else:
            logger.warning(
                "particle %d: no collision-free spot after %d redraws; accepting overlap",
                i,
                COLLISION_RETRIES,
            )
        positions.append(candidate)
        particles.append(Particle(position=candidate, radius=cfg.N_init, buffer_size=cfg.B))
        fitness.append(evaluate(candidate))
    best = int(np.argmin(fitness))
    return SwarmState(
        particles=particles,
        gb_position=positions[best].copy(),
        gb_fitness=fitness[best],
        founder=best,
        evaluations=evaluate.count - start,
        IL=cfg.IL,
    )


def classify_proximity(state: SwarmState, NC: int) -> set:
    if NC <= 0:
        return set()
    dists = [euclidean_distance(p.position, state.gb_position) for p in state.particles]
    # stable sort keeps the lower index first on ties
    order = sorted(range(len(dists)), key=dists.__getitem__)
    return set(order[:NC])


def apply_wave(
    particle: Particle,
    gb,
    is_close: bool,
    rng: np.random.Generator,
    bounds: Bounds,
) -> np.ndarray:
    """New position of a non-founder particle after one sea wave."""
    gb = np.asarray(gb, dtype=float)
    offset = gb - particle.position
    dist = math.sqrt(float(offset @ offset))
    if dist == 0.0:
        return particle.position.copy()
    magnitude = rng.random() * dist
    if is_close:
        angles = direction_angles(offset)
    else:
        angles = random_angles(offset.size, rng)
    return clamp_to_bounds(particle.position + compose_wave(magnitude, angles), bounds)


def init_neighborhood(particle: Particle, gb, cfg: SwarmConfig, is_founder: bool) -> float:
    if is_founder:
        return cfg.N_GB
    radius = cfg.F * euclidean_distance(gb, particle.position)
    return min(max(radius, cfg.L_N), cfg.U_N)


class BallStream:
    """
    Block-buffered source of points drawn uniformly from the unit ball in ``dim`` dimensions.

    Foraging draws come from their own stream so that pre-drawing in blocks
    never changes the sequence seen by waves and initialization.
    """

    def __init__(self, rng: np.random.Generator, dim: int, block: int = 1024):
        self.rng = rng
        self.dim = dim
        self.block = block
        self._buf = np.empty((0, dim))
        self._next = 0

    def _refill(self) -> None:
        g = self.rng.standard_normal((self.block, self.dim))
        norms = np.sqrt(np.einsum("ij,ij->i", g, g))
        norms[norms == 0.0] = np.inf
        r = self.rng.random(self.block) ** (1.0 / self.dim)
        self._buf = g * (r / norms)[:, None]
        self._next = 0

    def draw(self) -> np.ndarray:
        if self._next >= len(self._buf):
            self._refill()
        out = self._buf[self._next]
        self._next += 1
        return out

    def take(self, n: int) -> np.ndarray:
        """The next ``n`` draws as an ``(n, dim)`` array; same sequence as ``n`` calls to :meth:`draw`."""
        parts = []
        while n > 0:
            if self._next >= len(self._buf):
                self._refill()
            chunk = self._buf[self._next : self._next + n]
            self._next += len(chunk)
            n -= len(chunk)
            parts.append(chunk)
        if len(parts) == 1:
            return parts[0]
        return np.concatenate(parts) if parts else np.empty((0, self.dim))


def local_search_step(
    particle: Particle,
    objective: Objective,
    rng,
    bounds: Bounds,
) -> bool:
    """
    One foraging sample in the particle's ball.

    The candidate is clamped to ``bounds`` and evaluated. On improvement of the
    local best the particle moves there. The outcome is pushed into the buffer.
    ``rng`` is a ``numpy.random.Generator`` or a :class:`BallStream`.
    """
    position = particle.position
    if particle.radius > 0.0:
        if isinstance(rng, BallStream):
            offset = rng.draw()
        else:
            offset = sample_in_ball(np.zeros(position.size), 1.0, rng)
        candidate = np.minimum(np.maximum(position + particle.radius * offset, bounds.lower), bounds.upper)
    else:
        candidate = np.minimum(np.maximum(position, bounds.lower), bounds.upper)
    value = objective(candidate)
    improved = value < particle.lb_fitness
    if improved:
        particle.lb_fitness = value
        particle.lb_position = candidate
        particle.position = candidate
    particle.buffer.append(improved)
    return improved


def adapt_neighborhood(particle: Particle, cfg: SwarmConfig, j: int) -> Particle:
    """
    Resize the neighborhood after ``B`` consecutive failed samples.

    ``j`` is the 1-based local iteration. NoChange and Decrease switch to
    Increase (radius + S_N, capped at U_N); Increase switches to Decrease
    (radius - S_N, floored at L_N). The buffer restarts after every switch, so
    the next switch needs ``B`` fresh failures.
    """
    if j < cfg.B or len(particle.buffer) < cfg.B or any(particle.buffer):
        return particle
    if particle.status is Status.INCREASE:
        particle.status = Status.DECREASE
        particle.radius = max(particle.radius - cfg.S_N, cfg.L_N)
    else:
        particle.status = Status.INCREASE
        particle.radius = min(particle.radius + cfg.S_N, cfg.U_N)
    particle.buffer.clear()
    return particle


def _ball_inside(center: np.ndarray, radius: float, lower: list, upper: list) -> bool:
    return all(lo + radius < c < hi - radius for c, lo, hi in zip(center.tolist(), lower, upper))


def _forage(particle: Particle, evaluate: _Counted, stream: BallStream, bounds: Bounds, cfg: SwarmConfig, steps: int) -> None:
    """
    ``steps`` rounds of :func:`local_search_step` + :func:`adapt_neighborhood`.

    Same draws, same decisions; lookups are hoisted and the unit offsets for
    the whole phase are fetched and scaled at once.
    """
    if steps <= 0:
        return
    lower, upper = bounds.lower, bounds.upper
    lower_list, upper_list = lower.tolist(), upper.tolist()
    minimum, maximum = np.minimum, np.maximum
    objective = evaluate.objective
    buffer = particle.buffer
    B, S_N, L_N, U_N = cfg.B, cfg.S_N, cfg.L_N, cfg.U_N
    position = particle.position
    radius = particle.radius
    lb = particle.lb_fitness
    offsets = stream.take(steps)
    scaled = radius * offsets
    # clamping is the identity while the whole ball sits inside the box
    inside = _ball_inside(position, radius, lower_list, upper_list)
    for j in range(1, steps + 1):
        candidate = position + scaled[j - 1]
        if not inside:
            candidate = minimum(maximum(candidate, lower), upper)
        value = float(objective(candidate))
        if value != value:
            value = evaluate.nan_to_inf(candidate)
        improved = value < lb
        if improved:
            lb = value
            position = candidate
            particle.lb_position = candidate
            inside = _ball_inside(position, radius, lower_list, upper_list)
        buffer.append(improved)
        if j >= B and len(buffer) == B and not any(buffer):
            if particle.status is Status.INCREASE:
                particle.status = Status.DECREASE
                radius = max(radius - S_N, L_N)
            else:
                particle.status = Status.INCREASE
                radius = min(radius + S_N, U_N)
            buffer.clear()
            scaled = radius * offsets
            inside = _ball_inside(position, radius, lower_list, upper_list)
    evaluate.count += steps
    particle.position = position
    particle.radius = radius
    particle.lb_fitness = lb


def decrement_IL(IL: int, cfg: SwarmConfig) -> int:
    return max(IL - cfg.S_IL, cfg.L_IL)


def check_stop(state: SwarmState, cfg: SwarmConfig, elapsed: float) -> Optional[Termination]:
    if cfg.max_evaluations and state.evaluations >= cfg.max_evaluations:
        return Termination.EVALUATION_CAP
    if state.iteration >= cfg.IG:
        return Termination.ITERATION_CAP
    if cfg.time_budget is not None and elapsed >= cfg.time_budget:
        return Termination.TIMEOUT
    if (
        cfg.convergence_eps is not None
        and state.prev_gb_fitness is not None
        and abs(state.gb_fitness - state.prev_gb_fitness) < cfg.convergence_eps
    ):
        return Termination.CONVERGED
    return None


def run(cfg: SwarmConfig, objective: Objective, observer: Optional[Observer] = None) -> RunResult:
    """
    Minimize ``objective`` over ``cfg.bounds``.

    ``observer`` is called as ``observer(iteration, evaluations, gb_fitness)``
    after every global iteration. A run is a pure function of ``cfg`` (seed
    included) and the objective.
    """
    wave_seq, forage_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(wave_seq)
    forage = BallStream(np.random.default_rng(forage_seq), cfg.dim)
    evaluate = _Counted(objective)
    started = time.perf_counter()
    state = initialize_swarm(cfg, evaluate, rng)
    cap = cfg.max_evaluations or math.inf
    bounds = cfg.bounds
    trace = []

    while True:
        close = classify_proximity(state, cfg.NC) if state.iteration > 0 else set()
        out_of_budget = False
        for i, particle in enumerate(state.particles):
            if state.evaluations >= cap:
                out_of_budget = True
                break
            is_founder = i == state.founder
            if state.iteration > 0:
                if is_founder:
                    particle.position = state.gb_position.copy()
                else:
                    particle.position = apply_wave(particle, state.gb_position, i in close, rng, bounds)
                particle.radius = init_neighborhood(particle, state.gb_position, cfg, is_founder)

            particle.reset_local_phase()
            budget = min(state.IL, cap - evaluate.count)
            _forage(particle, evaluate, forage, bounds, cfg, budget)
            if budget < state.IL:
                out_of_budget = True
            state.evaluations = evaluate.count

            if particle.lb_fitness < state.gb_fitness:
                state.gb_fitness = particle.lb_fitness
                state.gb_position = particle.lb_position.copy()
                state.founder = i
            if out_of_budget:
                break

        state.IL = decrement_IL(state.IL, cfg)
        state.iteration += 1
        trace.append((state.iteration, state.evaluations, state.gb_fitness))
        if observer is not None:
            observer(state.iteration, state.evaluations, state.gb_fitness)

        reason = check_stop(state, cfg, time.perf_counter() - started)
        if reason is not None:
            break
        state.prev_gb_fitness = state.gb_fitness

    return RunResult(
        best_position=state.gb_position,
        best_fitness=state.gb_fitness,
        trace=trace,
        termination=reason,
        evaluations=state.evaluations,
        iterations=state.iteration,
    )
