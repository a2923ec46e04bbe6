import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmso.geometry import Bounds, euclidean_distance
from pmso.optimizer import (
    BallStream,
    Particle,
    Status,
    SwarmConfig,
    SwarmState,
    Termination,
    _forage,
    _Counted,
    adapt_neighborhood,
    apply_wave,
    check_stop,
    classify_proximity,
    decrement_IL,
    init_neighborhood,
    initialize_swarm,
    local_search_step,
    run,
)
from oracles import stepwise_run
from pmso.testbed import make_spec


def sphere(x):
    return float(x @ x)


def rastrigin(x):
    return float(np.sum(x * x - 10 * np.cos(2 * np.pi * x) + 10))


def config(dim=2, low=-5.0, high=5.0, **kw):
    return SwarmConfig.from_range(Bounds.box(low, high, dim), **kw)


@pytest.mark.parametrize(
    "objective,low,high,seed",
    [(sphere, -5, 5, 0), (rastrigin, -5.12, 5.12, 3), (sphere, -1, 1, 7)],
)
def test_run_matches_stepwise_reference_bit_for_bit(objective, low, high, seed):
    cfg = config(3, low, high, max_evaluations=3000, seed=seed)
    state, trace, reason = stepwise_run(cfg, objective)
    result = run(cfg, objective)
    assert result.best_fitness == state.gb_fitness
    assert np.array_equal(result.best_position, state.gb_position)
    assert result.trace == trace
    assert result.termination is reason
    assert result.evaluations == state.evaluations


def test_forage_equals_step_functions_with_clamping():
    # particle hugging a corner with a big radius: most samples get clamped
    cfg = config(2, -1, 1, N_init=0.9, S_N=0.3, B=3)
    for seed in range(5):
        results = []
        for hoisted in (True, False):
            p = Particle(position=np.array([0.95, -0.95]), radius=0.9, buffer_size=cfg.B)
            p.reset_local_phase()
            stream = BallStream(np.random.default_rng(seed), 2, block=7)
            ev = _Counted(rastrigin)
            if hoisted:
                _forage(p, ev, stream, cfg.bounds, cfg, 40)
            else:
                for j in range(1, 41):
                    local_search_step(p, ev, stream, cfg.bounds)
                    adapt_neighborhood(p, cfg, j)
            results.append((p.position.tolist(), p.radius, p.status, p.lb_fitness, list(p.buffer), ev.count))
        assert results[0] == results[1]


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 5]))
def test_invariants_hold_throughout(seed, dim):
    cfg = config(dim, -3, 3, NG=8, IL=12, L_IL=4, S_IL=3, B=2, max_evaluations=800, seed=seed)
    seen = []

    def check(state, particle, IL):
        assert cfg.L_N <= particle.radius <= cfg.U_N
        assert IL >= cfg.L_IL
        assert cfg.bounds.contains(particle.position)
        seen.append(1)

    state, trace, _ = stepwise_run(cfg, rastrigin, check)
    assert seen
    best = [f for _, _, f in trace]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert state.evaluations <= cfg.max_evaluations + cfg.NG
    assert rastrigin(state.gb_position) == state.gb_fitness


def test_evaluation_cap_counts_every_call():
    calls = []

    def counted(x):
        calls.append(1)
        return sphere(x)

    cfg = config(2, max_evaluations=1234, NG=10)
    result = run(cfg, counted)
    assert result.evaluations == len(calls)
    assert len(calls) <= 1234 + cfg.NG
    assert result.termination is Termination.EVALUATION_CAP


def test_same_seed_same_result():
    spec = make_spec("F8", 2)
    cfg = SwarmConfig.from_range(spec.bounds, max_evaluations=4000, seed=42)
    a, b = run(cfg, spec.bind(None)), run(cfg, spec.bind(None))
    assert a == b


def test_different_seeds_differ():
    cfg0 = config(max_evaluations=2000, seed=0)
    cfg1 = config(max_evaluations=2000, seed=1)
    assert not np.array_equal(run(cfg0, sphere).best_position, run(cfg1, sphere).best_position)


def test_observer_sees_trace():
    seen = []
    result = run(config(max_evaluations=1500), sphere, observer=lambda *a: seen.append(a))
    assert seen == result.trace
    assert result.iterations == len(seen)


def test_sphere_converges():
    result = run(config(max_evaluations=20_000), sphere)
    assert result.best_fitness < 1e-8


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def test_from_range_defaults():
    cfg = config(2, -100, 100)
    assert cfg.NG == 40 and cfg.IL == 50 and cfg.S_IL == 5 and cfg.L_IL == 10 and cfg.B == 5 and cfg.F == 0.1
    assert cfg.N_init == pytest.approx(10.0)
    assert cfg.S_N == pytest.approx(1.0)
    assert cfg.L_N == pytest.approx(2e-4)
    assert cfg.U_N == pytest.approx(100.0)
    assert cfg.N_GB == pytest.approx(2.0)
    assert cfg.NC == 10
    assert cfg.max_evaluations == 20_000


@pytest.mark.parametrize(
    "kw,word",
    [({"NG": -1}, "NG"), ({"NG": 0}, "NG"), ({"L_IL": 60}, "L_IL"), ({"F": 0.0}, "F"), ({"B": 0}, "B"), ({"NC": 50}, "NC")],
)
def test_config_rejects_bad_values(kw, word):
    with pytest.raises(ValueError, match=word):
        config(**kw)


def test_one_dimension_rejected():
    with pytest.raises(ValueError, match="dimension"):
        config(dim=1)


def test_unbounded_search_needs_finite_init():
    inf = Bounds(np.full(2, -np.inf), np.full(2, np.inf))
    with pytest.raises(ValueError):
        SwarmConfig.from_range(inf)
    cfg = SwarmConfig.from_range(inf, init_bounds=Bounds.box(0, 600, 2))
    assert cfg.N_init == pytest.approx(30.0)


# ---------------------------------------------------------------------------
# Individual operations
# ---------------------------------------------------------------------------


def test_initialize_spreads_and_evaluates():
    cfg = config(2, NG=20)
    calls = []
    state = initialize_swarm(cfg, lambda x: calls.append(1) or sphere(x), np.random.default_rng(0))
    assert len(state.particles) == 20 and len(calls) == 20 and state.evaluations == 20
    pos = [p.position for p in state.particles]
    assert all(cfg.init_bounds.contains(q) for q in pos)
    assert min(euclidean_distance(a, b) for i, a in enumerate(pos) for b in pos[i + 1 :]) >= cfg.N_init
    assert state.gb_fitness == min(sphere(q) for q in pos)
    assert np.array_equal(state.gb_position, state.particles[state.founder].position)


def test_initialize_warns_when_box_is_too_crowded(caplog):
    cfg = config(2, -1, 1, NG=30, N_init=0.9, U_N=1.0)
    with caplog.at_level(logging.WARNING, logger="pmso.optimizer"):
        state = initialize_swarm(cfg, sphere, np.random.default_rng(0))
    assert len(state.particles) == 30
    assert "collision" in caplog.text


def _state_at(points, gb):
    parts = [Particle(position=np.array(p, float), radius=1.0, buffer_size=5) for p in points]
    return SwarmState(particles=parts, gb_position=np.array(gb, float), gb_fitness=0.0, founder=0)


def test_classify_proximity_ties_prefer_lower_index():
    state = _state_at([[3, 0], [1, 0], [0, 1], [-1, 0], [5, 5]], [0, 0])
    assert classify_proximity(state, 2) == {1, 2}
    assert classify_proximity(state, 3) == {1, 2, 3}
    assert classify_proximity(state, 0) == set()


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_close_wave_never_moves_away(seed, dim):
    rng = np.random.default_rng(seed)
    bounds = Bounds.box(-10, 10, dim)
    p = Particle(position=rng.uniform(-10, 10, dim), radius=1.0, buffer_size=5)
    gb = rng.uniform(-10, 10, dim)
    before = euclidean_distance(p.position, gb)
    after = euclidean_distance(apply_wave(p, gb, True, rng, bounds), gb)
    assert after <= before * (1 + 1e-12) + 1e-12


def test_close_wave_lands_on_segment():
    rng = np.random.default_rng(5)
    p = Particle(position=np.array([4.0, 0.0, 0.0]), radius=1.0, buffer_size=5)
    new = apply_wave(p, np.zeros(3), True, rng, Bounds.box(-10, 10, 3))
    assert abs(new[1]) < 1e-12 and abs(new[2]) < 1e-12 and 0 <= new[0] <= 4


def test_far_wave_stays_in_bounds_and_within_distance():
    rng = np.random.default_rng(9)
    bounds = Bounds.box(-1, 1, 3)
    for _ in range(200):
        p = Particle(position=rng.uniform(-1, 1, 3), radius=1.0, buffer_size=5)
        gb = rng.uniform(-1, 1, 3)
        new = apply_wave(p, gb, False, rng, bounds)
        assert bounds.contains(new)
        assert euclidean_distance(new, p.position) <= euclidean_distance(p.position, gb) + 1e-12


def test_wave_at_gb_does_nothing():
    p = Particle(position=np.array([1.0, 2.0]), radius=1.0, buffer_size=5)
    assert np.array_equal(apply_wave(p, [1.0, 2.0], True, np.random.default_rng(0), Bounds.box(-5, 5, 2)), [1.0, 2.0])


def test_init_neighborhood():
    cfg = config(2, -100, 100)
    p = Particle(position=np.array([30.0, 40.0]), radius=1.0, buffer_size=5)
    assert init_neighborhood(p, [0, 0], cfg, False) == pytest.approx(5.0)
    assert init_neighborhood(p, [0, 0], cfg, True) == cfg.N_GB
    p.position = np.array([1e-9, 0.0])
    assert init_neighborhood(p, [0, 0], cfg, False) == cfg.L_N
    p.position = np.array([1e5, 0.0])
    assert init_neighborhood(p, [0, 0], cfg, False) == cfg.U_N


def test_local_search_step_moves_only_on_improvement():
    bounds = Bounds.box(-5, 5, 2)
    p = Particle(position=np.array([1.0, 1.0]), radius=0.5, buffer_size=3)
    p.reset_local_phase()
    rng = np.random.default_rng(0)
    assert local_search_step(p, sphere, rng, bounds)  # first sample always beats +inf
    assert np.array_equal(p.position, p.lb_position)
    assert euclidean_distance(p.position, [1, 1]) <= 0.5
    # an objective that only gets worse never moves the particle again
    stuck = p.position.copy()
    counter = iter(range(100, 200))
    for _ in range(5):
        assert not local_search_step(p, lambda x: float(next(counter)), rng, bounds)
    assert np.array_equal(p.position, stuck)
    assert list(p.buffer) == [False] * 3


def test_local_search_step_clamps():
    bounds = Bounds.box(-1, 1, 2)
    p = Particle(position=np.array([1.0, 1.0]), radius=5.0, buffer_size=3)
    p.reset_local_phase()
    rng = np.random.default_rng(1)
    for _ in range(20):
        local_search_step(p, sphere, rng, bounds)
        assert bounds.contains(p.position)


def _failing(p, n):
    for _ in range(n):
        p.buffer.append(False)


def test_adapt_neighborhood_cycle():
    cfg = config(2, -100, 100, B=3, S_N=1.0)
    p = Particle(position=np.zeros(2), radius=10.0, buffer_size=cfg.B)
    _failing(p, 2)
    adapt_neighborhood(p, cfg, 2)
    assert p.status is Status.NO_CHANGE and p.radius == 10.0
    _failing(p, 1)
    adapt_neighborhood(p, cfg, 3)
    assert p.status is Status.INCREASE and p.radius == 11.0 and len(p.buffer) == 0
    _failing(p, 3)
    adapt_neighborhood(p, cfg, 6)
    assert p.status is Status.DECREASE and p.radius == 10.0
    _failing(p, 3)
    adapt_neighborhood(p, cfg, 9)
    assert p.status is Status.INCREASE and p.radius == 11.0


def test_adapt_neighborhood_respects_limits_and_success():
    cfg = config(2, -100, 100, B=2, S_N=1000.0)
    p = Particle(position=np.zeros(2), radius=10.0, buffer_size=cfg.B)
    p.buffer.extend([False, True])
    adapt_neighborhood(p, cfg, 5)
    assert p.radius == 10.0
    _failing(p, 2)
    adapt_neighborhood(p, cfg, 7)
    assert p.radius == cfg.U_N
    _failing(p, 2)
    adapt_neighborhood(p, cfg, 9)
    assert p.radius == cfg.L_N


def test_decrement_IL_floors():
    cfg = config(2)
    il, seen = cfg.IL, []
    for _ in range(12):
        il = decrement_IL(il, cfg)
        seen.append(il)
    assert seen[:4] == [45, 40, 35, 30] and seen[-1] == 10 and min(seen) == 10


def test_check_stop_reasons():
    cfg = config(2, max_evaluations=100, IG=5, convergence_eps=1e-3, time_budget=2.0)
    state = SwarmState(particles=[], gb_position=np.zeros(2), gb_fitness=1.0, founder=0)
    assert check_stop(state, cfg, 0.0) is None
    state.prev_gb_fitness = 1.5
    assert check_stop(state, cfg, 0.0) is None
    state.prev_gb_fitness = 1.0 + 1e-4
    assert check_stop(state, cfg, 0.0) is Termination.CONVERGED
    assert check_stop(state, cfg, 3.0) is Termination.TIMEOUT
    state.iteration = 5
    assert check_stop(state, cfg, 0.0) is Termination.ITERATION_CAP
    state.evaluations = 100
    assert check_stop(state, cfg, 0.0) is Termination.EVALUATION_CAP


def test_run_stops_on_iteration_cap_and_convergence():
    r = run(config(max_evaluations=0, IG=3), sphere)
    assert r.termination is Termination.ITERATION_CAP and r.iterations == 3
    r = run(config(max_evaluations=0, convergence_eps=1e-300, IG=10_000), lambda x: 1.0)
    assert r.termination is Termination.CONVERGED and r.iterations == 2


def test_nan_objective_treated_as_inf(caplog):
    def nan_left(x):
        return math.nan if x[0] < 0 else sphere(x)

    with caplog.at_level(logging.WARNING, logger="pmso.optimizer"):
        r = run(config(max_evaluations=2000), nan_left)
    assert math.isfinite(r.best_fitness) and r.best_position[0] >= 0
    assert "NaN" in caplog.text


def test_ballstream_take_matches_draw():
    a = BallStream(np.random.default_rng(4), 3, block=5)
    b = BallStream(np.random.default_rng(4), 3, block=5)
    taken = np.concatenate([a.take(3), a.take(9), a.take(1)])
    drawn = np.array([b.draw() for _ in range(13)])
    assert np.array_equal(taken, drawn)
    assert np.all(np.linalg.norm(drawn, axis=1) <= 1.0)
