import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_angles, naive_cartesian
from pmso.geometry import (
    Bounds,
    DegenerateDirectionError,
    clamp_to_bounds,
    compose_wave,
    direction_angles,
    euclidean_distance,
    random_angles,
    sample_in_ball,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def vectors(min_dim=2, max_dim=12):
    return st.integers(min_dim, max_dim).flatmap(lambda d: arrays(float, d, elements=finite))


# --- euclidean_distance -----------------------------------------------------


def test_distance_3_4_5():
    assert euclidean_distance([0, 0], [3, 4]) == 5.0


def test_distance_rejects_mismatch():
    with pytest.raises(ValueError):
        euclidean_distance([0, 0], [1, 2, 3])


@given(st.integers(1, 8).flatmap(lambda d: st.tuples(*[arrays(float, d, elements=finite)] * 3)))
def test_distance_metric_axioms(triple):
    a, b, c = triple
    assert euclidean_distance(a, b) == euclidean_distance(b, a)
    assert euclidean_distance(a, a) == 0.0
    assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9 * (
        1 + euclidean_distance(a, c)
    )


# --- angles -----------------------------------------------------------------


def test_angles_of_axis_vectors():
    assert np.allclose(direction_angles([1.0, 0.0]), [0.0])
    assert np.allclose(direction_angles([0.0, 1.0]), [math.pi / 2])
    assert np.allclose(direction_angles([-1.0, 0.0]), [math.pi])
    assert np.allclose(direction_angles([0.0, 0.0, 1.0]), [math.pi / 2, math.pi / 2])


def test_negative_y_gives_negative_last_angle():
    assert direction_angles([0.0, -1.0])[0] == pytest.approx(-math.pi / 2)


def test_zero_vector_is_degenerate():
    with pytest.raises(DegenerateDirectionError):
        direction_angles(np.zeros(4))


def test_one_dimension_rejected():
    with pytest.raises(ValueError):
        direction_angles([1.0])
    with pytest.raises(ValueError):
        random_angles(1, np.random.default_rng(0))


@given(vectors())
def test_angles_match_textbook_formula(v):
    # the loop oracle squares components, so keep clear of underflow
    assume(np.linalg.norm(v) > 1e-3 and np.all((v == 0) | (np.abs(v) > 1e-100)))
    ours = direction_angles(v)
    ref = naive_angles(v)
    assert np.allclose(ours[:-1], ref[:-1], atol=1e-7)
    diff = (ours[-1] - ref[-1]) % (2 * math.pi)
    assert min(diff, 2 * math.pi - diff) < 1e-7


@given(vectors())
def test_angle_ranges(v):
    assume(np.any(v))
    angles = direction_angles(v)
    assert np.all((angles[:-1] >= 0) & (angles[:-1] <= math.pi))
    assert -math.pi < angles[-1] <= math.pi


@given(vectors())
def test_round_trip(v):
    assume(np.linalg.norm(v) > 1e-150)
    r = np.linalg.norm(v)
    back = compose_wave(r, direction_angles(v))
    assert np.allclose(back, v, rtol=0, atol=1e-9 * r)


def test_round_trip_near_negative_axis():
    # x < 0 with tiny y is where the naive half-angle form cancels
    v = np.array([-1.0, 1e-300])
    assert np.allclose(compose_wave(1.0, direction_angles(v)), v)


# --- compose_wave ---------------------------------------------------------------


@given(st.one_of(st.just(0.0), st.floats(1e-100, 1e6)), st.integers(1, 10).flatmap(lambda n: arrays(float, n, elements=st.floats(-10, 10))))
def test_wave_matches_textbook_and_has_magnitude_norm(r, angles):
    w = compose_wave(r, angles)
    assert np.allclose(w, naive_cartesian(r, angles), atol=1e-9 * max(r, 1))
    assert np.linalg.norm(w) == pytest.approx(r, rel=1e-9, abs=1e-300)


def test_wave_known_values():
    assert np.allclose(compose_wave(2.0, [0.0]), [2.0, 0.0])
    assert np.allclose(compose_wave(1.0, [math.pi / 2, 0.0]), [0.0, 1.0, 0.0])


def test_wave_rejects_negative_magnitude():
    with pytest.raises(ValueError):
        compose_wave(-1.0, [0.0])


def test_random_angles_shape_and_range():
    a = random_angles(6, np.random.default_rng(1))
    assert a.shape == (5,)
    assert np.all((a >= 0) & (a < 2 * math.pi))


# --- sample_in_ball ---------------------------------------------------------------


def test_ball_samples_stay_inside():
    rng = np.random.default_rng(3)
    center = np.array([1.0, -2.0, 0.5])
    for _ in range(2000):
        p = sample_in_ball(center, 0.7, rng)
        assert euclidean_distance(p, center) <= 0.7 + 1e-12


def test_ball_radius_zero_returns_center():
    c = np.array([1.0, 2.0])
    assert np.array_equal(sample_in_ball(c, 0.0, np.random.default_rng(0)), c)


def test_ball_sampling_is_uniform_in_volume():
    # fraction within half the radius should be 0.5 ** D
    rng = np.random.default_rng(11)
    dim = 4
    hits = sum(np.linalg.norm(sample_in_ball(np.zeros(dim), 1.0, rng)) < 0.5 for _ in range(20000))
    assert hits / 20000 == pytest.approx(0.5**dim, abs=0.01)


def test_ball_sampling_is_isotropic():
    rng = np.random.default_rng(12)
    pts = np.array([sample_in_ball(np.zeros(3), 1.0, rng) for _ in range(20000)])
    assert np.allclose(pts.mean(axis=0), 0, atol=0.02)
    assert np.allclose((pts > 0).mean(axis=0), 0.5, atol=0.02)


# --- clamp_to_bounds ----------------------------------------------------------------


def test_clamp_corner():
    b = Bounds.box(-100, 100, 2)
    assert np.array_equal(clamp_to_bounds([150, -150], b), [100, -100])


@given(arrays(float, 3, elements=finite))
def test_clamp_is_idempotent_and_inside(p):
    b = Bounds(np.array([-1.0, 0.0, -5.0]), np.array([1.0, 2.0, 5.0]))
    once = clamp_to_bounds(p, b)
    assert b.contains(once)
    assert np.array_equal(clamp_to_bounds(once, b), once)


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(np.array([1.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        Bounds(np.zeros(2), np.ones(3))
    assert not Bounds(np.full(2, -np.inf), np.full(2, np.inf)).is_finite
