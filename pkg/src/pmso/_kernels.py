"""
Compiled landscape kernels for the optimizer's inner loop.

Each ``eval_*`` takes ``(x, shift, rotation, rotate, offset, scale)`` and
returns the raw landscape value (no bias). They mirror the numpy reference
functions in :mod:`pmso.testbed` and are checked against them in the tests.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _z(x, o, m, rotate, offset, scale):
    n = x.size
    d = np.empty(n)
    for i in range(n):
        d[i] = (x[i] - o[i]) / scale + offset
    if not rotate:
        return d
    z = np.empty(n)
    for j in range(n):
        acc = 0.0
        for i in range(n):
            acc += d[i] * m[i, j]
        z[j] = acc
    return z


@njit(cache=True)
def eval_sphere(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    for v in z:
        s += v * v
    return s


@njit(cache=True)
def eval_schwefel_1_2(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    c = 0.0
    for v in z:
        c += v
        s += c * c
    return s


@njit(cache=True)
def eval_elliptic(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    n = z.size
    s = 0.0
    for i in range(n):
        s += 1e6 ** (i / (n - 1)) * z[i] * z[i]
    return s


@njit(cache=True)
def eval_rosenbrock(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    for i in range(z.size - 1):
        a = z[i] * z[i] - z[i + 1]
        b = z[i] - 1.0
        s += 100.0 * a * a + b * b
    return s


@njit(cache=True)
def eval_griewank(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    p = 1.0
    for i in range(z.size):
        s += z[i] * z[i]
        p *= math.cos(z[i] / math.sqrt(i + 1.0))
    return s / 4000.0 - p + 1.0


@njit(cache=True)
def eval_ackley(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    n = z.size
    s1 = 0.0
    s2 = 0.0
    for v in z:
        s1 += v * v
        s2 += math.cos(TWO_PI * v)
    return 20.0 + math.e - 20.0 * math.exp(-0.2 * math.sqrt(s1 / n)) - math.exp(s2 / n)


@njit(cache=True)
def eval_rastrigin(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    for v in z:
        s += v * v - 10.0 * math.cos(TWO_PI * v) + 10.0
    return s


@njit(cache=True)
def eval_weierstrass(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    s = 0.0
    ref = 0.0
    for k in range(21):
        ref += 0.5**k * math.cos(math.pi * 3.0**k)
    for v in z:
        for k in range(21):
            s += 0.5**k * math.cos(TWO_PI * 3.0**k * (v + 0.5))
    return s - z.size * ref


@njit(cache=True)
def eval_griewank_rosenbrock(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    n = z.size
    s = 0.0
    for i in range(n):
        a = z[i]
        b = z[(i + 1) % n]
        r = 100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2
        s += r * r / 4000.0 - math.cos(r) + 1.0
    return s


@njit(cache=True)
def eval_scaffer(x, o, m, rotate, offset, scale):
    z = _z(x, o, m, rotate, offset, scale)
    n = z.size
    s = 0.0
    for i in range(n):
        a = z[i]
        b = z[(i + 1) % n]
        r2 = a * a + b * b
        t = 1.0 + 0.001 * r2
        s += 0.5 + (math.sin(math.sqrt(r2)) ** 2 - 0.5) / (t * t)
    return s


KERNELS = {
    "F1": eval_sphere,
    "F2": eval_schwefel_1_2,
    "F3": eval_elliptic,
    "F6": eval_rosenbrock,
    "F7": eval_griewank,
    "F8": eval_ackley,
    "F9": eval_rastrigin,
    "F10": eval_rastrigin,
    "F11": eval_weierstrass,
    "F13": eval_griewank_rosenbrock,
    "F14": eval_scaffer,
}
