"""
CEC05-style benchmark functions with shift/rotation transforms and hybrid compositions.

Official CEC05 data files are not bundled. :func:`make_suite` draws surrogate
instances (shift vectors, rotation matrices, F5/F12 auxiliary data) from a seed,
and :func:`load_matrix` lets callers plug in the official data instead.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Bounds
from .textmatrix import load_matrix, save_matrix

__all__ = [
    "BASIC_IDS",
    "COMPOSITION_IDS",
    "CompositionMember",
    "CompositionSpec",
    "ObjectiveSpec",
    "Transform",
    "ackley",
    "apply_transform",
    "elliptic",
    "eval_basic",
    "eval_composition",
    "expanded_griewank_rosenbrock",
    "expanded_scaffer",
    "griewank",
    "load_matrix",
    "make_composition",
    "make_spec",
    "make_suite",
    "random_orthogonal",
    "rastrigin",
    "rosenbrock",
    "save_matrix",
    "schwefel_1_2",
    "sphere",
    "weierstrass",
    "with_data",
]

_TWO_PI = 2.0 * math.pi

BASIC_IDS = tuple(f"F{i}" for i in range(1, 15))
COMPOSITION_IDS = ("F15", "F18", "F21")

# ---------------------------------------------------------------------------
# Raw landscapes, all with minimum 0 at z = 0 except rosenbrock (z = 1).
# ---------------------------------------------------------------------------


def sphere(z: np.ndarray) -> float:
    return float(z @ z)


def schwefel_1_2(z: np.ndarray) -> float:
    c = np.cumsum(z)
    return float(c @ c)


def elliptic(z: np.ndarray) -> float:
    dim = z.size
    w = 1e6 ** (np.arange(dim) / (dim - 1)) if dim > 1 else np.ones(1)
    return float(w @ (z * z))


def rosenbrock(z: np.ndarray) -> float:
    a = z[:-1]
    return float((100.0 * (a * a - z[1:]) ** 2 + (a - 1.0) ** 2).sum())


def griewank(z: np.ndarray) -> float:
    idx = np.sqrt(np.arange(1, z.size + 1))
    return float(z @ z / 4000.0 - np.cos(z / idx).prod() + 1.0)


def ackley(z: np.ndarray) -> float:
    dim = z.size
    s1 = float(z @ z) / dim
    s2 = float(np.cos(_TWO_PI * z).sum()) / dim
    return 20.0 + math.e - 20.0 * math.exp(-0.2 * math.sqrt(s1)) - math.exp(s2)


def rastrigin(z: np.ndarray) -> float:
    return float(z @ z - 10.0 * np.cos(2.0 * math.pi * z).sum()) + 10.0 * z.size


_W_K = np.arange(21)
_W_A = 0.5**_W_K
_W_B = 3.0**_W_K
_W_REF = float(np.sum(_W_A * np.cos(2.0 * math.pi * _W_B * 0.5)))


def weierstrass(z: np.ndarray) -> float:
    """Weierstrass with a = 0.5, b = 3, k = 0..20; zero at the origin."""
    terms = np.cos(2.0 * math.pi * np.outer(z + 0.5, _W_B)) @ _W_A
    return float(terms.sum() - z.size * _W_REF)


def _griewank_1d(y):
    return y * y / 4000.0 - np.cos(y) + 1.0


def expanded_griewank_rosenbrock(z: np.ndarray) -> float:
    """Griewank of 2-D Rosenbrock over consecutive pairs, wrapping around; zero at z = 1."""
    a = z
    b = np.roll(z, -1)
    rb = 100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2
    return float(_griewank_1d(rb).sum())


def expanded_scaffer(z: np.ndarray) -> float:
    """Scaffer F6 over consecutive pairs, wrapping around; zero at the origin."""
    b = np.roll(z, -1)
    r2 = z * z + b * b
    return float((0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2).sum())


# ---------------------------------------------------------------------------
# Transforms and specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """``z = ((x - shift) / scale + offset) @ rotation``; ``rotation=None`` is the identity."""

    shift: np.ndarray
    rotation: Optional[np.ndarray] = None
    offset: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        shift = np.array(self.shift, dtype=float)
        shift.setflags(write=False)
        object.__setattr__(self, "shift", shift)
        if self.rotation is not None:
            m = np.array(self.rotation, dtype=float)
            if m.shape != (shift.size, shift.size):
                raise ValueError(f"rotation must be {shift.size}x{shift.size}, got {m.shape}")
            m.setflags(write=False)
            object.__setattr__(self, "rotation", m)
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def apply_transform(x, t: Transform) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != t.shift.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs shift {t.shift.shape}")
    z = x - t.shift
    if t.scale != 1.0:
        z = z / t.scale
    if t.offset:
        z = z + t.offset
    if t.rotation is not None:
        z = z @ t.rotation
    return z


# id -> (bounds, init region, f_min, uses rotation, pre-offset)
_TABLE = {
    "F1": ((-100.0, 100.0), (-100.0, 100.0), -450.0, False, 0.0),
    "F2": ((-100.0, 100.0), (-100.0, 100.0), -450.0, False, 0.0),
    "F3": ((-100.0, 100.0), (-100.0, 100.0), -450.0, True, 0.0),
    "F4": ((-100.0, 100.0), (-100.0, 100.0), -450.0, False, 0.0),
    "F5": ((-100.0, 100.0), (-100.0, 100.0), -310.0, False, 0.0),
    "F6": ((-100.0, 100.0), (-100.0, 100.0), 390.0, False, 1.0),
    "F7": ((-math.inf, math.inf), (0.0, 600.0), -180.0, True, 0.0),
    "F8": ((-32.0, 32.0), (-32.0, 32.0), -140.0, True, 0.0),
    "F9": ((-5.0, 5.0), (-5.0, 5.0), -330.0, False, 0.0),
    "F10": ((-5.0, 5.0), (-5.0, 5.0), -330.0, True, 0.0),
    "F11": ((-0.5, 0.5), (-0.5, 0.5), 90.0, True, 0.0),
    "F12": ((-math.pi, math.pi), (-math.pi, math.pi), -460.0, False, 0.0),
    "F13": ((-3.0, 1.0), (-3.0, 1.0), -130.0, False, 1.0),
    "F14": ((-100.0, 100.0), (-100.0, 100.0), -300.0, True, 0.0),
    "F15": ((-5.0, 5.0), (-5.0, 5.0), 120.0, False, 0.0),
    "F18": ((-5.0, 5.0), (-5.0, 5.0), 10.0, True, 0.0),
    "F21": ((-5.0, 5.0), (-5.0, 5.0), 360.0, True, 0.0),
}

_RAW = {
    "F1": sphere,
    "F2": schwefel_1_2,
    "F3": elliptic,
    "F4": schwefel_1_2,
    "F6": rosenbrock,
    "F7": griewank,
    "F8": ackley,
    "F9": rastrigin,
    "F10": rastrigin,
    "F11": weierstrass,
    "F13": expanded_griewank_rosenbrock,
    "F14": expanded_scaffer,
}


@dataclass(frozen=True)
class CompositionMember:
    function: str
    shift: np.ndarray
    rotation: Optional[np.ndarray] = None
    scale: float = 1.0
    sigma: float = 1.0
    bias: float = 0.0
    weight: float = 1.0


@dataclass(frozen=True)
class CompositionSpec:
    """Weighted sum of basic landscapes, each normalized by its value at ``5 / scale`` in every coordinate."""

    members: tuple
    f_bias: float = 0.0
    normalizer: float = 2000.0
    magnitudes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        dims = {m.shift.size for m in self.members}
        if len(dims) != 1:
            raise ValueError("all composition members must share one dimension")
        if not self.magnitudes:
            mags = []
            for m in self.members:
                probe = np.full(m.shift.size, 5.0) / m.scale
                if m.rotation is not None:
                    probe = probe @ m.rotation
                mags.append(abs(_MEMBER_FUNCS[m.function](probe)))
            object.__setattr__(self, "magnitudes", tuple(mags))

    @property
    def dim(self) -> int:
        return self.members[0].shift.size


# composition members see their own optimum at z = 0
_MEMBER_FUNCS: dict = {
    "sphere": sphere,
    "rastrigin": rastrigin,
    "weierstrass": weierstrass,
    "griewank": griewank,
    "ackley": ackley,
    "scaffer": expanded_scaffer,
    "griewank_rosenbrock": lambda z: expanded_griewank_rosenbrock(z + 1.0),
}


def eval_composition(spec: CompositionSpec, x) -> float:
    """
    Evaluate a hybrid function at ``x``.

    Weights use the Gaussian kernel ``exp(-|x - o_i|^2 / (2 D sigma_i^2))``;
    every weight other than the largest is damped by ``1 - w_max ** 10`` and the
    weights are then normalized to sum to one.
    """
    x = np.asarray(x, dtype=float)
    dim = spec.dim
    if x.size != dim:
        raise ValueError(f"dimension mismatch: {x.size} vs {dim}")
    n = len(spec.members)
    weights = np.empty(n)
    values = np.empty(n)
    for i, m in enumerate(spec.members):
        d = x - m.shift
        weights[i] = m.weight * math.exp(-float(d @ d) / (2.0 * dim * m.sigma**2))
        z = d / m.scale
        if m.rotation is not None:
            z = z @ m.rotation
        values[i] = spec.normalizer * _MEMBER_FUNCS[m.function](z) / spec.magnitudes[i] + m.bias
    top = int(np.argmax(weights))
    w_max = weights[top]
    damp = 1.0 - w_max**10
    weights *= damp
    weights[top] = w_max
    total = weights.sum()
    if total == 0.0:
        weights[:] = 1.0 / n
    else:
        weights /= total
    return float(weights @ values) + spec.f_bias


@dataclass(frozen=True)
class ObjectiveSpec:
    """
    One benchmark instance.

    ``aux`` carries F5's ``A`` and ``b`` or F12's ``a``, ``b`` and ``alpha``;
    ``composition`` is set for F15/F18/F21. Calling the spec evaluates it with
    no noise; use :meth:`bind` to attach a noise stream for F4.
    """

    function_id: str
    dim: int
    bounds: Bounds
    init_bounds: Bounds
    f_min: float
    transform: Transform
    aux: dict = field(default_factory=dict, compare=False)
    composition: Optional[CompositionSpec] = field(default=None, compare=False)

    def __call__(self, x) -> float:
        return eval_basic(self, x)

    def bind(self, rng: Optional[np.random.Generator]) -> Callable[[np.ndarray], float]:
        """Objective callable drawing F4 noise from ``rng`` (other functions ignore it)."""
        if self.function_id != "F4" or rng is None:
            return self._fast()
        return lambda x: eval_basic(self, x, rng)

    def _fast(self) -> Callable[[np.ndarray], float]:
        # compiled transform + landscape for the optimizer's hot loop
        from ._kernels import KERNELS

        kernel = KERNELS.get(self.function_id)
        if self.composition is not None or kernel is None:
            return self.__call__
        t = self.transform
        rotate = t.rotation is not None
        m = t.rotation if rotate else np.eye(self.dim)
        o, offset, scale, fmin = t.shift, float(t.offset), float(t.scale), self.f_min
        return lambda x: kernel(x, o, m, rotate, offset, scale) + fmin


def eval_basic(spec: ObjectiveSpec, x, rng: Optional[np.random.Generator] = None) -> float:
    """Value of ``spec`` at ``x``; F4's multiplicative noise is drawn from ``rng`` and is 0 without one."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"dimension mismatch: expected ({spec.dim},), got {x.shape}")
    fid = spec.function_id
    if spec.composition is not None:
        return eval_composition(spec.composition, x)
    if fid == "F5":
        a, b = spec.aux["A"], spec.aux["b"]
        return float(np.max(np.abs(a @ x - b))) + spec.f_min
    if fid == "F12":
        a, b, target = spec.aux["a"], spec.aux["b"], spec.aux["target"]
        got = a @ np.sin(x) + b @ np.cos(x)
        d = target - got
        return float(d @ d) + spec.f_min
    z = apply_transform(x, spec.transform)
    value = _RAW[fid](z)
    if fid == "F4" and rng is not None:
        value *= 1.0 + 0.4 * abs(rng.standard_normal())
    return value + spec.f_min


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR of a Gaussian matrix."""
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------

_COMPOSITION_LAYOUT = {
    # function names and stretch factors, two members per basic landscape
    "F15": (
        ["rastrigin", "rastrigin", "weierstrass", "weierstrass", "griewank", "griewank",
         "ackley", "ackley", "sphere", "sphere"],
        [1.0, 1.0, 10.0, 10.0, 5.0 / 60, 5.0 / 60, 5.0 / 32, 5.0 / 32, 5.0 / 100, 5.0 / 100],
    ),
    "F18": (
        ["ackley", "ackley", "rastrigin", "rastrigin", "sphere", "sphere",
         "weierstrass", "weierstrass", "griewank", "griewank"],
        [2 * 5.0 / 32, 5.0 / 32, 2.0, 1.0, 2 * 5.0 / 100, 5.0 / 100, 20.0, 10.0, 2 * 5.0 / 60, 5.0 / 60],
    ),
    "F21": (
        ["scaffer", "scaffer", "rastrigin", "rastrigin", "griewank_rosenbrock", "griewank_rosenbrock",
         "weierstrass", "weierstrass", "griewank", "griewank"],
        [5 * 5.0 / 100, 5.0 / 100, 5.0, 1.0, 5.0, 1.0, 50.0, 10.0, 5 * 5.0 / 200, 5.0 / 200],
    ),
}


def make_composition(function_id: str, dim: int, rng: np.random.Generator) -> CompositionSpec:
    names, scales = _COMPOSITION_LAYOUT[function_id]
    _, (lo, hi), f_bias, rotated, _ = _TABLE[function_id]
    members = []
    for i, (name, scale) in enumerate(zip(names, scales)):
        members.append(
            CompositionMember(
                function=name,
                shift=rng.uniform(lo, hi, dim),
                rotation=random_orthogonal(dim, rng) if rotated else None,
                scale=scale,
                bias=100.0 * i,
            )
        )
    return CompositionSpec(members=tuple(members), f_bias=f_bias)


def make_spec(
    function_id: str,
    dim: int,
    seed: int = 0,
    shift=None,
    rotation=None,
) -> ObjectiveSpec:
    """
    Build one surrogate instance.

    ``shift`` and ``rotation`` override the seeded draws, e.g. with official data
    read through :func:`load_matrix`. For F5 the shift is the optimum used to
    derive ``b``; for F12 it is the ``alpha`` vector.
    """
    if function_id not in _TABLE:
        raise ValueError(f"unknown function id {function_id!r}")
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    (blo, bhi), (ilo, ihi), f_min, rotated, offset = _TABLE[function_id]
    # per-function stream so that adding functions never reshuffles the others
    rng = np.random.default_rng([seed, dim, int(function_id[1:])])
    bounds = Bounds.box(blo, bhi, dim)
    init = Bounds.box(ilo, ihi, dim)

    if function_id in COMPOSITION_IDS:
        comp = make_composition(function_id, dim, rng)
        return ObjectiveSpec(
            function_id, dim, bounds, init, f_min,
            Transform(shift=comp.members[0].shift), composition=comp,
        )

    o = np.asarray(shift, dtype=float) if shift is not None else rng.uniform(ilo, ihi, dim)
    if o.shape != (dim,):
        raise ValueError(f"shift must have shape ({dim},), got {o.shape}")
    m = None
    if rotated:
        m = np.asarray(rotation, dtype=float) if rotation is not None else random_orthogonal(dim, rng)
    aux = {}
    if function_id == "F5":
        a = rng.integers(-500, 501, size=(dim, dim)).astype(float)
        while abs(np.linalg.det(a)) < 1e-8:
            a = rng.integers(-500, 501, size=(dim, dim)).astype(float)
        aux = {"A": a, "b": a @ o}
    elif function_id == "F12":
        a = rng.integers(-100, 101, size=(dim, dim)).astype(float)
        b = rng.integers(-100, 101, size=(dim, dim)).astype(float)
        aux = {"a": a, "b": b, "target": a @ np.sin(o) + b @ np.cos(o)}
    transform = Transform(shift=o, rotation=m, offset=offset)
    return ObjectiveSpec(function_id, dim, bounds, init, f_min, transform, aux=aux)


def make_suite(dim: int, seed: int = 0) -> list:
    """F1-F14 plus the F15/F18/F21 hybrid instances at ``dim``."""
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    return [make_spec(fid, dim, seed) for fid in BASIC_IDS + COMPOSITION_IDS]


def with_data(spec: ObjectiveSpec, shift_file=None, rotation_file=None) -> ObjectiveSpec:
    """Rebuild ``spec`` with a shift vector and/or rotation matrix read from matrix files."""
    if spec.composition is not None:
        raise ValueError(f"{spec.function_id} is a composition; it has no single shift or rotation")
    shift = load_matrix(shift_file).ravel()[: spec.dim] if shift_file else spec.transform.shift
    if shift.size != spec.dim:
        raise ValueError(f"{shift_file}: need at least {spec.dim} shift values, got {shift.size}")
    rotation = load_matrix(rotation_file) if rotation_file else spec.transform.rotation
    if rotation is not None and rotation.shape != (spec.dim, spec.dim):
        raise ValueError(f"{rotation_file}: rotation must be {spec.dim} x {spec.dim}, got {rotation.shape}")
    aux = dict(spec.aux)
    if spec.function_id == "F5":
        aux["b"] = aux["A"] @ shift
    elif spec.function_id == "F12":
        aux["target"] = aux["a"] @ np.sin(shift) + aux["b"] @ np.cos(shift)
    transform = dataclasses.replace(spec.transform, shift=shift, rotation=rotation)
    return dataclasses.replace(spec, transform=transform, aux=aux)
