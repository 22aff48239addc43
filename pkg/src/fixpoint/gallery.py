"""Benchmark maps with known fixed points and continuation paths.

Five families, each a MappingInstance with a declared modulus that the test
suite audits rather than trusts:

* affine-halfline: T x = (x - 1) / 2 on [-1, inf).  Contraction with
  constant modulus 1/2; the fixed point -1 sits exactly on the boundary and
  the path of x = t T x is x_t = -t / (2 - t).
* rakotch-decay: T x = x / (1 + a x) on [0, inf).  Not a Banach contraction
  on any neighbourhood of 0, but contractive with modulus 1 / (1 + a t);
  since (1 + a x)(1 + a y) >= 1 + a |x - y| for x, y >= 0,
  |T x - T y| <= |x - y| / (1 + a |x - y|).  Fixed point 0.
* constant: T identically c on a box [lo, hi] containing 0 in its interior.
  Modulus 0.  With c outside the box, iteration exits in one step and the
  path x_t = t c pins against the boundary where T x = (c / boundary) x,
  the canonical boundary-condition violation.
* planar-rotation: T x = R x + b, rotation by theta plus translation, on a
  centered disk.  An isometry up to translation, so only nonexpansive; the
  unique fixed point (I - R)^{-1} b and path t (I - t R)^{-1} b are linear
  algebra.  The disk radius must cover the path with margin, which needs
  the smallest singular value of I - t R over t in [0, 1]: sin(theta) when
  cos(theta) > 0, else 1.
* damped-rational: T x = x / (2 + x^2) on [-2, 2].  |T'| <= 1/2, modulus
  1/2, fixed point 0 in the interior, path identically 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (DomainSet, MappingInstance, Modulus, Point, Space, ball,
                   box, constant_modulus, euclidean, halfline, _frozen,
                   nonexpansive_modulus, rational_decay_modulus)
from .errors import ArgumentError, UnknownMapError


@dataclass(frozen=True)
class GalleryEntry:
    """A registered map plus everything a test or experiment needs: the
    instantiated parameters, the closed-form fixed point and path when they
    exist, and a seeded sampler drawing points from the domain."""

    name: str
    mapping: MappingInstance
    params: dict[str, float]
    known_fixed_point: Point | None
    known_path: Callable[[float], Point] | None
    notes: str
    sampler: Callable[[np.random.Generator], Point]


@dataclass(frozen=True)
class ParamSpec:
    default: float
    lo: float
    hi: float
    doc: str


def _build_affine_halfline() -> GalleryEntry:
    space = euclidean(1)

    def apply(x: Point) -> Point:
        return (x - 1.0) / 2.0

    mapping = MappingInstance(apply=apply,
                              declared_modulus=constant_modulus(0.5),
                              domain=halfline(-1.0), space=space)
    return GalleryEntry(
        name="affine-halfline", mapping=mapping, params={},
        known_fixed_point=_frozen([-1.0]),
        known_path=lambda t: np.array([-t / (2.0 - t)]),
        notes="fixed point -1 on the boundary; path x_t = -t/(2-t)",
        sampler=lambda rng: np.array([-1.0 + 10.0 * rng.random()]))


def _build_rakotch_decay(a: float) -> GalleryEntry:
    space = euclidean(1)

    def apply(x: Point) -> Point:
        return x / (1.0 + a * x)

    mapping = MappingInstance(apply=apply,
                              declared_modulus=rational_decay_modulus(a),
                              domain=halfline(0.0), space=space)
    return GalleryEntry(
        name="rakotch-decay", mapping=mapping, params={"a": a},
        known_fixed_point=_frozen([0.0]),
        known_path=lambda t: np.array([0.0]),
        notes="contractive only in the Rakotch sense; fixed point 0 with "
              "no contraction ratio near it",
        sampler=lambda rng: np.array([10.0 * rng.random()]))


def _build_constant(c: float, lo: float, hi: float) -> GalleryEntry:
    if not lo < 0.0 < hi:
        raise ArgumentError(
            f"constant-map box must have lo < 0 < hi, got [{lo}, {hi}]")
    space = euclidean(1)
    c_arr = _frozen([c])

    def apply(x: Point) -> Point:
        return c_arr

    inside = lo <= c <= hi
    return GalleryEntry(
        name="constant", mapping=MappingInstance(
            apply=apply, declared_modulus=constant_modulus(0.0),
            domain=box([lo], [hi]), space=space),
        params={"c": c, "lo": lo, "hi": hi},
        known_fixed_point=_frozen([c]) if inside else None,
        known_path=lambda t: np.array([t * c]),
        notes="modulus 0; with c outside the box the path x_t = t c pins "
              "against the boundary (known_path is only a solution while "
              "t c stays inside)",
        sampler=lambda rng: np.array([lo + (hi - lo) * rng.random()]))


def _rotation_min_singular(theta: float) -> float:
    # smallest singular value of I - t R over t in [0, 1]
    c = math.cos(theta)
    return abs(math.sin(theta)) if c > 0.0 else 1.0


def _build_planar_rotation(theta: float, bx: float, by: float,
                           radius: float) -> GalleryEntry:
    b = np.array([bx, by])
    smin = _rotation_min_singular(theta)
    path_reach = math.sqrt(float(b @ b)) / smin
    if radius < 2.0 * path_reach:
        raise ArgumentError(
            f"disk radius {radius} is below twice the path reach "
            f"{path_reach}; the traced path needs that margin")
    c, s = math.cos(theta), math.sin(theta)
    R = _frozen([[c, -s], [s, c]])
    b = _frozen(b)
    eye = np.eye(2)

    def apply(x: Point) -> Point:
        return R @ x + b

    def path(t: float) -> Point:
        return np.linalg.solve(eye - t * R, t * b)

    def sampler(rng: np.random.Generator) -> Point:
        v = rng.standard_normal(2)
        v /= max(math.sqrt(float(v @ v)), 1e-300)
        return v * (radius * math.sqrt(rng.random()))

    return GalleryEntry(
        name="planar-rotation", mapping=MappingInstance(
            apply=apply, declared_modulus=nonexpansive_modulus(),
            domain=ball([0.0, 0.0], radius), space=euclidean(2)),
        params={"theta": theta, "bx": bx, "by": by, "radius": radius},
        known_fixed_point=_frozen(np.linalg.solve(eye - R, b)),
        known_path=path,
        notes="isometry plus translation: nonexpansive, never contractive; "
              "fixed point and path by linear solve",
        sampler=sampler)


def _build_damped_rational() -> GalleryEntry:
    space = euclidean(1)

    def apply(x: Point) -> Point:
        return x / (2.0 + x * x)

    return GalleryEntry(
        name="damped-rational", mapping=MappingInstance(
            apply=apply, declared_modulus=constant_modulus(0.5),
            domain=box([-2.0], [2.0]), space=space),
        params={},
        known_fixed_point=_frozen([0.0]),
        known_path=lambda t: np.array([0.0]),
        notes="|T'| <= 1/2 on the box; interior fixed point 0, path "
              "identically 0",
        sampler=lambda rng: np.array([-2.0 + 4.0 * rng.random()]))


_TWO_PI = 2.0 * math.pi

_REGISTRY: dict[str, tuple[Callable[..., GalleryEntry],
                           dict[str, ParamSpec]]] = {
    "affine-halfline": (_build_affine_halfline, {}),
    "rakotch-decay": (_build_rakotch_decay, {
        "a": ParamSpec(1.0, 1e-6, 100.0, "decay rate in x / (1 + a x)"),
    }),
    "constant": (_build_constant, {
        "c": ParamSpec(2.0, -10.0, 10.0, "the constant value"),
        "lo": ParamSpec(-1.0, -1e6, -1e-6, "box lower bound (< 0)"),
        "hi": ParamSpec(1.0, 1e-6, 1e6, "box upper bound (> 0)"),
    }),
    "planar-rotation": (_build_planar_rotation, {
        "theta": ParamSpec(math.pi / 4.0, 0.1, _TWO_PI - 0.1,
                           "rotation angle"),
        "bx": ParamSpec(1.0, -10.0, 10.0, "translation, first coordinate"),
        "by": ParamSpec(0.0, -10.0, 10.0, "translation, second coordinate"),
        "radius": ParamSpec(4.0, 1e-6, 1e6, "disk radius; must be at least "
                            "twice the path reach"),
    }),
    "damped-rational": (_build_damped_rational, {}),
}


def list_maps() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def map_summary(name: str) -> str:
    """One paragraph per map for the CLI listing."""
    if name not in _REGISTRY:
        raise UnknownMapError(name)
    _, schema = _REGISTRY[name]
    entry = make_map(name)
    lines = [f"{name}: {entry.notes}"]
    for key, spec in schema.items():
        lines.append(f"  {key} = {spec.default!r}  "
                     f"(range [{spec.lo!r}, {spec.hi!r}]: {spec.doc})")
    return "\n".join(lines)


def make_map(name: str, **params: float) -> GalleryEntry:
    """Instantiate a gallery map by name.

    Unknown names raise UnknownMapError; unknown parameter keys and values
    outside their documented ranges raise ArgumentError.
    """
    if name not in _REGISTRY:
        known = ", ".join(_REGISTRY)
        raise UnknownMapError(f"unknown map {name!r}; known: {known}")
    builder, schema = _REGISTRY[name]
    unknown = set(params) - set(schema)
    if unknown:
        raise ArgumentError(
            f"map {name!r} takes no parameter(s) {sorted(unknown)}; "
            f"schema: {sorted(schema)}")
    merged = {}
    for key, spec in schema.items():
        val = float(params.get(key, spec.default))
        if not spec.lo <= val <= spec.hi:
            raise ArgumentError(
                f"{name}.{key} = {val} outside [{spec.lo}, {spec.hi}]")
        merged[key] = val
    return builder(**merged)
