"""Exact and perturbed Picard orbits, with the explicit stability bounds.

The quantitative content lives in four closed-form bounds for a mapping with
admissible modulus phi:

* settling_index: after k steps an orbit started within radius c0 of a point
  whose displacement under T is d0, with k the least integer above
  (2 c0 + d0) / (eps (1 - phi(eps))), every later iterate is within eps of
  the limit behaviour the bound was derived for.
* coupling_index: two orbits started within c0 of each other are within eps
  of each other from the least integer above 4 c0 / ((1 - phi(eps)) eps).
* cluster_tolerance: delta (1 - phi(delta)) / 8, the resolution at which
  near-fixed points of a delta-accurate surrogate cluster.
* stability_constants: for a target accuracy eps on a seed ball of radius M
  around a fixed point, a perturbation budget delta and a settling time k
  such that every delta-perturbed orbit is eps-close to the fixed point from
  step k on.  Safety factors of 1/2 on delta and the interim quantities at
  1/8 rather than the sharp 1/4 keep the guarantee strict under roundoff.

All bounds refuse non-contractive moduli (phi >= 1 at the probed argument)
by raising NonRakotchError instead of returning an unusable integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Modulus, MappingInstance, Point, as_point, _frozen
from .errors import (ArgumentError, ConvergenceError, DomainError,
                     NonRakotchError, NonselfExitError)

# Bounds that are exact integers in real arithmetic can land a few ulps low
# in binary; values this close to an integer are treated as that integer.
_INT_SNAP = 1e-9


def _least_int_greater(v: float) -> int:
    nearest = round(v)
    if abs(v - nearest) <= _INT_SNAP * max(1.0, abs(v)):
        return int(nearest) + 1
    return math.floor(v) + 1


def _one_minus_phi(m: Modulus, t: float, what: str) -> float:
    gap = 1.0 - m(t)
    if gap <= 0.0:
        raise NonRakotchError(
            f"{what} needs phi({t}) < 1, got {m(t)} (kind={m.kind})")
    return gap


def _rowwise(T: MappingInstance, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if T.space.rowwise_distance is not None:
        return T.space.rowwise_distance(a, b)
    if b.ndim == 1:
        return np.array([T.space.distance(p, b) for p in a])
    return np.array([T.space.distance(p, q) for p, q in zip(a, b)])


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class Orbit:
    """A stored orbit x_0, x_1, ..., one row per point.

    residuals[i] = dist(x_{i+1}, T x_i); identically zero for an exact
    orbit, bounded by perturbation_bound for a perturbed one as long as the
    orbit stayed inside its domain.  exited_domain_at is the index of the
    first point outside the domain (the orbit stops there), or None.
    """

    points: np.ndarray
    residuals: np.ndarray
    exited_domain_at: int | None
    perturbation_bound: float

    def __len__(self) -> int:
        return self.points.shape[0]


def orbit_exact(T: MappingInstance, x0, n: int) -> Orbit:
    """Iterate x_{i+1} = T x_i for up to n steps.

    Stops early if an iterate leaves the domain; that iterate is kept as the
    last row and flagged in exited_domain_at.  x0 itself must be inside.
    """
    if n < 1:
        raise ArgumentError(f"orbit length must be >= 1, got {n}")
    x = as_point(x0, T.space.dimension)
    if not T.domain.contains(x):
        raise DomainError(f"start {x!r} lies outside the domain", point=x)
    pts = np.empty((n + 1, T.space.dimension))
    pts[0] = x
    exited = None
    m = n
    for i in range(n):
        y = T.apply(x)
        pts[i + 1] = y
        if not T.domain.contains(y):
            exited = i + 1
            m = i + 1
            break
        x = y
    pts = pts[:m + 1]
    return Orbit(points=_frozen(pts),
                 residuals=_frozen(np.zeros(m)),
                 exited_domain_at=exited,
                 perturbation_bound=0.0)


def orbit_inexact(T: MappingInstance, x0, n: int, delta: float,
                  noise_seed: int) -> Orbit:
    """Perturbed orbit: x_{i+1} = T x_i + e_i with ||e_i|| <= delta.

    The e_i are drawn uniformly from the delta-ball (seeded, reproducible).
    If T x_i is inside the domain but the perturbed point is not, it is
    projected back in; since the shipped domains are convex the projection
    is nonexpansive and the recorded residual stays <= delta.  If T x_i
    itself leaves the domain the exit is genuine: the perturbed point is
    recorded as-is and the orbit stops there when it is outside.
    delta = 0 reproduces orbit_exact bit for bit.
    """
    if n < 1:
        raise ArgumentError(f"orbit length must be >= 1, got {n}")
    if delta < 0.0:
        raise ArgumentError(f"perturbation bound must be >= 0, got {delta}")
    d = T.space.dimension
    x = as_point(x0, d)
    if not T.domain.contains(x):
        raise DomainError(f"start {x!r} lies outside the domain", point=x)

    perturbed = delta > 0.0
    if perturbed:
        rng = np.random.default_rng(noise_seed)
        dirs = rng.standard_normal((n, d))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True),
                           1e-300)
        # shave 1e-9 off the radii so projection roundoff cannot push a
        # recorded residual past delta
        radii = delta * rng.random(n) ** (1.0 / d) * (1.0 - 1e-9)
        noise = dirs * radii[:, None]

    pts = np.empty((n + 1, d))
    images = np.empty((n, d))
    pts[0] = x
    contains = T.domain.contains
    project = T.domain.project
    apply = T.apply
    exited = None
    m = n
    for i in range(n):
        y = apply(x)
        images[i] = y
        cand = y + noise[i] if perturbed else y
        if not contains(cand):
            if project is not None and contains(y):
                cand = project(cand)
            else:
                pts[i + 1] = cand
                exited = i + 1
                m = i + 1
                break
        pts[i + 1] = cand
        x = cand
    pts = pts[:m + 1]
    if perturbed:
        res = _rowwise(T, pts[1:], images[:m])
    else:
        res = np.zeros(m)
    return Orbit(points=_frozen(pts), residuals=_frozen(res),
                 exited_domain_at=exited, perturbation_bound=delta)


class FixedPointResult(NamedTuple):
    point: Point
    iterations: int
    residual: float


def solve_fixed_point(T: MappingInstance, x0, tol: float,
                      max_iter: int = 100_000) -> FixedPointResult:
    """Run exact Picard iteration until dist(x, T x) <= tol.

    The residual is checked before stepping, so a start that already meets
    the tolerance returns with 0 iterations.  Raises NonRakotchError for a
    mapping whose declared modulus is not admissible (plain iteration has no
    convergence guarantee there), NonselfExitError (carrying the partial
    orbit) if an iterate escapes the domain first, and ConvergenceError
    after max_iter steps.
    """
    if tol <= 0.0:
        raise ArgumentError(f"tolerance must be > 0, got {tol}")
    if max_iter < 1:
        raise ArgumentError(f"max_iter must be >= 1, got {max_iter}")
    if not T.declared_modulus.rakotch:
        raise NonRakotchError(
            "declared modulus is not admissible; plain iteration is not "
            "guaranteed to converge")
    x = as_point(x0, T.space.dimension)
    if not T.domain.contains(x):
        raise DomainError(f"start {x!r} lies outside the domain", point=x)
    dist = T.space.distance
    trail = [np.array(x)]
    r = math.inf
    for i in range(max_iter + 1):
        y = T.apply(x)
        r = dist(x, y)
        if r <= tol:
            return FixedPointResult(point=_frozen(x), iterations=i,
                                    residual=r)
        trail.append(np.array(y))
        if not T.domain.contains(y):
            part = Orbit(points=_frozen(np.array(trail)),
                         residuals=_frozen(np.zeros(len(trail) - 1)),
                         exited_domain_at=len(trail) - 1,
                         perturbation_bound=0.0)
            raise NonselfExitError(
                f"iterate {len(trail) - 1} left the domain before reaching "
                f"tolerance {tol}", orbit=part)
        x = y
    raise ConvergenceError(
        f"no residual <= {tol} within {max_iter} iterations "
        f"(last residual {r})", residual=r)


# ---------------------------------------------------------------------------
# closed-form bounds


@dataclass(frozen=True)
class SeedBounds:
    """Coarse data for the settling bound: the orbit starts within radius
    of the anchor point, whose displacement under the map is
    anchor_displacement."""

    radius: float
    anchor_displacement: float

    def __post_init__(self):
        if self.radius < 0.0 or self.anchor_displacement < 0.0:
            raise ArgumentError("seed bounds must be >= 0")


def settling_index(epsilon: float, m: Modulus, seed: SeedBounds) -> int:
    """Least k with k > (2 radius + displacement) / (eps (1 - phi(eps)))."""
    if epsilon <= 0.0:
        raise ArgumentError(f"epsilon must be > 0, got {epsilon}")
    gap = _one_minus_phi(m, epsilon, "settling index")
    v = (2.0 * seed.radius + seed.anchor_displacement) / (epsilon * gap)
    return _least_int_greater(v)


def coupling_index(epsilon: float, m: Modulus, radius: float) -> int:
    """Least k with k > 4 radius / ((1 - phi(eps)) eps): from step k two
    orbits launched within radius of each other stay eps-close."""
    if epsilon <= 0.0:
        raise ArgumentError(f"epsilon must be > 0, got {epsilon}")
    if radius < 0.0:
        raise ArgumentError(f"radius must be >= 0, got {radius}")
    gap = _one_minus_phi(m, epsilon, "coupling index")
    return _least_int_greater(4.0 * radius / (gap * epsilon))


def cluster_tolerance(delta: float, m: Modulus) -> float:
    """delta (1 - phi(delta)) / 8: points delta-fixed under a delta-accurate
    surrogate of T cluster within this resolution."""
    if delta <= 0.0:
        raise ArgumentError(f"delta must be > 0, got {delta}")
    gap = _one_minus_phi(m, delta, "cluster tolerance")
    return delta * gap / 8.0


@dataclass(frozen=True)
class StabilityConstants:
    """Perturbation budget delta and settling time k for accuracy epsilon on
    seeds within M of the fixed point.  delta0 and delta1 are the interim
    quantities delta is floored against; kept for reporting."""

    M: float
    epsilon: float
    delta0: float
    delta1: float
    delta: float
    k: int


def stability_constants(M: float, epsilon: float,
                        m: Modulus) -> StabilityConstants:
    """Explicit (delta, k) certificate for perturbed iteration near a fixed
    point.

    Guarantee shape: any orbit with steps x_{i+1} = T x_i + e_i,
    ||e_i|| <= delta, started within M of the fixed point, satisfies
    dist(x_i, fixed point) <= epsilon for every i >= k.

        delta0 = M (1 - phi(M/2)) / 8
        delta1 = eps (1 - phi(eps/2)) / 8
        delta  = min(delta0, delta1, eps (1 - phi(eps)) / 4) / 2
        k      = least integer > 4 (M + 1) / ((1 - phi(eps)) eps) + 4

    Requires 0 < epsilon <= M and an admissible modulus with phi < 1 at
    M/2, eps/2, and eps.
    """
    if M <= 0.0:
        raise ArgumentError(f"seed radius M must be > 0, got {M}")
    if epsilon <= 0.0 or epsilon > M:
        raise ArgumentError(
            f"target accuracy must satisfy 0 < epsilon <= M, got {epsilon}")
    if not m.rakotch:
        raise NonRakotchError("stability constants need an admissible "
                              f"modulus, got kind={m.kind}")
    gap_M2 = _one_minus_phi(m, M / 2.0, "stability constants")
    gap_e2 = _one_minus_phi(m, epsilon / 2.0, "stability constants")
    gap_e = _one_minus_phi(m, epsilon, "stability constants")
    delta0 = M * gap_M2 / 8.0
    delta1 = epsilon * gap_e2 / 8.0
    delta = 0.5 * min(delta0, delta1, epsilon * gap_e / 4.0)
    k = _least_int_greater(4.0 * (M + 1.0) / (gap_e * epsilon) + 4.0)
    return StabilityConstants(M=M, epsilon=epsilon, delta0=delta0,
                              delta1=delta1, delta=delta, k=k)


# ---------------------------------------------------------------------------
# batch experiment


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    x0: Point
    worst: float      # max over i in [k, n] of dist(x_i, fixed point)
    passed: bool


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a batch of perturbed orbits against one (delta, k)
    certificate.  constants_violated flags a delta_override larger than the
    certified budget; pass rates under a violated budget say nothing about
    the certificate."""

    constants: StabilityConstants
    delta_used: float
    constants_violated: bool
    n: int
    trials: tuple[TrialRecord, ...]

    @property
    def pass_count(self) -> int:
        return sum(1 for t in self.trials if t.passed)

    @property
    def all_passed(self) -> bool:
        return self.pass_count == len(self.trials)

    @property
    def worst_margin(self) -> float:
        """max over trials of (worst distance - epsilon); <= 0 iff all pass."""
        return max(t.worst - self.constants.epsilon for t in self.trials)


def run_stability_experiment(T: MappingInstance, xbar, M: float,
                             epsilon: float, trials: int, n: int,
                             seed: int,
                             delta_override: float | None = None
                             ) -> StabilityReport:
    """Launch seeded perturbed orbits around a fixed point and test the
    (delta, k) certificate from stability_constants.

    xbar must be fixed to within 1e-10.  Starts are drawn uniformly from the
    M-ball around xbar (projected into the domain when they land outside).
    n must be >= k so the settled window [k, n] is non-empty.  Per-trial
    noise seeds derive from the master seed, so reports reproduce exactly.

    delta_override substitutes a different perturbation budget, e.g. to
    demonstrate failure beyond the certified delta; the report flags when
    the override exceeds the certificate.
    """
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")
    d = T.space.dimension
    xb = as_point(xbar, d)
    if not T.domain.contains(xb):
        raise DomainError(f"fixed point {xb!r} lies outside the domain",
                          point=xb)
    drift = T.space.distance(xb, T.apply(xb))
    if drift > 1e-10:
        raise ArgumentError(
            f"xbar moves by {drift} under T; not fixed to 1e-10")
    consts = stability_constants(M, epsilon, T.declared_modulus)
    if n < consts.k:
        raise ArgumentError(
            f"orbit length n={n} is below the settling index k={consts.k}")
    delta_used = consts.delta if delta_override is None else delta_override
    if delta_used < 0.0:
        raise ArgumentError(f"delta must be >= 0, got {delta_used}")
    violated = delta_override is not None and delta_override > consts.delta

    rng = np.random.default_rng(seed)
    records = []
    for trial in range(trials):
        direction = rng.standard_normal(d)
        nrm = math.sqrt(float(direction @ direction))
        if nrm < 1e-300:
            direction = np.zeros(d)
            direction[0] = 1.0
            nrm = 1.0
        x0 = xb + direction * (M * rng.random() ** (1.0 / d) / nrm)
        if not T.domain.contains(x0) and T.domain.project is not None:
            x0 = T.domain.project(x0)
        if not T.domain.contains(x0):
            raise DomainError(
                f"drawn start {x0!r} could not be placed in the domain",
                point=x0)
        noise_seed = int(rng.integers(0, 2 ** 63))
        orb = orbit_inexact(T, x0, n, delta_used, noise_seed)
        if orb.exited_domain_at is not None:
            worst = math.inf
        else:
            worst = float(np.max(_rowwise(T, orb.points[consts.k:], xb)))
        records.append(TrialRecord(trial=trial, x0=_frozen(x0), worst=worst,
                                   passed=worst <= epsilon))
    return StabilityReport(constants=consts, delta_used=delta_used,
                           constants_violated=violated, n=n,
                           trials=tuple(records))


# ---------------------------------------------------------------------------
# serialization


def orbit_csv(orbit: Orbit) -> str:
    """Orbit as CSV: index, coordinates, residual (empty on the seed row).

    Floats are written with repr, so equal runs give byte-equal files.
    """
    d = orbit.points.shape[1]
    cols = ["i"] + [f"x{j}" for j in range(d)] + ["residual"]
    lines = [",".join(cols)]
    for i, p in enumerate(orbit.points):
        res = "" if i == 0 else repr(float(orbit.residuals[i - 1]))
        lines.append(",".join([str(i)] + [repr(float(c)) for c in p] + [res]))
    return "\n".join(lines) + "\n"


def stability_report_text(report: StabilityReport) -> str:
    """Stability report as key=value record lines, one trial per line."""
    c = report.constants
    out = [
        f"M={c.M!r}",
        f"epsilon={c.epsilon!r}",
        f"delta0={c.delta0!r}",
        f"delta1={c.delta1!r}",
        f"delta={c.delta!r}",
        f"k={c.k}",
        f"delta_used={report.delta_used!r}",
        f"constants_violated={report.constants_violated}",
        f"n={report.n}",
        f"trials={len(report.trials)}",
        f"pass_count={report.pass_count}",
        f"worst_margin={report.worst_margin!r}",
    ]
    for t in report.trials:
        x0 = ";".join(repr(float(v)) for v in t.x0)
        out.append(f"trial={t.trial} x0={x0} k={c.k} "
                   f"delta={report.delta_used!r} worst={t.worst!r} "
                   f"pass={t.passed}")
    return "\n".join(out) + "\n"
