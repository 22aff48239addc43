"""Homotopy continuation for x = t T x on a star-shaped domain.

The scaled maps t T (0 <= t < 1) of a nonexpansive T are Banach contractions
with ratio t, so each x_t = t T x_t is found by plain inner iteration.  The
path t -> x_t is continued with an explicit step rule: from a solved
parameter t0, any step below

    min( r (1 - q) / (1 + ||T x_{t0}||),  q - t0 )        (0 <= t0 < q < 1)

keeps the closed ball of radius r around x_{t0} invariant under the next
scaled map, so the warm-started inner solve cannot leave it.  The tracer
halves this bound for safety and chooses r inside the domain, which keeps
the whole path interior.

Two a-priori norm bounds accompany the path: ||x_t|| <= ||T 0|| / (1 - q)
for t <= q, and, when T is contractive with admissible modulus phi,
||x_t|| <= max(1, ||T 0|| / (1 - phi(1))) uniformly in t.  Parameter
separation controls point separation through the Lipschitz-type bound
|t_a - t_b| M / (1 - q) with M a bound on ||T x_t|| over the stretch.

The only obstruction to continuing all the way is the boundary condition:
T x = lam x with lam > 1 at a boundary point x.  check_leray_schauder tests
it; the tracer raises LsViolationError when the path is pinned against such
a point, and StallError when steps collapse without a detected violation.
limit_path pushes t -> 1 along a geometric schedule for contractive T and
certifies the limit as a fixed point of T itself, possibly on the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import MappingInstance, Modulus, Point, as_point, _frozen
from .errors import (ArgumentError, ConvergenceError, DomainError,
                     DomainExitError, LsViolationError, NonRakotchError,
                     StallError)

# a path step this small with no boundary-condition violation is a stall
_STALL_STEP = 1e-14


@dataclass(frozen=True)
class PathConfig:
    """Tracer configuration.

    q < 1 caps the parameter range with guaranteed norm bounds; for a map
    without admissible modulus tracing stops at q even if target_t is
    larger.  target_t = 0 is allowed and gives the single-entry path (0, 0).
    target_t = 1 is refused here: the limit t -> 1 is limit_path's job.
    mbound, when given, overrides the running bound on ||T x_t|| used in
    consistency checks.
    """

    q: float = 0.9
    inner_tol: float = 1e-10
    max_inner_iter: int = 200_000
    target_t: float = 0.9
    mbound: float | None = None

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ArgumentError(f"q must lie in (0, 1), got {self.q}")
        if self.inner_tol <= 0.0:
            raise ArgumentError(
                f"inner_tol must be > 0, got {self.inner_tol}")
        if self.max_inner_iter < 1:
            raise ArgumentError("max_inner_iter must be >= 1")
        if not 0.0 <= self.target_t < 1.0:
            raise ArgumentError(
                f"target_t must lie in [0, 1), got {self.target_t}; "
                "use limit_fixed_point for the limit t -> 1")
        if self.mbound is not None and self.mbound <= 0.0:
            raise ArgumentError(f"mbound must be > 0, got {self.mbound}")


class PathEntry(NamedTuple):
    t: float
    x: np.ndarray
    inner_residual: float
    step_bound_used: float    # the accepted step that led to this entry
    r_used: float             # invariant-ball radius backing that step
    norm_bound_ok: bool


@dataclass(frozen=True)
class LimitCertificate:
    """Evidence attached to a limit point x1: its residual ||x1 - T x1||,
    the tail bound that stopped the schedule, the number of schedule steps,
    and whether x1 sits within final_tol of the boundary."""

    residual: float
    tail_bound: float
    schedule_steps: int
    on_boundary: bool


@dataclass(frozen=True)
class ContinuationPath:
    """A traced path: entries in increasing t, plus the q and inner_tol it
    was run with, the ||T x_t|| bound observed or configured, and, for limit
    runs, the terminal fixed point with its certificate."""

    entries: tuple[PathEntry, ...]
    q: float
    inner_tol: float
    mbound: float
    terminal: tuple[np.ndarray, LimitCertificate] | None = None

    @property
    def final(self) -> PathEntry:
        return self.entries[-1]


def _require_norm(T: MappingInstance):
    if T.space.norm is None:
        raise ArgumentError(
            "continuation needs a norm-induced metric; this space has none")
    return T.space.norm


def solve_at_t(T: MappingInstance, t: float, x_init, inner_tol: float,
               max_inner_iter: int = 200_000) -> tuple[Point, float]:
    """Solve x = t T x by inner iteration from x_init.

    Returns (solution, final residual) with residual = ||x - t T x||.  The
    residual is evaluated before stepping, so a warm start that already
    meets inner_tol is returned untouched.  Raises DomainExitError if an
    iterate leaves the closed domain and ConvergenceError on budget
    exhaustion.
    """
    if not 0.0 <= t < 1.0:
        raise ArgumentError(f"t must lie in [0, 1), got {t}")
    if inner_tol <= 0.0:
        raise ArgumentError(f"inner_tol must be > 0, got {inner_tol}")
    if max_inner_iter < 1:
        raise ArgumentError("max_inner_iter must be >= 1")
    norm = _require_norm(T)
    x = as_point(x_init, T.space.dimension)
    if not T.domain.contains(x):
        raise DomainError(f"warm start {x!r} lies outside the domain",
                          point=x)
    r = math.inf
    for _ in range(max_inner_iter + 1):
        y = t * T.apply(x)
        r = norm(x - y)
        if r <= inner_tol:
            return _frozen(x), r
        if not T.domain.contains(y):
            raise DomainExitError(
                f"inner iterate left the domain at t={t}", t=t,
                point=_frozen(y), last_inside=_frozen(x))
        x = y
    raise ConvergenceError(
        f"inner solve at t={t} did not reach {inner_tol} within "
        f"{max_inner_iter} iterations (last residual {r})", residual=r)


def step_size(r: float, q: float, norm_Tx: float, t0: float) -> float:
    """Safe parameter step from t0: half of
    min(r (1 - q) / (1 + norm_Tx), q - t0).

    Any step below the unhalved bound keeps the r-ball around the current
    point invariant for the next scaled map; halving keeps the inequality
    strict in floating point.
    """
    if r <= 0.0:
        raise ArgumentError(f"ball radius must be > 0, got {r}")
    if not 0.0 < q < 1.0:
        raise ArgumentError(f"q must lie in (0, 1), got {q}")
    if not 0.0 <= t0 < q:
        raise ArgumentError(f"t0 must lie in [0, q), got t0={t0}, q={q}")
    if norm_Tx < 0.0:
        raise ArgumentError(f"norm_Tx must be >= 0, got {norm_Tx}")
    return 0.5 * min(r * (1.0 - q) / (1.0 + norm_Tx), q - t0)


class NormBounds(NamedTuple):
    nonexpansive: float   # ||x_t|| <= ||T 0|| / (1 - q), valid for t <= q
    rakotch: float        # max(1, ||T 0|| / (1 - phi(1))), valid for all t


def apriori_norm_bound(norm_T0: float, q: float, m: Modulus) -> NormBounds:
    """A-priori bounds on ||x_t|| for solutions of x = t T x.

    The nonexpansive bound needs only ||T x|| <= ||T 0|| + ||x||; the
    second needs an admissible modulus and is infinite for the nonexpansive
    sentinel.  Raises NonRakotchError if a modulus claiming admissibility
    has phi(1) >= 1.
    """
    if norm_T0 < 0.0:
        raise ArgumentError(f"norm_T0 must be >= 0, got {norm_T0}")
    if not 0.0 < q < 1.0:
        raise ArgumentError(f"q must lie in (0, 1), got {q}")
    phi1 = m(1.0)
    if m.rakotch and phi1 >= 1.0:
        raise NonRakotchError(
            f"modulus flagged admissible but phi(1) = {phi1}")
    rak = max(1.0, norm_T0 / (1.0 - phi1)) if phi1 < 1.0 else math.inf
    return NormBounds(nonexpansive=norm_T0 / (1.0 - q), rakotch=rak)


def lipschitz_bound(t_a: float, t_b: float, mbound: float, q: float) -> float:
    """|t_a - t_b| mbound / (1 - q): how far x_{t_a} and x_{t_b} can lie
    apart when ||T x_t|| <= mbound along [t_a, t_b] and both parameters stay
    in [0, q].  Parameters above q are refused: the denominator 1 - q is
    only valid there."""
    if not 0.0 < q < 1.0:
        raise ArgumentError(f"q must lie in (0, 1), got {q}")
    if mbound <= 0.0:
        raise ArgumentError(f"mbound must be > 0, got {mbound}")
    for t in (t_a, t_b):
        if not 0.0 <= t <= q:
            raise ArgumentError(
                f"parameters must lie in [0, q] = [0, {q}], got {t}")
    return abs(t_a - t_b) * mbound / (1.0 - q)


@dataclass(frozen=True)
class LsReport:
    """Boundary-condition audit at one boundary point: violated is True
    when T x lands within tol of lam x for some lam > 1, either from the
    supplied grid or from the alignment ratio ||T x|| / ||x||."""

    point: Point
    image: Point
    violated: bool
    lam: float | None
    checked_lambdas: tuple[float, ...]
    tol: float


def check_leray_schauder(T: MappingInstance, x, lambda_grid: Sequence[float],
                         tol: float = 1e-9) -> LsReport:
    """Test the boundary condition T x != lam x (lam > 1) at a boundary
    point x != 0.

    Two routes: each lam in lambda_grid is tested directly, and the
    alignment ratio mu = ||T x|| / ||x|| is tested when mu > 1, which
    catches violations at lam values no finite grid would hit.  x must lie
    in the closed domain within tol of its boundary; x = 0 is refused
    because 0 is assumed interior.
    """
    if tol <= 0.0:
        raise ArgumentError(f"tol must be > 0, got {tol}")
    grid = tuple(float(lam) for lam in lambda_grid)
    if any(lam <= 1.0 for lam in grid):
        raise ArgumentError("lambda grid entries must be > 1")
    norm = _require_norm(T)
    x = as_point(x, T.space.dimension)
    nx = norm(x)
    if nx == 0.0:
        raise ArgumentError("boundary condition is posed at nonzero x; "
                            "0 is interior")
    if not T.domain.contains(x):
        raise DomainError(f"{x!r} lies outside the closed domain", point=x)
    if T.domain.boundary_distance(x) > tol:
        raise ArgumentError(
            f"{x!r} is not within {tol} of the boundary")
    Tx = T.apply(x)
    lam_hit = None
    for lam in grid:
        if norm(Tx - lam * x) <= tol:
            lam_hit = lam
            break
    if lam_hit is None:
        mu = norm(Tx) / nx
        if mu > 1.0 and norm(Tx - mu * x) <= tol:
            lam_hit = mu
    return LsReport(point=_frozen(x), image=_frozen(Tx),
                    violated=lam_hit is not None, lam=lam_hit,
                    checked_lambdas=grid, tol=tol)


# lam values worth probing directly when the tracer audits a pinned point
_DEFAULT_LS_GRID = (1.25, 1.5, 2.0, 3.0, 5.0, 10.0)


def _audit_boundary(T: MappingInstance, x: Point, t: float, tol: float):
    """Run the boundary-condition check at the boundary point nearest x and
    raise LsViolationError on a hit.  Points at which the check itself is
    ill-posed (x = 0, no boundary map) are left alone."""
    nb = T.domain.nearest_boundary
    bx = nb(x) if nb is not None else x
    if not T.domain.contains(bx) and T.domain.project is not None:
        bx = T.domain.project(bx)
    if not T.domain.contains(bx):
        return
    try:
        rep = check_leray_schauder(T, bx, _DEFAULT_LS_GRID, tol=tol)
    except ArgumentError:
        return
    if rep.violated:
        raise LsViolationError(
            f"boundary condition fails at t={t}: T x is {rep.lam} x at "
            f"boundary point {bx!r}", t=t, point=bx, lam=rep.lam)


def trace_path(T: MappingInstance, cfg: PathConfig) -> ContinuationPath:
    """Continue x = t T x from (0, 0) to cfg.target_t.

    Requires 0 in the interior of the domain.  Steps follow step_size with
    a local cap q_eff = max(cfg.q, (1 + t) / 2), which is sound for any cap
    in (t, 1) and keeps steps from collapsing as t crosses cfg.q; maps
    without admissible modulus are still stopped at min(target_t, cfg.q),
    where their norm guarantee ends.  The invariant radius r is capped at
    both 1 and the distance to the domain boundary, so every accepted point
    is interior.

    Each accepted entry records the inner residual, the accepted step, the
    backing radius, and whether the a-priori norm bounds held.  A path
    pinned against the boundary raises LsViolationError when the pin point
    violates the boundary condition, StallError when the step collapses
    below 1e-14 without a detected violation.
    """
    norm = _require_norm(T)
    d = T.space.dimension
    zero = np.zeros(d)
    if not T.domain.interior_contains(zero):
        raise DomainError("0 must be interior to the domain", point=zero)

    target = cfg.target_t
    if not T.declared_modulus.rakotch:
        target = min(target, cfg.q)

    norm_T0 = norm(T.apply(zero))
    bounds = apriori_norm_bound(norm_T0, cfg.q, T.declared_modulus)
    mbound_obs = norm_T0

    entries = [PathEntry(t=0.0, x=_frozen(zero), inner_residual=0.0,
                         step_bound_used=0.0, r_used=0.0,
                         norm_bound_ok=True)]
    t0 = 0.0
    x = zero
    while t0 < target:
        norm_Tx = norm(T.apply(x))
        mbound_obs = max(mbound_obs, norm_Tx)
        bd = T.domain.boundary_distance(x)
        r = min(bd, 1.0)
        if r <= 0.0:
            _audit_boundary(T, x, t0, max(cfg.inner_tol, 1e-12))
            raise StallError(
                f"path point at t={t0} sits on the boundary with no "
                "detected violation", t=t0, point=_frozen(x), step=0.0)
        q_eff = max(cfg.q, 0.5 * (1.0 + t0))
        step = step_size(r, q_eff, norm_Tx, t0)
        if step < _STALL_STEP:
            _audit_boundary(T, x, t0, max(cfg.inner_tol, 1e-12))
            raise StallError(
                f"step collapsed to {step} at t={t0} with no detected "
                "boundary-condition violation", t=t0, point=_frozen(x),
                step=step)
        t1 = min(t0 + step, target)
        try:
            x1, res = solve_at_t(T, t1, x, cfg.inner_tol,
                                 cfg.max_inner_iter)
        except DomainExitError as exc:
            _audit_boundary(T, exc.last_inside, t1,
                            max(cfg.inner_tol, 1e-12))
            raise LsViolationError(
                f"inner solve left the domain at t={t1} and no admissible "
                "continuation exists", t=t1, point=exc.last_inside,
                lam=None) from exc
        nx1 = norm(x1)
        ok = True
        if t1 <= cfg.q and nx1 > bounds.nonexpansive + 1e-9:
            ok = False
        if T.declared_modulus.rakotch and nx1 > bounds.rakotch + 1e-9:
            ok = False
        entries.append(PathEntry(t=t1, x=x1, inner_residual=res,
                                 step_bound_used=t1 - t0, r_used=r,
                                 norm_bound_ok=ok))
        # a solved point hugging the boundary must still satisfy the
        # boundary condition or the continuation is over
        if T.domain.boundary_distance(x1) <= cfg.inner_tol:
            _audit_boundary(T, x1, t1, max(cfg.inner_tol, 1e-12))
        t0 = t1
        x = x1
    mb = cfg.mbound if cfg.mbound is not None else mbound_obs
    return ContinuationPath(entries=tuple(entries), q=cfg.q,
                            inner_tol=cfg.inner_tol, mbound=mb)


def limit_path(T: MappingInstance, cfg: PathConfig, final_tol: float,
               schedule_ratio: float = 0.5) -> ContinuationPath:
    """Drive t -> 1 along t_n = 1 - schedule_ratio^n and certify the limit.

    Requires an admissible declared modulus: the stopping rule uses the
    uniform bound M on ||T x_t|| derived from the a-priori norm bound, and
    stops once (1 - t_n) M / (1 - phi(final_tol)) < final_tol, which
    dominates the distance from x_{t_n} to the limit.  The returned path
    carries the terminal point and its certificate; the limit may sit on
    the boundary, which is reported, not an error.  Different ratios give
    interlaced schedules; their limits must agree, which makes the ratio a
    useful consistency probe.
    """
    if final_tol <= 0.0:
        raise ArgumentError(f"final_tol must be > 0, got {final_tol}")
    if not 0.0 < schedule_ratio < 1.0:
        raise ArgumentError(
            f"schedule ratio must lie in (0, 1), got {schedule_ratio}")
    if not T.declared_modulus.rakotch:
        raise NonRakotchError(
            "the limit t -> 1 is only certified for admissible moduli")
    norm = _require_norm(T)
    d = T.space.dimension
    zero = np.zeros(d)
    if not T.domain.interior_contains(zero):
        raise DomainError("0 must be interior to the domain", point=zero)
    m = T.declared_modulus
    gap_ft = 1.0 - m(final_tol)
    if gap_ft <= 0.0:
        raise NonRakotchError(
            f"phi(final_tol) = {m(final_tol)} is not < 1")
    norm_T0 = norm(T.apply(zero))
    bounds = apriori_norm_bound(norm_T0, cfg.q, m)
    # ||T x_t|| <= phi(||x_t||) ||x_t|| + ||T 0|| <= rakotch bound + ||T 0||
    mb = cfg.mbound if cfg.mbound is not None else bounds.rakotch + norm_T0

    entries = [PathEntry(t=0.0, x=_frozen(zero), inner_residual=0.0,
                         step_bound_used=0.0, r_used=0.0,
                         norm_bound_ok=True)]
    x = zero
    t_prev = 0.0
    terminal = None
    for step_no in range(1, 400):
        t_n = 1.0 - schedule_ratio ** step_no
        try:
            x, res = solve_at_t(T, t_n, x, cfg.inner_tol,
                                cfg.max_inner_iter)
        except DomainExitError as exc:
            _audit_boundary(T, exc.last_inside, t_n,
                            max(cfg.inner_tol, 1e-12))
            raise LsViolationError(
                f"inner solve left the domain at t={t_n} on the limit "
                "schedule", t=t_n, point=exc.last_inside, lam=None) from exc
        ok = norm(x) <= bounds.rakotch + 1e-9
        entries.append(PathEntry(t=t_n, x=x, inner_residual=res,
                                 step_bound_used=t_n - t_prev, r_used=0.0,
                                 norm_bound_ok=ok))
        t_prev = t_n
        tail = (1.0 - t_n) * mb / gap_ft
        if tail < final_tol:
            resid = norm(x - T.apply(x))
            if resid > 10.0 * final_tol:
                raise ConvergenceError(
                    f"limit candidate residual {resid} exceeds "
                    f"10 * final_tol", residual=resid)
            on_bd = T.domain.boundary_distance(x) <= final_tol
            cert = LimitCertificate(residual=resid, tail_bound=tail,
                                    schedule_steps=step_no,
                                    on_boundary=on_bd)
            terminal = (x, cert)
            break
    if terminal is None:
        raise ConvergenceError(
            "limit schedule exhausted 400 steps without meeting its "
            "tail bound")
    return ContinuationPath(entries=tuple(entries), q=cfg.q,
                            inner_tol=cfg.inner_tol, mbound=mb,
                            terminal=terminal)


class LimitResult(NamedTuple):
    point: Point
    on_boundary: bool


def limit_fixed_point(T: MappingInstance, cfg: PathConfig, final_tol: float,
                      schedule_ratio: float = 0.5) -> LimitResult:
    """Fixed point of T obtained as the limit of x_t for t -> 1.

    Convenience wrapper over limit_path; returns the terminal point and the
    boundary flag from its certificate.
    """
    path = limit_path(T, cfg, final_tol, schedule_ratio)
    x1, cert = path.terminal
    return LimitResult(point=x1, on_boundary=cert.on_boundary)


# ---------------------------------------------------------------------------
# serialization


def path_csv(path: ContinuationPath) -> str:
    """Path as CSV: t, coordinates, inner residual, accepted step, backing
    radius.  A terminal record (t = 1 limit) is appended as a final row
    with the certificate residual in the residual column."""
    d = path.entries[0].x.shape[0]
    cols = (["t"] + [f"x{j}" for j in range(d)]
            + ["inner_residual", "step_bound_used", "r_used"])
    lines = [",".join(cols)]
    for e in path.entries:
        lines.append(",".join([repr(float(e.t))]
                              + [repr(float(c)) for c in e.x]
                              + [repr(float(e.inner_residual)),
                                 repr(float(e.step_bound_used)),
                                 repr(float(e.r_used))]))
    if path.terminal is not None:
        x1, cert = path.terminal
        lines.append(",".join(["1.0"] + [repr(float(c)) for c in x1]
                              + [repr(float(cert.residual)),
                                 repr(float(cert.tail_bound)),
                                 "0.0"]))
    return "\n".join(lines) + "\n"
