"""Controlling the head: minimal lifts, tracking, frame flows, reachability.

The control law is the Gram-transfer identity run backwards: to move the head
with velocity hdot, solve A_u w = hdot and steer along the horizontal gradient
of w.  That lift is the L^2-minimal tangent velocity realizing hdot, which is
what makes the tracked trajectories energy-optimal among all lifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .endpoint import gram, singular_tolerance, solve_transfer
from .frames import GVector, gvector_dim, psi_matrix
from .geometry import (
    Configuration,
    DegeneracyError,
    LayoutError,
    TangentField,
    integrate_field,
    renormalize,
)

__all__ = [
    "FlowSchedule",
    "LOOP_BRACKET_SIGN",
    "ReachResult",
    "TargetCurve",
    "TargetError",
    "Trajectory",
    "commutator_loop",
    "composite_flow",
    "control_coordinates",
    "energy",
    "flow_frame",
    "lift_velocity",
    "reach_probe",
    "sup_distance",
    "track",
]

# Empirical sign of (loop(t) - id)/t^2 -> sign * B_ij for the loop order
# flow_i(t) o flow_j(t) o flow_i(-t) o flow_j(-t), rightmost applied first.
# Determined once against the analytic bracket field and frozen.
LOOP_BRACKET_SIGN = +1.0

BOUNDARY_MARGIN_SCALE = 0.02  # target curves must stay in the ball of radius (1 - this) * L


class TargetError(ValueError):
    """A target curve violates its preconditions (containment, initial match)."""


class _SingularStop(Exception):
    def __init__(self, margin: float):
        self.margin = margin


# -- targets -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TargetCurve:
    """Head target c(t) with analytic velocity, valid on [0, duration]."""

    kind: str
    value: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]
    duration: float
    params: dict

    @staticmethod
    def _checked(curve: "TargetCurve", total_length: float) -> "TargetCurve":
        limit = (1.0 - BOUNDARY_MARGIN_SCALE) * total_length
        ts = np.linspace(0.0, curve.duration, 512)
        worst = max(float(np.linalg.norm(curve.value(t))) for t in ts)
        if worst > limit:
            raise TargetError(
                f"target reaches |c| = {worst:.6g}, outside the safe ball "
                f"radius {limit:.6g} (arm length {total_length:g})")
        return curve

    @staticmethod
    def circle(total_length: float, radius: float, *, d: int = 2,
               omega: float = 1.0, center: Optional[Sequence[float]] = None,
               plane: Tuple[int, int] = (0, 1), phase: float = 0.0,
               duration: Optional[float] = None) -> "TargetCurve":
        if omega == 0.0:
            raise TargetError("circle target needs omega != 0")
        ctr = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        i, j = plane
        dur = abs(2.0 * np.pi / omega) if duration is None else duration

        def value(t):
            out = ctr.copy()
            out[i] += radius * np.cos(omega * t + phase)
            out[j] += radius * np.sin(omega * t + phase)
            return out

        def velocity(t):
            out = np.zeros(d)
            out[i] = -radius * omega * np.sin(omega * t + phase)
            out[j] = radius * omega * np.cos(omega * t + phase)
            return out

        params = dict(radius=radius, omega=omega, center=ctr.tolist(),
                      plane=list(plane), phase=phase)
        return TargetCurve._checked(
            TargetCurve("circle", value, velocity, dur, params), total_length)

    @staticmethod
    def segment(total_length: float, start: Sequence[float], end: Sequence[float],
                duration: float = 1.0) -> "TargetCurve":
        a = np.asarray(start, dtype=float)
        b = np.asarray(end, dtype=float)
        if duration <= 0:
            raise TargetError("segment target needs positive duration")
        vel = (b - a) / duration
        params = dict(start=a.tolist(), end=b.tolist(), duration=duration)
        return TargetCurve._checked(
            TargetCurve("segment", lambda t: a + t * vel, lambda t: vel.copy(),
                        duration, params), total_length)

    @staticmethod
    def lissajous(total_length: float, *, d: int = 2, amplitudes=(1.0, 1.0),
                  freqs=(1.0, 2.0), delta: float = 0.0,
                  center: Optional[Sequence[float]] = None,
                  plane: Tuple[int, int] = (0, 1),
                  duration: Optional[float] = None) -> "TargetCurve":
        ctr = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        ax, ay = amplitudes
        p, q = freqs
        i, j = plane
        dur = 2.0 * np.pi if duration is None else duration

        def value(t):
            out = ctr.copy()
            out[i] += ax * np.sin(p * t + delta)
            out[j] += ay * np.sin(q * t)
            return out

        def velocity(t):
            out = np.zeros(d)
            out[i] = ax * p * np.cos(p * t + delta)
            out[j] = ay * q * np.cos(q * t)
            return out

        params = dict(amplitudes=[ax, ay], freqs=[p, q], delta=delta,
                      center=ctr.tolist(), plane=list(plane))
        return TargetCurve._checked(
            TargetCurve("lissajous", value, velocity, dur, params), total_length)

    @staticmethod
    def polyline(total_length: float, times: Sequence[float],
                 points) -> "TargetCurve":
        ts = np.asarray(times, dtype=float)
        pts = np.asarray(points, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0) or ts[0] != 0.0:
            raise TargetError("polyline times must start at 0 and increase")
        if pts.shape[0] != ts.size:
            raise TargetError("polyline needs one point per time")
        slopes = np.diff(pts, axis=0) / np.diff(ts)[:, None]

        def _leg(t):
            return min(int(np.searchsorted(ts, t, side="right") - 1), ts.size - 2)

        def value(t):
            k = max(_leg(t), 0)
            return pts[k] + (t - ts[k]) * slopes[k]

        def velocity(t):
            return slopes[max(_leg(t), 0)].copy()

        params = dict(times=ts.tolist(), points=pts.tolist())
        return TargetCurve._checked(
            TargetCurve("polyline", value, velocity, float(ts[-1]), params),
            total_length)


# -- minimal lift --------------------------------------------------------------

def _lift_raw(vals: np.ndarray, weights: np.ndarray, total: float,
              rhs: np.ndarray, tol_singular: float):
    """Solve A w = rhs on raw sample values; returns (field, w, margin, cond)."""
    gamma = (weights[:, None] * vals).T @ vals
    evals = np.linalg.eigvalsh(gamma)
    margin = total - evals[-1]
    if margin <= tol_singular:
        raise _SingularStop(margin)
    a_op = total * np.eye(vals.shape[1]) - gamma
    w = np.linalg.solve(a_op, rhs)
    fld = w[None, :] - (vals @ w)[:, None] * vals
    cond = (total - evals[0]) / margin
    return fld, w, margin, cond


def lift_velocity(u: Configuration, head_vel, *,
                  tol_singular: Optional[float] = None,
                  axis_tol: float = 1e-8) -> Tuple[TangentField, np.ndarray]:
    """L^2-minimal tangent velocity whose pushforward is head_vel.

    At a singular u the solve restricts to the controllable complement and a
    head velocity with a component along the axis raises DegeneracyError.
    """
    head_vel = np.asarray(head_vel, dtype=float)
    if head_vel.shape != (u.d,):
        raise LayoutError(f"head velocity has shape {head_vel.shape}, expected ({u.d},)")
    tol = singular_tolerance(u, tol_singular)
    gd = gram(u)
    w = solve_transfer(gd, head_vel, tol_singular=tol,
                       restricted=gd.margin <= tol, axis_tol=axis_tol)
    vals = w[None, :] - (u.values @ w)[:, None] * u.values
    return TangentField(u, vals), w


# -- tracking ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded tracking run; arrays share the leading time axis."""

    base: Configuration
    scheme: str
    dt: float
    feedback_gain: float
    times: np.ndarray            # (T,)
    values: np.ndarray           # (T, S, d) unit samples
    heads: np.ndarray            # (T, d)
    controls: np.ndarray         # (T, d) solved w
    velocities: np.ndarray       # (T, S, d) realized udot
    margins: np.ndarray          # (T,)
    tracking_errors: np.ndarray  # (T,)
    conds: np.ndarray            # (T,)
    energies: np.ndarray         # (T,) cumulative action
    status: str                  # "completed" | "singular-stop"

    @property
    def n_steps(self) -> int:
        return self.times.size

    def config_at(self, k: int) -> Configuration:
        return self.base.with_values(self.values[k])

    def final_config(self) -> Configuration:
        return self.config_at(-1)


def track(u0: Configuration, target: TargetCurve, *, scheme: str = "rk4",
          dt: float = 1e-3, feedback_gain: float = 0.0,
          duration: Optional[float] = None, tol_singular: Optional[float] = None,
          tol_init: float = 1e-9) -> Trajectory:
    """Integrate udot = lift(cdot + K (c - E(u))) and record the run.

    Halts with status "singular-stop" the moment the Gram margin crosses
    tol_singular (default 1e-8 L); each accepted step is renormalized.
    """
    if scheme not in ("euler", "rk4"):
        raise LayoutError(f"unknown scheme {scheme!r}")
    tol = singular_tolerance(u0, tol_singular)
    total = u0.total_length
    weights = u0.quadrature.weights
    head0 = integrate_field(u0)
    gap = float(np.linalg.norm(head0 - target.value(0.0)))
    if gap > tol_init and feedback_gain == 0.0:
        raise TargetError(
            f"initial head is {gap:.3e} from the target start and no feedback "
            "gain is set; the offset would persist")
    horizon = target.duration if duration is None else duration
    n = max(int(round(horizon / dt)), 1)
    k_gain = feedback_gain

    def command(t, head):
        c = target.velocity(t)
        if k_gain != 0.0:
            c = c + k_gain * (target.value(t) - head)
        return c

    def deriv(t, vals):
        head = weights @ vals
        fld, w, margin, cond = _lift_raw(vals, weights, total, command(t, head), tol)
        return fld, w, margin, cond, head

    times, values, heads, controls, velocities = [], [], [], [], []
    margins, terrs, conds, energies = [], [], [], []
    status = "completed"
    vals = u0.values.copy()
    acc = 0.0
    prev_rate = None

    for k in range(n + 1):
        t = k * dt
        try:
            fld, w, margin, cond, head = deriv(t, vals)
        except _SingularStop as stop:
            status = "singular-stop"
            margins.append(stop.margin)
            times.append(t)
            values.append(vals.copy())
            heads.append(weights @ vals)
            controls.append(np.zeros(u0.d))
            velocities.append(np.zeros_like(vals))
            terrs.append(float(np.linalg.norm(heads[-1] - target.value(t))))
            conds.append(np.inf)
            energies.append(acc)
            break
        rate = 0.5 * float(weights @ np.einsum("ij,ij->i", fld, fld))
        if prev_rate is not None:
            acc += 0.5 * dt * (prev_rate + rate)
        prev_rate = rate
        times.append(t)
        values.append(vals.copy())
        heads.append(head)
        controls.append(w)
        velocities.append(fld)
        margins.append(margin)
        terrs.append(float(np.linalg.norm(head - target.value(t))))
        conds.append(cond)
        energies.append(acc)
        if k == n:
            break
        try:
            if scheme == "euler":
                step = dt * fld
            else:
                k1 = fld
                k2 = deriv(t + 0.5 * dt, vals + 0.5 * dt * k1)[0]
                k3 = deriv(t + 0.5 * dt, vals + 0.5 * dt * k2)[0]
                k4 = deriv(t + dt, vals + dt * k3)[0]
                step = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except _SingularStop as stop:
            status = "singular-stop"
            # the stage collapsed; keep the last recorded state as final
            break
        vals = vals + step
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)

    return Trajectory(u0, scheme, dt, feedback_gain, np.array(times),
                      np.array(values), np.array(heads), np.array(controls),
                      np.array(velocities), np.array(margins), np.array(terrs),
                      np.array(conds), np.array(energies), status)


def energy(traj: Trajectory) -> float:
    """Action of the run: (1/2) integral over time of l2_norm(udot)^2."""
    if traj.times.size < 2:
        raise DegeneracyError("energy needs at least two recorded steps")
    w = traj.base.quadrature.weights
    rates = 0.5 * np.einsum("q,tqj,tqj->t", w, traj.velocities, traj.velocities)
    return float(np.trapezoid(rates, traj.times))


def sup_distance(a: Configuration, b: Configuration) -> float:
    """d_inf: largest samplewise distance between two configurations."""
    if not a.same_layout(b):
        raise LayoutError("configurations live on different layouts")
    return float(np.linalg.norm(a.values - b.values, axis=1).max())


# -- frame-field flows -----------------------------------------------------------

def flow_frame(u: Configuration, i: int, t: float) -> Configuration:
    """Exact flow of E_i for time t (closed form; +/- e_i are fixed points).

    Per sample the e_i component follows xdot = 1 - x^2 and the orthogonal
    part contracts without turning, which integrates to a Moebius map in
    tanh t -- stable for any t, no inverse hyperbolics.
    """
    if not 0 <= i < u.d:
        raise LayoutError(f"frame index {i} out of range for d = {u.d}")
    tau = np.tanh(t)
    sech = 1.0 / np.cosh(t)
    c = u.values[:, i]
    denom = 1.0 + c * tau
    out = (sech / denom)[:, None] * u.values
    out[:, i] = (c + tau) / denom
    return renormalize(u.with_values(out))


@dataclass(frozen=True, eq=False)
class FlowSchedule:
    """Sequence of (frame index, sign, duration >= 0) legs."""

    legs: Tuple[Tuple[int, float, float], ...]

    def __post_init__(self):
        legs = tuple((int(i), float(s), float(tau)) for i, s, tau in self.legs)
        for i, s, tau in legs:
            if s not in (-1.0, 1.0):
                raise LayoutError(f"flow sign must be +/-1, got {s}")
            if tau < 0:
                raise LayoutError("flow durations are nonnegative; flip the sign")
        object.__setattr__(self, "legs", legs)

    @property
    def total_time(self) -> float:
        return sum(tau for _, _, tau in self.legs)

    @staticmethod
    def random(rng: np.random.Generator, d: int, n_legs: int,
               max_duration: float = 0.8) -> "FlowSchedule":
        legs = tuple((int(rng.integers(d)), float(rng.choice([-1.0, 1.0])),
                      float(rng.uniform(0.1, max_duration))) for _ in range(n_legs))
        return FlowSchedule(legs)


def composite_flow(u: Configuration, schedule: FlowSchedule) -> Configuration:
    """Apply the schedule legs left to right."""
    for i, sign, tau in schedule.legs:
        u = flow_frame(u, i, sign * tau)
    return u


def commutator_loop(u: Configuration, i: int, j: int,
                    t: float) -> Tuple[Configuration, TangentField]:
    """Four-flow loop flow_i(t) flow_j(t) flow_i(-t) flow_j(-t), rightmost first.

    Returns the loop endpoint and the second-order estimate
    (loop(u) - u)/t^2 projected to the tangent at u, which converges to
    LOOP_BRACKET_SIGN * B_ij(u) at first order in t.
    """
    if t == 0.0:
        raise LayoutError("loop time must be nonzero")
    out = flow_frame(flow_frame(flow_frame(flow_frame(u, j, -t), i, -t), j, t), i, t)
    est = (out.values - u.values) / t**2
    est = est - np.einsum("ij,ij->i", u.values, est)[:, None] * u.values
    return out, TangentField(u, est)


# -- coordinates and reachability ---------------------------------------------

def control_coordinates(traj: Trajectory) -> Tuple[np.ndarray, np.ndarray]:
    """Per-step minimal-norm (sigma, xi) with Psi_u a ~ udot, plus L2 residuals."""
    dim = gvector_dim(traj.base.d)
    coeffs = np.empty((traj.n_steps, dim))
    residuals = np.empty(traj.n_steps)
    scale = np.repeat(np.sqrt(traj.base.quadrature.weights), traj.base.d)
    for k in range(traj.n_steps):
        cfg = traj.config_at(k)
        mat = psi_matrix(cfg)
        b = scale * traj.velocities[k].ravel()
        sol, _, _, _ = np.linalg.lstsq(mat, b, rcond=None)
        coeffs[k] = sol
        residuals[k] = float(np.linalg.norm(mat @ sol - b))
    return coeffs, residuals


@dataclass(frozen=True, eq=False)
class ReachResult:
    distances: np.ndarray   # monotone best-so-far d_inf trace
    success: bool
    steps_used: int
    final: Configuration


def reach_probe(u: Configuration, v: Configuration, *, budget: int = 10_000,
                tol_reach: float = 1e-2, seed: int = 0, h0: float = 0.5,
                h_min: float = 1e-7, max_kicks: int = 50) -> ReachResult:
    """Greedy horizontal steering of u toward v; positive certificates only.

    Moves per round: one lift step along the straight head path toward
    endpoint(v), frame flows +/- E_i, and commutator loops for every ordered
    pair (which realize both bracket signs).  Each candidate evaluation costs
    one budget step; the step size halves when no candidate improves, and a
    seeded random head-kick breaks plateaus.  Failure only means the probe
    gave up -- it never certifies unreachability.
    """
    if not u.same_layout(v):
        raise LayoutError("configurations live on different layouts")
    rng = np.random.default_rng(seed)
    weights = u.quadrature.weights
    total = u.total_length
    tol = singular_tolerance(u)
    target_head = integrate_field(v)

    def objective(cfg):
        diff = cfg.values - v.values
        return float(weights @ np.einsum("ij,ij->i", diff, diff))

    def lift_step(cfg, h):
        rhs = target_head - integrate_field(cfg)
        fld, _, _, _ = _lift_raw(cfg.values, weights, total, rhs, tol)
        return renormalize(cfg.with_values(cfg.values + h * fld))

    current = u
    best = current
    best_dist = sup_distance(current, v)
    trace = [best_dist]
    used = 0
    h = h0
    kicks = 0
    pairs = [(i, j) for i in range(u.d) for j in range(u.d) if i != j]

    while used < budget and best_dist > tol_reach:
        candidates = []
        if used < budget:
            try:
                candidates.append(lift_step(current, h))
            except (_SingularStop, DegeneracyError):
                pass
            used += 1
        for i in range(u.d):
            for sign in (1.0, -1.0):
                if used >= budget:
                    break
                candidates.append(flow_frame(current, i, sign * h))
                used += 1
        loop_t = np.sqrt(h)
        for (i, j) in pairs:
            if used >= budget:
                break
            candidates.append(commutator_loop(current, i, j, loop_t)[0])
            used += 1

        here = objective(current)
        scored = [(objective(c), c) for c in candidates]
        scored.sort(key=lambda p: p[0])
        if scored and scored[0][0] < here - 1e-15:
            current = scored[0][1]
            dist = sup_distance(current, v)
            if dist < best_dist:
                best, best_dist = current, dist
            trace.append(best_dist)
            continue
        h *= 0.5
        if h < h_min:
            if kicks >= max_kicks:
                break
            kicks += 1
            h = h0 * 0.25
            kick = rng.standard_normal(u.d)
            kick /= np.linalg.norm(kick)
            try:
                fld, _, _, _ = _lift_raw(current.values, weights, total, kick, tol)
                current = renormalize(
                    current.with_values(current.values + 0.01 * h0 * fld))
            except _SingularStop:
                pass
            used += 1
            dist = sup_distance(current, v)
            if dist < best_dist:
                best, best_dist = current, dist
            trace.append(best_dist)

    return ReachResult(np.array(trace), bool(best_dist <= tol_reach), used, best)
