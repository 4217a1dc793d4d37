"""Discretized spherical configurations of an articulated arm.

A configuration is a map u : [0, L] -> S^{d-1} stored sample-wise together
with a quadrature rule, so that every integral in the package is a plain
weighted sum.  Two representations share one layout:

* arm      -- piecewise constant, one unit vector per segment;
* sampled  -- M >= 2 equispaced samples per segment (nodes are never shared
              across knots, so jump discontinuities at knots are honored).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

TOL_UNIT = 1e-12   # max allowed deviation of stored vectors from unit norm
TOL_ORTH = 1e-10   # max allowed fiberwise <u, v> before a tangent field is rejected
RENORM_FLOOR = 0.5 # below this norm, renormalization is refused as degenerate


class LayoutError(ValueError):
    """Operands live on different partitions / representations."""


class DegeneracyError(ArithmeticError):
    """A numerically degenerate object: near-zero renormalization, singular solve."""


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Partition:
    """Knot vector 0 = s_0 < s_1 < ... < s_N = L."""

    knots: np.ndarray

    def __post_init__(self):
        k = _frozen(self.knots)
        if k.ndim != 1 or k.size < 2:
            raise LayoutError("partition needs at least two knots")
        if not np.all(np.isfinite(k)):
            raise LayoutError("non-finite knot")
        if k[0] != 0.0:
            raise LayoutError(f"first knot must be 0, got {k[0]}")
        if np.any(np.diff(k) <= 0):
            raise LayoutError("knots must be strictly increasing")
        object.__setattr__(self, "knots", k)

    @property
    def n_segments(self) -> int:
        return self.knots.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.knots)

    @property
    def total(self) -> float:
        return float(self.knots[-1])

    def same_as(self, other: "Partition") -> bool:
        return self.knots.shape == other.knots.shape and bool(
            np.all(self.knots == other.knots)
        )

    @staticmethod
    def uniform(n_segments: int, total: float = None) -> "Partition":
        """n segments of unit length (or of length total/n)."""
        total = float(n_segments) if total is None else float(total)
        return Partition(np.linspace(0.0, total, n_segments + 1))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights; sum of weights over a segment equals its length."""

    scheme: str
    nodes: np.ndarray    # (S,) global arc-length positions
    weights: np.ndarray  # (S,) positive
    segment_of: np.ndarray  # (S,) int, which segment each sample belongs to

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "segment_of", _frozen(self.segment_of, dtype=np.intp))
        if np.any(self.weights <= 0):
            raise LayoutError("quadrature weights must be positive")


def _arm_rule(partition: Partition) -> QuadratureRule:
    mids = 0.5 * (partition.knots[:-1] + partition.knots[1:])
    return QuadratureRule("segment", mids, partition.lengths,
                          np.arange(partition.n_segments))


def _trapezoid_rule(partition: Partition, m: int) -> QuadratureRule:
    nodes, weights, seg = [], [], []
    for i in range(partition.n_segments):
        a, b = partition.knots[i], partition.knots[i + 1]
        h = (b - a) / (m - 1)
        nodes.append(np.linspace(a, b, m))
        w = np.full(m, h)
        w[0] = w[-1] = h / 2
        weights.append(w)
        seg.append(np.full(m, i))
    return QuadratureRule("trapezoid", np.concatenate(nodes),
                          np.concatenate(weights), np.concatenate(seg))


def _gauss_rule(partition: Partition, m: int) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(m)  # on [-1, 1]
    nodes, weights, seg = [], [], []
    for i in range(partition.n_segments):
        a, b = partition.knots[i], partition.knots[i + 1]
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
        seg.append(np.full(m, i))
    return QuadratureRule("gauss", np.concatenate(nodes),
                          np.concatenate(weights), np.concatenate(seg))


_SAMPLED_RULES = {"trapezoid": _trapezoid_rule, "gauss": _gauss_rule}


@dataclass(frozen=True, eq=False)
class Configuration:
    """A sampled configuration u with its quadrature; values are (S, d) rows.

    Objects built through the named constructors (arm, sampled, from_curve) or
    returned by renormalize carry unit rows within TOL_UNIT.  The raw
    constructor / with_values only enforce the RENORM_FLOOR, admitting the
    transient off-sphere states an integrator produces between steps.
    """

    partition: Partition
    kind: str                  # "arm" | "sampled"
    samples_per_segment: int   # 1 for arm
    values: np.ndarray         # (S, d)
    quadrature: QuadratureRule

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        n_expected = self.partition.n_segments * self.samples_per_segment
        if v.ndim != 2 or v.shape[0] != n_expected:
            raise LayoutError(
                f"expected {n_expected} samples, got array of shape {v.shape}")
        if v.shape[1] < 2:
            raise LayoutError("ambient dimension must be >= 2")
        if self.quadrature.weights.size != n_expected:
            raise LayoutError("quadrature does not match sample count")
        if not np.all(np.isfinite(v)):
            raise DegeneracyError("non-finite sample value")
        small = np.linalg.norm(v, axis=1).min()
        if small < RENORM_FLOOR:
            raise DegeneracyError(
                f"sample norm {small:.3e} below renormalization floor")

    def _unit_checked(self) -> "Configuration":
        err = np.abs(np.linalg.norm(self.values, axis=1) - 1.0).max()
        if err > TOL_UNIT:
            raise DegeneracyError(
                f"stored vectors deviate from unit norm by {err:.3e} > {TOL_UNIT:.0e}; "
                "renormalize first")
        return self

    # -- constructors ------------------------------------------------------

    @staticmethod
    def arm(partition: Partition, vectors) -> "Configuration":
        """Piecewise-constant configuration from (N, d) unit segment directions."""
        return Configuration(partition, "arm", 1, vectors,
                             _arm_rule(partition))._unit_checked()

    @staticmethod
    def sampled(partition: Partition, values, scheme: str = "trapezoid") -> "Configuration":
        """Sampled configuration from (N, M, d) or (N*M, d) values at scheme nodes."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 3:
            n, m, d = values.shape
            if n != partition.n_segments:
                raise LayoutError("first axis must index segments")
            values = values.reshape(n * m, d)
        else:
            if values.shape[0] % partition.n_segments:
                raise LayoutError("sample count not a multiple of segment count")
            m = values.shape[0] // partition.n_segments
        if m < 2:
            raise LayoutError("sampled representation needs M >= 2 per segment")
        if scheme not in _SAMPLED_RULES:
            raise LayoutError(f"unknown quadrature scheme {scheme!r}")
        rule = _SAMPLED_RULES[scheme](partition, m)
        return Configuration(partition, "sampled", m, values, rule)._unit_checked()

    @staticmethod
    def from_curve(partition: Partition, fn: Callable[[float], np.ndarray],
                   m: int, scheme: str = "trapezoid") -> "Configuration":
        """Sample a sphere-valued curve at the rule's nodes (values renormalized)."""
        rule = _SAMPLED_RULES[scheme](partition, m)
        vals = np.array([fn(s) for s in rule.nodes], dtype=float)
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        return Configuration(partition, "sampled", m, vals, rule)

    # -- structure ---------------------------------------------------------

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def total_length(self) -> float:
        return self.partition.total

    def same_layout(self, other: "Configuration") -> bool:
        return (self.kind == other.kind
                and self.samples_per_segment == other.samples_per_segment
                and self.d == other.d
                and self.partition.same_as(other.partition))

    def with_values(self, values) -> "Configuration":
        """Same layout, new sample values."""
        return Configuration(self.partition, self.kind, self.samples_per_segment,
                             values, self.quadrature)


FieldLike = Union[Configuration, "TangentField"]


@dataclass(frozen=True, eq=False)
class TangentField:
    """A field v with <u(s), v(s)> = 0 fiberwise over a base configuration.

    Residual tangency up to TOL_ORTH * max(1, sup|v|) is projected away at
    construction; anything larger is rejected as a layout/usage bug.
    """

    base: Configuration
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        u = self.base.values
        if v.shape != u.shape:
            raise LayoutError(f"tangent values {v.shape} do not match base {u.shape}")
        radial = np.einsum("ij,ij->i", u, v)
        scale = max(1.0, float(np.linalg.norm(v, axis=1).max(initial=0.0)))
        worst = float(np.abs(radial).max(initial=0.0))
        if worst > TOL_ORTH * scale:
            raise DegeneracyError(
                f"field is not tangent: max |<u,v>| = {worst:.3e}")
        v -= radial[:, None] * u
        object.__setattr__(self, "values", _frozen(v))

    @property
    def d(self) -> int:
        return self.values.shape[1]


def integrate_field(x: FieldLike) -> np.ndarray:
    """Quadrature integral of the sample values, a vector in R^d."""
    cfg = x if isinstance(x, Configuration) else x.base
    return cfg.quadrature.weights @ x.values


def sup_norm(x: FieldLike) -> float:
    """max_s |x(s)| over the stored samples."""
    return float(np.linalg.norm(x.values, axis=1).max())


def l2_inner(v: TangentField, w: TangentField) -> float:
    """<v, w>_{L^2} = integral of the fiberwise inner product."""
    if v.base is not w.base and not v.base.same_layout(w.base):
        raise LayoutError("fields live on different layouts")
    return float(v.base.quadrature.weights
                 @ np.einsum("ij,ij->i", v.values, w.values))


def l2_norm(v: TangentField) -> float:
    return float(np.sqrt(max(l2_inner(v, v), 0.0)))


def renormalize(u: Configuration) -> Configuration:
    """Project sample values back to the sphere; refuse norms below RENORM_FLOOR."""
    norms = np.linalg.norm(u.values, axis=1)
    small = norms.min()
    if small < RENORM_FLOOR:
        raise DegeneracyError(f"sample norm {small:.3e} below renormalization floor")
    return u.with_values(u.values / norms[:, None])._unit_checked()


def arm_to_sampled(u: Configuration, m: int, scheme: str = "trapezoid") -> Configuration:
    """Exact lift of an arm to the sampled representation (M copies per segment)."""
    if u.kind != "arm":
        raise LayoutError("arm_to_sampled expects an arm configuration")
    return Configuration.sampled(u.partition, np.repeat(u.values, m, axis=0)
                                 .reshape(u.partition.n_segments * m, u.d), scheme)


def snake_shape(u: Configuration, t) -> np.ndarray:
    """S_u(t) = integral_0^t u(s) ds; accepts scalar or array t in [0, L].

    Piecewise-linear in t for arms, exact per-segment trapezoid of the linear
    interpolant for sampled configurations; 1-Lipschitz either way.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t_arr < -1e-12) | (t_arr > u.total_length + 1e-12)):
        raise ValueError("shape parameter outside [0, L]")
    t_arr = np.clip(t_arr, 0.0, u.total_length)

    if u.kind == "arm":
        knots = u.partition.knots
        cum = np.vstack([np.zeros(u.d),
                         np.cumsum(u.partition.lengths[:, None] * u.values, axis=0)])
        idx = np.clip(np.searchsorted(knots, t_arr, side="right") - 1,
                      0, u.partition.n_segments - 1)
        out = cum[idx] + (t_arr - knots[idx])[:, None] * u.values[idx]
    else:
        # trapezoid antiderivative of the per-segment linear interpolant
        nodes, vals = u.quadrature.nodes, u.values
        m, n = u.samples_per_segment, u.partition.n_segments
        seg_nodes = nodes.reshape(n, m)
        seg_vals = vals.reshape(n, m, u.d)
        dt = np.diff(seg_nodes, axis=1)[..., None]
        panel = 0.5 * dt * (seg_vals[:, 1:] + seg_vals[:, :-1])
        cum_in = np.concatenate([np.zeros((n, 1, u.d)), np.cumsum(panel, axis=1)], axis=1)
        seg_totals = np.vstack([np.zeros(u.d), np.cumsum(cum_in[:, -1], axis=0)])
        out = np.empty((t_arr.size, u.d))
        for k, tk in enumerate(t_arr):
            i = min(np.searchsorted(u.partition.knots, tk, side="right") - 1, n - 1)
            i = max(i, 0)
            j = np.clip(np.searchsorted(seg_nodes[i], tk, side="right") - 1, 0, m - 2)
            h = tk - seg_nodes[i, j]
            va = seg_vals[i, j]
            vb = seg_vals[i, j + 1]
            slope = (vb - va) / (seg_nodes[i, j + 1] - seg_nodes[i, j])
            out[k] = seg_totals[i] + cum_in[i, j] + h * va + 0.5 * h * h * slope
    return out[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def random_configuration(rng: np.random.Generator, d: int, n_segments: int,
                         kind: str = "arm", m: int = 5,
                         lengths=None) -> Configuration:
    """Uniform random configuration (gaussian directions, normalized)."""
    if lengths is None:
        knots = Partition.uniform(n_segments)
    else:
        knots = Partition(np.concatenate([[0.0], np.cumsum(lengths)]))
    count = n_segments if kind == "arm" else n_segments * m
    vals = rng.standard_normal((count, d))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    if kind == "arm":
        return Configuration.arm(knots, vals)
    return Configuration.sampled(knots, vals.reshape(n_segments, m, d))
