import numpy as np
import pytest
from hypothesis import given, settings

from snakecharm.geometry import (
    Configuration,
    DegeneracyError,
    LayoutError,
    Partition,
    TangentField,
    arm_to_sampled,
    integrate_field,
    l2_inner,
    l2_norm,
    renormalize,
    snake_shape,
    sup_norm,
)

from conftest import arm_configs, sampled_configs


def test_partition_validation():
    with pytest.raises(LayoutError):
        Partition([1.0, 2.0])          # must start at 0
    with pytest.raises(LayoutError):
        Partition([0.0, 1.0, 1.0])     # strictly increasing
    with pytest.raises(LayoutError):
        Partition([0.0])
    p = Partition([0.0, 0.5, 2.0])
    assert p.n_segments == 2
    assert p.total == 2.0
    np.testing.assert_allclose(p.lengths, [0.5, 1.5])


def test_arm_integral_is_exact():
    # one-node-per-segment rule integrates piecewise constants exactly
    p = Partition([0.0, 0.7, 1.0, 2.5])
    vecs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    u = Configuration.arm(p, vecs)
    np.testing.assert_array_equal(integrate_field(u), p.lengths @ vecs)


def test_trapezoid_circle_arc_integral():
    # oracle: integral of (cos s, sin s) over [0, pi] is exactly (0, 2)
    p = Partition([0.0, np.pi])
    u = Configuration.from_curve(p, lambda s: np.array([np.cos(s), np.sin(s)]), m=1001)
    np.testing.assert_allclose(integrate_field(u), [0.0, 2.0], atol=1e-5)


def test_gauss_rule_is_exact_on_polynomials():
    p = Partition([0.0, 1.0, 3.0])
    u = Configuration.sampled(p, np.tile([1.0, 0.0], (2, 4, 1)), scheme="gauss")
    rule = u.quadrature
    # degree 2M-1 = 7 exact: integral of s^7 over [0,3] = 3^8 / 8
    assert rule.weights @ rule.nodes**7 == pytest.approx(3.0**8 / 8, rel=1e-14)
    assert rule.weights.sum() == pytest.approx(3.0, rel=1e-15)


@pytest.mark.parametrize("scheme", ["trapezoid", "gauss"])
def test_weights_partition_lengths(scheme):
    p = Partition([0.0, 0.3, 1.1, 1.9])
    vals = np.tile([0.0, 0.0, 1.0], (3, 5, 1))
    u = Configuration.sampled(p, vals, scheme=scheme)
    for i in range(3):
        mask = u.quadrature.segment_of == i
        assert u.quadrature.weights[mask].sum() == pytest.approx(p.lengths[i], rel=1e-14)


def test_unit_norm_enforced():
    p = Partition.uniform(2)
    bad = np.array([[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(DegeneracyError):
        Configuration.arm(p, bad)


def test_renormalize_and_floor():
    p = Partition.uniform(2)
    u = Configuration.arm(p, np.array([[1.0, 0.0], [0.0, 1.0]]))
    drifted = u.with_values(u.values * np.array([[0.9], [1.2]]))  # integrator-style drift
    v = renormalize(drifted)
    np.testing.assert_allclose(v.values, u.values, atol=1e-15)
    with pytest.raises(DegeneracyError):
        u.with_values(np.array([[0.3, 0.0], [0.0, 1.0]]))  # below the floor
    with pytest.raises(DegeneracyError):
        Configuration.arm(p, np.array([[0.9, 0.0], [0.0, 1.0]]))  # strict constructor


def test_tangent_field_projects_small_radial_part():
    p = Partition.uniform(1)
    u = Configuration.arm(p, np.array([[1.0, 0.0]]))
    v = TangentField(u, np.array([[1e-11, 2.0]]))
    assert abs(v.values[0, 0]) < 1e-15
    assert v.values[0, 1] == 2.0
    with pytest.raises(DegeneracyError):
        TangentField(u, np.array([[0.5, 1.0]]))


def test_l2_inner_layout_guard():
    u1 = Configuration.arm(Partition.uniform(2), np.eye(2)[np.array([0, 1])])
    u2 = Configuration.arm(Partition([0.0, 1.0, 3.0]), np.eye(2)[np.array([0, 1])])
    v1 = TangentField(u1, np.zeros((2, 2)))
    v2 = TangentField(u2, np.zeros((2, 2)))
    with pytest.raises(LayoutError):
        l2_inner(v1, v2)


@given(arm_configs())
@settings(max_examples=60, deadline=None)
def test_l2_bounded_by_sup(u):
    rng = np.random.default_rng(u.n_samples + 17)
    raw = rng.standard_normal(u.values.shape)
    raw -= np.einsum("ij,ij->i", u.values, raw)[:, None] * u.values
    v = TangentField(u, raw)
    L = u.total_length
    assert l2_norm(v) <= np.sqrt(L) * sup_norm(v) + 1e-12


@given(sampled_configs())
@settings(max_examples=40, deadline=None)
def test_cauchy_schwarz(u):
    rng = np.random.default_rng(u.n_samples)
    proj = lambda r: r - np.einsum("ij,ij->i", u.values, r)[:, None] * u.values
    v = TangentField(u, proj(rng.standard_normal(u.values.shape)))
    w = TangentField(u, proj(rng.standard_normal(u.values.shape)))
    assert abs(l2_inner(v, w)) <= l2_norm(v) * l2_norm(w) + 1e-10


def test_snake_shape_arm():
    p = Partition([0.0, 1.0, 2.0])
    u = Configuration.arm(p, np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(snake_shape(u, 0.0), [0.0, 0.0])
    np.testing.assert_allclose(snake_shape(u, 1.5), [1.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(snake_shape(u, 2.0), integrate_field(u), atol=1e-15)


@given(sampled_configs(n_max=3, m_max=7))
@settings(max_examples=40, deadline=None)
def test_snake_shape_lipschitz_and_consistent(u):
    L = u.total_length
    ts = np.linspace(0.0, L, 23)
    pts = snake_shape(u, ts)
    np.testing.assert_allclose(pts[0], 0.0, atol=1e-15)
    np.testing.assert_allclose(pts[-1], integrate_field(u), atol=1e-10)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert np.all(steps <= np.diff(ts) + 1e-10)


def test_arm_to_sampled_preserves_integral():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal((3, 4))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    u = Configuration.arm(Partition([0.0, 0.4, 1.0, 2.2]), vals)
    us = arm_to_sampled(u, 6)
    assert us.kind == "sampled" and us.samples_per_segment == 6
    np.testing.assert_allclose(integrate_field(us), integrate_field(u), atol=1e-14)
    # values are exact copies, no interpolation error
    np.testing.assert_array_equal(us.values[::6], u.values)


def test_with_values_layout_guard():
    u = Configuration.arm(Partition.uniform(2), np.eye(2))
    with pytest.raises(LayoutError):
        u.with_values(np.eye(3))
