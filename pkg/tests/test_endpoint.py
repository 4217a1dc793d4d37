import numpy as np
import pytest
from hypothesis import given, settings

from snakecharm.endpoint import (
    GramData,
    endpoint,
    gram,
    pushforward,
    singularity,
    solve_transfer,
    singular_tolerance,
)
from snakecharm.geometry import (
    Configuration,
    DegeneracyError,
    Partition,
    TangentField,
    renormalize,
)

from conftest import arm_configs, collinear_arm, sampled_configs


def _tangent(rng, u):
    raw = rng.standard_normal(u.values.shape)
    raw -= np.einsum("ij,ij->i", u.values, raw)[:, None] * u.values
    return TangentField(u, raw)


def test_endpoint_weighted_sum():
    p = Partition([0.0, 1.0, 1.5, 3.0])
    vecs = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
    u = Configuration.arm(p, vecs)
    np.testing.assert_array_equal(endpoint(u), [1.0, 0.5, 1.5])


def test_gram_hand_values():
    # two orthogonal unit segments in R^3: Gamma = diag(1, 1, 0), margin = 1
    u = Configuration.arm(Partition.uniform(2), np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    gd = gram(u)
    np.testing.assert_allclose(gd.gamma, np.diag([1.0, 1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(gd.eigenvalues, [1.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(gd.a_op, np.diag([1.0, 1.0, 2.0]), atol=1e-15)
    assert gd.margin == pytest.approx(1.0, abs=1e-15)
    assert gd.condition_number == pytest.approx(2.0, rel=1e-14)


@given(arm_configs())
@settings(max_examples=80, deadline=None)
def test_gram_trace_is_total_length(u):
    gd = gram(u)
    L = u.total_length
    assert abs(np.trace(gd.gamma) - L) <= 1e-10
    assert abs(gd.eigenvalues.sum() - L) <= 1e-8
    assert gd.eigenvalues[-1] >= -1e-12
    assert gd.eigenvalues[0] <= L + 1e-12


@given(sampled_configs())
@settings(max_examples=40, deadline=None)
def test_gram_trace_sampled(u):
    assert abs(np.trace(gram(u).gamma) - u.total_length) <= 1e-10


def test_pushforward_matches_finite_differences():
    rng = np.random.default_rng(7)
    u = Configuration.arm(Partition([0.0, 0.8, 2.0]),
                          np.array([[0.6, 0.8], [1.0, 0.0]]))
    v = _tangent(rng, u)
    h = 1e-6
    plus = endpoint(renormalize(u.with_values(u.values + h * v.values)))
    minus = endpoint(renormalize(u.with_values(u.values - h * v.values)))
    fd = (plus - minus) / (2 * h)
    np.testing.assert_allclose(pushforward(u, v), fd, atol=1e-8)


def test_collinear_is_singular_with_axis():
    rng = np.random.default_rng(11)
    u = collinear_arm(rng, d=3, n=4)
    rep = singularity(u)
    assert rep.is_singular
    assert rep.margin <= 1e-10
    assert rep.collinearity_residual <= 1e-6
    # axis recovers the common line up to sign
    dots = np.abs(u.values @ rep.axis)
    np.testing.assert_allclose(dots, 1.0, atol=1e-8)


def test_perturbed_collinear_is_regular():
    rng = np.random.default_rng(13)
    u = collinear_arm(rng, d=3, n=3)
    vals = u.values.copy()
    # rotate one segment by 0.1 rad inside a coordinate plane containing it
    x = vals[1]
    t = rng.standard_normal(3)
    t -= (t @ x) * x
    t /= np.linalg.norm(t)
    vals[1] = np.cos(0.1) * x + np.sin(0.1) * t
    rep = singularity(Configuration.arm(u.partition, vals))
    assert not rep.is_singular
    assert rep.margin > 1e-4
    assert rep.axis is None


def test_singular_set_is_dense_in_the_limit():
    # u_n = normalize(x + v/n) is regular for every finite n but converges to
    # the collinear configuration in sup distance
    rng = np.random.default_rng(5)
    x = np.array([1.0, 0.0, 0.0])
    v = rng.standard_normal((3, 3))
    u_lim = Configuration.arm(Partition.uniform(3), np.tile(x, (3, 1)))
    last_sup = np.inf
    for n in [10, 100, 10_000, 1_000_000]:
        vals = np.tile(x, (3, 1)) + v / n
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        u_n = Configuration.arm(u_lim.partition, vals)
        rep = singularity(u_n, tol_singular=0.0)
        assert rep.margin > 0.0
        sup = np.linalg.norm(vals - u_lim.values, axis=1).max()
        assert sup < last_sup
        last_sup = sup
    assert last_sup <= 2.1 * np.abs(v).max() / 1_000_000


def test_solve_transfer_round_trip():
    rng = np.random.default_rng(23)
    u = Configuration.arm(Partition.uniform(3),
                          np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]]))
    gd = gram(u)
    rhs = rng.standard_normal(3)
    w = solve_transfer(gd, rhs, tol_singular=singular_tolerance(u))
    np.testing.assert_allclose(gd.a_op @ w, rhs, atol=1e-12)


def test_solve_transfer_singular_paths():
    rng = np.random.default_rng(29)
    u = collinear_arm(rng, d=3, n=2)
    gd = gram(u)
    axis = gram(u).eigenvectors[:, 0]
    tol = singular_tolerance(u)
    with pytest.raises(DegeneracyError):
        solve_transfer(gd, axis, tol_singular=tol)
    with pytest.raises(DegeneracyError):
        solve_transfer(gd, axis, tol_singular=tol, restricted=True)
    # orthogonal right-hand sides are solvable in the restricted sense
    rhs = rng.standard_normal(3)
    rhs -= (rhs @ axis) * axis
    w = solve_transfer(gd, rhs, tol_singular=tol, restricted=True)
    np.testing.assert_allclose(gd.a_op @ w, rhs, atol=1e-10)
    assert abs(w @ axis) <= 1e-10


def test_eigenvector_sign_is_deterministic():
    u = Configuration.arm(Partition.uniform(2), np.array([[0.0, 1.0], [0.0, -1.0]]))
    gd = gram(u)
    # leading eigenvector is the collinearity axis e_2, normalized to +e_2
    np.testing.assert_allclose(gd.eigenvectors[:, 0], [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(gd.eigenvectors[:, 1], [1.0, 0.0], atol=1e-15)
