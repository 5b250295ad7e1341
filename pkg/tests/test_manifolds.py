import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab import conformal as cf
from curvlab import manifolds as mf
from curvlab import tensor_core as tc
from curvlab.errors import DimensionError, DomainError, MetricError


@pytest.mark.parametrize("dim,radius", [(2, 1.0), (3, 1.0), (4, 1.0), (4, 2.0), (5, 0.5)])
def test_round_sphere_scalar_curvature(dim, radius):
    spec = mf.RoundSphere(dim, radius)
    b = mf.curvature_batch(spec, mf.sample_points(spec, 20, seed=1))
    expected = dim * (dim - 1) / radius**2
    assert np.allclose(b.s, expected, rtol=1e-8)
    if dim >= 4:
        assert np.max(b.weyl_norm()) < 1e-8
    assert np.max(b.z_norm()) < 1e-7


def test_sphere_south_chart_pulls_back_to_north():
    north, south = mf.RoundSphere(4, chart="north"), mf.RoundSphere(4, chart="south")
    X = mf.sample_points(north, 10, seed=2) + 0.2
    Y = mf.sphere_chart_transition(X)
    J = mf.gradient_fd(mf.sphere_chart_transition, X, 1e-4)  # J[..., i, k] = d_k Y^i
    pulled = np.einsum("...ik,...ij,...jl->...kl", J, south.metric(Y), J)
    assert np.allclose(pulled, north.metric(X), atol=1e-9)
    with pytest.raises(DomainError):
        mf.sphere_chart_transition(np.zeros((1, 4)))


def test_cp2_einstein_constants():
    spec = mf.FubiniStudyCP2()
    X = mf.sample_points(spec, 30, seed=0)
    b = mf.curvature_batch(spec, X)
    assert np.allclose(b.s, 24.0, rtol=1e-8)
    assert np.allclose(b.ric, 6.0 * b.g, atol=1e-7)
    assert np.allclose(b.weyl_end_norm(), 2.0 * np.sqrt(6.0), rtol=1e-8)
    assert np.allclose(b.weyl_norm(), 4.0 * np.sqrt(6.0), rtol=1e-8)


def test_cp2_analytic_first_derivative_matches_fd():
    spec = mf.FubiniStudyCP2()
    X = mf.sample_points(spec, 8, seed=5)
    num = np.stack([mf.central_diff(spec.metric, X, k, 1e-3) for k in range(4)], axis=-3)
    assert np.allclose(spec.metric_d1(X), num, atol=1e-10)


def test_flat_torus_and_circle_are_flat():
    for spec in (mf.FlatTorus.standard(3), mf.Product(mf.FlatTorus.standard(2), mf.CircleFactor(2.0))):
        b = mf.curvature_batch(spec, mf.sample_points(spec, 5))
        assert np.max(np.abs(b.R)) == 0.0


def test_product_of_spheres_scalar_curvature():
    spec = mf.Product(mf.RoundSphere(2, 1.0), mf.RoundSphere(2, 2.0))
    b = mf.curvature_batch(spec, mf.sample_points(spec, 10, seed=3))
    assert np.allclose(b.s, 2.0 + 0.5, rtol=1e-8)
    assert np.min(b.weyl_norm()) > 0.1


def phi_scalar(X, a=0.1):
    # u = 1 + a sin x1 on flat R^3, metric u^2 delta = e^{2 phi} delta with phi = log u
    u = 1 + a * np.sin(X[:, 0])
    p1 = a * np.cos(X[:, 0]) / u
    p11 = (-a * np.sin(X[:, 0]) * u - (a * np.cos(X[:, 0])) ** 2) / u**2
    n = 3
    return -u**-2 * (2 * (n - 1) * p11 + (n - 1) * (n - 2) * p1**2)


def test_conformal_flat_scalar_curvature_against_closed_form():
    base = mf.FlatTorus.standard(3)
    spec = mf.ConformalDeformation(base, lambda X: 1 + 0.1 * np.sin(X[..., 0]))
    X = mf.sample_points(spec, 16, seed=4)
    b = mf.curvature_batch(spec, X)
    assert np.allclose(b.s, phi_scalar(X), atol=1e-7)


def test_callable_metric_matches_catalog():
    sphere = mf.RoundSphere(3)
    spec = mf.CallableMetric(sphere.metric, 3, fd_step=1e-3)
    X = mf.sample_points(sphere, 6, seed=9)
    assert np.allclose(mf.curvature_batch(spec, X).s, 6.0, atol=1e-6)


def test_sampling_is_deterministic():
    spec = mf.RoundSphere(4)
    assert np.array_equal(mf.sample_points(spec, 16, 3), mf.sample_points(spec, 16, 3))
    assert not np.array_equal(mf.sample_points(spec, 16, 3), mf.sample_points(spec, 16, 4))


def test_hypothesis_scan_reports_violation():
    spec = mf.FlatTorus.standard(3)
    T = np.zeros((3, 3))
    T[0, 0] = 1.0
    scan = mf.hypothesis_scan(spec, cf.TensorNorm(T), mf.sample_points(spec, 8))
    assert scan.min_margin == pytest.approx(-1.0)
    assert scan.violations == 8
    assert not scan.passed
    assert scan.argmin.shape == (3,)


def test_bad_points_and_metrics():
    spec = mf.RoundSphere(3)
    with pytest.raises(DimensionError):
        mf.curvature_batch(spec, np.zeros((1, 4)))
    with pytest.raises(DomainError):
        mf.curvature_batch(spec, np.full((1, 3), np.nan))
    bad = mf.CallableMetric(lambda X: -np.broadcast_to(np.eye(2), X.shape[:-1] + (2, 2)), 2)
    with pytest.raises(MetricError):
        mf.curvature_batch(bad, np.zeros((1, 2)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_curvature_tensor_symmetries_on_random_conformal_metric(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.2, 0.2, 4)
    spec = mf.ConformalDeformation(
        mf.FlatTorus.standard(4),
        lambda X: 1.0 + 0.1 * np.sin(X[..., 0] + a[0]) * np.cos(X[..., 1] + a[1]) + a[2] * 0.1 * np.cos(X[..., 3]),
    )
    b = mf.curvature_batch(spec, mf.sample_points(spec, 4, seed=seed % 1000))
    scale = np.max(np.abs(b.R)) + 1.0
    assert tc.curvature_symmetry_defect(b.R) < 1e-6 * scale


def test_catalog_lists_kinds():
    cat = mf.catalog()
    for kind in ("flat_torus", "round_sphere", "fubini_study_cp2", "circle", "product", "conformal"):
        assert kind in cat
