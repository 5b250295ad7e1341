import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab import conformal as cf
from curvlab import manifolds as mf
from curvlab import tensor_core as tc
from curvlab.errors import ConfigurationError, DimensionError, DomainError


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_weight_minus_two(seed, u):
    rng = np.random.default_rng(seed)
    m = 4
    g = tc.random_spd(rng, m)
    W = tc.decompose_curvature(tc.random_curvature(rng, m), g).W
    data = {"T": tc.random_symmetric(rng, m), "W": W, "L": tc.random_symmetric(rng, m)}
    for f in (cf.TensorNorm(data["T"]), cf.WeylNorm(2.0), cf.WeylNorm(1.0, "tensor"),
              cf.TraceFreeSFFNormSq(), cf.SumFunction(cf.WeylNorm(), cf.TraceFreeSFFNormSq())):
        assert cf.weight_defect(f, g, data, u) < 1e-10


def test_weight_defect_rejects_nonpositive_scale():
    with pytest.raises(DomainError):
        cf.weight_defect(cf.ZeroFunction(), np.eye(3), {}, 0.0)


def test_weyl_norm_validation():
    with pytest.raises(ConfigurationError):
        cf.WeylNorm(-1.0)
    with pytest.raises(ConfigurationError):
        cf.WeylNorm(1.0, "max")


def test_yamabe_power():
    assert cf.yamabe_power(4) == 1.0
    assert cf.yamabe_power(3) == 2.0
    with pytest.raises(DimensionError):
        cf.yamabe_power(2)


def test_laplacian_fd_flat():
    spec = mf.FlatTorus.standard(3)
    X = mf.sample_points(spec, 6)
    lap = cf.laplacian_fd(spec, lambda Y: np.sin(Y[..., 0]) * np.cos(2 * Y[..., 1]), X, 1e-3)
    assert np.allclose(lap, -5 * np.sin(X[:, 0]) * np.cos(2 * X[:, 1]), atol=1e-8)


def test_rescale_requires_positive_u():
    bar = cf.conformal_rescale(mf.FlatTorus.standard(3), lambda X: np.cos(X[..., 0]))
    with pytest.raises(DomainError):
        bar.metric(np.array([[np.pi, 0.0, 0.0]]))


def test_constant_rescale_scales_scalar_curvature():
    # s(c^2 g) = s(g) / c^2
    sphere = mf.RoundSphere(4)
    bar = cf.conformal_rescale(sphere, lambda X: np.full(X.shape[:-1], 2.0), mode="square")
    X = mf.sample_points(sphere, 5)
    assert np.allclose(mf.curvature_batch(bar, X).s, 12.0 / 4.0, rtol=1e-6)


def test_transformation_law_torus():
    spec = mf.FlatTorus.standard(3)
    X = mf.sample_points(spec, 8, seed=1)
    rec = cf.transformation_law_check(spec, cf.ZeroFunction(), lambda Y: 1 + 0.05 * np.cos(Y[..., 0]), X, 1e-3)
    assert rec.max_residual < 1e-5


def test_transformation_law_with_tensor_weight():
    spec = mf.RoundSphere(4)
    T = np.diag([1.0, 0.5, 0.0, 0.0])
    X = mf.sample_points(spec, 6, seed=2)
    u = lambda Y: 1 + 0.1 * np.sin(Y[..., 0]) * np.cos(Y[..., 2])  # noqa: E731
    rec = cf.transformation_law_check(spec, cf.TensorNorm(T), u, X, 1e-3)
    assert rec.max_residual < 1e-5


def test_convergence_order_is_four():
    spec = mf.FlatTorus.standard(3)
    X = mf.sample_points(spec, 6, seed=1)
    res, orders = cf.convergence_order(spec, cf.ZeroFunction(), lambda Y: 1 + 0.05 * np.cos(Y[..., 0]), X,
                                       [0.2, 0.1, 0.05])
    assert res[0] > res[1] > res[2]
    assert min(orders) >= 3.5
