import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab import tensor_core as tc
from curvlab.errors import DimensionError, FrameError, MetricError, ValidationError


def sphere_curvature(g, K=1.0):
    # R_ijkl = K (g_ik g_jl - g_il g_jk), written out by hand
    return K * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g))


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
@settings(max_examples=40, deadline=None)
def test_norm_matches_raised_index_contraction(seed, m):
    rng = np.random.default_rng(seed)
    g = tc.random_spd(rng, m)
    A = rng.standard_normal((m, m, m))
    ginv = np.linalg.inv(g)
    direct = np.einsum("abc,ijk,ai,bj,ck->", A, A, ginv, ginv, ginv)
    assert tc.norm(A, g) ** 2 == pytest.approx(direct, rel=1e-10)


def test_orthonormal_frame_is_upper_triangular_and_orthonormal():
    rng = np.random.default_rng(1)
    g = tc.random_spd(rng, 5)
    E = tc.orthonormal_frame(g)
    assert np.allclose(E.T @ g @ E, np.eye(5), atol=1e-12)
    assert np.allclose(np.tril(E, -1), 0.0)
    assert np.all(np.diag(E) > 0)


def test_metric_validation():
    with pytest.raises(MetricError):
        tc.check_metric(np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(MetricError):
        tc.check_metric(np.diag([1.0, -1.0]))
    with pytest.raises(DimensionError):
        tc.check_metric(np.ones((2, 3)))


def test_kulkarni_nomizu_of_identity():
    # |g o g|^2 = 4 * sum (d_ik d_jl - d_il d_jk)^2 = 8 m (m - 1)
    for m in range(2, 7):
        g = np.eye(m)
        gg = tc.kulkarni_nomizu(g, g)
        assert np.sum(gg**2) == pytest.approx(8 * m * (m - 1))
        assert np.allclose(gg, 2 * sphere_curvature(g))


def test_kulkarni_nomizu_rejects_nonsymmetric():
    with pytest.raises(ValidationError):
        tc.kulkarni_nomizu(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))


@given(st.integers(0, 2**32 - 1), st.integers(3, 6))
@settings(max_examples=30, deadline=None)
def test_random_curvature_has_curvature_symmetries(seed, m):
    R = tc.random_curvature(np.random.default_rng(seed), m)
    assert tc.curvature_symmetry_defect(R) < 1e-12


def test_round_sphere_decomposition():
    rng = np.random.default_rng(3)
    for m in (3, 4, 5):
        g = tc.random_spd(rng, m)
        K = 0.7
        d = tc.decompose_curvature(sphere_curvature(g, K), g)
        assert d.s == pytest.approx(K * m * (m - 1))
        assert np.allclose(d.ric, K * (m - 1) * g)
        assert np.max(np.abs(d.z)) < 1e-12
        assert np.max(np.abs(d.W)) < 1e-12


def test_dimension_three_flags_trivial_weyl():
    R = tc.random_curvature(np.random.default_rng(0), 3)
    d = tc.decompose_curvature(R, np.eye(3))
    assert d.weyl_trivial
    # in dimension 3 the Ricci part already carries everything
    assert np.allclose(d.S_part, R, atol=1e-12)


def test_decomposition_needs_dim_three():
    with pytest.raises(DimensionError):
        tc.decompose_curvature(np.zeros((2, 2, 2, 2)), np.eye(2))


def test_check_curvature_rejects_generic_tensor():
    with pytest.raises(ValidationError):
        tc.check_curvature(np.random.default_rng(0).standard_normal((4, 4, 4, 4)))


@given(st.integers(0, 2**32 - 1), st.integers(4, 6))
@settings(max_examples=30, deadline=None)
def test_weyl_orthogonal_to_every_kn_product(seed, m):
    rng = np.random.default_rng(seed)
    g = tc.random_spd(rng, m)
    R = tc.random_curvature(rng, m)
    d = tc.decompose_curvature(R, g)
    h = tc.random_symmetric(rng, m)
    hg = tc.kulkarni_nomizu(h, g)
    scale = tc.norm(d.W, g) * tc.norm(hg, g)
    assert abs(tc.inner(d.W, hg, g)) <= 1e-10 * max(scale, 1.0)


def test_restriction_of_identity_frame_is_subblock():
    S = tc.random_symmetric(np.random.default_rng(2), 4)
    F = np.eye(4)[:2]
    assert np.allclose(tc.restrict_tensor(S, F, np.eye(4)), S[:2, :2])


def test_restriction_rejects_bad_frame():
    with pytest.raises(FrameError):
        tc.restrict_tensor(np.eye(3), np.array([[1.0, 1.0, 0.0]]), np.eye(3))


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(3, 6))
@settings(max_examples=60, deadline=None)
def test_restriction_never_increases_norm(seed, rank, m):
    rng = np.random.default_rng(seed)
    g = tc.random_spd(rng, m)
    k = int(rng.integers(1, m))
    E = tc.orthonormal_frame(g)
    Q, _ = np.linalg.qr(rng.standard_normal((m, k)))
    F = (E @ Q).T
    S = rng.standard_normal((m,) * rank)
    St = tc.restrict_tensor(S, F, g)
    assert np.linalg.norm(St) <= tc.norm(S, g) + 1e-12


def test_end_norm_is_half_tensor_norm_for_weyl():
    rng = np.random.default_rng(4)
    g = tc.random_spd(rng, 4)
    W = tc.decompose_curvature(tc.random_curvature(rng, 4), g).W
    assert tc.end_lambda2_norm(W, g) == pytest.approx(0.5 * tc.norm(W, g), rel=1e-12)


def test_tracefree3_equality_case():
    lhs, rhs = tc.tracefree3_bound_check(np.diag([2.0, -1.0, -1.0]), np.array([1.0, 0.0, 0.0]))
    assert lhs == pytest.approx(2.0, abs=1e-14)
    assert abs(lhs - rhs) <= 1e-12


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_tracefree3_bound(seed):
    rng = np.random.default_rng(seed)
    A = tc.random_symmetric(rng, 3)
    A -= np.trace(A) / 3 * np.eye(3)
    w = rng.standard_normal(3)
    lhs, rhs = tc.tracefree3_bound_check(A, w)
    assert lhs <= rhs + 1e-12 * max(1.0, rhs)


def test_tracefree3_rejects_trace():
    with pytest.raises(ValidationError):
        tc.tracefree3_bound_check(np.eye(3), np.ones(3))
