"""Embedded hypersurfaces: induced metric, unit normal, second fundamental form,
and the pointwise identities that relate intrinsic and ambient curvature.

Conventions: B(X, Y) = g(nabla_X N, Y), H = trace of B (not averaged),
L = B - (H/m) g_induced with m = dim of the hypersurface.
"""

from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from . import tensor_core as tc
from .errors import PreconditionError, RankError


class HypersurfaceSpec:
    """Hypersurface given by a chart map from Sigma-coordinates into the ambient chart."""

    def __init__(self, ambient, embed, dim=None, jacobian=None, hessian=None,
                 normal_sign=1, normal_hint=None, sigma_box=None, sigma_periods=None,
                 fd_step=1e-3, label=None):
        self.ambient = ambient
        self.embed = embed
        self.dim = ambient.dim - 1 if dim is None else dim
        if self.dim != ambient.dim - 1:
            raise RankError("hypersurface must have codimension one")
        self._jacobian = jacobian
        self._hessian = hessian
        self.normal_sign = 1 if normal_sign >= 0 else -1
        self.normal_hint = normal_hint
        self.sigma_periods = None if sigma_periods is None else np.asarray(sigma_periods, float)
        if sigma_box is None and self.sigma_periods is not None:
            sigma_box = (np.zeros(self.dim), self.sigma_periods.copy())
        self.sigma_box = sigma_box
        self.fd_step = fd_step
        self.label = label

    def points(self, Q):
        return np.asarray(self.embed(np.asarray(Q, dtype=float)), dtype=float)

    def jacobian(self, Q):
        """J[..., i, a] = d_a F^i."""
        Q = np.asarray(Q, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(Q), dtype=float)
        return mf.gradient_fd(self.points, Q, self.fd_step)

    def hessian(self, Q):
        """Hs[..., i, a, b] = d_a d_b F^i."""
        Q = np.asarray(Q, dtype=float)
        if self._hessian is not None:
            return np.asarray(self._hessian(Q), dtype=float)
        Hs = np.stack([mf.central_diff(self.jacobian, Q, b, self.fd_step) for b in range(self.dim)], axis=-1)
        return 0.5 * (Hs + np.swapaxes(Hs, -1, -2))

    def box(self):
        if self.sigma_box is None:
            return -np.ones(self.dim), np.ones(self.dim)
        return np.asarray(self.sigma_box[0], float), np.asarray(self.sigma_box[1], float)

    def describe(self):
        return {"ambient": self.ambient.describe(), "dim": self.dim, "label": self.label,
                "normal_sign": self.normal_sign}


def slice_hypersurface(sigma_spec, radius=1.0, theta0=0.0, periods=None):
    """Sigma x {theta0} inside Sigma x S^1(radius)."""
    ambient = mf.Product(sigma_spec, mf.CircleFactor(radius))
    m = sigma_spec.dim
    J = np.vstack([np.eye(m), np.zeros((1, m))])

    def embed(Q):
        return np.concatenate([Q, np.full(Q.shape[:-1] + (1,), theta0)], axis=-1)

    if periods is None and isinstance(sigma_spec, mf.FlatTorus):
        periods = sigma_spec.periods
    return HypersurfaceSpec(
        ambient, embed,
        jacobian=lambda Q: np.broadcast_to(J, Q.shape[:-1] + J.shape).copy(),
        hessian=lambda Q: np.zeros(Q.shape[:-1] + (m + 1, m, m)),
        sigma_box=sigma_spec.sample_box(), sigma_periods=periods,
        label=f"{sigma_spec.kind} x {{theta={theta0}}}",
    )


def graph_hypersurface(ambient, height, periods=None, label=None):
    """Graph x^n = height(x^1..x^{n-1}) in a flat chart; derivatives by differences."""
    def embed(Q):
        return np.concatenate([Q, np.asarray(height(Q), float)[..., None]], axis=-1)

    return HypersurfaceSpec(ambient, embed, sigma_periods=periods, label=label or "graph")


@dataclass
class InducedData:
    g_induced: np.ndarray   # (k, m, m)
    normal: np.ndarray      # (k, n) unit normal, ambient components
    tangent: np.ndarray     # (k, n, m) coordinate tangent vectors (columns)
    frame_sigma: np.ndarray  # (k, m, m) g_induced-orthonormal frame, Sigma components
    frame: np.ndarray       # (k, m, n) same frame pushed forward, rows are vectors
    ambient_points: np.ndarray
    ambient_metric: np.ndarray


def induced_data(h, Q):
    """Pullback metric, unit normal and orthonormal tangent frame at Sigma points."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    X = h.points(Q)
    g = h.ambient.metric(X)
    J = h.jacobian(Q)
    sv = np.linalg.svd(J, compute_uv=False)
    if np.any(sv[..., -1] <= 1e-10 * np.maximum(sv[..., 0], 1.0)):
        raise RankError("embedding differential is rank deficient")
    gi = np.einsum("...ia,...ij,...jb->...ab", J, g, J)
    gi = 0.5 * (gi + np.swapaxes(gi, -1, -2))
    # covector annihilating the tangent space
    _, _, vh = np.linalg.svd(np.swapaxes(J, -1, -2))
    nu = vh[..., -1, :]
    N = np.einsum("...ij,...j->...i", np.linalg.inv(g), nu)
    N /= np.sqrt(np.einsum("...i,...ij,...j->...", N, g, N))[..., None]
    if h.normal_hint is not None:
        hint = np.asarray(h.normal_hint(X), dtype=float)
        sign = np.sign(np.einsum("...i,...ij,...j->...", N, g, hint))
    else:
        sign = np.sign(np.linalg.det(np.concatenate([J, N[..., :, None]], axis=-1)))
    sign = np.where(sign == 0, 1.0, sign) * h.normal_sign
    N *= sign[..., None]
    E = mf.frames_batch(gi)
    frame = np.swapaxes(np.einsum("...ia,...ab->...ib", J, E), -1, -2)
    return InducedData(gi, N, J, E, frame, X, g)


@dataclass
class FundamentalForms:
    g_induced: np.ndarray
    B: np.ndarray
    H: np.ndarray
    L: np.ndarray
    B_norm2: np.ndarray
    L_norm2: np.ndarray
    induced: InducedData


def fundamental_forms(h, Q, data=None):
    """B_ab = -g(N, nabla_a d_b F), equal to g(nabla_a N, d_b F) since N is normal."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    data = induced_data(h, Q) if data is None else data
    X, g, J, N = data.ambient_points, data.ambient_metric, data.tangent, data.normal
    Hs = h.hessian(Q)
    gamma = mf.christoffel(g, h.ambient.metric_d1(X))
    acc = Hs + np.einsum("...kij,...ia,...jb->...kab", gamma, J, J)
    B = -np.einsum("...kl,...l,...kab->...ab", g, N, acc)
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    gi = data.g_induced
    giinv = np.linalg.inv(gi)
    H = np.einsum("...ab,...ab->...", giinv, B)
    L = B - (H / h.dim)[..., None, None] * gi
    return FundamentalForms(
        gi, B, H, L,
        tc.inner_batch(B, B, giinv, 2), tc.inner_batch(L, L, giinv, 2), data,
    )


class InducedMetric(mf.MetricSpec):
    """The pullback metric as a chart metric on Sigma; d1 by the chain rule."""

    kind = "induced"

    def __init__(self, h):
        self.h = h
        self.dim = h.dim
        self.fd_step = min(h.fd_step, h.ambient.fd_step) if h._hessian is not None else h.fd_step

    def metric(self, Q):
        Q = np.asarray(Q, dtype=float)
        J = self.h.jacobian(Q)
        g = self.h.ambient.metric(self.h.points(Q))
        gi = np.einsum("...ia,...ij,...jb->...ab", J, g, J)
        return 0.5 * (gi + np.swapaxes(gi, -1, -2))

    def metric_d1(self, Q):
        Q = np.asarray(Q, dtype=float)
        X = self.h.points(Q)
        J = self.h.jacobian(Q)
        Hs = self.h.hessian(Q)
        g = self.h.ambient.metric(X)
        dg = self.h.ambient.metric_d1(X)
        dg_sigma = np.einsum("...kij,...kc->...cij", dg, J)
        t1 = np.einsum("...iac,...ij,...jb->...cab", Hs, g, J)
        return t1 + np.swapaxes(t1, -1, -2) + np.einsum("...ia,...cij,...jb->...cab", J, dg_sigma, J)

    def check_points(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise RankError(f"expected {self.dim} hypersurface coordinates")
        return X

    def sample_box(self):
        return self.h.box()


def intrinsic_curvature(h, Q):
    return mf.curvature_batch(InducedMetric(h), Q)


def gauss_identity_check(h, Q):
    """Residual of s_int = s_amb - 2 Ric(N, N) + H^2 - |B|^2 at each Sigma point."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    ff = fundamental_forms(h, Q)
    amb = mf.curvature_batch(h.ambient, ff.induced.ambient_points)
    intr = intrinsic_curvature(h, Q)
    N = ff.induced.normal
    ric_nn = np.einsum("...ij,...i,...j->...", amb.ric, N, N)
    rhs = amb.s - 2.0 * ric_nn + ff.H**2 - ff.B_norm2
    return {
        "s_intrinsic": intr.s, "s_ambient": amb.s, "ric_nn": ric_nn, "H": ff.H,
        "B_norm2": ff.B_norm2, "residual": np.abs(intr.s - rhs),
    }


def max_B(h, Q):
    return float(np.max(np.sqrt(np.maximum(fundamental_forms(h, Q).B_norm2, 0.0))))


def _frame_components(T, rows):
    """Contract every slot of a batched tensor with the frame rows (k, m, n)."""
    r = T.ndim - 1
    letters = "pqrs"[:r]
    sub = "".join(letters)
    out = "".join(c.upper() for c in letters)
    ops = ",".join(f"...{c.upper()}{c}" for c in letters)
    return np.einsum(f"...{sub},{ops}->...{out}", T, *([rows] * r), optimize=True)


@dataclass
class PullbackRecord:
    restricted_norm: np.ndarray
    ambient_norm: np.ndarray
    intrinsic_norm: np.ndarray | None = None
    s_gap_norm: np.ndarray | None = None
    pythagoras_residual: np.ndarray | None = None
    gauss_componentwise: np.ndarray | None = None

    @property
    def restriction_excess(self):
        return float(np.max(self.restricted_norm - self.ambient_norm))


def pullback_compare(h, Q, tensor="weyl", geodesic_tol=1e-8):
    """Compare an ambient tensor with its restriction to Sigma.

    ``tensor`` is either a callable returning covariant components on ambient
    points, or "weyl".  For "weyl" the hypersurface must measure as totally
    geodesic, and the record also carries the three terms of
    |W~|^2 = |W_int|^2 + |S_int - S~|^2 plus its residual.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    ff = fundamental_forms(h, Q)
    data = ff.induced
    X = data.ambient_points
    if tensor != "weyl":
        S = np.asarray(tensor(X), dtype=float)
        r = S.ndim - 1
        St = _frame_components(S, data.frame)
        ginv = np.linalg.inv(data.ambient_metric)
        return PullbackRecord(
            np.sqrt(np.sum(St * St, axis=tuple(range(1, r + 1)))),
            np.sqrt(np.maximum(tc.inner_batch(S, S, ginv, r), 0.0)),
        )
    if h.dim < 3:
        raise PreconditionError("Weyl comparison needs dim Sigma >= 3")
    bmax = float(np.max(np.sqrt(np.maximum(ff.B_norm2, 0.0))))
    if bmax > geodesic_tol:
        raise PreconditionError(f"hypersurface is not totally geodesic (max|B| = {bmax:.3e})")
    amb = mf.curvature_batch(h.ambient, X)
    intr = intrinsic_curvature(h, Q)
    W_res = _frame_components(amb.W, data.frame)
    S_res = _frame_components(amb.S_part, data.frame)
    R_res = _frame_components(amb.R, data.frame)
    E_rows = np.swapaxes(data.frame_sigma, -1, -2)
    W_int = _frame_components(intr.W, E_rows)
    S_int = _frame_components(intr.S_part, E_rows)
    R_int = _frame_components(intr.R, E_rows)
    ax = (1, 2, 3, 4)
    w_res2 = np.sum(W_res**2, axis=ax)
    w_int2 = np.sum(W_int**2, axis=ax)
    gap2 = np.sum((S_int - S_res) ** 2, axis=ax)
    return PullbackRecord(
        np.sqrt(w_res2), amb.weyl_norm(), np.sqrt(w_int2), np.sqrt(gap2),
        np.abs(w_res2 - w_int2 - gap2), np.max(np.abs(R_int - R_res), axis=ax),
    )


def mixed_normal_components(h, Q):
    """max over frame indices of |R(X, N, N, Y)| and |R(X, N, Z, Y)| per point."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    data = induced_data(h, Q)
    amb = mf.curvature_batch(h.ambient, data.ambient_points)
    R, F, N = amb.R, data.frame, data.normal
    xnny = np.einsum("...ijkl,...ai,...j,...k,...bl->...ab", R, F, N, N, F, optimize=True)
    xnzy = np.einsum("...ijkl,...ai,...j,...ck,...bl->...abc", R, F, N, F, F, optimize=True)
    return np.maximum(np.max(np.abs(xnny), axis=(1, 2)), np.max(np.abs(xnzy), axis=(1, 2, 3)))


@dataclass
class EinsteinSliceVerdict:
    einstein: bool
    equality: bool
    max_z: float
    max_weyl_gap: float
    tol: float

    @property
    def agrees(self):
        return self.einstein == self.equality


def einstein_slice_check(sigma_spec, samples=64, seed=0, tol=1e-6, radius=1.0):
    """Einstein iff |W_int| = |W_amb| along Sigma x {theta} in Sigma x S^1."""
    h = slice_hypersurface(sigma_spec, radius)
    Q = mf.sample_points(sigma_spec, samples, seed)
    intr = intrinsic_curvature(h, Q)
    amb = mf.curvature_batch(h.ambient, h.points(Q))
    max_z = float(np.max(intr.z_norm()))
    gap = float(np.max(np.abs(intr.weyl_norm() - amb.weyl_norm())))
    return EinsteinSliceVerdict(max_z <= tol, gap <= tol, max_z, gap, tol)
