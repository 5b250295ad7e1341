"""Closed-form metric catalog on coordinate charts and the curvature engine.

Every spec evaluates vectorized over points of shape ``(..., n)``.
``metric_d1`` returns ``d1[..., k, i, j] = d_k g_ij``; catalog entries code it
analytically.  Second derivatives always come from 4th-order central
differences of ``metric_d1`` with step ``fd_step`` (scaled by the chart).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import tensor_core as tc
from .errors import DimensionError, DomainError, MetricError

_FD4 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def central_diff(fn, X, axis, h):
    """4th-order central difference of ``fn`` along coordinate ``axis``."""
    X = np.asarray(X, dtype=float)
    e = np.zeros(X.shape[-1])
    e[axis] = h
    acc = None
    for k, c in _FD4:
        term = c * fn(X + k * e)
        acc = term if acc is None else acc + term
    return acc / (12.0 * h)


def gradient_fd(fn, X, h):
    """Stack of partial derivatives: out[..., k] = d_k fn."""
    return np.stack([central_diff(fn, X, k, h) for k in range(X.shape[-1])], axis=-1)


def hessian_fd(fn, X, h):
    """out[..., k, l] via differencing the FD gradient (4th order overall)."""
    n = X.shape[-1]
    grad = lambda Y: gradient_fd(fn, Y, h)  # noqa: E731
    H = np.stack([central_diff(grad, X, l, h) for l in range(n)], axis=-2)
    return 0.5 * (H + np.swapaxes(H, -1, -2))


class MetricSpec:
    """Base class: a Riemannian metric on a single coordinate chart."""

    kind = "abstract"
    dim = 0
    fd_step = 1e-4
    chart = "default"

    def metric(self, X):
        raise NotImplementedError

    def metric_d1(self, X):
        h = self.fd_step
        X = np.asarray(X, dtype=float)
        return np.stack([central_diff(self.metric, X, k, h) for k in range(self.dim)], axis=-3)

    def metric_d2(self, X, step=None):
        h = self.fd_step if step is None else step
        X = np.asarray(X, dtype=float)
        d2 = np.stack([central_diff(self.metric_d1, X, l, h) for l in range(self.dim)], axis=-4)
        # d2[..., l, k, i, j] = d_l d_k g_ij
        return 0.5 * (d2 + np.swapaxes(d2, -4, -3))

    def sample_box(self):
        return -np.ones(self.dim), np.ones(self.dim)

    def check_points(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise DimensionError(f"{self.kind}: expected {self.dim} coordinates, got {X.shape[-1]}")
        if not np.all(np.isfinite(X)):
            raise DomainError(f"{self.kind}: non-finite chart coordinates")
        return X

    def parallel_forms(self):
        """Catalog-certified parallel 2-forms: list of (name, callable)."""
        return []

    def is_einstein_hint(self):
        return None

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "chart": self.chart}


class FlatTorus(MetricSpec):
    kind = "flat_torus"

    def __init__(self, periods):
        self.periods = np.atleast_1d(np.asarray(periods, dtype=float))
        self.dim = len(self.periods)

    @classmethod
    def standard(cls, dim):
        return cls([2 * np.pi] * dim)

    def metric(self, X):
        X = self.check_points(X)
        return np.broadcast_to(np.eye(self.dim), X.shape[:-1] + (self.dim, self.dim)).copy()

    def metric_d1(self, X):
        X = self.check_points(X)
        return np.zeros(X.shape[:-1] + (self.dim,) * 3)

    def metric_d2(self, X, step=None):
        X = self.check_points(X)
        return np.zeros(X.shape[:-1] + (self.dim,) * 4)

    def sample_box(self):
        return np.zeros(self.dim), self.periods.copy()

    def parallel_forms(self):
        forms = []
        for a, b in tc.lambda2_pairs(self.dim):
            omega = np.zeros((self.dim, self.dim))
            omega[a, b], omega[b, a] = 1.0, -1.0
            forms.append((f"dx{a + 1}^dx{b + 1}", _constant_form(omega)))
        return forms

    def is_einstein_hint(self):
        return True

    def describe(self):
        return {**super().describe(), "periods": self.periods.tolist()}


def _constant_form(omega):
    def form(X):
        X = np.asarray(X, dtype=float)
        n = omega.shape[0]
        w = np.broadcast_to(omega, X.shape[:-1] + (n, n)).copy()
        return w, np.zeros(X.shape[:-1] + (n, n, n))

    return form


class RoundSphere(MetricSpec):
    """Stereographic chart: g = 4 r^2 |dx|^2 / (1 + |x|^2)^2.

    ``chart`` is "north" or "south"; the two charts are related by
    x -> x / |x|^2 and carry the same coordinate expression.
    """

    kind = "round_sphere"

    def __init__(self, dim, radius=1.0, chart="north"):
        if dim < 2:
            raise DimensionError("sphere dimension must be >= 2")
        if chart not in ("north", "south"):
            raise DomainError(f"unknown sphere chart {chart!r}")
        self.dim = int(dim)
        self.radius = float(radius)
        self.chart = chart

    def metric(self, X):
        X = self.check_points(X)
        rho = 1.0 + np.sum(X * X, axis=-1)
        conf = 4.0 * self.radius**2 / rho**2
        return conf[..., None, None] * np.eye(self.dim)

    def metric_d1(self, X):
        X = self.check_points(X)
        rho = 1.0 + np.sum(X * X, axis=-1)
        dconf = -16.0 * self.radius**2 * X / rho[..., None] ** 3
        return dconf[..., :, None, None] * np.eye(self.dim)

    def sample_box(self):
        return -np.ones(self.dim), np.ones(self.dim)

    def is_einstein_hint(self):
        return True

    def describe(self):
        return {**super().describe(), "radius": self.radius}


def sphere_chart_transition(X):
    """Map coordinates between the north and south stereographic charts."""
    X = np.asarray(X, dtype=float)
    r2 = np.sum(X * X, axis=-1, keepdims=True)
    if np.any(r2 == 0.0):
        raise DomainError("chart transition undefined at the pole")
    return X / r2


_J = np.array([[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]])


class FubiniStudyCP2(MetricSpec):
    """CP^2 on the affine chart C^2, coordinates (x1, y1, x2, y2).

    g = I/rho - (X X^T + JX (JX)^T)/rho^2 with rho = 1 + |X|^2; holomorphic
    sectional curvature 4, Ric = 6 g, s = 24.
    """

    kind = "fubini_study_cp2"
    dim = 4
    chart = "affine"
    J = _J

    def metric(self, X):
        X = self.check_points(X)
        rho = 1.0 + np.sum(X * X, axis=-1)
        Q = X @ _J.T
        outer = np.einsum("...i,...j->...ij", X, X) + np.einsum("...i,...j->...ij", Q, Q)
        return np.eye(4) / rho[..., None, None] - outer / rho[..., None, None] ** 2

    def metric_d1(self, X):
        X = self.check_points(X)
        rho = 1.0 + np.sum(X * X, axis=-1)
        Q = X @ _J.T
        outer = np.einsum("...i,...j->...ij", X, X) + np.einsum("...i,...j->...ij", Q, Q)
        eye = np.eye(4)
        Je = _J  # column c of J is J e_c
        d_outer = (
            np.einsum("ci,...j->...cij", eye, X)
            + np.einsum("...i,cj->...cij", X, eye)
            + np.einsum("ic,...j->...cij", Je, Q)
            + np.einsum("...i,jc->...cij", Q, Je)
        )
        r2 = rho[..., None, None, None]
        Xc = X[..., :, None, None]
        return (
            -2.0 * Xc * eye / r2**2
            - d_outer / r2**2
            + 4.0 * Xc * outer[..., None, :, :] / r2**3
        )

    def parallel_forms(self):
        def kahler(X):
            X = np.asarray(X, dtype=float)
            omega = np.einsum("ki,...kj->...ij", _J, self.metric(X))
            d_omega = np.einsum("ki,...ckj->...cij", _J, self.metric_d1(X))
            return omega, d_omega

        return [("kahler", kahler)]

    def is_einstein_hint(self):
        return True


class CircleFactor(MetricSpec):
    """S^1 of the given radius, angle coordinate theta in [0, 2 pi)."""

    kind = "circle"
    dim = 1

    def __init__(self, radius=1.0):
        self.radius = float(radius)

    def metric(self, X):
        X = self.check_points(X)
        return np.full(X.shape[:-1] + (1, 1), self.radius**2)

    def metric_d1(self, X):
        X = self.check_points(X)
        return np.zeros(X.shape[:-1] + (1, 1, 1))

    def metric_d2(self, X, step=None):
        X = self.check_points(X)
        return np.zeros(X.shape[:-1] + (1, 1, 1, 1))

    def sample_box(self):
        return np.zeros(1), np.full(1, 2 * np.pi)

    def describe(self):
        return {**super().describe(), "radius": self.radius}


class Product(MetricSpec):
    """Riemannian product; coordinates concatenated base-first."""

    kind = "product"

    def __init__(self, *factors):
        if len(factors) < 2:
            raise DimensionError("a product needs at least two factors")
        self.factors = list(factors)
        self.offsets = np.cumsum([0] + [f.dim for f in factors])
        self.dim = int(self.offsets[-1])
        self.fd_step = min(f.fd_step for f in factors)

    def _blocks(self):
        for f, o in zip(self.factors, self.offsets[:-1]):
            yield f, slice(int(o), int(o) + f.dim)

    def metric(self, X):
        X = self.check_points(X)
        g = np.zeros(X.shape[:-1] + (self.dim, self.dim))
        for f, sl in self._blocks():
            g[..., sl, sl] = f.metric(X[..., sl])
        return g

    def metric_d1(self, X):
        X = self.check_points(X)
        d1 = np.zeros(X.shape[:-1] + (self.dim,) * 3)
        for f, sl in self._blocks():
            d1[..., sl, sl, sl] = f.metric_d1(X[..., sl])
        return d1

    def metric_d2(self, X, step=None):
        X = self.check_points(X)
        d2 = np.zeros(X.shape[:-1] + (self.dim,) * 4)
        for f, sl in self._blocks():
            d2[..., sl, sl, sl, sl] = f.metric_d2(X[..., sl], step)
        return d2

    def check_points(self, X):
        X = super().check_points(X)
        for f, sl in self._blocks():
            f.check_points(X[..., sl])
        return X

    def sample_box(self):
        los, his = zip(*(f.sample_box() for f in self.factors))
        return np.concatenate(los), np.concatenate(his)

    def is_einstein_hint(self):
        return None

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "factors": [f.describe() for f in self.factors]}


class ConformalDeformation(MetricSpec):
    """g = u(x)^2 g_base for a positive scalar field u.

    Derivatives of u are taken by finite differences unless ``u_grad`` is
    supplied; ``fd_step`` then governs both the u-derivatives and d2.
    """

    kind = "conformal"

    def __init__(self, base, u, u_grad=None, fd_step=1e-3, label=None):
        self.base = base
        self.u = u
        self.u_grad = u_grad
        self.dim = base.dim
        self.fd_step = fd_step
        self.label = label

    def _u(self, X):
        val = np.asarray(self.u(X), dtype=float)
        val = np.broadcast_to(val, X.shape[:-1])
        if np.any(val <= 0.0) or not np.all(np.isfinite(val)):
            raise DomainError("conformal factor must be positive")
        return val

    def metric(self, X):
        X = self.check_points(X)
        u = self._u(X)
        return (u * u)[..., None, None] * self.base.metric(X)

    def metric_d1(self, X):
        X = self.check_points(X)
        u = self._u(X)
        if self.u_grad is not None:
            du = np.asarray(self.u_grad(X), dtype=float)
        else:
            du = gradient_fd(self._u, X, self.fd_step)
        gb = self.base.metric(X)
        return (
            2.0 * (u[..., None] * du)[..., :, None, None] * gb[..., None, :, :]
            + (u * u)[..., None, None, None] * self.base.metric_d1(X)
        )

    def check_points(self, X):
        return self.base.check_points(X)

    def sample_box(self):
        return self.base.sample_box()

    def parallel_forms(self):
        return []

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "base": self.base.describe(), "u": self.label}


class CallableMetric(MetricSpec):
    """Metric given by an arbitrary callable; derivatives fully by differences."""

    kind = "callable"

    def __init__(self, fn, dim, fd_step=1e-3, box=None, label=None):
        self.fn = fn
        self.dim = dim
        self.fd_step = fd_step
        self.box = box
        self.label = label

    def metric(self, X):
        X = self.check_points(X)
        return np.asarray(self.fn(X), dtype=float)

    def sample_box(self):
        if self.box is None:
            return super().sample_box()
        return np.asarray(self.box[0], float), np.asarray(self.box[1], float)


# -- curvature engine ---------------------------------------------------------


def christoffel(g, d1):
    """Gamma[..., k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    ginv = np.linalg.inv(g)
    first = 0.5 * (
        np.einsum("...ijl->...lij", d1) + np.einsum("...jil->...lij", d1) - d1
    )
    return np.einsum("...kl,...lij->...kij", ginv, first)


def riemann(g, d1, d2):
    """Fully covariant R_ijkl with R_ijij > 0 on round spheres."""
    gamma = christoffel(g, d1)
    R = 0.5 * (
        np.einsum("...jkil->...ijkl", d2)
        + np.einsum("...iljk->...ijkl", d2)
        - np.einsum("...jlik->...ijkl", d2)
        - np.einsum("...ikjl->...ijkl", d2)
    )
    R += np.einsum("...np,...njk,...pil->...ijkl", g, gamma, gamma, optimize=True)
    R -= np.einsum("...np,...njl,...pik->...ijkl", g, gamma, gamma, optimize=True)
    return R, gamma


def frames_batch(g):
    L = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def end_norm_batch(W, g):
    """|W| as an endomorphism of 2-forms, computed directly in a frame."""
    m = g.shape[-1]
    E = frames_batch(g)
    Wf = np.einsum("...ijkl,...ia,...jb,...kc,...ld->...abcd", W, E, E, E, E, optimize=True)
    a, b = np.triu_indices(m, 1)
    M = Wf[..., a, b, :, :][..., :, a, b]
    return np.sqrt(np.sum(M * M, axis=(-1, -2)))


@dataclass
class CurvatureBatch:
    """Curvature data at a batch of chart points (leading axis = sample)."""

    points: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    R: np.ndarray
    ric: np.ndarray
    s: np.ndarray
    z: np.ndarray
    W: np.ndarray | None
    S_part: np.ndarray | None
    extra: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.g.shape[-1]

    @property
    def ginv(self):
        return np.linalg.inv(self.g)

    def weyl_norm(self):
        if self.W is None:
            return np.zeros(self.s.shape)
        return np.sqrt(np.maximum(tc.inner_batch(self.W, self.W, self.ginv, 4), 0.0))

    def weyl_end_norm(self):
        if self.W is None:
            return np.zeros(self.s.shape)
        return end_norm_batch(self.W, self.g)

    def z_norm(self):
        return np.sqrt(np.maximum(tc.inner_batch(self.z, self.z, self.ginv, 2), 0.0))

    def decomp(self, i):
        m = self.dim
        if m < 3:
            return None
        gg = tc.kulkarni_nomizu(self.g[i], self.g[i])
        scalar = self.s[i] / (2.0 * m * (m - 1)) * gg
        return tc.CurvDecomp(
            m, float(self.s[i]), self.ric[i], self.z[i], scalar,
            self.S_part[i] - scalar, self.W[i], m == 3,
        )


def curvature_batch(spec, X, step=None):
    """Christoffels, Riemann tensor and its decomposition at points X (k, n)."""
    X = spec.check_points(np.atleast_2d(np.asarray(X, dtype=float)))
    g = spec.metric(X)
    if np.min(np.linalg.eigvalsh(g)) <= 0.0:
        raise MetricError(f"{spec.kind}: metric not positive definite on samples")
    d1 = spec.metric_d1(X)
    d2 = spec.metric_d2(X, step)
    R, gamma = riemann(g, d1, d2)
    ric, s, z = tc.ricci_parts(R, g)
    m = spec.dim
    W = S_part = None
    if m >= 3:
        S_part = (s / (2.0 * m * (m - 1)))[..., None, None, None, None] * tc.kulkarni_nomizu(g, g)
        S_part = S_part + tc.kulkarni_nomizu(z, g, atol=1e-6) / (m - 2)
        W = np.zeros_like(R) if m == 3 else R - S_part
    return CurvatureBatch(X, g, gamma, R, ric, s, z, W, S_part)


@dataclass
class CurvatureSample:
    point: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    R: np.ndarray
    decomp: tc.CurvDecomp | None


def curvature_at(spec, x, step=None):
    x = np.asarray(x, dtype=float)
    batch = curvature_batch(spec, x[None, :], step)
    g = tc.check_metric(batch.g[0])
    R = tc.check_curvature(batch.R[0], atol=1e-9)
    decomp = tc.decompose_curvature(R, g, validate=False) if spec.dim >= 3 else None
    return CurvatureSample(x, g, batch.gamma[0], R, decomp)


def eval_metric(spec, x):
    """(g, dg, d2g) at a single chart point."""
    x = np.asarray(x, dtype=float)[None, :]
    g = spec.metric(x)[0]
    tc.check_metric(g)
    return g, spec.metric_d1(x)[0], spec.metric_d2(x)[0]


# -- sampling and scanning ---------------------------------------------------


def sample_points(spec, count, seed=0, box=None):
    """Scrambled Halton points in the spec's sampling box (deterministic in seed)."""
    lo, hi = spec.sample_box() if box is None else box
    sampler = qmc.Halton(d=spec.dim, scramble=True, seed=seed)
    unit = sampler.random(int(count))
    return lo + unit * (np.asarray(hi) - np.asarray(lo))


@dataclass
class ScanReport:
    min_margin: float
    argmin: np.ndarray
    violations: int
    samples: int
    margins: np.ndarray
    tolerance: float

    @property
    def passed(self):
        return self.violations == 0


def hypothesis_scan(spec, f, points, tol=0.0, batch=None):
    """Check s_g >= f_g pointwise; violations are reported, never raised."""
    points = np.atleast_2d(points)
    if batch is None:
        batch = curvature_batch(spec, points)
    margins = batch.s - f.evaluate(spec, points, batch)
    i = int(np.argmin(margins))
    return ScanReport(
        float(margins[i]), points[i].copy(), int(np.sum(margins < -tol)),
        len(points), margins, tol,
    )


def catalog():
    """Available manifold kinds and their constructor parameters."""
    return {
        "flat_torus": {"params": ["periods"], "note": "identity metric, periodic box"},
        "round_sphere": {"params": ["dim", "radius", "chart"], "note": "stereographic chart"},
        "fubini_study_cp2": {"params": [], "note": "affine chart, Ric = 6g, s = 24"},
        "circle": {"params": ["radius"], "note": "angle coordinate"},
        "product": {"params": ["factors"], "note": "block metric, base-first coordinates"},
        "conformal": {"params": ["base", "u"], "note": "u^2 g_base, u an expression"},
    }
