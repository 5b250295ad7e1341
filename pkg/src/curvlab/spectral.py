"""Periodic-grid Laplace-Beltrami operator, stability form, Schroedinger
eigenpairs and the two-case pipeline built on them.

Sign conventions: the assembled operator is the analyst's Laplacian
``lap_a = -div grad`` (nonnegative), and eigenvalues are reported as
``mu = -lambda`` where lambda is the eigenvalue of ``div grad - c sigma``.
Hence "lambda <= 0" reads "mu >= 0" throughout.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import conformal as cf
from . import hypersurface as hs
from . import manifolds as mf
from .errors import (
    DimensionError, InternalConsistencyError, MetricError, SolverError, ValidationError,
)

SIGN_CONVENTION = "lap_a = -div grad; mu = -lambda; 'lambda <= 0' <=> 'mu >= 0'"


@dataclass
class PeriodicGrid:
    dim: int
    resolution: tuple
    periods: np.ndarray
    nodes: np.ndarray      # (N, m), C-order flattening of the index grid
    metric: np.ndarray     # (N, m, m)
    sqrt_det: np.ndarray   # (N,)

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def spacing(self):
        return self.periods / np.asarray(self.resolution)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def weights(self):
        return self.cell_volume * self.sqrt_det

    def integrate(self, values):
        return float(np.sum(self.weights * values))


def make_grid(metric, resolution, periods=None):
    """Grid on a flat-torus chart carrying an arbitrary smooth metric.

    ``metric`` is a MetricSpec, a callable on node arrays, or None (identity).
    """
    if periods is None:
        periods = getattr(metric, "periods", None)
    if periods is None:
        raise DimensionError("grid needs the chart periods")
    periods = np.atleast_1d(np.asarray(periods, dtype=float))
    m = len(periods)
    res = tuple(int(r) for r in np.broadcast_to(resolution, (m,)))
    if min(res) < 8:
        raise ValidationError("grid resolution must be >= 8 per axis")
    axes = [np.arange(n) * (L / n) for n, L in zip(res, periods)]
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    if metric is None:
        g = np.broadcast_to(np.eye(m), (len(nodes), m, m)).copy()
    elif isinstance(metric, mf.MetricSpec):
        g = metric.metric(nodes)
    else:
        g = np.asarray(metric(nodes), dtype=float)
    det = np.linalg.det(g)
    if np.any(det <= 0.0) or not np.all(np.isfinite(g)):
        raise MetricError("singular metric sample on grid")
    if np.min(np.linalg.eigvalsh(g)) <= 0.0:
        raise MetricError("metric not positive definite on grid")
    return PeriodicGrid(m, res, periods, nodes, g, np.sqrt(det))


def _shift_matrix(res, axis, step):
    """Sparse permutation P with (P u)[idx] = u[idx + step e_axis] (periodic)."""
    size = int(np.prod(res))
    idx = np.arange(size).reshape(res)
    target = np.roll(idx, -step, axis=axis).ravel()
    return sp.csr_matrix((np.ones(size), (np.arange(size), target)), shape=(size, size))


@dataclass
class LaplaceOperator:
    """lap_a = W^{-1} K with K the symmetric stiffness and W the mass diagonal."""

    grid: PeriodicGrid
    K: sp.csr_matrix
    mass: np.ndarray

    def apply(self, u):
        return (self.K @ u) / self.mass

    def energy(self, u, v=None):
        """Discrete integral of <grad u, grad v>."""
        v = u if v is None else v
        return float(u @ (self.K @ v))

    def dense(self):
        return (self.K.toarray()) / self.mass[:, None]


def build_laplacian(grid):
    """Average of one-sided difference energies over all 2^m sign patterns.

    Every pattern contributes (D^s u)^T A (D^s u) with A = sqrt(det g) g^{-1},
    so K is symmetric, positive semidefinite and its kernel is the constants.
    """
    m = grid.dim
    res = grid.resolution
    h = grid.spacing
    eye = sp.identity(grid.size, format="csr")
    fwd, bwd = [], []
    for i in range(m):
        fwd.append((_shift_matrix(res, i, 1) - eye) / h[i])
        bwd.append((eye - _shift_matrix(res, i, -1)) / h[i])
    A = grid.sqrt_det[:, None, None] * np.linalg.inv(grid.metric) * grid.cell_volume
    K = sp.csr_matrix((grid.size, grid.size))
    for signs in product((0, 1), repeat=m):
        D = [fwd[i] if s == 0 else bwd[i] for i, s in enumerate(signs)]
        for i in range(m):
            for j in range(m):
                K = K + D[i].T @ sp.diags(A[:, i, j]) @ D[j]
    K = (K / 2**m).tocsr()
    K = 0.5 * (K + K.T)
    return LaplaceOperator(grid, K.tocsr(), grid.weights.copy())


@dataclass
class SpectralResult:
    mu: float
    u: np.ndarray
    residual: float
    iterations: int
    shift: float
    coefficient: float = 1.0
    convention: str = SIGN_CONVENTION

    @property
    def lam(self):
        return -self.mu


def _symmetric_form(op, potential):
    """Symmetrized matrix W^{-1/2} (K + W V) W^{-1/2}."""
    s = 1.0 / np.sqrt(op.mass)
    A = sp.diags(s) @ op.K @ sp.diags(s) + sp.diags(potential)
    return A.tocsc()


_DIRECT_LIMIT = 5000


def _shifted_solver(M):
    """Sparse LU for small systems; Jacobi-preconditioned CG above the limit
    (3-D LU fill-in is prohibitive)."""
    if M.shape[0] <= _DIRECT_LIMIT:
        return spla.splu(M).solve
    precond = sp.diags(1.0 / M.diagonal())

    def solve(b):
        x, info = spla.cg(M, b, x0=b / M.diagonal(), rtol=1e-14, atol=0.0, maxiter=20_000, M=precond)
        if info != 0:
            raise SolverError("inner CG solve did not converge", {"info": info})
        return x

    return solve


def lowest_eigenpair(op, potential, tol=1e-10, max_iter=10_000, margin=1.0):
    """Principal eigenpair of lap_a + V by shift-invert iteration.

    The shift sits below min V, which bounds the spectrum from below, so the
    shifted operator is positive definite and the iteration converges to the
    bottom of the spectrum from the all-ones start vector.
    """
    potential = np.asarray(potential, dtype=float)
    A = _symmetric_form(op, potential)
    shift = float(np.min(potential)) - margin
    solve = _shifted_solver((A - shift * sp.identity(A.shape[0], format="csc")).tocsc())
    y = np.sqrt(op.mass)
    y /= np.linalg.norm(y)
    rho, res = np.nan, np.inf
    for it in range(1, max_iter + 1):
        y = solve(y)
        y /= np.linalg.norm(y)
        Ay = A @ y
        rho = float(y @ Ay)
        res = float(np.linalg.norm(Ay - rho * y))
        if res <= tol * max(1.0, abs(rho)):
            break
    else:
        raise SolverError("shift-invert iteration did not converge",
                          {"iterations": max_iter, "residual": res, "rayleigh": rho})
    u = y / np.sqrt(op.mass)
    if np.sum(u * op.mass) < 0:
        u = -u
    return SpectralResult(rho, u, res, it, shift)


def lowest_eigenvalues(op, potential=None, k=5):
    """Several bottom eigenvalues (sparse Lanczos in shift-invert mode)."""
    potential = np.zeros(op.grid.size) if potential is None else np.asarray(potential, float)
    A = _symmetric_form(op, potential)
    if A.shape[0] <= 600:
        return np.linalg.eigvalsh(A.toarray())[:k]
    vals = spla.eigsh(A, k=k, sigma=float(np.min(potential)) - 1.0, which="LM",
                      return_eigenvectors=False)
    return np.sort(vals)


def yamabe_coefficient(m):
    """(m-2)/(4(m-1)) with m the dimension of the hypersurface."""
    if m < 3:
        raise DimensionError(f"Schroedinger operator needs dim >= 3, got {m}")
    return (m - 2) / (4.0 * (m - 1))


def principal_eigenpair(op, sigma_values, m=None, **kw):
    """Principal eigenpair of lap_a + c sigma; u > 0 and weighted ||u|| = 1."""
    m = op.grid.dim if m is None else m
    c = yamabe_coefficient(m)
    result = lowest_eigenpair(op, c * np.asarray(sigma_values, dtype=float), **kw)
    result.coefficient = c
    return result


@dataclass
class JacobiResult:
    mu: float
    stable: bool
    eigenpair: SpectralResult


def jacobi_stability(op, q, tol=1e-8):
    """Principal eigenvalue of lap_a - q; stable iff it is >= -tol."""
    res = lowest_eigenpair(op, -np.asarray(q, dtype=float))
    return JacobiResult(res.mu, res.mu >= -tol, res)


@dataclass
class Certificate:
    identity_residual: float
    bound_on_u: bool
    bound_random_violations: int
    trials: int
    mu: float
    implication_ok: bool

    @property
    def hypothesis_failure(self):
        return (not self.bound_on_u) or self.bound_random_violations > 0


def integrated_bound_margin(op, sigma_values, phi):
    """int |grad phi|^2 + 1/2 int sigma phi^2 (>= 0 is the integrated bound)."""
    return op.energy(phi) + 0.5 * float(np.sum(op.mass * sigma_values * phi * phi))


def lambda_sign_certificate(op, sigma_values, result, m=None, trials=1000, seed=0, tol=1e-10):
    """Check the integrated eigen-identity and the bound-implies-mu>=0 step."""
    m = op.grid.dim if m is None else m
    sigma_values = np.asarray(sigma_values, dtype=float)
    u = result.u
    k = (m - 1) / (m - 2)
    lhs = 2.0 * k * op.energy(u)
    rhs = (-0.5 * float(np.sum(op.mass * sigma_values * u * u))
           + 2.0 * result.mu * k * float(np.sum(op.mass * u * u)))
    rng = np.random.default_rng(seed)
    scale = 1e-12 * max(1.0, float(np.max(np.abs(sigma_values))))
    on_u = integrated_bound_margin(op, sigma_values, u) >= -scale
    bad = 0
    for _ in range(trials):
        phi = 1.0 + rng.standard_normal(op.grid.size) * rng.uniform(0.0, 1.0)
        if integrated_bound_margin(op, sigma_values, phi) < -scale * float(phi @ phi):
            bad += 1
    return Certificate(abs(lhs - rhs), bool(on_u), bad, trials, result.mu,
                       (not on_u) or result.mu >= -tol)


def soundness_trial(op, q, slack, m=None):
    """Discrete chain: make lap_a - q marginally stable, set sigma = slack - 2 q,
    and return the principal mu of lap_a + c sigma (expected >= 0)."""
    q = np.asarray(q, dtype=float)
    mu_j = jacobi_stability(op, q).mu
    q_stable = q + mu_j
    sigma_values = np.asarray(slack, dtype=float) - 2.0 * q_stable
    return principal_eigenpair(op, sigma_values, m).mu


# -- trigonometric interpolation of grid fields --------------------------------


class TrigInterpolant:
    """Periodic trigonometric interpolant of node values (callable on points)."""

    def __init__(self, grid, values):
        self.grid = grid
        vals = np.asarray(values, dtype=float).reshape(grid.resolution)
        self.coef = np.fft.fftn(vals) / vals.size
        self.freqs = [2 * np.pi * np.fft.fftfreq(n, d=L / n) for n, L in zip(grid.resolution, grid.periods)]

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.grid.dim)
        letters = "abcdefgh"[: self.grid.dim]
        phases = [np.exp(1j * np.outer(flat[:, i], k)) for i, k in enumerate(self.freqs)]
        expr = f"{letters}," + ",".join(f"p{c}" for c in letters) + "->p"
        out = np.einsum(expr, self.coef, *phases, optimize=True).real
        return out.reshape(X.shape[:-1])


# -- the two-case pipeline -----------------------------------------------------


@dataclass
class TheoremOutcome:
    case: str  # "hypothesis_violated" | "precondition_failed" | "case_i" | "case_ii"
    mu: float | None = None
    tol_lambda: float | None = None
    details: dict = field(default_factory=dict)
    convention: str = SIGN_CONVENTION


def _rel_err_tol(mu_fine, mu_coarse):
    return max(1e-8, 10.0 * abs(mu_fine - mu_coarse) / 3.0)


class _SigmaData:
    """Geometric data on Sigma needed by both theorem modes."""

    def __init__(self, h, Q, f_ambient, mode, c=None):
        self.h = h
        self.Q = Q
        ff = hs.fundamental_forms(h, Q)
        self.ff = ff
        X = ff.induced.ambient_points
        self.amb = mf.curvature_batch(h.ambient, X)
        self.intr = hs.intrinsic_curvature(h, Q)
        N = ff.induced.normal
        self.ric_nn = np.einsum("...ij,...i,...j->...", self.amb.ric, N, N)
        self.q = self.ric_nn + ff.B_norm2
        if mode == "theorem1":
            if isinstance(f_ambient, cf.TensorNorm):
                T = f_ambient.tensor(X)
                Tt = np.einsum("...ij,...ia,...jb->...ab", T, ff.induced.tangent, ff.induced.tangent)
                giinv = np.linalg.inv(ff.g_induced)
                self.T_sigma = np.sqrt(np.maximum(np.einsum("...ab,...cd,...ac,...bd->...", Tt, Tt, giinv, giinv), 0.0))
                self.T_amb = f_ambient.evaluate(h.ambient, X, self.amb)
            else:
                self.T_sigma = np.zeros(len(Q))
                self.T_amb = np.zeros(len(Q))
            self.f_sigma = self.T_sigma + ff.L_norm2
        else:
            w = self.intr.weyl_end_norm() if f_ambient.norm == "end" else self.intr.weyl_norm()
            self.f_sigma = f_ambient.c * w
        self.sigma = self.intr.s - self.f_sigma


def theorem_pipeline(h, f_ambient, mode="theorem1", resolution=16, samples=128, seed=0,
                     sigma_inject=None, geodesic_tol=1e-8, hypothesis_tol=1e-9, verify_samples=64):
    """Run the stability / eigenvalue / rescale procedure on a torus-chart hypersurface.

    ``f_ambient`` is a TensorNorm or ZeroFunction (theorem1) or a WeylNorm
    (theorem2).  ``sigma_inject`` replaces the geometric sigma on Sigma by a
    synthetic field so that the strictly positive case can be exercised.
    """
    if mode not in ("theorem1", "theorem2"):
        raise ValueError(f"unknown mode {mode!r}")
    if h.sigma_periods is None:
        raise DimensionError("pipeline needs a hypersurface with a flat-torus chart")
    m = h.dim
    if mode == "theorem2" and not isinstance(f_ambient, cf.WeylNorm):
        raise ValueError("theorem2 mode needs a WeylNorm")
    if mode == "theorem2" and m < 4:
        return TheoremOutcome("precondition_failed", details={"reason": "theorem2 needs ambient dim >= 5"})
    if m < 3:
        return TheoremOutcome("precondition_failed", details={"reason": "dim Sigma must be >= 3"})

    # hypothesis s >= f on the ambient (box samples plus the image of Sigma)
    amb_pts = mf.sample_points(h.ambient, samples, seed)
    scan = mf.hypothesis_scan(h.ambient, f_ambient, amb_pts, hypothesis_tol)
    grid_fine = make_grid(hs.InducedMetric(h), resolution, h.sigma_periods)
    scan_sigma = mf.hypothesis_scan(h.ambient, f_ambient, h.points(grid_fine.nodes), hypothesis_tol)
    worst = min((scan, scan_sigma), key=lambda r: r.min_margin)
    if not (scan.passed and scan_sigma.passed):
        return TheoremOutcome("hypothesis_violated", details={
            "min_margin": worst.min_margin, "witness": worst.argmin.tolist(),
            "violations": scan.violations + scan_sigma.violations,
        })

    data = _SigmaData(h, grid_fine.nodes, f_ambient, mode)
    max_b = float(np.max(np.sqrt(np.maximum(data.ff.B_norm2, 0.0))))
    max_h = float(np.max(np.abs(data.ff.H)))
    if max_h > geodesic_tol:
        return TheoremOutcome("precondition_failed", details={"reason": "not minimal", "max_H": max_h})
    if mode == "theorem2" and max_b > geodesic_tol:
        return TheoremOutcome("precondition_failed", details={"reason": "not totally geodesic", "max_B": max_b})

    op = build_laplacian(grid_fine)
    jac = jacobi_stability(op, data.q)
    if not jac.stable:
        return TheoremOutcome("precondition_failed", details={"reason": "unstable", "mu_jacobi": jac.mu})

    sigma_fn = sigma_inject
    sig = data.sigma if sigma_fn is None else np.asarray(sigma_fn(grid_fine.nodes), float)
    eig = principal_eigenpair(op, sig, m)

    coarse_res = tuple(max(8, r // 2) for r in grid_fine.resolution)
    if coarse_res != grid_fine.resolution:
        grid_c = make_grid(hs.InducedMetric(h), coarse_res, h.sigma_periods)
        if sigma_fn is None:
            sig_c = _SigmaData(h, grid_c.nodes, f_ambient, mode).sigma
        else:
            sig_c = np.asarray(sigma_fn(grid_c.nodes), float)
        mu_c = principal_eigenpair(build_laplacian(grid_c), sig_c, m).mu
    else:
        mu_c = eig.mu
    tol_lam = _rel_err_tol(eig.mu, mu_c)
    details = {"mu_coarse": mu_c, "mu_jacobi": jac.mu, "max_B": max_b,
               "iterations": eig.iterations, "residual": eig.residual,
               "sigma_injected": sigma_fn is not None}

    if eig.mu < -tol_lam:
        raise InternalConsistencyError(
            "principal eigenvalue negative although hypotheses hold",
            {"mu": eig.mu, "tol_lambda": tol_lam, **details})

    if eig.mu > tol_lam:
        u_field = TrigInterpolant(grid_fine, eig.u / np.max(eig.u))
        Qv = mf.sample_points(hs.InducedMetric(h), verify_samples, seed + 1, box=h.box())
        sig_bar = rescaled_sigma(h, f_ambient, mode, u_field, Qv, sigma_fn)
        details.update({"min_sigma_rescaled": float(np.min(sig_bar)),
                        "verify_samples": len(Qv), "u_min": float(np.min(eig.u)),
                        "conformal_power": 4.0 / (m - 2)})
        details["u_field"] = u_field
        return TheoremOutcome("case_i", eig.mu, tol_lam, details)

    rig = {"u_spread": float(np.ptp(eig.u) / np.max(np.abs(eig.u))),
           "max_sigma": float(np.max(np.abs(sig)))}
    if mode == "theorem1":
        rig["max_intrinsic_rigidity"] = float(np.max(np.abs(data.intr.s - data.T_sigma - data.ff.B_norm2)))
        rig["max_ambient_rigidity"] = float(np.max(np.abs(data.amb.s - data.intr.s + data.ff.B_norm2)))
        rig["max_T_gap"] = float(np.max(np.abs(data.T_amb - data.T_sigma)))
    else:
        c = f_ambient.c
        w_int = data.intr.weyl_end_norm() if f_ambient.norm == "end" else data.intr.weyl_norm()
        w_amb = data.amb.weyl_end_norm() if f_ambient.norm == "end" else data.amb.weyl_norm()
        rig["max_intrinsic_rigidity"] = float(np.max(np.abs(data.intr.s - c * w_int)))
        rig["max_ambient_rigidity"] = float(np.max(np.abs(data.amb.s - data.intr.s)))
        rig["max_W_gap"] = float(np.max(np.abs(w_amb - w_int)))
    details.update(rig)
    return TheoremOutcome("case_ii", eig.mu, tol_lam, details)


def rescaled_sigma(h, f_ambient, mode, u_field, Q, sigma_inject=None):
    """sigma of u^{4/(m-2)} g_Sigma recomputed from the curvature of the new metric."""
    m = h.dim
    base = hs.InducedMetric(h)
    bar = cf.conformal_rescale(base, u_field)
    bar_curv = mf.curvature_batch(bar, Q)
    u = u_field(Q)
    weight = u ** (-4.0 / (m - 2))
    if sigma_inject is not None:
        s_base = mf.curvature_batch(base, Q).s
        f_inj = s_base - np.asarray(sigma_inject(Q), float)
        return bar_curv.s - weight * f_inj
    if mode == "theorem1":
        ff = hs.fundamental_forms(h, Q)
        f_bar = weight * ff.L_norm2
        if isinstance(f_ambient, cf.TensorNorm):
            T = f_ambient.tensor(h.points(Q))
            Tt = np.einsum("...ij,...ia,...jb->...ab", T, ff.induced.tangent, ff.induced.tangent)
            ginv = np.linalg.inv(bar_curv.g)
            f_bar = f_bar + np.sqrt(np.maximum(np.einsum("...ab,...cd,...ac,...bd->...", Tt, Tt, ginv, ginv), 0.0))
        return bar_curv.s - f_bar
    w = bar_curv.weyl_end_norm() if f_ambient.norm == "end" else bar_curv.weyl_norm()
    return bar_curv.s - f_ambient.c * w
