"""Conformal-weight -2 functionals, modified scalar curvature and rescaling.

The Laplacian here is the geometer's one, div grad (nonpositive spectrum).
"""

from dataclasses import dataclass

import numpy as np

from . import hypersurface as hs
from . import manifolds as mf
from . import tensor_core as tc
from .errors import ConfigurationError, DimensionError, DomainError


class WeightedFunction:
    """A metric-dependent function f with f_{u^2 g} = u^{-2} f_g."""

    kind = "abstract"

    def evaluate(self, spec, X, batch=None):
        raise NotImplementedError

    def pointwise(self, g, data):
        """Value from pointwise data only (metric plus the tensors f reads)."""
        raise NotImplementedError

    def rescale_data(self, data, u):
        """Pointwise data transported to the metric u^2 g."""
        raise NotImplementedError

    def describe(self):
        return {"kind": self.kind}


class ZeroFunction(WeightedFunction):
    kind = "zero"

    def evaluate(self, spec, X, batch=None):
        return np.zeros(np.atleast_2d(X).shape[0])

    def pointwise(self, g, data):
        return 0.0

    def rescale_data(self, data, u):
        return data


class TensorNorm(WeightedFunction):
    """f = |T|_g for a fixed covariant 2-tensor field T (metric independent)."""

    kind = "tensor_norm"

    def __init__(self, components, label=None):
        self.components = components
        self.label = label

    def tensor(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if callable(self.components):
            T = np.asarray(self.components(X), dtype=float)
        else:
            T = np.asarray(self.components, dtype=float)
        n = X.shape[-1]
        return np.broadcast_to(T, X.shape[:-1] + (n, n))

    def evaluate(self, spec, X, batch=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        g = spec.metric(X) if batch is None else batch.g
        T = self.tensor(X)
        return np.sqrt(np.maximum(tc.inner_batch(T, T, np.linalg.inv(g), 2), 0.0))

    def pointwise(self, g, data):
        return tc.norm(data["T"], g)

    def rescale_data(self, data, u):
        return dict(data)

    def describe(self):
        return {"kind": self.kind, "T": self.label}


class WeylNorm(WeightedFunction):
    """f = c |W_g|_g; ``norm`` selects End(Lambda^2) ("end") or the full tensor norm."""

    kind = "weyl_norm"

    def __init__(self, c=1.0, norm="end"):
        if c <= 0:
            raise ConfigurationError("Weyl coefficient must be positive")
        if norm not in ("end", "tensor"):
            raise ConfigurationError(f"unknown Weyl norm {norm!r}")
        self.c = float(c)
        self.norm = norm

    def evaluate(self, spec, X, batch=None):
        if batch is None:
            batch = mf.curvature_batch(spec, X)
        w = batch.weyl_end_norm() if self.norm == "end" else batch.weyl_norm()
        return self.c * w

    def pointwise(self, g, data):
        W = data["W"]
        w = tc.end_lambda2_norm(W, g) if self.norm == "end" else tc.norm(W, g)
        return self.c * w

    def rescale_data(self, data, u):
        return {**data, "W": u * u * np.asarray(data["W"])}

    def describe(self):
        return {"kind": self.kind, "c": self.c, "norm": self.norm}


class TraceFreeSFFNormSq(WeightedFunction):
    """f = |L|^2 of a hypersurface; evaluated at Sigma coordinates."""

    kind = "tracefree_sff_norm_sq"

    def __init__(self, hypersurface=None):
        self.hypersurface = hypersurface

    def evaluate(self, spec, X, batch=None):
        if self.hypersurface is None:
            raise ConfigurationError("|L|^2 needs a hypersurface context")
        return hs.fundamental_forms(self.hypersurface, X).L_norm2

    def pointwise(self, g, data):
        L = data["L"]
        return tc.inner(L, L, g)

    def rescale_data(self, data, u):
        return {**data, "L": u * np.asarray(data["L"])}


class SumFunction(WeightedFunction):
    kind = "sum"

    def __init__(self, *parts):
        self.parts = parts

    def evaluate(self, spec, X, batch=None):
        return sum(p.evaluate(spec, X, batch) for p in self.parts)

    def pointwise(self, g, data):
        return sum(p.pointwise(g, data) for p in self.parts)

    def rescale_data(self, data, u):
        for p in self.parts:
            data = p.rescale_data(data, u)
        return data

    def describe(self):
        return {"kind": self.kind, "parts": [p.describe() for p in self.parts]}


def weight_defect(f, g, data, u):
    """Relative defect of f_{u^2 g} = u^{-2} f_g at one point for scale u > 0."""
    if u <= 0:
        raise DomainError("scale must be positive")
    g = np.asarray(g, dtype=float)
    before = f.pointwise(g, data)
    after = f.pointwise(u * u * g, f.rescale_data(data, u))
    return abs(after - before / u**2) / max(abs(before / u**2), 1e-300)


def eval_weighted(f, spec, X, batch=None):
    vals = f.evaluate(spec, X, batch)
    return np.maximum(vals, 0.0)


def sigma(spec, f, X, batch=None):
    """Modified scalar curvature s_g - f_g at chart points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if batch is None:
        batch = mf.curvature_batch(spec, X)
    return batch.s - f.evaluate(spec, X, batch)


def yamabe_power(m):
    if m < 3:
        raise DimensionError(f"conformal rescaling u^(4/(m-2)) needs m >= 3, got {m}")
    return 2.0 / (m - 2)


def conformal_rescale(spec, u, mode="yamabe", fd_step=1e-3, label=None):
    """Metric u^{4/(m-2)} g ("yamabe") or u^2 g ("square") as a new spec."""
    if mode == "yamabe":
        p = yamabe_power(spec.dim)
    elif mode == "square":
        p = 1.0
    else:
        raise ConfigurationError(f"unknown rescale mode {mode!r}")

    def factor(X):
        val = np.asarray(u(X), dtype=float)
        if np.any(val <= 0.0):
            raise DomainError("conformal factor u must be positive")
        return val**p

    return mf.ConformalDeformation(spec, factor, fd_step=fd_step, label=label)


def laplacian_fd(spec, u, X, step):
    """Geometer's Laplacian g^ij (d_i d_j u - Gamma^k_ij d_k u) by differences."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    g = spec.metric(X)
    gamma = mf.christoffel(g, spec.metric_d1(X))
    du = mf.gradient_fd(u, X, step)
    ddu = mf.hessian_fd(u, X, step)
    hess = ddu - np.einsum("...kij,...k->...ij", gamma, du)
    return np.einsum("...ij,...ij->...", np.linalg.inv(g), hess)


@dataclass
class TransformationRecord:
    direct: np.ndarray
    formula: np.ndarray
    residual: np.ndarray
    step: float

    @property
    def max_residual(self):
        return float(np.max(self.residual))


def transformation_law_check(spec, f, u, X, step=1e-3):
    """Compare sigma of u^{4/(m-2)} g recomputed from its curvature with

    u^{-4/(m-2)} sigma(g, f) - 4 (m-1)/(m-2) u^{-(m+2)/(m-2)} Lap u.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m = spec.dim
    bar = conformal_rescale(spec, u, fd_step=step)
    direct = sigma(bar, f, X, mf.curvature_batch(bar, X, step))
    uv = np.asarray(u(X), dtype=float)
    base = sigma(spec, f, X, mf.curvature_batch(spec, X, step))
    lap = laplacian_fd(spec, u, X, step)
    formula = uv ** (-4.0 / (m - 2)) * base - 4.0 * (m - 1) / (m - 2) * uv ** (-(m + 2.0) / (m - 2)) * lap
    return TransformationRecord(direct, formula, np.abs(direct - formula), step)


def convergence_order(spec, f, u, X, steps):
    """Observed orders log2(r_h / r_{h/2}) for consecutive step pairs."""
    res = [transformation_law_check(spec, f, u, X, h).max_residual for h in steps]
    orders = [float(np.log(a / b) / np.log(h1 / h2))
              for a, b, h1, h2 in zip(res, res[1:], steps, steps[1:])]
    return res, orders
