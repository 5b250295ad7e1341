"""Scenario configuration: one JSON document describing a manifold, an
optional hypersurface, an optional weighted function and the checks to run."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conformal as cf
from . import hypersurface as hs
from . import manifolds as mf
from .errors import ConfigurationError
from .expr import Field, constant_value


@dataclass
class CheckSpec:
    name: str
    tol: float | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"name": self.name, **self.params}
        if self.tol is not None:
            d["tol"] = self.tol
        return d


@dataclass
class Scenario:
    name: str
    manifold: dict
    hypersurface: dict | None = None
    weighted_function: dict | None = None
    checks: list = field(default_factory=list)
    samples: int = 64
    seed: int = 0
    resolution: int = 16
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigurationError("scenario must be a JSON object")
        if "manifold" not in d:
            raise ConfigurationError("scenario needs a 'manifold' entry")
        checks = []
        for c in d.get("checks", []):
            if isinstance(c, str):
                checks.append(CheckSpec(c))
                continue
            if not isinstance(c, dict) or "name" not in c:
                raise ConfigurationError(f"malformed check entry {c!r}")
            params = {k: v for k, v in c.items() if k not in ("name", "tol")}
            tol = c.get("tol")
            if tol is not None and not (float(tol) > 0):
                raise ConfigurationError(f"tolerance for {c['name']} must be > 0")
            checks.append(CheckSpec(c["name"], None if tol is None else float(tol), params))
        samples = int(d.get("samples", 64))
        resolution = int(d.get("resolution", 16))
        if samples <= 0:
            raise ConfigurationError("samples must be positive")
        if resolution < 8:
            raise ConfigurationError("resolution must be >= 8")
        return cls(
            name=str(d.get("name", "scenario")), manifold=d["manifold"],
            hypersurface=d.get("hypersurface"), weighted_function=d.get("weighted_function"),
            checks=checks, samples=samples, seed=int(d.get("seed", 0)),
            resolution=resolution, output=dict(d.get("output", {})),
        )

    def to_dict(self):
        return {
            "name": self.name, "manifold": self.manifold, "hypersurface": self.hypersurface,
            "weighted_function": self.weighted_function,
            "checks": [c.to_dict() for c in self.checks], "samples": self.samples,
            "seed": self.seed, "resolution": self.resolution, "output": self.output,
        }


def load_scenario(source):
    if isinstance(source, Scenario):
        return source
    if isinstance(source, dict):
        return Scenario.from_dict(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from exc
    try:
        return Scenario.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def build_manifold(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigurationError(f"manifold entry needs a 'kind': {d!r}")
    kind = d["kind"]
    if kind == "flat_torus":
        if "periods" in d:
            return mf.FlatTorus([constant_value(p) for p in d["periods"]])
        return mf.FlatTorus.standard(int(d.get("dim", 3)))
    if kind == "round_sphere":
        return mf.RoundSphere(int(d.get("dim", 4)), constant_value(d.get("radius", 1.0)), d.get("chart", "north"))
    if kind == "fubini_study_cp2":
        return mf.FubiniStudyCP2()
    if kind == "circle":
        return mf.CircleFactor(constant_value(d.get("radius", 1.0)))
    if kind == "product":
        factors = d.get("factors", [])
        if len(factors) < 2:
            raise ConfigurationError("product needs at least two factors")
        return mf.Product(*[build_manifold(f) for f in factors])
    if kind == "conformal":
        base = build_manifold(d["base"])
        return mf.ConformalDeformation(base, Field(d["u"], base.dim), label=d["u"],
                                       fd_step=float(d.get("fd_step", 1e-3)))
    raise ConfigurationError(f"unknown manifold kind {kind!r}; see the catalog")


def build_hypersurface(d, ambient):
    if d is None:
        return None
    kind = d.get("kind")
    if kind == "slice":
        if not isinstance(ambient, mf.Product) or not isinstance(ambient.factors[-1], mf.CircleFactor):
            raise ConfigurationError("a slice hypersurface needs an ambient of the form Sigma x circle")
        rest = ambient.factors[:-1]
        sigma = rest[0] if len(rest) == 1 else mf.Product(*rest)
        return hs.slice_hypersurface(sigma, ambient.factors[-1].radius, float(d.get("theta", 0.0)))
    if kind == "graph":
        if not isinstance(ambient, mf.FlatTorus):
            raise ConfigurationError("graph hypersurfaces live in a flat torus")
        height = Field(d["height"], ambient.dim - 1)
        periods = ambient.periods[:-1] if d.get("periodic", True) else None
        return hs.graph_hypersurface(ambient, height, periods=periods, label=d["height"])
    raise ConfigurationError(f"unknown hypersurface kind {kind!r}")


def build_weighted(d, dim, hypersurface=None):
    if d is None:
        return None
    kind = d.get("kind")
    if kind == "zero":
        return cf.ZeroFunction()
    if kind == "tensor_norm":
        comps = d.get("components")
        if comps is None or len(comps) != dim or any(len(row) != dim for row in comps):
            raise ConfigurationError(f"tensor_norm needs a {dim}x{dim} component array")
        fields = [[Field(str(c), dim) for c in row] for row in comps]

        def T(X):
            X = np.atleast_2d(X)
            return np.stack([np.stack([f(X) for f in row], axis=-1) for row in fields], axis=-2)

        return cf.TensorNorm(T, label=comps)
    if kind == "weyl_norm":
        return cf.WeylNorm(constant_value(d.get("c", 1.0)), d.get("norm", "end"))
    if kind == "tracefree_sff_norm_sq":
        return cf.TraceFreeSFFNormSq(hypersurface)
    raise ConfigurationError(f"unknown weighted function kind {kind!r}")
