"""Named checks and the scenario orchestrator.

Every check receives a shared context and its own parameters and returns a
CheckResult.  Exceptions inside a check become status "error" for that check
only; sibling checks still run.
"""

import numpy as np

from . import __version__
from . import conformal as cf
from . import fourdim as fd
from . import hypersurface as hs
from . import manifolds as mf
from . import spectral as sp
from . import tensor_core as tc
from .errors import ConfigurationError, CurvlabError, PreconditionError
from .expr import Field
from .report import CheckResult, ScenarioReport
from .scenario import build_hypersurface, build_manifold, build_weighted, load_scenario


class Context:
    """Lazily built objects shared by the checks of one scenario."""

    def __init__(self, scenario):
        self.scenario = scenario
        self._cache = {}

    def _get(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def manifold(self):
        return self._get("manifold", lambda: build_manifold(self.scenario.manifold))

    @property
    def hypersurface(self):
        if self.scenario.hypersurface is None:
            raise ConfigurationError("this check needs a 'hypersurface' entry")
        return self._get("hyp", lambda: build_hypersurface(self.scenario.hypersurface, self.manifold))

    @property
    def weighted(self):
        if self.scenario.weighted_function is None:
            raise ConfigurationError("this check needs a 'weighted_function' entry")

        def make():
            h = None
            if self.scenario.hypersurface is not None:
                h = self.hypersurface
            return build_weighted(self.scenario.weighted_function, self.manifold.dim, h)

        return self._get("f", make)

    @property
    def points(self):
        sc = self.scenario
        return self._get("pts", lambda: mf.sample_points(self.manifold, sc.samples, sc.seed))

    @property
    def batch(self):
        return self._get("batch", lambda: mf.curvature_batch(self.manifold, self.points))

    @property
    def sigma_points(self):
        sc = self.scenario
        h = self.hypersurface
        return self._get("qpts", lambda: mf.sample_points(hs.InducedMetric(h), sc.samples, sc.seed, box=h.box()))


def _result(name, violation, tol, samples, witness=None, info=None, skip_reason=None):
    if skip_reason is not None:
        info = dict(info or {}, reason=skip_reason)
        return CheckResult(name, "skipped", None, tol, samples, None, info)
    status = "pass" if violation <= tol else "fail"
    w = None if witness is None else [float(v) for v in np.ravel(witness)]
    return CheckResult(name, status, float(violation), tol, samples, w, info or {})


def _worst(values, points):
    i = int(np.argmax(values))
    return float(values[i]), points[i]


def check_hypothesis(ctx, p, tol):
    scan = mf.hypothesis_scan(ctx.manifold, ctx.weighted, ctx.points, tol, ctx.batch)
    return _result("hypothesis", max(0.0, -scan.min_margin), tol, scan.samples, scan.argmin,
                   {"min_margin": scan.min_margin, "violations": scan.violations,
                    "weighted_function": ctx.weighted.describe()})


def check_s_equals_2sqrt6_W(ctx, p, tol):
    b = ctx.batch
    w_end = b.weyl_end_norm()
    dev = np.abs(b.s - fd.TWO_SQRT6 * w_end) / np.maximum(np.abs(b.s), 1.0)
    v, x = _worst(dev, ctx.points)
    return _result("s_equals_2sqrt6_W", v, tol, len(dev), x, {
        "s_range": [float(b.s.min()), float(b.s.max())],
        "W_end_max": float(w_end.max()), "W_tensor_max": float(b.weyl_norm().max()),
        "relative": True})


def check_weyl_vanishes(ctx, p, tol):
    w = ctx.batch.weyl_norm()
    v, x = _worst(w, ctx.points)
    return _result("weyl_vanishes", v, tol, len(w), x, {"W_end_max": float(ctx.batch.weyl_end_norm().max())})


def check_decomposition(ctx, p, tol):
    b = ctx.batch
    m = b.dim
    if m < 3:
        return _result("decomposition", 0.0, tol, len(b.s), skip_reason="dimension < 3")
    worst = np.zeros(len(b.s))
    for i in range(len(b.s)):
        g = b.g[i]
        d = b.decomp(i)
        scale = max(tc.norm(b.R[i], g) ** 2, 1.0)
        parts = [d.scalar_part, d.ricci_part, d.W]
        res = [tc.norm(sum(parts) - b.R[i], g) / np.sqrt(scale)]
        for a in range(3):
            for c in range(a + 1, 3):
                res.append(abs(tc.inner(parts[a], parts[c], g)) / scale)
        ginv = np.linalg.inv(g)
        res.append(float(np.max(np.abs(np.einsum("ik,ijkl->jl", ginv, d.W)))) / np.sqrt(scale))
        worst[i] = max(res)
    v, x = _worst(worst, ctx.points)
    return _result("decomposition", v, tol, len(worst), x, {"weyl_trivial": m == 3})


def check_restriction_bound(ctx, p, tol):
    h = ctx.hypersurface
    Q = ctx.sigma_points
    f = ctx.weighted if ctx.scenario.weighted_function is not None else None
    if isinstance(f, cf.TensorNorm):
        rec = hs.pullback_compare(h, Q, f.tensor)
    else:
        rec = hs.pullback_compare(h, Q, lambda Y: mf.curvature_batch(h.ambient, Y).W)
    excess = rec.restricted_norm - rec.ambient_norm
    v, x = _worst(excess, Q)
    return _result("restriction_bound", max(v, 0.0), tol, len(Q), x, {"max_excess": v})


def check_gauss_identity(ctx, p, tol):
    Q = ctx.sigma_points
    out = hs.gauss_identity_check(ctx.hypersurface, Q)
    v, x = _worst(out["residual"], Q)
    return _result("gauss_identity", v, tol, len(Q), x, {
        "max_H": float(np.max(np.abs(out["H"]))), "sff_sign": "B(X,Y) = g(nabla_X N, Y)"})


def check_pythagoras(ctx, p, tol):
    h = ctx.hypersurface
    Q = ctx.sigma_points
    bmax = hs.max_B(h, Q)
    if bmax > 1e-8:
        return _result("pythagoras", 0.0, tol, len(Q), skip_reason=f"not totally geodesic (max|B| = {bmax:.3e})")
    rec = hs.pullback_compare(h, Q, "weyl")
    rel = rec.pythagoras_residual / np.maximum(1.0, rec.restricted_norm**2)
    v, x = _worst(rel, Q)
    return _result("pythagoras", v, tol, len(Q), x, {
        "W_restricted_max": float(rec.restricted_norm.max()),
        "W_intrinsic_max": float(rec.intrinsic_norm.max()),
        "S_gap_max": float(rec.s_gap_norm.max()),
        "gauss_componentwise_max": float(rec.gauss_componentwise.max())})


def check_einstein_slice(ctx, p, tol):
    M = ctx.manifold
    if not isinstance(M, mf.Product) or not isinstance(M.factors[-1], mf.CircleFactor):
        raise ConfigurationError("einstein_slice needs a manifold of the form Sigma x circle")
    rest = M.factors[:-1]
    sigma_spec = rest[0] if len(rest) == 1 else mf.Product(*rest)
    sc = ctx.scenario
    verdict = hs.einstein_slice_check(sigma_spec, sc.samples, sc.seed, tol, M.factors[-1].radius)
    info = {"einstein": verdict.einstein, "equality": verdict.equality,
            "max_z": verdict.max_z, "max_weyl_gap": verdict.max_weyl_gap}
    expect = p.get("expect_einstein")
    ok = verdict.agrees and (expect is None or bool(expect) == verdict.einstein)
    witness = mf.sample_points(sigma_spec, 1, sc.seed)[0]
    return CheckResult("einstein_slice", "pass" if ok else "fail", 0.0 if ok else 1.0, tol,
                       sc.samples, None if ok else witness.tolist(), info)


def check_transformation_law(ctx, p, tol):
    M = ctx.manifold
    if "u" not in p:
        raise ConfigurationError("transformation_law needs a 'u' expression")
    u = Field(p["u"], M.dim)
    f = ctx.weighted if ctx.scenario.weighted_function is not None else cf.ZeroFunction()
    X = ctx.points[: int(p.get("points", min(16, ctx.scenario.samples)))]
    rec = cf.transformation_law_check(M, f, u, X, float(p.get("step", 1e-3)))
    info = {"step": rec.step}
    if "steps" in p:
        res, orders = cf.convergence_order(M, f, u, X, [float(s) for s in p["steps"]])
        info.update(residuals=res, orders=orders)
    v, x = _worst(rec.residual, X)
    return _result("transformation_law", v, tol, len(X), x, info)


def check_stability(ctx, p, tol):
    h = ctx.hypersurface
    if h.sigma_periods is None:
        raise ConfigurationError("stability needs a hypersurface with a periodic chart")
    grid = sp.make_grid(hs.InducedMetric(h), ctx.scenario.resolution, h.sigma_periods)
    ff = hs.fundamental_forms(h, grid.nodes)
    amb = mf.curvature_batch(h.ambient, ff.induced.ambient_points)
    N = ff.induced.normal
    q = np.einsum("...ij,...i,...j->...", amb.ric, N, N) + ff.B_norm2
    jac = sp.jacobi_stability(sp.build_laplacian(grid), q, tol)
    i = int(np.argmin(jac.eigenpair.u))
    return _result("stability", max(0.0, -jac.mu), tol, grid.size, grid.nodes[i], {
        "mu_jacobi": jac.mu, "stable": jac.stable, "max_H": float(np.max(np.abs(ff.H))),
        "convention": sp.SIGN_CONVENTION})


def _theorem(ctx, p, tol, mode):
    h = ctx.hypersurface
    f = ctx.weighted if ctx.scenario.weighted_function is not None else cf.ZeroFunction()
    inject = Field(p["sigma_inject"], h.dim) if "sigma_inject" in p else None
    sc = ctx.scenario
    out = sp.theorem_pipeline(h, f, mode, sc.resolution, sc.samples, sc.seed, inject)
    details = {k: v for k, v in out.details.items() if k != "u_field"}
    info = {"case": out.case, "mu": out.mu, "tol_lambda": out.tol_lambda,
            "details": details, "convention": out.convention}
    if out.case in ("hypothesis_violated", "precondition_failed"):
        return _result(mode, 0.0, tol, sc.samples, info=info, skip_reason=out.case)
    expect = p.get("expect_case")
    if out.case == "case_i":
        # the rescaled sigma must be strictly positive
        v = max(0.0, -details["min_sigma_rescaled"])
        ok = details["min_sigma_rescaled"] > 0.0
    else:
        v = max(details[k] for k in details if k.startswith("max_") and k.endswith("rigidity"))
        ok = v <= tol
    status = "pass" if ok and (expect is None or expect == out.case) else "fail"
    witness = None if status == "pass" else h.points(ctx.sigma_points[:1])[0].tolist()
    return CheckResult(mode, status, float(v), tol, sc.samples, witness, info)


def check_theorem1(ctx, p, tol):
    return _theorem(ctx, p, tol, "theorem1")


def check_theorem2(ctx, p, tol):
    return _theorem(ctx, p, tol, "theorem2")


def _four(ctx, name):
    if ctx.manifold.dim != 4:
        raise ConfigurationError(f"{name} needs a 4-manifold")
    return ctx.manifold


def check_kahler_relation(ctx, p, tol):
    M = _four(ctx, "kahler_relation")
    X = ctx.points
    data = fd.self_dual_data(M, X, int(p.get("orientation", 1)))
    dev = np.abs(data.s - fd.TWO_SQRT6 * data.w_plus)
    expect = bool(p.get("expect", True))
    v, x = _worst(dev, X)
    holds = v <= tol
    info = {"holds": holds, "expect": expect, "max_deviation": v,
            "W_plus_end_max": float(data.w_plus.max()),
            "W_plus_tensor_max": float(2.0 * data.w_plus.max()),
            "W_plus_eigenvalues_first": data.eig_plus[0].tolist()}
    ok = holds == expect
    return CheckResult("kahler_relation", "pass" if ok else "fail", v, tol, len(X),
                       None if ok else x.tolist(), info)


def check_w_plus_eigenvalues(ctx, p, tol):
    M = _four(ctx, "w_plus_eigenvalues")
    X = ctx.points
    data = fd.self_dual_data(M, X)
    target = np.stack([data.s / 6.0, -data.s / 12.0, -data.s / 12.0], axis=-1)
    dev = np.max(np.abs(data.eig_plus - target), axis=-1)
    v, x = _worst(dev, X)
    return _result("w_plus_eigenvalues", v, tol, len(X), x, {"first": data.eig_plus[0].tolist()})


def check_corollary1(ctx, p, tol):
    M = _four(ctx, "corollary1")
    X = ctx.points
    br = fd.corollary1_classify(M, X, p.get("b2"), tol)
    expect = p.get("expect")
    ok = br.branch != "inconsistent" and (expect is None or expect == br.branch)
    info = {"corollary1": br.to_dict(), "expect": expect}
    return CheckResult("corollary1", "pass" if ok else "fail", 0.0 if ok else 1.0, tol, len(X),
                       None if ok else X[0].tolist(), info)


def check_bochner_parallel(ctx, p, tol):
    M = _four(ctx, "bochner_parallel")
    X = ctx.points
    forms = M.parallel_forms()
    if not forms:
        return _result("bochner_parallel", 0.0, tol, len(X), skip_reason="no parallel forms in the catalog")
    worst, wx, per = 0.0, None, {}
    for name, form in forms:
        rec = fd.bochner_parallel_check(M, form, X)
        per[name] = rec.max_residual
        v, x = _worst(rec.residual, X)
        if wx is None or v > worst:
            worst, wx = v, x
    return _result("bochner_parallel", worst, tol, len(X), wx, {"per_form": per})


CHECKS = {
    "hypothesis": (check_hypothesis, 1e-9),
    "s_equals_2sqrt6_W": (check_s_equals_2sqrt6_W, 1e-5),
    "weyl_vanishes": (check_weyl_vanishes, 1e-8),
    "decomposition": (check_decomposition, 1e-10),
    "restriction_bound": (check_restriction_bound, 1e-10),
    "gauss_identity": (check_gauss_identity, 1e-5),
    "pythagoras": (check_pythagoras, 1e-5),
    "einstein_slice": (check_einstein_slice, 1e-6),
    "transformation_law": (check_transformation_law, 1e-5),
    "stability": (check_stability, 1e-8),
    "theorem1": (check_theorem1, 1e-8),
    "theorem2": (check_theorem2, 1e-8),
    "kahler_relation": (check_kahler_relation, 1e-5),
    "w_plus_eigenvalues": (check_w_plus_eigenvalues, 1e-5),
    "corollary1": (check_corollary1, 1e-6),
    "bochner_parallel": (check_bochner_parallel, 1e-5),
}


def run_check(ctx, spec):
    if spec.name not in CHECKS:
        return CheckResult(spec.name, "error", None, spec.tol, 0, None,
                           {"error": f"unknown check {spec.name!r}", "available": sorted(CHECKS)})
    fn, default_tol = CHECKS[spec.name]
    tol = default_tol if spec.tol is None else spec.tol
    try:
        res = fn(ctx, spec.params, tol)
    except (CurvlabError, ValueError, ArithmeticError) as exc:
        kind = "precondition" if isinstance(exc, PreconditionError) else type(exc).__name__
        return CheckResult(spec.name, "error", None, tol, 0, None, {"error": str(exc), "kind": kind})
    res.name = spec.name
    return res


def run_scenario(source):
    """Run every requested check in declared order and assemble the report."""
    sc = load_scenario(source)
    ctx = Context(sc)
    results = [run_check(ctx, c) for c in sc.checks]
    meta = {"seed": sc.seed, "resolution": sc.resolution, "samples": sc.samples,
            "version": __version__, "convention": sp.SIGN_CONVENTION,
            "sff_sign": "B(X,Y) = g(nabla_X N, Y), H = trace B",
            "weyl_norms": "End(Lambda^2) norm = tensor norm / 2"}
    report = ScenarioReport(sc.to_dict(), results, meta)
    cor = [r.info["corollary1"] for r in results if r.name == "corollary1" and "corollary1" in r.info]
    if cor:
        report.corollary1 = cor[0]
    return report
