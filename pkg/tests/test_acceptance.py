"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; conftest prints the collected lines
in the terminal summary.  Run directly with ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np

from curvlab import conformal as cf
from curvlab import fourdim as fd
from curvlab import hypersurface as hs
from curvlab import manifolds as mf
from curvlab import spectral as sp
from curvlab import tensor_core as tc

RESULTS = {}


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def test_c01_cp2_circle_equality():
    t0 = time.perf_counter()
    spec = mf.Product(mf.FubiniStudyCP2(), mf.CircleFactor())
    X = mf.sample_points(spec, 1000, seed=0)
    b = mf.curvature_batch(spec, X)
    rel = np.max(np.abs(b.s - fd.TWO_SQRT6 * b.weyl_end_norm()) / b.s)
    dt = time.perf_counter() - t0
    record(1, rel <= 1e-5 and dt <= 30 and np.allclose(b.s, 24.0, rtol=1e-8),
           f"max|s - 2sqrt6|W|_End|/s = {rel:.2e} (<= 1e-5), {dt:.1f}s (<= 30s)")


def test_c02_conformally_flat_products():
    worst = {}
    for label, spec in [("S4xS1", mf.Product(mf.RoundSphere(4), mf.CircleFactor())),
                        ("T3xS1", mf.Product(mf.FlatTorus.standard(3), mf.CircleFactor())),
                        ("T5", mf.FlatTorus.standard(5))]:
        b = mf.curvature_batch(spec, mf.sample_points(spec, 1000, seed=1))
        worst[label] = float(np.max(b.weyl_norm()))
    v = max(worst.values())
    record(2, v <= 1e-8, "max|W| " + ", ".join(f"{k}={w:.1e}" for k, w in worst.items()) + " (<= 1e-8)")


def test_c03_restriction_fuzz():
    rng = np.random.default_rng(3)
    violations, worst, count = 0, -np.inf, 0
    for _ in range(10_000):
        m = int(rng.integers(3, 7))
        rank = int(rng.integers(1, 5))
        k = int(rng.integers(1, m))
        g = tc.random_spd(rng, m)
        Q, _ = np.linalg.qr(rng.standard_normal((m, k)))
        F = (tc.orthonormal_frame(g) @ Q).T
        S = rng.standard_normal((m,) * rank)
        excess = np.linalg.norm(tc.restrict_tensor(S, F, g)) - tc.norm(S, g)
        worst = max(worst, excess)
        violations += excess > 1e-12
        count += 1
    record(3, violations == 0 and count == 10_000,
           f"{count} pairs, {violations} violations of |S~| <= |S| + 1e-12 (max excess {worst:.1e})")


def test_c04_decomposition_suite():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(10_000):
        m = int(rng.integers(3, 7))
        g = tc.random_spd(rng, m)
        R = tc.random_curvature(rng, m)
        d = tc.decompose_curvature(R, g)
        nR2 = tc.inner(R, R, g)
        parts = [d.scalar_part, d.ricci_part, d.W]
        res = [np.sqrt(tc.inner(sum(parts) - R, sum(parts) - R, g) / nR2)]
        res += [abs(tc.inner(parts[a], parts[b], g)) / nR2 for a, b in ((0, 1), (0, 2), (1, 2))]
        ginv = np.linalg.inv(g)
        trace = np.einsum("ik,ijkl->jl", ginv, d.W)
        res.append(np.sqrt(tc.inner(trace, trace, g) / nR2))
        hg = tc.kulkarni_nomizu(tc.random_symmetric(rng, m), g)
        res.append(abs(tc.inner(d.W, hg, g)) / np.sqrt(nR2 * tc.inner(hg, hg, g)))
        worst = max(worst, max(res))
    record(4, worst <= 1e-10, f"10^4 tensors, max relative residual {worst:.1e} (<= 1e-10)")


def test_c05_pythagoras_and_einstein_slices():
    cases = [("S4", mf.RoundSphere(4), True),
             ("CP2", mf.FubiniStudyCP2(), True),
             ("S2(1)xS2(2)", mf.Product(mf.RoundSphere(2, 1.0), mf.RoundSphere(2, 2.0)), False)]
    ok, parts = True, []
    for label, sigma, einstein in cases:
        h = hs.slice_hypersurface(sigma)
        Q = mf.sample_points(sigma, 64, seed=5)
        rec = hs.pullback_compare(h, Q, "weyl")
        res = float(np.max(rec.pythagoras_residual))
        verdict = hs.einstein_slice_check(sigma, samples=64, seed=5)
        strict = bool(np.all(rec.intrinsic_norm < rec.restricted_norm - 1e-6))
        right = verdict.agrees and verdict.einstein == einstein and (einstein or strict)
        ok &= res <= 1e-5 and right
        parts.append(f"{label}: residual {res:.1e}, einstein={verdict.einstein}, equality={verdict.equality}")
    record(5, ok, "; ".join(parts))


def test_c06_transformation_law():
    cases = [("T3", mf.FlatTorus.standard(3), lambda X: 1 + 0.05 * np.cos(X[..., 0])),
             ("S3 chart", mf.RoundSphere(3), lambda X: 1 + 0.1 * np.sin(X[..., 0]) * np.cos(X[..., 1]))]
    ok, parts = True, []
    for label, spec, u in cases:
        X = mf.sample_points(spec, 8, seed=6)
        fine = cf.transformation_law_check(spec, cf.ZeroFunction(), u, X, 1e-3).max_residual
        res, orders = cf.convergence_order(spec, cf.ZeroFunction(), u, X, [0.1, 0.05, 0.025])
        ok &= fine <= 1e-5 and min(orders) >= 3.5
        parts.append(f"{label}: residual {fine:.1e}, orders {', '.join(f'{o:.2f}' for o in orders)}")
    record(6, ok, "; ".join(parts) + " (<= 1e-5, order >= 3.5)")


def test_c07_spectral():
    circle = sp.build_laplacian(sp.make_grid(None, 256, [2 * np.pi]))
    vals = sp.lowest_eigenvalues(circle, k=5)
    err = float(np.max(np.abs(vals - [0, 1, 1, 4, 4])))
    op = sp.build_laplacian(sp.make_grid(None, (12, 12), [2 * np.pi, 2 * np.pi]))
    rng = np.random.default_rng(7)
    V = rng.normal(size=op.grid.size)
    shift_err = abs(sp.lowest_eigenpair(op, V + 2.5).mu - sp.lowest_eigenpair(op, V).mu - 2.5)
    negative = 0
    for _ in range(100):
        V = rng.normal(scale=rng.uniform(0.1, 20.0), size=op.grid.size)
        negative += int(np.any(sp.lowest_eigenpair(op, V).u <= 0))
    record(7, err <= 1e-3 and shift_err <= 1e-10 and negative == 0,
           f"T1 N=256 eig error {err:.1e} (<= 1e-3), shift error {shift_err:.1e} (<= 1e-10), "
           f"{negative}/100 non-positive eigenfunctions")


def test_c08_theorem_pipeline():
    h = hs.slice_hypersurface(mf.FlatTorus.standard(3))
    a = sp.theorem_pipeline(h, cf.ZeroFunction(), resolution=16, samples=64)
    rig = max(a.details[k] for k in ("max_intrinsic_rigidity", "max_ambient_rigidity", "max_T_gap"))
    inject = lambda Q: 1 + 0.5 * np.sin(Q[..., 0]) + 0.3 * np.cos(Q[..., 1])  # noqa: E731
    b = sp.theorem_pipeline(h, cf.ZeroFunction(), resolution=16, samples=64, sigma_inject=inject)
    rng = np.random.default_rng(8)
    worst = np.inf
    for trial in range(40):
        dim = 2 + trial % 2
        res = 10 if dim == 2 else 8
        op = sp.build_laplacian(sp.make_grid(None, res, [2 * np.pi] * dim))
        q = rng.normal(scale=rng.uniform(0.1, 10.0), size=op.grid.size)
        slack = rng.uniform(0.0, 3.0, size=op.grid.size) * rng.integers(0, 2)
        worst = min(worst, sp.soundness_trial(op, q, slack, m=3 + trial % 3))
    ok = (a.case == "case_ii" and rig <= 1e-8 and b.case == "case_i"
          and b.details["min_sigma_rescaled"] > 0 and worst >= -1e-8)
    record(8, ok, f"(a) {a.case}, rigidity {rig:.1e}; (b) {b.case}, min rescaled sigma "
                  f"{b.details.get('min_sigma_rescaled', float('nan')):.3f}; (c) min mu {worst:.1e} (>= -1e-8)")


def test_c09_sharp_w_plus_bound():
    rng = np.random.default_rng(9)
    violations = 0
    for _ in range(10_000):
        A = tc.random_symmetric(rng, 3) * rng.uniform(0.01, 100.0)
        A -= np.trace(A) / 3 * np.eye(3)
        w = rng.standard_normal(3)
        lhs, rhs = tc.tracefree3_bound_check(A, w, atol=1e-9)
        violations += lhs > rhs + 1e-12 * max(1.0, rhs)
    lhs, rhs = tc.tracefree3_bound_check(np.diag([2.0, -1.0, -1.0]), np.array([1.0, 0.0, 0.0]))
    spec = mf.FubiniStudyCP2()
    data = fd.self_dual_data(spec, mf.sample_points(spec, 64, seed=9))
    target = np.stack([data.s / 6, -data.s / 12, -data.s / 12], axis=-1)
    eig_err = float(np.max(np.abs(data.eig_plus - target)))
    record(9, violations == 0 and abs(lhs - rhs) <= 1e-12 and eig_err <= 1e-5,
           f"{violations} violations in 10^4, equality gap {abs(lhs - rhs):.1e}, "
           f"CP2 W+ eigenvalue error {eig_err:.1e} (<= 1e-5)")


def test_c10_corollary_classifier():
    branches = {}
    for label, spec in [("S4", mf.RoundSphere(4)), ("CP2", mf.FubiniStudyCP2()), ("T4", mf.FlatTorus.standard(4))]:
        branches[label] = fd.corollary1_classify(spec, mf.sample_points(spec, 64, seed=10)).branch
    cp2 = mf.FubiniStudyCP2()
    (_, kahler), = cp2.parallel_forms()
    boch = fd.bochner_parallel_check(cp2, kahler, mf.sample_points(cp2, 64, seed=10)).max_residual
    ok = (branches == {"S4": "strict_inequality_somewhere", "CP2": "self_dual_kahler", "T4": "self_dual_kahler"}
          and boch <= 1e-5)
    record(10, ok, ", ".join(f"{k} -> {v}" for k, v in branches.items()) + f"; Bochner residual {boch:.1e}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
