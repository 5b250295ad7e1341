"""Self-dual machinery in dimension four.

2-forms carry the inner product <a, b> = 1/2 a_ij b^ij.  Operators on
Lambda^2 are written in the orthonormal basis e^a ^ e^b (a < b) of a
Gram-Schmidt frame, ordered (01, 02, 03, 12, 13, 23).  Orientation +1 is
the chart coordinate order; -1 reverses it.
"""

from dataclasses import dataclass

import numpy as np

from . import manifolds as mf
from . import tensor_core as tc
from .errors import DimensionError, PreconditionError, ValidationError

TWO_SQRT6 = 2.0 * np.sqrt(6.0)
_PAIRS = tc.lambda2_pairs(4)
_R2 = 1.0 / np.sqrt(2.0)
# columns: orthonormal bases of the +1 / -1 eigenspaces of * for orientation +1
_P_SD = _R2 * np.array([
    [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1], [0, -1, 0], [1, 0, 0],
], dtype=float)
_P_ASD = _R2 * np.array([
    [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, -1], [0, 1, 0], [-1, 0, 0],
], dtype=float)


def _levi_civita4():
    eps = np.zeros((4,) * 4)
    from itertools import permutations

    for perm in permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


_EPS = _levi_civita4()


def _check4(g):
    g = tc.check_metric(g)
    if g.shape[-1] != 4:
        raise DimensionError(f"self-duality needs dimension 4, got {g.shape[-1]}")
    return g


def _orient(orientation):
    return 1.0 if orientation >= 0 else -1.0


def hodge_star(omega, g, orientation=1):
    """* on 2-forms: in an oriented orthonormal frame (*w)_ab = 1/2 eps_abcd w_cd."""
    g = _check4(g)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (4, 4) or np.max(np.abs(omega + omega.T)) > 1e-14 * max(1.0, np.max(np.abs(omega))):
        raise ValidationError("expected an antisymmetric 4x4 array")
    E = tc.orthonormal_frame(g)
    wf = E.T @ omega @ E
    sf = 0.5 * _orient(orientation) * np.einsum("abcd,cd->ab", _EPS, wf)
    Einv = np.linalg.inv(E)
    return Einv.T @ sf @ Einv


def form_norm2(omega, g):
    return 0.5 * tc.inner(omega, omega, g)


def hodge_split(omega, g, orientation=1):
    star = hodge_star(omega, g, orientation)
    return 0.5 * (omega + star), 0.5 * (omega - star)


def _projectors(orientation):
    return (_P_SD, _P_ASD) if orientation >= 0 else (_P_ASD, _P_SD)


@dataclass
class WeylSplit:
    Wplus: np.ndarray
    Wminus: np.ndarray
    basis_plus: np.ndarray
    basis_minus: np.ndarray
    off_block: np.ndarray
    frame: np.ndarray
    orientation: int

    @property
    def norm_plus(self):
        return float(np.linalg.norm(self.Wplus))

    @property
    def norm_minus(self):
        return float(np.linalg.norm(self.Wminus))

    def reassemble(self):
        """Covariant Weyl tensor rebuilt from the two blocks."""
        M = self.basis_plus @ self.Wplus @ self.basis_plus.T + self.basis_minus @ self.Wminus @ self.basis_minus.T
        Wf = np.zeros((4,) * 4)
        for p, (a, b) in enumerate(_PAIRS):
            for q, (c, d) in enumerate(_PAIRS):
                v = M[p, q]
                Wf[a, b, c, d] = v
                Wf[b, a, c, d] = -v
                Wf[a, b, d, c] = -v
                Wf[b, a, d, c] = v
        return tc.to_frame(Wf, np.linalg.inv(self.frame))


def weyl_split(W, g, orientation=1, atol=1e-8):
    """W = W+ + W-: blocks of W on self-dual and anti-self-dual 2-forms."""
    g = _check4(g)
    W = tc.check_curvature(W, atol=1e-9)
    ric, _, _ = tc.ricci_parts(W, g)
    if np.max(np.abs(ric)) > atol * max(1.0, float(np.max(np.abs(W)))):
        raise ValidationError("input has a nonzero Ricci contraction; not a Weyl tensor")
    M = tc.end_lambda2_matrix(W, g)
    Pp, Pm = _projectors(orientation)
    Wp = Pp.T @ M @ Pp
    Wm = Pm.T @ M @ Pm
    return WeylSplit(0.5 * (Wp + Wp.T), 0.5 * (Wm + Wm.T), Pp, Pm, Pp.T @ M @ Pm,
                     tc.orthonormal_frame(g), 1 if orientation >= 0 else -1)


def _form_vector(omega, g):
    """Coefficients of omega in the orthonormal e^a ^ e^b basis."""
    E = tc.orthonormal_frame(g)
    wf = E.T @ omega @ E
    return np.array([wf[a, b] for a, b in _PAIRS])


def covariant_derivative_form(omega, d_omega, gamma):
    """(nabla_c w)_ab = d_c w_ab - Gamma^d_ca w_db - Gamma^d_cb w_ad (batched)."""
    return (d_omega
            - np.einsum("...dca,...db->...cab", gamma, omega)
            - np.einsum("...dcb,...ad->...cab", gamma, omega))


def certify_parallel(spec, form, X, tol=1e-8):
    """Largest |nabla w| component over the points; raises if above ``tol``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    g = spec.metric(X)
    gamma = mf.christoffel(g, spec.metric_d1(X))
    omega, d_omega = form(X)
    worst = float(np.max(np.abs(covariant_derivative_form(omega, d_omega, gamma))))
    if worst > tol:
        raise PreconditionError(f"form is not parallel (max |nabla w| = {worst:.3e})")
    return worst


def constant_form(omega):
    return mf._constant_form(np.asarray(omega, dtype=float))


@dataclass
class BochnerRecord:
    residual: np.ndarray
    w_plus_term: np.ndarray
    scalar_term: np.ndarray
    nabla_max: float

    @property
    def max_residual(self):
        return float(np.max(self.residual))


def bochner_parallel_check(spec, form, X, orientation=1, parallel_tol=1e-8):
    """For parallel w: residual of 0 = -2 W+-(w+-, w+-) + (s/3)|w+-|^2 on each half."""
    if spec.dim != 4:
        raise DimensionError("Bochner check needs a 4-manifold")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    nabla = certify_parallel(spec, form, X, parallel_tol)
    curv = mf.curvature_batch(spec, X)
    omega, _ = form(X)
    Pp, Pm = _projectors(orientation)
    res, wterm, sterm = [], [], []
    for i in range(len(X)):
        M = tc.end_lambda2_matrix(curv.W[i], curv.g[i])
        v = _form_vector(omega[i], curv.g[i])
        worst = (0.0, 0.0, 0.0)
        for P in (Pp, Pm):
            vp = P @ (P.T @ v)
            wt = -2.0 * float(vp @ M @ vp)
            st = curv.s[i] / 3.0 * float(vp @ vp)
            if abs(wt + st) >= abs(worst[0]) and (vp @ vp) > 0:
                worst = (wt + st, wt, st)
        res.append(abs(worst[0]))
        wterm.append(worst[1])
        sterm.append(worst[2])
    return BochnerRecord(np.array(res), np.array(wterm), np.array(sterm), nabla)


@dataclass
class PointwiseSelfDual:
    s: np.ndarray
    w_plus: np.ndarray     # End norms
    w_minus: np.ndarray
    w_full: np.ndarray
    w_full_tensor: np.ndarray
    eig_plus: np.ndarray   # sorted descending, (k, 3)


def self_dual_data(spec, X, orientation=1):
    if spec.dim != 4:
        raise DimensionError("needs a 4-manifold")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    curv = mf.curvature_batch(spec, X)
    wp, wm, eig = [], [], []
    for i in range(len(X)):
        split = weyl_split(curv.W[i], curv.g[i], orientation)
        wp.append(split.norm_plus)
        wm.append(split.norm_minus)
        eig.append(np.sort(np.linalg.eigvalsh(split.Wplus))[::-1])
    return PointwiseSelfDual(curv.s, np.array(wp), np.array(wm), curv.weyl_end_norm(),
                             curv.weyl_norm(), np.array(eig))


@dataclass
class KahlerVerdict:
    holds: bool
    max_deviation: float
    s_range: tuple
    tol: float


def kahler_relation_check(spec, X, tol=1e-5, orientation=1):
    """max |s - 2 sqrt6 |W+|_End| over the samples."""
    data = self_dual_data(spec, X, orientation)
    dev = float(np.max(np.abs(data.s - TWO_SQRT6 * data.w_plus)))
    return KahlerVerdict(dev <= tol, dev, (float(np.min(data.s)), float(np.max(data.s))), tol)


@dataclass
class Corollary1Branch:
    branch: str  # "strict_inequality_somewhere" | "self_dual_kahler" | "inconsistent"
    min_margin: float
    max_margin: float
    max_w_minus: float
    orientation: int
    witness: str | None
    notes: list

    def to_dict(self):
        return {"branch": self.branch, "min_margin": self.min_margin, "max_margin": self.max_margin,
                "max_w_minus": self.max_w_minus, "orientation": self.orientation,
                "witness": self.witness, "notes": list(self.notes),
                "surrogate": "pointwise curvature + catalog parallel-form witness"}


def corollary1_classify(spec, X, b2=None, tol=1e-6, parallel_tol=1e-8):
    """Branch of the 4-dimensional dichotomy from measured s - 2 sqrt6 |W|, W-, witnesses."""
    notes = []
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pos = self_dual_data(spec, X, 1)
    margin = pos.s - TWO_SQRT6 * pos.w_full
    lo, hi = float(np.min(margin)), float(np.max(margin))
    if lo < -tol:
        notes.append("s < 2 sqrt6 |W| at some sample")
        return Corollary1Branch("inconsistent", lo, hi, float(np.max(pos.w_minus)), 1, None, notes)
    if hi > tol:
        if b2:
            notes.append(f"b2 = {b2} supplied but strict inequality measured")
        return Corollary1Branch("strict_inequality_somewhere", lo, hi, float(np.max(pos.w_minus)), 1, None, notes)
    # equality everywhere: need s >= 0, a self-dual orientation and a parallel witness
    if np.min(pos.s) < -tol:
        notes.append("negative scalar curvature")
    best = None
    for orientation in (1, -1):
        data = pos if orientation == 1 else self_dual_data(spec, X, -1)
        wm = float(np.max(data.w_minus))
        if wm > tol:
            continue
        witness = _kahler_witness(spec, X, orientation, parallel_tol)
        if witness is not None:
            best = (orientation, wm, witness)
            break
        if best is None:
            best = (orientation, wm, None)
    if best is None:
        notes.append("W- nonzero for both orientations")
        return Corollary1Branch("inconsistent", lo, hi, float(np.max(pos.w_minus)), 1, None, notes)
    orientation, wm, witness = best
    if witness is None:
        notes.append("no certified parallel form in the catalog")
        return Corollary1Branch("inconsistent", lo, hi, wm, orientation, None, notes)
    if np.min(pos.s) < -tol:
        return Corollary1Branch("inconsistent", lo, hi, wm, orientation, witness, notes)
    return Corollary1Branch("self_dual_kahler", lo, hi, wm, orientation, witness, notes)


def _kahler_witness(spec, X, orientation, tol):
    """Name of a catalog parallel form with nonzero self-dual part, if any."""
    for name, form in spec.parallel_forms():
        try:
            certify_parallel(spec, form, X, tol)
        except PreconditionError:
            continue
        omega, _ = form(X[:1])
        g = spec.metric(X[:1])[0]
        plus, _ = hodge_split(omega[0], g, orientation)
        if form_norm2(plus, g) > 1e-12:
            return name
    return None
