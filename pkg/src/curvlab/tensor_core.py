"""Pointwise multilinear algebra over a fixed inner product.

Tensors are plain numpy arrays of covariant components.  Any leading axes
beyond the tensor's own are treated as batch axes where a function says so.
Norms are full index sums in a g-orthonormal frame (no symmetry factor).
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionError, FrameError, MetricError, ValidationError

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def check_metric(g, atol=1e-14):
    """Return ``g`` as a float array after checking symmetry and definiteness."""
    g = np.asarray(g, dtype=float)
    if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
        raise DimensionError(f"metric must be square, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise MetricError("metric has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > atol * scale:
        raise MetricError("metric is not symmetric")
    if np.min(np.linalg.eigvalsh(g)) <= 0.0:
        raise MetricError("metric is not positive definite")
    return g


def orthonormal_frame(g):
    """Gram-Schmidt frame of the coordinate basis, in coordinate order.

    Returns E with ``E.T @ g @ E = I``; column a is the a-th frame vector.
    E is upper triangular with positive diagonal, so orientation is kept.
    """
    g = check_metric(g)
    L = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def to_frame(A, E):
    """Components of a covariant tensor on the columns of ``E`` (every slot)."""
    A = np.asarray(A, dtype=float)
    for _ in range(A.ndim):
        A = np.tensordot(A, E, axes=([0], [0]))
    return A


def _check_pair(A, B, g):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    m = g.shape[-1]
    if any(d != m for d in A.shape):
        raise DimensionError(f"tensor shape {A.shape} incompatible with dim {m}")
    return A, B


def inner(A, B, g):
    """Full contraction <A, B>_g with g^{-1} on every slot."""
    g = check_metric(g)
    A, B = _check_pair(A, B, g)
    E = orthonormal_frame(g)
    return float(np.sum(to_frame(A, E) * to_frame(B, E)))


def norm(A, g):
    return float(np.sqrt(max(inner(A, A, g), 0.0)))


def inner_batch(A, B, ginv, rank):
    """Batched <A, B> given inverse metrics ``ginv`` of shape (..., m, m)."""
    idx_a = _LETTERS[:rank]
    idx_b = _LETTERS[rank:2 * rank]
    raises = ",".join(f"...{p}{q}" for p, q in zip(idx_a, idx_b))
    expr = f"...{idx_a},...{idx_b},{raises}->..."
    return np.einsum(expr, A, B, *([ginv] * rank), optimize=True)


def kulkarni_nomizu(h, k, atol=1e-12):
    """(h o k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il.

    Accepts leading batch axes.
    """
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if h.shape != k.shape or h.shape[-1] != h.shape[-2]:
        raise DimensionError(f"incompatible shapes {h.shape}, {k.shape}")
    for t in (h, k):
        scale = max(1.0, float(np.max(np.abs(t))) if t.size else 1.0)
        if np.max(np.abs(t - np.swapaxes(t, -1, -2)), initial=0.0) > atol * scale:
            raise ValidationError("Kulkarni-Nomizu factors must be symmetric")
    return (
        np.einsum("...ik,...jl->...ijkl", h, k)
        + np.einsum("...jl,...ik->...ijkl", h, k)
        - np.einsum("...il,...jk->...ijkl", h, k)
        - np.einsum("...jk,...il->...ijkl", h, k)
    )


def curvature_symmetry_defect(R):
    """Largest violation of the algebraic curvature symmetries (batched max)."""
    R = np.asarray(R, dtype=float)
    sw = lambda *ax: np.moveaxis(R, [-4, -3, -2, -1], list(ax))  # noqa: E731
    defects = [
        R + sw(-3, -4, -2, -1),
        R + sw(-4, -3, -1, -2),
        R - sw(-2, -1, -4, -3),
        # first Bianchi: R_ijkl + R_iklj + R_iljk
        R + np.einsum("...iklj->...ijkl", R) + np.einsum("...iljk->...ijkl", R),
    ]
    return max(float(np.max(np.abs(d))) for d in defects)


def check_curvature(R, atol=1e-12):
    R = np.asarray(R, dtype=float)
    if R.ndim < 4 or len(set(R.shape[-4:])) != 1:
        raise DimensionError(f"curvature tensor must be m^4, got {R.shape}")
    scale = max(1.0, float(np.max(np.abs(R))))
    if curvature_symmetry_defect(R) > atol * scale:
        raise ValidationError("tensor violates curvature symmetries")
    return R


def ricci_parts(R, g):
    """Ricci tensor (contraction on slots 1,3), scalar curvature, traceless Ricci.

    Batched over leading axes of R and g.
    """
    R = np.asarray(R, dtype=float)
    g = np.asarray(g, dtype=float)
    ginv = np.linalg.inv(g)
    m = g.shape[-1]
    ric = np.einsum("...ik,...ijkl->...jl", ginv, R)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    s = np.einsum("...jl,...jl->...", ginv, ric)
    z = ric - (s / m)[..., None, None] * g
    return ric, s, z


@dataclass
class CurvDecomp:
    """R = scalar_part + ricci_part + W; ``S_part`` is the first two summed."""

    dim: int
    s: float
    ric: np.ndarray
    z: np.ndarray
    scalar_part: np.ndarray
    ricci_part: np.ndarray
    W: np.ndarray
    weyl_trivial: bool = False

    @property
    def S_part(self):
        return self.scalar_part + self.ricci_part


def decompose_curvature(R, g, validate=True):
    """Orthogonal split of a curvature tensor at intrinsic dimension m >= 3."""
    g = check_metric(g) if validate else np.asarray(g, dtype=float)
    R = check_curvature(R, atol=1e-10) if validate else np.asarray(R, dtype=float)
    m = g.shape[-1]
    if m < 3:
        raise DimensionError(f"curvature decomposition needs dim >= 3, got {m}")
    ric, s, z = ricci_parts(R, g)
    gg = kulkarni_nomizu(g, g)
    scalar_part = s / (2.0 * m * (m - 1)) * gg
    ricci_part = kulkarni_nomizu(z, g, atol=1e-8) / (m - 2)
    if m == 3:
        W = np.zeros_like(R)
    else:
        W = R - scalar_part - ricci_part
    return CurvDecomp(m, float(s), ric, z, scalar_part, ricci_part, W, m == 3)


def restrict_tensor(S, frame, g, atol=1e-10):
    """Components of S on k g-orthonormal vectors (rows of ``frame``).

    The result lives on the span with the identity metric.
    """
    g = check_metric(g)
    S = np.asarray(S, dtype=float)
    F = np.atleast_2d(np.asarray(frame, dtype=float))
    m = g.shape[0]
    if F.shape[1] != m or F.shape[0] > m:
        raise DimensionError(f"frame shape {F.shape} incompatible with dim {m}")
    if any(d != m for d in S.shape):
        raise DimensionError(f"tensor shape {S.shape} incompatible with dim {m}")
    gram = F @ g @ F.T
    if np.max(np.abs(gram - np.eye(F.shape[0]))) > atol:
        raise FrameError("frame is not g-orthonormal")
    return to_frame(S, F.T)


def lambda2_pairs(m):
    return list(combinations(range(m), 2))


def end_lambda2_matrix(W, g):
    """Matrix of W acting on 2-forms, in the orthonormal basis e^a ^ e^b (a<b).

    With <a, b> = 1/2 a_ij b^ij and (W a)_ij = 1/2 W_ijkl a^kl the entry for
    the pair of basis forms (ab), (cd) reduces to the frame component W_abcd.
    """
    g = check_metric(g)
    E = orthonormal_frame(g)
    Wf = to_frame(W, E)
    pairs = lambda2_pairs(g.shape[0])
    M = np.empty((len(pairs), len(pairs)))
    for p, (a, b) in enumerate(pairs):
        for q, (c, d) in enumerate(pairs):
            M[p, q] = Wf[a, b, c, d]
    return M


def end_lambda2_norm(W, g):
    return float(np.linalg.norm(end_lambda2_matrix(W, g)))


def tracefree3_bound_check(A, omega, atol=1e-12):
    """Return (A(w, w), sqrt(2/3) |A| |w|^2) for a trace-free symmetric 3x3 A."""
    A = np.asarray(A, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if A.shape != (3, 3) or omega.shape != (3,):
        raise DimensionError("expected a 3x3 operator and a 3-vector")
    if np.max(np.abs(A - A.T)) > atol:
        raise ValidationError("operator is not symmetric")
    if abs(np.trace(A)) > atol * max(1.0, np.max(np.abs(A))):
        raise ValidationError("operator is not trace-free")
    lhs = float(omega @ A @ omega)
    rhs = float(np.sqrt(2.0 / 3.0) * np.linalg.norm(A) * (omega @ omega))
    return lhs, rhs


# random generators used by fuzz suites


def random_symmetric(rng, m, size=()):
    X = rng.standard_normal(tuple(size) + (m, m))
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def random_spd(rng, m, size=(), spread=0.5):
    X = rng.standard_normal(tuple(size) + (m, m)) * spread
    return np.eye(m) + np.einsum("...ij,...kj->...ik", X, X)


def project_curvature(T):
    """Project an arbitrary 4-tensor onto algebraic curvature tensors."""
    T = np.asarray(T, dtype=float)
    T = 0.5 * (T - np.einsum("...jikl->...ijkl", T))
    T = 0.5 * (T - np.einsum("...ijlk->...ijkl", T))
    T = 0.5 * (T + np.einsum("...klij->...ijkl", T))
    # with the pair symmetries in place the Bianchi sum is totally skew
    b = (T + np.einsum("...iklj->...ijkl", T) + np.einsum("...iljk->...ijkl", T)) / 3.0
    return T - b


def random_curvature(rng, m, size=()):
    return project_curvature(rng.standard_normal(tuple(size) + (m,) * 4))
