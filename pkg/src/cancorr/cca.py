"""Linear canonical correlation analysis.

Given paired data X (d1 x n) and Y (d2 x n), sample per column, CCA
maximizes trace(Wx' X Y' Wy) subject to Wx' X X' Wx = I and
Wy' Y Y' Wy = I.  The solver route here works through reduced SVDs
X = U1 S1 Q1', Y = V1 S2 Q2' and the SVD of the coupling Q1' Q2, which
yields the exact solution, the full solution family, and an equivalent
least-squares formulation whose l1-penalized variant gives sparse CCA.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DegenerateData, InvalidInput, NumericalFailure
from .evaluation import pearson_rows
from .fpc import FpcConfig, FpcResult, L1LsProblem, fpc_solve
from .matops import (
    DEFAULT_RANK_TOL,
    ThinSvd,
    _flip_signs,
    as_matrix,
    center_columns,
    pinv_times,
    thin_svd,
)

GROUP_TOL = 1e-8


@dataclass(frozen=True)
class CcaFactorization:
    """Cached factorizations of a centered data pair.

    ``coupling`` is the rank-truncated SVD of Q1' Q2; ``p1``, ``p2`` and
    ``coupling_values`` keep the full orthogonal factors needed by the
    solution-family constructor.  ``groups`` holds the multiplicities of
    the distinct nonzero coupling singular values.
    """

    svd_x: ThinSvd
    svd_y: ThinSvd
    coupling: ThinSvd
    p1: np.ndarray
    p2: np.ndarray
    coupling_values: np.ndarray
    r: int
    s: int
    m: int
    t: int
    groups: tuple
    x_c: np.ndarray
    y_c: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray


@dataclass(frozen=True)
class CcaTargets:
    """Least-squares targets; columns scale like 1/sigma_i."""

    tx: np.ndarray
    ty: np.ndarray


@dataclass
class CcaModel:
    """A trained pair of transforms with per-direction correlations.

    ``correlations`` holds the coupling singular values for exact and
    least-squares models, and empirical training Pearson correlations
    for sparse models (whose transforms no longer satisfy the
    orthogonality constraints exactly).
    """

    wx: np.ndarray
    wy: np.ndarray
    correlations: np.ndarray
    l: int
    mean_x: np.ndarray
    mean_y: np.ndarray
    zero_columns_x: tuple = ()
    zero_columns_y: tuple = ()
    fpc_x: FpcResult | None = None
    fpc_y: FpcResult | None = None


class OrthBound(NamedTuple):
    tight: float
    loose: float


def _group_multiplicities(values, tol=GROUP_TOL):
    """Multiplicities of distinct values in a nonincreasing positive list."""
    if values.size == 0:
        return ()
    groups = [1]
    scale = values[0]
    for prev, cur in zip(values[:-1], values[1:]):
        if prev - cur <= tol * scale:
            groups[-1] += 1
        else:
            groups.append(1)
    return tuple(groups)


def factorize(x, y, rank_tol=DEFAULT_RANK_TOL):
    """Center both views and compute all CCA factorizations."""
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise InvalidInput(
            f"x and y must share the sample count, got {x.shape[1]} and {y.shape[1]}"
        )
    if x.shape[1] < 2:
        raise InvalidInput("at least two samples are required")
    mean_x = x.mean(axis=1)
    mean_y = y.mean(axis=1)
    x_c = center_columns(x)
    y_c = center_columns(y)
    svd_x = thin_svd(x_c, rank_tol)
    svd_y = thin_svd(y_c, rank_tol)
    if svd_x.numeric_rank == 0 or svd_y.numeric_rank == 0:
        raise DegenerateData("a view has rank zero after centering")

    q1, q2 = svd_x.right, svd_y.right
    p1, sigma, p2t = np.linalg.svd(q1.T @ q2, full_matrices=True)
    # cosines of principal angles; clip tiny overshoot from roundoff
    sigma = np.clip(sigma, 0.0, 1.0)
    p1, p2t = _flip_signs(p1, p2t)
    p2 = p2t.T
    m = int(np.count_nonzero(sigma > rank_tol * sigma[0])) if sigma.size and sigma[0] > 0 else 0
    coupling = ThinSvd(
        left=np.ascontiguousarray(p1[:, :m]),
        singular_values=sigma[:m].copy(),
        right=np.ascontiguousarray(p2[:, :m]),
        numeric_rank=m,
    )
    r, s = svd_x.numeric_rank, svd_y.numeric_rank
    return CcaFactorization(
        svd_x=svd_x,
        svd_y=svd_y,
        coupling=coupling,
        p1=p1,
        p2=p2,
        coupling_values=sigma,
        r=r,
        s=s,
        m=m,
        t=min(r, s),
        groups=_group_multiplicities(sigma[:m]),
        x_c=x_c,
        y_c=y_c,
        mean_x=mean_x,
        mean_y=mean_y,
    )


def cca_exact(f, l):
    """Canonical representative of the solution family.

    Wx = U1 S1^{-1} P1(:, :l), Wy = V1 S2^{-1} P2(:, :l); the first l
    coupling singular values are the attained correlations.
    """
    if not 1 <= l <= f.t:
        raise InvalidInput(f"l must lie in [1, {f.t}], got {l}")
    wx = f.svd_x.left @ (f.p1[:, :l] / f.svd_x.singular_values[:, None])
    wy = f.svd_y.left @ (f.p2[:, :l] / f.svd_y.singular_values[:, None])
    return CcaModel(
        wx=wx,
        wy=wy,
        correlations=f.coupling_values[:l].copy(),
        l=l,
        mean_x=f.mean_x.copy(),
        mean_y=f.mean_y.copy(),
    )


def _check_orthonormal_cols(a, name, square=False):
    a = as_matrix(a, name)
    if square and a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    if a.shape[1] > a.shape[0]:
        raise InvalidInput(f"{name} cannot have more columns than rows, got {a.shape}")
    gram = a.T @ a
    if np.abs(gram - np.eye(a.shape[1])).max() > 1e-10:
        raise InvalidInput(f"{name} does not have orthonormal columns within 1e-10")
    return a


def general_solution(f, l, mix, g=None, e=None, fmat=None):
    """Any member of the CCA solution family.

    The structure of ``g`` depends on where ``l`` falls relative to the
    coupling-value multiplicity boundaries alpha_k = m_1 + ... + m_k:

    * l == alpha_k for some k (or l == m): no ``g`` block;
    * alpha_k < l < alpha_{k+1}: ``g`` is m_{k+1} x (l - alpha_k),
      column-orthogonal, shared by both views;
    * m < l <= t: ``g`` is a pair (g1, g2) with shapes
      (r - m) x (l - m) and (s - m) x (l - m), column-orthogonal.

    ``mix`` is an orthogonal l x l rotation; ``e`` and ``fmat`` are
    arbitrary blocks living in the null spaces of X' and Y'.
    """
    if not 1 <= l <= f.t:
        raise InvalidInput(f"l must lie in [1, {f.t}], got {l}")
    mix = _check_orthonormal_cols(mix, "mix", square=True)
    if mix.shape[0] != l:
        raise InvalidInput(f"mix must be {l} x {l}, got {mix.shape}")

    alphas = np.concatenate([[0], np.cumsum(f.groups)]).astype(int)
    if l <= f.m and l in alphas:
        # case (i): l aligned with a multiplicity boundary
        if g is not None:
            raise InvalidInput("g must be omitted when l hits a multiplicity boundary")
        block_x = f.p1[:, :l]
        block_y = f.p2[:, :l]
    elif l < f.m:
        # case (ii): l splits the (k+1)-th group
        k = int(np.searchsorted(alphas, l) - 1)
        a_k, a_k1 = alphas[k], alphas[k + 1]
        need = (f.groups[k], l - a_k)
        if g is None or isinstance(g, tuple):
            raise InvalidInput(f"g must be a single {need} column-orthogonal block")
        g = _check_orthonormal_cols(g, "g")
        if g.shape != need:
            raise InvalidInput(f"g must have shape {need}, got {g.shape}")
        block_x = np.hstack([f.p1[:, :a_k], f.p1[:, a_k:a_k1] @ g])
        block_y = np.hstack([f.p2[:, :a_k], f.p2[:, a_k:a_k1] @ g])
    else:
        # case (iii): directions beyond the coupling rank
        need1 = (f.r - f.m, l - f.m)
        need2 = (f.s - f.m, l - f.m)
        if not isinstance(g, tuple) or len(g) != 2:
            raise InvalidInput(
                f"g must be a pair of blocks with shapes {need1} and {need2}"
            )
        g1 = _check_orthonormal_cols(g[0], "g1")
        g2 = _check_orthonormal_cols(g[1], "g2")
        if g1.shape != need1 or g2.shape != need2:
            raise InvalidInput(
                f"expected block shapes {need1} and {need2}, got {g1.shape} and {g2.shape}"
            )
        block_x = np.hstack([f.p1[:, : f.m], f.p1[:, f.m : f.r] @ g1])
        block_y = np.hstack([f.p2[:, : f.m], f.p2[:, f.m : f.s] @ g2])

    d1 = f.svd_x.left.shape[0]
    d2 = f.svd_y.left.shape[0]
    wx = f.svd_x.left @ (block_x / f.svd_x.singular_values[:, None]) @ mix
    wy = f.svd_y.left @ (block_y / f.svd_y.singular_values[:, None]) @ mix
    if e is not None and d1 > f.r:
        e = as_matrix(e, "e")
        if e.shape != (d1 - f.r, l):
            raise InvalidInput(f"e must have shape {(d1 - f.r, l)}, got {e.shape}")
        u2 = scipy.linalg.null_space(f.svd_x.left.T)
        wx = wx + u2 @ e
    if fmat is not None and d2 > f.s:
        fmat = as_matrix(fmat, "fmat")
        if fmat.shape != (d2 - f.s, l):
            raise InvalidInput(f"fmat must have shape {(d2 - f.s, l)}, got {fmat.shape}")
        v2 = scipy.linalg.null_space(f.svd_y.left.T)
        wy = wy + v2 @ fmat
    return CcaModel(
        wx=wx,
        wy=wy,
        correlations=f.coupling_values[:l].copy(),
        l=l,
        mean_x=f.mean_x.copy(),
        mean_y=f.mean_y.copy(),
    )


def cca_targets(f, l):
    """Regression targets whose least-squares solutions solve CCA.

    tx = Q2 P2(:, :l) diag(1/sigma_i), ty likewise with the views
    swapped.  The reduced form is checked against the pseudoinverse form
    it simplifies; disagreement flags a numerical problem.
    """
    if not 1 <= l <= f.m:
        raise InvalidInput(
            f"l must lie in [1, {f.m}] (nonzero coupling values), got {l}"
        )
    sig = f.coupling_values[:l]
    tx = (f.svd_y.right @ f.p2[:, :l]) / sig[None, :]
    ty = (f.svd_x.right @ f.p1[:, :l]) / sig[None, :]

    # pseudoinverse route: Y' [(Y Y')^{1/2}]^+ V1 P2(:, :l) diag(1/sigma)
    v1, s2 = f.svd_y.left, f.svd_y.singular_values
    pinv_sqrt_y = (v1 / s2[None, :]) @ v1.T
    tx_pinv = f.y_c.T @ pinv_sqrt_y @ v1 @ f.p2[:, :l] / sig[None, :]
    u1, s1 = f.svd_x.left, f.svd_x.singular_values
    pinv_sqrt_x = (u1 / s1[None, :]) @ u1.T
    ty_pinv = f.x_c.T @ pinv_sqrt_x @ u1 @ f.p1[:, :l] / sig[None, :]
    err = max(np.abs(tx - tx_pinv).max(), np.abs(ty - ty_pinv).max())
    if err > 1e-8 * max(1.0, np.abs(tx).max(), np.abs(ty).max()):
        raise NumericalFailure(
            f"target formulas disagree by {err:.3e}; factorization unreliable"
        )
    return CcaTargets(tx=tx, ty=ty)


def cca_ls(x, y, l, rank_tol=DEFAULT_RANK_TOL):
    """CCA through the minimum-norm solutions of two least-squares fits."""
    f = factorize(x, y, rank_tol)
    targets = cca_targets(f, l)
    # X' W = T solved through the pseudoinverse of X'
    svd_xt = ThinSvd(
        left=f.svd_x.right,
        singular_values=f.svd_x.singular_values,
        right=f.svd_x.left,
        numeric_rank=f.svd_x.numeric_rank,
    )
    svd_yt = ThinSvd(
        left=f.svd_y.right,
        singular_values=f.svd_y.singular_values,
        right=f.svd_y.left,
        numeric_rank=f.svd_y.numeric_rank,
    )
    wx = pinv_times(svd_xt, targets.tx)
    wy = pinv_times(svd_yt, targets.ty)
    return CcaModel(
        wx=wx,
        wy=wy,
        correlations=f.coupling_values[:l].copy(),
        l=l,
        mean_x=f.mean_x.copy(),
        mean_y=f.mean_y.copy(),
    )


def scca_ls(x, y, l, lambdas_x, lambdas_y, config=None, rank_tol=DEFAULT_RANK_TOL):
    """Sparse CCA: l1-penalized least squares solved by fixed-point
    continuation on both views.

    Reported correlations are empirical Pearson correlations of the
    training projections.  Columns shrunk entirely to zero are listed in
    ``zero_columns_x`` / ``zero_columns_y`` rather than treated as an
    error.
    """
    f = factorize(x, y, rank_tol)
    targets = cca_targets(f, l)
    res_x = fpc_solve(L1LsProblem(f.x_c, targets.tx, lambdas_x), config)
    res_y = fpc_solve(L1LsProblem(f.y_c, targets.ty, lambdas_y), config)
    wx, wy = res_x.solution, res_y.solution
    corr = pearson_rows(wx.T @ f.x_c, wy.T @ f.y_c)
    return CcaModel(
        wx=wx,
        wy=wy,
        correlations=corr,
        l=l,
        mean_x=f.mean_x.copy(),
        mean_y=f.mean_y.copy(),
        zero_columns_x=tuple(np.flatnonzero(~np.any(wx, axis=0)).tolist()),
        zero_columns_y=tuple(np.flatnonzero(~np.any(wy, axis=0)).tolist()),
        fpc_x=res_x,
        fpc_y=res_y,
    )


def project(model, x_new, y_new=None):
    """Project new samples: (Wx'(x - mean_x), Wy'(y - mean_y)).

    The second element is None when ``y_new`` is omitted.
    """
    x_new = as_matrix(x_new, "x_new")
    if x_new.shape[0] != model.wx.shape[0]:
        raise InvalidInput(
            f"x_new must have {model.wx.shape[0]} rows, got {x_new.shape[0]}"
        )
    px = model.wx.T @ (x_new - model.mean_x[:, None])
    if y_new is None:
        return px, None
    y_new = as_matrix(y_new, "y_new")
    if y_new.shape[0] != model.wy.shape[0]:
        raise InvalidInput(
            f"y_new must have {model.wy.shape[0]} rows, got {y_new.shape[0]}"
        )
    py = model.wy.T @ (y_new - model.mean_y[:, None])
    return px, py


def orth_violation(w, data, l):
    """Constraint violation ||W'(X X')W - I_l||_F / sqrt(l).

    ``data`` must already be centered the way the model was trained.
    """
    w = as_matrix(w, "w")
    data = as_matrix(data, "data")
    if w.shape[1] != l:
        raise InvalidInput(f"w must have l={l} columns, got {w.shape[1]}")
    if w.shape[0] != data.shape[0]:
        raise InvalidInput("w and data disagree on the feature dimension")
    proj = data.T @ w
    gram = proj.T @ proj
    return float(np.linalg.norm(gram - np.eye(l), "fro") / np.sqrt(l))


def orth_bound(lam, sigma_min_nonzero, d1, l, nnz_subgradient):
    """Upper bounds on the orthogonality violation of a sparse solution.

    ``tight`` uses the actual subgradient support size N:
    (lam / (sigma_r sqrt(l))) (2 sqrt(N) + (lam / sigma_r) N); ``loose``
    replaces it by d1 per column and is never smaller.
    """
    if sigma_min_nonzero <= 0:
        raise InvalidInput("sigma_min_nonzero must be positive")
    if not 0 <= nnz_subgradient <= d1 * l:
        raise InvalidInput(f"nnz_subgradient must lie in [0, {d1 * l}]")
    ratio = lam / sigma_min_nonzero
    tight = (ratio / np.sqrt(l)) * (2.0 * np.sqrt(nnz_subgradient) + ratio * nnz_subgradient)
    loose = ratio * np.sqrt(d1) * (2.0 + ratio * np.sqrt(l * d1))
    return OrthBound(tight=float(tight), loose=float(loose))
