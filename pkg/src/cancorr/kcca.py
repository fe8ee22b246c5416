"""Kernel CCA: exact, Tikhonov-regularized, and sparse variants.

Everything works in the dual: with centered Grams Kx = U1 P1 U1' and
Ky = V1 P2 V1' (eigendecompositions restricted to the nonzero spectrum)
and the coupling SVD U1' V1 = C1 Pi C2', the exact dual transforms are
Wx = U1 P1^{-1} C1(:, :l).  The sparse variant penalizes the l1 norm of
the dual transforms in the equivalent least-squares formulation; the
regularized variant shrinks through (Pi + rho I) factors.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidState, NumericalFailure
from .evaluation import pearson_rows
from .fpc import FpcResult, L1LsProblem, fpc_solve, max_lambda
from .kernels import GramMatrix, KernelSpec, center_test, cross_gram
from .matops import DEFAULT_RANK_TOL, SymEig, ThinSvd, _flip_signs, as_matrix, sym_eig


@dataclass(frozen=True)
class KccaFactorization:
    """Eigendecompositions of both centered Grams plus their coupling SVD.

    ``pc1``, ``pc2`` and ``coupling_values`` keep the full orthogonal
    coupling factors; ``coupling`` is the rank-truncated view of the
    same decomposition.
    """

    eig_x: SymEig
    eig_y: SymEig
    coupling: ThinSvd
    pc1: np.ndarray
    pc2: np.ndarray
    coupling_values: np.ndarray
    r_hat: int
    s_hat: int
    m_hat: int
    kx: GramMatrix
    ky: GramMatrix


@dataclass(frozen=True)
class DualTargets:
    """Least-squares targets for the dual problems; orthonormal columns."""

    tx: np.ndarray
    ty: np.ndarray


@dataclass
class KccaModel:
    """Dual transform pair ready for projection of new data.

    ``correlations`` holds coupling singular values for the exact
    variant and empirical training Pearson correlations of the dual
    projections for the regularized and sparse variants (which violate
    the exact constraints); the regularized variant additionally records
    its shrunken spectrum in ``regularized_spectrum``.
    """

    dual_x: np.ndarray
    dual_y: np.ndarray
    correlations: np.ndarray
    l: int
    kernel_x: KernelSpec
    kernel_y: KernelSpec
    gram_x: GramMatrix
    gram_y: GramMatrix
    variant: str
    params: dict = field(default_factory=dict)
    regularized_spectrum: np.ndarray | None = None
    zero_columns_x: tuple = ()
    zero_columns_y: tuple = ()
    fpc_x: FpcResult | None = None
    fpc_y: FpcResult | None = None


def unit_correlation_floor(r_hat, s_hat, n):
    """Guaranteed count of unit canonical correlations: max(r+s-n, 0)."""
    if r_hat > n or s_hat > n:
        raise InvalidInput("ranks cannot exceed the sample count")
    return max(r_hat + s_hat - n, 0)


def kcca_factorize(kx, ky, rank_tol=DEFAULT_RANK_TOL):
    """Factor a pair of centered Grams for all kernel CCA variants."""
    if not isinstance(kx, GramMatrix) or not isinstance(ky, GramMatrix):
        raise InvalidInput("kcca_factorize expects GramMatrix inputs")
    if not kx.centered or not ky.centered:
        raise InvalidState("Gram matrices must be centered first")
    if kx.n != ky.n:
        raise InvalidInput(f"sample counts differ: {kx.n} vs {ky.n}")
    eig_x = sym_eig(kx.values, rank_tol)
    eig_y = sym_eig(ky.values, rank_tol)
    r_hat, s_hat = eig_x.numeric_rank, eig_y.numeric_rank
    if r_hat == 0 or s_hat == 0:
        raise InvalidInput("a Gram matrix has rank zero")
    u1 = eig_x.vectors[:, :r_hat]
    v1 = eig_y.vectors[:, :s_hat]
    pc1, sigma, pc2t = np.linalg.svd(u1.T @ v1, full_matrices=True)
    sigma = np.clip(sigma, 0.0, 1.0)
    pc1, pc2t = _flip_signs(pc1, pc2t)
    pc2 = pc2t.T
    m_hat = (
        int(np.count_nonzero(sigma > rank_tol * sigma[0]))
        if sigma.size and sigma[0] > 0
        else 0
    )
    coupling = ThinSvd(
        left=np.ascontiguousarray(pc1[:, :m_hat]),
        singular_values=sigma[:m_hat].copy(),
        right=np.ascontiguousarray(pc2[:, :m_hat]),
        numeric_rank=m_hat,
    )
    return KccaFactorization(
        eig_x=eig_x,
        eig_y=eig_y,
        coupling=coupling,
        pc1=pc1,
        pc2=pc2,
        coupling_values=sigma,
        r_hat=r_hat,
        s_hat=s_hat,
        m_hat=m_hat,
        kx=kx,
        ky=ky,
    )


def _model_base(f, l, dual_x, dual_y, correlations, variant, **extra):
    return KccaModel(
        dual_x=dual_x,
        dual_y=dual_y,
        correlations=correlations,
        l=l,
        kernel_x=f.kx.source_spec,
        kernel_y=f.ky.source_spec,
        gram_x=f.kx,
        gram_y=f.ky,
        variant=variant,
        **extra,
    )


def kcca_exact(f, l):
    """Exact kernel CCA: Wx = U1 P1^{-1} C1(:, :l), and likewise for y."""
    if not 1 <= l <= min(f.r_hat, f.s_hat):
        raise InvalidInput(f"l must lie in [1, {min(f.r_hat, f.s_hat)}], got {l}")
    u1 = f.eig_x.vectors[:, : f.r_hat]
    v1 = f.eig_y.vectors[:, : f.s_hat]
    dual_x = u1 @ (f.pc1[:, :l] / f.eig_x.values[: f.r_hat, None])
    dual_y = v1 @ (f.pc2[:, :l] / f.eig_y.values[: f.s_hat, None])
    return _model_base(f, l, dual_x, dual_y, f.coupling_values[:l].copy(), "exact")


def dual_targets(f, l):
    """Targets U1 C1(:, :l) and V1 C2(:, :l) for the dual least squares.

    The reduced form is cross-checked against the pseudoinverse form
    Kx Kx^+ V1 C2(:, :l) Pi^{-1} before being returned.
    """
    if not 1 <= l <= f.m_hat:
        raise InvalidInput(f"l must lie in [1, {f.m_hat}], got {l}")
    u1 = f.eig_x.vectors[:, : f.r_hat]
    v1 = f.eig_y.vectors[:, : f.s_hat]
    tx = u1 @ f.pc1[:, :l]
    ty = v1 @ f.pc2[:, :l]
    sig = f.coupling_values[:l]
    tx_pinv = u1 @ (u1.T @ v1) @ f.pc2[:, :l] / sig[None, :]
    ty_pinv = v1 @ (v1.T @ u1) @ f.pc1[:, :l] / sig[None, :]
    err = max(np.abs(tx - tx_pinv).max(), np.abs(ty - ty_pinv).max())
    if err > 1e-8:
        raise NumericalFailure(
            f"dual target formulas disagree by {err:.3e}; factorization unreliable"
        )
    return DualTargets(tx=tx, ty=ty)


def skcca(kx, ky, l, gamma_x=None, gamma_y=None, config=None, rho_x=None, rho_y=None,
          rank_tol=DEFAULT_RANK_TOL, factorization=None):
    """Sparse kernel CCA via l1-penalized dual least squares.

    Per-column regularizers default to gamma * ||K' t_i||_inf with
    gamma in (0, 1), the largest value that still avoids the all-zero
    solution; ``rho_x`` / ``rho_y`` give raw per-column (or scalar)
    overrides instead, bypassing the (0, 1) guard.  A precomputed
    ``factorization`` of the same Grams may be passed to skip the
    eigendecompositions.
    """
    f = factorization if factorization is not None else kcca_factorize(kx, ky, rank_tol)
    targets = dual_targets(f, l)
    rho_x = _resolve_rho(kx, targets.tx, gamma_x, rho_x, "x")
    rho_y = _resolve_rho(ky, targets.ty, gamma_y, rho_y, "y")
    res_x = fpc_solve(L1LsProblem(kx.values, targets.tx, rho_x), config)
    res_y = fpc_solve(L1LsProblem(ky.values, targets.ty, rho_y), config)
    dual_x, dual_y = res_x.solution, res_y.solution
    corr = pearson_rows(dual_x.T @ kx.values, dual_y.T @ ky.values)
    return _model_base(
        f,
        l,
        dual_x,
        dual_y,
        corr,
        "sparse",
        params={"gamma_x": gamma_x, "gamma_y": gamma_y,
                "rho_x": rho_x.tolist(), "rho_y": rho_y.tolist()},
        zero_columns_x=tuple(np.flatnonzero(~np.any(dual_x, axis=0)).tolist()),
        zero_columns_y=tuple(np.flatnonzero(~np.any(dual_y, axis=0)).tolist()),
        fpc_x=res_x,
        fpc_y=res_y,
    )


def _resolve_rho(k, targets, gamma, rho, side):
    l = targets.shape[1]
    if rho is not None:
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (l,)).copy()
        if np.any(rho <= 0):
            raise InvalidInput(f"rho_{side} must be positive")
        return rho
    if gamma is None or not 0.0 < gamma < 1.0:
        raise InvalidInput(f"gamma_{side} must lie in (0, 1), got {gamma}")
    caps = np.array([max_lambda(k.values, targets[:, i]) for i in range(l)])
    if np.any(caps <= 0):
        raise InvalidInput(f"zero gradient cap on side {side}; targets degenerate")
    return gamma * caps


def rkcca(kx, ky, l, rho_x, rho_y, rank_tol=DEFAULT_RANK_TOL, factorization=None):
    """Tikhonov-regularized kernel CCA.

    Takes the SVD of (P1+rho_x I)^{-1/2} P1^{1/2} U1'V1 P2^{1/2}
    (P2+rho_y I)^{-1/2} = Q1 S Q2' and returns
    Wx = U1 (P1^2 + rho_x P1)^{-1/2} Q1(:, :l).  ``correlations`` are
    empirical training Pearson correlations of the dual projections;
    the shrunken spectrum diag(S)[:l] is kept in
    ``regularized_spectrum``.
    """
    if rho_x <= 0 or rho_y <= 0:
        raise InvalidInput("regularizers must be positive")
    f = factorization if factorization is not None else kcca_factorize(kx, ky, rank_tol)
    if not 1 <= l <= f.m_hat:
        raise InvalidInput(f"l must lie in [1, {f.m_hat}], got {l}")
    pi1 = f.eig_x.values[: f.r_hat]
    pi2 = f.eig_y.values[: f.s_hat]
    u1 = f.eig_x.vectors[:, : f.r_hat]
    v1 = f.eig_y.vectors[:, : f.s_hat]
    dx = np.sqrt(pi1 / (pi1 + rho_x))
    dy = np.sqrt(pi2 / (pi2 + rho_y))
    middle = dx[:, None] * (u1.T @ v1) * dy[None, :]
    q1, spectrum, q2t = np.linalg.svd(middle, full_matrices=True)
    q1, q2t = _flip_signs(q1, q2t)
    dual_x = u1 @ (q1[:, :l] / np.sqrt(pi1**2 + rho_x * pi1)[:, None])
    dual_y = q2t.T[:, :l] / np.sqrt(pi2**2 + rho_y * pi2)[:, None]
    dual_y = v1 @ dual_y
    corr = pearson_rows(dual_x.T @ kx.values, dual_y.T @ ky.values)
    return _model_base(
        f,
        l,
        dual_x,
        dual_y,
        corr,
        "regularized",
        params={"rho_x": rho_x, "rho_y": rho_y},
        regularized_spectrum=spectrum[:l].copy(),
    )


def kcca_project(model, new_data=None, view="x", cross=None):
    """Project new samples of one view through the dual transform.

    Builds the train/test kernel block, centers it against the training
    Gram, and returns the l x N projection.  Precomputed-kernel models
    must be given the uncentered n x N ``cross`` block directly.
    """
    if view not in ("x", "y"):
        raise InvalidInput(f"view must be 'x' or 'y', got {view!r}")
    gram_ref = model.gram_x if view == "x" else model.gram_y
    dual = model.dual_x if view == "x" else model.dual_y
    spec = model.kernel_x if view == "x" else model.kernel_y
    if cross is None:
        if spec.kind == "precomputed" or gram_ref.train_data is None:
            raise InvalidInput(
                "precomputed-kernel models require the cross Gram to be supplied"
            )
        if new_data is None:
            raise InvalidInput("either new_data or cross must be given")
        new_data = as_matrix(new_data, "new_data")
        cross = cross_gram(spec, gram_ref.train_data, new_data)
    else:
        cross = as_matrix(cross, "cross")
    centered = center_test(gram_ref, cross)
    return dual.T @ centered


def dual_orth_violation(dual, k, l):
    """Constraint violation ||W' K^2 W - I_l||_F / sqrt(l) in the dual."""
    dual = as_matrix(dual, "dual")
    if dual.shape[1] != l:
        raise InvalidInput(f"dual transform must have l={l} columns, got {dual.shape[1]}")
    proj = k.values @ dual
    gram = proj.T @ proj
    return float(np.linalg.norm(gram - np.eye(l), "fro") / np.sqrt(l))
