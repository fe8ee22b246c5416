"""Dense linear-algebra primitives used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype float64, two
dimensional, with samples stored one per column where relevant.  Logical
iteration order is row-major (C order).  All functions here are pure:
inputs are never mutated and identical inputs produce bitwise-identical
outputs within one build.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NotPositiveSemidefinite, NumericalFailure

DEFAULT_RANK_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Validate and convert ``a`` to a 2-D float64 array.

    Requires at least one row and one column and all entries finite.
    """
    out = np.asarray(a, dtype=float)
    if out.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise InvalidInput(f"{name} must have at least one row and column, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class ThinSvd:
    """Reduced SVD ``a = left @ diag(singular_values) @ right.T``.

    Only singular triplets above the rank cut are retained, so ``left``
    has ``numeric_rank`` columns.  Column signs are fixed so that the
    largest-magnitude entry of each *left* vector is positive (the paired
    right vector is flipped jointly), which makes the factorization
    reproducible.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    numeric_rank: int


@dataclass(frozen=True)
class SymEig:
    """Full symmetric eigendecomposition with values sorted nonincreasing.

    All eigenpairs are kept; ``numeric_rank`` counts values above the rank
    cut.  Tiny negative eigenvalues of nominally PSD input are clamped to
    zero.  Each eigenvector is sign-fixed so its largest-magnitude entry
    is positive.
    """

    vectors: np.ndarray
    values: np.ndarray
    numeric_rank: int


def _flip_signs(u, vt=None):
    """Fix column signs of ``u`` (anchored on its largest-|entry|).

    When ``vt`` is given, rows of ``vt`` paired with flipped columns are
    flipped too, preserving the product.  Columns of ``u`` beyond the row
    count of ``vt`` (full SVD of a wide/tall matrix) flip independently.
    """
    if u.shape[1] == 0:
        return u, vt
    anchor = np.abs(u).argmax(axis=0)
    signs = np.sign(u[anchor, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    if vt is not None:
        k = min(len(signs), vt.shape[0])
        vt = vt.copy()
        vt[:k] *= signs[:k, None]
    return u, vt


def thin_svd(a, rank_tol=DEFAULT_RANK_TOL):
    """Reduced SVD keeping singular values above ``rank_tol * sigma_max``.

    A zero matrix yields rank 0 with empty factor blocks.
    """
    a = as_matrix(a)
    if not 0 < rank_tol < 1:
        raise InvalidInput(f"rank_tol must lie in (0, 1), got {rank_tol}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    if s.size == 0 or s[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rank_tol * s[0]))
    u, vt = _flip_signs(u[:, :rank], vt[:rank])
    return ThinSvd(
        left=np.ascontiguousarray(u),
        singular_values=s[:rank].copy(),
        right=np.ascontiguousarray(vt.T),
        numeric_rank=rank,
    )


def sym_eig(a, rank_tol=DEFAULT_RANK_TOL):
    """Eigendecomposition of a symmetric PSD matrix, values nonincreasing.

    Symmetry is required within 1e-10 relative tolerance.  Eigenvalues
    below ``-1e-6 * max|value|`` raise :class:`NotPositiveSemidefinite`;
    smaller negative values are clamped to zero.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise InvalidInput(f"matrix must be square, got shape {a.shape}")
    if not 0 < rank_tol < 1:
        raise InvalidInput(f"rank_tol must lie in (0, 1), got {rank_tol}")
    scale = np.abs(a).max()
    if np.abs(a - a.T).max() > 1e-10 * max(scale, 1e-300):
        raise InvalidInput("matrix is not symmetric within 1e-10 relative tolerance")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    values = values[::-1].copy()
    vectors = vectors[:, ::-1]
    vscale = np.abs(values).max() if values.size else 0.0
    if values.size and values[-1] < -1e-6 * vscale:
        raise NotPositiveSemidefinite(
            f"eigenvalue {values[-1]:.3e} below -1e-6 * {vscale:.3e}"
        )
    values[values < 0.0] = 0.0
    vectors, _ = _flip_signs(vectors)
    vmax = values[0] if values.size else 0.0
    rank = int(np.count_nonzero(values > rank_tol * vmax)) if vmax > 0 else 0
    return SymEig(vectors=np.ascontiguousarray(vectors), values=values, numeric_rank=rank)


def pinv_times(svd, b):
    """Apply the Moore-Penrose pseudoinverse: ``pinv(a) @ b``.

    Uses only the retained singular triplets of ``svd``; the result is
    the minimum-norm action of the pseudoinverse.
    """
    b = as_matrix(b, "b")
    if b.shape[0] != svd.left.shape[0]:
        raise InvalidInput(
            f"dimension mismatch: pseudoinverse expects {svd.left.shape[0]} rows, got {b.shape[0]}"
        )
    if svd.numeric_rank == 0:
        return np.zeros((svd.right.shape[0], b.shape[1]))
    return svd.right @ ((svd.left.T @ b) / svd.singular_values[:, None])


def center_columns(a):
    """Shift each column by the mean column (zero row means afterwards)."""
    a = as_matrix(a)
    return a - a.mean(axis=1, keepdims=True)
