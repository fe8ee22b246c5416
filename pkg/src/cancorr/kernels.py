"""Kernel functions, Gram matrices, and train/test Gram centering.

Data matrices are d x n with one sample per column.  Centering is done
with cached row means of the uncentered Gram (O(n^2)) instead of
multiplying by projector matrices; the cache is also what the test-side
centering formula needs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, InvalidInput, InvalidState
from .matops import as_matrix

LINEAR = "linear"
POLYNOMIAL = "polynomial"
GAUSSIAN = "gaussian"
PRECOMPUTED = "precomputed"


@dataclass(frozen=True)
class KernelSpec:
    """A kernel function choice with its parameters.

    ``linear``: a.b; ``polynomial``: (gamma1 * a.b + gamma2)^degree;
    ``gaussian``: exp(-||a - b||^2 / (2 sigma^2)); ``precomputed`` marks
    Gram matrices supplied by the caller, with no pointwise evaluation.
    """

    kind: str
    sigma: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    degree: float | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, POLYNOMIAL, GAUSSIAN, PRECOMPUTED):
            raise InvalidInput(f"unknown kernel kind {self.kind!r}")
        if self.kind == GAUSSIAN and (self.sigma is None or self.sigma <= 0):
            raise InvalidInput("gaussian kernel requires sigma > 0")
        if self.kind == POLYNOMIAL:
            if self.degree is None or self.degree <= 0:
                raise InvalidInput("polynomial kernel requires degree > 0")
            if self.gamma1 is None or self.gamma2 is None:
                raise InvalidInput("polynomial kernel requires gamma1 and gamma2")

    @classmethod
    def linear(cls):
        return cls(kind=LINEAR)

    @classmethod
    def polynomial(cls, gamma1, gamma2, degree):
        return cls(kind=POLYNOMIAL, gamma1=gamma1, gamma2=gamma2, degree=degree)

    @classmethod
    def gaussian(cls, sigma):
        return cls(kind=GAUSSIAN, sigma=sigma)

    @classmethod
    def precomputed(cls):
        return cls(kind=PRECOMPUTED)


@dataclass(frozen=True)
class GramMatrix:
    """An n x n kernel matrix, optionally centered.

    When centered, ``row_means`` and ``grand_mean`` cache the means of
    the *uncentered* matrix, which the test-side centering needs.
    ``train_data`` keeps the columns the matrix was built from (None for
    precomputed input).
    """

    values: np.ndarray
    centered: bool
    source_spec: KernelSpec
    row_means: np.ndarray | None = None
    grand_mean: float | None = None
    train_data: np.ndarray | None = None

    @property
    def n(self):
        return self.values.shape[0]


def kernel_eval(spec, a, b):
    """Evaluate the kernel on one pair of equal-length vectors."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise InvalidInput(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    if spec.kind == LINEAR:
        return float(a @ b)
    if spec.kind == POLYNOMIAL:
        return float((spec.gamma1 * (a @ b) + spec.gamma2) ** spec.degree)
    if spec.kind == GAUSSIAN:
        d = a - b
        return float(np.exp(-(d @ d) / (2.0 * spec.sigma**2)))
    raise InvalidInput("precomputed kernels have no pointwise evaluation")


def _sq_distances(a, b):
    """Pairwise squared distances between columns, clamped at zero."""
    ga = np.einsum("ij,ij->j", a, a)
    gb = np.einsum("ij,ij->j", b, b)
    d2 = ga[:, None] + gb[None, :] - 2.0 * (a.T @ b)
    np.maximum(d2, 0.0, out=d2)
    return d2


def cross_gram(spec, a, b):
    """Kernel evaluations between the columns of ``a`` (n) and ``b`` (N)."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != b.shape[0]:
        raise InvalidInput("views must share the feature dimension")
    if spec.kind == LINEAR:
        return a.T @ b
    if spec.kind == POLYNOMIAL:
        return (spec.gamma1 * (a.T @ b) + spec.gamma2) ** spec.degree
    if spec.kind == GAUSSIAN:
        return np.exp(-_sq_distances(a, b) / (2.0 * spec.sigma**2))
    raise InvalidInput("precomputed kernels cannot evaluate new pairs")


def gram(spec, data):
    """Gram matrix of the data columns; exactly symmetric by construction."""
    data = as_matrix(data, "data")
    if data.shape[1] < 2:
        raise InvalidInput("at least two samples are required")
    if spec.kind == PRECOMPUTED:
        raise InvalidInput("use gram_from_values for precomputed kernels")
    if spec.kind == GAUSSIAN:
        d2 = _sq_distances(data, data)
        np.fill_diagonal(d2, 0.0)
        values = np.exp(-d2 / (2.0 * spec.sigma**2))
    else:
        values = cross_gram(spec, data, data)
    upper = np.triu(values)
    values = upper + np.triu(values, 1).T
    return GramMatrix(values=values, centered=False, source_spec=spec, train_data=data)


def gram_from_values(values):
    """Wrap a user-supplied kernel matrix, validating symmetry."""
    values = as_matrix(values, "values")
    n, m = values.shape
    if n != m:
        raise InvalidInput(f"kernel matrix must be square, got shape {values.shape}")
    scale = max(np.abs(values).max(), 1e-300)
    if np.abs(values - values.T).max() > 1e-10 * scale:
        raise InvalidInput("kernel matrix is not symmetric within 1e-10")
    values = 0.5 * (values + values.T)
    return GramMatrix(values=values, centered=False, source_spec=KernelSpec.precomputed())


def center_train(k):
    """Doubly center a training Gram: (I - ee'/n) K (I - ee'/n).

    Caches the uncentered row means and grand mean for later test-side
    centering.
    """
    if k.centered:
        raise InvalidState("Gram matrix is already centered")
    values = k.values
    rm = values.mean(axis=1)
    gm = float(values.mean())
    centered = values - rm[:, None] - rm[None, :] + gm
    return GramMatrix(
        values=centered,
        centered=True,
        source_spec=k.source_spec,
        row_means=rm,
        grand_mean=gm,
        train_data=k.train_data,
    )


def center_test(k_train, k_cross):
    """Center an n x N train/test kernel block against the training data.

    Equals (I - ee'/n) K_t - (I - ee'/n) K (e_n e_N'/n), computed from
    the cached means of the uncentered training Gram.
    """
    if not k_train.centered or k_train.row_means is None:
        raise InvalidState("training Gram must be centered with cached means")
    k_cross = as_matrix(k_cross, "k_cross")
    if k_cross.shape[0] != k_train.n:
        raise InvalidInput(
            f"cross Gram must have {k_train.n} rows, got {k_cross.shape[0]}"
        )
    col_means = k_cross.mean(axis=0, keepdims=True)
    return k_cross - col_means - k_train.row_means[:, None] + k_train.grand_mean


def default_sigma(data, mode="max"):
    """Max (or min nonzero) pairwise Euclidean distance between columns."""
    data = as_matrix(data, "data")
    if data.shape[1] < 2:
        raise InvalidInput("at least two samples are required")
    if mode not in ("max", "min"):
        raise InvalidInput(f"mode must be 'max' or 'min', got {mode!r}")
    d2 = _sq_distances(data, data)
    if mode == "max":
        return float(np.sqrt(d2.max()))
    iu = np.triu_indices(data.shape[1], k=1)
    off = d2[iu]
    positive = off[off > 0.0]
    if positive.size == 0:
        raise DegenerateData("all samples coincide; no nonzero pairwise distance")
    return float(np.sqrt(positive.min()))
