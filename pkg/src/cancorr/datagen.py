"""Synthetic data generators and the label-indicator view.

All generators draw from ``numpy.random.default_rng`` (PCG64), a named,
seedable and platform-portable generator; each call owns its stream, so
identical seeds reproduce identical bits.
"""

import numpy as np

from .errors import InvalidInput


def synth_nonlinear(n=500, noise=0.3, seed=0):
    """Nonlinearly related pair: x = [z; z], y = [z^2 + e1; sin(pi z) + e2].

    z is i.i.d. uniform on (-2, 2) and e1, e2 are standard normal scaled
    by ``noise``.  Returns (x, y), each 2 x n.
    """
    if n < 10:
        raise InvalidInput(f"n must be at least 10, got {n}")
    rng = np.random.default_rng(seed)
    z = rng.uniform(-2.0, 2.0, size=n)
    e1 = rng.standard_normal(n)
    e2 = rng.standard_normal(n)
    x = np.vstack([z, z])
    y = np.vstack([z**2 + noise * e1, np.sin(np.pi * z) + noise * e2])
    return x, y


def synth_paired_topics(n, d1, d2, topics, noise=0.3, seed=0):
    """Paired views driven by shared latent topic vectors.

    Each sample has a latent t in R^topics; the views are x = A t + noise
    and y = B t + noise with fixed random full-column-rank loadings A
    (d1 x topics) and B (d2 x topics).  Column i of x and column i of y
    are a relevant pair; the returned labels are 0..n-1.
    """
    if topics > min(d1, d2, n):
        raise InvalidInput("topics must not exceed min(d1, d2, n)")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d1, topics))
    b = rng.standard_normal((d2, topics))
    t = rng.standard_normal((topics, n))
    x = a @ t + noise * rng.standard_normal((d1, n))
    y = b @ t + noise * rng.standard_normal((d2, n))
    return x, y, np.arange(n)


def labels_to_indicator(labels):
    """0/1 class-indicator matrix, one row per class (sorted), one column
    per sample.  Center the columns before running CCA against it."""
    labels = np.asarray(labels).ravel()
    classes = np.unique(labels)
    if classes.size < 2:
        raise InvalidInput("at least two classes are required")
    out = np.zeros((classes.size, labels.size))
    for ci, cls in enumerate(classes):
        out[ci, labels == cls] = 1.0
    return out
