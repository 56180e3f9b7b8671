"""Seeded synthetic sparse classification data (desk-scale rcv1 stand-in).

Rows get a Bernoulli(density) support with standard-normal values and are
L2-normalized; labels come from a random linear separator plus Gaussian
noise, so the task is separable-with-noise.  All draws run in a fixed order
off one PCG64 stream: equal seeds give identical datasets (and byte-identical
files once written).
"""

import numpy as np

from .logistic import SparseDataset


def generate_logistic_dataset(n_samples, d, density, seed, noise=0.1):
    """Build a :class:`SparseDataset` with ±1 labels.

    ``density`` is the per-entry Bernoulli probability, so row support sizes
    are Binomial(d, density).
    """
    if not 0.0 < density <= 1.0:
        raise ValueError("density must be in (0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    mask = rng.random((n_samples, d)) < density
    values_flat = rng.standard_normal(int(mask.sum()))
    w_true = rng.standard_normal(d)
    label_noise = rng.standard_normal(n_samples)

    indptr = np.zeros(n_samples + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(mask.sum(axis=1))
    indices = np.nonzero(mask)[1].astype(np.int64)
    values = values_flat.copy()
    margins = np.zeros(n_samples)
    for i in range(n_samples):
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            norm = np.linalg.norm(values[lo:hi])
            if norm > 0:
                values[lo:hi] /= norm
            margins[i] = values[lo:hi] @ w_true[indices[lo:hi]]
    labels = np.where(margins + noise * label_noise >= 0.0, 1.0, -1.0)
    return SparseDataset(indptr, indices, values, labels, d)
