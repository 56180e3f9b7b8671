"""L1-ready logistic regression loss over a sparse dataset.

The smooth part is ``sum_i log(1 + exp(-b_i <a_i, x>))``; the L1 term is
handled by the prox policy, not here.  Evaluation supports arbitrary
component subsets so samplers can drive mini-batch and incremental runs.
Margins are guarded with the stable log1p/exp branch, so perfectly classified
samples with huge margins do not overflow.
"""

import numpy as np
from scipy import sparse
from scipy.special import expit

from ..errors import DimensionMismatch, IndexOutOfRange


class SparseDataset:
    """CSR-layout sample matrix plus one ±1 label per sample."""

    def __init__(self, indptr, indices, values, labels, n_features):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.float64)
        self.n_features = int(n_features)
        if len(self.indptr) != len(self.labels) + 1:
            raise ValueError("indptr length must be n_samples + 1")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n_features):
            raise IndexOutOfRange("feature index outside [0, n_features)")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")

    @property
    def n_samples(self):
        return len(self.labels)

    def row(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def select(self, rows):
        """New dataset holding the given rows (same feature space)."""
        rows = np.asarray(rows, dtype=np.int64)
        counts = self.indptr[rows + 1] - self.indptr[rows]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(counts)
        indices = np.concatenate(
            [self.indices[self.indptr[r] : self.indptr[r + 1]] for r in rows]
        ) if len(rows) else np.empty(0, dtype=np.int64)
        values = np.concatenate(
            [self.values[self.indptr[r] : self.indptr[r + 1]] for r in rows]
        ) if len(rows) else np.empty(0, dtype=np.float64)
        return SparseDataset(indptr, indices, values, self.labels[rows], self.n_features)

    def matrix(self):
        """The samples as a ``scipy.sparse.csr_matrix``."""
        return sparse.csr_matrix(
            (self.values, self.indices, self.indptr),
            shape=(self.n_samples, self.n_features),
        )


def smoothness_bound(component_count):
    """Gradient-Lipschitz surrogate ``0.25 * count`` for normalized samples."""
    return 0.25 * component_count


class LogisticLoss:
    """Loss oracle with full and component-subset evaluation."""

    def __init__(self, dataset):
        self.dataset = dataset
        self._A = dataset.matrix()
        self._b = dataset.labels
        self.n_components = dataset.n_samples
        self.d = dataset.n_features

    def _eval(self, A, b, x, g_out):
        margins = -b * (A @ x)
        f = float(np.logaddexp(0.0, margins).sum())
        coef = -b * expit(margins)
        g_out[:] = A.T @ coef
        return f

    def full_eval(self, x, g_out):
        """Loss and gradient over every sample; overwrites ``g_out``."""
        if len(x) != self.d:
            raise DimensionMismatch(f"x has length {len(x)}, expected {self.d}")
        return self._eval(self._A, self._b, x, g_out)

    def partial_eval(self, x, g_out, indices):
        """Loss and gradient over the selected samples; overwrites ``g_out``."""
        if len(x) != self.d:
            raise DimensionMismatch(f"x has length {len(x)}, expected {self.d}")
        indices = np.asarray(indices)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n_components):
            raise IndexOutOfRange("sample index outside the dataset")
        return self._eval(self._A[indices], self._b[indices], x, g_out)

    def objective(self, x, lambda1=0.0):
        """Full composite value ``F(x) + lambda1 * ||x||_1`` (no gradient)."""
        scratch = np.empty(self.d)
        return self.full_eval(x, scratch) + lambda1 * float(np.abs(x).sum())
