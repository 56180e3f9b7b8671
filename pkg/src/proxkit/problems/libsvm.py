"""LIBSVM text-format reader and writer.

Lines look like ``<label> <index>:<value> ...`` with 1-based, strictly
increasing indices.  Blank lines and ``#`` comments are skipped.  Any
positive label maps to +1, everything else to -1.  The feature count is
inferred as (max index + 1) unless an override is given.
"""

import numpy as np

from ..errors import EmptyDataset, ParseError
from .logistic import SparseDataset


def read_libsvm(path, n_features=None):
    """Parse a LIBSVM file into a :class:`SparseDataset`.

    Raises :class:`ParseError` (with the 1-based line number) on malformed
    pairs, non-numeric fields or non-increasing indices, and
    :class:`EmptyDataset` when no samples survive parsing.
    """
    labels = []
    indptr = [0]
    indices = []
    values = []
    max_index = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise ParseError(lineno, f"non-numeric label {tokens[0]!r}") from None
            labels.append(1.0 if label > 0 else -1.0)
            prev = -1
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise ParseError(lineno, f"malformed pair {tok!r}")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(lineno, f"non-numeric pair {tok!r}") from None
                if idx < 1:
                    raise ParseError(lineno, f"index {idx} is not 1-based")
                zero_based = idx - 1
                if zero_based <= prev:
                    raise ParseError(lineno, f"non-increasing index {idx}")
                if n_features is not None and zero_based >= n_features:
                    raise ParseError(lineno, f"index {idx} exceeds n_features={n_features}")
                prev = zero_based
                indices.append(zero_based)
                values.append(val)
            max_index = max(max_index, prev)
            indptr.append(len(indices))
    if not labels:
        raise EmptyDataset(f"no samples in {path}")
    d = n_features if n_features is not None else max_index + 1
    if d <= 0:
        d = 1  # all-empty rows still need a positive dimension
    return SparseDataset(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.float64),
        n_features=d,
    )


def write_libsvm(dataset, path):
    """Write a dataset in LIBSVM format; floats use shortest-roundtrip repr."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(dataset.n_samples):
            idx, val = dataset.row(i)
            label = "+1" if dataset.labels[i] > 0 else "-1"
            pairs = " ".join(f"{int(j) + 1}:{float(v)!r}" for j, v in zip(idx, val))
            fh.write(label + (" " + pairs if pairs else "") + "\n")
