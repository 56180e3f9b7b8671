"""Problem toolkit: QP generator, logistic loss, LIBSVM I/O, synthetic data."""

from .libsvm import read_libsvm, write_libsvm
from .logistic import LogisticLoss, SparseDataset, smoothness_bound
from .qp import QpProblem, generate_qp, load_qp, save_qp
from .synthetic import generate_logistic_dataset

__all__ = [
    "QpProblem",
    "generate_qp",
    "save_qp",
    "load_qp",
    "SparseDataset",
    "LogisticLoss",
    "smoothness_bound",
    "read_libsvm",
    "write_libsvm",
    "generate_logistic_dataset",
]
