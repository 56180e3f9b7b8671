"""Random unconstrained quadratic programs with a prescribed spectrum.

The Hessian is never materialized: ``Q = V diag(lam) V^T`` with ``V`` a
product of two Householder reflectors, so matrix-vector products and the
closed-form minimizer cost O(d).  The spectrum contains the requested
extremes ``mu`` and ``L`` exactly, with the interior eigenvalues drawn
log-uniformly in between; that pins the condition number, so gradient-descent
rate laws can be asserted against the generated instance.
"""

import struct

import numpy as np

from ..errors import DimensionMismatch, InvalidSpectrum

_MAGIC = b"QPGEN1"
_HEADER = struct.Struct("<IddQ")  # d, mu, L, seed (little-endian)


class QpProblem:
    """Quadratic objective ``0.5 x'Qx + q'x`` with implicit factorized Q."""

    def __init__(self, d, mu, L, seed, spectrum, u1, u2, q):
        self.d = d
        self.mu = mu
        self.L = L
        self.seed = seed
        self.spectrum = spectrum
        self._u1 = u1
        self._u2 = u2
        self.q = q
        self.n_components = 1
        self.x_star = -self._solve(q)
        g = np.empty(d)
        self.f_star = self.full_eval(self.x_star, g)

    def _apply_v(self, w):
        # V = H1 H2 with H u = u - 2 u (u . w)
        w = w - 2.0 * self._u2 * (self._u2 @ w)
        return w - 2.0 * self._u1 * (self._u1 @ w)

    def _apply_vt(self, w):
        w = w - 2.0 * self._u1 * (self._u1 @ w)
        return w - 2.0 * self._u2 * (self._u2 @ w)

    def matvec(self, v):
        """Compute ``Q v`` through the reflector factorization."""
        return self._apply_v(self.spectrum * self._apply_vt(v))

    def _solve(self, v):
        return self._apply_v(self._apply_vt(v) / self.spectrum)

    def full_eval(self, x, g_out):
        """Write ``Qx + q`` into ``g_out`` and return the objective value."""
        if len(x) != self.d:
            raise DimensionMismatch(f"x has length {len(x)}, expected {self.d}")
        qx = self.matvec(x)
        g_out[:] = qx + self.q
        return float(0.5 * (x @ qx) + self.q @ x)

    def partial_eval(self, x, g_out, indices):
        # single smooth component: any index set means the full objective
        return self.full_eval(x, g_out)


def generate_qp(d, mu, L, seed):
    """Generate a seeded QP instance with ``lam_min = mu`` and ``lam_max = L``.

    Draw order (interior spectrum, reflector directions, linear term) is
    fixed, so equal seeds reproduce the instance bit-for-bit.
    """
    if mu <= 0.0 or mu > L:
        raise InvalidSpectrum(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if d < 2:
        raise ValueError("dimension must be at least 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    spectrum = np.empty(d)
    spectrum[0] = mu
    spectrum[-1] = L
    if d > 2:
        spectrum[1:-1] = np.exp(rng.uniform(np.log(mu), np.log(L), size=d - 2))
    u1 = rng.standard_normal(d)
    u1 /= np.linalg.norm(u1)
    u2 = rng.standard_normal(d)
    u2 /= np.linalg.norm(u2)
    q = rng.standard_normal(d)
    return QpProblem(d, float(mu), float(L), int(seed), spectrum, u1, u2, q)


def save_qp(problem, path):
    """Write the generator inputs as ``QPGEN1`` + (d, mu, L, seed), little-endian."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(_HEADER.pack(problem.d, problem.mu, problem.L, problem.seed))


def load_qp(path):
    """Regenerate the instance stored by :func:`save_qp`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path} is not a QP instance file")
    d, mu, L, seed = _HEADER.unpack(blob[len(_MAGIC) : len(_MAGIC) + _HEADER.size])
    return generate_qp(d, mu, L, seed)
