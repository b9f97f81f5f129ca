"""Uniform arithmetic over the three ways an operator family is realised.

Identity checks are written once against this interface:

* :class:`MatrixRealization` - families given by matrices that are exact on
  their truncation (cylinder bases, exactly or in floating point for the
  product system).  Products are matrix products.
* :class:`OperatorRealization` - circle families carrying pointwise
  operators.  Expressions are built at operator level and only compressed to
  a pair of bases at the end, so no intermediate truncation error enters.

Levels are ``"in"`` (the family's domain basis) and ``"out"`` (its codomain).
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from . import discretize as dz
from .exact import ExactMatrix


def adj(X):
    if isinstance(X, np.ndarray):
        return X.conj().T
    return X.H


def total(items):
    return reduce(lambda a, b: a + b, items)


def spectral_norm(X) -> tuple[float, bool]:
    """Spectral norm and whether it was decided exactly."""
    if isinstance(X, ExactMatrix):
        if X.is_zero():
            return 0.0, True
        return float(np.linalg.norm(X.to_numpy(), 2)), True
    X = np.asarray(X)
    if X.size == 0:
        return 0.0, False
    return float(np.linalg.norm(X, 2)), False


class MatrixRealization:
    def __init__(self, sys, basis_in, basis_out, exact: bool):
        self.system = sys
        self.basis_in = basis_in
        self.basis_out = basis_out
        self.exact = exact

    def _basis(self, level):
        return self.basis_in if level == "in" else self.basis_out

    def element(self, om: dz.OperatorMatrix):
        return om.entries if self.exact else om.to_numpy()

    def mult(self, f, level="in"):
        b = self._basis(level)
        M = dz.multiplication_operator(f, b)
        return M.entries if (self.exact and M.exact) else M.to_numpy()

    def alpha(self, f):
        return self.mult(dz.pullback(self.system, f), "out")

    def include(self):
        J = dz.inclusion_operator(self.basis_in, self.basis_out)
        return J.entries if self.exact else J.to_numpy()

    def identity(self, level="in"):
        n = self._basis(level).size
        if self.exact:
            return ExactMatrix.identity(n, self.basis_in.N)
        return np.eye(n, dtype=complex)

    def finite_rank(self, T, level="in"):
        return T

    def compress(self, X, dom="in", cod="in"):
        return X

    def as_multiplication(self, X, level="in"):
        """``M_g`` with ``g = X 1``, on the given level."""
        b = self._basis(level)
        first = b.first if isinstance(b, dz.TensorBasis) else b
        if isinstance(b, dz.TensorBasis):
            one = np.kron(first.constant_coefficients().to_numpy()[:, 0], np.eye(b.modes.size)[:, 0])
            g = np.asarray(X @ one[:, None]).reshape(first.size, b.modes.size)
            # g = sum c_wk e_w e_k, and e_w = N^{d/2} chi_w, so on [w] it is N^{d/2} sum_k c_wk e_k
            vals = g * first.N ** (first.depth / 2)
            out = np.zeros((b.size, b.size), dtype=complex)
            for col, k in enumerate(b.modes):
                if np.any(vals[:, col]):
                    T = dz._trig_matrix(dz.TrigPolynomial({int(k): 1.0}), b.modes, b.modes)
                    out += np.kron(np.diag(vals[:, col]), T)
            return out
        one = first.constant_coefficients()
        if self.exact and isinstance(X, ExactMatrix):
            g = X @ one
            vals = [g.entry(k, 0) * first.scale() for k in range(b.size)]
            return ExactMatrix.diagonal(vals, first.N)
        g = np.asarray(X @ one.to_numpy()).reshape(-1) * first.N ** (first.depth / 2)
        return np.diag(g)


class OperatorRealization:
    exact = False

    def __init__(self, sys, basis_in, basis_out):
        self.system = sys
        self.basis_in = basis_in
        self.basis_out = basis_out

    def _basis(self, level):
        return self.basis_in if level == "in" else self.basis_out

    def element(self, om: dz.OperatorMatrix):
        if om.op is None:
            raise ValueError("circle operator matrices need a pointwise operator")
        return om.op

    def mult(self, f, level="in"):
        return dz.Multiplication(f)

    def alpha(self, f):
        return dz.Multiplication(dz.pullback(self.system, f))

    def include(self):
        return dz.Identity()

    def identity(self, level="in"):
        return dz.Identity()

    def finite_rank(self, T, level="in"):
        b = self._basis(level)
        return dz.FiniteRank(np.asarray(T, dtype=complex), b, b)

    def compress(self, X, dom="in", cod="in"):
        return dz.compress(X, self._basis(dom), self._basis(cod))

    def as_multiplication(self, X, level="in"):
        return dz.Multiplication(X.function())


def realize(sys, basis_in, basis_out, exact: bool | None = None):
    if isinstance(basis_in, dz.FourierBasis):
        return OperatorRealization(sys, basis_in, basis_out)
    if exact is None:
        exact = isinstance(basis_in, dz.CylinderBasis)
    return MatrixRealization(sys, basis_in, basis_out, exact)
