"""Truncated orthonormal bases of L^2(X, mu) and operators between them.

Two arithmetic paths coexist:

* shift kinds use normalised cylinder indicators ``e_w = N^{d/2} chi_[w]``
  and exact :class:`~cuntzkit.exact.ExactMatrix` entries;
* circle kinds use Fourier modes (orthonormalised against ``rho`` for the
  weighted monomial) with floating point entries.  Operators on the circle
  are also kept as pointwise :class:`Operator` objects, so products of
  operators can be compressed to a pair of bases without first truncating
  each factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from . import dynamics as dyn
from .dynamics import SystemDescriptor, SystemKind
from .exact import ExactMatrix, Surd, mpq
from .quadrature import Quadrature


class SpilloverError(ValueError):
    """A pulled-back basis vector has too much mass outside the codomain basis."""

    def __init__(self, spill: float, column: int, tol: float):
        self.spill, self.column, self.tol = spill, column, tol
        super().__init__(f"spillover {spill:.3e} in column {column} exceeds {tol:.1e}")


class QuadratureError(RuntimeError):
    """Quadrature refinement did not converge below the cap."""


class RankDeficiencyError(ValueError):
    """The operator is not bounded below at this truncation."""


# ---------------------------------------------------------------------------
# test functions


class TrigPolynomial:
    """``f(t) = sum_n c_n exp(2 pi i n t)`` with finitely many terms."""

    def __init__(self, coeffs: Mapping[int, complex]):
        self.coeffs = {int(n): complex(c) for n, c in coeffs.items() if c != 0}

    @classmethod
    def mode(cls, n: int, c: complex = 1.0) -> "TrigPolynomial":
        return cls({n: c})

    @property
    def degree(self) -> int:
        return max((abs(n) for n in self.coeffs), default=0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for n, c in self.coeffs.items():
            out = out + c * np.exp(2j * np.pi * n * t)
        return out

    def coefficient(self, n: int) -> complex:
        return self.coeffs.get(int(n), 0.0)

    def dilate(self, N: int) -> "TrigPolynomial":
        """``t -> f(N t)``."""
        return TrigPolynomial({N * n: c for n, c in self.coeffs.items()})

    def rotate(self, tau: float) -> "TrigPolynomial":
        """``t -> f(t + tau)``."""
        return TrigPolynomial({n: c * np.exp(2j * np.pi * n * tau) for n, c in self.coeffs.items()})

    def conj(self) -> "TrigPolynomial":
        return TrigPolynomial({-n: np.conj(c) for n, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            out: dict[int, complex] = {}
            for (n, a), (m, b) in itertools.product(self.coeffs.items(), other.coeffs.items()):
                out[n + m] = out.get(n + m, 0) + a * b
            return TrigPolynomial(out)
        return TrigPolynomial({n: c * other for n, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"TrigPolynomial({self.coeffs})"


@dataclass(frozen=True)
class SeparableFunction:
    """``f(w, t) = g(w) * h(t)`` on the product of the shift and the circle."""

    shift_part: Callable
    circle_part: TrigPolynomial


def pullback(sys: SystemDescriptor, f):
    """``f o phi`` in the same representation as ``f``."""
    k, N = sys.kind, sys.N
    if k is SystemKind.FULL_SHIFT:
        return lambda w: f(tuple(w)[1:])
    if k is SystemKind.PRODUCT_SHIFT_ROTATION:
        return SeparableFunction(lambda w: f.shift_part(tuple(w)[1:]), f.circle_part.rotate(sys.tau))
    if isinstance(f, TrigPolynomial) and k is not SystemKind.BLASCHKE_COVER:
        return f.dilate(N)
    return lambda x: f(dyn.evaluate_map(sys, np.asarray(x, dtype=float)))


# ---------------------------------------------------------------------------
# quadrature attached to a circle system


@lru_cache(maxsize=None)
def decomposition(sys: SystemDescriptor) -> dyn.BranchDecomposition:
    """Cached :func:`dynamics.decompose`."""
    return dyn.decompose(sys)


@lru_cache(maxsize=None)
def circle_quadrature(sys: SystemDescriptor, nodes: int = 4096, depth: int = 2) -> Quadrature:
    """Composite rule whose panels break at every discontinuity the operators create.

    The break set is ``{0, cut}`` together with the branch boundaries, closed
    under the sections ``depth`` times.
    """
    decomp = decomposition(sys)
    pts = {0.0, decomp.cut, *decomp.breaks}
    frontier = np.array(sorted(pts))
    for _ in range(depth):
        images = np.concatenate([np.atleast_1d(psi(frontier)) for psi in decomp.sections])
        pts.update(float(v) for v in images)
        frontier = images
    return Quadrature(sorted(pts), nodes=nodes, density=sys.density)


# ---------------------------------------------------------------------------
# bases


def mode_order(K: int) -> np.ndarray:
    """``0, 1, -1, 2, -2, ..., K, -K`` so that smaller truncations are prefixes."""
    out = [0]
    for k in range(1, K + 1):
        out += [k, -k]
    return np.array(out, dtype=np.int64)


class FourierBasis:
    """Modes ``|k| <= K``, orthonormal under ``mu``.

    Unweighted: ``e_k(t) = exp(2 pi i k t)``.  Weighted: the modes in
    :func:`mode_order` are Gram-Schmidt orthonormalised against ``rho dt``
    (via a Cholesky factor), which keeps every truncation a prefix.
    """

    kind = "FourierModes"

    def __init__(self, sys: SystemDescriptor, K: int, quad: Quadrature):
        if K < 0:
            raise ValueError("K must be >= 0")
        self.system = sys
        self.K = K
        self.quad = quad
        self.modes = mode_order(K)
        self.size = self.modes.size
        self.weighted = sys.density is not None
        self.transform = None
        if self.weighted:
            d = self.modes[:, None] - self.modes[None, :]
            gram = np.vectorize(sys.density.fourier, otypes=[complex])(d) if d.size else d
            L = np.linalg.cholesky(gram)
            # columns of L^{-H} give the orthonormal functions
            self.transform = scipy.linalg.solve_triangular(L, np.eye(self.size), lower=True).conj().T

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        E = np.exp(2j * np.pi * x[:, None] * self.modes[None, :])
        return E if self.transform is None else E @ self.transform

    def index(self, k: int) -> int:
        return 0 if k == 0 else 2 * abs(k) - (1 if k > 0 else 0)

    def constant_coefficients(self) -> np.ndarray:
        """Coefficients of the function 1."""
        c = np.zeros(self.size, dtype=complex)
        if self.transform is None:
            c[0] = 1.0
        else:
            c[:] = np.linalg.solve(self.transform, np.eye(self.size)[:, 0])
        return c

    def coefficients(self, f) -> np.ndarray:
        """Orthogonal projection coefficients ``<e_k, f>``."""
        x = self.quad.x
        return self.quad.gram(self.evaluate(x), np.asarray(f(x), dtype=complex)[:, None])[:, 0]

    def synthesize(self, c) -> Callable:
        c = np.asarray(c, dtype=complex)
        return lambda x: self.evaluate(np.atleast_1d(x)) @ c

    def is_prefix_of(self, other: "FourierBasis") -> bool:
        return self.system == other.system and self.K <= other.K and self.quad is other.quad

    def describe(self) -> dict:
        return {"kind": self.kind, "K": self.K, "size": self.size, "weighted": self.weighted}

    def __eq__(self, other):
        return isinstance(other, FourierBasis) and self.describe() == other.describe() and self.quad is other.quad

    def __hash__(self):
        return hash((self.kind, self.K, id(self.quad)))


def fourier_basis(sys: SystemDescriptor, K: int, nodes: int = 4096) -> FourierBasis:
    if not sys.kind.is_circle:
        raise ValueError("Fourier bases are for circle kinds")
    return FourierBasis(sys, K, circle_quadrature(sys, nodes))


def word_index(w, N: int) -> int:
    idx = 0
    for s in w:
        idx = idx * N + (int(s) - 1)
    return idx


class CylinderBasis:
    """``e_w = N^{d/2} chi_[w]`` over the ``N**d`` words of length ``d`` (lexicographic)."""

    kind = "CylinderDepth"

    def __init__(self, N: int, depth: int):
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.N = N
        self.depth = depth
        self.size = N**depth

    def words(self) -> list:
        return list(itertools.product(range(1, self.N + 1), repeat=self.depth))

    def index(self, w) -> int:
        if len(w) != self.depth:
            raise ValueError(f"word {w} is not of length {self.depth}")
        return word_index(w, self.N)

    def scale(self) -> Surd:
        return Surd.sqrt_power(self.N, self.depth)

    def evaluate(self, prefixes: np.ndarray) -> np.ndarray:
        """Float values on an ``(m, L)`` array of prefixes with ``L >= depth``."""
        prefixes = np.asarray(prefixes)
        idx = (prefixes[:, : self.depth] - 1) @ (self.N ** np.arange(self.depth - 1, -1, -1))
        out = np.zeros((prefixes.shape[0], self.size))
        out[np.arange(prefixes.shape[0]), idx] = self.N ** (self.depth / 2)
        return out

    def constant_coefficients(self) -> ExactMatrix:
        """Column of coefficients of the function 1: ``N^{-d/2}`` everywhere."""
        c = Surd.sqrt_power(self.N, -self.depth)
        return ExactMatrix.from_entries([[c] for _ in range(self.size)], n=self.N)

    def describe(self) -> dict:
        return {"kind": self.kind, "N": self.N, "depth": self.depth, "size": self.size}

    def __eq__(self, other):
        return isinstance(other, CylinderBasis) and (self.N, self.depth) == (other.N, other.depth)

    def __hash__(self):
        return hash((self.kind, self.N, self.depth))


class TensorBasis:
    """Product of a cylinder basis and an (unweighted) Fourier basis, cylinder index major."""

    kind = "TensorProduct"

    def __init__(self, first: CylinderBasis, K: int):
        self.first = first
        self.K = K
        self.modes = mode_order(K)
        self.size = first.size * self.modes.size

    def describe(self) -> dict:
        return {"kind": self.kind, "factors": [self.first.describe(), {"kind": "FourierModes", "K": self.K}], "size": self.size}

    def __eq__(self, other):
        return isinstance(other, TensorBasis) and self.first == other.first and self.K == other.K

    def __hash__(self):
        return hash((self.kind, self.first, self.K))


def gram_defect(basis, nodes: int | None = None) -> float:
    """``||Gram - I||`` for a basis (exactly 0 for cylinder and tensor bases)."""
    if isinstance(basis, FourierBasis):
        q = basis.quad
        E = basis.evaluate(q.x)
        return float(np.abs(q.gram(E, E) - np.eye(basis.size)).max())
    if isinstance(basis, CylinderBasis):
        # e_w e_v integrates to N^d mu[w] delta = delta exactly
        return 0.0
    return 0.0


# ---------------------------------------------------------------------------
# pointwise operators on the circle


def _batch_const(x):
    return np.ones((np.size(x), 1), dtype=complex)


class Operator:
    """Linear operator acting pointwise on batches of functions.

    A batch is a callable ``x -> array (len(x), m)``; ``apply`` returns a new
    batch.
    """

    def apply(self, F: Callable) -> Callable:
        raise NotImplementedError

    @property
    def H(self) -> "Operator":
        raise NotImplementedError

    def __matmul__(self, other: "Operator") -> "Operator":
        return Product([self, other])

    def __add__(self, other: "Operator") -> "Operator":
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other: "Operator") -> "Operator":
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __neg__(self):
        return LinearCombination([(-1.0, self)])

    def __mul__(self, c):
        return LinearCombination([(c, self)])

    __rmul__ = __mul__

    def function(self) -> Callable:
        """The image of the constant function 1 as a scalar function."""
        g = self.apply(_batch_const)
        return lambda x: g(np.atleast_1d(np.asarray(x, dtype=float)))[:, 0]


class Identity(Operator):
    def apply(self, F):
        return F

    @property
    def H(self):
        return self


def _vals(f, x):
    return np.asarray(f(x), dtype=complex).reshape(-1)


class Multiplication(Operator):
    def __init__(self, f: Callable):
        self.f = f

    def apply(self, F):
        f = self.f
        return lambda x: _vals(f, x)[:, None] * F(x)

    @property
    def H(self):
        f = self.f
        return Multiplication(lambda x: np.conj(_vals(f, x)))


class Composition(Operator):
    """``F -> F o phi``."""

    def __init__(self, sys: SystemDescriptor):
        self.sys = sys

    def apply(self, F):
        sys = self.sys
        return lambda x: F(np.atleast_1d(np.asarray(dyn.evaluate_map(sys, x), dtype=float)))

    @property
    def H(self):
        return PullbackSum(self.sys)


class PullbackSum(Operator):
    """``F -> sum_i u_i F o psi_i``, the adjoint of composition."""

    def __init__(self, sys: SystemDescriptor):
        self.sys = sys

    def apply(self, F):
        d = decomposition(self.sys)

        def out(y):
            acc = 0
            for psi, u in zip(d.sections, d.weights):
                acc = acc + np.asarray(u(y), dtype=float)[:, None] * F(psi(y))
            return acc

        return out

    @property
    def H(self):
        return Composition(self.sys)


class Section(Operator):
    """``(S_i F)(x) = chi_{U_i}(x) F(phi x) u_i(phi x)^{-1/2}``."""

    def __init__(self, sys: SystemDescriptor, i: int):
        self.sys, self.i = sys, i

    def apply(self, F):
        d = decomposition(self.sys)
        sys, i = self.sys, self.i

        def out(x):
            x = np.asarray(x, dtype=float)
            y = np.atleast_1d(np.asarray(dyn.evaluate_map(sys, x), dtype=float))
            mask = d.branch_index(x) == i
            # on U_i, u_i(phi x) is the inverse Jacobian at x: no inversion needed
            return (mask / np.sqrt(d.inverse_jacobian(x)))[:, None] * F(y)

        return out

    @property
    def H(self):
        return SectionAdjoint(self.sys, self.i)


class SectionAdjoint(Operator):
    """``(S_i^* G)(y) = u_i(y)^{1/2} G(psi_i y)``."""

    def __init__(self, sys: SystemDescriptor, i: int):
        self.sys, self.i = sys, i

    def apply(self, G):
        d = decomposition(self.sys)
        psi, u = d.sections[self.i], d.weights[self.i]
        return lambda y: np.sqrt(u(y))[:, None] * G(psi(y))

    @property
    def H(self):
        return Section(self.sys, self.i)


class Product(Operator):
    def __init__(self, factors):
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, Product) else [f])
        self.factors = flat

    def apply(self, F):
        for op in reversed(self.factors):
            F = op.apply(F)
        return F

    @property
    def H(self):
        return Product([f.H for f in reversed(self.factors)])


class LinearCombination(Operator):
    def __init__(self, terms):
        self.terms = list(terms)

    def apply(self, F):
        parts = [(c, op.apply(F)) for c, op in self.terms]

        def out(x):
            acc = 0
            for c, G in parts:
                acc = acc + c * G(x)
            return acc

        return out

    @property
    def H(self):
        return LinearCombination([(np.conj(c), op.H) for c, op in self.terms])


class FiniteRank(Operator):
    """``F -> sum_jk e_j T_jk <e_k, F>`` between two Fourier bases."""

    def __init__(self, T: np.ndarray, domain: FourierBasis, codomain: FourierBasis):
        T = np.asarray(T, dtype=complex)
        if T.shape != (codomain.size, domain.size):
            raise ValueError("matrix shape does not match bases")
        self.T, self.domain, self.codomain = T, domain, codomain

    def apply(self, F):
        q = self.domain.quad
        coeffs = self.T @ q.gram(self.domain.evaluate(q.x), F(q.x))
        cod = self.codomain
        return lambda x: cod.evaluate(x) @ coeffs

    @property
    def H(self):
        return FiniteRank(self.T.conj().T, self.codomain, self.domain)


def compress(op: Operator, domain: FourierBasis, codomain: FourierBasis, quad: Quadrature | None = None) -> np.ndarray:
    """Entries ``<e_j, op e_k>_mu``."""
    q = quad or codomain.quad
    images = op.apply(domain.evaluate)(q.x)
    return q.gram(codomain.evaluate(q.x), images)


# ---------------------------------------------------------------------------
# operator matrices


@dataclass
class OperatorMatrix:
    """Dense matrix of an operator between two truncation bases.

    ``entries`` is an :class:`ExactMatrix` on exact paths and a complex
    ndarray otherwise; ``op`` is the pointwise operator it compresses (circle
    kinds).
    """

    domain: object
    codomain: object
    entries: object
    op: Operator | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.entries.shape) != (self.codomain.size, self.domain.size):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match bases "
                f"({self.codomain.size}, {self.domain.size})"
            )

    @property
    def exact(self) -> bool:
        return isinstance(self.entries, ExactMatrix)

    @property
    def shape(self):
        return tuple(self.entries.shape)

    def to_numpy(self) -> np.ndarray:
        return self.entries.to_numpy() if self.exact else np.asarray(self.entries, dtype=complex)

    def adjoint(self) -> "OperatorMatrix":
        ent = self.entries.H if self.exact else self.entries.conj().T
        return OperatorMatrix(self.codomain, self.domain, ent, None if self.op is None else self.op.H, dict(self.meta))


def _is_exact_value(v) -> bool:
    return isinstance(v, (Surd, Rational, int))


def _exact_or_float(values, n):
    if all(_is_exact_value(v) for v in values):
        return [v if isinstance(v, Surd) else Surd(mpq(v), 0, n) for v in values], True
    return [complex(v) for v in values], False


# -- shift (exact) ------------------------------------------------------------


def shift_inclusion(basis: CylinderBasis, codomain: CylinderBasis) -> OperatorMatrix:
    """``J e_w = N^{-(d'-d)/2} sum_{v extends w} e_v``."""
    N, d, dd = basis.N, basis.depth, codomain.depth
    if dd < d:
        raise ValueError("codomain must be at least as deep as the domain")
    c = Surd.sqrt_power(N, d - dd)
    rat = np.zeros((codomain.size, basis.size), dtype=np.int64)
    block = N ** (dd - d)
    for k in range(basis.size):
        rat[k * block : (k + 1) * block, k] = 1
    return OperatorMatrix(basis, codomain, ExactMatrix.from_int(rat, N).scale(c), meta={"name": "J"})


def multiplication_operator(f, basis, codomain=None, *, tol: float = 1e-10, max_nodes: int = 1 << 16) -> OperatorMatrix:
    """Compression of ``M_f`` from ``basis`` to ``codomain`` (default: same basis).

    Shift: ``f`` is a callable on words, constant on cylinders of the codomain
    depth; entries are exact when its values are rationals or :class:`Surd`.
    Circle: closed form for a :class:`TrigPolynomial` in unweighted bases,
    refined quadrature otherwise.  Tensor: ``f`` is a
    :class:`SeparableFunction`.
    """
    codomain = basis if codomain is None else codomain
    if isinstance(basis, CylinderBasis):
        return _shift_multiplication(f, basis, codomain)
    if isinstance(basis, TensorBasis):
        g = multiplication_operator(f.shift_part, basis.first, codomain.first).to_numpy()
        h = _trig_matrix(f.circle_part, basis.modes, codomain.modes)
        return OperatorMatrix(basis, codomain, np.kron(g, h))
    op = Multiplication(f)
    if isinstance(f, TrigPolynomial) and not basis.weighted:
        ent = _trig_matrix(f, basis.modes, codomain.modes)
        return OperatorMatrix(basis, codomain, ent, op)
    ent = compress(op, basis, codomain)
    nodes = basis.quad.nodes
    while True:
        nodes *= 2
        if nodes > max_nodes:
            raise QuadratureError(f"multiplication operator did not converge to {tol:g} within {max_nodes} nodes")
        q = Quadrature(basis.quad.breakpoints, nodes=nodes, density=basis.system.density)
        finer = compress(op, basis, codomain, quad=q)
        if np.abs(finer - ent).max() <= tol:
            return OperatorMatrix(basis, codomain, finer, op)
        ent = finer


def _trig_matrix(f: TrigPolynomial, modes_in, modes_out) -> np.ndarray:
    diff = np.asarray(modes_out)[:, None] - np.asarray(modes_in)[None, :]
    out = np.zeros(diff.shape, dtype=complex)
    for n, c in f.coeffs.items():
        out[diff == n] = c
    return out


def _shift_multiplication(f, basis: CylinderBasis, codomain: CylinderBasis) -> OperatorMatrix:
    N, d, dd = basis.N, basis.depth, codomain.depth
    if dd < d:
        raise ValueError("codomain must be at least as deep as the domain")
    words = codomain.words()
    values, exact = _exact_or_float([f(v) for v in words], N)
    block = N ** (dd - d)
    scale = Surd.sqrt_power(N, d - dd)
    if exact:
        items = [(r, r // block, v * scale) for r, v in enumerate(values)]
        return OperatorMatrix(basis, codomain, ExactMatrix.from_sparse((codomain.size, basis.size), items, N))
    ent = np.zeros((codomain.size, basis.size), dtype=complex)
    for r, v in enumerate(values):
        ent[r, r // block] = v * float(scale)
    return OperatorMatrix(basis, codomain, ent)


def composition_operator(
    sys: SystemDescriptor,
    basis_in,
    basis_out,
    *,
    spillover_tol: float = 1e-8,
    on_spillover: str = "raise",
) -> OperatorMatrix:
    """Compression of ``C_phi f = f o phi``.

    Circle kinds check how much of each ``e_k o phi`` falls outside
    ``basis_out``; above ``spillover_tol`` this raises
    :class:`SpilloverError` unless ``on_spillover="record"``, in which case
    the worst spillover is stored in ``meta``.
    """
    if on_spillover not in ("raise", "record"):
        raise ValueError("on_spillover must be 'raise' or 'record'")
    if sys.kind is SystemKind.FULL_SHIFT:
        return _shift_composition(basis_in, basis_out)
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        c = _shift_composition(basis_in.first, basis_out.first).to_numpy()
        phase = np.diag(np.exp(2j * np.pi * basis_in.modes * sys.tau))
        emb = _trig_matrix(TrigPolynomial({0: 1}), basis_in.modes, basis_out.modes)
        return OperatorMatrix(basis_in, basis_out, np.kron(c, emb @ phase))
    op = Composition(sys)
    if sys.kind is SystemKind.CIRCLE_MONOMIAL:
        ent = np.zeros((basis_out.size, basis_in.size), dtype=complex)
        spill = np.zeros(basis_in.size)
        for col, k in enumerate(basis_in.modes):
            if abs(sys.N * k) <= basis_out.K:
                ent[basis_out.index(sys.N * k), col] = 1.0
            else:
                spill[col] = 1.0
    else:
        ent = compress(op, basis_in, basis_out)
        q = basis_in.quad
        pulled = op.apply(basis_in.evaluate)(q.x)
        norms = np.real(np.einsum("q,qk->k", q.w, np.abs(pulled) ** 2))
        spill = np.maximum(norms - np.sum(np.abs(ent) ** 2, axis=0), 0.0)
    worst = int(np.argmax(spill)) if spill.size else 0
    meta = {"name": "C_phi", "spillover": float(spill.max(initial=0.0))}
    if meta["spillover"] > spillover_tol and on_spillover == "raise":
        raise SpilloverError(meta["spillover"], worst, spillover_tol)
    return OperatorMatrix(basis_in, basis_out, ent, op, meta)


def _shift_composition(basis_in: CylinderBasis, basis_out: CylinderBasis) -> OperatorMatrix:
    """``C e_w = N^{-1/2} sum_i e_{iw}``, followed by inclusion if deeper."""
    N, d = basis_in.N, basis_in.depth
    if basis_out.depth < d + 1:
        raise ValueError("shift composition needs codomain depth >= domain depth + 1")
    mid = CylinderBasis(N, d + 1)
    rat = np.zeros((mid.size, basis_in.size), dtype=np.int64)
    for w in basis_in.words():
        for i in range(1, N + 1):
            rat[mid.index((i,) + w), basis_in.index(w)] = 1
    C = ExactMatrix.from_int(rat, N).scale(Surd.sqrt_power(N, -1))
    if basis_out.depth > d + 1:
        C = shift_inclusion(mid, basis_out).entries @ C
    return OperatorMatrix(basis_in, basis_out, C, meta={"name": "C_phi"})


def inclusion_operator(basis, codomain) -> OperatorMatrix:
    """The inclusion of span(basis) into span(codomain)."""
    if isinstance(basis, CylinderBasis):
        return shift_inclusion(basis, codomain)
    if isinstance(basis, TensorBasis):
        j = shift_inclusion(basis.first, codomain.first).to_numpy()
        e = _trig_matrix(TrigPolynomial({0: 1}), basis.modes, codomain.modes)
        return OperatorMatrix(basis, codomain, np.kron(j, e))
    if not basis.is_prefix_of(codomain):
        raise ValueError("inclusion needs nested Fourier bases")
    ent = np.eye(codomain.size, basis.size, dtype=complex)
    return OperatorMatrix(basis, codomain, ent, Identity(), {"name": "J"})


# ---------------------------------------------------------------------------
# polar decomposition


def singular_bounds(C: OperatorMatrix) -> tuple[float, float]:
    """Smallest and largest singular value of ``C`` restricted to its domain span.

    With a pointwise operator attached the singular values come from the
    Gram matrix of the images ``C e_k`` (no codomain truncation); otherwise
    from the SVD of the entries.
    """
    if C.op is not None and isinstance(C.domain, FourierBasis):
        q = C.domain.quad
        imgs = C.op.apply(C.domain.evaluate)(q.x)
        ev = np.linalg.eigvalsh(q.gram(imgs, imgs))
        s = np.sqrt(np.clip(ev, 0.0, None))
    else:
        s = np.linalg.svd(C.to_numpy(), compute_uv=False)
    if s.size == 0:
        return 0.0, 0.0
    return float(s.min()), float(s.max())


@dataclass
class PolarDecomposition:
    S: OperatorMatrix
    a: OperatorMatrix
    reconstruction: float
    h: Callable | None = None  # a = M_h when a is a multiplication operator


def polar_decompose(C: OperatorMatrix, *, rank_tol: float = 1e-10) -> PolarDecomposition:
    """``C = S a`` with ``a = (C^*C)^{1/2}`` and ``S = C a^{-1}``.

    Exact isometries (``C^H C == I``) return ``(C, I)`` exactly.  Otherwise
    ``a`` comes from the SVD (or, with a pointwise operator, from the Gram
    matrix of images, which avoids codomain truncation); the function ``h``
    with ``a = M_h`` is read off as ``a`` applied to 1 and ``S`` is realised
    pointwise as ``C o M_{1/h}``.
    """
    if C.exact:
        G = C.entries.H @ C.entries
        n = C.domain.size
        if G == ExactMatrix.identity(n, C.entries.n):
            ident = OperatorMatrix(C.domain, C.domain, ExactMatrix.identity(n, C.entries.n), meta={"name": "a_phi"})
            S = OperatorMatrix(C.domain, C.codomain, C.entries, meta={"name": "S_phi"})
            return PolarDecomposition(S, ident, 0.0, h=lambda w: 1)
        C = OperatorMatrix(C.domain, C.codomain, C.to_numpy(), meta=C.meta)
    if C.op is not None and isinstance(C.domain, FourierBasis):
        q = C.domain.quad
        imgs = C.op.apply(C.domain.evaluate)(q.x)
        G = q.gram(imgs, imgs)
        G = 0.5 * (G + G.conj().T)
        ev, V = np.linalg.eigh(G)
        if ev.min() <= rank_tol**2:
            raise RankDeficiencyError(f"smallest singular value {math.sqrt(max(ev.min(), 0)):.3e} <= {rank_tol:g}")
        sv = np.sqrt(ev)
        a = (V * sv) @ V.conj().T
        a_inv = (V / sv) @ V.conj().T
        Cm = C.to_numpy()
        S_ent = Cm @ a_inv
        recon = float(np.linalg.norm(S_ent @ a - Cm, 2))
        h = C.domain.synthesize(a @ C.domain.constant_coefficients())
        S_op = C.op @ Multiplication(lambda x: 1.0 / h(x))
        S = OperatorMatrix(C.domain, C.codomain, S_ent, S_op, {"name": "S_phi"})
        A = OperatorMatrix(C.domain, C.domain, a, Multiplication(h), {"name": "a_phi"})
        return PolarDecomposition(S, A, recon, h)
    Cm = C.to_numpy()
    U, s, Vh = np.linalg.svd(Cm, full_matrices=False)
    if s.size and s.min() <= rank_tol:
        raise RankDeficiencyError(f"smallest singular value {s.min():.3e} <= {rank_tol:g}")
    a = (Vh.conj().T * s) @ Vh
    S_ent = U @ Vh
    recon = float(np.linalg.norm(S_ent @ a - Cm, 2))
    S = OperatorMatrix(C.domain, C.codomain, S_ent, None, {"name": "S_phi"})
    A = OperatorMatrix(C.domain, C.domain, a, None, {"name": "a_phi"})
    return PolarDecomposition(S, A, recon)
