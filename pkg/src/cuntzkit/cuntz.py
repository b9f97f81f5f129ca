"""Cuntz families implementing the Koopman endomorphism, by two routes.

Route one builds the section isometries
``(S_i f)(x) = chi_{U_i}(x) f(phi x) u_i(phi x)^{-1/2}`` directly.  Route two
goes through the polar decomposition ``C_phi = S_phi a_phi``, the transfer
operator ``L(a) = S_phi^* M_a S_phi`` and an orthonormal basis ``xi_i`` of the
module ``L^infty(X, mu)_L``, and lifts it to ``M_{xi_i} S_phi``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import discretize as dz
from . import dynamics as dyn
from .dynamics import SystemDescriptor, SystemKind
from .exact import ExactMatrix, Surd, mpq
from .realization import adj, realize, spectral_norm, total


class Route(enum.Enum):
    SECTIONS = "Sections"
    POLAR_MODULE_BASIS = "PolarModuleBasis"
    TWISTED = "Twisted"


class NotOrthonormalError(ValueError):
    pass


class TransferMismatchError(RuntimeError):
    """The operator and pointwise transfer routes disagree."""


class NotUnitaryError(ValueError):
    pass


@dataclass
class CuntzFamily:
    isometries: list
    route: Route
    system: SystemDescriptor
    defects: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.isometries)

    @property
    def basis_in(self):
        return self.isometries[0].domain

    @property
    def basis_out(self):
        return self.isometries[0].codomain

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.isometries)

    def realization(self):
        return realize(self.system, self.basis_in, self.basis_out, exact=self.exact)

    def elements(self, R=None):
        R = R or self.realization()
        return [R.element(s) for s in self.isometries]


def relation_defects(family: CuntzFamily) -> dict:
    """``max_ij ||S_i^* S_j - delta_ij I||`` and ``||sum_i S_i S_i^* - I||``."""
    R = family.realization()
    S = family.elements(R)
    rel, exact = 0.0, True
    I_in = R.identity("in")
    zero = None
    for i, Si in enumerate(S):
        for j, Sj in enumerate(S):
            X = R.compress(adj(Si) @ Sj, "in", "in")
            if i == j:
                X = X - R.compress(I_in, "in", "in")
            v, ex = spectral_norm(X)
            rel, exact = max(rel, v), exact and ex
    X = R.compress(total([Si @ adj(Si) for Si in S]), "out", "out") - R.compress(R.identity("out"), "out", "out")
    v, ex = spectral_norm(X)
    return {"isometry": rel, "completeness": v, "exact": exact and ex}


def _finish(family: CuntzFamily) -> CuntzFamily:
    family.defects = relation_defects(family)
    return family


# ---------------------------------------------------------------------------
# route one: sections


def _shift_section_matrix(basis_in: dz.CylinderBasis, basis_out: dz.CylinderBasis, i: int) -> ExactMatrix:
    """``S_i e_w = e_{iw}`` (``i`` is 1-based)."""
    if basis_out.depth != basis_in.depth + 1:
        raise ValueError("shift sections map depth d to depth d + 1")
    rat = np.zeros((basis_out.size, basis_in.size), dtype=np.int64)
    for w in basis_in.words():
        rat[basis_out.index((i,) + w), basis_in.index(w)] = 1
    return ExactMatrix.from_int(rat, basis_in.N)


def cuntz_from_sections(sys: SystemDescriptor, decomp, basis_in, basis_out) -> CuntzFamily:
    N = sys.N
    mats = []
    if sys.kind is SystemKind.FULL_SHIFT:
        for i in range(1, N + 1):
            mats.append(dz.OperatorMatrix(basis_in, basis_out, _shift_section_matrix(basis_in, basis_out, i), meta={"name": f"S_{i}"}))
    elif sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        if basis_in.K != basis_out.K:
            raise ValueError("product sections keep the Fourier truncation")
        phase = np.diag(np.exp(2j * np.pi * basis_in.modes * sys.tau))
        for i in range(1, N + 1):
            s = _shift_section_matrix(basis_in.first, basis_out.first, i).to_numpy()
            mats.append(dz.OperatorMatrix(basis_in, basis_out, np.kron(s, phase), meta={"name": f"S_{i}"}))
    else:
        for i in range(N):
            op = dz.Section(sys, i)
            mats.append(dz.OperatorMatrix(basis_in, basis_out, dz.compress(op, basis_in, basis_out), op, {"name": f"S_{i + 1}"}))
    return _finish(CuntzFamily(mats, Route.SECTIONS, sys, meta={"decomposition": "maximal"}))


# ---------------------------------------------------------------------------
# transfer operator


def _conj(v):
    if isinstance(v, np.ndarray):
        return np.conj(v)
    if isinstance(v, (Surd, int)) or hasattr(v, "numerator"):
        return v  # exact values here are real
    return np.conj(v)


def _exact_sqrt_inverse(u, N):
    """``u^{-1/2}`` for ``u = N^{-k}`` given exactly."""
    u = mpq(u)
    k = 0
    while u < 1:
        u *= N
        k += 1
    if u != 1:
        raise ValueError("weight is not a power of 1/N")
    return Surd.sqrt_power(N, k)


@dataclass
class TransferData:
    """Transfer operator ``L``, the positive part ``a_phi = M_h`` and the density ``w``."""

    system: SystemDescriptor
    decomposition: object
    S_phi: dz.OperatorMatrix
    a_phi: Callable
    w: Callable
    route_defects: dict = field(default_factory=dict)

    def L_action(self, a: Callable) -> Callable:
        """Pointwise ``L(a)(y) = w(y)^{-1} sum_i u_i(y) a(psi_i(y))``."""
        d = self.decomposition

        def La(y):
            acc = 0
            for psi, u in zip(d.sections, d.weights):
                acc = acc + u(y) * a(psi(y))
            return acc / self.w(y)

        return La

    def alpha(self, a: Callable) -> Callable:
        return dz.pullback(self.system, a)


def _shift_function_from_coefficients(c: ExactMatrix, basis: dz.CylinderBasis):
    vals = {w: c.entry(basis.index(w), 0) * basis.scale() for w in basis.words()}
    d = basis.depth
    return lambda y: vals[tuple(y)[:d]]


def default_transfer_tests(sys: SystemDescriptor, basis_in) -> list:
    if sys.kind is SystemKind.FULL_SHIFT:
        N = sys.N
        return [
            lambda w: 1 if tuple(w)[:1] == (1,) else 0,
            lambda w: sum(int(s) for s in tuple(w)[: basis_in.depth + 1]),
        ]
    return [dz.TrigPolynomial({1: 1.0}), dz.TrigPolynomial({0: 0.5, 2: 0.25, -3: 0.5j})]


def transfer(sys: SystemDescriptor, decomp, S_phi: dz.OperatorMatrix, tests: Sequence | None = None, *, tol: float = 1e-6) -> TransferData:
    """Transfer operator from the isometric part of ``C_phi``.

    ``h`` is recovered as ``C_phi^* S_phi 1`` (since ``C^* S = a S^* S = a``),
    and the operator route ``S_phi^* M_a S_phi`` is reconciled against the
    pointwise formula on the test functions.
    """
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        raise NotImplementedError("transfer data is built for shift and circle kinds")
    b_in, b_out = S_phi.domain, S_phi.codomain
    C = dz.composition_operator(sys, b_in, b_out, on_spillover="record")
    R = realize(sys, b_in, b_out, exact=S_phi.exact)
    if sys.kind is SystemKind.FULL_SHIFT:
        hc = C.entries.H @ S_phi.entries @ b_in.constant_coefficients()
        h = _shift_function_from_coefficients(hc, b_in)
        w = decomp.density
    else:
        op = C.op.H @ S_phi.op
        h = op.function()
        w = decomp.density
    data = TransferData(sys, decomp, S_phi, h, w)
    S = R.element(S_phi)
    worst = 0.0
    exact = True
    for a in tests if tests is not None else default_transfer_tests(sys, b_in):
        route_i = R.compress(adj(S) @ R.mult(a, "out") @ S, "in", "in")
        route_ii = R.mult(data.L_action(a), "in")
        v, ex = spectral_norm(route_i - R.compress(route_ii, "in", "in"))
        worst, exact = max(worst, v), exact and ex
    data.route_defects = {"operator_vs_pointwise": worst, "exact": exact}
    if worst > tol:
        raise TransferMismatchError(f"transfer routes disagree by {worst:.3e}")
    return data


# ---------------------------------------------------------------------------
# module vectors


class ModuleVector:
    """Element ``xi`` of the module ``L^infty(X, mu)_L``.

    ``xi . a = xi alpha(a)`` and ``<eta, xi>_L = L(conj(eta) xi)``.
    """

    def __init__(self, func: Callable, transfer: TransferData, name: str = ""):
        self.func = func
        self.transfer = transfer
        self.name = name

    def __call__(self, x):
        return self.func(x)

    def act(self, a: Callable) -> "ModuleVector":
        pa = self.transfer.alpha(a)
        f = self.func
        return ModuleVector(lambda x: f(x) * pa(x), self.transfer, f"{self.name}.a")

    def inner(self, other: "ModuleVector") -> Callable:
        f, g = self.func, other.func
        return self.transfer.L_action(lambda x: _conj(f(x)) * g(x))

    def samples(self, grid):
        if isinstance(grid, list):
            return [self.func(x) for x in grid]
        return np.asarray(self.func(grid))


def sample_grid(sys: SystemDescriptor, size: int = 512, depth: int = 4):
    """Points at which module identities are sampled."""
    if sys.kind is SystemKind.FULL_SHIFT:
        return [tuple(int(s) for s in w) for w in dyn.all_words(sys.N, depth)]
    return (np.arange(size) + 0.5) / size


def module_basis_from_sections(sys: SystemDescriptor, decomp, transfer: TransferData, *, tol: float = 1e-6) -> list:
    """``xi_i = chi_{U_i} (h o phi) (u_i o phi)^{-1/2}``.

    With this choice ``xi_i S_phi = S_i`` (sections route) and
    ``<xi_i, xi_j>_L = delta_ij``.
    """
    N, h = sys.N, transfer.a_phi
    out = []
    if sys.kind is SystemKind.FULL_SHIFT:
        for i in range(N):
            c = _exact_sqrt_inverse(decomp.weights[i](()), N)

            def xi(x, i=i, c=c):
                x = tuple(x)
                return c * h(x[1:]) if x[0] == i + 1 else Surd(0, 0, N)

            out.append(ModuleVector(xi, transfer, f"xi_{i + 1}"))
    else:
        for i in range(N):

            def xi(x, i=i):
                x = np.asarray(x, dtype=float)
                mask = decomp.branch_index(x) == i
                y = np.asarray(dyn.evaluate_map(sys, x), dtype=float)
                return mask * h(y) / np.sqrt(decomp.inverse_jacobian(x))

            out.append(ModuleVector(xi, transfer, f"xi_{i + 1}"))
    defect = orthonormality_defect(out)
    if defect > tol:
        raise NotOrthonormalError(f"module basis orthonormality defect {defect:.3e}")
    return out


def orthonormality_defect(xis: Sequence[ModuleVector], grid=None) -> float:
    """``max_ij sup |<xi_i, xi_j>_L - delta_ij|`` on samples."""
    sys = xis[0].transfer.system
    grid = sample_grid(sys) if grid is None else grid
    worst = 0.0
    for i, a in enumerate(xis):
        for j, b in enumerate(xis):
            ip = a.inner(b)
            if isinstance(grid, list):
                vals = [ip(y) - (1 if i == j else 0) for y in grid]
                worst = max(worst, max(abs(float(v)) if isinstance(v, Surd) else abs(complex(v)) for v in vals))
            else:
                worst = max(worst, float(np.abs(ip(grid) - (1.0 if i == j else 0.0)).max()))
    return worst


def lift_to_cuntz(xis: Sequence[ModuleVector], S_phi: dz.OperatorMatrix, *, tol: float = 1e-6) -> CuntzFamily:
    """``{M_{xi_i} S_phi}`` for an orthonormal module basis."""
    if not xis:
        raise NotOrthonormalError("empty module basis")
    defect = orthonormality_defect(xis)
    if defect > tol:
        raise NotOrthonormalError(f"module basis orthonormality defect {defect:.3e}")
    sys = xis[0].transfer.system
    b_in, b_out = S_phi.domain, S_phi.codomain
    mats = []
    for k, xi in enumerate(xis):
        if S_phi.exact:
            M = dz.multiplication_operator(xi.func, b_out).entries
            mats.append(dz.OperatorMatrix(b_in, b_out, M @ S_phi.entries, meta={"name": f"S_{k + 1}"}))
        else:
            op = dz.Multiplication(xi.func) @ S_phi.op
            mats.append(dz.OperatorMatrix(b_in, b_out, dz.compress(op, b_in, b_out), op, {"name": f"S_{k + 1}"}))
    return _finish(CuntzFamily(mats, Route.POLAR_MODULE_BASIS, sys, meta={"basis_size": len(xis)}))


def family_difference(S: CuntzFamily, Q: CuntzFamily) -> tuple[float, bool]:
    """``max_i ||S_i - Q_i||`` compressed to the family's bases."""
    R = S.realization()
    worst, exact = 0.0, True
    for a, b in zip(S.elements(R), Q.elements(R)):
        v, ex = spectral_norm(R.compress(a - b, "in", "out"))
        worst, exact = max(worst, v), exact and ex
    return worst, exact


# ---------------------------------------------------------------------------
# twisting and pairing


def twist_family(S: CuntzFamily, u, *, tol: float = 1e-10) -> CuntzFamily:
    """Scalar twist ``Q_j = sum_i S_i u_ij`` or function twist ``Q_i = S_i M_{m_i}``.

    ``u`` is an ``N x N`` matrix (nested lists of exact rationals keep the
    shift path exact) or a sequence of ``N`` unimodular functions.
    """
    N = S.N
    R = S.realization()
    elems = S.elements(R)
    mats = []
    if _is_scalar_matrix(u):
        exact_u = S.exact and all(isinstance(v, (int,)) or hasattr(v, "numerator") for row in u for v in row)
        U = np.array([[complex(v) for v in row] for row in u])
        if U.shape != (N, N):
            raise NotUnitaryError(f"twist matrix must be {N}x{N}")
        if np.abs(U.conj().T @ U - np.eye(N)).max() > tol:
            raise NotUnitaryError("twist matrix is not unitary")
        for j in range(N):
            if exact_u:
                terms = [S.isometries[i].entries.scale(u[i][j]) for i in range(N)]
                ent = total(terms)
                mats.append(dz.OperatorMatrix(S.basis_in, S.basis_out, ent, meta={"name": f"Q_{j + 1}"}))
            else:
                ent = sum(U[i, j] * S.isometries[i].to_numpy() for i in range(N))
                op = None
                if isinstance(elems[0], dz.Operator):
                    op = dz.LinearCombination([(U[i, j], elems[i]) for i in range(N)])
                mats.append(dz.OperatorMatrix(S.basis_in, S.basis_out, ent, op, {"name": f"Q_{j + 1}"}))
        kind = {"twist": "scalar", "matrix": [[str(v) for v in row] for row in u]}
    else:
        ms = list(u)
        if len(ms) != N:
            raise NotUnitaryError(f"function twist needs {N} functions")
        grid = sample_grid(S.system)
        for m in ms:
            vals = [m(x) for x in grid] if isinstance(grid, list) else m(grid)
            if np.abs(np.abs(np.asarray(vals, dtype=complex)) - 1).max() > tol:
                raise NotUnitaryError("twist function is not unimodular")
        for i in range(N):
            M = R.mult(ms[i], "in")
            X = elems[i] @ M
            if isinstance(X, dz.Operator):
                ent = dz.compress(X, S.basis_in, S.basis_out)
                mats.append(dz.OperatorMatrix(S.basis_in, S.basis_out, ent, X, {"name": f"Q_{i + 1}"}))
            else:
                mats.append(dz.OperatorMatrix(S.basis_in, S.basis_out, X, meta={"name": f"Q_{i + 1}"}))
        kind = {"twist": "function"}
    return _finish(CuntzFamily(mats, Route.TWISTED, S.system, meta={**kind, "parent": S.route.value}))


def _is_scalar_matrix(u) -> bool:
    try:
        rows = list(u)
        return all(not callable(r) and len(list(r)) > 0 and not callable(list(r)[0]) for r in rows)
    except TypeError:
        return False


@dataclass
class PairingResult:
    blocks: list  # N x N compressed U_ij = S_i^* Q_j
    scalars: np.ndarray  # nearest scalars lambda_ij
    scalarity: np.ndarray  # normalised Frobenius distance to lambda_ij I
    unitarity: dict  # defects of U^* U and U U^* (block identities)
    recovered_n: tuple  # (tr U^*U / dim, tr U U^* / dim)
    exact: bool = False


def pairing_matrix(S: CuntzFamily, Q: CuntzFamily) -> PairingResult:
    """The pairing ``U_ij = S_i^* Q_j`` with scalarity and block-unitarity defects.

    Block products are formed at operator level, e.g. ``(U^*U)_jl =
    sum_i Q_j^* S_i S_i^* Q_l``, so truncation never enters them.
    """
    if S.basis_in != Q.basis_in or S.basis_out != Q.basis_out:
        raise ValueError("families live on different bases")
    R = S.realization() if S.exact == Q.exact else realize(S.system, S.basis_in, S.basis_out, exact=False)
    Se, Qe = S.elements(R), Q.elements(R)
    n, m = len(Se), len(Qe)
    dim = S.basis_in.size
    blocks = [[R.compress(adj(Se[i]) @ Qe[j], "in", "in") for j in range(m)] for i in range(n)]
    lam = np.zeros((n, m), dtype=complex)
    scal = np.zeros((n, m))
    exact = R.exact
    for i in range(n):
        for j in range(m):
            B = blocks[i][j]
            Bn = B.to_numpy() if isinstance(B, ExactMatrix) else np.asarray(B)
            lam[i, j] = np.trace(Bn) / dim
            if isinstance(B, ExactMatrix):
                t = total([B.entry(k, k) for k in range(dim)]) / dim
                D = B - ExactMatrix.identity(dim, B.n).scale(t)
                scal[i, j] = 0.0 if D.is_zero() else float(np.linalg.norm(D.to_numpy()) / np.sqrt(dim))
            else:
                scal[i, j] = float(np.linalg.norm(Bn - lam[i, j] * np.eye(dim)) / np.sqrt(dim))
    I_in = R.identity("in")
    uu, u_u = 0.0, 0.0
    tr_uhu = 0.0
    tr_uuh = 0.0
    for j in range(m):
        for l in range(m):
            X = R.compress(total([adj(Qe[j]) @ Se[i] @ adj(Se[i]) @ Qe[l] for i in range(n)]), "in", "in")
            if j == l:
                tr_uhu += float(np.real(np.trace(X.to_numpy() if isinstance(X, ExactMatrix) else X)))
                X = X - R.compress(I_in, "in", "in")
            u_u = max(u_u, spectral_norm(X)[0])
    for i in range(n):
        for k in range(n):
            X = R.compress(total([adj(Se[i]) @ Qe[j] @ adj(Qe[j]) @ Se[k] for j in range(m)]), "in", "in")
            if i == k:
                tr_uuh += float(np.real(np.trace(X.to_numpy() if isinstance(X, ExactMatrix) else X)))
                X = X - R.compress(I_in, "in", "in")
            uu = max(uu, spectral_norm(X)[0])
    return PairingResult(
        blocks,
        lam,
        scal,
        {"UhU": u_u, "UUh": uu},
        (tr_uhu / dim, tr_uuh / dim),
        exact,
    )
