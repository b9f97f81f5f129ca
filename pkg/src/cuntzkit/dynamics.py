"""Concrete N-to-one measure dynamical systems and their branch data.

Point representations by kind:

* ``FullShift``: a tuple of symbols in ``1..N`` (a finite prefix; the tail is
  irrelevant to every depth-limited computation), or an integer array of
  shape ``(m, L)`` for a batch of prefixes.
* circle kinds: an angle ``theta`` in ``[0, 1)``, scalar or array.
* ``ProductShiftRotation``: a pair ``(prefix, theta)``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .quadrature import gauss_legendre_panels

Word = tuple  # letters in 1..N; the empty tuple is the whole space


class SystemKind(enum.Enum):
    FULL_SHIFT = "FullShift"
    CIRCLE_MONOMIAL = "CircleMonomial"
    BLASCHKE_COVER = "BlaschkeCover"
    WEIGHTED_CIRCLE_MONOMIAL = "WeightedCircleMonomial"
    PRODUCT_SHIFT_ROTATION = "ProductShiftRotation"

    @property
    def is_circle(self) -> bool:
        return self in (
            SystemKind.CIRCLE_MONOMIAL,
            SystemKind.BLASCHKE_COVER,
            SystemKind.WEIGHTED_CIRCLE_MONOMIAL,
        )

    @property
    def is_shift(self) -> bool:
        return self is SystemKind.FULL_SHIFT


class InvalidSystemError(ValueError):
    pass


class PointKindError(TypeError):
    """A point representation does not match the system kind."""


class BranchInversionError(RuntimeError):
    """Bisection could not bracket a pre-image on a Blaschke branch."""

    def __init__(self, y, branch: int):
        self.y = y
        self.branch = branch
        super().__init__(f"branch {branch}: cannot bracket a pre-image of y={y!r}")


# ---------------------------------------------------------------------------
# densities


class TrigDensity:
    """``rho(t) = 1 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)``.

    The constant term is fixed at 1 so that ``rho`` integrates to 1.
    """

    def __init__(self, cos: Sequence[float] = (), sin: Sequence[float] = ()):
        self.cos = tuple(float(c) for c in cos)
        self.sin = tuple(float(s) for s in sin)
        self.degree = max(len(self.cos), len(self.sin))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        for k, a in enumerate(self.cos, start=1):
            out = out + a * np.cos(2 * np.pi * k * t)
        for k, b in enumerate(self.sin, start=1):
            out = out + b * np.sin(2 * np.pi * k * t)
        return out

    def fourier(self, n: int) -> complex:
        """Coefficient ``c_n`` in ``rho = sum_n c_n exp(2 pi i n t)``."""
        if n == 0:
            return 1.0
        k = abs(n)
        a = self.cos[k - 1] if k <= len(self.cos) else 0.0
        b = self.sin[k - 1] if k <= len(self.sin) else 0.0
        # cos = (e + e^-1)/2, sin = (e - e^-1)/(2i)
        return complex(a / 2, -b / 2) if n > 0 else complex(a / 2, b / 2)

    def integral(self) -> float:
        return 1.0

    def bounds(self, samples: int = 4096) -> tuple[float, float]:
        t = (np.arange(samples) + 0.5) / samples
        v = self(t)
        return float(v.min()), float(v.max())

    def describe(self) -> dict:
        return {"type": "trig", "cos": list(self.cos), "sin": list(self.sin)}


class CallableDensity:
    """Arbitrary positive density given as a vectorised callable."""

    def __init__(self, func: Callable, nodes: int = 2048):
        self.func = func
        self.degree = None
        self._nodes = nodes

    def __call__(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def fourier(self, n: int) -> complex:
        x, w = gauss_legendre_panels([0.0, 1.0], self._nodes)
        return complex(np.sum(w * self(x) * np.exp(-2j * np.pi * n * x)))

    def integral(self) -> float:
        x, w = gauss_legendre_panels([0.0, 1.0], self._nodes)
        return float(np.sum(w * self(x)))

    def bounds(self, samples: int = 4096) -> tuple[float, float]:
        t = (np.arange(samples) + 0.5) / samples
        v = self(t)
        return float(v.min()), float(v.max())

    def describe(self) -> dict:
        return {"type": "callable"}


# ---------------------------------------------------------------------------
# system descriptor


def _rational_approximable(x: float, max_den: int = 10_000, tol: float = 1e-9) -> bool:
    # limit_denominator returns the closest p/q with q <= max_den
    f = Fraction(x).limit_denominator(max_den)
    return abs(float(f) - x) <= tol


@dataclass(frozen=True)
class SystemDescriptor:
    kind: SystemKind
    branch_count: int
    zeros: tuple = ()
    density: object = None
    tau: float | None = None
    measure: str = field(default="", compare=False)

    def __post_init__(self):
        N = self.branch_count
        if not isinstance(N, int) or N < 2:
            raise InvalidSystemError(f"branch_count must be an integer >= 2, got {N!r}")
        k = self.kind
        if k is SystemKind.BLASCHKE_COVER:
            if len(self.zeros) != N:
                raise InvalidSystemError("Blaschke cover needs exactly branch_count zeros")
            if any(abs(a) >= 1 for a in self.zeros):
                raise InvalidSystemError("Blaschke zeros must lie in the open unit disk")
            if not any(a == 0 for a in self.zeros):
                raise InvalidSystemError("Blaschke cover needs a zero at 0 (Denjoy-Wolff point)")
        if k is SystemKind.WEIGHTED_CIRCLE_MONOMIAL:
            if self.density is None:
                raise InvalidSystemError("weighted monomial needs a density")
            lo, hi = self.density.bounds()
            if not (lo > 0 and math.isfinite(hi)):
                raise InvalidSystemError(f"density must be strictly positive and bounded (inf={lo})")
            if abs(self.density.integral() - 1.0) > 1e-10:
                raise InvalidSystemError("density must integrate to 1")
        if k is SystemKind.PRODUCT_SHIFT_ROTATION:
            tau = self.tau
            if tau is None or not (0 < tau < 1):
                raise InvalidSystemError("rotation angle must lie in (0, 1)")
            if _rational_approximable(tau):
                raise InvalidSystemError(f"rotation angle {tau!r} is numerically rational")
        if not self.measure:
            object.__setattr__(self, "measure", _MEASURES[k])

    @property
    def N(self) -> int:
        return self.branch_count

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "branch_count": self.N, "measure": self.measure}
        if self.zeros:
            out["zeros"] = [[complex(a).real, complex(a).imag] for a in self.zeros]
        if self.density is not None:
            out["density"] = self.density.describe()
        if self.tau is not None:
            out["tau"] = self.tau
        return out


_MEASURES = {
    SystemKind.FULL_SHIFT: "uniform product measure",
    SystemKind.CIRCLE_MONOMIAL: "normalized arc length",
    SystemKind.BLASCHKE_COVER: "normalized arc length",
    SystemKind.WEIGHTED_CIRCLE_MONOMIAL: "density rho",
    SystemKind.PRODUCT_SHIFT_ROTATION: "product of uniform product measure and arc length",
}


def full_shift(N: int) -> SystemDescriptor:
    return SystemDescriptor(SystemKind.FULL_SHIFT, N)


def circle_monomial(N: int) -> SystemDescriptor:
    return SystemDescriptor(SystemKind.CIRCLE_MONOMIAL, N)


def blaschke_cover(zeros: Sequence[complex]) -> SystemDescriptor:
    zs = tuple(complex(a) for a in zeros)
    return SystemDescriptor(SystemKind.BLASCHKE_COVER, len(zs), zeros=zs)


def weighted_circle_monomial(N: int, density) -> SystemDescriptor:
    return SystemDescriptor(SystemKind.WEIGHTED_CIRCLE_MONOMIAL, N, density=density)


def product_shift_rotation(N: int, tau: float) -> SystemDescriptor:
    return SystemDescriptor(SystemKind.PRODUCT_SHIFT_ROTATION, N, tau=float(tau))


# ---------------------------------------------------------------------------
# Blaschke boundary map in angle coordinates


def lifted_angle(zeros, theta):
    """Continuous lift ``Theta`` of the boundary angle map, ``Theta(t+1) = Theta(t) + N``."""
    theta = np.asarray(theta, dtype=float)
    z = np.exp(2j * np.pi * theta)
    out = len(zeros) * theta
    for a in zeros:
        if a != 0:
            out = out - np.angle(1 - np.conj(a) * z) / np.pi
    return out


def lifted_angle_derivative(zeros, theta):
    """``Theta'(t) = sum_k (1-|a_k|^2)/|e^{2 pi i t} - a_k|^2``, always positive."""
    z = np.exp(2j * np.pi * np.asarray(theta, dtype=float))
    out = np.zeros(z.shape)
    for a in zeros:
        out = out + (1 - abs(a) ** 2) / np.abs(z - a) ** 2
    return out


def blaschke_value(zeros, z):
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for a in zeros:
        out = out * (z - a) / (1 - np.conj(a) * z)
    return out


def _bisect(F, target, lo, hi, tol=1e-12, y=None, branch=0):
    """Vectorised bisection for increasing ``F`` on ``[lo, hi]``."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    slack = 1e-11
    bad = (F(lo) > target + slack) | (F(hi) < target - slack)
    if np.any(bad):
        where = y[bad] if y is not None else target[bad]
        raise BranchInversionError(np.ravel(where)[0], branch)
    while np.max(hi - lo, initial=0.0) > tol:
        mid = 0.5 * (lo + hi)
        up = F(mid) < target
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# set descriptors


@dataclass(frozen=True)
class ArcSet:
    """Finite union of disjoint half-open arcs ``[a, b)`` inside ``[0, 1)``."""

    arcs: tuple

    def contains(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=bool)
        for a, b in self.arcs:
            out |= (theta >= a) & (theta < b)
        return out

    def length(self) -> float:
        return float(sum(b - a for a, b in self.arcs))

    def issubset(self, other: "ArcSet", tol: float = 1e-12) -> bool:
        return all(
            any(a >= c - tol and b <= d + tol for c, d in other.arcs) for a, b in self.arcs
        )

    def endpoints(self) -> list:
        return [e for arc in self.arcs for e in arc]


@dataclass(frozen=True)
class CylinderSet:
    """Shift cylinder ``[w]``; with ``circle_factor`` it is ``[w] x [0, 1)``."""

    word: tuple
    circle_factor: bool = False

    def contains(self, prefix) -> bool:
        return tuple(prefix[: len(self.word)]) == self.word

    def issubset(self, other: "CylinderSet") -> bool:
        return self.word[: len(other.word)] == other.word


@dataclass(frozen=True)
class CylinderDescriptor:
    word: tuple
    kind: str
    set: object
    measure: object

    def record(self) -> dict:
        if isinstance(self.set, ArcSet):
            where = [list(a) for a in self.set.arcs]
        else:
            where = list(self.set.word)
        m = self.measure
        return {
            "word": list(self.word),
            "kind": self.kind,
            "where": where,
            "measure": str(m) if isinstance(m, Fraction) else float(m),
        }


# ---------------------------------------------------------------------------
# branch decompositions


@dataclass(frozen=True)
class BranchDecomposition:
    """Branch domains, sections and Radon-Nikodym weights.

    ``sections[i]`` and ``weights[i]`` are vectorised callables.  For circle
    kinds ``breaks`` lists the branch boundaries ``a_1 = 0 < ... < a_N`` and
    ``cut`` the point of ``[0, 1)`` where every section jumps.
    """

    system: SystemDescriptor
    domains: tuple
    sections: tuple
    weights: tuple
    density: Callable  # w = sum_i u_i, the density of mu o phi^-1
    breaks: tuple = ()
    cut: float = 0.0
    _unrolled: tuple = ()
    # x -> u_{b(x)}(phi x) with b(x) the branch of x; equals 1/|phi'(x)| w.r.t. mu
    inverse_jacobian: Callable | None = None

    @property
    def N(self) -> int:
        return self.system.branch_count

    def branch_index(self, x) -> np.ndarray:
        """0-based branch containing each point (circle kinds)."""
        x = np.asarray(x, dtype=float)
        return np.searchsorted(np.asarray(self.breaks[1:]), x, side="right")

    def unrolled_section(self, i: int, s):
        """Monotone version of section ``i`` on ``s in [cut, cut + 1]``."""
        return self._unrolled[i](s)


def decompose(sys: SystemDescriptor) -> BranchDecomposition:
    k, N = sys.kind, sys.N
    if k is SystemKind.FULL_SHIFT:
        return _decompose_shift(sys)
    if k is SystemKind.PRODUCT_SHIFT_ROTATION:
        base = _decompose_shift(sys)
        tau = sys.tau

        def prod_section(i):
            psi = base.sections[i]
            return lambda p: (psi(p[0]), (np.asarray(p[1]) - tau) % 1.0)

        def prod_weight(i):
            return lambda p: np.full(np.shape(p[1]), 1.0 / N)

        return BranchDecomposition(
            sys,
            tuple(CylinderSet((i + 1,), circle_factor=True) for i in range(N)),
            tuple(prod_section(i) for i in range(N)),
            tuple(prod_weight(i) for i in range(N)),
            lambda p: np.ones(np.shape(p[1])),
        )
    if k in (SystemKind.CIRCLE_MONOMIAL, SystemKind.WEIGHTED_CIRCLE_MONOMIAL):
        return _decompose_monomial(sys)
    if k is SystemKind.BLASCHKE_COVER:
        return _decompose_blaschke(sys)
    raise InvalidSystemError(f"unknown kind {k}")


def _decompose_shift(sys):
    N = sys.N

    def section(i):
        def psi(x):
            if isinstance(x, np.ndarray):
                return np.concatenate([np.full((x.shape[0], 1), i + 1, dtype=x.dtype), x], axis=1)
            return (i + 1,) + tuple(x)

        return psi

    def weight(i):
        return lambda x: Fraction(1, N)

    return BranchDecomposition(
        sys,
        tuple(CylinderSet((i + 1,)) for i in range(N)),
        tuple(section(i) for i in range(N)),
        tuple(weight(i) for i in range(N)),
        lambda x: Fraction(1),
    )


def _decompose_monomial(sys):
    N = sys.N
    rho = sys.density

    def section(i):
        return lambda y: (np.asarray(y, dtype=float) + i) / N

    def unrolled(i):
        # cut point is 0, so [cut, cut+1] = [0, 1] maps onto [i/N, (i+1)/N]
        return lambda s: (np.asarray(s, dtype=float) + i) / N

    if rho is None:

        def weight(i):
            return lambda y: np.full(np.shape(y), 1.0 / N)

        def density(y):
            return np.ones(np.shape(y))

    else:

        def weight(i):
            return lambda y: rho((np.asarray(y, dtype=float) + i) / N) / (N * rho(y))

        def density(y):
            y = np.asarray(y, dtype=float)
            return sum(rho((y + i) / N) for i in range(N)) / (N * rho(y))

    if rho is None:
        inv_jac = lambda x: np.full(np.shape(x), 1.0 / N)
    else:
        inv_jac = lambda x: rho(x) / (N * rho(np.mod(N * np.asarray(x, dtype=float), 1.0)))
    breaks = tuple(i / N for i in range(N + 1))
    return BranchDecomposition(
        sys,
        tuple(ArcSet(((i / N, (i + 1) / N),)) for i in range(N)),
        tuple(section(i) for i in range(N)),
        tuple(weight(i) for i in range(N)),
        density,
        breaks=breaks,
        cut=0.0,
        _unrolled=tuple(unrolled(i) for i in range(N)),
        inverse_jacobian=inv_jac,
    )


def _decompose_blaschke(sys):
    zeros = sys.zeros
    N = sys.N
    Theta = lambda t: lifted_angle(zeros, t)
    dTheta = lambda t: lifted_angle_derivative(zeros, t)
    theta0 = float(Theta(0.0))
    cut = theta0 % 1.0
    # branch boundaries a_i with Theta(a_i) = theta0 + i
    targets = theta0 + np.arange(1, N, dtype=float)
    inner = _bisect(Theta, targets, 0.0, 1.0)
    inner = inner - (Theta(inner) - targets) / dTheta(inner)
    breaks = (0.0,) + tuple(float(a) for a in inner) + (1.0,)

    def solve(i, target, y):
        root = _bisect(Theta, target, breaks[i], breaks[i + 1], y=y, branch=i + 1)
        # one Newton step, kept only if it stays in the branch
        polished = root - (Theta(root) - target) / dTheta(root)
        ok = (polished >= breaks[i]) & (polished <= breaks[i + 1])
        return np.where(ok, polished, root)

    def section(i):
        def psi(y):
            y = np.asarray(y, dtype=float)
            target = theta0 + i + np.mod(y - theta0, 1.0)
            x = solve(i, np.atleast_1d(target), np.atleast_1d(y))
            x = np.minimum(x, np.nextafter(breaks[i + 1], 0.0))
            return x.reshape(y.shape)

        return psi

    def unrolled(i):
        def psi(s):
            s = np.asarray(s, dtype=float)
            target = theta0 + i + (s - cut)
            return solve(i, np.atleast_1d(target), np.atleast_1d(s)).reshape(s.shape)

        return psi

    sections = tuple(section(i) for i in range(N))

    def weight(i):
        return lambda y: 1.0 / dTheta(sections[i](y))

    def density(y):
        return sum(1.0 / dTheta(sections[i](y)) for i in range(N))

    return BranchDecomposition(
        sys,
        tuple(ArcSet(((breaks[i], breaks[i + 1]),)) for i in range(N)),
        sections,
        tuple(weight(i) for i in range(N)),
        density,
        breaks=breaks,
        cut=cut,
        _unrolled=tuple(unrolled(i) for i in range(N)),
        inverse_jacobian=lambda x: 1.0 / dTheta(x),
    )


# ---------------------------------------------------------------------------
# the map itself


def _shift_map(x):
    if isinstance(x, np.ndarray) and x.ndim == 2:
        return x[:, 1:]
    if isinstance(x, (tuple, list)) and all(isinstance(s, (int, np.integer)) for s in x):
        if len(x) == 0:
            raise PointKindError("cannot shift an empty prefix")
        return tuple(x[1:])
    raise PointKindError(f"expected a symbol prefix, got {x!r}")


def _check_angle(x):
    if isinstance(x, (tuple, list)):
        raise PointKindError(f"expected an angle in [0, 1), got {x!r}")
    arr = np.asarray(x, dtype=float)
    if arr.dtype.kind != "f":
        raise PointKindError(f"expected an angle in [0, 1), got {x!r}")
    return arr


def evaluate_map(sys: SystemDescriptor, x):
    """Apply ``phi`` to a point (or batch) in the representation of ``sys``."""
    k, N = sys.kind, sys.N
    if k is SystemKind.FULL_SHIFT:
        return _shift_map(x)
    if k is SystemKind.PRODUCT_SHIFT_ROTATION:
        if not (isinstance(x, tuple) and len(x) == 2):
            raise PointKindError("product points are (prefix, theta) pairs")
        w, t = x
        return _shift_map(w), (np.asarray(t, dtype=float) + sys.tau) % 1.0
    t = _check_angle(x)
    if k is SystemKind.BLASCHKE_COVER:
        out = np.mod(lifted_angle(sys.zeros, t), 1.0)
    else:
        out = np.mod(N * t, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def map_derivative(sys: SystemDescriptor, theta):
    """``|phi'|`` in angle coordinates for circle kinds."""
    if sys.kind is SystemKind.BLASCHKE_COVER:
        return lifted_angle_derivative(sys.zeros, theta)
    if sys.kind.is_circle:
        return np.full(np.shape(theta), float(sys.N))
    raise PointKindError("derivative only defined for circle kinds")


# ---------------------------------------------------------------------------
# cylinders


def validate_word(w, N: int) -> tuple:
    w = tuple(int(s) for s in w)
    if any(s < 1 or s > N for s in w):
        raise ValueError(f"word {w} has letters outside 1..{N}")
    return w


def _arc_image(decomp: BranchDecomposition, i: int, arcs) -> tuple:
    """Image of a union of arcs under section ``i`` (0-based)."""
    c = decomp.cut
    out = []
    for a, b in arcs:
        # split at the cut, move pieces into [c, c + 1]
        pieces = []
        if a < c:
            pieces.append((a + 1, min(b, c) + 1))
        if b > c:
            pieces.append((max(a, c), b))
        for s, t in pieces:
            lo, hi = decomp.unrolled_section(i, np.array([s, t]))
            out.append((float(lo), float(hi)))
    out.sort()
    merged = []
    for a, b in out:
        if merged and abs(merged[-1][1] - a) < 1e-15:
            merged[-1] = (merged[-1][0], b)
        elif b > a:
            merged.append((a, b))
    return tuple(merged)


def measure_of(sys: SystemDescriptor, s) -> float | Fraction:
    if isinstance(s, CylinderSet):
        return Fraction(1, sys.N ** len(s.word))
    if sys.density is None:
        return s.length()
    total = 0.0
    for a, b in s.arcs:
        x, wts = gauss_legendre_panels([a, b], 64)
        total += float(np.sum(wts * sys.density(x)))
    return total


def cylinder(sys: SystemDescriptor, decomp: BranchDecomposition, w) -> CylinderDescriptor:
    """The set ``U_w`` of points whose first ``|w|`` itinerary letters are ``w``."""
    w = validate_word(w, sys.N)
    if sys.kind is SystemKind.FULL_SHIFT:
        s = CylinderSet(w)
        return CylinderDescriptor(w, "cylinder", s, measure_of(sys, s))
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        s = CylinderSet(w, circle_factor=True)
        return CylinderDescriptor(w, "cylinder x circle", s, measure_of(sys, s))
    arcs = ((0.0, 1.0),)
    for letter in reversed(w):
        arcs = _arc_image(decomp, letter - 1, arcs)
    s = ArcSet(arcs)
    return CylinderDescriptor(w, "arcs", s, measure_of(sys, s))


def itinerary(sys: SystemDescriptor, decomp: BranchDecomposition, theta, depth: int) -> np.ndarray:
    """First ``depth`` branch letters (1-based) of each angle, shape ``(m, depth)``."""
    x = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty((x.size, depth), dtype=np.int64)
    for k in range(depth):
        out[:, k] = decomp.branch_index(x) + 1
        x = np.asarray(evaluate_map(sys, x), dtype=float).reshape(-1)
    return out


def all_words(N: int, length: int) -> np.ndarray:
    """Every word of the given length in lexicographic order, shape ``(N**length, length)``."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(1, N + 1), repeat=length)), dtype=np.int64)


# ---------------------------------------------------------------------------
# generation of the sigma-algebra


def generation_defect(
    sys: SystemDescriptor,
    decomp: BranchDecomposition,
    depth: int,
    f: Callable,
    resolution: int | None = None,
) -> float:
    """``||f - E[f | A_depth]||_2`` with ``A_depth`` generated by cylinders of length <= depth.

    ``f`` is vectorised: on shift points it receives an ``(m, L)`` array of
    prefixes, on circle points an angle array, on product points a pair.
    ``resolution`` is the prefix length (shift), node count (circle) or
    angle grid size (product) used to sample ``f``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    k, N = sys.kind, sys.N
    if k is SystemKind.FULL_SHIFT:
        L = max(depth, resolution or 0)
        words = all_words(N, L)
        vals = np.asarray(f(words), dtype=complex)
        # lexicographic order: each depth-d cylinder is a contiguous block
        blocks = vals.reshape(N**depth, -1)
        cond = blocks.mean(axis=1, keepdims=True)
        return float(np.sqrt(np.mean(np.abs(blocks - cond) ** 2)))
    if k is SystemKind.PRODUCT_SHIFT_ROTATION:
        L = depth
        M = resolution or 1024
        if M % 2:
            M += 1
        words = all_words(N, L)
        theta = (np.arange(M) + 0.5) / M
        W = np.repeat(words, M, axis=0)
        T = np.tile(theta, len(words))
        vals = np.asarray(f((W, T)), dtype=complex).reshape(N**depth, M)
        # cylinders V_w = U_w x [0,1): average over the angle and the tail
        cond = vals.mean(axis=1, keepdims=True)
        return float(np.sqrt(np.mean(np.abs(vals - cond) ** 2)))
    # circle kinds: depth-d cylinders are finite unions of arcs
    ends = {0.0, 1.0}
    for w in all_words(N, depth):
        ends.update(cylinder(sys, decomp, w).set.endpoints())
    edges = np.array(sorted(ends))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14])]
    per_panel = 16
    x, wts = gauss_legendre_panels(edges, per_panel, per_panel=True)
    if sys.density is not None:
        wts = wts * sys.density(x)
    mids = 0.5 * (edges[:-1] + edges[1:])
    labels_mid = itinerary(sys, decomp, mids, depth)
    codes_mid = labels_mid @ (N ** np.arange(depth - 1, -1, -1))
    panel = np.repeat(np.arange(len(edges) - 1), per_panel)
    codes = codes_mid[panel]
    vals = np.asarray(f(x), dtype=complex)
    mass = np.bincount(codes, weights=wts, minlength=N**depth)
    tot_r = np.bincount(codes, weights=wts * vals.real, minlength=N**depth)
    tot_i = np.bincount(codes, weights=wts * vals.imag, minlength=N**depth)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(mass > 0, (tot_r + 1j * tot_i) / np.where(mass > 0, mass, 1), 0)
    resid = np.abs(vals - cond[codes]) ** 2
    return float(np.sqrt(np.sum(wts * resid)))
