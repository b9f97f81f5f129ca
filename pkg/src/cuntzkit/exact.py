"""Exact arithmetic in the real quadratic field Q(sqrt(n)).

Cylinder-basis matrices of the full shift only ever carry entries of the form
``a + b*sqrt(N)`` with rational ``a`` and ``b`` (normalised indicators pick up
half-integer powers of ``N``).  :class:`Surd` is the scalar type and
:class:`ExactMatrix` the dense matrix type; rational parts are stored as
numpy object arrays of ``gmpy2.mpq`` so that ``numpy.dot`` stays usable.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable

import gmpy2
import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

_MPQ = type(gmpy2.mpq(0))


def mpq(x) -> "gmpy2.mpq":
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, Fraction):
        return gmpy2.mpq(x.numerator, x.denominator)
    if isinstance(x, (int, np.integer)):
        return gmpy2.mpq(int(x))
    if isinstance(x, Rational):
        return gmpy2.mpq(int(x.numerator), int(x.denominator))
    raise TypeError(f"not an exact rational: {x!r}")


def _is_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


class Surd:
    """The number ``a + b*sqrt(n)`` with rational ``a``, ``b``."""

    __slots__ = ("a", "b", "n")

    def __init__(self, a=0, b=0, n: int = 2):
        if n < 1:
            raise ValueError("radicand must be positive")
        a, b = mpq(a), mpq(b)
        if _is_square(n):
            a, b = a + b * math.isqrt(n), mpq(0)
        self.a, self.b, self.n = a, b, n

    @classmethod
    def sqrt_power(cls, n: int, k: int) -> "Surd":
        """``n**(k/2)`` for any integer ``k``."""
        q, r = divmod(k, 2)
        base = mpq(n) ** q
        return cls(0, base, n) if r else cls(base, 0, n)

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.n != self.n and other.b and self.b:
                raise ValueError(f"mixed radicands {self.n} and {other.n}")
            return other
        return Surd(mpq(other), 0, self.n)

    def __add__(self, other):
        o = self._coerce(other)
        n = self.n if self.b else o.n
        return Surd(self.a + o.a, self.b + o.b, n)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        n = self.n if self.b else o.n
        return Surd(self.a * o.a + n * self.b * o.b, self.a * o.b + self.b * o.a, n)

    __rmul__ = __mul__

    def inverse(self) -> "Surd":
        den = self.a * self.a - self.n * self.b * self.b
        if den == 0:
            raise ZeroDivisionError("Surd division by zero")
        return Surd(self.a / den, -self.b / den, self.n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def conjugate(self) -> "Surd":
        # real field: complex conjugation is the identity
        return self

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.n if self.b else 0))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.n)

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        if not self.b:
            return f"Surd({self.a})"
        return f"Surd({self.a} + {self.b}*sqrt({self.n}))"


def _obj_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(gmpy2.mpq(0))
    return out


_INT64_SAFE = 1 << 62


def _maxabs(a: np.ndarray) -> int:
    return int(np.abs(a).max()) if a.size else 0


class _IntMat:
    """Rational matrix ``num / den`` with integer ``num`` and a common ``den > 0``.

    ``num`` is int64 while values stay small, otherwise an object array of
    Python ints; every operation is exact.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: np.ndarray, den: int = 1):
        self.num, self.den = num, int(den)
        self._reduce()

    @classmethod
    def from_rationals(cls, arr) -> "_IntMat":
        arr = np.asarray(arr, dtype=object)
        vals = [mpq(v) for v in arr.reshape(-1)]
        den = 1
        for v in vals:
            d = int(v.denominator)
            den = den * d // math.gcd(den, d)
        nums = [int(v.numerator) * (den // int(v.denominator)) for v in vals]
        big = max((abs(x) for x in nums), default=0) >= _INT64_SAFE
        num = np.array(nums, dtype=object if big else np.int64).reshape(arr.shape)
        return cls(num, den)

    @classmethod
    def zeros(cls, shape) -> "_IntMat":
        return cls(np.zeros(shape, dtype=np.int64), 1)

    def _reduce(self):
        if self.den == 1:
            return
        if self.num.dtype == object:
            g = self.den
            for v in self.num.reshape(-1):
                g = math.gcd(g, int(v))
                if g == 1:
                    return
        else:
            g = int(np.gcd.reduce(self.num.reshape(-1), initial=self.den)) if self.num.size else self.den
        if g > 1:
            self.num = self.num // g
            self.den //= g

    def _as_common(self, other):
        a, b = self.num, other.num
        if a.dtype != b.dtype:
            a, b = a.astype(object), b.astype(object)
        return a, b

    def __matmul__(self, other: "_IntMat") -> "_IntMat":
        a, b = self._as_common(other)
        if a.dtype != object and _maxabs(a) * _maxabs(b) * max(a.shape[1], 1) >= _INT64_SAFE:
            a, b = a.astype(object), b.astype(object)
        return _IntMat(a.dot(b), self.den * other.den)

    def __add__(self, other: "_IntMat") -> "_IntMat":
        L = self.den * other.den // math.gcd(self.den, other.den)
        a, b = self._as_common(other)
        fa, fb = L // self.den, L // other.den
        if a.dtype != object and (_maxabs(a) * fa + _maxabs(b) * fb) >= _INT64_SAFE:
            a, b = a.astype(object), b.astype(object)
        return _IntMat(a * fa + b * fb, L)

    def __neg__(self):
        return _IntMat(-self.num, self.den)

    def scale(self, c) -> "_IntMat":
        c = mpq(c)
        p, q = int(c.numerator), int(c.denominator)
        a = self.num
        if a.dtype != object and _maxabs(a) * abs(p) >= _INT64_SAFE:
            a = a.astype(object)
        return _IntMat(a * p, self.den * q)

    @property
    def T(self) -> "_IntMat":
        return _IntMat(self.num.T.copy(), self.den)

    def __getitem__(self, key) -> "_IntMat":
        return _IntMat(self.num[key], self.den)

    def is_zero(self) -> bool:
        return not self.num.any()

    def entry(self, i, j):
        return gmpy2.mpq(int(self.num[i, j]), self.den)

    def to_float(self) -> np.ndarray:
        return self.num.astype(float) / self.den

    def to_objects(self) -> np.ndarray:
        out = np.empty(self.num.shape, dtype=object)
        for idx, v in np.ndenumerate(self.num):
            out[idx] = gmpy2.mpq(int(v), self.den)
        return out

    def kron(self, other: "_IntMat") -> "_IntMat":
        a, b = self._as_common(other)
        return _IntMat(np.kron(a, b), self.den * other.den)


def _part(arr) -> "_IntMat":
    return arr if isinstance(arr, _IntMat) else _IntMat.from_rationals(arr)


class ExactMatrix:
    """Dense matrix over Q(sqrt(n)) stored as ``R + sqrt(n) * B`` with rational ``R``, ``B``."""

    __slots__ = ("_r", "_s", "n")

    def __init__(self, rational, surd=None, n: int = 2):
        r = _part(rational)
        if r.num.ndim != 2:
            raise ValueError("ExactMatrix needs a 2-D array")
        s = None
        if surd is not None:
            s = _part(surd)
            if s.num.shape != r.num.shape:
                raise ValueError("rational and surd parts differ in shape")
            if _is_square(n):
                r = r + s.scale(math.isqrt(n))
                s = None
            elif s.is_zero():
                s = None
        self._r, self._s, self.n = r, s, n

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int, n: int = 2) -> "ExactMatrix":
        return cls(_IntMat.zeros((rows, cols)), None, n)

    @classmethod
    def identity(cls, size: int, n: int = 2) -> "ExactMatrix":
        return cls(_IntMat(np.eye(size, dtype=np.int64)), None, n)

    @classmethod
    def from_int(cls, arr, n: int = 2) -> "ExactMatrix":
        """Integer matrix (fast path)."""
        return cls(_IntMat(np.asarray(arr, dtype=np.int64)), None, n)

    @classmethod
    def from_entries(cls, entries, n: int = 2) -> "ExactMatrix":
        """Build from a nested list / array of rationals or :class:`Surd` values."""
        arr = np.asarray(entries, dtype=object)
        rat, sur = _obj_zeros(arr.shape), _obj_zeros(arr.shape)
        for idx, v in np.ndenumerate(arr):
            if isinstance(v, Surd):
                rat[idx], sur[idx] = v.a, v.b
            else:
                rat[idx] = mpq(v)
        return cls(rat, sur, n)

    @classmethod
    def diagonal(cls, values: Iterable, n: int = 2) -> "ExactMatrix":
        values = list(values)
        return cls.from_sparse((len(values),) * 2, [(k, k, v) for k, v in enumerate(values)], n)

    @classmethod
    def from_sparse(cls, shape, items, n: int = 2) -> "ExactMatrix":
        """Build from ``(row, col, value)`` triples; values are rationals or :class:`Surd`."""
        parts = ([], [])
        for i, j, v in items:
            if isinstance(v, Surd):
                a, b = v.a, v.b
            else:
                a, b = mpq(v), gmpy2.mpq(0)
            if a:
                parts[0].append((i, j, a))
            if b:
                parts[1].append((i, j, b))

        def build(entries):
            den = 1
            for _, _, v in entries:
                d = int(v.denominator)
                den = den * d // math.gcd(den, d)
            nums = [int(v.numerator) * (den // int(v.denominator)) for _, _, v in entries]
            big = max((abs(x) for x in nums), default=0) >= _INT64_SAFE
            num = np.zeros(shape, dtype=object if big else np.int64)
            if big:
                num.fill(0)
            for (i, j, _), x in zip(entries, nums):
                num[i, j] = x
            return _IntMat(num, den)

        return cls(build(parts[0]), build(parts[1]) if parts[1] else None, n)

    @classmethod
    def vstack(cls, mats) -> "ExactMatrix":
        mats = list(mats)
        if any(m._s is not None for m in mats):
            raise ValueError("vstack supports rational matrices only")
        L = 1
        for m in mats:
            L = L * m._r.den // math.gcd(L, m._r.den)
        parts = [m._r.num * (L // m._r.den) for m in mats]
        if any(p.dtype == object for p in parts):
            parts = [p.astype(object) for p in parts]
        return cls(_IntMat(np.concatenate(parts, axis=0), L), None, mats[0].n)

    # -- parts --------------------------------------------------------------
    @property
    def rational(self) -> np.ndarray:
        return self._r.to_objects()

    @property
    def surd(self):
        return None if self._s is None else self._s.to_objects()

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self._r.num.shape)

    def _check(self, other: "ExactMatrix"):
        if other.n != self.n and self._s is not None and other._s is not None:
            raise ValueError("mixed radicands")

    def _radicand(self, other: "ExactMatrix") -> int:
        return self.n if self._s is not None else other.n

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if isinstance(other, np.ndarray):
            # mixing with floating point leaves the exact path
            return self.to_numpy() @ other
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._check(other)
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        n = self._radicand(other)
        rat = self._r @ other._r
        sur = None
        if self._s is not None and other._s is not None:
            rat = rat + (self._s @ other._s).scale(n)
        if self._s is not None:
            sur = self._s @ other._r
        if other._s is not None:
            extra = self._r @ other._s
            sur = extra if sur is None else sur + extra
        return ExactMatrix(rat, sur, n)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if isinstance(other, np.ndarray):
            return self.to_numpy() + other
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        if self._s is None and other._s is None:
            return ExactMatrix(self._r + other._r, None, self.n)
        zs = _IntMat.zeros(self.shape)
        return ExactMatrix(
            self._r + other._r,
            (self._s or zs) + (other._s or zs),
            self._radicand(other),
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(-self._r, None if self._s is None else -self._s, self.n)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        if isinstance(other, np.ndarray):
            return self.to_numpy() - other
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self + (-other)

    __array_ufunc__ = None  # make numpy defer to the reflected operators below

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.to_numpy()

    def __radd__(self, other):
        return np.asarray(other) + self.to_numpy()

    def __rsub__(self, other):
        return np.asarray(other) - self.to_numpy()

    def scale(self, c) -> "ExactMatrix":
        if isinstance(c, Surd):
            n = c.n if c.b else self.n
            rat = self._r.scale(c.a)
            sur = self._r.scale(c.b)
            if self._s is not None:
                rat = rat + self._s.scale(c.b * n)
                sur = sur + self._s.scale(c.a)
            return ExactMatrix(rat, sur, n)
        if isinstance(c, (complex, float, np.inexact)):
            return self.to_numpy() * c
        return ExactMatrix(self._r.scale(c), None if self._s is None else self._s.scale(c), self.n)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    @property
    def H(self) -> "ExactMatrix":
        return ExactMatrix(self._r.T, None if self._s is None else self._s.T, self.n)

    T = H

    def __getitem__(self, key) -> "ExactMatrix":
        r = self._r[key]
        if r.num.ndim != 2:
            raise IndexError("ExactMatrix indexing must keep two axes")
        return ExactMatrix(r, None if self._s is None else self._s[key], self.n)

    def entry(self, i: int, j: int) -> Surd:
        return Surd(self._r.entry(i, j), 0 if self._s is None else self._s.entry(i, j), self.n)

    def is_zero(self) -> bool:
        return self._r.is_zero() and (self._s is None or self._s.is_zero())

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    __hash__ = None

    def to_numpy(self) -> np.ndarray:
        out = self._r.to_float()
        if self._s is not None:
            out = out + math.sqrt(self.n) * self._s.to_float()
        return out.astype(complex)

    def __array__(self, dtype=None, copy=None):
        out = self.to_numpy()
        return out if dtype is None else out.astype(dtype)

    # -- exact linear algebra ---------------------------------------------
    def rank(self) -> int:
        """Exact rank over Q(sqrt(n)).

        Matrices with a single nonzero part reduce to a rational rank; mixed
        matrices use the real embedding ``[[A, nB], [B, A]]`` of
        ``A + sqrt(n) B``, whose rank is twice the rank over the field.
        """
        if self._s is None:
            return _rational_rank(self._r.num)
        if self._r.is_zero():
            return _rational_rank(self._s.num)
        a = self._r.num.astype(object) * self._s.den
        b = self._s.num.astype(object) * self._r.den
        block = np.block([[a, b * self.n], [b, a]])
        return _rational_rank(block) // 2

    def nullity(self) -> int:
        return self.shape[1] - self.rank()

    def __repr__(self):
        kind = "rational" if self._s is None else f"Q(sqrt({self.n}))"
        return f"ExactMatrix(shape={self.shape}, field={kind})"


def _rational_rank(num: np.ndarray) -> int:
    """Rank of an integer matrix (a common denominator does not change it)."""
    rows, cols = num.shape
    if rows == 0 or cols == 0:
        return 0
    entries = {}
    for i, j in zip(*np.nonzero(num)):
        entries.setdefault(int(i), {})[int(j)] = QQ(int(num[i, j]))
    if not entries:
        return 0
    return DomainMatrix(entries, (rows, cols), QQ).rank()


def exact_kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Kronecker product of two rational exact matrices."""
    if a._s is not None or b._s is not None:
        raise ValueError("exact_kron supports rational matrices only")
    return ExactMatrix(a._r.kron(b._r), None, a.n)
