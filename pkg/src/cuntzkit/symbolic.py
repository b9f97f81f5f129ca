"""Exact word calculus in the Cuntz algebra O_N.

Elements are finite sums ``sum c (mu, nu) s_mu s_nu^*`` with Gaussian rational
coefficients.  Products use the prefix rule

    (s_mu s_nu^*)(s_a s_b^*) = s_{mu a'} s_b^*   if a = nu a'
                             = s_mu s_{b nu'}^*  if nu = a nu'
                             = 0                 otherwise,

and sums are brought to a canonical form with the collapse relation
``sum_i s_{mu i} s_{nu i}^* = s_mu s_nu^*``.

Collapsing alone is not confluent: ``1 + s_1 s_1^*`` and
``2 s_1 s_1^* + s_2 s_2^*`` are equal and neither contains a redex.  The
canonical form therefore expands every gauge grade ``|mu| - |nu|`` to a common
depth (where the words are linearly independent) and collapses bottom-up from
there.  The result has no redex and depends only on the element.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

Word = tuple
Pair = tuple  # (mu, nu)


class AlphabetMismatchError(ValueError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianRational:
    """``re + im * i`` with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, float):
            # floats are accepted only when they are exact binary fractions
            return cls(Fraction(x))
        return cls(Fraction(x))

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.of(other))

    def __mul__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self):
        return f"GaussianRational({self})"


ONE = GaussianRational(Fraction(1))
ZERO = GaussianRational()


def _words(N: int, length: int):
    return itertools.product(range(1, N + 1), repeat=length)


def _canonical(N: int, terms: Mapping[Pair, GaussianRational]) -> dict:
    """Expand each grade to uniform depth, then collapse bottom-up."""
    grades: dict[int, dict] = {}
    for (mu, nu), c in terms.items():
        if c:
            grades.setdefault(len(mu) - len(nu), {})[(mu, nu)] = c
    out = {}
    for grade in sorted(grades):
        block = grades[grade]
        depth = max(min(len(mu), len(nu)) for mu, nu in block)
        level: dict[Pair, GaussianRational] = {}
        for (mu, nu), c in block.items():
            for u in _words(N, depth - min(len(mu), len(nu))):
                key = (mu + u, nu + u)
                level[key] = level.get(key, ZERO) + c
        level = {k: c for k, c in level.items() if c}
        # bottom-up: only terms at the current depth can form a full sibling family
        done = {}
        for d in range(depth, 0, -1):
            families: dict[Pair, dict] = {}
            for (mu, nu), c in level.items():
                families.setdefault((mu[:-1], nu[:-1]), {})[(mu[-1], nu[-1])] = c
            diagonal = {(i, i) for i in range(1, N + 1)}
            nxt = {}
            for (pm, pn), kids in families.items():
                # off-diagonal siblings (mu i, nu j), i != j, stay where they are
                if diagonal <= set(kids) and len({kids[k] for k in diagonal}) == 1:
                    nxt[(pm, pn)] = kids[(1, 1)]
                    kids = {k: c for k, c in kids.items() if k not in diagonal}
                for (i, j), c in kids.items():
                    done[(pm + (i,), pn + (j,))] = c
            level = nxt
            if not level:
                break
        done.update(level)
        out.update(done)
    return out


def _check_word(N: int, w: Iterable[int]) -> Word:
    w = tuple(int(i) for i in w)
    if any(i < 1 or i > N for i in w):
        raise AlphabetMismatchError(f"letter outside 1..{N} in {w}")
    return w


class CuntzElement:
    """A finite linear combination of ``s_mu s_nu^*`` in canonical form."""

    __slots__ = ("N", "terms")

    def __init__(self, N: int, terms: Mapping | None = None):
        if N < 2:
            raise ValueError("O_N needs N >= 2")
        self.N = int(N)
        raw = {}
        for (mu, nu), c in (terms or {}).items():
            key = (_check_word(N, mu), _check_word(N, nu))
            raw[key] = raw.get(key, ZERO) + GaussianRational.of(c)
        self.terms = _canonical(self.N, raw)

    # -- constructors -------------------------------------------------------
    @classmethod
    def one(cls, N: int) -> "CuntzElement":
        return cls(N, {((), ()): ONE})

    @classmethod
    def zero(cls, N: int) -> "CuntzElement":
        return cls(N)

    @classmethod
    def word(cls, N: int, mu: Sequence[int] = (), nu: Sequence[int] = (), coef=1) -> "CuntzElement":
        """``coef * s_mu s_nu^*``."""
        return cls(N, {(tuple(mu), tuple(nu)): coef})

    @classmethod
    def generator(cls, N: int, i: int) -> "CuntzElement":
        return cls.word(N, (i,))

    @classmethod
    def parse(cls, text: str, N: int) -> "CuntzElement":
        return _Parser(text, N).parse()

    # -- algebra --------------------------------------------------------------
    def _same(self, other: "CuntzElement"):
        if other.N != self.N:
            raise AlphabetMismatchError(f"O_{self.N} and O_{other.N}")

    def _lift(self, other) -> "CuntzElement":
        if isinstance(other, CuntzElement):
            self._same(other)
            return other
        return CuntzElement(self.N, {((), ()): GaussianRational.of(other)})

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, ZERO) + c
        return CuntzElement(self.N, terms)

    __radd__ = __add__

    def __neg__(self):
        return CuntzElement(self.N, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        return multiply(self, self._lift(other))

    def __rmul__(self, other):
        return multiply(self._lift(other), self)

    def adjoint(self) -> "CuntzElement":
        return CuntzElement(self.N, {(nu, mu): c.conjugate() for (mu, nu), c in self.terms.items()})

    @property
    def H(self) -> "CuntzElement":
        return self.adjoint()

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {((), ()): ONE}

    def grades(self) -> set:
        return {len(mu) - len(nu) for mu, nu in self.terms}

    def __eq__(self, other):
        if isinstance(other, CuntzElement):
            return self.N == other.N and self.terms == other.terms
        try:
            return self == self._lift(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.N, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        order = sorted(self.terms, key=lambda k: (len(k[0]) + len(k[1]), k[0], k[1]))
        return " + ".join(_format_term(mu, nu, self.terms[(mu, nu)]) for mu, nu in order)

    def __repr__(self):
        return f"CuntzElement(N={self.N}, {self})"


def _format_word(prefix: str, w: Word) -> str:
    return f"{prefix}[{','.join(str(i) for i in w)}]"


def _format_term(mu: Word, nu: Word, c: GaussianRational) -> str:
    parts = []
    if mu:
        parts.append(_format_word("s", mu))
    if nu:
        parts.append(_format_word("s*", nu))
    body = "·".join(parts)
    if c == ONE:
        return body or "1"
    return f"({c})*{body}" if body else f"({c})"


def _word_product(mu, nu, a, b):
    """``(s_mu s_nu^*)(s_a s_b^*)`` as a pair, or None when it vanishes."""
    k = min(len(nu), len(a))
    if nu[:k] != a[:k]:
        return None
    if len(a) >= len(nu):
        return mu + a[len(nu):], b
    return mu, b + nu[len(a):]


def multiply(a: CuntzElement, b: CuntzElement) -> CuntzElement:
    a._same(b)
    terms: dict = {}
    for (mu, nu), c in a.terms.items():
        for (x, y), d in b.terms.items():
            p = _word_product(mu, nu, x, y)
            if p is not None:
                terms[p] = terms.get(p, ZERO) + c * d
    return CuntzElement(a.N, terms)


def normalize(a) -> CuntzElement:
    """Canonical form; accepts an element or a raw ``{(mu, nu): coef}`` map with ``N``."""
    if isinstance(a, CuntzElement):
        return CuntzElement(a.N, a.terms)
    N, terms = a
    return CuntzElement(N, terms)


def adjoint(a: CuntzElement) -> CuntzElement:
    return a.adjoint()


def has_redex(a: CuntzElement) -> bool:
    """Whether some ``(mu, nu)`` has all ``N`` extensions with one coefficient."""
    fam: dict = {}
    for (mu, nu), c in a.terms.items():
        if mu and nu and mu[-1] == nu[-1]:
            fam.setdefault((mu[:-1], nu[:-1]), {})[mu[-1]] = c
    return any(len(k) == a.N and len(set(k.values())) == 1 for k in fam.values())


# ---------------------------------------------------------------------------
# text syntax


_TOKEN = re.compile(
    r"\s*(?:(?P<adj>s\*\[[\d,\s]*\])|(?P<word>s\[[\d,\s]*\])|(?P<num>\d+(?:/\d+)?i?)|(?P<imag>i)|(?P<op>[()+\-*·]))"
)


class _Parser:
    def __init__(self, text: str, N: int):
        self.N = N
        self.tokens = []
        pos, text = 0, text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected input at column {pos + 1}: {text[pos:pos + 10]!r}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind)))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.k = 0

    def peek(self):
        return self.tokens[self.k] if self.k < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.k += 1
        return tok

    def parse(self) -> CuntzElement:
        if not self.tokens:
            raise ParseError("empty expression")
        out = self.expr()
        if self.k != len(self.tokens):
            raise ParseError(f"trailing input: {self.peek()[1]!r}")
        return out

    def expr(self) -> CuntzElement:
        out = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = self.take()[1]
            t = self.term()
            out = out + t if sign == "+" else out - t
        return out

    def term(self) -> CuntzElement:
        out = self.factor()
        while True:
            kind, val = self.peek()
            if (kind, val) in (("op", "*"), ("op", "·")):
                self.take()
                out = out * self.factor()
            elif kind in ("adj", "word", "num", "imag") or (kind, val) == ("op", "("):
                out = out * self.factor()  # juxtaposition
            else:
                return out

    def factor(self) -> CuntzElement:
        kind, val = self.take()
        N = self.N
        if kind is None:
            raise ParseError("unexpected end of expression")
        if (kind, val) == ("op", "-"):
            return -self.factor()
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing ')'")
            return inner
        if kind == "num":
            imag = val.endswith("i")
            q = Fraction(val.rstrip("i"))
            c = GaussianRational(Fraction(0), q) if imag else GaussianRational(q)
            return CuntzElement(N, {((), ()): c})
        if kind == "imag":
            return CuntzElement(N, {((), ()): GaussianRational(Fraction(0), Fraction(1))})
        if kind in ("word", "adj"):
            inside = val[val.index("[") + 1 : -1]
            w = tuple(int(x) for x in inside.split(",") if x.strip())
            try:
                return CuntzElement.word(N, w) if kind == "word" else CuntzElement.word(N, (), w)
            except AlphabetMismatchError as exc:
                raise ParseError(str(exc)) from exc
        raise ParseError(f"unexpected token {val!r}")


def parse(text: str, N: int) -> CuntzElement:
    return CuntzElement.parse(text, N)


def parse_many(text: str, N: int) -> list:
    """One element per nonblank line; ``#`` starts a comment."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse(line, N))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# module bases and module matrices


@dataclass(frozen=True)
class BasisCheck:
    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_basis(basis: Sequence[CuntzElement], xs: Iterable[CuntzElement]) -> BasisCheck:
    """Exact check of ``b_i^* b_j = delta_ij`` and ``x = sum b_i (b_i^* x)``."""
    if not basis:
        return BasisCheck(False, None, "empty basis")
    N = basis[0].N
    one = CuntzElement.one(N)
    for i, b in enumerate(basis):
        for j, c in enumerate(basis):
            g = b.H * c
            if g != (one if i == j else CuntzElement.zero(N)):
                return BasisCheck(False, (i, j, g), f"<b_{i + 1}, b_{j + 1}> = {g}")
    for x in xs:
        rec = CuntzElement.zero(N)
        for b in basis:
            rec = rec + b * (b.H * x)
        if rec != x:
            return BasisCheck(False, x, f"reconstruction of {x} gives {rec}")
    return BasisCheck(True)


class ModuleMatrix:
    """Rectangular matrix with entries in O_N."""

    def __init__(self, entries: Sequence[Sequence[CuntzElement]]):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("module matrices need positive dimensions")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged module matrix")
        self.N = rows[0][0].N
        self.entries = tuple(tuple(r) for r in rows)
        self.rows, self.cols = len(rows), len(rows[0])

    @classmethod
    def row(cls, items: Sequence[CuntzElement]) -> "ModuleMatrix":
        return cls([list(items)])

    @classmethod
    def identity(cls, n: int, N: int) -> "ModuleMatrix":
        one, zero = CuntzElement.one(N), CuntzElement.zero(N)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    def adjoint(self) -> "ModuleMatrix":
        return ModuleMatrix([[self.entries[i][j].H for i in range(self.rows)] for j in range(self.cols)])

    @property
    def H(self) -> "ModuleMatrix":
        return self.adjoint()

    def __matmul__(self, other: "ModuleMatrix") -> "ModuleMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = CuntzElement.zero(self.N)
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return ModuleMatrix(out)

    def __eq__(self, other):
        return isinstance(other, ModuleMatrix) and self.entries == other.entries

    def __str__(self):
        return "[" + "; ".join(", ".join(str(e) for e in r) for r in self.entries) + "]"


def module_unitary_check(U: ModuleMatrix) -> bool:
    """Both ``U U^*`` and ``U^* U`` are identity matrices over O_N."""
    return U @ U.H == ModuleMatrix.identity(U.rows, U.N) and U.H @ U == ModuleMatrix.identity(U.cols, U.N)


def unitary_chain(n: int, N: int = 2) -> ModuleMatrix:
    """The ``1 x n`` unitary splitting the last entry ``w`` into ``w s_1, ..., w s_N``.

    For ``N = 2``: ``[s_1, s_2]``, ``[s_1, s_2 s_1, s_2 s_2]``, ...  Only
    ``n = 1 + k (N - 1)`` is reachable.
    """
    if n < N or (n - 1) % (N - 1):
        raise ValueError(f"n must be 1 + k({N} - 1) with k >= 1")
    gens = [CuntzElement.generator(N, i) for i in range(1, N + 1)]
    row = list(gens)
    while len(row) < n:
        last = row.pop()
        row.extend(last * g for g in gens)
    return ModuleMatrix.row(row)


def random_monomials(N: int, count: int, max_length: int, seed: int = 0, *, coefficients: bool = False) -> list:
    """``s_mu s_nu^*`` with independent uniform lengths ``<= max_length``."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        mu = tuple(rng.randint(1, N) for _ in range(rng.randint(0, max_length)))
        nu = tuple(rng.randint(1, N) for _ in range(rng.randint(0, max_length)))
        c = GaussianRational(Fraction(rng.randint(-4, 4), rng.randint(1, 3)), Fraction(rng.randint(-4, 4), rng.randint(1, 3))) if coefficients else ONE
        out.append(CuntzElement.word(N, mu, nu, c if c else ONE))
    return out


# ---------------------------------------------------------------------------
# faithfulness against the full shift representation


@lru_cache(maxsize=None)
def _section(N: int, d: int, i: int):
    from . import discretize as dz
    from .cuntz import _shift_section_matrix

    return _shift_section_matrix(dz.CylinderBasis(N, d), dz.CylinderBasis(N, d + 1), i)


@lru_cache(maxsize=None)
def _inclusion(N: int, d: int, dd: int):
    from . import discretize as dz

    return dz.shift_inclusion(dz.CylinderBasis(N, d), dz.CylinderBasis(N, dd)).entries


@lru_cache(maxsize=None)
def _monomial_matrix(N: int, mu: Word, nu: Word, d: int, dd: int):
    """``s_mu s_nu^*`` from the depth-``d`` cylinder span into depth ``dd``.

    Built from the section isometries ``S_i`` (depth ``k`` to ``k + 1``) and
    their transposes, which are the exact adjoints on these spans.
    """
    from .exact import ExactMatrix

    if d < len(nu):
        raise ValueError("domain depth too small for s_nu^*")
    X = ExactMatrix.identity(N ** d, N)
    k = d
    for i in nu:  # s_nu^* = s_{nu_n}^* ... s_{nu_1}^*, rightmost acts first
        X = _section(N, k - 1, i).H @ X
        k -= 1
    for i in reversed(mu):
        X = _section(N, k, i) @ X
        k += 1
    if dd < k:
        raise ValueError("codomain depth too small")
    if dd > k:
        X = _inclusion(N, k, dd) @ X
    return X


def represent(x: CuntzElement, d: int, dd: int):
    """Exact matrix of ``x`` from the depth-``d`` cylinder span into depth ``dd``."""
    from .exact import ExactMatrix

    out = ExactMatrix.zeros(x.N ** dd, x.N ** d, x.N)
    for (mu, nu), c in x.terms.items():
        if c.im:
            raise ValueError("the exact shift representation is real; split real and imaginary parts")
        out = out + _monomial_matrix(x.N, mu, nu, d, dd).scale(c.re)
    return out


def _out_depth(x: CuntzElement, d: int) -> int:
    return max((d - len(nu) + len(mu) for mu, nu in x.terms), default=d)


@dataclass(frozen=True)
class FaithfulnessResult:
    ok: bool
    products: int
    sums: int
    witness: object = None

    def __bool__(self):
        return self.ok


def faithfulness_check(N: int = 2, max_length: int = 3, *, sums: int = 50, seed: int = 0) -> FaithfulnessResult:
    """Symbolic products and canonical forms against exact shift matrices.

    Every pair of monomials ``s_mu s_nu^*`` with ``|mu| + |nu| <= max_length``
    is multiplied symbolically and as matrices; random integer combinations
    check that canonicalisation preserves the represented operator.
    """
    monos = [
        CuntzElement.word(N, mu, nu)
        for total in range(max_length + 1)
        for m in range(total + 1)
        for mu in _words(N, m)
        for nu in _words(N, total - m)
    ]
    count = 0
    for x in monos:
        ((mx, nx),) = x.terms
        for y in monos:
            ((my, ny),) = y.terms
            d = len(ny) + max(0, len(nx) - len(my))
            mid = d - len(ny) + len(my)
            top = mid - len(nx) + len(mx)
            xy = x * y
            lhs = _monomial_matrix(N, mx, nx, mid, top) @ _monomial_matrix(N, my, ny, d, mid)
            rhs = represent(xy, d, top)
            count += 1
            if lhs != rhs:
                return FaithfulnessResult(False, count, 0, (x, y, xy))
    rng = random.Random(seed)
    for k in range(sums):
        raw = {}
        picks = rng.sample(monos, 4)
        for m in picks:
            ((mu, nu),) = m.terms
            raw[(mu, nu)] = GaussianRational(Fraction(rng.randint(-3, 3)))
        # add a full sibling family so that the collapse rule has work to do
        mu, nu = next(iter(rng.choice(picks).terms))
        for i in range(1, N + 1):
            key = (mu + (i,), nu + (i,))
            raw[key] = raw.get(key, ZERO) + 2
        x = CuntzElement(N, raw)
        d = max(len(nu) for mu, nu in raw)
        dd = max(d - len(nu) + len(mu) for mu, nu in raw)
        naive = None
        for (mu, nu), c in raw.items():
            term = _monomial_matrix(N, mu, nu, d, dd).scale(c.re)
            naive = term if naive is None else naive + term
        if naive != represent(x, d, dd):
            return FaithfulnessResult(False, count, k + 1, x)
    return FaithfulnessResult(True, count, sums)


# ---------------------------------------------------------------------------
# suite


def symbolic_suite(N: int = 2, *, samples: int = 100, max_length: int = 4, seed: int = 0) -> dict:
    """The O_N basis phenomena as named boolean outcomes with witnesses."""
    one = CuntzElement.one(N)
    s = [CuntzElement.generator(N, i) for i in range(1, N + 1)]
    xs = random_monomials(N, samples, max_length, seed, coefficients=True)
    out = {
        "symbolic.completeness": (sum((g * g.H for g in s), CuntzElement.zero(N)) == one, None),
    }
    for name, basis in (("symbolic.basis_one", [one]), ("symbolic.basis_generators", s)):
        res = verify_basis(basis, xs)
        out[name] = (res.ok, res.reason or None)
    for n in range(N, N + 3 * (N - 1), N - 1):
        U = unitary_chain(n, N)
        out[f"symbolic.unitary_U{n}"] = (module_unitary_check(U), str(U))
    # all pairs of monomials grow like (N^L)^2; beyond two letters length 2 keeps this interactive
    length = 3 if N == 2 else 2
    faith = faithfulness_check(N, length, seed=seed)
    out["symbolic.faithfulness"] = (
        faith.ok,
        {"max_length": length, "products": faith.products, "sums": faith.sums, "witness": None if faith.witness is None else str(faith.witness)},
    )
    return out
