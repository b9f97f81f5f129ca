from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuntzkit import symbolic as sym
from cuntzkit.symbolic import CuntzElement as E
from cuntzkit.symbolic import GaussianRational, ModuleMatrix

N = 2
s1, s2 = E.generator(N, 1), E.generator(N, 2)
one, zero = E.one(N), E.zero(N)

words = st.lists(st.integers(1, N), max_size=3).map(tuple)
coefs = st.builds(
    lambda a, b: GaussianRational(a, b),
    st.fractions(min_value=-3, max_value=3, max_denominator=3),
    st.fractions(min_value=-3, max_value=3, max_denominator=3),
)
monomials = st.builds(lambda mu, nu, c: E.word(N, mu, nu, c), words, words, coefs)
elements = st.lists(monomials, max_size=4).map(lambda xs: sum(xs, E.zero(N)))


# -- worked examples ----------------------------------------------------------


def test_orthogonality_and_isometry_relations():
    assert s1.H * s2 == zero
    assert s1.H * s1 == one


def test_completeness_collapses_to_one():
    assert sym.normalize(s1 * s1.H + s2 * s2.H) == one
    assert str(s1 * s1.H + s2 * s2.H) == "1"


def test_one_collapse_step():
    x = E(N, {((1, 1), (1, 1)): 1, ((1, 2), (1, 2)): 1})
    assert x == E.word(N, (1,), (1,))


def test_canonical_word_unchanged():
    x = E.word(N, (1, 2), (2,))
    assert x.terms == {((1, 2), (2,)): sym.ONE}


@given(monomials)
def test_completeness_acts_as_identity(x):
    assert (s1 * s1.H + s2 * s2.H) * x == x


def test_collapse_alone_is_not_enough():
    # equal elements that a pure collapse rewrite would leave different
    a = one + s1 * s1.H
    b = E(N, {((1,), (1,)): 2, ((2,), (2,)): 1})
    assert a == b
    assert not sym.has_redex(a)


# -- properties -----------------------------------------------------------------


@given(elements)
def test_normalize_idempotent(x):
    assert sym.normalize(sym.normalize(x)) == sym.normalize(x)
    assert not sym.has_redex(x)


@given(elements, elements, elements)
def test_multiply_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(elements, elements)
def test_adjoint_anti_homomorphism(a, b):
    assert (a * b).H == b.H * a.H


@given(elements)
def test_adjoint_involution(x):
    assert x.H.H == x


@given(elements)
def test_print_parse_round_trip(x):
    assert sym.parse(str(x), N) == x


@given(st.lists(st.tuples(words, words), min_size=1, max_size=5), st.integers(0, 10**6))
def test_critical_pairs_join(pairs, salt):
    """Collapsing two overlapping redexes in either order reaches one normal form."""
    raw = {}
    for k, (mu, nu) in enumerate(pairs):
        c = GaussianRational(Fraction((salt >> k) % 5 - 2))
        for i in range(1, N + 1):
            key = (mu + (i,), nu + (i,))
            raw[key] = raw.get(key, sym.ZERO) + c
    first = E(N, raw)
    # apply the collapse for the pairs in reverse order by hand, then normalise
    partial = dict(raw)
    for mu, nu in reversed(pairs):
        kids = [(mu + (i,), nu + (i,)) for i in range(1, N + 1)]
        vals = {partial.get(k, sym.ZERO) for k in kids}
        if len(vals) == 1:
            (v,) = vals
            for k in kids:
                partial.pop(k, None)
            partial[(mu, nu)] = partial.get((mu, nu), sym.ZERO) + v
    assert E(N, partial) == first


# -- parser -----------------------------------------------------------------------


def test_parse_syntax_forms():
    x = sym.parse("(3/2+1/2i)*s[1,2]·s*[2] + s[1] s*[1] - 2", N)
    assert x == E.word(N, (1, 2), (2,), GaussianRational(Fraction(3, 2), Fraction(1, 2))) + s1 * s1.H - 2
    assert sym.parse("s[1]* s[1]", N) == one or sym.parse("s*[1] s[1]", N) == one


def test_parse_errors():
    with pytest.raises(sym.ParseError):
        sym.parse("s[3]", N)
    with pytest.raises(sym.ParseError):
        sym.parse("s[1] +", N)


def test_alphabet_mismatch():
    with pytest.raises(sym.AlphabetMismatchError):
        s1 * E.generator(3, 1)


# -- bases and module matrices ------------------------------------------------


def test_basis_examples():
    assert sym.verify_basis([one], [s2 * s1.H, s1])
    assert sym.verify_basis([s1, s2], [s2 * s1.H])
    res = sym.verify_basis([s1], [s2])
    assert not res
    assert res.witness == s2


def test_both_bases_pass_on_shared_random_set():
    xs = sym.random_monomials(N, 100, 4, seed=3, coefficients=True)
    assert sym.verify_basis([one], xs)
    assert sym.verify_basis([s1, s2], xs)


def test_module_unitaries():
    assert sym.module_unitary_check(ModuleMatrix.row([s1, s2]))
    assert sym.module_unitary_check(sym.unitary_chain(3))
    assert sym.unitary_chain(3) == ModuleMatrix.row([s1, s2 * s1, s2 * s2])
    assert sym.module_unitary_check(sym.unitary_chain(4))
    assert not sym.module_unitary_check(ModuleMatrix.row([s1, s1]))


def test_unitary_chain_three_letters():
    assert sym.module_unitary_check(sym.unitary_chain(5, 3))
    with pytest.raises(ValueError):
        sym.unitary_chain(4, 3)


def test_faithfulness_against_shift_matrices():
    res = sym.faithfulness_check(2, 3, sums=20, seed=1)
    assert res.ok, res.witness
    assert res.products == sum(2**t * (t + 1) for t in range(4)) ** 2


def test_represent_matches_sections():
    # s_1 s_1^* is the projection onto cylinders starting with 1
    P = sym.represent(s1 * s1.H, 2, 2).to_numpy().real
    assert (P.diagonal() == [1, 1, 0, 0]).all()


def test_collapse_leaves_off_diagonal_siblings():
    x = E(N, {((1, 2, 1), (1,)): 1, ((1, 2, 2), (2,)): 1, ((1, 2, 1), (2,)): 1})
    assert x.terms == {((1, 2), ()): sym.ONE, ((1, 2, 1), (2,)): sym.ONE}
    assert not sym.has_redex(x)


real_elements = st.lists(
    st.builds(lambda mu, nu, c: E.word(N, mu, nu, c), words, words, st.integers(-3, 3)), max_size=5
)


@given(real_elements)
def test_canonical_form_preserves_represented_operator(xs):
    x = sum(xs, E.zero(N))
    d, dd = 3, 6
    naive = sym.represent(E.zero(N), d, dd)
    for m in xs:
        if not m.is_zero():
            naive = naive + sym.represent(m, d, dd)
    assert naive == sym.represent(x, d, dd)
