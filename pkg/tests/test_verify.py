from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuntzkit import config
from cuntzkit import cuntz as cz
from cuntzkit import discretize as dz
from cuntzkit import dynamics as dyn
from cuntzkit import pipeline
from cuntzkit import verify as vf
from cuntzkit.exact import ExactMatrix

C2 = dyn.circle_monomial(2)
FS = dyn.full_shift(2)
BL = dyn.blaschke_cover([0.0, 0.5])
RHO = dyn.TrigDensity(cos=[0.5])
WT = dyn.weighted_circle_monomial(2, RHO)
E1 = dz.TrigPolynomial({1: 1.0})
GRID = (np.arange(512) + 0.5) / 512


def family(sys, K, K_out):
    if sys.kind is dyn.SystemKind.FULL_SHIFT:
        b_in, b_out = dz.CylinderBasis(sys.N, K), dz.CylinderBasis(sys.N, K_out)
    else:
        b_in, b_out = dz.fourier_basis(sys, K), dz.fourier_basis(sys, K_out)
    return cz.cuntz_from_sections(sys, dyn.decompose(sys), b_in, b_out)


@pytest.fixture(scope="module")
def shift4():
    return family(FS, 4, 5)


@pytest.fixture(scope="module")
def circle16():
    return family(C2, 16, 32)


@pytest.fixture(scope="module")
def circle_transfer(circle16):
    C = dz.composition_operator(C2, circle16.basis_in, circle16.basis_out)
    return cz.transfer(C2, dyn.decompose(C2), dz.polar_decompose(C).S)


def cyl3(w):
    return {(1, 1, 1): 3, (1, 2, 1): -1, (2, 2, 2): Fraction(1, 2)}.get(tuple(w)[:3], 1)


# -- reports ------------------------------------------------------------------------


@given(
    st.floats(0, 10, allow_nan=False),
    st.floats(0, 10, allow_nan=False),
    st.sampled_from(["upper", "lower", "equal"]),
    st.sampled_from(["pass", "fail"]),
)
def test_pass_flag_recomputable(v, t, bound, expected):
    r = vf.CheckRecord("x", v, t, bound=bound, expected=expected)
    d = r.to_dict()
    recomputed = {"upper": d["defect"] <= d["tolerance"], "lower": d["defect"] >= d["tolerance"], "equal": d["defect"] == d["tolerance"]}[bound]
    assert d["pass"] == recomputed
    assert r.ok == (recomputed == (expected == "pass"))


def test_report_serialisation_is_sorted():
    rep = vf.VerificationReport().add(vf.CheckRecord("b", 1.0, 2.0), vf.CheckRecord("a", 0.0, 0.0, context={"seed": 3}))
    recs = rep.to_records()
    assert [r["name"] for r in recs] == ["a", "b"]
    assert set(recs[0]) >= {"name", "defect", "tolerance", "pass", "context"}
    assert "a" in rep.to_table().splitlines()[1]


# -- relations and implementation ---------------------------------------------------


def test_shift_relations_exact(shift4):
    rep = vf.check_cuntz(shift4)
    assert [(c.value, c.exact) for c in rep.checks] == [(0.0, True), (0.0, True)]
    assert rep.ok


def test_circle_relations(circle16):
    rep = vf.check_cuntz(circle16)
    assert rep.ok and max(c.value for c in rep.checks) <= 1e-8


def test_scaled_family_fails(shift4):
    bad = [dz.OperatorMatrix(s.domain, s.codomain, s.entries.scale(Fraction(11, 10))) for s in shift4.isometries[:1]]
    F = cz.CuntzFamily(bad + shift4.isometries[1:], cz.Route.SECTIONS, FS)
    rep = vf.check_cuntz(F)
    assert rep["cuntz.isometry"].value == pytest.approx(0.21)
    assert not rep.ok


def test_implements_exact_on_shift(shift4):
    rep = vf.check_implements(shift4, FS, [cyl3])
    assert rep["implements"].value == 0.0 and rep["implements"].exact


def test_implements_circle_and_blaschke(circle16):
    assert vf.check_implements(circle16, C2, [E1])["implements"].value <= 1e-8
    F = family(BL, 8, 32)
    assert vf.check_implements(F, BL, [E1])["implements"].value <= 1e-6


def test_intertwiner_examples(circle16):
    assert vf.check_intertwiner(circle16.isometries[0], circle16, [E1])["intertwiner"].value <= 1e-8
    ident = vf.check_intertwiner("identity", circle16, [E1], 0.5, expect_member=False)
    assert ident["intertwiner"].value > 0.5 and ident.ok
    assert vf.check_intertwiner("zero", circle16, [E1])["intertwiner"].value == 0.0


def test_left_inverses(circle16, shift4):
    assert vf.check_left_inverses(circle16, C2, [E1, dz.TrigPolynomial({0: 1.0})]).ok
    rep = vf.check_left_inverses(shift4, FS, [cyl3, lambda w: 1])
    assert all(c.value == 0.0 and c.exact for c in rep.checks)


def test_left_inverse_is_composition_with_section(circle16):
    S1 = circle16.isometries[0].op
    b = circle16.basis_in
    a = lambda x: np.cos(2 * np.pi * np.asarray(x)) + 0.2
    psi = dyn.decompose(C2).sections[0]
    beta = dz.compress(S1.H @ dz.Multiplication(a) @ S1, b, b)
    direct = dz.compress(dz.Multiplication(lambda y: a(psi(y))), b, b)
    assert np.abs(beta - direct).max() < 1e-12


def test_injectivity_identity(shift4, circle16):
    Ts = vf.random_test_operators(shift4, 2, seed=5) + [ExactMatrix.identity(16)]
    rep = vf.check_injectivity_identity(shift4, Ts)
    assert rep["injectivity.identity"].value == 0.0 and rep["injectivity.identity"].exact
    rep = vf.check_injectivity_identity(circle16, vf.random_test_operators(circle16, 2, seed=5))
    assert rep["injectivity.identity"].value <= 1e-8
    assert rep["injectivity.non_surjective_witness"].value >= 0.5


# -- ergodicity mechanism -------------------------------------------------------------


def test_fixed_space_is_constants():
    assert vf.fixed_space_masa(FS, None, 6) == 1
    assert vf.fixed_space_masa(C2, dyn.decompose(C2), 16) == 1


def test_fixed_space_nonincreasing():
    dims = [vf.fixed_space_masa(FS, None, d) for d in range(1, 6)]
    assert dims == sorted(dims, reverse=True) and dims[-1] == 1


def test_fixed_space_identity_control():
    J = ExactMatrix.identity(8)
    assert vf.fixed_space_dimension(J, J) == 8
    assert vf.fixed_space_dimension(np.eye(5), np.eye(5)) == 5


def test_word_projection_commutant():
    assert vf.word_projection_commutant(FS, None, 3) == 8
    assert vf.word_projection_commutant(FS, None, 1, ambient_depth=3) == 32
    assert vf.commutant_dimension([ExactMatrix.identity(8)]) == 64
    assert vf.word_projection_commutant(dyn.full_shift(3), None, 2) == 9


# -- extensions and pairing -------------------------------------------------------------


def rotation(theta):
    return [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]


def test_extension_dichotomy(circle16):
    Q = cz.twist_family(circle16, rotation(np.pi / 3))
    rep = vf.compare_extensions(circle16, Q, 3, seed=1)
    assert rep["extensions.difference"].value <= 1e-8
    assert rep["pairing.scalarity"].value <= 1e-8
    assert rep.ok
    Qf = cz.twist_family(circle16, [dz.TrigPolynomial({0: 1.0}), E1])
    rep = vf.compare_extensions(circle16, Qf, 3, seed=1)
    assert rep["extensions.difference"].value >= 0.1
    assert rep["pairing.scalarity"].value >= 0.5
    assert rep["pairing.dichotomy"].value == 1.0
    same = vf.compare_extensions(circle16, circle16, 2, seed=1)
    assert same["extensions.difference"].value <= 1e-12


def test_cardinality_recovered(circle16, shift4):
    for S, u in ((circle16, rotation(0.3)), (shift4, [[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]])):
        rep = vf.check_pairing_unitary(S, cz.twist_family(S, u))
        assert rep["pairing.recovered_n"].value == 2
        assert rep.ok


# -- module bases and norms --------------------------------------------------------------


def test_module_basis_checks(circle_transfer):
    T = circle_transfer
    xis = cz.module_basis_from_sections(C2, T.decomposition, T)
    rep = vf.check_module_basis(xis, T, [lambda t: np.exp(2j * np.pi * np.asarray(t))])
    assert rep.ok and max(c.value for c in rep.checks) <= 1e-6
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    assert vf.reconstruction_defect(xis, one) <= 1e-8


def test_single_vector_does_not_span(circle_transfer):
    T = circle_transfer
    xi = [cz.ModuleVector(lambda t: np.ones_like(np.asarray(t, dtype=float)), T)]
    a = lambda t: np.sqrt(2) * (np.asarray(t) < 0.5)
    assert vf.reconstruction_defect(xi, a) >= 0.5


def test_norm_of_constants_and_small_arc(circle_transfer):
    T = circle_transfer
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    assert vf.transfer_norm(T, one, GRID) == pytest.approx(1.0, abs=1e-14)
    chi = lambda t: (np.asarray(t) < 1 / 8).astype(float)
    assert vf.transfer_norm(T, chi, GRID) == pytest.approx(2**-0.5, abs=1e-14)
    rep = vf.check_norm_equivalence(T, [one, chi])
    assert rep.ok
    assert rep["norm.lower_ratio"].context["ratio"] == pytest.approx(2**-0.5)


def test_weighted_norm_equivalence_bound():
    wb = pipeline.Workbench(config.load(config.shipped_configs()["weighted.cfg"]), size=16)
    T = wb.transfer
    K = vf.phi_boundedness_constant(WT, T.decomposition)
    # mu(phi E)/mu(E) tends to 2 rho(phi x)/rho(x), whose sup is 2 * 1.5 / 0.5
    assert 5.5 < K <= 6.0 + 1e-9
    rep = vf.check_norm_equivalence(T, [lambda t: (np.asarray(t) < 0.1).astype(float), lambda t: np.cos(2 * np.pi * np.asarray(t))])
    assert rep.ok


def test_transfer_identity_checks(circle_transfer):
    pairs = [(lambda t: np.exp(2j * np.pi * np.asarray(t)), lambda t: np.cos(6 * np.pi * np.asarray(t)))]
    rep = vf.check_transfer_identities(circle_transfer, pairs)
    assert rep.ok


def test_generation_records():
    f = lambda P: (np.asarray(P[1]) < 0.5).astype(float)
    sys = dyn.product_shift_rotation(2, 0.6180339887498949)
    rep = vf.check_generation(sys, dyn.decompose(sys), range(1, 9), f, expect_generating=False)
    r = rep["generation.defect"]
    assert abs(r.value - 0.5) <= 1e-9
    assert r.label == "expected-fail-of-condition-4" and not r.passed and r.ok
