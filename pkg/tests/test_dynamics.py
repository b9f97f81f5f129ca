from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cuntzkit import dynamics as dyn
from cuntzkit.quadrature import gauss_legendre_panels

GOLDEN = 0.6180339887498949
RHO = dyn.TrigDensity(cos=[0.5])

SYSTEMS = {
    "circle2": dyn.circle_monomial(2),
    "circle3": dyn.circle_monomial(3),
    "blaschke": dyn.blaschke_cover([0.0, 0.5]),
    "blaschke3": dyn.blaschke_cover([0.0, 0.3 + 0.4j, -0.5]),
    "weighted": dyn.weighted_circle_monomial(2, RHO),
}
GRID = (np.arange(512) + 0.5) / 512


def circ_dist(a, b):
    return np.abs((np.asarray(a) - np.asarray(b) + 0.5) % 1.0 - 0.5)


# -- descriptors ----------------------------------------------------------------


def test_descriptor_invariants():
    with pytest.raises(dyn.InvalidSystemError):
        dyn.full_shift(1)
    with pytest.raises(dyn.InvalidSystemError):
        dyn.blaschke_cover([0.5, 0.2])  # no zero at the origin
    with pytest.raises(dyn.InvalidSystemError):
        dyn.blaschke_cover([0.0, 1.0])
    with pytest.raises(dyn.InvalidSystemError):
        dyn.weighted_circle_monomial(2, dyn.TrigDensity(cos=[1.5]))
    with pytest.raises(dyn.InvalidSystemError):
        dyn.product_shift_rotation(2, 0.25)
    with pytest.raises(dyn.InvalidSystemError):
        dyn.product_shift_rotation(2, 1 / 3 + 1e-12)
    assert dyn.product_shift_rotation(2, GOLDEN).tau == GOLDEN


# -- the map --------------------------------------------------------------------


def test_evaluate_map_examples():
    assert dyn.evaluate_map(dyn.circle_monomial(2), 0.3) == pytest.approx(0.6, abs=1e-15)
    assert dyn.evaluate_map(dyn.full_shift(2), (1, 2, 1, 1)) == (2, 1, 1)
    # the Blaschke product with zeros {0, 1/2} fixes 1, so angle 0 maps to 0
    assert float(circ_dist(dyn.evaluate_map(SYSTEMS["blaschke"], 0.0), 0.0)) < 1e-14


def test_blaschke_angle_matches_complex_evaluation():
    t = GRID
    z = dyn.blaschke_value((0.0, 0.5), np.exp(2j * np.pi * t))
    ang = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    assert circ_dist(dyn.evaluate_map(SYSTEMS["blaschke"], t), ang).max() < 1e-12


def test_point_kind_mismatch():
    with pytest.raises(dyn.PointKindError):
        dyn.evaluate_map(dyn.full_shift(2), 0.3)
    with pytest.raises(dyn.PointKindError):
        dyn.evaluate_map(dyn.circle_monomial(2), (1, 2))
    with pytest.raises(dyn.PointKindError):
        dyn.evaluate_map(dyn.product_shift_rotation(2, GOLDEN), 0.3)


# -- decompositions -----------------------------------------------------------


def test_circle_monomial_decomposition():
    d = dyn.decompose(dyn.circle_monomial(2))
    assert [a.arcs for a in d.domains] == [((0.0, 0.5),), ((0.5, 1.0),)]
    for u in d.weights:
        assert np.all(u(GRID) == 0.5)


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_sections_invert_the_map(name):
    sys = SYSTEMS[name]
    d = dyn.decompose(sys)
    pts = []
    for i, psi in enumerate(d.sections):
        x = np.asarray(psi(GRID), dtype=float)
        assert circ_dist(dyn.evaluate_map(sys, x), GRID).max() < 1e-10
        assert np.all(d.domains[i].contains(x))
        pts.append(x)
    pts = np.array(pts)
    gaps = [circ_dist(pts[i], pts[j]).min() for i in range(sys.N) for j in range(i)]
    assert min(gaps) > 1e-10


@pytest.mark.parametrize("name", ["blaschke", "blaschke3"])
def test_blaschke_weights_sum_to_one(name):
    d = dyn.decompose(SYSTEMS[name])
    total = sum(u(GRID) for u in d.weights)
    assert np.abs(total - 1).max() < 1e-8


def test_blaschke_invariance_by_quadrature():
    sys = SYSTEMS["blaschke"]
    x, w = gauss_legendre_panels(np.linspace(0, 1, 65), 2048)
    for k in (1, 2, 3, -5):
        lhs = np.sum(w * np.exp(2j * np.pi * k * dyn.evaluate_map(sys, x)))
        assert abs(lhs) < 1e-10


def test_weighted_weights_sum_to_inverse_density():
    d = dyn.decompose(SYSTEMS["weighted"])
    total = sum(u(GRID) for u in d.weights)
    # rho(y/2) + rho((y+1)/2) = 2 because the cosines cancel
    assert np.abs(total - 1 / RHO(GRID)).max() < 1e-12
    assert np.abs(d.density(GRID) - total).max() < 1e-14


def test_blaschke_derivative_closed_form():
    zeros = (0.0, 0.5)
    t = GRID
    h = 1e-6
    fd = (dyn.lifted_angle(zeros, t + h) - dyn.lifted_angle(zeros, t - h)) / (2 * h)
    assert np.abs(fd - dyn.lifted_angle_derivative(zeros, t)).max() < 1e-6


# -- cylinders --------------------------------------------------------------------


def test_cylinder_examples():
    c2 = dyn.circle_monomial(2)
    d = dyn.decompose(c2)
    cyl = dyn.cylinder(c2, d, (1, 2))
    assert cyl.set.arcs == ((0.25, 0.5),)
    assert cyl.measure == pytest.approx(0.25, abs=1e-15)
    fs = dyn.full_shift(2)
    c = dyn.cylinder(fs, dyn.decompose(fs), (1, 1, 2))
    assert c.measure == Fraction(1, 8)
    assert dyn.cylinder(c2, d, ()).measure == pytest.approx(1.0)
    assert dyn.cylinder(fs, dyn.decompose(fs), ()).measure == 1
    with pytest.raises(ValueError):
        dyn.cylinder(fs, dyn.decompose(fs), (3,))


def test_cylinder_record_fields():
    fs = dyn.full_shift(2)
    rec = dyn.cylinder(fs, dyn.decompose(fs), (2, 1)).record()
    assert rec == {"word": [2, 1], "kind": "cylinder", "where": [2, 1], "measure": "1/4"}


def test_cylinder_membership_by_brute_force():
    c2 = dyn.circle_monomial(2)
    d = dyn.decompose(c2)
    t = (np.arange(1 << 12) + 0.5) / (1 << 12)
    th = t.copy()
    inside = (th < 0.5)
    th = np.mod(2 * th, 1.0)
    inside &= th >= 0.5
    assert np.array_equal(inside, dyn.cylinder(c2, d, (1, 2)).set.contains(t))


@pytest.mark.parametrize("name", ["circle3", "blaschke", "weighted"])
def test_cylinder_measure_by_quadrature(name):
    """mu(U_{iw}) = integral over U_w of u_i, and grid membership agrees."""
    sys = SYSTEMS[name]
    d = dyn.decompose(sys)
    M = 1 << 18
    t = (np.arange(M) + 0.5) / M
    dens = np.ones(M) if sys.density is None else sys.density(t)
    for w in [(1,), (2, 1), (1, 2, 2), (2, 2, 1)]:
        cyl = dyn.cylinder(sys, d, w)
        tail = dyn.cylinder(sys, d, w[1:])
        oracle = 0.0
        for a, b in tail.set.arcs:
            x, wts = gauss_legendre_panels([a, b], 256)
            rho = 1.0 if sys.density is None else sys.density(x)
            oracle += float(np.sum(wts * rho * d.weights[w[0] - 1](x)))
        assert cyl.measure == pytest.approx(oracle, abs=1e-8)
        labels = dyn.itinerary(sys, d, t, len(w))
        hit = np.all(labels == np.array(w), axis=1)
        assert abs(np.sum(dens[hit]) / M - cyl.measure) < 2e-5


@given(st.lists(st.integers(1, 2), max_size=4), st.lists(st.integers(1, 2), max_size=3))
def test_cylinders_refine(w, v):
    for name in ("circle2", "blaschke"):
        sys = SYSTEMS[name]
        d = dyn.decompose(sys)
        assert dyn.cylinder(sys, d, w + v).set.issubset(dyn.cylinder(sys, d, w).set, tol=1e-12)
    fs = dyn.full_shift(2)
    assert dyn.cylinder(fs, None, w + v).set.issubset(dyn.cylinder(fs, None, w).set)


def test_shift_cylinder_measures_are_products():
    fs = dyn.full_shift(3)
    d = dyn.decompose(fs)
    for w in dyn.all_words(3, 3):
        m = dyn.cylinder(fs, d, w).measure
        assert m == Fraction(1, 27)
        assert m == np.prod([Fraction(1, 3)] * 3)


# -- generation of the sigma-algebra --------------------------------------------


def test_generation_defect_of_first_letter_indicator_is_zero():
    fs = dyn.full_shift(2)
    d = dyn.decompose(fs)
    f = lambda W: (np.asarray(W)[:, 0] == 1).astype(float)
    for depth in (1, 2, 5):
        assert dyn.generation_defect(fs, d, depth, f, resolution=8) == 0.0


def test_generation_defect_circle_decreases():
    c2 = dyn.circle_monomial(2)
    d = dyn.decompose(c2)
    f = lambda t: np.exp(2j * np.pi * np.asarray(t))
    ds = [dyn.generation_defect(c2, d, k, f) for k in range(1, 9)]
    assert all(b < a for a, b in zip(ds, ds[1:]))
    # the cylinders are dyadic arcs of length 2^-k, and ||f - E f|| = (1 - sinc^2)^{1/2} ~ pi 2^-k / sqrt 3
    for k, v in enumerate(ds, 1):
        h = 2.0**-k
        exact = np.sqrt(1 - np.sinc(h) ** 2)
        assert v == pytest.approx(exact, rel=1e-10)
        assert v <= 2 * 2.0**-k


def test_generation_defect_product_stays_at_one_half():
    sys = dyn.product_shift_rotation(2, GOLDEN)
    d = dyn.decompose(sys)
    f = lambda P: (np.asarray(P[1]) < 0.5).astype(float)
    for depth in range(1, 13):
        v = dyn.generation_defect(sys, d, depth, f, resolution=256)
        assert v >= 0.49
        assert abs(v - 0.5) < 1e-9


@pytest.mark.parametrize("name", ["circle3", "blaschke", "weighted"])
def test_generation_defect_nonincreasing(name):
    sys = SYSTEMS[name]
    d = dyn.decompose(sys)
    f = lambda t: (np.asarray(t) < 1 / 3).astype(float)
    ds = [dyn.generation_defect(sys, d, k, f) for k in range(1, 6)]
    assert all(b <= a + 1e-12 for a, b in zip(ds, ds[1:]))
