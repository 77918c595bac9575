import numpy as np
import pytest

from nhtopo.errors import ConfigError
from nhtopo.model import ModelParams, bloch_effective
from nhtopo.polyalg import (
    BivarPoly,
    BlochMatrixFamily,
    DegreeOverflowError,
    LaurentPoly,
    MultiPoly,
    Poly1,
    poly_det,
    poly_roots,
    resultant,
    resultant_eliminate,
    sylvester_matrix,
    weierstrass_real_conditions,
)
from nhtopo.thirdq import bloch_shape_matrix

G = 4 / 3
XY = ("x", "y")


def xvar(name, vars_=XY):
    return MultiPoly.variable(vars_, name)


# --- Poly1 / resultant -------------------------------------------------------


def test_poly1_trims_trailing_zeros():
    p = Poly1([1, 2, 1e-20])
    assert p.degree == 1


def test_resultant_linear():
    a, b = 0.3 + 1j, -2.0
    assert resultant(Poly1([-a, 1]), Poly1([-b, 1])) == pytest.approx(a - b)


def test_resultant_shared_root_vanishes():
    assert abs(resultant(Poly1([-1, 0, 1]), Poly1([-1, 1]))) < 1e-14


def test_resultant_root_product_formula():
    f = Poly1([1, 0, 1])  # roots +-i
    g = Poly1([2, 2, 1])  # roots -1 +- i
    xi, eta = [1j, -1j], [-1 + 1j, -1 - 1j]
    expected = np.prod([x - y for x in xi for y in eta])
    assert resultant(f, g) == pytest.approx(expected, rel=1e-12)


def test_resultant_rejects_zero_polynomial():
    with pytest.raises(ConfigError):
        resultant(Poly1([0.0]), Poly1([1, 1]))


def test_sylvester_shape():
    S = sylvester_matrix(np.array([1, 2, 3.0]), np.array([4, 5.0]))
    assert S.shape == (3, 3)


# --- roots -------------------------------------------------------------------


def test_roots_simple():
    np.testing.assert_allclose(np.sort(poly_roots(Poly1([-1, 0, 1])).real), [-1, 1], atol=1e-14)


def test_roots_triple():
    r = poly_roots(Poly1.from_roots([2, 2, 2]))
    assert np.max(np.abs(r - 2)) < 1e-4


def test_roots_reject_constant():
    with pytest.raises(ConfigError):
        poly_roots(Poly1([3.0]))


def test_roots_of_effective_characteristic_quadratic():
    t1, t2, E = 1.0, 1.0, 0.3
    P = poly_det(bloch_effective(ModelParams(t1=t1, t2=t2, gamma_l=G)))
    r = poly_roots(P.in_beta(E))
    assert r.size == 2
    # (t1 - g/2 + t2 b)(t1 + g/2 + t2/b) = E^2  ->  quadratic in b
    a2 = t2 * (t1 + G / 2)
    a1 = (t1 - G / 2) * (t1 + G / 2) + t2**2 - E**2
    a0 = t2 * (t1 - G / 2)
    ref = np.roots([a2, a1, a0])
    assert all(np.min(np.abs(ref - z)) < 1e-12 for z in r)
    assert np.prod(r) == pytest.approx((t1 - G / 2) / (t1 + G / 2), abs=1e-12)


# --- elimination ------------------------------------------------------------


def test_eliminate_linear_pair():
    x, y = xvar("x"), xvar("y")
    R = resultant_eliminate(x - y, x + y, "x").poly
    assert R.degree == 1
    assert abs(R(1.0)) == pytest.approx(2.0)
    assert abs(R(0.0)) < 1e-14


def test_eliminate_quadratic_linear():
    x, y = xvar("x"), xvar("y")
    R = resultant_eliminate(x * x - y, x - 1.0, "x").poly
    for yy in (0.0, 2.0, -1.5 + 0.5j):
        assert R(yy) == pytest.approx(1 - yy, abs=1e-12)


def test_eliminate_requires_variable():
    x, y = xvar("x"), xvar("y")
    with pytest.raises(ConfigError):
        resultant_eliminate(y + 1.0, x - y, "x")


def test_eliminate_degree_overflow():
    x, y = xvar("x"), xvar("y")
    big = x**9 - y**9
    with pytest.raises(DegreeOverflowError):
        resultant_eliminate(big, x**8 + y**9, "x")


def test_eliminant_roots_match_common_roots():
    # f(beta, E) and f(beta e^{i theta}, E): eliminate E, compare with brute force
    P = poly_det(bloch_effective(ModelParams(t1=1.0, t2=1.0, gamma_l=G)))
    theta = 1.1
    vars_ = ("beta", "E")
    f = MultiPoly(vars_, P.terms)
    g = MultiPoly(vars_, P.rotated(np.exp(1j * theta)).terms)
    R = resultant_eliminate(f, g, "E").poly
    roots = poly_roots(R)
    roots = roots[np.abs(roots) > 1e-8]
    for b in roots:
        e1 = poly_roots(P.in_E(b))
        e2 = poly_roots(P.in_E(b * np.exp(1j * theta)))
        assert np.min(np.abs(e1[:, None] - e2[None, :])) < 1e-6


def test_weierstrass_trivial_pairing():
    vars_ = ("beta", "u")
    beta, u = MultiPoly.variable(vars_, "beta"), MultiPoly.variable(vars_, "u")
    re, im = weierstrass_real_conditions(beta * u - beta)
    # (1 - i t)(beta u - beta) = beta (1 + it - 1 + it) = 2 i t beta
    for x, y, t in [(0.3, 0.4, 0.0), (0.0, 0.0, 0.7)]:
        assert abs(re(x, y, t)) < 1e-14 and abs(im(x, y, t)) < 1e-14
    assert abs(re(0.3, 0.4, 0.5)) + abs(im(0.3, 0.4, 0.5)) > 0.1


def test_weierstrass_round_trip():
    vars_ = ("beta", "u")
    beta, u = MultiPoly.variable(vars_, "beta"), MultiPoly.variable(vars_, "u")
    G2 = beta * beta * u * u - (2 + 1j) * beta * u + 0.5 * beta - 3.0
    re, im = weierstrass_real_conditions(G2)
    rng = np.random.default_rng(4)
    for _ in range(20):
        th = rng.uniform(-3, 3)
        t = np.tan(th / 2)
        x, y = rng.normal(size=2)
        val = G2(x + 1j * y, np.exp(1j * th)) * (1 - 1j * t) ** 2
        assert re(x, y, t) == pytest.approx(val.real, abs=1e-10 * (1 + abs(val)))
        assert im(x, y, t) == pytest.approx(val.imag, abs=1e-10 * (1 + abs(val)))


def test_effective_eliminant_contains_circle_factor():
    from nhtopo.gbz import symbolic_eliminant

    t1 = 1.0
    P = poly_det(bloch_effective(ModelParams(t1=t1, t2=1.0, gamma_l=G)))
    R = symbolic_eliminant(P)
    r = np.sqrt((t1 - G / 2) / (t1 + G / 2))
    scale = max(abs(c) for c in R.terms.values())
    for phi in np.linspace(0.2, 6.0, 7):
        assert abs(R(r * np.cos(phi), r * np.sin(phi))) < 1e-8 * scale
    assert abs(R(0.9 * np.cos(0.3), 0.9 * np.sin(0.3))) > 1e-6 * scale


def test_nojump_eliminant_contains_inverse_circle_factor():
    from nhtopo.gbz import symbolic_eliminant

    t1 = 1.5
    p = ModelParams(t1=t1, t2=1.0, gamma_l=G, kappa=0.0)
    P = poly_det(bloch_shape_matrix(p, drop_overall_loss=True))
    # reduce to one band family to keep the elimination small
    from nhtopo.gbz import characteristic_eq

    char = characteristic_eq(bloch_shape_matrix(p, True), "ShapeNoJump", p)
    scale_P = max(abs(c) for c in P.terms.values())
    assert scale_P > 0
    for F in char.bands:
        R = symbolic_eliminant(F.poly)
        scale = max(abs(c) for c in R.terms.values())
        r0 = np.sqrt(abs((t1 - G / 2) / (t1 + G / 2)))
        vals = [min(abs(R(r * np.cos(0.7), r * np.sin(0.7))) for r in (r0, 1 / r0)) / scale]
        assert vals[0] < 1e-8


# --- determinants -----------------------------------------------------------


def test_poly_det_one_by_one():
    P = poly_det([[LaurentPoly({1: 1.0})]])
    assert P.pole_order_p == 0
    assert P.terms == {(1, 0): 1.0, (0, 1): -1.0} or all(
        abs(P.terms.get(k, 0) - v) < 1e-12 for k, v in {(1, 0): 1.0, (0, 1): -1.0}.items()
    )


def test_poly_det_effective_is_characteristic_equation():
    t1, t2 = 1.0, 1.0
    P = poly_det(bloch_effective(ModelParams(t1=t1, t2=t2, gamma_l=G)))
    assert P.pole_order_p == 1
    rng = np.random.default_rng(0)
    for _ in range(10):
        b, E = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = E**2 - (1 / 3 + b) * (5 / 3 + 1 / b)
        assert P.evaluate_f(b, E) == pytest.approx(f, abs=1e-10 * (1 + abs(f)))


def test_poly_det_shape_matrix_sampling():
    p = ModelParams(t1=1.2, t2=0.8, gamma_l=1.0, kappa=1.0)
    fam = bloch_shape_matrix(p)
    P = poly_det(fam)
    assert P.pole_order_p == 4
    rng = np.random.default_rng(1)
    for _ in range(20):
        b = np.exp(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0, 6.3))
        E = rng.normal() + 1j * rng.normal()
        d = np.linalg.det(fam(b) - E * np.eye(8))
        assert P.evaluate_f(b, E) == pytest.approx(d, abs=1e-8 * max(1.0, abs(d)))


def test_poly_det_rejects_rectangular():
    with pytest.raises(ConfigError):
        poly_det([[1.0, 2.0]])


def test_laurent_cleared():
    lp = LaurentPoly({-1: 2.0, 0: 1.0, 1: 3.0})
    poly, p = lp.cleared()
    assert p == 1
    np.testing.assert_allclose(poly.coeffs, [2, 1, 3])


def test_bloch_family_from_entries_roundtrip():
    fam = BlochMatrixFamily.from_entries(2, {(0, 1): LaurentPoly({-1: 1.0, 0: 2.0}), (1, 0): LaurentPoly({1: 3.0})})
    np.testing.assert_allclose(fam(2.0), [[0, 2.5], [6.0, 0]])


def test_bivar_helpers():
    P = BivarPoly({(2, 0): 1.0, (0, 1): -1.0}, pole_order_p=1)  # (b^2 - E)/b
    assert P.evaluate_f(2.0, 1.0) == pytest.approx(1.5)
    assert P.deriv_beta()(3.0, 0.0) == pytest.approx(6.0)
    assert P.rotated(1j)(1.0, 0.0) == pytest.approx(-1.0)
