from __future__ import annotations

import cmath
import json
import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from zetaflow import (
    PSI5_EVEN_L,
    CombinationSpec,
    NoFlowParameter,
    NotInNullSpace,
    NotPrime,
    NotSymmetric,
    PoleAtOne,
    Rectangle,
    beta_circle_5odd,
    build_psi5_odd,
    build_psi_even5,
    build_psi_even5_circle,
    build_psi_prime,
    combination_param_derivative,
    dirichlet_characters,
    evaluate_combination,
    find_zeros,
    gamma_from_beta_even5,
    hurwitz_spec,
    hurwitz_zeta,
    newton_refine,
    riemann_zeta,
    spec_from_json,
    spec_to_json,
    symmetry_defect,
    symmetry_matrix,
)
from zetaflow.families import (
    CIRCLE5_CENTER,
    CIRCLE5_RADIUS,
    GOLDEN,
    angle_of_beta_5odd,
    combination_function,
    evaluate_factored,
    even5_residuals,
    generic_spec,
    odd5_residual,
    psi5_odd_from_character,
    with_flow_value,
)

mpmath.mp.dps = 30
SIN2, SIN4 = math.sin(2 * math.pi / 5), math.sin(4 * math.pi / 5)


def mpz(s: complex, a: float = 1.0) -> complex:
    return complex(mpmath.zeta(mpmath.mpc(s.real, s.imag), a))


def random_points(seed: int, n: int, tmax: float = 50.0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        s = complex(rng.uniform(-2, 3), rng.uniform(-tmax, tmax))
        if abs(s - 1) > 1e-2:
            out.append(s)
    return out


# ----------------------------------------------------------------- evaluation


def test_single_term_is_riemann_zeta():
    spec = generic_spec(1, [(1, 1)], prefactor=False)
    assert abs(evaluate_combination(spec, 2).value - math.pi**2 / 6) < 1e-13


def test_circle_member_at_two():
    v = evaluate_combination(build_psi_even5_circle(math.pi), 2).value
    assert abs(v - (1 - 5**-1.5) * math.pi**2 / 6) < 1e-12


def test_odd_family_term_by_term():
    s = 0.5 + 6j
    z = [hurwitz_zeta(s, l / 5).value for l in range(1, 5)]
    expected = 5 ** (-s) * (z[0] - z[3] + 1j * (z[1] - z[2]))
    assert abs(evaluate_combination(build_psi5_odd(1j), s).value - expected) < 1e-13


def test_pole_handling():
    with pytest.raises(PoleAtOne):
        evaluate_combination(build_psi_even5_circle(0.3), 1)
    # residue-free combinations are regular at 1: L(1, chi) for chi mod 5 even (quadratic)
    ref = complex(mpmath.dirichlet(1, [0, 1, -1, -1, 1]))
    assert abs(evaluate_combination(PSI5_EVEN_L, 1).value - ref) < 1e-12
    ref = complex(mpmath.dirichlet(1, [0, 1, 1j, -1j, -1]))
    assert abs(evaluate_combination(build_psi5_odd(1j), 1).value - ref) < 1e-12


def test_pole_residue_vanishes_on_l_point():
    # epsilon = 2, phi = pi: beta = -1 and gamma = 0, the even L-function
    beta, gamma = gamma_from_beta_even5(2.0, math.pi)
    assert abs(beta + 1) < 1e-15 and abs(gamma) < 1e-14
    spec = build_psi_even5(2.0, math.pi)
    assert abs(spec.pole_residue) < 1e-14
    assert math.isfinite(abs(evaluate_combination(spec, 1).value))


# ----------------------------------------------------------------- odd circle


def test_odd_circle_center_radius_by_algebra():
    # the condition with beta = x + i y: real part and imaginary part
    x, y = sympy.symbols("x y", real=True)
    b = x + sympy.I * y
    s2, s4 = sympy.sin(2 * sympy.pi / 5), sympy.sin(4 * sympy.pi / 5)
    expr = sympy.expand(s4 - b * s2 - sympy.conjugate(b) * (s2 + b * s4))
    eqs = [sympy.simplify(sympy.re(expr)), sympy.simplify(sympy.im(expr))]
    # one equation vanishes identically; the other is a circle
    circle = [e for e in eqs if sympy.simplify(e) != 0]
    assert len(circle) == 1
    poly = sympy.Poly(sympy.expand(circle[0] / -s4), x, y)
    cx = -poly.coeff_monomial(x) / 2
    r2 = cx**2 - poly.coeff_monomial(1)
    assert poly.coeff_monomial(y) == 0
    assert abs(float(cx) - CIRCLE5_CENTER) < 1e-14
    assert abs(math.sqrt(float(r2)) - CIRCLE5_RADIUS) < 1e-14


def test_odd_circle_residuals_and_special_points():
    ang = np.linspace(0, 2 * math.pi, 10_000, endpoint=False)
    betas = beta_circle_5odd(ang)
    assert max(odd5_residual(b) for b in betas) <= 1e-12
    a_i, a_mi = angle_of_beta_5odd(1j), angle_of_beta_5odd(-1j)
    assert abs(beta_circle_5odd(a_i) - 1j) < 1e-14
    assert abs(beta_circle_5odd(a_mi) + 1j) < 1e-14
    assert odd5_residual(1j) == pytest.approx(0, abs=1e-15)
    assert abs(a_mi - 5.7296) < 1e-3


def test_build_psi5_odd_admission():
    spec = build_psi5_odd(1j)
    assert spec.modulus == 5 and spec.prefactor
    assert np.allclose(spec.coefficients, [1, 1j, -1j, -1])
    with pytest.raises(NotSymmetric):
        build_psi5_odd(0.5)
    conj = build_psi5_odd(-1j)
    s = 0.5 + 6j
    assert abs(evaluate_combination(conj, s.conjugate()).value
               - evaluate_combination(spec, s).value.conjugate()) < 1e-13


def test_characters_reproduce_odd_family():
    tab = dirichlet_characters(5)
    for j in tab.odd():
        spec = psi5_odd_from_character(tab, j)
        beta = spec.coefficients[1]
        fam = build_psi5_odd(beta)
        ratio = spec.coefficients / fam.coefficients
        assert np.allclose(ratio, ratio[0], atol=1e-15)
        assert symmetry_defect(spec) < 1e-14
    with pytest.raises(ValueError):
        psi5_odd_from_character(tab, tab.even()[0])


# ----------------------------------------------------------------- even m = 5


def test_gamma_from_beta_examples():
    for eps, phi in [(0.0, 0.3), (0.01, 1.0), (0.5, 2.0), (3.0, 5.5)]:
        beta, gamma = gamma_from_beta_even5(eps, phi)
        assert max(even5_residuals(beta, gamma)) <= 1e-12
    _, gamma = gamma_from_beta_even5(0.0, 0.0)
    assert abs(gamma - (1 + math.sqrt(5))) < 1e-15
    _, gamma = gamma_from_beta_even5(0.0, 0.35)
    assert abs(gamma - (1 + math.sqrt(5) * cmath.exp(0.7j))) < 1e-15


def test_beta_gamma_one_is_not_symmetric_family():
    # beta = gamma = 1 reduces to zeta(s) and does not solve the system
    assert max(even5_residuals(1, 1)) > 0.1
    spec = generic_spec(5, [(l, 1) for l in range(1, 6)])
    s = 0.3 + 4j
    assert abs(evaluate_combination(spec, s).value - riemann_zeta(s).value) < 1e-13
    assert symmetry_defect(spec) > 0.1


def test_even_zero_epsilon_matches_circle():
    v = evaluate_combination(build_psi_even5(0.0, math.pi / 2), 2).value
    assert abs(v - (1 - 5**-1.5) * math.pi**2 / 6) < 1e-12


def test_even_forms_agree_small_epsilon():
    spec = build_psi_even5(0.01, 0.77)
    worst = 0.0
    for s in random_points(5, 100):
        a = evaluate_combination(spec, s).value
        b = evaluate_factored(spec, s)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    assert worst < 1e-10


def test_circle_factor_trivial_zeros():
    theta = 0.7
    spec = build_psi_even5_circle(theta)
    zs = find_zeros(combination_function(spec), Rectangle(-1, 2, 0.5, 20))
    riemann = [z for z in zs if abs(abs(riemann_zeta(z.location).value)) < 1e-8]
    trivial = sorted(z.t for z in zs if z not in riemann)
    assert len(riemann) == 1 and abs(riemann[0].t - 14.134725141734) < 1e-8
    gap = 2 * math.pi / math.log(5)
    assert all(abs(z.sigma - 0.5) < 1e-10 for z in zs)
    assert np.allclose(np.diff(trivial), gap, atol=1e-9)
    # 1 + e^{i theta} 5^{1/2 - s} = 0 at t = (theta + pi + 2 pi k)/log 5
    k0 = math.ceil((0.5 * math.log(5) - theta - math.pi) / (2 * math.pi))
    assert abs(trivial[0] - (theta + math.pi + 2 * math.pi * k0) / math.log(5)) < 1e-9


def test_constant_l_spec():
    assert symmetry_defect(PSI5_EVEN_L) < 1e-14
    c = PSI5_EVEN_L.coefficients
    assert np.allclose(c, [1, -1, -1, 1])


# ----------------------------------------------------------------- symmetry matrices


def test_symmetry_matrix_p7():
    m = symmetry_matrix(7)
    c = lambda k: math.cos(k * math.pi / 7)  # noqa: E731
    h = math.sqrt(7) / 2
    ref = np.array([[c(4), c(6), 0.5], [c(6) - h, c(2), 0.5], [c(2), c(4) - h, 0.5]])
    assert np.max(np.abs(m.entries - ref)) < 1e-15
    assert (m.rank, m.nullity, m.order) == (2, 1, 3)
    X = m.null_basis[0]
    assert np.linalg.norm(m.entries @ X) < 1e-12
    assert abs(np.linalg.norm(X) - 1) < 1e-14


def test_symmetry_matrix_p5_matches_linearized_conditions():
    # linearize the even m = 5 conditions about the circle in the direction
    # beta = 1 + eps e^{i phi} x1, gamma = 1 + sqrt5 e^{2 i phi} + eps e^{i phi} x2
    eps, phi, x1, x2 = sympy.symbols("epsilon phi x1 x2", real=True)
    e = sympy.exp(sympy.I * phi)
    ec = sympy.exp(-sympy.I * phi)
    c2, c4 = sympy.cos(2 * sympy.pi / 5), sympy.cos(4 * sympy.pi / 5)
    b = 1 + eps * e * x1
    bc = 1 + eps * ec * x1
    g = 1 + sympy.sqrt(5) * e**2 + eps * e * x2
    gc = 1 + sympy.sqrt(5) * ec**2 + eps * ec * x2
    inner = c2 + b * c4 + g / 2
    r1 = c4 + b * c2 + g / 2 - bc * inner
    r2 = 1 + b + g / 2 - gc * inner
    rows = []
    for r in (r1, r2):
        lin = sympy.diff(r, eps).subs(eps, 0)
        for ph in (0.3, 1.1, 2.6, 4.0):
            val = lin.subs(phi, ph)
            for part in (sympy.re, sympy.im):
                expr = sympy.expand(part(sympy.expand(val)))
                rows.append([float(expr.coeff(x1)), float(expr.coeff(x2))])
    A = np.array(rows)
    _, sv, Vt = np.linalg.svd(A)
    assert sv[-1] < 1e-12 * sv[0]
    direction = Vt[-1] / np.linalg.norm(Vt[-1])
    m5 = symmetry_matrix(5)
    assert m5.nullity == 1
    assert abs(abs(direction @ m5.null_basis[0]) - 1) < 1e-12
    assert abs(direction[1] / direction[0] - GOLDEN) < 1e-12


def test_symmetry_matrix_p13_and_general():
    m13 = symmetry_matrix(13)
    assert m13.nullity == 3 and m13.rank == 3
    for p in (5, 7, 11, 13, 17, 29, 97):
        m = symmetry_matrix(p)
        assert m.rank + m.nullity == (p - 1) // 2
        B = np.array(m.null_basis)
        assert np.allclose(B @ B.T, np.eye(m.nullity), atol=1e-12)
        for X in B:
            assert np.linalg.norm(m.entries @ X) <= 1e-10
            first = X[np.flatnonzero(np.abs(X) > 1e-12)[0]]
            assert first > 0


def test_symmetry_matrix_errors():
    for bad in (4, 9, 15, 1):
        with pytest.raises(NotPrime):
            symmetry_matrix(bad)
    with pytest.raises(ValueError):
        symmetry_matrix(3)
    with pytest.raises(ValueError):
        symmetry_matrix(101)


def test_symmetry_matrix_deterministic_basis():
    a = symmetry_matrix(13).null_basis
    b = symmetry_matrix(13).null_basis
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_build_psi_prime():
    X = symmetry_matrix(7).null_basis[0]
    spec = build_psi_prime(7, 0.3, 1.2, X)
    assert symmetry_defect(spec) < 1e-12
    with pytest.raises(NotInNullSpace):
        build_psi_prime(7, 0.3, 1.2, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        build_psi_prime(7, 0.3, 1.2, 2 * X)
    with pytest.raises(ValueError):
        build_psi_prime(7, -0.1, 1.2, X)
    # factored form g_7 with pairs (2,5), (3,4) and the zeta(s) weight
    for s in random_points(17, 20):
        a = evaluate_combination(spec, s).value
        b = evaluate_factored(spec, s)
        g7 = (X[0] * (mpz(s, 2 / 7) + mpz(s, 5 / 7)) + X[1] * (mpz(s, 3 / 7) + mpz(s, 4 / 7)) + X[2] * mpz(s))
        ref = (1 + cmath.exp(2.4j) * 7 ** (0.5 - s)) * mpz(s) + 0.3 * cmath.exp(1.2j) * 7 ** (-s) * g7
        assert abs(a - ref) / abs(ref) < 1e-10
        assert abs(b - ref) / abs(ref) < 1e-10


@settings(max_examples=25, deadline=None)
@given(w=st.lists(st.floats(-1, 1), min_size=3, max_size=3), eps=st.floats(0, 5), phi=st.floats(0, 6.3))
def test_p13_sphere_members_are_symmetric(w, eps, phi):
    w = np.array(w)
    if np.linalg.norm(w) < 1e-3:
        return
    B = np.array(symmetry_matrix(13).null_basis)
    X = (w / np.linalg.norm(w)) @ B
    assert symmetry_defect(build_psi_prime(13, eps, phi, X)) < 1e-10


def test_symmetry_defect_distinguishes():
    assert symmetry_defect(build_psi5_odd(angle=1.0)) < 1e-14
    assert symmetry_defect(build_psi_even5(0.7, 2.0)) < 1e-14
    assert symmetry_defect(build_psi_even5_circle(1.0)) < 1e-14
    assert symmetry_defect(generic_spec(5, [(1, 1), (2, 0.5), (3, -0.5), (4, -1)])) > 1e-3
    assert symmetry_defect(hurwitz_spec(0.5)) == math.inf


# ----------------------------------------------------------------- parameter derivatives


def _fd(spec, s, h=1e-6):
    v = spec.flow_value
    plus = evaluate_combination(with_flow_value(spec, v + h), s).value
    minus = evaluate_combination(with_flow_value(spec, v - h), s).value
    return (plus - minus) / (2 * h)


@pytest.mark.parametrize("spec", [
    build_psi5_odd(angle=0.9),
    build_psi_even5_circle(0.4),
    build_psi_even5(0.5, 1.3),
    build_psi_prime(7, 0.8, 2.1, symmetry_matrix(7).null_basis[0]),
    build_psi_prime(13, 0.2, 4.0, symmetry_matrix(13).null_basis[1]),
], ids=lambda sp: sp.family)
def test_param_derivative_finite_difference(spec):
    for s in random_points(23, 10, 30):
        d = combination_param_derivative(spec, s)
        fd = _fd(spec, s)
        assert abs(d - fd) / abs(fd) < 1e-5


def test_param_derivative_hurwitz():
    z = 0.3 + 5j
    d = combination_param_derivative(hurwitz_spec(0.6), z)
    assert abs(d - (-z * hurwitz_zeta(z + 1, 0.6).value)) < 1e-12
    h = 1e-6
    fd = (hurwitz_zeta(z, 0.6 + h).value - hurwitz_zeta(z, 0.6 - h).value) / (2 * h)
    assert abs(d - fd) / abs(fd) < 1e-5


def test_param_derivative_at_zero_even_family():
    eps, phi = 0.01, 0.8
    spec = build_psi_even5(eps, phi)
    z = newton_refine(combination_function(spec), 0.5 + 14.13j).location
    zeta = riemann_zeta(z).value
    E = cmath.exp(2j * phi) * 5 ** (0.5 - z)
    d = combination_param_derivative(spec, z)
    assert abs(d - 1j * zeta * (E - 1)) <= 1e-8 * (1 + abs(zeta))


def test_param_derivative_generic_raises():
    with pytest.raises(NoFlowParameter):
        combination_param_derivative(generic_spec(3, [(1, 1), (2, -1)]), 2)


# ----------------------------------------------------------------- spec type and JSON


def test_spec_validation():
    with pytest.raises(ValueError):
        CombinationSpec(0, ((1, 1),))
    with pytest.raises(ValueError):
        CombinationSpec(3, ((1, 1), (1, 2)))
    with pytest.raises(ValueError):
        CombinationSpec(3, ((4, 1),))
    with pytest.raises(ValueError):
        CombinationSpec(3, ((1, 1),), family="Bogus")
    with pytest.raises(ValueError):
        build_psi_even5(-0.1, 0)


@pytest.mark.parametrize("spec", [
    generic_spec(3, [(1, 1), (2, -0.5 + 2j)], name="toy"),
    hurwitz_spec(0.3),
    build_psi5_odd(1j),
    build_psi_even5_circle(2.5),
    build_psi_even5(0.01, 0.3),
    build_psi_prime(13, 1.5, 0.2, symmetry_matrix(13).null_basis[2]),
], ids=lambda sp: sp.family)
def test_json_round_trip(spec):
    text = spec_to_json(spec)
    doc = json.loads(text)
    assert set(doc) >= {"modulus", "prefactor", "terms", "family"}
    back = spec_from_json(text)
    assert back.family == spec.family and back.modulus == spec.modulus
    assert np.allclose(back.coefficients, spec.coefficients, atol=1e-15)
    assert spec_to_json(back) == text


def test_json_generic_document():
    doc = {"modulus": 4, "prefactor": True,
           "terms": [{"l": 1, "c_re": 1, "c_im": 0}, {"l": 3, "c_re": -1, "c_im": 0}],
           "family": {"tag": "Generic", "params": {}}}
    spec = spec_from_json(json.dumps(doc))
    # 4^-s (zeta(s,1/4) - zeta(s,3/4)) is the Dirichlet beta function
    s = 2.0
    assert abs(evaluate_combination(spec, s).value - float(mpmath.catalan)) < 1e-13
    with pytest.raises(ValueError):
        spec_from_json(json.dumps({**doc, "family": {"tag": "Nope", "params": {}}}))
