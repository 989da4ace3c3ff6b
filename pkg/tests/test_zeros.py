from __future__ import annotations

import math

import numpy as np
import pytest

from zetaflow import (
    BoundaryZero,
    NewtonDiverged,
    PoleInside,
    Rectangle,
    build_psi5_odd,
    combination_function,
    compare_counts,
    count_formula,
    find_zeros,
    hurwitz_function,
    newton_refine,
    polynomial_function,
    winding_number,
)
from zetaflow.analytic import AnalyticFunction, from_callable
from zetaflow.zeros import counting_window, zeros_to_csv

ZETA = hurwitz_function(1.0)


# ----------------------------------------------------------------- rectangle


def test_rectangle_validation_and_geometry():
    with pytest.raises(ValueError):
        Rectangle(1, 1, 0, 1)
    with pytest.raises(ValueError):
        Rectangle(0, 1, 2, 1)
    with pytest.raises(ValueError):
        Rectangle(0, math.inf, 0, 1)
    r = Rectangle(-1, 2, 0, 4)
    assert r.width == 3 and r.height == 4 and r.diameter == 5
    assert r.center == 0.5 + 2j
    assert r.corners()[0] == -1 + 0j and r.corners()[2] == 2 + 4j
    assert r.contains(0.5 + 1j) and not r.contains(3 + 1j)
    assert r.distance_to(5 + 8j) == 5
    a, b = r.split(0.5)
    assert a.t_max == b.t_min == 2


# ----------------------------------------------------------------- winding


def test_winding_linear_and_double_toys():
    rect = Rectangle(0, 1, 0, 1)
    assert winding_number(polynomial_function([1, -(0.3 + 0.4j)]), rect) == 1
    assert winding_number(polynomial_function(np.poly([0.5 + 0.5j, 0.5 + 0.5j])), rect) == 2
    assert winding_number(polynomial_function([1, -(3 + 3j)]), rect) == 0


def test_winding_pole_substitution():
    # (s-1) zeta(s) on [-1,2]x[0,50] has the 10 critical-line zeros
    assert winding_number(AnalyticFunction.times_pole(ZETA), Rectangle(-1, 2, 0, 50)) == 10
    res = winding_number(ZETA, Rectangle(-1, 2, -1, 50), details=True)
    # the pole is replaced by (s-1) zeta; no zeros lie in -1 <= t <= 0 of this strip
    assert res.pole_substituted and res.winding == 10
    with pytest.raises(PoleInside):
        winding_number(ZETA, Rectangle(0, 2, -1, 1), allow_pole=False)


def test_boundary_zero_is_nudged():
    # zero exactly on the edge t = 0
    f = polynomial_function([1, -0.5])
    res = winding_number(f, Rectangle(0, 1, 0, 1), details=True)
    assert res.nudges >= 1 and res.winding == 1


def test_boundary_zero_unrecoverable():
    # the zero function vanishes on every nudged boundary as well
    g = from_callable(lambda s: 0j, lambda s: 0j)
    with pytest.raises(BoundaryZero):
        winding_number(g, Rectangle(0, 1, 0, 1))


def test_winding_additivity_random_rectangles():
    rng = np.random.default_rng(42)
    funcs = [ZETA, combination_function(build_psi5_odd(1j))]
    checked = 0
    while checked < 50:
        f = funcs[checked % 2]
        s0, t0 = rng.uniform(-2, 2), rng.uniform(-40, 40)
        r = Rectangle(s0, s0 + rng.uniform(0.5, 3), t0, t0 + rng.uniform(1, 12))
        if r.contains(1, margin=0.05):
            continue
        try:
            whole = winding_number(f, r, details=True)
            a, b = whole.rect.split(float(rng.uniform(0.3, 0.7)))
            parts = winding_number(f, a, details=True), winding_number(f, b, details=True)
        except BoundaryZero:
            continue
        if any(p.nudges for p in parts) or whole.nudges:
            continue  # nudged cells no longer tile the parent exactly
        assert whole.winding == parts[0].winding + parts[1].winding
        checked += 1


# ----------------------------------------------------------------- Newton


def test_newton_examples():
    z = newton_refine(ZETA, 0.5 + 14.1j)
    assert abs(z.location - (0.5 + 14.134725141734693j)) < 1e-12
    assert z.residual <= 1e-8
    sq = newton_refine(polynomial_function([1, 0, -2]), 1.4)
    assert abs(sq.location - math.sqrt(2)) < 1e-15
    # zeta'(-2) is about 0.008, so the residual floor limits the location to ~1e-11
    assert abs(newton_refine(ZETA, -1.9).location + 2) < 1e-10


def test_newton_failures():
    with pytest.raises(NewtonDiverged):
        newton_refine(polynomial_function([1, 0, 0]), 0)  # f' vanishes at the start
    with pytest.raises(NewtonDiverged):
        newton_refine(polynomial_function([1, 0, 1]), 0.0 + 0j, max_iter=3)
    with pytest.raises(NewtonDiverged):
        newton_refine(ZETA, -60)  # outside the evaluable range


# ----------------------------------------------------------------- find_zeros


def test_find_zeros_first_three_riemann_zeros():
    zs = find_zeros(ZETA, Rectangle(-1, 2, 0, 30))
    assert len(zs) == 3
    ref = [14.134725141734693, 21.022039638771555, 25.010857580145689]
    for z, t in zip(zs, ref):
        assert abs(z.sigma - 0.5) < 1e-9 and abs(z.t - t) < 1e-9
        assert z.multiplicity == 1 and z.residual <= 1e-8
        d = ZETA.derivative(z.location)
        assert z.residual / abs(d) <= 1e-9


def test_find_zeros_multiple_toy():
    f = polynomial_function(np.poly([0.3 + 0.3j, 0.3 + 0.3j, 0.8 + 0.6j]))
    zs = find_zeros(f, Rectangle(0, 1, 0, 1))
    assert [z.multiplicity for z in zs] == [2, 1]
    assert abs(zs[0].location - (0.3 + 0.3j)) < 1e-7


def test_find_zeros_completeness_and_order():
    f = combination_function(build_psi5_odd(angle=2.0))
    rect = Rectangle(-2, 3, -10, 25)
    zs, info = find_zeros(f, rect, details=True)
    assert sum(z.multiplicity for z in zs) == info.winding == winding_number(f, rect)
    keys = [(z.t, z.sigma) for z in zs]
    assert keys == sorted(keys)
    assert all(z.residual <= 1e-8 for z in zs)


def test_conjugate_reflection_real_alpha():
    f = hurwitz_function(0.37)
    up = find_zeros(f, Rectangle(-3, 3, 0.5, 25))
    down = find_zeros(f, Rectangle(-3, 3, -25, -0.5))
    a = np.array(sorted((z.location for z in up), key=lambda z: (z.imag, z.real)))
    b = np.array(sorted((z.location.conjugate() for z in down), key=lambda z: (z.imag, z.real)))
    assert len(a) == len(b) > 0
    assert np.max(np.abs(a - b)) < 1e-10


def test_find_zeros_is_deterministic():
    rect = Rectangle(-1, 2, 10, 40)
    a = find_zeros(ZETA, rect)
    b = find_zeros(ZETA, rect)
    assert a == b
    csv = zeros_to_csv(a)
    assert csv.splitlines()[0] == "sigma,t,multiplicity,residual"
    assert len(csv.splitlines()) == len(a) + 1
    assert csv == zeros_to_csv(b)


# ----------------------------------------------------------------- counting


def test_count_formula_examples():
    assert count_formula(2 * math.pi, 1.0) == -1
    assert abs(count_formula(2 * math.pi, 0.5) - (-1 + math.log(2))) < 1e-15
    assert abs(count_formula(100, 1.0) - 28.127) < 1e-3
    x = 100 / (2 * math.pi)
    assert count_formula(100, 1.0) == x * math.log(x) - x
    with pytest.raises(ValueError):
        count_formula(0, 1)
    with pytest.raises(ValueError):
        count_formula(10, 0)
    with pytest.raises(ValueError):
        count_formula(10, 1.5)


def test_counting_window_shape():
    w = counting_window(0.1, 50)
    assert w.sigma_max == 3 and w.t_max == 50
    assert abs(w.sigma_min - (-1 + math.log(0.1) / math.log(2 * math.pi * math.e))) < 1e-15


@pytest.mark.slow
def test_compare_counts_hurwitz_point_three():
    c = compare_counts(0.3, 100)
    assert c.actual == round(c.predicted)
    assert c.deviation == c.predicted - c.actual


@pytest.mark.slow
def test_compare_counts_alpha_one_and_half():
    c1 = compare_counts(1.0, 100)
    assert c1.actual == 29 and abs(c1.deviation) <= 2
    c2 = compare_counts(0.5, 100)
    assert abs(c2.deviation) <= 2


@pytest.mark.slow
def test_compare_counts_l_function():
    c = compare_counts(build_psi5_odd(1j), 60)
    assert c.alpha == 0.2
    assert abs(c.deviation) <= 3


def test_compare_counts_validation():
    with pytest.raises(ValueError):
        compare_counts(1.0, 600)
