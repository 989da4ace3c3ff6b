"""Linear combinations of Hurwitz zeta functions and their zero-symmetric families.

A combination is

    Psi(s) = [m^(-s)] * sum_l c_l * zeta(s, l/m),

optionally carrying a *family* tag that names a continuous parameter along
which zeros can be tracked.  Families supported:

``Hurwitz(alpha)``
    zeta(s, alpha) itself; flow parameter alpha.
``Psi5Odd(beta)``
    m = 5 odd combination (1, beta, -beta, -1) with beta on the circle of
    symmetric solutions; flow parameter is the angle on that circle.
``Psi5EvenCircle(theta)``
    m = 5 even combination with beta = 1, gamma = 1 + sqrt(5) e^(i theta);
    equals (1 + e^(i theta) 5^(1/2-s)) zeta(s).  Flow parameter theta.
``Psi5EvenPerturbed(eps, phi)``
    beta = 1 + eps e^(i phi), gamma = 1 + sqrt(5) e^(2 i phi)
    + eps (1+sqrt5)/2 e^(i phi).  Flow parameter phi.
``PsiPrime(p, eps, phi, X)``
    even prime-modulus generalisation with perturbation direction X in the
    null space of :func:`symmetry_matrix`.  Flow parameter phi.

Interesting regimes of eps: eps <= 0.01 (perturbation of the circle family,
where bifurcations are isolated) and eps near 2 (where, at phi = pi, the pole
at s = 1 disappears and the m = 5 family passes through an L-function).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .analytic import AnalyticFunction
from .errors import (
    ConstructionUnvalidated,
    NoFlowParameter,
    NotInNullSpace,
    NotPrime,
    NotSymmetric,
    PoleAtOne,
)
from .zeta import (
    DEFAULT_TOL,
    POLE_RADIUS,
    CharacterTable,
    EvalResult,
    hurwitz_jet,
    is_prime,
)

SQRT5 = math.sqrt(5.0)
GOLDEN = (1.0 + SQRT5) / 2.0

_SIN2 = math.sin(2 * math.pi / 5)
_SIN4 = math.sin(4 * math.pi / 5)
_COS2 = math.cos(2 * math.pi / 5)
_COS4 = math.cos(4 * math.pi / 5)

#: Centre and radius of the locus of symmetric betas for the odd m = 5 family.
CIRCLE5_CENTER = -_SIN2 / _SIN4
CIRCLE5_RADIUS = math.sqrt(1.0 + (_SIN2 / _SIN4) ** 2)

SYMMETRY_TOL = 1e-12
ADMISSION_TOL = 1e-9
SVD_THRESHOLD = 1e-10

FAMILY_TAGS = ("Generic", "Hurwitz", "Psi5Odd", "Psi5EvenCircle", "Psi5EvenPerturbed", "PsiPrime")
FLOW_PARAMETER = {
    "Hurwitz": "alpha",
    "Psi5Odd": "angle",
    "Psi5EvenCircle": "theta",
    "Psi5EvenPerturbed": "phi",
    "PsiPrime": "phi",
}


# ---------------------------------------------------------------------------
# spec type


@dataclass(frozen=True)
class CombinationSpec:
    """Immutable description of a combination sum_l c_l zeta(s, l/m)."""

    modulus: int
    terms: tuple[tuple[int, complex], ...]
    prefactor: bool = True
    family: str = "Generic"
    params: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.modulus, (int, np.integer)) or self.modulus < 1:
            raise ValueError("modulus must be a positive integer")
        if self.family not in FAMILY_TAGS:
            raise ValueError(f"unknown family tag {self.family!r}")
        ls = [int(l) for l, _ in self.terms]
        if len(set(ls)) != len(ls):
            raise ValueError("term indices must be distinct")
        if any(l < 1 or l > self.modulus for l in ls):
            raise ValueError("term indices must satisfy 1 <= l <= modulus")
        object.__setattr__(self, "terms", tuple((int(l), complex(c)) for l, c in self.terms))

    @property
    def alphas(self) -> np.ndarray:
        if self.family == "Hurwitz":
            return np.array([float(self.params["alpha"])])
        return np.array([l / self.modulus for l, _ in self.terms], dtype=float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=complex)

    @property
    def flow_parameter(self) -> str | None:
        return FLOW_PARAMETER.get(self.family)

    @property
    def flow_value(self) -> float:
        key = self.flow_parameter
        if key is None:
            raise NoFlowParameter("generic combinations carry no flow parameter")
        return float(self.params[key])

    @property
    def pole_residue(self) -> complex:
        """Residue of the simple pole at s = 1."""
        r = complex(self.coefficients.sum())
        return r / self.modulus if self.prefactor else r

    @property
    def function_id(self) -> str:
        if self.name:
            return self.name
        if self.family == "Generic":
            return f"combination(m={self.modulus})"
        inner = ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params.items())
        return f"{self.family}({inner})"

    def coefficient_vector(self) -> np.ndarray:
        """Coefficients a_1..a_m as a dense vector (zero for absent terms)."""
        a = np.zeros(self.modulus, dtype=complex)
        for l, c in self.terms:
            a[l - 1] = c
        return a


def _fmt_param(v) -> str:
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ";".join(f"{float(x):.6g}" for x in v) + "]"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}i"
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _residue_free(spec: CombinationSpec) -> bool:
    c = spec.coefficients
    return abs(c.sum()) <= 1e-14 * max(1.0, float(np.abs(c).max(initial=0.0)))


# ---------------------------------------------------------------------------
# coefficient formulas for each family (flow value may be complex)


def beta_circle_5odd(angle):
    """Point of the symmetric-beta circle of the odd m = 5 family at ``angle``."""
    if np.ndim(angle):
        return CIRCLE5_CENTER + CIRCLE5_RADIUS * np.exp(1j * np.asarray(angle, dtype=float))
    return CIRCLE5_CENTER + CIRCLE5_RADIUS * cmath.exp(1j * angle)


def angle_of_beta_5odd(beta: complex) -> float:
    """Inverse of :func:`beta_circle_5odd` (projection onto the circle)."""
    return cmath.phase(complex(beta) - CIRCLE5_CENTER) % (2 * math.pi)


def odd5_residual(beta: complex) -> float:
    """Residual of the symmetry condition for the odd m = 5 family."""
    b = complex(beta)
    return abs(_SIN4 - b * _SIN2 - b.conjugate() * (_SIN2 + b * _SIN4))


def even5_residuals(beta: complex, gamma: complex) -> tuple[float, float]:
    """Residuals of the two symmetry conditions of the even m = 5 family."""
    b, g = complex(beta), complex(gamma)
    inner = _COS2 + b * _COS4 + g / 2
    r1 = _COS4 + b * _COS2 + g / 2 - b.conjugate() * inner
    r2 = 1 + b + g / 2 - g.conjugate() * inner
    return abs(r1), abs(r2)


def gamma_from_beta_even5(eps: float, phi: float) -> tuple[complex, complex]:
    """(beta, gamma) of the perturbed even m = 5 family."""
    e = cmath.exp(1j * phi)
    beta = 1 + eps * e
    gamma = 1 + SQRT5 * e * e + eps * GOLDEN * e
    return beta, gamma


def _odd5_coeffs(angle):
    beta = CIRCLE5_CENTER + CIRCLE5_RADIUS * cmath.exp(1j * angle)
    db = 1j * CIRCLE5_RADIUS * cmath.exp(1j * angle)
    c = np.array([1, beta, -beta, -1], dtype=complex)
    dc = np.array([0, db, -db, 0], dtype=complex)
    return c, dc


def _even5_circle_coeffs(theta):
    e = cmath.exp(1j * theta)
    c = np.array([1, 1, 1, 1, 1 + SQRT5 * e], dtype=complex)
    dc = np.array([0, 0, 0, 0, 1j * SQRT5 * e], dtype=complex)
    return c, dc


def _prime_coeffs(p, eps, phi, x):
    """Coefficients l = 1..p of the even prime family and their phi-derivative."""
    x = np.asarray(x, dtype=float)
    e = cmath.exp(1j * phi)
    c = np.ones(p, dtype=complex)
    dc = np.zeros(p, dtype=complex)
    for k in range(1, (p - 3) // 2 + 1):
        for l in (k + 1, p - k - 1):
            c[l - 1] = 1 + eps * x[k - 1] * e
            dc[l - 1] = 1j * eps * x[k - 1] * e
    c[p - 1] = 1 + math.sqrt(p) * e * e + eps * x[-1] * e
    dc[p - 1] = 2j * math.sqrt(p) * e * e + 1j * eps * x[-1] * e
    return c, dc


def flow_coefficients(spec: CombinationSpec, value: complex | None = None):
    """(alphas, c, dc/dparam) at flow-parameter ``value`` (defaults to the combination's own).

    ``value`` may be complex; this is how regularized tracking moves the
    parameter slightly off the real axis.  Hurwitz specs return dc = None
    (their parameter enters through alpha, not the coefficients).
    """
    fam = spec.family
    if fam == "Generic":
        raise NoFlowParameter("generic combinations carry no flow parameter")
    v = spec.flow_value if value is None else value
    if fam == "Hurwitz":
        return np.array([v], dtype=complex), np.array([1.0 + 0j]), None
    if fam == "Psi5Odd":
        c, dc = _odd5_coeffs(v)
        p = 5
    elif fam == "Psi5EvenCircle":
        c, dc = _even5_circle_coeffs(v)
        p = 5
    elif fam == "Psi5EvenPerturbed":
        c, dc = _prime_coeffs(5, spec.params["epsilon"], v, (1.0, GOLDEN))
        p = 5
    else:
        p = int(spec.params["p"])
        c, dc = _prime_coeffs(p, spec.params["epsilon"], v, spec.params["X"])
    alphas = np.array([l / p for l in range(1, p + 1)])[: len(c)]
    return alphas, c, dc


# ---------------------------------------------------------------------------
# evaluation


def _prefactor_jet(m: int, s: np.ndarray, order: int) -> np.ndarray:
    L = math.log(m)
    P = np.exp(-L * s)
    return np.array([P * (-L) ** j for j in range(order + 1)])


def _leibniz(P: np.ndarray, S: np.ndarray) -> np.ndarray:
    out = np.empty_like(S)
    out[0] = P[0] * S[0]
    if len(S) > 1:
        out[1] = P[1] * S[0] + P[0] * S[1]
    if len(S) > 2:
        out[2] = P[2] * S[0] + 2 * P[1] * S[1] + P[0] * S[2]
    return out


def _combo_eval(m, prefactor, alphas, coeffs, s, order, tol, mode, extra=()):
    """Core evaluator.

    Returns (jets (order+1, M), errs (order+1, M), [extra contractions (M,)...]).
    ``extra`` coefficient vectors are contracted with the same zeta values
    (order 0), which gives parameter derivatives at no extra cost.
    """
    s = np.asarray(s, dtype=complex).ravel()
    z, e = hurwitz_jet(s[:, None], np.asarray(alphas)[None, :], order, tol, mode)
    S = z @ coeffs
    E = e @ np.abs(coeffs)
    ex = [z[0] @ np.asarray(x) for x in extra]
    if prefactor and m != 1:
        P = _prefactor_jet(m, s, order)
        S = _leibniz(P, S)
        E = _leibniz(np.abs(P), E)
        ex = [P[0] * v for v in ex]
    return S, E, ex


def _spec_mode(spec: CombinationSpec, s: np.ndarray, regularized: bool) -> str:
    if regularized:
        return "times_pole"
    near = np.abs(s - 1) < 0.5
    if not near.any():
        return "plain"
    if _residue_free(spec):
        return "minus_pole"
    if np.any(np.abs(s - 1) < POLE_RADIUS):
        raise PoleAtOne("combination has a pole at s = 1")
    return "plain"


def combination_jet(spec: CombinationSpec, s, order: int = 0, tol: float = DEFAULT_TOL,
                    regularized: bool = False):
    """Vectorized value and s-derivatives; ``regularized`` multiplies by (s-1)."""
    s = np.asarray(s, dtype=complex).ravel()
    mode = _spec_mode(spec, s, regularized)
    if spec.family == "Hurwitz":
        return hurwitz_jet(s, spec.alphas[0], order, tol, mode)
    jets, errs, _ = _combo_eval(spec.modulus, spec.prefactor, spec.alphas, spec.coefficients,
                                s, order, tol, mode)
    return jets, errs


def evaluate_combination(spec: CombinationSpec, s: complex, tol: float = DEFAULT_TOL) -> EvalResult:
    """Value of the combination at s with an absolute error estimate.

    Raises PoleAtOne within 1e-6 of s = 1 unless the pole residue vanishes.
    """
    jets, errs = combination_jet(spec, np.array([complex(s)]), 0, tol)
    return EvalResult(complex(jets[0, 0]), float(errs[0, 0]))


def evaluate_factored(spec: CombinationSpec, s: complex, tol: float = DEFAULT_TOL) -> complex:
    """Even families in the form (1 + e^(2 i phi) p^(1/2-s)) zeta(s) + eps e^(i phi) p^(-s) g_p(s).

    Independent of the stored coefficients; used to cross-check them.
    """
    s = complex(s)
    fam = spec.family
    if fam == "Psi5EvenCircle":
        p, eps, e2 = 5, 0.0, cmath.exp(1j * spec.params["theta"])
        g = 0.0
    elif fam in ("Psi5EvenPerturbed", "PsiPrime"):
        p = 5 if fam == "Psi5EvenPerturbed" else int(spec.params["p"])
        x = (1.0, GOLDEN) if fam == "Psi5EvenPerturbed" else spec.params["X"]
        eps, phi = spec.params["epsilon"], spec.params["phi"]
        e2 = cmath.exp(2j * phi)
        g = 0j
        if eps:
            half = (p - 1) // 2
            alphas = [x_ for k in range(1, half) for x_ in ((k + 1) / p, (p - k - 1) / p)] + [1.0]
            weights = [x[k - 1] for k in range(1, half) for _ in range(2)] + [x[-1]]
            vals, _ = hurwitz_jet(np.full(len(alphas), s), np.array(alphas), 0, tol)
            g = complex(vals[0] @ np.array(weights, dtype=complex))
    else:
        raise ValueError(f"no factored form for family {fam}")
    zeta = complex(hurwitz_jet(s, 1.0, 0, tol)[0][0])
    out = (1 + e2 * p ** (0.5 - s)) * zeta
    if fam != "Psi5EvenCircle" and eps:
        out += eps * cmath.exp(1j * spec.params["phi"]) * p ** (-s) * g
    return out


def combination_param_derivative(spec: CombinationSpec, s: complex, tol: float = DEFAULT_TOL,
                                 value: complex | None = None) -> complex:
    """d Psi / d(flow parameter) at fixed s."""
    if spec.flow_parameter is None:
        raise NoFlowParameter("generic combinations carry no flow parameter")
    s = complex(s)
    if spec.family == "Hurwitz":
        a = spec.flow_value if value is None else value
        # d/d alpha zeta(s, alpha) = -s zeta(s+1, alpha), regular at s = 0
        return -complex(hurwitz_jet(s + 1, a, 0, tol, "times_pole")[0][0])
    alphas, c, dc = flow_coefficients(spec, value)
    _, _, (d,) = _combo_eval(spec.modulus, spec.prefactor, alphas, c, np.array([s]), 0, tol,
                             _spec_mode(spec, np.array([s]), False), extra=(dc,))
    return complex(d[0])


def combination_function(spec: CombinationSpec, tol: float = DEFAULT_TOL) -> AnalyticFunction:
    """Adapter for the zero-finder."""

    def jet(s, order):
        return combination_jet(spec, s, order, tol)[0]

    def pole_free(s, order):
        return combination_jet(spec, s, order, tol, regularized=True)[0]

    residue = 0 if _residue_free(spec) else spec.pole_residue
    return AnalyticFunction(jet, spec.function_id, residue=residue, pole_free=pole_free)


# ---------------------------------------------------------------------------
# builders


def hurwitz_spec(alpha: float) -> CombinationSpec:
    """zeta(s, alpha) as a one-term spec with alpha as flow parameter."""
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return CombinationSpec(1, ((1, 1.0),), prefactor=False, family="Hurwitz",
                           params={"alpha": alpha})


def riemann_spec() -> CombinationSpec:
    return CombinationSpec(1, ((1, 1.0),), prefactor=False, name="zeta")


def generic_spec(modulus: int, terms, prefactor: bool = True, name: str = "") -> CombinationSpec:
    return CombinationSpec(int(modulus), tuple(terms), prefactor=prefactor, name=name)


def build_psi5_odd(beta: complex | None = None, *, angle: float | None = None) -> CombinationSpec:
    """Odd m = 5 combination (1, beta, -beta, -1) with the m^(-s) prefactor.

    Either ``beta`` (checked against the symmetry condition to 1e-9 and
    snapped onto the circle) or the circle ``angle`` must be given.
    """
    if angle is not None:
        angle = float(angle) % (2 * math.pi)
        beta = beta_circle_5odd(angle)
    else:
        beta = complex(beta)
        res = odd5_residual(beta)
        if not res <= ADMISSION_TOL:
            raise NotSymmetric(f"beta={beta} violates the odd symmetry condition (residual {res:.3g})")
        angle = angle_of_beta_5odd(beta)
        if abs(beta.real) > 0 or abs(abs(beta.imag) - 1) > 0:
            beta = beta_circle_5odd(angle)
    c = (1, beta, -beta, -1)
    return CombinationSpec(5, tuple(zip(range(1, 5), c)), prefactor=True, family="Psi5Odd",
                           params={"angle": angle, "beta": beta})


def psi5_odd_from_character(table: CharacterTable, index: int) -> CombinationSpec:
    """Odd m = 5 combination whose coefficients are the values of a Dirichlet character."""
    if table.modulus != 5:
        raise ValueError("need the modulus-5 character table")
    chi = table.characters[index]
    if table.parity[index] != "odd":
        raise ValueError("character is not odd")
    return CombinationSpec(5, tuple((l, chi[l - 1]) for l in range(1, 5)), prefactor=True,
                           name=f"L(s,chi_{index} mod 5)")


def build_psi_even5_circle(theta: float) -> CombinationSpec:
    """Even m = 5 family on the circle beta = 1, gamma = 1 + sqrt5 e^(i theta)."""
    theta = float(theta)
    c, _ = _even5_circle_coeffs(theta)
    return CombinationSpec(5, tuple(zip(range(1, 6), c)), prefactor=True, family="Psi5EvenCircle",
                           params={"theta": theta})


def build_psi_even5(eps: float, phi: float) -> CombinationSpec:
    """Perturbed even m = 5 family (beta, gamma) from :func:`gamma_from_beta_even5`."""
    eps, phi = float(eps), float(phi)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    beta, gamma = gamma_from_beta_even5(eps, phi)
    c = (1, beta, beta, 1, gamma)
    return CombinationSpec(5, tuple(zip(range(1, 6), c)), prefactor=True, family="Psi5EvenPerturbed",
                           params={"epsilon": eps, "phi": phi})


#: The even m = 5 combination without a zeta(s, 1) admixture: only beta = -1 is symmetric.
PSI5_EVEN_L = CombinationSpec(5, ((1, 1), (2, -1), (3, -1), (4, 1)), prefactor=True,
                              name="L(s,chi_2 mod 5)")


# ---------------------------------------------------------------------------
# exact symmetry test


def symmetry_defect(spec: CombinationSpec) -> float:
    """Distance of the coefficient vector from the zero-symmetric set.

    The combination has zeros symmetric under z -> 1 - conj(z) (via the
    modulus-m functional equation) when its coefficients a_1..a_m are purely
    even or purely odd and their unitary discrete Fourier transform is a
    unimodular multiple of the complex conjugate vector.  Returns the
    relative residual of that condition (0 for exactly symmetric specs).
    """
    if spec.family == "Hurwitz":
        # the real zeros -2, -4, ... (shifted with alpha) have no mirror partners
        return float("inf")
    a = spec.coefficient_vector()
    m = spec.modulus
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("empty combination")
    rev = np.concatenate([a[-2::-1], a[-1:]]) if m > 1 else a  # a_{m-l}, l = 1..m
    even = np.linalg.norm(a - rev) / norm
    odd = np.linalg.norm(a + rev) / norm
    parity = min(even, odd)
    l = np.arange(1, m + 1)
    F = np.exp(-2j * np.pi * np.outer(l, l) / m) / math.sqrt(m)
    ahat = F @ a
    lam = np.vdot(a.conj(), ahat) / norm**2
    return float(max(parity, np.linalg.norm(ahat - lam * a.conj()) / norm))


# ---------------------------------------------------------------------------
# symmetry matrices for prime moduli


@dataclass(frozen=True)
class SymmetryMatrix:
    """Linear system M X = 0 for the perturbation directions X of the even prime family."""

    p: int
    entries: np.ndarray
    rank: int
    nullity: int
    null_basis: tuple[np.ndarray, ...]
    singular_values: np.ndarray

    @property
    def order(self) -> int:
        return (self.p - 1) // 2


def _raw_symmetry_matrix(p: int) -> np.ndarray:
    n = (p - 1) // 2
    M = np.empty((n, n))
    rt = math.sqrt(p) / 2
    for j in range(1, n + 1):
        for k in range(1, n):
            M[j - 1, k - 1] = math.cos(2 * math.pi * j * (k + 1) / p) - (rt if j == k + 1 else 0.0)
        M[j - 1, n - 1] = 0.5
    return M


def _canonical_basis(V: np.ndarray) -> list[np.ndarray]:
    """Canonical orthonormal basis of span(rows of V) (rows assumed orthonormal).

    Pivoted Gram-Schmidt on the columns of the orthogonal projector onto the
    span (the projector does not depend on the particular basis V); signs are
    fixed so the first non-negligible component is positive.
    """
    P = V.T @ V
    R = P.copy()
    out: list[np.ndarray] = []
    for _ in range(V.shape[0]):
        norms = np.linalg.norm(R, axis=0)
        j = int(np.argmax(norms))
        v = R[:, j] / norms[j]
        v = V.T @ (V @ v)  # stay exactly inside the span
        for u in out:
            v = v - (u @ v) * u
        v /= np.linalg.norm(v)
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            v = -v
        out.append(v)
        R = R - np.outer(v, v @ R)
    return out


def _p7_reference() -> np.ndarray:
    c2, c4, c6 = (math.cos(k * math.pi / 7) for k in (2, 4, 6))
    h = math.sqrt(7) / 2
    return np.array([[c4, c6, 0.5], [c6 - h, c2, 0.5], [c2, c4 - h, 0.5]])


def symmetry_matrix(p: int) -> SymmetryMatrix:
    """Symmetry matrix of order (p-1)/2 for the even prime family, with null space.

    Every null vector is validated by the exact coefficient symmetry test
    (:func:`symmetry_defect`) on the family it generates; p = 5 and p = 7
    are additionally checked against their closed forms.
    """
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise NotPrime(f"{p} is not a prime")
    p = int(p)
    if not 5 <= p <= 100:
        raise ValueError("p must satisfy 5 <= p <= 100")
    M = _raw_symmetry_matrix(p)
    _, sv, Vt = np.linalg.svd(M)
    rank = int(np.sum(sv > SVD_THRESHOLD))
    n = M.shape[0]
    basis = _canonical_basis(Vt[rank:]) if rank < n else []
    out = SymmetryMatrix(p, M, rank, n - rank, tuple(basis), sv)

    if p == 7 and not np.array_equal(M, _p7_reference()):
        if np.max(np.abs(M - _p7_reference())) > 1e-15:
            raise ConstructionUnvalidated("p = 7 matrix differs from its closed form")
    if p == 5:
        direction = np.array([1.0, GOLDEN]) / math.hypot(1.0, GOLDEN)
        if out.nullity != 1 or abs(abs(basis[0] @ direction) - 1) > 1e-12:
            raise ConstructionUnvalidated("p = 5 null space disagrees with the circle family")
        for eps, phi in ((0.3, 0.4), (2.0, 2.5)):
            if max(even5_residuals(*gamma_from_beta_even5(eps, phi))) > 1e-12:
                raise ConstructionUnvalidated("p = 5 perturbation violates the symmetry conditions")
    for X in basis:
        if np.linalg.norm(M @ X) > SVD_THRESHOLD:
            raise ConstructionUnvalidated(f"null vector residual too large for p = {p}")
        for eps, phi in ((0.37, 0.91), (1.7, 4.2)):
            c, _ = _prime_coeffs(p, eps, phi, X)
            probe = CombinationSpec(p, tuple(zip(range(1, p + 1), c)), prefactor=True)
            d = symmetry_defect(probe)
            if d > 1e-10:
                raise ConstructionUnvalidated(
                    f"family generated by a null vector of p = {p} is not symmetric (defect {d:.2e})"
                )
    return out


def build_psi_prime(p: int, eps: float, phi: float, X) -> CombinationSpec:
    """Even prime family with unit perturbation direction X in the null space."""
    sm = symmetry_matrix(p)
    X = np.asarray(X, dtype=float).ravel()
    if X.size != sm.order:
        raise ValueError(f"X must have {sm.order} components")
    nrm = np.linalg.norm(X)
    if abs(nrm - 1) > 1e-9:
        raise ValueError("X must have unit norm")
    res = np.linalg.norm(sm.entries @ X)
    if res > ADMISSION_TOL:
        raise NotInNullSpace(f"||M X|| = {res:.3g} exceeds {ADMISSION_TOL:g}")
    eps, phi = float(eps), float(phi)
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    c, _ = _prime_coeffs(sm.p, eps, phi, X)
    return CombinationSpec(sm.p, tuple(zip(range(1, sm.p + 1), c)), prefactor=True, family="PsiPrime",
                           params={"p": sm.p, "epsilon": eps, "phi": phi, "X": [float(x) for x in X]})


def with_flow_value(spec: CombinationSpec, value: float) -> CombinationSpec:
    """Same family with the flow parameter set to ``value``."""
    fam = spec.family
    if fam == "Hurwitz":
        return hurwitz_spec(value)
    if fam == "Psi5Odd":
        return build_psi5_odd(angle=value)
    if fam == "Psi5EvenCircle":
        return build_psi_even5_circle(value)
    if fam == "Psi5EvenPerturbed":
        return build_psi_even5(spec.params["epsilon"], value)
    if fam == "PsiPrime":
        return build_psi_prime(spec.params["p"], spec.params["epsilon"], value, spec.params["X"])
    raise NoFlowParameter("generic combinations carry no flow parameter")


# ---------------------------------------------------------------------------
# JSON


def spec_to_dict(spec: CombinationSpec) -> dict:
    params = {}
    for k, v in spec.params.items():
        if isinstance(v, complex):
            params[k] = {"re": v.real, "im": v.imag}
        elif isinstance(v, np.ndarray):
            params[k] = [float(x) for x in v]
        else:
            params[k] = v
    return {
        "modulus": spec.modulus,
        "prefactor": spec.prefactor,
        "terms": [{"l": l, "c_re": c.real, "c_im": c.imag} for l, c in spec.terms],
        "family": {"tag": spec.family, "params": params},
        **({"name": spec.name} if spec.name else {}),
    }


def spec_to_json(spec: CombinationSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2)


def spec_from_dict(d: dict) -> CombinationSpec:
    fam = d.get("family") or {"tag": "Generic", "params": {}}
    tag = fam.get("tag", "Generic")
    params = dict(fam.get("params") or {})
    if tag == "Hurwitz":
        return hurwitz_spec(params["alpha"])
    if tag == "Psi5Odd":
        if "angle" in params:
            return build_psi5_odd(angle=params["angle"])
        b = params["beta"]
        return build_psi5_odd(complex(b["re"], b["im"]) if isinstance(b, dict) else complex(b))
    if tag == "Psi5EvenCircle":
        return build_psi_even5_circle(params["theta"])
    if tag == "Psi5EvenPerturbed":
        return build_psi_even5(params["epsilon"], params["phi"])
    if tag == "PsiPrime":
        return build_psi_prime(int(params["p"]), params["epsilon"], params["phi"], params["X"])
    if tag != "Generic":
        raise ValueError(f"unknown family tag {tag!r}")
    terms = tuple((int(t["l"]), complex(t.get("c_re", 0.0), t.get("c_im", 0.0))) for t in d["terms"])
    return CombinationSpec(int(d["modulus"]), terms, prefactor=bool(d.get("prefactor", True)),
                           name=d.get("name", ""))


def spec_from_json(text: str) -> CombinationSpec:
    return spec_from_dict(json.loads(text))
