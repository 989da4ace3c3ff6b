"""A small wrapper giving every evaluable function the same vectorized jet interface."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .zeta import DEFAULT_TOL, hurwitz_jet

JetFn = Callable[[np.ndarray, int], np.ndarray]


@dataclass
class AnalyticFunction:
    """Function of s exposing ``jet(s_array, order) -> array (order+1, M)``.

    ``residue`` is the residue of a possible simple pole at s = 1
    (0 when the function is regular there, None when unknown).
    ``pole_free`` optionally evaluates (s-1)*f(s) stably near s = 1.
    """

    jet: JetFn
    name: str = "f"
    residue: complex | None = 0
    pole_free: JetFn | None = None

    def __call__(self, s: complex) -> complex:
        return complex(self.jet(np.array([complex(s)]), 0)[0, 0])

    def derivative(self, s: complex) -> complex:
        return complex(self.jet(np.array([complex(s)]), 1)[1, 0])

    def values(self, s: np.ndarray, order: int = 0) -> np.ndarray:
        return self.jet(np.asarray(s, dtype=complex).ravel(), order)

    def times_pole(self) -> "AnalyticFunction":
        """(s-1)*f(s), with the pole at 1 removed."""
        if self.pole_free is not None:
            jet = self.pole_free
        else:
            base = self.jet

            def jet(s, order):
                v = base(s, order)
                out = (s - 1) * v
                if order >= 1:
                    out[1:] += np.arange(1, order + 1)[:, None] * v[:-1]
                return out

        return AnalyticFunction(jet, f"(s-1)*{self.name}", residue=0)


def hurwitz_function(alpha: float, tol: float = DEFAULT_TOL) -> AnalyticFunction:
    def jet(s, order):
        return hurwitz_jet(s, alpha, order, tol)[0]

    def pole_free(s, order):
        return hurwitz_jet(s, alpha, order, tol, "times_pole")[0]

    return AnalyticFunction(jet, f"hurwitz(alpha={alpha:.15g})", residue=1.0, pole_free=pole_free)


def from_callable(f: Callable[[complex], complex], df: Callable[[complex], complex] | None = None,
                  name: str = "f", residue: complex | None = None) -> AnalyticFunction:
    """Wrap a scalar callable; derivatives fall back to central differences."""

    def jet(s, order):
        s = np.asarray(s, dtype=complex).ravel()
        out = np.empty((order + 1, s.size), dtype=complex)
        for i, si in enumerate(s):
            out[0, i] = f(si)
            if order >= 1:
                if df is not None:
                    out[1, i] = df(si)
                else:
                    h = 1e-6 * max(1.0, abs(si))
                    out[1, i] = (f(si + h) - f(si - h)) / (2 * h)
            if order >= 2:
                h = 1e-4 * max(1.0, abs(si))
                g = df if df is not None else (lambda x: (f(x + 1e-6) - f(x - 1e-6)) / 2e-6)
                out[2, i] = (g(si + h) - g(si - h)) / (2 * h)
        return out

    return AnalyticFunction(jet, name, residue=residue)


def polynomial_function(coeffs, name: str = "poly") -> AnalyticFunction:
    """Polynomial with coefficients highest degree first (numpy.polyval order)."""
    p = np.poly1d(np.asarray(coeffs, dtype=complex))
    derivs = [p, p.deriv(1), p.deriv(2)]

    def jet(s, order):
        s = np.asarray(s, dtype=complex).ravel()
        return np.array([derivs[j](s) for j in range(order + 1)])

    return AnalyticFunction(jet, name, residue=0)


def as_analytic(f) -> AnalyticFunction:
    if isinstance(f, AnalyticFunction):
        return f
    # late import: families depends on this module
    from .families import CombinationSpec, combination_function

    if isinstance(f, CombinationSpec):
        return combination_function(f)
    if callable(f):
        return from_callable(f)
    raise TypeError(f"cannot evaluate object of type {type(f).__name__}")
