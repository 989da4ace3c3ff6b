"""Hurwitz zeta function, its derivatives, and Dirichlet characters of prime modulus.

The evaluator is Euler-Maclaurin summation

    zeta(s, a) = sum_{n<N} (n+a)^-s + (N+a)^(1-s)/(s-1) + (N+a)^-s / 2
                 + sum_{k=1}^{K} B_2k/(2k)! * (s)_{2k-1} * (N+a)^(-s-2k+1) + R_K

vectorized over arrays of points.  Derivatives in ``s`` are obtained by
differentiating every term analytically (value, first and second derivative are
carried together as a "jet").  The remainder bound

    |R_K| <= |B_2K|/(2K)! * |(s)_2K| * (N+a)^(1-sigma-2K) / (sigma+2K-1)

(and its analogues for the derivatives) selects K per point and drives N.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import NotPrime, PoleAtOne, ToleranceUnreachable

DEFAULT_TOL = 1e-12
POLE_RADIUS = 1e-6
ALPHA_MIN = 1e-10
K_MAX = 15
N_CAP = 400_000
_EPS = np.finfo(float).eps
# Precision-collapse guard: relative rounding estimate above this raises.
_ROUNDING_LIMIT = 1e-6
# Batches up to this size go through the pure-Python path (lower overhead).
_SCALAR_BATCH = 24
# beyond these the series needs more terms than double precision can carry
SIGMA_FLOOR = -50.0
T_CEILING = 1e6


@dataclass(frozen=True)
class EvalResult:
    value: complex
    est_abs_error: float

    def __iter__(self):
        yield self.value
        yield self.est_abs_error


@lru_cache(maxsize=None)
def _bernoulli_even_over_factorial(kmax: int) -> np.ndarray:
    """B_{2k}/(2k)! for k = 1..kmax as floats (index 0 is k=1)."""
    nmax = 2 * kmax
    B = [Fraction(1)]
    for m in range(1, nmax + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * B[k]
            binom = binom * (m + 1 - k) // (k + 1)
        B.append(-acc / (m + 1))
    out = np.empty(kmax)
    fact = 1
    for k in range(1, kmax + 1):
        fact *= (2 * k - 1) * (2 * k)
        out[k - 1] = float(B[2 * k] / fact)
    return out


def _jmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of two jets (rows = derivative orders)."""
    z = np.empty(np.broadcast_shapes(x.shape, y.shape), dtype=complex)
    z[0] = x[0] * y[0]
    if len(z) > 1:
        z[1] = x[1] * y[0] + x[0] * y[1]
    if len(z) > 2:
        z[2] = x[2] * y[0] + 2 * x[1] * y[1] + x[0] * y[2]
    return z


def _exp_jet(base: np.ndarray, L: np.ndarray, order: int) -> np.ndarray:
    """Jet of base * exp(-s*L) in s, given its value ``base``."""
    rows = [base]
    if order >= 1:
        rows.append(-L * base)
    if order >= 2:
        rows.append(L * L * base)
    return np.array(rows)


def _linear_jet(v: np.ndarray, order: int) -> np.ndarray:
    """Jet of s + c, given its value."""
    rows = [v]
    if order >= 1:
        rows.append(np.ones_like(v))
    if order >= 2:
        rows.append(np.zeros_like(v))
    return np.array(rows)


def _pole_free_tail(z: np.ndarray, L: np.ndarray, X: np.ndarray, order: int) -> np.ndarray:
    """Jet of ((N+a)^(1-s) - 1)/(s-1) with z = s-1, stable near z = 0."""
    out = np.empty((order + 1, z.size), dtype=complex)
    small = np.abs(z * L) < 0.5
    if np.any(small):
        zs, Ls = z[small], L[small]
        acc = np.zeros((order + 1, zs.size), dtype=complex)
        mL = -Ls
        for n in range(1, 40):
            c = mL**n / math.factorial(n)
            acc[0] += c * zs ** (n - 1)
            if order >= 1 and n >= 2:
                acc[1] += c * (n - 1) * zs ** (n - 2)
            if order >= 2 and n >= 3:
                acc[2] += c * (n - 1) * (n - 2) * zs ** (n - 3)
        out[:, small] = acc
    big = ~small
    if np.any(big):
        zb, Lb = z[big], L[big]
        e = np.exp(-zb * Lb)  # (N+a)^(1-s)
        num = _exp_jet(e, Lb, order)
        num[0] = e - 1.0
        inv = 1.0 / zb
        invj = np.array([inv, -inv**2, 2 * inv**3][: order + 1])
        out[:, big] = _jmul(num, invj)
    return out


def hurwitz_jet(s, alpha, order: int = 0, tol: float = DEFAULT_TOL, mode: str = "plain"):
    """Vectorized Hurwitz zeta with s-derivatives.

    Parameters
    ----------
    s, alpha : array_like
        Broadcast together.  ``alpha`` may be complex with positive real part
        (used internally for regularized parameter flows).
    order : int
        Highest s-derivative returned (0, 1 or 2).
    mode : {"plain", "times_pole", "minus_pole"}
        ``times_pole`` returns (s-1)*zeta(s, a) and ``minus_pole`` returns
        zeta(s, a) - 1/(s-1); both are entire.

    Returns
    -------
    jets : ndarray, shape (order+1, *shape)
    errs : ndarray, shape (order+1, *shape)
        Estimated absolute error (truncation bound + rounding estimate).
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if mode not in ("plain", "times_pole", "minus_pole"):
        raise ValueError(f"unknown mode {mode!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    s_arr, a_arr = np.broadcast_arrays(np.asarray(s, dtype=complex), np.asarray(alpha, dtype=complex))
    shape = s_arr.shape
    s_flat = s_arr.ravel().copy()
    a_flat = a_arr.ravel().copy()
    if s_flat.size == 0:
        return np.zeros((order + 1,) + shape, complex), np.zeros((order + 1,) + shape)
    if not (np.all(np.isfinite(s_flat)) and np.all(np.isfinite(a_flat))):
        raise ValueError("non-finite argument")
    if np.any(a_flat.real <= 0):
        raise ValueError("alpha must have positive real part")
    if mode == "plain" and np.any(np.abs(s_flat - 1) < POLE_RADIUS):
        raise PoleAtOne("s is within the pole-exclusion radius of 1")
    if np.any(s_flat.real < SIGMA_FLOOR) or np.any(np.abs(s_flat.imag) > T_CEILING):
        raise ToleranceUnreachable("argument outside the range reachable in double precision")
    with np.errstate(over="ignore", invalid="ignore"):
        return _hurwitz_jet(s_flat, a_flat, shape, order, tol, mode)


def _hurwitz_jet(s_flat, a_flat, shape, order, tol, mode):

    if s_flat.size <= _SCALAR_BATCH:
        jets = np.empty((order + 1, s_flat.size), dtype=complex)
        errs = np.empty((order + 1, s_flat.size))
        for i in range(s_flat.size):
            jets[:, i], errs[:, i] = _em_scalar(complex(s_flat[i]), complex(a_flat[i]), order, tol, mode)
        return jets.reshape((order + 1,) + shape), errs.reshape((order + 1,) + shape)

    kmax = _kmax_for(float(s_flat.real.min()))
    N = np.maximum(10, np.ceil(np.abs(s_flat.imag) / math.pi)).astype(np.int64)
    jets = np.empty((order + 1, s_flat.size), dtype=complex)
    errs = np.empty((order + 1, s_flat.size))
    todo = np.arange(s_flat.size)
    while todo.size:
        if N[todo].max() > N_CAP:
            raise ToleranceUnreachable(
                f"Euler-Maclaurin tail bound cannot reach tol={tol:g} (N > {N_CAP})"
            )
        j_, e_, ok = _em_fixed_n(s_flat[todo], a_flat[todo], N[todo], kmax, order, tol, mode)
        jets[:, todo[ok]] = j_[:, ok]
        errs[:, todo[ok]] = e_[:, ok]
        todo = todo[~ok]
        N[todo] = np.ceil(N[todo] * 1.5).astype(np.int64)
    if not np.all(np.isfinite(jets)):
        raise ToleranceUnreachable("overflow in Hurwitz zeta evaluation")
    scale = np.maximum(1.0, np.abs(jets))
    if np.any(errs > _ROUNDING_LIMIT * scale):
        raise ToleranceUnreachable("loss of precision: rounding error exceeds 1e-6 relative")
    return jets.reshape((order + 1,) + shape), errs.reshape((order + 1,) + shape)


def _em_fixed_n(s, a, N, kmax, order, tol, mode):
    """Vectorized Euler-Maclaurin with per-point cutoffs N; returns (jets, errs, ok)."""
    M = s.size
    n = np.arange(int(N.max()), dtype=float)
    la = np.log(n[None, :] + a[:, None])  # (M, Nmax)
    terms = np.where(n[None, :] < N[:, None], np.exp(-s[:, None] * la), 0.0)
    absterms = np.abs(terms)
    rows = [terms.sum(axis=1)]
    rnd = [absterms.sum(axis=1)]
    lpow = np.ones_like(la)
    for _ in range(order):
        lpow = lpow * (-la)
        rows.append((terms * lpow).sum(axis=1))
        rnd.append((absterms * np.abs(lpow)).sum(axis=1))
    direct = np.array(rows)
    round_mag = np.array(rnd)

    X = N + a
    L = np.log(X)
    Xs = np.exp(-s * L)  # (N+a)^-s
    half = _exp_jet(0.5 * Xs, L, order)
    body = direct + half

    # Bernoulli correction terms, all K at once along axis 0.
    b = _bernoulli_even_over_factorial(kmax)
    sj = _linear_jet(s, order)
    P = sj.copy()  # prod_{j=0}^{2k-2} (s+j), starts at k=1
    Tk = np.empty((kmax, order + 1, M), dtype=complex)
    bound = np.empty((kmax, order + 1, M))
    sig = s.real
    lnX = np.abs(L)
    for k in range(1, kmax + 1):
        Xk = _exp_jet(Xs * np.exp((1 - 2 * k) * L), L, order)
        Tk[k - 1] = b[k - 1] * _jmul(P, Xk)
        poch = _jmul(P, _linear_jet(s + (2 * k - 1), order))  # (s)_{2k}
        c = sig + 2 * k - 1
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            Xc = np.exp(-c * L.real)
            I0 = Xc / c
            ab = abs(b[k - 1])
            bound[k - 1, 0] = ab * np.abs(poch[0]) * I0
            if order >= 1:
                I1 = Xc * (lnX / c + 1 / c**2)
                bound[k - 1, 1] = ab * (np.abs(poch[1]) * I0 + np.abs(poch[0]) * I1)
            if order >= 2:
                I2 = Xc * (lnX**2 / c + 2 * lnX / c**2 + 2 / c**3)
                bound[k - 1, 2] = ab * (
                    np.abs(poch[2]) * I0 + 2 * np.abs(poch[1]) * I1 + np.abs(poch[0]) * I2
                )
        bound[k - 1][:, c <= 0] = np.inf
        P = _jmul(poch, _linear_jet(s + 2 * k, order))

    partial = np.cumsum(Tk, axis=0)
    tail_mag = np.cumsum(np.abs(Tk), axis=0)

    if mode == "plain":
        inv = 1.0 / (s - 1)
        invj = np.array([inv, -inv**2, 2 * inv**3][: order + 1])
        A = _jmul(_exp_jet(X * Xs, L, order), invj)
        vals = body[None] + A[None] + partial
        fixed_mag = round_mag + np.abs(A) + np.abs(half)
    elif mode == "minus_pole":
        q = _pole_free_tail(s - 1, L, X, order)
        vals = body[None] + q[None] + partial
        fixed_mag = round_mag + np.abs(q) + np.abs(half)
    else:
        zj = _linear_jet(s - 1, order)
        e = _exp_jet(X * Xs, L, order)
        vals = np.array([_jmul(zj, body + partial[k]) for k in range(kmax)]) + e[None]
        # d^j[(s-1) R] is bounded by |s-1| * bound_j + j * bound_{j-1}
        zb = np.abs(s - 1)
        nb = bound * zb[None, None, :]
        nb[:, 1:] += np.arange(1, order + 1)[None, :, None] * bound[:, :-1]
        bound = nb
        fixed_mag = (round_mag + np.abs(half)) * np.maximum(1.0, zb) + np.abs(e)

    target = tol * np.maximum(1.0, np.abs(vals))
    ok = np.all(bound <= target, axis=1)  # (kmax, M)
    kidx = np.argmax(ok, axis=0)
    cols = np.arange(M)
    jets = vals[kidx, :, cols].T
    trunc = bound[kidx, :, cols].T
    mag = fixed_mag + tail_mag[kidx, :, cols].T
    grow = 8.0 + 2.0 * np.abs(s) * np.log(N + np.abs(a) + 1.0)
    errs = trunc + _EPS * grow[None, :] * mag
    return jets, errs, ok.any(axis=0)


def _kmax_for(sig: float) -> int:
    if sig + 2 * K_MAX - 1 < 2:
        return int(math.ceil((3 - sig) / 2)) + 10
    return K_MAX


@lru_cache(maxsize=4096)
def _logs(a: complex, N: int):
    """log(n+a) for n < N with |.| and squared-modulus companions."""
    n = np.arange(N, dtype=float)
    la = np.log(n + a.real) if a.imag == 0.0 else np.log(n + a)
    absla = np.abs(la)
    return la, la * la, absla, absla * absla


def _initial_cutoff(s: complex, a: complex, kmax: int, tol: float) -> int:
    """Smallest N (on a 1.25x ladder) whose K = kmax remainder bound meets tol."""
    N = max(10, int(math.ceil(abs(s.imag) / math.pi)))
    K = kmax
    c = s.real + 2 * K - 1
    if c <= 0:
        return N
    lp = sum(math.log(abs(s + j)) if s + j != 0 else -745.0 for j in range(2 * K))
    lb = math.log(abs(_bernoulli_even_over_factorial(kmax)[K - 1])) + lp - math.log(c)
    # growth of |zeta| left of the critical line, from the functional equation
    ltol = math.log(tol) + max(0.0, (0.5 - s.real) * math.log(max(abs(s.imag), 2 * math.pi) / (2 * math.pi)))
    for _ in range(60):
        if lb - c * math.log(N + a.real) <= ltol:
            return N
        N = int(math.ceil(N * 1.25))
    return N


def _jmul_list(x, y):
    out = [x[0] * y[0]]
    if len(x) > 1:
        out.append(x[1] * y[0] + x[0] * y[1])
    if len(x) > 2:
        out.append(x[2] * y[0] + 2 * x[1] * y[1] + x[0] * y[2])
    return out


def _em_scalar(s: complex, a: complex, order: int, tol: float, mode: str):
    """Single-point Euler-Maclaurin; same formulas as the vectorized path."""
    kmax = _kmax_for(s.real)
    N = _initial_cutoff(s, a, kmax, tol)
    while True:
        out = _em_scalar_n(s, a, N, kmax, order, tol, mode)
        if out is not None:
            jets, errs = out
            break
        N = int(math.ceil(N * 1.5))
        if N > N_CAP:
            raise ToleranceUnreachable(
                f"Euler-Maclaurin tail bound cannot reach tol={tol:g} (N > {N_CAP})"
            )
    for j in range(order + 1):
        v = jets[j]
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ToleranceUnreachable("overflow in Hurwitz zeta evaluation")
        if errs[j] > _ROUNDING_LIMIT * max(1.0, abs(v)):
            raise ToleranceUnreachable("loss of precision: rounding error exceeds 1e-6 relative")
    return jets, errs


def _em_scalar_n(s, a, N, kmax, order, tol, mode):
    exp = cmath.exp
    la, la2, absla, absla2 = _logs(a, N)
    terms = np.exp(-s * la)
    at = np.abs(terms)
    d = [complex(terms.sum())]
    mag = [float(at.sum())]
    if order >= 1:
        d.append(-complex(terms @ la))
        mag.append(float(at @ absla))
    if order >= 2:
        d.append(complex(terms @ la2))
        mag.append(float(at @ absla2))
    X = N + a
    L = cmath.log(X)
    Xs = exp(-s * L)
    Lp = [1.0, -L, L * L]
    half = [0.5 * Xs * Lp[j] for j in range(order + 1)]
    body = [d[j] + half[j] for j in range(order + 1)]
    fixed = [mag[j] + abs(half[j]) for j in range(order + 1)]
    z = s - 1
    if mode == "plain":
        inv = 1.0 / z
        A = _jmul_list([X * Xs * Lp[j] for j in range(order + 1)], [inv, -inv * inv, 2 * inv**3][: order + 1])
        base = [body[j] + A[j] for j in range(order + 1)]
        fixed = [fixed[j] + abs(A[j]) for j in range(order + 1)]
    elif mode == "minus_pole":
        q = _pole_free_tail(np.array([z]), np.array([L]), np.array([X]), order)[:, 0]
        base = [body[j] + complex(q[j]) for j in range(order + 1)]
        fixed = [fixed[j] + abs(q[j]) for j in range(order + 1)]
    else:
        e = [X * Xs * Lp[j] for j in range(order + 1)]
        zb = abs(z)
        fixed = [fixed[j] * max(1.0, zb) + abs(e[j]) for j in range(order + 1)]

    b = _bernoulli_even_over_factorial(kmax)
    sig = s.real
    lnX = abs(L)
    Lr = L.real
    P = [s, 1.0, 0.0][: order + 1]
    acc = [0j] * (order + 1)
    tail = [0.0] * (order + 1)
    grow = 8.0 + 2.0 * abs(s) * math.log(N + abs(a) + 1.0)
    for k in range(1, kmax + 1):
        Xk = Xs * exp((1 - 2 * k) * L)
        T = _jmul_list(P, [Xk * Lp[j] for j in range(order + 1)])
        bk = b[k - 1]
        for j in range(order + 1):
            acc[j] += bk * T[j]
            tail[j] += abs(bk * T[j])
        poch = _jmul_list(P, [s + (2 * k - 1), 1.0, 0.0][: order + 1])
        c = sig + 2 * k - 1
        if c > 0:
            Xc = math.exp(-c * Lr)
            ab = abs(bk)
            I0 = Xc / c
            bound = [ab * abs(poch[0]) * I0]
            if order >= 1:
                I1 = Xc * (lnX / c + 1 / c**2)
                bound.append(ab * (abs(poch[1]) * I0 + abs(poch[0]) * I1))
            if order >= 2:
                I2 = Xc * (lnX**2 / c + 2 * lnX / c**2 + 2 / c**3)
                bound.append(ab * (abs(poch[2]) * I0 + 2 * abs(poch[1]) * I1 + abs(poch[0]) * I2))
            if mode == "times_pole":
                zj = [z, 1.0, 0.0][: order + 1]
                vals = _jmul_list(zj, [body[j] + acc[j] for j in range(order + 1)])
                vals = [vals[j] + e[j] for j in range(order + 1)]
                nb = [bound[0] * zb]
                for j in range(1, order + 1):
                    nb.append(bound[j] * zb + j * bound[j - 1])
                bound = nb
            else:
                vals = [base[j] + acc[j] for j in range(order + 1)]
            if all(bound[j] <= tol * max(1.0, abs(vals[j])) for j in range(order + 1)):
                errs = [bound[j] + _EPS * grow * (fixed[j] + tail[j]) for j in range(order + 1)]
                return vals, errs
        P = _jmul_list(poch, [s + 2 * k, 1.0, 0.0][: order + 1])
    return None


def _validate(s, alpha, tol, allow_pole=False):
    s = complex(s)
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise ValueError("s must be finite")
    if isinstance(alpha, complex):
        raise ValueError("alpha must be real")
    alpha = float(alpha)
    if not (ALPHA_MIN <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [{ALPHA_MIN:g}, 1], got {alpha!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not allow_pole and abs(s - 1) < POLE_RADIUS:
        raise PoleAtOne(f"s = {s} is within {POLE_RADIUS:g} of the pole at 1")
    return s, alpha


def hurwitz_zeta(s: complex, alpha: float, tol: float = DEFAULT_TOL, *, regularized: bool = False) -> EvalResult:
    """zeta(s, alpha) continued to the whole plane minus s = 1.

    With ``regularized=True`` the entire function (s-1)*zeta(s, alpha) is
    returned instead, which is also valid at and near s = 1.

    >>> round(hurwitz_zeta(0, 0.3).value.real, 12)
    0.2
    """
    s, alpha = _validate(s, alpha, tol, allow_pole=regularized)
    mode = "times_pole" if regularized else "plain"
    jets, errs = hurwitz_jet(s, alpha, 0, tol, mode)
    return EvalResult(complex(jets[0]), float(errs[0]))


def hurwitz_zeta_s_derivative(s: complex, alpha: float, tol: float = DEFAULT_TOL) -> EvalResult:
    s, alpha = _validate(s, alpha, tol)
    jets, errs = hurwitz_jet(s, alpha, 1, tol)
    return EvalResult(complex(jets[1]), float(errs[1]))


def hurwitz_zeta_alpha_derivative(s: complex, alpha: float, tol: float = DEFAULT_TOL) -> EvalResult:
    """d zeta(s, alpha)/d alpha = -s * zeta(s+1, alpha).

    Evaluated as -(u-1)*zeta(u, alpha) at u = s+1.  The product has a 0*inf
    form at s = 0, which is excluded like the pole itself.
    """
    s, alpha = _validate(s, alpha, tol, allow_pole=True)
    if abs(s) < POLE_RADIUS:
        raise PoleAtOne(f"s = {s} is within {POLE_RADIUS:g} of 0, where s+1 hits the pole")
    jets, errs = hurwitz_jet(s + 1, alpha, 0, tol, "times_pole")
    return EvalResult(-complex(jets[0]), float(errs[0]))


def riemann_zeta(s: complex, tol: float = DEFAULT_TOL) -> EvalResult:
    return hurwitz_zeta(s, 1.0, tol)


# ---------------------------------------------------------------- characters


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    return [p for p in range(max(lo, 2), hi + 1) if is_prime(p)]


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(p: int) -> int:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        return 1
    qs = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def _unit_root(num: int, den: int) -> complex:
    """exp(2*pi*i*num/den) with exact values at multiples of quarter turns."""
    num %= den
    if (4 * num) % den == 0:
        return (1, 1j, -1, -1j)[4 * num // den]
    ang = 2 * math.pi * num / den
    return complex(math.cos(ang), math.sin(ang))


@dataclass(frozen=True)
class CharacterTable:
    """All Dirichlet characters modulo a prime.

    ``characters[j][l-1]`` is chi_j(l) for l = 1..modulus; index 0 is the
    principal character.  ``parity[j]`` is "even" or "odd".
    """

    modulus: int
    generator: int
    characters: tuple[tuple[complex, ...], ...]
    parity: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.characters)

    def __getitem__(self, j: int) -> tuple[complex, ...]:
        return self.characters[j]

    def value(self, j: int, l: int) -> complex:
        return self.characters[j][(l - 1) % self.modulus]

    def odd(self) -> list[int]:
        return [j for j, par in enumerate(self.parity) if par == "odd"]

    def even(self) -> list[int]:
        return [j for j, par in enumerate(self.parity) if par == "even"]


def dirichlet_characters(p: int) -> CharacterTable:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)) or p < 3:
        raise NotPrime(f"modulus must be a prime >= 3, got {p!r}")
    p = int(p)
    if p > 1000:
        raise ValueError("modulus above 1000 is not supported")
    g = primitive_root(p)
    order = p - 1
    index = {}
    x = 1
    for k in range(order):
        index[x] = k
        x = x * g % p
    chars, parity = [], []
    for j in range(order):
        row = tuple(_unit_root(j * index[l], order) if l % p else 0j for l in range(1, p + 1))
        chars.append(row)
        parity.append("odd" if j % 2 else "even")
    return CharacterTable(p, g, tuple(chars), tuple(parity))
