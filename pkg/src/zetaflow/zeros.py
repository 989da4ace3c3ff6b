"""Zero location by the argument principle, Newton refinement and zero counting.

The scanner accumulates arg f along rectangle boundaries with adaptive
sampling, caches the phase change of every edge it has seen (so that the
shared edges of subdivided cells are evaluated once), and bisects until each
cell holds a single zero, which Newton's method then refines.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .analytic import AnalyticFunction, as_analytic
from .errors import BoundaryZero, NewtonDiverged, PoleAtOne, PoleInside, ZetaflowError

INITIAL_SAMPLES = 64
MAX_SAMPLES = 2**16
MAX_NUDGES = 5
NUDGE_STEP = 1e-4
MULTIPLE_DIAMETER = 1e-6
RESIDUAL_MAX = 1e-8

# split positions (fractions of the cell width); slightly off-centre so that
# split lines avoid exact symmetry lines such as sigma = 1/2
_SPLIT_FRACTIONS = (0.4621, 0.5379, 0.4137, 0.5863, 0.3571)


@dataclass(frozen=True)
class Rectangle:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        vals = (self.sigma_min, self.sigma_max, self.t_min, self.t_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle bounds must be finite")
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError("need sigma_min < sigma_max and t_min < t_max")

    @property
    def width(self) -> float:
        return self.sigma_max - self.sigma_min

    @property
    def height(self) -> float:
        return self.t_max - self.t_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex((self.sigma_min + self.sigma_max) / 2, (self.t_min + self.t_max) / 2)

    def corners(self) -> tuple[complex, complex, complex, complex]:
        """Counter-clockwise from the lower-left corner."""
        return (
            complex(self.sigma_min, self.t_min),
            complex(self.sigma_max, self.t_min),
            complex(self.sigma_max, self.t_max),
            complex(self.sigma_min, self.t_max),
        )

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.sigma_min - margin <= z.real <= self.sigma_max + margin
                and self.t_min - margin <= z.imag <= self.t_max + margin)

    def distance_to(self, z: complex) -> float:
        dx = max(self.sigma_min - z.real, 0.0, z.real - self.sigma_max)
        dy = max(self.t_min - z.imag, 0.0, z.imag - self.t_max)
        return math.hypot(dx, dy)

    def grow(self, d: float) -> "Rectangle":
        return Rectangle(self.sigma_min - d, self.sigma_max + d, self.t_min - d, self.t_max + d)

    def split(self, frac: float) -> tuple["Rectangle", "Rectangle"]:
        """Cut across the longer side at the given fraction."""
        if self.width >= self.height:
            x = self.sigma_min + frac * self.width
            return (Rectangle(self.sigma_min, x, self.t_min, self.t_max),
                    Rectangle(x, self.sigma_max, self.t_min, self.t_max))
        y = self.t_min + frac * self.height
        return (Rectangle(self.sigma_min, self.sigma_max, self.t_min, y),
                Rectangle(self.sigma_min, self.sigma_max, y, self.t_max))


@dataclass(frozen=True)
class ZeroRecord:
    location: complex
    multiplicity: int
    residual: float
    function_id: str = "f"

    @property
    def sigma(self) -> float:
        return self.location.real

    @property
    def t(self) -> float:
        return self.location.imag


@dataclass(frozen=True)
class CountComparison:
    T: float
    alpha: float
    predicted: float
    actual: int
    deviation: float
    window: Rectangle | None = None
    zeros: tuple[ZeroRecord, ...] = field(default=(), repr=False)


@dataclass
class ScanResult:
    """Details of a scan: the rectangle actually used and whether (s-1) f replaced f."""

    rect: Rectangle
    winding: int
    pole_substituted: bool
    nudges: int


# ---------------------------------------------------------------------------
# phase accumulation


class _Scanner:
    def __init__(self, f: AnalyticFunction):
        self.f = f
        self._cache: dict[tuple[complex, complex], float] = {}

    def _eval(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        try:
            jets = self.f.values(z, 1)
        except PoleAtOne as exc:
            raise BoundaryZero("boundary passes through the pole at s = 1") from exc
        return jets[0], jets[1]

    def edge_phase(self, a: complex, b: complex) -> float:
        if (a.real, a.imag) <= (b.real, b.imag):
            key, sign = (a, b), 1.0
        else:
            key, sign = (b, a), -1.0
        if key not in self._cache:
            self._cache[key] = self._compute(*key)
        return sign * self._cache[key]

    def _compute(self, a: complex, b: complex) -> float:
        length = abs(b - a)
        ts = np.linspace(0.0, 1.0, INITIAL_SAMPLES + 1)
        v, dv = self._eval(a + (b - a) * ts)
        while True:
            if np.any(v == 0) or not np.all(np.isfinite(v)):
                raise BoundaryZero("function vanishes or overflows on the boundary")
            dphi = np.angle(v[1:] / v[:-1])
            logder = np.abs(dv / v)
            est = length * np.diff(ts) * 0.5 * (logder[1:] + logder[:-1])
            bad = (np.abs(dphi) >= math.pi / 2) | (est > 1.0)
            if not bad.any():
                return float(dphi.sum())
            idx = np.flatnonzero(bad)
            if ts.size + idx.size > MAX_SAMPLES:
                raise BoundaryZero("phase sampling exceeded the per-edge cap")
            if np.min(np.diff(ts)[idx]) * length < 1e-11 * max(1.0, length):
                raise BoundaryZero("a zero lies on or extremely close to the boundary")
            mids = 0.5 * (ts[idx] + ts[idx + 1])
            mv, mdv = self._eval(a + (b - a) * mids)
            ts = np.insert(ts, idx + 1, mids)
            v = np.insert(v, idx + 1, mv)
            dv = np.insert(dv, idx + 1, mdv)

    def winding(self, rect: Rectangle) -> int:
        c = rect.corners()
        total = sum(self.edge_phase(c[i], c[(i + 1) % 4]) for i in range(4))
        w = total / (2 * math.pi)
        n = round(w)
        if abs(w - n) > 0.05:
            raise BoundaryZero(f"non-integral winding {w:.4f}")
        return int(n)


def _prepare(f, rect: Rectangle) -> tuple[AnalyticFunction, bool]:
    """Replace f by (s-1) f when the pole at s = 1 is inside or near the rectangle."""
    f = as_analytic(f)
    near = rect.distance_to(1.0) <= 0.01
    if not near:
        return f, False
    residue = f.residue
    if residue is None:
        residue = _residue_probe(f)
    if residue == 0 or abs(residue) == 0:
        return f, False
    return f.times_pole(), True


def _residue_probe(f: AnalyticFunction, r: float = 1e-3, n: int = 32) -> complex:
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = f.values(1 + r * w, 0)[0]
    res = complex(np.mean(vals * r * w))
    scale = float(np.max(np.abs(vals))) * r
    return res if abs(res) > 1e-8 * max(1.0, scale) else 0


def _nudged(f: AnalyticFunction, rect: Rectangle, action):
    """Run ``action(scanner, rect)``, growing the rectangle on boundary collisions."""
    last: Exception | None = None
    for k in range(MAX_NUDGES + 1):
        scanner = _Scanner(f)
        try:
            return action(scanner, rect), rect, k
        except BoundaryZero as exc:
            last = exc
            rect = rect.grow(NUDGE_STEP * (1 + k))
    raise BoundaryZero(f"boundary collision persists after {MAX_NUDGES} nudges: {last}")


def winding_number(f, rect: Rectangle, *, allow_pole: bool = True, details: bool = False):
    """Number of zeros (with multiplicity) of f inside ``rect``.

    If the pole of a zeta-type function at s = 1 lies in (or within 0.01 of)
    the rectangle, (s-1) f is used instead when ``allow_pole`` is true;
    otherwise PoleInside is raised.
    """
    g, substituted = _prepare(f, rect)
    if substituted and not allow_pole:
        raise PoleInside("the pole at s = 1 lies in the rectangle")
    w, used, k = _nudged(g, rect, lambda sc, r: sc.winding(r))
    if details:
        return ScanResult(used, w, substituted, k)
    return w


# ---------------------------------------------------------------------------
# Newton refinement


def newton_refine(f, z0: complex, *, max_iter: int = 50, step_tol: float = 1e-13,
                  function_id: str | None = None) -> ZeroRecord:
    """Refine a simple zero from ``z0`` by Newton's method."""
    f = as_analytic(f)
    z = complex(z0)
    try:
        v, d = f.values(np.array([z]), 1)[:, 0]
    except (ZetaflowError, ValueError, OverflowError) as exc:
        raise NewtonDiverged(f"cannot evaluate at start point: {exc}") from exc
    if not abs(d) > 1e-12:
        raise NewtonDiverged("derivative vanishes at the start point (multiple zero?)")
    prev = math.inf
    converged = False
    for _ in range(max_iter):
        if d == 0 or not np.isfinite(d):
            raise NewtonDiverged("zero derivative during iteration")
        dz = v / d
        z -= dz
        if not (np.isfinite(z.real) and np.isfinite(z.imag)) or abs(dz) > 1e6:
            raise NewtonDiverged("iteration diverged")
        try:
            v, d = f.values(np.array([z]), 1)[:, 0]
        except (ZetaflowError, ValueError, OverflowError) as exc:
            raise NewtonDiverged(f"evaluation failed during iteration: {exc}") from exc
        a = abs(dz)
        if a < step_tol or (a < 1e-11 * max(1.0, abs(z)) and a >= 0.5 * prev):
            converged = True
            break
        prev = a
    residual = abs(v)
    if not converged and not (residual <= RESIDUAL_MAX and abs(v / d) <= 1e-12 * max(1.0, abs(z))):
        raise NewtonDiverged(f"no convergence after {max_iter} iterations (|f|={residual:.3g})")
    if residual > RESIDUAL_MAX:
        raise NewtonDiverged(f"converged point has residual {residual:.3g} > {RESIDUAL_MAX:g}")
    return ZeroRecord(complex(z), 1, float(residual), function_id or f.name)


# ---------------------------------------------------------------------------
# subdivision


def _cell_zeros(scanner: _Scanner, f: AnalyticFunction, rect: Rectangle, total: int, fid: str):
    records: list[ZeroRecord] = []
    unresolved: list[Rectangle] = []
    stack = [(rect, total)]
    while stack:
        cell, w = stack.pop()
        if w == 0:
            continue
        if w < 0:
            unresolved.append(cell)
            continue
        if w == 1:
            try:
                rec = newton_refine(f, cell.center, function_id=fid)
                if cell.contains(rec.location, margin=1e-12 * max(1.0, abs(rec.location))):
                    records.append(rec)
                    continue
            except NewtonDiverged:
                pass
        if cell.diameter < MULTIPLE_DIAMETER:
            z = _multiple_location(f, cell) if w == 2 else cell.center
            v, d = f.values(np.array([z]), 1)[:, 0]
            if w >= 2 and (abs(d) < 1e-6 or cell.diameter < 1e-10):
                if abs(v) <= RESIDUAL_MAX:
                    records.append(ZeroRecord(z, w, float(abs(v)), fid))
                    continue
            elif w == 1 and abs(v) <= RESIDUAL_MAX:
                records.append(ZeroRecord(z, 1, float(abs(v)), fid))
                continue
            if cell.diameter < 1e-10 or w == 1:
                unresolved.append(cell)
                continue
        for frac in _SPLIT_FRACTIONS:
            a, b = cell.split(frac)
            try:
                wa, wb = scanner.winding(a), scanner.winding(b)
            except BoundaryZero:
                continue
            if wa + wb == w:
                stack.append((b, wb))
                stack.append((a, wa))
                break
        else:
            unresolved.append(cell)
    return records, unresolved


def _multiple_location(f: AnalyticFunction, cell: Rectangle) -> complex:
    """Double-zero location: the zero of f' in the cell (cell centre if that fails)."""
    z = cell.center
    try:
        for _ in range(8):
            _, d1, d2 = f.values(np.array([z]), 2)[:, 0]
            if d2 == 0:
                break
            z = z - d1 / d2
        if cell.contains(z, margin=cell.diameter):
            return complex(z)
    except ZetaflowError:
        pass
    return cell.center


def find_zeros(f, rect: Rectangle, *, allow_pole: bool = True, details: bool = False):
    """All zeros of f in ``rect`` as ZeroRecords sorted by (t, sigma).

    The multiplicities always sum to the winding number of the (possibly
    nudged) rectangle; cells that cannot be resolved raise NewtonDiverged
    carrying both the unresolved cells and the zeros found so far.
    """
    f0 = as_analytic(f)
    g, substituted = _prepare(f0, rect)
    if substituted and not allow_pole:
        raise PoleInside("the pole at s = 1 lies in the rectangle")
    fid = f0.name

    def action(scanner: _Scanner, r: Rectangle):
        total = scanner.winding(r)
        return total, _cell_zeros(scanner, g, r, total, fid)

    (total, (records, unresolved)), used, k = _nudged(g, rect, action)
    if substituted:
        records = [_original_residual(f0, rec) for rec in records]
    records.sort(key=lambda r: (r.t, r.sigma))
    if unresolved:
        raise NewtonDiverged(f"{len(unresolved)} cell(s) unresolved", unresolved=unresolved, zeros=records)
    if sum(r.multiplicity for r in records) != total:
        raise NewtonDiverged("multiplicities do not add up to the winding number", zeros=records)
    if details:
        return records, ScanResult(used, total, substituted, k)
    return records


def _original_residual(f: AnalyticFunction, rec: ZeroRecord) -> ZeroRecord:
    try:
        r = abs(f(rec.location))
    except ZetaflowError:
        return rec
    return ZeroRecord(rec.location, rec.multiplicity, float(r), rec.function_id)


# ---------------------------------------------------------------------------
# counting


def count_formula(T: float, alpha: float) -> float:
    """Asymptotic number of zeros with 0 < Im z <= T of zeta(s, alpha)."""
    if not T > 0:
        raise ValueError("T must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    x = T / (2 * math.pi)
    return x * math.log(x) - x - x * math.log(alpha)


def counting_window(alpha: float, T: float, t_min: float = 1e-4) -> Rectangle:
    return Rectangle(-1.0 + math.log(alpha) / math.log(2 * math.pi * math.e), 3.0, t_min, float(T))


def compare_counts(target, T: float, *, t_min: float = 1e-4, max_widenings: int = 4) -> CountComparison:
    """Scan-count the zeros with 0 < t <= T and compare with :func:`count_formula`.

    ``target`` is a Hurwitz parameter alpha (float) or a combination spec with
    prime modulus p (then alpha = 1/p in the formula).
    """
    from .analytic import hurwitz_function
    from .families import CombinationSpec, combination_function
    from .zeta import is_prime

    if not 0 < T <= 500:
        raise ValueError("T must lie in (0, 500]")
    if isinstance(target, CombinationSpec):
        if target.family == "Hurwitz":
            alpha = float(target.params["alpha"])
        else:
            if not is_prime(target.modulus):
                raise ValueError("count comparison needs a prime modulus")
            alpha = 1.0 / target.modulus
        f = combination_function(target)
    else:
        alpha = float(target)
        f = hurwitz_function(alpha)
    rect = counting_window(alpha, T, t_min)
    for _ in range(max_widenings + 1):
        zeros = find_zeros(f, rect)
        edge = [z for z in zeros
                if z.sigma - rect.sigma_min < 0.2 or rect.sigma_max - z.sigma < 0.2]
        if not edge:
            break
        half = rect.width
        rect = Rectangle(rect.sigma_min - half / 2, rect.sigma_max + half / 2, rect.t_min, rect.t_max)
    actual = sum(z.multiplicity for z in zeros)
    predicted = count_formula(T, alpha)
    return CountComparison(float(T), alpha, predicted, actual, predicted - actual, rect, tuple(zeros))


# ---------------------------------------------------------------------------
# export


def zeros_to_csv(records: Iterable[ZeroRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma", "t", "multiplicity", "residual"])
    for r in records:
        w.writerow([f"{r.sigma:.15g}", f"{r.t:.15g}", r.multiplicity, f"{r.residual:.15g}"])
    return buf.getvalue()
