"""Continuation of zeros along a real flow parameter.

A zero z(p) of F(s; p) obeys dz/dp = -F_p / F_s.  Each step takes a classical
RK4 predictor on that ODE and a short Newton corrector on F(.; p); steps are
halved when the corrector is slow or the correction is large compared with
the step, and grown after a run of easy steps.

Near a double zero F_s vanishes and the ODE is singular.  There the tracker
moves the parameter a small distance off the real axis (p -> p + i*delta),
which separates the colliding pair, and returns to real p once the zero is
again well isolated.  The detour is logged as a BifurcationEvent.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoefficientPole, LostZero, NoFlowParameter, WrongFlow, ZetaflowError
from .families import CombinationSpec, _combo_eval, flow_coefficients
from .zeros import Rectangle, _Scanner, count_formula
from .analytic import AnalyticFunction
from .zeta import DEFAULT_TOL, hurwitz_jet

ON_LINE_TOL = 1e-7
RESIDUAL_MAX = 1e-8
# largest regularization offset reached by escalation (x10 per corrector failure)
MAX_OFFSET = 1e-3


@dataclass
class StepControl:
    """Step-size and regularization settings.

    ``rho`` below is |F'|/|F''| at the tracked zero, roughly half the
    distance to the nearest other zero.  Regularization switches on when it
    drops below ``rho_on`` and off again above ``rho_off``.  If the
    corrector still fails on the regularized path, the offset is raised
    tenfold, up to ``MAX_OFFSET``.
    """

    initial_step: float = 1e-3
    min_step: float = 1e-11
    max_step: float = 0.05
    grow_factor: float = 1.5
    grow_after: int = 10
    max_newton: int = 4
    max_displacement: float = 0.25
    displacement_rho_fraction: float = 0.5
    n_samples: int = 200
    regularize: bool = True
    offset: float = 1e-6
    rho_on: float = 1e-2
    rho_off: float = 3e-2
    max_steps: int = 500_000
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class Sample:
    param: float
    z: complex
    residual: float
    scaled_t: float | None = None
    regularized: bool = False


@dataclass(frozen=True)
class BifurcationEvent:
    param_value: float
    location: complex
    kind: str
    derivative_magnitude: float
    threshold: float
    end_param: float | None = None
    end_location: complex | None = None


@dataclass
class Trajectory:
    flow_parameter: str
    param_from: float
    param_to: float
    samples: list[Sample]
    events: list[BifurcationEvent]
    regularization_offset: complex
    function_id: str
    steps: int = 0

    @property
    def final(self) -> complex:
        return self.samples[-1].z

    @property
    def params(self) -> np.ndarray:
        return np.array([s.param for s in self.samples])

    @property
    def path(self) -> np.ndarray:
        return np.array([s.z for s in self.samples])


# ---------------------------------------------------------------------------
# flows


class _Flow:
    """F(s; p) with s-jets and the parameter derivative, for complex p."""

    name = "param"
    hurwitz = False
    symmetric = False

    def jets(self, z: complex, p: complex, order: int) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, z: complex, p: complex) -> complex:
        raise NotImplementedError

    def scaled(self, z: complex, p: float) -> float | None:
        return None


class _HurwitzFlow(_Flow):
    name = "alpha"
    hurwitz = True

    def __init__(self, tol: float):
        self.tol = tol

    def jets(self, z, p, order):
        return hurwitz_jet(z, p, order, self.tol)[0]

    def velocity(self, z, p):
        d = hurwitz_jet(z, p, 1, self.tol)[0][1]
        # d zeta / d alpha = -(s) zeta(s+1, alpha), written regularly at s = 0
        dp = -hurwitz_jet(z + 1, p, 0, self.tol, "times_pole")[0][0]
        return complex(-dp / d)

    def scaled(self, z, p):
        if z.imag <= 0:
            return None
        return count_formula(z.imag, p)


class _CombinationFlow(_Flow):
    def __init__(self, spec: CombinationSpec, tol: float):
        if spec.flow_parameter is None:
            raise NoFlowParameter("generic combinations carry no flow parameter")
        self.spec = spec
        self.name = spec.flow_parameter
        self.tol = tol
        self.symmetric = True

    def _mode(self, z, c):
        if abs(z - 1) < 0.5 and abs(c.sum()) <= 1e-14 * np.abs(c).max():
            return "minus_pole"
        return "plain"

    def _eval(self, z, p, order, extra):
        alphas, c, dc = flow_coefficients(self.spec, p)
        return _combo_eval(self.spec.modulus, self.spec.prefactor, alphas, c, np.array([z]),
                           order, self.tol, self._mode(z, c), extra=(dc,) if extra else ())

    def jets(self, z, p, order):
        return self._eval(z, p, order, False)[0][:, 0]

    def velocity(self, z, p):
        jets, _, (dp,) = self._eval(z, p, 1, True)
        return complex(-dp[0] / jets[1, 0])


def _make_flow(spec: CombinationSpec, tol: float) -> _Flow:
    if spec.family == "Hurwitz":
        return _HurwitzFlow(tol)
    return _CombinationFlow(spec, tol)


# ---------------------------------------------------------------------------
# integrator


def _on_line(z: complex) -> bool:
    return abs(z.real - 0.5) < ON_LINE_TOL


def _classify(symmetric: bool, before: complex, after: complex) -> str:
    if not symmetric:
        return "near-multiple"
    a, b = _on_line(before), _on_line(after)
    if a and not b:
        return "split-off-line"
    if b and not a:
        return "merge-on-line"
    return "near-multiple"


def _newton(flow: _Flow, z: complex, p: complex, max_iter: int):
    """Newton on F(.; p); returns (z, converged, (F, F', F''))."""
    for _ in range(max_iter):
        F, F1 = flow.jets(z, p, 1)
        if F1 == 0 or not cmath.isfinite(F1):
            return z, False, None
        dz = F / F1
        z = z - dz
        # quadratic convergence: the error after a step this small is ~dz^2
        if abs(dz) <= 1e-10 * max(1.0, abs(z)):
            break
    else:
        return z, False, None
    jets = flow.jets(z, p, 2)
    return z, True, jets


def _rk4(flow: _Flow, z: complex, p: complex, h: float) -> complex:
    k1 = flow.velocity(z, p)
    k2 = flow.velocity(z + 0.5 * h * k1, p + 0.5 * h)
    k3 = flow.velocity(z + 0.5 * h * k2, p + 0.5 * h)
    k4 = flow.velocity(z + h * k3, p + h)
    return z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def _rho(jets) -> float:
    F1, F2 = abs(jets[1]), abs(jets[2])
    return math.inf if F2 == 0 else F1 / F2


def _integrate(flow: _Flow, z0: complex, p0: float, p1: float, ctrl: StepControl,
               function_id: str) -> Trajectory:
    z, ok, jets = _newton(flow, complex(z0), p0, 30)
    if not ok or abs(jets[0]) > RESIDUAL_MAX:
        raise LostZero("start point is not a zero of the function", param=p0, z=z0)

    def sample(p, z, jets, reg):
        return Sample(float(p), complex(z), float(abs(jets[0])), flow.scaled(z, p), reg)

    samples = [sample(p0, z, jets, False)]
    events: list[BifurcationEvent] = []
    if p1 == p0:
        return Trajectory(flow.name, p0, p1, samples, events, 0j, function_id)

    direction = 1.0 if p1 > p0 else -1.0
    grid = np.linspace(p0, p1, max(1, ctrl.n_samples) + 1)
    p = float(p0)
    h = ctrl.initial_step
    off = 0j
    rho = _rho(jets)
    accepts = 0
    steps = 0
    open_event = None
    used_off = ctrl.offset
    last_dz = 0.0
    gi = 1
    while gi < len(grid):
        steps += 1
        if steps > ctrl.max_steps:
            raise LostZero("step budget exhausted", param=p, z=z)
        target = float(grid[gi])
        remaining = abs(target - p)
        hh = remaining if remaining <= h * (1 + 1e-9) else h
        pn = target if hh == remaining else p + direction * hh
        okstep = False
        try:
            zp = _rk4(flow, z, p + off, direction * hh)
            zn, conv, jn = _newton(flow, zp, pn + off, ctrl.max_newton)
            if conv and jn is not None and np.all(np.isfinite(jn)):
                dz = abs(zn - z)
                cap = min(ctrl.max_displacement, ctrl.displacement_rho_fraction * rho)
                okstep = (abs(zn - zp) <= 0.2 * dz + 1e-10 and dz <= cap
                          and abs(jn[0]) <= RESIDUAL_MAX)
        except (ZetaflowError, ValueError, OverflowError, ZeroDivisionError):
            okstep = False
        if not okstep:
            h *= 0.5
            accepts = 0
            if h < ctrl.min_step:
                if ctrl.regularize and off == 0 and _pair_nearby(flow, z, p, max(10 * last_dz, 1e-4)):
                    off, z, jets, open_event = _open_event(flow, z, p, ctrl, jets)
                    rho = _rho(jets)
                    h = ctrl.initial_step * 0.1
                    continue
                if off != 0 and abs(off) * 10 <= MAX_OFFSET:
                    # the detour passes too close to the other zero: widen it
                    widened = _widen(flow, z, p, off)
                    if widened is not None:
                        off *= 10
                        used_off = max(used_off, abs(off))
                        z, jets = widened
                        rho = _rho(jets)
                        h = ctrl.initial_step * 0.1
                        continue
                raise LostZero(f"corrector failed at {flow.name}={p:.15g}", param=p, z=z)
            continue
        last_dz = abs(zn - z)
        z, p, jets, rho = zn, pn, jn, _rho(jn)
        accepts += 1
        if accepts >= ctrl.grow_after:
            h = min(h * ctrl.grow_factor, ctrl.max_step)
            accepts = 0
        if ctrl.regularize:
            if off == 0 and rho < ctrl.rho_on:
                off, z, jets, open_event = _open_event(flow, z, p, ctrl, jets)
                rho = _rho(jets)
            elif off != 0 and rho > ctrl.rho_off:
                zr, conv, jr = _newton(flow, z, p, 30)
                if conv and abs(jr[0]) <= RESIDUAL_MAX:
                    off = 0j
                    z, jets, rho = zr, jr, _rho(jr)
                    events.append(_close_event(flow, open_event, p, z))
                    open_event = None
        if pn == target:
            samples.append(sample(p, z, jets, off != 0))
            gi += 1
    if open_event is not None:
        zr, conv, jr = _newton(flow, z, p, 30)
        if conv and abs(jr[0]) <= RESIDUAL_MAX:
            samples[-1] = sample(p, zr, jr, False)
            z = zr
        events.append(_close_event(flow, open_event, p, z))
    return Trajectory(flow.name, p0, p1, samples, events,
                      1j * used_off if ctrl.regularize else 0j, function_id, steps)


def _widen(flow: _Flow, z: complex, p: float, off: complex, n: int = 20):
    """Follow the zero from parameter p + off to p + 10 off; None on failure.

    The offset is increased along the imaginary direction in small steps so
    the corrector cannot hop onto the neighbouring zero.
    """
    dp = 9 * off / n
    q = p + off
    jets = None
    for _ in range(n):
        try:
            zp = _rk4(flow, z, q, dp)
            zn, conv, jets = _newton(flow, zp, q + dp, 30)
        except (ZetaflowError, ValueError, OverflowError, ZeroDivisionError):
            return None
        if not conv or abs(jets[0]) > RESIDUAL_MAX or abs(zn - zp) > 0.2 * abs(zn - z) + 1e-12:
            return None
        z, q = zn, q + dp
    return z, jets


def _pair_nearby(flow: _Flow, z: complex, p: float, r: float) -> bool:
    f = AnalyticFunction(lambda s, order: np.array([[flow.jets(si, p, order)[j] for si in s]
                                                    for j in range(order + 1)]), "flow")
    try:
        w = _Scanner(f).winding(Rectangle(z.real - r, z.real + r, z.imag - r, z.imag + r))
    except ZetaflowError:
        return False
    return w >= 2


def _open_event(flow: _Flow, z, p, ctrl: StepControl, jets):
    off = 1j * ctrl.offset
    info = {"param": p, "z": z, "deriv": abs(jets[1]), "threshold": ctrl.rho_on * abs(jets[2])}
    zr, conv, jr = _newton(flow, z, p + off, 30)
    if not conv:
        raise LostZero("could not move onto the regularized path", param=p, z=z)
    return off, zr, jr, info


def _close_event(flow: _Flow, info: dict, p: float, z: complex) -> BifurcationEvent:
    return BifurcationEvent(
        param_value=float(info["param"]),
        location=complex(info["z"]),
        kind=_classify(flow.symmetric, info["z"], z),
        derivative_magnitude=float(info["deriv"]),
        threshold=float(info["threshold"]),
        end_param=float(p),
        end_location=complex(z),
    )


# ---------------------------------------------------------------------------
# public API


def track_hurwitz_zero(z_start: complex, alpha_from: float, alpha_to: float,
                       step_ctrl: StepControl | None = None) -> Trajectory:
    """Follow a zero of zeta(s, alpha) as alpha moves from ``alpha_from`` to ``alpha_to``."""
    ctrl = step_ctrl or StepControl()
    for a in (alpha_from, alpha_to):
        if not 1e-10 <= a <= 1:
            raise ValueError("alpha must lie in [1e-10, 1]")
    flow = _HurwitzFlow(ctrl.tol)
    return _integrate(flow, z_start, float(alpha_from), float(alpha_to), ctrl, "hurwitz")


def track_family_zero(spec: CombinationSpec, z_start: complex, param_from: float, param_to: float,
                      step_ctrl: StepControl | None = None) -> Trajectory:
    """Follow a zero of a family member along the family's flow parameter."""
    ctrl = step_ctrl or StepControl()
    if spec.family == "Hurwitz":
        return track_hurwitz_zero(z_start, param_from, param_to, ctrl)
    flow = _make_flow(spec, ctrl.tol)
    return _integrate(flow, z_start, float(param_from), float(param_to), ctrl, spec.function_id)


def scaled_spectrum(traj: Trajectory) -> list[tuple[float, float | None]]:
    """(alpha, N(Im z, alpha)) per sample of a Hurwitz trajectory."""
    if traj.flow_parameter != "alpha":
        raise WrongFlow("scaled spectra are defined for Hurwitz flows only")
    return [(s.param, count_formula(s.z.imag, s.param) if s.z.imag > 0 else None)
            for s in traj.samples]


# ---------------------------------------------------------------------------
# linearized motion near a zero of the perturbation


@dataclass
class LinearizedFlowResult:
    z_infinity: complex
    path: list[tuple[float, complex]]
    classification: str
    winding: float
    angular_spread: float
    hypothetical: bool = False


def linearized_flow(z_infinity: complex, dz0: complex, p_base: int = 5,
                    phi_range: tuple[float, float] = (0.0, math.pi), n_steps: int = 2000,
                    *, hypothetical: bool = False) -> LinearizedFlowResult:
    """Integrate dz'(phi) = i dz (E-1)/(E+1), E = e^(2 i phi) p^(1/2 - z_inf), by RK4.

    ``hypothetical=True`` flips the sign of the right-hand side, modelling
    circulation about a zero of zeta(s) itself off the critical line (a
    demonstration input only; no such zero is known).
    """
    z_inf = complex(z_infinity)
    dz = complex(dz0)
    if dz == 0:
        raise ValueError("dz0 must be non-zero")
    phi0, phi1 = map(float, phi_range)
    c = p_base ** (0.5 - z_inf)
    sign = -1.0 if hypothetical else 1.0

    # E = -1 needs |c| = 1 and 2 phi + arg c = pi (mod 2 pi)
    if abs(abs(c) - 1) < 1e-12:
        a = cmath.phase(c)
        k_lo = math.ceil((2 * phi0 + a - math.pi) / (2 * math.pi) - 1e-12)
        k_hi = math.floor((2 * phi1 + a - math.pi) / (2 * math.pi) + 1e-12)
        if k_lo <= k_hi:
            phi_c = (math.pi + 2 * math.pi * k_lo - a) / 2
            raise CoefficientPole(f"E = -1 at phi = {phi_c:.15g}", phi=phi_c)

    def rhs(phi, d):
        E = cmath.exp(2j * phi) * c
        return sign * 1j * d * (E - 1) / (E + 1)

    h = (phi1 - phi0) / n_steps
    phi = phi0
    path = [(phi, dz)]
    for _ in range(n_steps):
        k1 = rhs(phi, dz)
        k2 = rhs(phi + h / 2, dz + h / 2 * k1)
        k3 = rhs(phi + h / 2, dz + h / 2 * k2)
        k4 = rhs(phi + h, dz + h * k3)
        dz = dz + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        phi += h
        path.append((phi, dz))

    vals = np.array([d for _, d in path])
    ang = np.unwrap(np.angle(vals))
    winding = float((ang[-1] - ang[0]) / (2 * math.pi))
    # collinear motion: the direction is fixed modulo pi
    dirs = np.angle(vals * vals) / 2
    ref = dirs[0]
    spread = float(np.max(np.abs(np.angle(np.exp(2j * (dirs - ref))) / 2)))
    if spread < 1e-6:
        kind = "line"
    else:
        kind = "cycle-ccw" if winding > 0 else "cycle-cw"
    return LinearizedFlowResult(z_inf, path, kind, winding, spread, hypothetical)


# ---------------------------------------------------------------------------
# export


def _event_flags(traj: Trajectory) -> list[str]:
    flags = [""] * len(traj.samples)
    params = traj.params
    for ev in traj.events:
        i = int(np.argmin(np.abs(params - ev.param_value)))
        flags[i] = ev.kind
    return flags


def trajectories_to_csv(trajs: list[Trajectory], with_id: bool | None = None) -> str:
    if with_id is None:
        with_id = len(trajs) > 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["param", "sigma", "t", "residual", "scaled_t", "event_flag"]
    w.writerow((["zero_id"] if with_id else []) + head)
    for k, traj in enumerate(trajs):
        flags = _event_flags(traj)
        for s, fl in zip(traj.samples, flags):
            row = [f"{s.param:.15g}", f"{s.z.real:.15g}", f"{s.z.imag:.15g}", f"{s.residual:.15g}",
                   "" if s.scaled_t is None else f"{s.scaled_t:.15g}", fl]
            w.writerow(([k] if with_id else []) + row)
    return buf.getvalue()


def events_to_json(trajs: list[Trajectory]) -> str:
    out = []
    for k, traj in enumerate(trajs):
        for ev in traj.events:
            out.append({
                "zero_id": k,
                "param": float(f"{ev.param_value:.15g}"),
                "sigma": float(f"{ev.location.real:.15g}"),
                "t": float(f"{ev.location.imag:.15g}"),
                "kind": ev.kind,
            })
    return json.dumps(out, indent=2)
